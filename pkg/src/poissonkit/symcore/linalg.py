"""Small symbolic and numeric linear algebra.

Symbolic matrices are lists of lists of expressions.  Determinants and
inverses are computed by Gauss-Jordan elimination inside one rational
function field, so every intermediate is already gcd-reduced.
"""

import numpy as np

from ..errors import SingularMatrixError
from .expr import as_expr
from .normal import RatContext


def _square(M):
    n = len(M)
    if any(len(r) != n for r in M):
        raise ValueError("matrix must be square")
    return n


def _eliminate(ctx, rows, n, augment):
    """Gauss-Jordan on field elements; returns (det, inverse-or-None)."""
    K = ctx.K
    A = [list(r) for r in rows]
    inv = [[K.one if i == j else K.zero for j in range(n)] for i in range(n)] if augment else None
    det = K.one
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c]), None)
        if piv is None:
            return K.zero, None
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            if augment:
                inv[c], inv[piv] = inv[piv], inv[c]
            det = -det
        p = A[c][c]
        det = det * p
        pinv = 1 / p
        A[c] = [x * pinv for x in A[c]]
        if augment:
            inv[c] = [x * pinv for x in inv[c]]
        for r in range(n):
            if r == c or not A[r][c]:
                continue
            f = A[r][c]
            A[r] = [a - f * b for a, b in zip(A[r], A[c])]
            if augment:
                inv[r] = [a - f * b for a, b in zip(inv[r], inv[c])]
    return det, inv


def det(M):
    """Symbolic determinant (normalized)."""
    n = _square(M)
    if n == 0:
        return as_expr(1)
    ctx = RatContext([e for r in M for e in r])
    rows = [[ctx.to_el(e) for e in r] for r in M]
    d, _ = _eliminate(ctx, rows, n, False)
    return ctx.to_expr(d)


def inverse(M):
    """Symbolic inverse; raises SingularMatrixError if the determinant is identically zero."""
    n = _square(M)
    ctx = RatContext([e for r in M for e in r])
    rows = [[ctx.to_el(e) for e in r] for r in M]
    d, inv = _eliminate(ctx, rows, n, True)
    if inv is None:
        raise SingularMatrixError("matrix is singular (determinant is identically zero)")
    return [[ctx.to_expr(x) for x in r] for r in inv]


def det_and_inverse(M):
    n = _square(M)
    ctx = RatContext([e for r in M for e in r])
    rows = [[ctx.to_el(e) for e in r] for r in M]
    d, inv = _eliminate(ctx, rows, n, True)
    if inv is None:
        return ctx.to_expr(d), None
    return ctx.to_expr(d), [[ctx.to_expr(x) for x in r] for r in inv]


def matmul(A, B):
    """Product of symbolic matrices, normalized entrywise in one shared field."""
    m, k = len(A), len(B)
    p = len(B[0]) if B else 0
    if any(len(r) != k for r in A):
        raise ValueError("shape mismatch")
    ctx = RatContext([e for r in A for e in r] + [e for r in B for e in r])
    a = [[ctx.to_el(e) for e in r] for r in A]
    b = [[ctx.to_el(e) for e in r] for r in B]
    K = ctx.K
    out = []
    for i in range(m):
        row = []
        for j in range(p):
            acc = K.zero
            for t in range(k):
                if a[i][t] and b[t][j]:
                    acc = acc + a[i][t] * b[t][j]
            row.append(ctx.to_expr(acc))
        out.append(row)
    return out


def transpose(A):
    return [list(r) for r in zip(*A)]


# numeric ---------------------------------------------------------------------

def full_pivot_lu(A):
    """LU with complete pivoting: returns (LU, row_perm, col_perm, rank_tol_diag)."""
    A = np.array(A, dtype=float)
    n, m = A.shape
    rp = np.arange(n)
    cp = np.arange(m)
    for k in range(min(n, m)):
        sub = np.abs(A[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i += k
        j += k
        A[[k, i], :] = A[[i, k], :]
        rp[[k, i]] = rp[[i, k]]
        A[:, [k, j]] = A[:, [j, k]]
        cp[[k, j]] = cp[[j, k]]
        if A[k, k] == 0.0:
            break
        A[k + 1:, k] /= A[k, k]
        A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:])
    return A, rp, cp


def numeric_rank(A, threshold=1e-8):
    """Rank by complete-pivot elimination, scaled by the largest entry."""
    A = np.array(A, dtype=float)
    if A.size == 0:
        return 0
    scale = np.max(np.abs(A))
    if scale == 0.0:
        return 0
    LU, _, _ = full_pivot_lu(A / scale)
    d = np.abs(np.diag(LU))
    return int(np.sum(d > threshold))


def solve(A, b):
    """Solve A x = b by complete-pivot LU; raises SingularMatrixError."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    n = A.shape[0]
    LU, rp, cp = full_pivot_lu(A)
    scale = max(np.max(np.abs(A)), 1e-300)
    if np.min(np.abs(np.diag(LU))) <= 1e-14 * scale:
        raise SingularMatrixError("matrix is numerically singular")
    y = b[rp].astype(float)
    for i in range(n):
        y[i] -= LU[i, :i] @ y[:i]
    x = np.zeros_like(y)
    for i in reversed(range(n)):
        x[i] = (y[i] - LU[i, i + 1:] @ x[i + 1:]) / LU[i, i]
    out = np.empty_like(x)
    out[cp] = x
    return out


def numeric_inverse(A):
    A = np.array(A, dtype=float)
    n = A.shape[0]
    return np.column_stack([solve(A, np.eye(n)[:, j]) for j in range(n)])
