"""Verification settings shared by every check."""

from dataclasses import dataclass, replace

from .symcore.zero import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL


@dataclass(frozen=True)
class Settings:
    tol: float = DEFAULT_TOL
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    rank_points: int = 25
    rank_threshold: float = 1e-8
    surface_box: float = 1.0

    def with_(self, **kw):
        return replace(self, **kw)


DEFAULT = Settings()


def resolve(settings):
    return DEFAULT if settings is None else settings
