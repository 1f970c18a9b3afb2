"""Verification reports: ordered check entries, text and JSON renderings."""

import json
import math

from ..symcore import ZeroVerdict


def _clean(v):
    if isinstance(v, float):
        if not math.isfinite(v):
            return str(v)
        return float(format(v, ".12g"))
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


class Report:
    """Ordered list of checks plus free-form results for one command."""

    def __init__(self, command, problem):
        self.command = command
        self.problem = problem
        self.checks = []
        self.results = {}
        self.timing = None

    def add(self, name, anchor, verdict, mandatory=True, **extra):
        """Record a check.  ``verdict`` is a ZeroVerdict, or a bool for non-zero-test checks."""
        entry = {"name": name, "anchor": anchor, "mandatory": mandatory}
        if isinstance(verdict, ZeroVerdict):
            entry.update(verdict.to_dict())
            entry["passed"] = verdict.is_zero
        else:
            entry["kind"] = "Pass" if verdict else "Fail"
            entry["tier"] = "numeric" if extra.pop("numeric", False) else "exact"
            entry["passed"] = bool(verdict)
        entry.update(extra)
        self.checks.append(entry)
        return entry["passed"]

    def expect_nonzero(self, name, anchor, verdict, mandatory=True, **extra):
        """Record a check that passes when the verdict is NonZero."""
        entry = {"name": name, "anchor": anchor, "mandatory": mandatory}
        entry.update(verdict.to_dict())
        entry["passed"] = not verdict.is_zero
        entry.update(extra)
        self.checks.append(entry)
        return entry["passed"]

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks if c["mandatory"])

    def to_dict(self):
        d = {"command": self.command, "problem": self.problem,
             "checks": [_clean(c) for c in self.checks],
             "results": _clean(self.results), "passed": self.passed}
        if self.timing is not None:
            d["timing_seconds"] = round(self.timing, 3)
        return d

    def machine(self):
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def text(self):
        lines = [f"{self.command}: {self.problem}"]
        for c in self.checks:
            status = "PASS" if c["passed"] else "FAIL"
            opt = "" if c["mandatory"] else " (advisory)"
            lines.append(f"  [{status}] {c['name']}{opt}: {c['kind']} ({c['tier']})")
            if c["kind"] == "NonZero":
                where = f" at {c['where']}" if "where" in c else ""
                pts = ", ".join(f"{k}={v:.6g}" for k, v in c.get("witness", {}).items())
                lines.append(f"      value {c['value']:.6g}{where}" + (f" [{pts}]" if pts else ""))
        for k, v in self.results.items():
            lines.append(f"  {k}: {_fmt(v)}")
        if self.timing is not None:
            lines.append(f"  time: {self.timing:.3f} s")
        lines.append("OVERALL: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".6g")
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_fmt(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)
