from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

from .evaluation import EvalLimits, Failure, LimitExceeded, Tower, eval_grid

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"


@dataclass
class VerificationReport:
    name: str
    status: str = PASS
    points: int = 0
    counterexamples: list = field(default_factory=list)
    inconclusive: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == PASS

    def finish(self) -> "VerificationReport":
        if self.counterexamples:
            self.status = FAIL
        elif self.inconclusive:
            self.status = INCONCLUSIVE
        else:
            self.status = PASS
        return self

    def summary(self) -> str:
        s = f"{self.name}: {self.status}, {self.points} points"
        if self.counterexamples:
            c = self.counterexamples[0]
            s += f", {len(self.counterexamples)} counterexample(s), first at {c['point']}"
        if self.inconclusive:
            s += f", {len(self.inconclusive)} inconclusive"
        return s

    def to_dict(self) -> dict:
        d = asdict(self)
        d["counterexamples"] = [{k: _jsonable(v) for k, v in c.items()} for c in self.counterexamples]
        d["inconclusive"] = [list(p) for p in self.inconclusive]
        return d


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, Tower):
        return repr(v)
    if isinstance(v, int) and v.bit_length() > 256:
        return f"<{v.bit_length()}-bit integer>"
    return v


def check_equivalent(lhs, rhs, ranges: Sequence, lim: EvalLimits | None = None,
                     name: str = "equivalence", workers: int = 1) -> VerificationReport:
    """Compare two terms pointwise over an inclusive box.

    Points where either side runs out of resources are listed as inconclusive,
    never counted as agreement.
    """
    lim = lim or EvalLimits()
    n = max(len(ranges), 1)
    ranges = list(ranges) + [(0, 0)] * (max(max(lhs.free, default=-1), max(rhs.free, default=-1)) + 1 - n)
    left = eval_grid(lhs, ranges, lim, workers=workers, allow_failures=True)
    right = eval_grid(rhs, ranges, lim, workers=workers, allow_failures=True)
    rep = VerificationReport(name, points=len(left))
    for (p, a), (_, b) in zip(left, right):
        if isinstance(a, (Failure, Tower)) or isinstance(b, (Failure, Tower)):
            if a != b or isinstance(a, Failure):
                rep.inconclusive.append(p)
            continue
        if a != b:
            rep.counterexamples.append({"point": p, "expected": a, "got": b})
    return rep.finish()


def check_values(name: str, points, expected, actual) -> VerificationReport:
    """Build a report from parallel value sequences (actual may raise per point)."""
    rep = VerificationReport(name)
    for p, want in zip(points, expected):
        rep.points += 1
        try:
            got = actual(p)
        except LimitExceeded:
            rep.inconclusive.append(p)
            continue
        if got != want:
            rep.counterexamples.append({"point": p, "expected": want, "got": got})
    return rep.finish()
