"""Pseudorandomness checks for a host graph against its parameter set.

Three predicates, each with a quantitative margin:

* degrees within (1 +/- f0/2) pn, exhaustive;
* pairwise codegrees at most delta2, exhaustive up to 20000 vertices and
  sampled (flagged) beyond;
* common non-neighbourhood sizes within (1 +/- f_s) (1-p)^s n for subsets
  of each size up to a cap, sampled: half uniform subsets, half prefixes
  of fresh greedy runs, since prefixes are the sets the process actually
  conditions on.

Margins report the worst consumed-slack fraction even when a check passes:
at desk scale the f-intervals are often wider than the quantity itself, and
the margin says by how much.  `strict_factor` shrinks every slack
(f0, f_s, delta2) by a constant to turn vacuous passes into real ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .graph import Graph, VertexSet, common_non_neighbourhood
from .params import ParamSet, error_f
from .process import run_with_generator

P3_EXHAUSTIVE_LIMIT = 20000


@dataclass
class P1Fragment:
    """Sampled non-neighbourhood check; `samples` keeps every (S, observed)."""

    subsets_tested: int
    max_size_tested: int
    violations: list[tuple[list[int], int, tuple[float, float]]]
    margin_min: float | None
    samples: list[tuple[tuple[int, ...], int]] = field(repr=False)
    mode: str = "sampled"

    def to_dict(self) -> dict:
        return {
            "subsets_tested": self.subsets_tested,
            "max_size_tested": self.max_size_tested,
            "violations": [
                {"S": s, "observed": o, "interval": list(iv)}
                for s, o, iv in self.violations
            ],
            "margin_min": self.margin_min,
            "mode": self.mode,
        }


@dataclass
class P2Fragment:
    violations: list[tuple[int, int, tuple[float, float]]]
    margin_min: float

    def to_dict(self) -> dict:
        return {
            "violations": [
                {"v": v, "degree": d, "interval": list(iv)}
                for v, d, iv in self.violations
            ],
            "margin_min": self.margin_min,
        }


@dataclass
class P3Fragment:
    violations: list[tuple[int, int, int]]
    max_codegree: int
    delta2: float
    pairs_tested: int
    mode: str = "exhaustive"

    def to_dict(self) -> dict:
        return {
            "violations": [
                {"u": u, "v": v, "codegree": c} for u, v, c in self.violations
            ],
            "max_codegree": self.max_codegree,
            "delta2": self.delta2,
            "pairs_tested": self.pairs_tested,
            "mode": self.mode,
        }


@dataclass
class ETableRow:
    """Expected |N^c| at size s and the growth threshold it must clear."""

    s: int
    mu_s: float
    e_s: float
    threshold: float
    threshold_ok: bool

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "mu_s": self.mu_s,
            "e_s": self.e_s,
            "threshold": self.threshold,
            "threshold_ok": self.threshold_ok,
        }


@dataclass
class TypicalityReport:
    p1: P1Fragment
    p2: P2Fragment
    p3: P3Fragment
    typical: bool
    e_table: list[ETableRow]
    strict_factor: float

    def to_dict(self) -> dict:
        return {
            "p1": self.p1.to_dict(),
            "p2": self.p2.to_dict(),
            "p3": self.p3.to_dict(),
            "typical": self.typical,
            "e_table": [row.to_dict() for row in self.e_table],
            "strict_factor": self.strict_factor,
        }


def _check_strict_factor(strict_factor: float) -> None:
    if not 0 < strict_factor <= 1:
        raise ValueError("strict_factor must be in (0, 1]")


def check_p2(g: Graph, ps: ParamSet, strict_factor: float = 1.0) -> P2Fragment:
    """Exhaustive degree check: |d(v) - pn| <= (f0/2) pn for every v."""
    _check_strict_factor(strict_factor)
    if g.n != ps.n:
        raise ValueError("graph and parameters disagree on n")
    pn = ps.p * ps.n
    slack = strict_factor * ps.f0 / 2 * pn
    lo, hi = pn - slack, pn + slack
    degs = np.array(g.degrees(), dtype=np.int64)
    dev = np.abs(degs - pn)
    bad = np.nonzero(dev > slack)[0]
    violations = [(int(v), int(degs[v]), (lo, hi)) for v in bad]
    margin = float(dev.max() / slack) if g.n else 0.0
    return P2Fragment(violations=violations, margin_min=margin)


def check_p3(
    g: Graph,
    ps: ParamSet,
    strict_factor: float = 1.0,
    seed: int = 0,
    pair_sample: int = 2_000_000,
) -> P3Fragment:
    """Codegree check codeg(u,v) <= delta2 over unordered pairs.

    Exhaustive through n = 20000; above that a seeded sample of
    `pair_sample` pairs is scanned and the fragment is flagged "sampled".
    """
    _check_strict_factor(strict_factor)
    if g.n != ps.n:
        raise ValueError("graph and parameters disagree on n")
    cap = strict_factor * ps.delta2
    rows = g.packed_rows()
    violations: list[tuple[int, int, int]] = []
    max_codeg = 0
    pairs = 0

    if g.n <= P3_EXHAUSTIVE_LIMIT:
        mode = "exhaustive"
        for u in range(g.n - 1):
            counts = np.bitwise_count(rows[u] & rows[u + 1 :]).sum(
                axis=1, dtype=np.int64
            )
            pairs += counts.size
            if counts.size:
                max_codeg = max(max_codeg, int(counts.max()))
                for off in np.nonzero(counts > cap)[0]:
                    v = u + 1 + int(off)
                    violations.append((u, v, int(counts[off])))
    else:
        mode = "sampled"
        gen = _rng.stream(seed, _rng.P3_SAMPLE)
        us = gen.integers(0, g.n, size=pair_sample)
        vs = gen.integers(0, g.n - 1, size=pair_sample)
        vs = np.where(vs >= us, vs + 1, vs)  # uniform over ordered pairs, u != v
        counts = np.bitwise_count(rows[us] & rows[vs]).sum(axis=1, dtype=np.int64)
        pairs = pair_sample
        max_codeg = int(counts.max())
        for idx in np.nonzero(counts > cap)[0]:
            u, v = int(us[idx]), int(vs[idx])
            violations.append((min(u, v), max(u, v), int(counts[idx])))

    return P3Fragment(
        violations=violations,
        max_codegree=max_codeg,
        delta2=cap,
        pairs_tested=pairs,
        mode=mode,
    )


def e_table(ps: ParamSet, max_size: int) -> list[ETableRow]:
    """Rows (mu_s, E_s, growth threshold 4 s log n) for s = 1..max_size."""
    rows = []
    for s in range(1, max_size + 1):
        shrink = (1 - ps.p) ** s
        mu = shrink * ps.n
        e_s = (ps.n - s) * shrink
        thr = 4 * s * ps.log_n
        rows.append(
            ETableRow(s=s, mu_s=mu, e_s=e_s, threshold=thr, threshold_ok=e_s >= thr)
        )
    return rows


def check_p1(
    g: Graph,
    ps: ParamSet,
    budget: int = 20,
    max_size: int | None = None,
    seed: int = 0,
    strict_factor: float = 1.0,
) -> P1Fragment:
    """Sampled non-neighbourhood check over sizes 1..max_size (default k).

    Per size: ceil(budget/2) uniform subsets from stream (seed, SUBSET, s)
    and one size-s prefix from each of floor(budget/2) greedy runs driven
    by streams (seed, PREFIX, r).  Runs that exhaust early contribute no
    prefixes beyond their length.
    """
    _check_strict_factor(strict_factor)
    if g.n != ps.n:
        raise ValueError("graph and parameters disagree on n")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if max_size is None:
        max_size = ps.k
    if not 1 <= max_size <= g.n:
        raise ValueError("max_size must be in 1..n")

    n_uniform = (budget + 1) // 2
    n_prefix = budget // 2
    orders = [
        run_with_generator(g, ps, _rng.stream(seed, _rng.PREFIX, r)).order
        for r in range(n_prefix)
    ]

    samples: list[tuple[tuple[int, ...], int]] = []
    violations: list[tuple[list[int], int, tuple[float, float]]] = []
    worst = 0.0
    tested = 0

    def consider(subset: tuple[int, ...]) -> None:
        nonlocal worst, tested
        s = len(subset)
        obs = common_non_neighbourhood(g, VertexSet.from_iterable(g.n, subset)).size
        mu = (1 - ps.p) ** s * ps.n
        slack = strict_factor * error_f(ps, s) * mu
        lo, hi = mu - slack, mu + slack
        tested += 1
        samples.append((subset, obs))
        worst = max(worst, abs(obs - mu) / slack)
        if not lo <= obs <= hi:
            violations.append((list(subset), obs, (lo, hi)))

    for s in range(1, max_size + 1):
        gen = _rng.stream(seed, _rng.SUBSET, s)
        for _ in range(n_uniform):
            consider(tuple(sorted(int(v) for v in gen.choice(g.n, size=s, replace=False))))
        for order in orders:
            if len(order) >= s:
                consider(tuple(sorted(order[:s])))

    return P1Fragment(
        subsets_tested=tested,
        max_size_tested=max_size,
        violations=violations,
        margin_min=worst if tested else None,
        samples=samples,
    )


def is_typical(
    g: Graph,
    ps: ParamSet,
    budget: int = 20,
    seed: int = 0,
    strict_factor: float = 1.0,
    max_size: int | None = None,
) -> TypicalityReport:
    """Conjunction of the three checks plus the expected-size table.

    P1 is sampled (certifies tested subsets only, flagged in the fragment);
    P2 is exhaustive; P3 is exhaustive up to 20000 vertices.
    """
    p1 = check_p1(
        g, ps, budget=budget, max_size=max_size, seed=seed, strict_factor=strict_factor
    )
    p2 = check_p2(g, ps, strict_factor=strict_factor)
    p3 = check_p3(g, ps, strict_factor=strict_factor, seed=seed)
    typical = not (p1.violations or p2.violations or p3.violations)
    return TypicalityReport(
        p1=p1,
        p2=p2,
        p3=p3,
        typical=typical,
        e_table=e_table(ps, p1.max_size_tested),
        strict_factor=strict_factor,
    )
