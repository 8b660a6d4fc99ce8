"""Inter-annotator agreement, one-sided t tests, and rarefaction coverage.

Student-t tail probabilities go through the regularized incomplete beta
function. Reported p-values are floored at 1e-300 so "p = 0" never appears
literally in output.

Rarefaction draws random paper subsets with a counter-based generator
(Philox) keyed by (seed, fraction index, sample index), so runs are
reproducible across platforms and samples are independent streams. When the
number of distinct subsets of the requested size is no larger than the
requested sample count, every distinct subset is evaluated exactly once
instead (the exact expectation, with no Monte Carlo noise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.special import betainc

from .errors import (
    DegenerateError,
    EmptyDictionaryError,
    LengthMismatchError,
    ZeroVarianceError,
)

P_VALUE_FLOOR = 1e-300
ALTERNATIVES = ("greater", "less")


@dataclass(frozen=True)
class RatingTable:
    """Items x categories count matrix with a fixed number of raters per item."""

    counts: tuple[tuple[int, ...], ...]
    n_raters: int

    def __post_init__(self) -> None:
        counts = tuple(tuple(int(c) for c in row) for row in self.counts)
        object.__setattr__(self, "counts", counts)
        if len(counts) < 1:
            raise ValueError("rating table needs at least one item")
        k = len(counts[0])
        if k < 2:
            raise ValueError("rating table needs at least two categories")
        if self.n_raters < 2:
            raise ValueError("agreement needs at least two raters")
        for i, row in enumerate(counts):
            if len(row) != k:
                raise ValueError(f"row {i} has {len(row)} cells, expected {k}")
            if any(c < 0 for c in row):
                raise ValueError(f"row {i} has negative counts")
            if sum(row) != self.n_raters:
                raise ValueError(
                    f"row {i} sums to {sum(row)}, expected n_raters={self.n_raters}"
                )

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]]) -> "RatingTable":
        rows = tuple(tuple(int(c) for c in row) for row in rows)
        if not rows:
            raise ValueError("rating table needs at least one item")
        return cls(counts=rows, n_raters=sum(rows[0]))

    @property
    def n_items(self) -> int:
        return len(self.counts)

    @property
    def n_categories(self) -> int:
        return len(self.counts[0])


def fleiss_kappa(table: RatingTable) -> float:
    """Chance-corrected agreement for a fixed rater count over categorical items.

    kappa = (P_bar - Pe_bar) / (1 - Pe_bar). Raises DegenerateError when every
    rating lands in one category (Pe_bar = 1, kappa undefined).
    """
    n = table.n_raters
    N = table.n_items
    col_sums = [sum(row[j] for row in table.counts) for j in range(table.n_categories)]
    total = N * n
    if any(c == total for c in col_sums):
        raise DegenerateError(
            "all ratings fall into a single category; expected agreement is 1"
        )
    p_cat = [c / total for c in col_sums]
    p_items = [
        (sum(c * c for c in row) - n) / (n * (n - 1)) for row in table.counts
    ]
    p_bar = sum(p_items) / N
    pe_bar = sum(p * p for p in p_cat)
    return (p_bar - pe_bar) / (1.0 - pe_bar)


@dataclass(frozen=True)
class TestResult:
    t_statistic: float
    p_value: float
    degrees_of_freedom: int
    alternative: str

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_value <= 1.0):
            raise ValueError("p_value must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "t_statistic": self.t_statistic,
            "p_value": self.p_value,
            "degrees_of_freedom": self.degrees_of_freedom,
            "alternative": self.alternative,
        }


def student_t_sf(t: float, dof: int) -> float:
    """P(T > t) for Student's t, via the regularized incomplete beta."""
    if dof < 1:
        raise ValueError("degrees of freedom must be >= 1")
    x = dof / (dof + t * t)
    half_tail = 0.5 * float(betainc(dof / 2.0, 0.5, x))
    return half_tail if t >= 0 else 1.0 - half_tail


def _one_sided_p(t: float, dof: int, alternative: str) -> float:
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")
    p = student_t_sf(t, dof) if alternative == "greater" else student_t_sf(-t, dof)
    return max(p, P_VALUE_FLOOR)


def paired_t_one_sided(
    a: Sequence[float], b: Sequence[float], alternative: str = "greater"
) -> TestResult:
    """One-sided paired t test on the differences a - b."""
    if len(a) != len(b):
        raise LengthMismatchError(f"{len(a)} vs {len(b)} paired observations")
    n = len(a)
    if n < 2:
        raise ValueError("paired t test needs at least two pairs")
    diffs = [float(x) - float(y) for x, y in zip(a, b)]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        raise ZeroVarianceError("all differences are identical; t is undefined")
    t = mean / math.sqrt(var / n)
    dof = n - 1
    return TestResult(t, _one_sided_p(t, dof, alternative), dof, alternative)


def one_sample_t_one_sided(
    x: Sequence[float], mu0: float, alternative: str = "greater"
) -> TestResult:
    """One-sided one-sample t test of the mean against mu0."""
    n = len(x)
    if n < 2:
        raise ValueError("one-sample t test needs at least two observations")
    values = [float(v) for v in x]
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    if var == 0.0:
        raise ZeroVarianceError("sample variance is zero; t is undefined")
    t = (mean - mu0) / math.sqrt(var / n)
    dof = n - 1
    return TestResult(t, _one_sided_p(t, dof, alternative), dof, alternative)


@dataclass(frozen=True)
class RarefactionPoint:
    fraction: float
    mean_coverage: float
    std: float
    n_samples: int


@dataclass(frozen=True)
class RarefactionResult:
    points: tuple[RarefactionPoint, ...]

    def __post_init__(self) -> None:
        fractions = [p.fraction for p in self.points]
        if any(b <= a for a, b in zip(fractions, fractions[1:])):
            raise ValueError("fractions must be strictly increasing")
        for p in self.points:
            if not (0.0 <= p.mean_coverage <= 1.0) or p.std < 0.0:
                raise ValueError("coverage must lie in [0, 1] with std >= 0")

    def to_dict(self) -> dict:
        return {
            "points": [
                {
                    "fraction": p.fraction,
                    "mean_coverage": p.mean_coverage,
                    "std": p.std,
                    "n_samples": p.n_samples,
                }
                for p in self.points
            ]
        }


_MASK64 = (1 << 64) - 1


def _sample_subset(n_papers: int, size: int, seed: int, frac_idx: int, sample_idx: int) -> list[int]:
    """Uniform subset without replacement from an independent Philox stream."""
    key = (int(seed) & _MASK64) | ((((frac_idx << 32) | sample_idx) + 1) << 64)
    rng = np.random.Generator(np.random.Philox(key=key))
    indices = list(range(n_papers))
    for pos in range(size):  # partial Fisher-Yates, platform stable
        swap = pos + int(rng.integers(0, n_papers - pos))
        indices[pos], indices[swap] = indices[swap], indices[pos]
    return indices[:size]


def coverage_samples(
    paper_term_sets: Sequence[Iterable[str]],
    dictionary: Iterable[str],
    fraction: float,
    n_samples: int,
    seed: int,
    frac_idx: int = 0,
) -> list[float]:
    """Coverage ratios of n_samples random paper subsets of the given fraction.

    Enumerates every distinct subset instead when there are at most n_samples
    of them. Coverage is |union of subset term sets ∩ dictionary| /
    |dictionary|.
    """
    dict_set = frozenset(dictionary)
    if not dict_set:
        raise EmptyDictionaryError("the reference dictionary is empty")
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    n_papers = len(paper_term_sets)
    if n_papers < 1:
        raise ValueError("need at least one paper term set")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    sets = [frozenset(s) & dict_set for s in paper_term_sets]
    size = math.ceil(fraction * n_papers)

    def cov(indices: Iterable[int]) -> float:
        union: set[str] = set()
        for i in indices:
            union.update(sets[i])
        return len(union) / len(dict_set)

    if math.comb(n_papers, size) <= n_samples:
        return [cov(c) for c in combinations(range(n_papers), size)]
    return [
        cov(_sample_subset(n_papers, size, seed, frac_idx, s)) for s in range(n_samples)
    ]


def rarefaction(
    paper_term_sets: Sequence[Iterable[str]],
    dictionary: Iterable[str],
    fractions: Sequence[float],
    n_samples: int = 50,
    seed: int = 0,
) -> RarefactionResult:
    """Mean/std coverage of the dictionary by random paper subsets per fraction."""
    ordered = sorted(set(float(f) for f in fractions))
    if not ordered:
        raise ValueError("need at least one fraction")
    points: list[RarefactionPoint] = []
    for frac_idx, fraction in enumerate(ordered):
        values = coverage_samples(
            paper_term_sets, dictionary, fraction, n_samples, seed, frac_idx
        )
        mean = sum(values) / len(values)
        std = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
        points.append(
            RarefactionPoint(
                fraction=fraction, mean_coverage=mean, std=std, n_samples=len(values)
            )
        )
    return RarefactionResult(points=tuple(points))
