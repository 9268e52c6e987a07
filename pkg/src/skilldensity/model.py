"""Generative model: test skill densities, random comparison graphs, BTL games.

Skills live in [delta, 1] and are drawn i.i.d. from a density in a bounded,
Holder-smooth class that keeps some mass near 1. Which pairs play is decided
by an Erdos-Renyi graph; game outcomes follow the Bradley-Terry-Luce rule
(the better player wins each game with probability alpha_j / (alpha_i + alpha_j)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .rng import child_rng

UNIFORM = "uniform"
BUMP = "bump"
TENT = "tent"
FAMILIES = (UNIFORM, BUMP, TENT)

# chunk sizes keep peak memory flat when n*(n-1)/2 runs into the tens of millions
_EDGE_CHUNK = 2_000_000


class InfeasibleDensitySpec(ValueError):
    """The requested family cannot satisfy the class bounds (floor/cap/mass)."""


@dataclass(frozen=True)
class DensityClassSpec:
    """Parameters of the admissible density class.

    delta            lower edge of the support [delta, 1]
    floor_width      width of the neighborhood of 1 where the floor applies
    floor            minimum density value on [1 - floor_width, 1]
    smoothness       Holder order of the class
    smoothness_const Holder constant
    cap              uniform upper bound on the density
    """

    delta: float
    floor_width: float = 0.1
    floor: float = 0.5
    smoothness: float = 1.0
    smoothness_const: float = 10.0
    cap: float = 4.0

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0,1), got {self.delta}")
        if not 0.0 < self.floor_width < 1.0:
            raise ValueError(f"floor_width must be in (0,1), got {self.floor_width}")
        if self.floor <= 0.0:
            raise ValueError(f"floor must be positive, got {self.floor}")
        if self.cap < self.floor:
            raise ValueError(f"cap {self.cap} is below floor {self.floor}")
        if self.smoothness <= 0.0 or self.smoothness_const <= 0.0:
            raise ValueError("smoothness and smoothness_const must be positive")


class TestDensity:
    """A member of the admissible class with exact CDF and inverse-CDF sampling.

    Subclasses implement pdf/cdf/ppf on the support; this base supplies
    sampling and the support window. All are vectorized over numpy arrays.
    """

    family: str = ""

    def __init__(self, spec: DensityClassSpec):
        self.spec = spec
        self.delta = spec.delta

    @property
    def support(self) -> tuple[float, float]:
        return (self.delta, 1.0)

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, u):
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(n)
        return np.clip(self.ppf(u), self.delta, 1.0)


class UniformDensity(TestDensity):
    """Flat density 1/(1-delta) on [delta, 1]."""

    family = UNIFORM

    def __init__(self, spec: DensityClassSpec):
        super().__init__(spec)
        self.height = 1.0 / (1.0 - spec.delta)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.delta) & (x <= 1.0), self.height, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.delta) * self.height, 0.0, 1.0)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return self.delta + u * (1.0 - self.delta)


class RaisedCosineBump(TestDensity):
    """Asymmetric raised-cosine bump: zero at delta, strictly positive at 1.

    Rises as a half cosine on [delta, center] and descends on [center, 1]
    along a cosine whose half-period is 2*(1-center), so the right tail is
    cut at its quarter period and the density at 1 stays at half the peak.
    """

    family = BUMP

    def __init__(self, spec: DensityClassSpec, center: float | None = None):
        super().__init__(spec)
        d = spec.delta
        if center is None:
            center = d + 0.5 * (1.0 - d)
        if not d < center < 1.0:
            raise InfeasibleDensitySpec(f"bump center {center} outside ({d}, 1)")
        self.center = center
        self.w_left = center - d
        self.w_right = 2.0 * (1.0 - center)
        self.mass_left = self.w_left / 2.0
        self.mass_right = (1.0 - center) * (math.pi + 2.0) / (2.0 * math.pi)
        self.norm = self.mass_left + self.mass_right

    def _raw(self, x):
        c = self.center
        left = 0.5 * (1.0 + np.cos(np.pi * (x - c) / self.w_left))
        right = 0.5 * (1.0 + np.cos(np.pi * (x - c) / self.w_right))
        return np.where(x <= c, left, right)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.delta) & (x <= 1.0)
        return np.where(inside, self._raw(np.clip(x, self.delta, 1.0)) / self.norm, 0.0)

    def _raw_cdf(self, x):
        # antiderivative of each cosine piece; continuous at the center
        c = self.center
        left = 0.5 * ((x - self.delta) + (self.w_left / np.pi) * np.sin(np.pi * (x - c) / self.w_left))
        right = self.mass_left + 0.5 * ((x - c) + (self.w_right / np.pi) * np.sin(np.pi * (x - c) / self.w_right))
        return np.where(x <= c, left, right)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip(self._raw_cdf(np.clip(x, self.delta, 1.0)) / self.norm, 0.0, 1.0)

    def ppf(self, u):
        # monotone CDF; bisection to beyond double precision in 80 halvings
        u = np.asarray(u, dtype=float)
        target = np.clip(u, 0.0, 1.0) * self.norm
        lo = np.full_like(target, self.delta)
        hi = np.ones_like(target)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = self._raw_cdf(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


class LinearTent(TestDensity):
    """Piecewise-linear tent: zero at delta, peak at the mode, half peak at 1."""

    family = TENT

    def __init__(self, spec: DensityClassSpec, mode: float | None = None):
        super().__init__(spec)
        d = spec.delta
        if mode is None:
            mode = 0.5 * (d + 1.0)
        if not d < mode < 1.0:
            raise InfeasibleDensitySpec(f"tent mode {mode} outside ({d}, 1)")
        self.mode = mode
        self.mass_left = (mode - d) / 2.0
        self.mass_right = 0.75 * (1.0 - mode)
        self.norm = self.mass_left + self.mass_right

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        d, m = self.delta, self.mode
        up = (x - d) / (m - d)
        down = 1.0 - (x - m) / (2.0 * (1.0 - m))
        raw = np.where(x <= m, up, down)
        inside = (x >= d) & (x <= 1.0)
        return np.where(inside, raw / self.norm, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        d, m = self.delta, self.mode
        xc = np.clip(x, d, 1.0)
        left = (xc - d) ** 2 / (2.0 * (m - d))
        t = xc - m
        right = self.mass_left + t - t**2 / (4.0 * (1.0 - m))
        return np.clip(np.where(xc <= m, left, right) / self.norm, 0.0, 1.0)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        d, m = self.delta, self.mode
        target = np.clip(u, 0.0, 1.0) * self.norm
        # left piece: quadratic with zero slope intercept at delta
        x_left = d + np.sqrt(np.maximum(2.0 * (m - d) * target, 0.0))
        # right piece: t - t^2/(4(1-m)) = target - mass_left, smaller root
        r = np.maximum(target - self.mass_left, 0.0)
        disc = np.maximum((1.0 - m) * (1.0 - m - r), 0.0)
        x_right = m + 2.0 * (1.0 - m) - 2.0 * np.sqrt(disc)
        return np.where(target <= self.mass_left, x_left, np.minimum(x_right, 1.0))


def _validate_density(density: TestDensity) -> None:
    spec = density.spec
    xs = np.linspace(spec.delta, 1.0, 10_001)
    vals = density.pdf(xs)
    mass = float(np.trapezoid(vals, xs))
    if abs(mass - 1.0) > 1e-8:
        raise InfeasibleDensitySpec(
            f"{density.family}: mass {mass!r} deviates from 1 by more than 1e-8"
        )
    if float(vals.max()) > spec.cap + 1e-12:
        raise InfeasibleDensitySpec(
            f"{density.family}: density reaches {vals.max():.6g}, above cap {spec.cap}"
        )
    near_one = np.linspace(1.0 - spec.floor_width, 1.0, 1_000)
    floor_vals = density.pdf(near_one)
    if float(floor_vals.min()) < spec.floor - 1e-12:
        raise InfeasibleDensitySpec(
            f"{density.family}: density falls to {floor_vals.min():.6g} near 1, "
            f"below floor {spec.floor}"
        )
    outside = density.pdf(np.array([spec.delta - 1e-9, 1.0 + 1e-9, -0.5, 1.5]))
    if np.any(outside != 0.0):
        raise InfeasibleDensitySpec(f"{density.family}: support leaks outside [delta, 1]")


def make_test_density(
    spec: DensityClassSpec,
    family: str,
    *,
    center: float | None = None,
    mode: float | None = None,
) -> TestDensity:
    """Build a class member and verify it actually satisfies the class bounds."""
    if family == UNIFORM:
        density: TestDensity = UniformDensity(spec)
    elif family == BUMP:
        density = RaisedCosineBump(spec, center=center)
    elif family == TENT:
        density = LinearTent(spec, mode=mode)
    else:
        raise ValueError(f"unknown density family {family!r}; expected one of {FAMILIES}")
    _validate_density(density)
    return density


@dataclass(frozen=True)
class SkillVector:
    """Latent skills of the n players, each in [delta, 1]."""

    values: np.ndarray
    delta: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("need at least 2 skill values")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0,1), got {self.delta}")
        if float(values.min()) < self.delta - 1e-12 or float(values.max()) > 1.0 + 1e-12:
            raise ValueError("skill values must lie in [delta, 1]")
        values.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.values.size)


def sample_skills(density: TestDensity, n: int, seed: int) -> SkillVector:
    """Draw n i.i.d. skills from the density; deterministic given the seed."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = child_rng(seed)
    return SkillVector(values=density.sample(n, rng), delta=density.delta)


@dataclass(frozen=True)
class ComparisonGraph:
    """Undirected graph of pairs whose games are observed.

    Edges are stored as parallel arrays (edge_a[e], edge_b[e]) with
    edge_a < edge_b, sorted lexicographically, each unordered pair at most once.
    """

    n: int
    edge_a: np.ndarray
    edge_b: np.ndarray
    p: float

    def __post_init__(self) -> None:
        a = np.asarray(self.edge_a)
        b = np.asarray(self.edge_b)
        object.__setattr__(self, "edge_a", a)
        object.__setattr__(self, "edge_b", b)
        if self.n < 2:
            raise ValueError("graph needs n >= 2")
        if a.shape != b.shape:
            raise ValueError("edge arrays must have equal length")
        if a.size and (a >= b).any():
            raise ValueError("edges must satisfy edge_a < edge_b (no self-loops)")
        if a.size:
            if int(a.min()) < 0 or int(b.max()) >= self.n:
                raise ValueError("edge endpoints out of range")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must be in (0,1], got {self.p}")
        if 0 < a.size <= 1_000_000:
            key = a.astype(np.int64) * self.n + b.astype(np.int64)
            if np.unique(key).size != key.size:
                raise ValueError("duplicate edges")
        a.setflags(write=False)
        b.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return int(self.edge_a.size)

    @property
    def is_complete(self) -> bool:
        return self.edge_count == self.n * (self.n - 1) // 2

    def edge_set(self) -> set[tuple[int, int]]:
        """Materialized edge set; intended for small graphs and tests."""
        return set(zip(self.edge_a.tolist(), self.edge_b.tolist()))


def _complete_edges(n: int) -> tuple[np.ndarray, np.ndarray]:
    chunks_a, chunks_b = [], []
    for i in range(n - 1):
        count = n - 1 - i
        chunks_a.append(np.full(count, i, dtype=np.int32))
        chunks_b.append(np.arange(i + 1, n, dtype=np.int32))
    return np.concatenate(chunks_a), np.concatenate(chunks_b)


def sample_graph(n: int, p: float, seed: int) -> ComparisonGraph:
    """Erdos-Renyi graph: each of the n(n-1)/2 pairs kept with probability p."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0,1], got {p}")
    if p == 1.0:
        a, b = _complete_edges(n)
        return ComparisonGraph(n=n, edge_a=a, edge_b=b, p=p)
    rng = child_rng(seed)
    chunks_a, chunks_b = [], []
    for i in range(n - 1):
        keep = rng.random(n - 1 - i) < p
        if keep.any():
            js = np.nonzero(keep)[0].astype(np.int32) + np.int32(i + 1)
            chunks_a.append(np.full(js.size, i, dtype=np.int32))
            chunks_b.append(js)
    if chunks_a:
        a = np.concatenate(chunks_a)
        b = np.concatenate(chunks_b)
    else:
        a = np.empty(0, dtype=np.int32)
        b = np.empty(0, dtype=np.int32)
    return ComparisonGraph(n=n, edge_a=a, edge_b=b, p=p)


@dataclass(frozen=True)
class ObservationMatrix:
    """Observed win fractions per edge, kept as exact integer counts.

    For edge e = {a, b} with a < b, wins_b[e] of the games[e] games were won
    by b, so the win fraction "of j over i" for the ordered pair (a, b) is
    wins_b[e] / games[e] and the two orientations sum to exactly 1.
    """

    graph: ComparisonGraph
    wins_b: np.ndarray
    games: np.ndarray

    def __post_init__(self) -> None:
        wins = np.asarray(self.wins_b)
        games = np.asarray(self.games)
        object.__setattr__(self, "wins_b", wins)
        object.__setattr__(self, "games", games)
        if wins.shape != (self.graph.edge_count,) or games.shape != wins.shape:
            raise ValueError("wins_b and games must have one entry per edge")
        if wins.size:
            if int(games.min()) < 1:
                raise ValueError("games per edge must be >= 1")
            if (wins < 0).any() or (wins > games).any():
                raise ValueError("wins must lie in [0, games] per edge")
        wins.setflags(write=False)
        games.setflags(write=False)

    def _edge_lookup(self, i: int, j: int) -> tuple[int, bool]:
        if i == j:
            raise KeyError("no self-pairs in an observation matrix")
        a, b = (i, j) if i < j else (j, i)
        hits = np.nonzero((self.graph.edge_a == a) & (self.graph.edge_b == b))[0]
        if hits.size == 0:
            raise KeyError(f"pair ({i}, {j}) is not an observed edge")
        return int(hits[0]), i < j

    def win_fraction_exact(self, i: int, j: int) -> Fraction:
        """Exact fraction of the pair's games won by j."""
        e, forward = self._edge_lookup(i, j)
        wins = int(self.wins_b[e]) if forward else int(self.games[e] - self.wins_b[e])
        return Fraction(wins, int(self.games[e]))

    def win_fraction(self, i: int, j: int) -> float:
        return float(self.win_fraction_exact(i, j))

    def games_for(self, i: int, j: int) -> int:
        e, _ = self._edge_lookup(i, j)
        return int(self.games[e])

    def win_fraction_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(fraction b beat a, fraction a beat b) per edge, as floats."""
        games = self.games.astype(float)
        frac_b = self.wins_b / games
        frac_a = (self.games - self.wins_b) / games
        return frac_b, frac_a


def simulate_games(skills: SkillVector, graph: ComparisonGraph, k: int, seed: int) -> ObservationMatrix:
    """Play k BTL games on every edge; deterministic given the seed."""
    if graph.n != skills.n:
        raise ValueError(f"graph has {graph.n} players but skills has {skills.n}")
    if not 1 <= k <= 2**31 - 1:
        raise ValueError(f"k must be a positive 32-bit count, got {k}")
    rng = child_rng(seed)
    values = skills.values
    m = graph.edge_count
    wins = np.empty(m, dtype=np.int32)
    for start in range(0, m, _EDGE_CHUNK):
        sl = slice(start, min(start + _EDGE_CHUNK, m))
        alpha_a = values[graph.edge_a[sl]]
        alpha_b = values[graph.edge_b[sl]]
        prob_b = alpha_b / (alpha_a + alpha_b)
        wins[sl] = rng.binomial(k, prob_b)
    return ObservationMatrix(graph=graph, wins_b=wins, games=np.full(m, k, dtype=np.int32))


def canonical_pi(skills: SkillVector) -> np.ndarray:
    """Skills normalized to the probability simplex: pi_i = alpha_i / sum(alpha)."""
    values = skills.values
    return values / values.sum()
