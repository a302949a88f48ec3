"""
Weighted-sum search over slot durations and power splits.

A grid point is the vector ``(alpha1, alpha2, f1, own1, fwd1, f2, own2, fwd2)``:
``f`` is the share of a user's block energy spent in its own transmit slot,
``own`` and ``fwd`` the shares of its slot-3 power spent on its own
cooperative layer and on forwarding the partner's, the rest being private.
Every grid point spends at most the budget, so no point is rejected.

For a fixed point the region over (R1, R2) is the polygon
``R1 <= A``, ``R2 <= B``, ``R1 + R2 <= S``, ``R1, R2 >= 0``, whose weighted
maximum is one of two corners.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from coopmac.dmc import SlotSchedule, region_from_bounds
from coopmac.gaussian import (
    GaussianParams,
    PowerPolicy,
    bounds_arrays,
    capacity_c,
    compute_bounds,
)
from coopmac.polytope import HalfPlane, NumericRegion, instantiate
from coopmac.regions import aggregate_region_template

logger = logging.getLogger(__name__)

THETA_FIELDS = ("alpha1", "alpha2", "f1", "own1", "fwd1", "f2", "own2", "fwd2")
REGION_ROWS = ("template", "projected")
SLOT_EPS = 1e-12
ROW_TOLERANCE = 1e-9
POWER_TOLERANCE = 1e-6


class EmptyFrontierError(ValueError):
    pass


class VerificationError(RuntimeError):
    pass


class SearchConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    alpha_grid_steps: int = 21
    power_fraction_steps: int = 11
    refine_rounds: int = 2
    mu_samples: int = 41
    tolerance: float = 1e-9
    public_fraction: float = 1.0
    region_rows: str = "projected"

    def __post_init__(self) -> None:
        for name in ("alpha_grid_steps", "power_fraction_steps", "mu_samples"):
            if getattr(self, name) < 2:
                raise SearchConfigError(f"{name} must be at least 2")
        if self.refine_rounds < 0:
            raise SearchConfigError("refine_rounds must be non-negative")
        if not self.tolerance > 0:
            raise SearchConfigError("tolerance must be positive")
        if not 0 <= self.public_fraction <= 1:
            raise SearchConfigError("public_fraction must lie in [0, 1]")
        if self.region_rows not in REGION_ROWS:
            raise SearchConfigError(f"region_rows must be one of {REGION_ROWS}")

    @property
    def projected_rows(self) -> bool:
        return self.region_rows == "projected"


@dataclass
class RatePoint:
    r1: float
    r2: float
    mu: Optional[float] = None
    objective: Optional[float] = None
    schedule: Optional[SlotSchedule] = None
    policy: Optional[PowerPolicy] = None
    binding_rows: List[str] = field(default_factory=list)

    @property
    def witness(self) -> Optional[Tuple[SlotSchedule, PowerPolicy]]:
        if self.schedule is None or self.policy is None:
            return None
        return self.schedule, self.policy

    def weighted(self, mu: float) -> float:
        return mu * self.r1 + (1 - mu) * self.r2


@dataclass
class Frontier:
    points: List[RatePoint]
    params: Optional[GaussianParams] = None
    search_cfg: Optional[SearchConfig] = None
    label: str = ""

    def __len__(self) -> int:
        return len(self.points)

    def weighted_max(self, mu: float) -> float:
        if not self.points:
            raise EmptyFrontierError(f"frontier {self.label!r} has no points")
        return max(p.weighted(mu) for p in self.points)


def _alpha3(alpha1: np.ndarray, alpha2: np.ndarray) -> np.ndarray:
    rest = 1.0 - np.asarray(alpha1) - np.asarray(alpha2)
    return np.where(rest <= SLOT_EPS, 0.0, rest)


def _share(energy: np.ndarray, duration: np.ndarray) -> np.ndarray:
    energy, duration = np.broadcast_arrays(
        np.asarray(energy, dtype=float), np.asarray(duration, dtype=float)
    )
    return np.divide(energy, duration, out=np.zeros(energy.shape), where=duration > 0)


def _allocation(
    params: GaussianParams, cfg: SearchConfig, *coords: np.ndarray
) -> Dict[str, np.ndarray]:
    """Component powers for broadcastable grid coordinates."""
    a1, a2, f1, own1, fwd1, f2, own2, fwd2 = coords
    a3 = _alpha3(a1, a2)
    mu1 = _share(f1 * params.p1, a1)
    mu2 = _share(f2 * params.p2, a2)
    slot3_1 = _share((1 - f1) * params.p1, a3)
    slot3_2 = _share((1 - f2) * params.p2, a3)
    pu = cfg.public_fraction * mu1
    pv = cfg.public_fraction * mu2
    return {
        "mu1": mu1,
        "mu2": mu2,
        "pU": pu,
        "pV": pv,
        "p13": np.maximum(0.0, 1 - own1 - fwd1) * slot3_1,
        "p23": np.maximum(0.0, 1 - own2 - fwd2) * slot3_2,
        # power on a layer that carries nothing is left unspent
        "u1": np.where(pu > 0, own1 * slot3_1, 0.0),
        "u2": np.where(pu > 0, fwd2 * slot3_2, 0.0),
        "v1": np.where(pv > 0, fwd1 * slot3_1, 0.0),
        "v2": np.where(pv > 0, own2 * slot3_2, 0.0),
    }


def _polygon(
    params: GaussianParams, cfg: SearchConfig, *coords: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    powers = _allocation(params, cfg, *coords)
    b = bounds_arrays(
        params,
        coords[0],
        coords[1],
        powers["mu1"],
        powers["mu2"],
        powers["p13"],
        powers["p23"],
        powers["u1"],
        powers["u2"],
        powers["v1"],
        powers["v2"],
    )
    a = b["i2"] + b["i5"]
    c = b["i4"] + b["i6"]
    if cfg.projected_rows:
        a = np.minimum(a, b["i8"])
        c = np.minimum(c, b["i9"])
    s = np.minimum.reduce(
        [b["i2"] + b["i4"] + b["i7"], b["i10"], b["i4"] + b["i8"], b["i2"] + b["i9"]]
    )
    return a, c, s


def _corner(
    a: np.ndarray, b: np.ndarray, s: np.ndarray, mu: float
) -> Tuple[np.ndarray, np.ndarray]:
    if mu >= 0.5:
        x = np.minimum(a, s)
        return x, np.minimum(b, s - x)
    y = np.minimum(b, s)
    return np.minimum(a, s - y), y


def _user_states(own_alpha: float, alpha3: float, steps: int) -> np.ndarray:
    """Normalized (f, own, fwd) triples for one user, lexicographically sorted."""
    grid = np.linspace(0.0, 1.0, steps)
    if alpha3 <= 0:
        fractions = [1.0] if own_alpha > 0 else [0.0]
        splits = [(0.0, 0.0)]
    else:
        fractions = list(grid) if own_alpha > 0 else [0.0]
        splits = [(o, w) for o in grid for w in grid if o + w <= 1 + SLOT_EPS]
    states = np.array([(f, o, w) for f in fractions for o, w in splits])
    return np.unique(states, axis=0)


def _normalize(thetas: np.ndarray) -> np.ndarray:
    """Apply the forced coordinates and drop invalid rows; result sorted and unique."""
    t = np.clip(thetas, 0.0, 1.0)
    valid = (
        (t[:, 0] + t[:, 1] <= 1 + SLOT_EPS)
        & (t[:, 3] + t[:, 4] <= 1 + SLOT_EPS)
        & (t[:, 6] + t[:, 7] <= 1 + SLOT_EPS)
    )
    t = t[valid]
    a3 = _alpha3(t[:, 0], t[:, 1])
    no_slot3 = a3 <= 0
    for own_alpha, f, own, fwd in ((0, 2, 3, 4), (1, 5, 6, 7)):
        t[:, f] = np.where(
            t[:, own_alpha] <= 0, 0.0, np.where(no_slot3, 1.0, t[:, f])
        )
        t[:, own] = np.where(no_slot3, 0.0, t[:, own])
        t[:, fwd] = np.where(no_slot3, 0.0, t[:, fwd])
    return np.unique(t, axis=0)


def _schedules(
    cfg: SearchConfig, schedule: Optional[SlotSchedule]
) -> List[Tuple[float, float]]:
    if schedule is not None:
        return [(schedule.alpha1, schedule.alpha2)]
    grid = np.round(np.linspace(0.0, 1.0, cfg.alpha_grid_steps), 12)
    return [
        (float(a1), float(a2))
        for a1 in grid
        for a2 in grid
        if a1 + a2 <= 1 + SLOT_EPS
    ]


def _envelope_candidates(
    x: np.ndarray, y: np.ndarray, lo: float, hi: float
) -> np.ndarray:
    """Indices that can maximize ``mu x + (1 - mu) y`` for some mu in [lo, hi].

    A maximizer inside the range lies on or above both end maximizers where
    their value lines cross.
    """
    first = int(np.argmax(lo * x + (1 - lo) * y))
    last = int(np.argmax(hi * x + (1 - hi) * y))
    if first == last or hi <= lo:
        return np.array([first])

    def line(index: int, mu: float) -> float:
        return mu * x[index] + (1 - mu) * y[index]

    d0 = line(first, lo) - line(last, lo)
    d1 = line(last, hi) - line(first, hi)
    cross = lo + (hi - lo) * d0 / (d0 + d1) if d0 + d1 > 0 else 0.5 * (lo + hi)
    cap = min(line(first, cross), line(last, cross))
    value = cross * x + (1 - cross) * y
    return np.flatnonzero(value >= cap - 1e-9 * (1 + abs(cap)))


def _best_indices(
    a: np.ndarray, b: np.ndarray, s: np.ndarray, mus: Sequence[float]
) -> List[Tuple[float, int]]:
    """(objective, first maximizing index) of the corner point per weight."""
    best: List[Tuple[float, int]] = [(0.0, 0)] * len(mus)
    for upper in (True, False):
        group = [k for k, mu in enumerate(mus) if (mu >= 0.5) == upper]
        if not group:
            continue
        x, y = _corner(a, b, s, 1.0 if upper else 0.0)
        keep = _envelope_candidates(
            x, y, min(mus[k] for k in group), max(mus[k] for k in group)
        )
        xk, yk = x[keep], y[keep]
        for k in group:
            objective = mus[k] * xk + (1 - mus[k]) * yk
            index = int(np.argmax(objective))
            best[k] = (float(objective[index]), int(keep[index]))
    return best


def _search_schedule(
    params: GaussianParams,
    cfg: SearchConfig,
    mus: Sequence[float],
    alphas: Tuple[float, float],
) -> List[Tuple[float, np.ndarray]]:
    """Best (objective, grid point) per weight for one slot schedule."""
    a1, a2 = alphas
    a3 = float(_alpha3(a1, a2))
    user1 = _user_states(a1, a3, cfg.power_fraction_steps)
    user2 = _user_states(a2, a3, cfg.power_fraction_steps)
    coords = [np.float64(a1), np.float64(a2)]
    coords += [user1[:, k][:, None] for k in range(3)]
    coords += [user2[:, k][None, :] for k in range(3)]
    shape = (len(user1), len(user2))
    a, b, s = (
        np.broadcast_to(v, shape).ravel() for v in _polygon(params, cfg, *coords)
    )

    best = []
    for objective, index in _best_indices(a, b, s, mus):
        i, j = divmod(index, len(user2))
        theta = np.concatenate(([a1, a2], user1[i], user2[j]))
        best.append((objective, theta))
    logger.debug("schedule (%g, %g): %d x %d power splits", a1, a2, len(user1), len(user2))
    return best


_OFFSETS = np.array(list(product((-1.0, 0.0, 1.0), repeat=len(THETA_FIELDS))))


def _refine(
    params: GaussianParams,
    cfg: SearchConfig,
    mu: float,
    theta: np.ndarray,
    objective: float,
    pinned: bool,
) -> Tuple[float, np.ndarray]:
    step = np.array(
        [1.0 / (cfg.alpha_grid_steps - 1)] * 2
        + [1.0 / (cfg.power_fraction_steps - 1)] * 6
    )
    if pinned:
        step[:2] = 0.0
    for _ in range(cfg.refine_rounds):
        step = step / 2
        candidates = _normalize(theta + _OFFSETS * step)
        a, b, s = _polygon(params, cfg, *candidates.T)
        x, y = _corner(a, b, s, mu)
        values = mu * x + (1 - mu) * y
        index = int(np.argmax(values))
        if values[index] > objective:
            objective, theta = float(values[index]), candidates[index]
    return objective, theta


def _search(
    params: GaussianParams,
    cfg: SearchConfig,
    mus: Sequence[float],
    schedule: Optional[SlotSchedule],
    threads: int,
) -> List[Tuple[float, np.ndarray]]:
    schedules = _schedules(cfg, schedule)

    def task(alphas: Tuple[float, float]) -> List[Tuple[float, np.ndarray]]:
        return _search_schedule(params, cfg, mus, alphas)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(task, schedules))
    else:
        results = [task(alphas) for alphas in schedules]

    incumbents: List[Optional[Tuple[float, np.ndarray]]] = [None] * len(mus)
    for per_mu in results:
        for k, (value, theta) in enumerate(per_mu):
            held = incumbents[k]
            if held is None or value > held[0]:
                incumbents[k] = (value, theta)

    refined = []
    for mu, held in zip(mus, incumbents):
        assert held is not None
        refined.append(_refine(params, cfg, mu, held[1], held[0], schedule is not None))
    logger.debug("searched %d schedules for %d weights", len(schedules), len(mus))
    return refined


def witness_from_theta(
    params: GaussianParams, cfg: SearchConfig, theta: Sequence[float]
) -> Tuple[SlotSchedule, PowerPolicy]:
    """Slot schedule and power policy of one grid point."""
    coords = [np.float64(t) for t in theta]
    powers = {k: float(v) for k, v in _allocation(params, cfg, *coords).items()}
    pu, pv = powers["pU"], powers["pV"]
    policy = PowerPolicy(
        p10=max(0.0, powers["mu1"] - pu),
        pU=pu,
        p20=max(0.0, powers["mu2"] - pv),
        pV=pv,
        p13=powers["p13"],
        p23=powers["p23"],
        c2=powers["u1"] / pu if pu > 0 else 0.0,
        c3=powers["v1"] / pv if pv > 0 else 0.0,
        d2=powers["v2"] / pv if pv > 0 else 0.0,
        d3=powers["u2"] / pu if pu > 0 else 0.0,
    )
    return SlotSchedule(float(theta[0]), float(theta[1])), policy


def _rate_point(
    params: GaussianParams, cfg: SearchConfig, mu: float, theta: np.ndarray
) -> RatePoint:
    """Re-derive a grid point's best rate pair on the exact scalar path and check it."""
    schedule, policy = witness_from_theta(params, cfg, theta)
    bounds = compute_bounds(params, policy, schedule)
    region = instantiate(region_from_bounds(bounds, cfg.projected_rows), {})
    (r1, r2), value = region.maximize((mu, 1 - mu))

    exact = instantiate(aggregate_region_template(cfg.projected_rows), bounds.values())
    if not exact.contains((r1, r2), ROW_TOLERANCE):
        raise VerificationError(f"rate pair ({float(r1)}, {float(r2)}) violates the region")
    used1, used2 = policy.consumption(schedule)
    if used1 > params.p1 + POWER_TOLERANCE or used2 > params.p2 + POWER_TOLERANCE:
        raise VerificationError(f"witness spends ({used1}, {used2}) over budget")

    return RatePoint(
        r1=float(r1),
        r2=float(r2),
        mu=float(mu),
        objective=float(value),
        schedule=schedule,
        policy=policy,
        binding_rows=region.binding((r1, r2), cfg.tolerance),
    )


def max_weighted_sum(
    params: GaussianParams,
    mu: float,
    cfg: SearchConfig = SearchConfig(),
    schedule: Optional[SlotSchedule] = None,
    threads: int = 1,
) -> RatePoint:
    """Best found maximizer of ``mu R1 + (1 - mu) R2``.

    Args:
        params: channel.
        mu: weight on user 1, in [0, 1].
        cfg: grid resolution.
        schedule: pin the slot durations instead of searching them.
        threads: worker threads over slot schedules.

    Returns:
        The verified rate point with its witness.
    """
    if not 0 <= mu <= 1:
        raise ValueError(f"mu = {mu} is outside [0, 1]")
    ((_, theta),) = _search(params, cfg, [mu], schedule, threads)
    return _rate_point(params, cfg, mu, theta)


def _pareto(points: Iterable[RatePoint]) -> List[RatePoint]:
    unique: Dict[Tuple[float, float], RatePoint] = {}
    for p in points:
        unique.setdefault((p.r1, p.r2), p)
    kept = [
        p
        for p in unique.values()
        if not any(
            q.r1 >= p.r1 and q.r2 >= p.r2 and (q.r1, q.r2) != (p.r1, p.r2)
            for q in unique.values()
        )
    ]
    return sorted(kept, key=lambda p: (p.r1, p.r2))


def frontier(
    params: GaussianParams,
    cfg: SearchConfig = SearchConfig(),
    schedule: Optional[SlotSchedule] = None,
    threads: int = 1,
    label: str = "cooperative",
) -> Frontier:
    """Sweep the weight over ``cfg.mu_samples`` values and keep the Pareto points."""
    mus = [float(m) for m in np.linspace(0.0, 1.0, cfg.mu_samples)]
    found = _search(params, cfg, mus, schedule, threads)
    points = [_rate_point(params, cfg, mu, theta) for mu, (_, theta) in zip(mus, found)]
    kept = _pareto(points)
    logger.info("%s frontier: %d points (%d weights)", label, len(kept), len(mus))
    return Frontier(kept, params, cfg, label)


def tdma_point(
    params: GaussianParams, cfg: SearchConfig = SearchConfig(), threads: int = 1
) -> Frontier:
    """Frontier with each user owning half the block and no third slot."""
    projected = replace(cfg, region_rows="projected")
    return frontier(params, projected, SlotSchedule(0.5, 0.5), threads, label="tdma")


@dataclass(frozen=True)
class MacRegion:
    r1_max: float
    r2_max: float
    sum_max: float

    def region(self) -> NumericRegion:
        exact = [Fraction(v) for v in (self.r1_max, self.r2_max, self.sum_max)]
        one, zero = Fraction(1), Fraction(0)
        return NumericRegion(
            ("R1", "R2"),
            [
                HalfPlane(one, zero, exact[0], "r1"),
                HalfPlane(zero, one, exact[1], "r2"),
                HalfPlane(one, one, exact[2], "sum"),
                HalfPlane(-one, zero, zero, "R1 >= 0"),
                HalfPlane(zero, -one, zero, "R2 >= 0"),
            ],
        )


def mac_baseline(params: GaussianParams) -> MacRegion:
    """Classical Gaussian MAC pentagon with the same gains, noise and budgets."""
    one = params.k10 ** 2 * params.p1
    two = params.k20 ** 2 * params.p2
    return MacRegion(
        capacity_c(one / params.n0),
        capacity_c(two / params.n0),
        capacity_c((one + two) / params.n0),
    )


def polygon_frontier(
    region: NumericRegion, params: Optional[GaussianParams] = None, label: str = ""
) -> Frontier:
    points = [RatePoint(float(x), float(y)) for x, y in region.vertices()]
    return Frontier(_pareto(points), params, None, label)


def mirror(front: Frontier) -> Frontier:
    """The frontier with the users exchanged."""
    points = [
        RatePoint(p.r2, p.r1, None if p.mu is None else 1 - p.mu, p.objective)
        for p in front.points
    ]
    return Frontier(
        _pareto(points),
        front.params.swapped() if front.params else None,
        front.search_cfg,
        f"{front.label} mirrored" if front.label else "mirrored",
    )


def _upper_envelope(points: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """Upper concave hull of the points and their projections on both axes."""
    top_x = max(x for x, _ in points)
    top_y = max(y for _, y in points)
    cloud = sorted(set(points) | {(0.0, top_y), (top_x, 0.0)})
    hull: List[Tuple[float, float]] = []
    for p in cloud:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    # keep the part from the highest point rightwards
    peak = max(range(len(hull)), key=lambda i: (hull[i][1], -hull[i][0]))
    return hull[peak:]


def _envelope_at(hull: Sequence[Tuple[float, float]], x: float) -> float:
    if x <= hull[0][0]:
        return hull[0][1]
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x <= x2 and x2 > x1:
            return y1 + (y2 - y1) * (x - x1) / (x2 - x1)
    return -np.inf


def contains(outer: Frontier, inner: Frontier, tol: float = 1e-3) -> bool:
    """Whether every point of ``inner`` lies under the concave envelope of ``outer``."""
    for front in (outer, inner):
        if not front.points:
            raise EmptyFrontierError(f"frontier {front.label!r} has no points")
    hull = _upper_envelope([(p.r1, p.r2) for p in outer.points])
    for p in inner.points:
        x = max(0.0, p.r1 - tol)
        if x > hull[-1][0] or p.r2 - tol > _envelope_at(hull, x):
            return False
    return True
