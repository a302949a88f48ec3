"""
Gaussian half-duplex cooperative MAC.

Real-valued model, ``C(x) = 0.5 log2(1 + x)``. In slot 3 user 1 sends
``X13 = sqrt(P13) X'13 + sqrt(c2 PU) U + sqrt(c3 PV) V`` and user 2 sends
``X23 = sqrt(P23) X'23 + sqrt(d3 PU) U + sqrt(d2 PV) V``; the private part of
X23 is scaled by P23 (not P13) so that I6 only involves user 2's power.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, NamedTuple, Tuple, Union

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import logsumexp

from coopmac.dmc import IBounds, SlotSchedule

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

QUADRATURE_BOUNDS = ("i2", "i4", "i5", "i6", "i7")
OUTER_NODES = 64
INNER_NODES = (32, 64, 128, 256)
QUADRATURE_TOLERANCE = 1e-7


class DomainError(ValueError):
    pass


class UnsupportedBoundError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


def _require_finite(obj: object, names: Tuple[str, ...], minimum: float) -> None:
    for name in names:
        value = getattr(obj, name)
        if not np.isfinite(value):
            raise DomainError(f"{name} = {value} is not finite")
        if value < minimum:
            raise DomainError(f"{name} = {value} is below {minimum}")


@dataclass(frozen=True)
class GaussianParams:
    k10: float
    k20: float
    k12: float
    k21: float
    n0: float
    n1: float
    n2: float
    p1: float
    p2: float

    def __post_init__(self) -> None:
        _require_finite(self, ("k10", "k20", "k12", "k21"), -np.inf)
        _require_finite(self, ("p1", "p2"), 0.0)
        _require_finite(self, ("n0", "n1", "n2"), 0.0)
        for name in ("n0", "n1", "n2"):
            if getattr(self, name) == 0:
                raise DomainError(f"noise variance {name} must be positive")

    def replace(self, **changes: float) -> "GaussianParams":
        values = asdict(self)
        values.update(changes)
        return GaussianParams(**values)

    def swapped(self) -> "GaussianParams":
        """The same channel with the users' roles exchanged."""
        return GaussianParams(
            k10=self.k20,
            k20=self.k10,
            k12=self.k21,
            k21=self.k12,
            n0=self.n0,
            n1=self.n2,
            n2=self.n1,
            p1=self.p2,
            p2=self.p1,
        )


@dataclass(frozen=True)
class PowerPolicy:
    """Component powers and third-slot cooperative factors.

    PU and PV are the powers of the cooperative layers U and V in the own
    transmit slot; in slot 3 user 1 spends ``c2 PU`` on U and ``c3 PV`` on V,
    user 2 spends ``d3 PU`` on U and ``d2 PV`` on V.
    """

    p10: float = 0.0
    pU: float = 0.0
    p20: float = 0.0
    pV: float = 0.0
    p13: float = 0.0
    p23: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    d2: float = 0.0
    d3: float = 0.0

    def __post_init__(self) -> None:
        _require_finite(self, tuple(asdict(self)), 0.0)

    @property
    def mu1(self) -> float:
        return self.p10 + self.pU

    @property
    def mu2(self) -> float:
        return self.p20 + self.pV

    def consumption(self, slots: SlotSchedule) -> Tuple[float, float]:
        """Average power spent by each user over one block."""
        a3 = slots.alpha3
        user1 = slots.alpha1 * self.mu1 + a3 * (
            self.p13 + self.c2 * self.pU + self.c3 * self.pV
        )
        user2 = slots.alpha2 * self.mu2 + a3 * (
            self.p23 + self.d3 * self.pU + self.d2 * self.pV
        )
        return user1, user2

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


class PowerCheck(NamedTuple):
    feasible: bool
    slack1: float
    slack2: float


def capacity_c(x: float) -> float:
    """0.5 log2(1 + x)."""
    if not x >= 0:
        raise DomainError(f"C(x) needs x >= 0, got {x}")
    return float(np.log1p(x) / (2 * np.log(2.0)))


def _capacity(x: ArrayLike) -> ArrayLike:
    return np.log1p(x) / (2 * np.log(2.0))


def power_feasible(
    policy: PowerPolicy,
    slots: SlotSchedule,
    params: GaussianParams,
    tol: float = 1e-9,
) -> PowerCheck:
    """Compare consumption with the budgets; slack is budget minus consumption."""
    used1, used2 = policy.consumption(slots)
    slack1 = params.p1 - used1
    slack2 = params.p2 - used2
    if slack1 > tol or slack2 > tol:
        logger.warning("policy leaves power unused: slack %g, %g", slack1, slack2)
    return PowerCheck(abs(slack1) <= tol and abs(slack2) <= tol, slack1, slack2)


def bounds_arrays(
    params: GaussianParams,
    alpha1: ArrayLike,
    alpha2: ArrayLike,
    mu1: ArrayLike,
    mu2: ArrayLike,
    p13: ArrayLike,
    p23: ArrayLike,
    u1: ArrayLike,
    u2: ArrayLike,
    v1: ArrayLike,
    v2: ArrayLike,
) -> Dict[str, ArrayLike]:
    """I2 and I4..I10 for broadcastable arrays of powers.

    ``u1``/``u2`` are the slot-3 powers user 1/user 2 put on U, ``v1``/``v2``
    those on V.
    """
    alpha3 = np.maximum(0.0, 1.0 - np.asarray(alpha1) - np.asarray(alpha2))
    k10, k20 = params.k10, params.k20
    n0 = params.n0

    private = k10 ** 2 * p13 + k20 ** 2 * p23
    coherent_u = (k10 * np.sqrt(u1) + k20 * np.sqrt(u2)) ** 2
    coherent_v = (k10 * np.sqrt(v1) + k20 * np.sqrt(v2)) ** 2
    direct1 = alpha1 * _capacity(k10 ** 2 * mu1 / n0)
    direct2 = alpha2 * _capacity(k20 ** 2 * mu2 / n0)

    return {
        "i2": alpha1 * _capacity(params.k12 ** 2 * mu1 / params.n1),
        "i4": alpha2 * _capacity(params.k21 ** 2 * mu2 / params.n2),
        "i5": alpha3 * _capacity(k10 ** 2 * p13 / n0),
        "i6": alpha3 * _capacity(k20 ** 2 * p23 / n0),
        "i7": alpha3 * _capacity(private / n0),
        "i8": direct1 + alpha3 * _capacity((private + coherent_u) / n0),
        "i9": direct2 + alpha3 * _capacity((private + coherent_v) / n0),
        "i10": direct1
        + direct2
        + alpha3 * _capacity((private + coherent_u + coherent_v) / n0),
    }


def compute_bounds(
    params: GaussianParams, policy: PowerPolicy, slots: SlotSchedule
) -> IBounds:
    values = bounds_arrays(
        params,
        slots.alpha1,
        slots.alpha2,
        policy.mu1,
        policy.mu2,
        policy.p13,
        policy.p23,
        policy.c2 * policy.pU,
        policy.d3 * policy.pU,
        policy.c3 * policy.pV,
        policy.d2 * policy.pV,
    )
    return IBounds(slots=slots, **{k: float(v) for k, v in values.items()})


def _gaussian_mi(signal: float, noise: float, inner: int) -> float:
    """I(X; X + Z) for X ~ N(0, signal), Z ~ N(0, noise) by Gauss-Hermite.

    The inner rule for p(y) is centred and scaled on the posterior of X
    given Y.
    """
    t, w = hermgauss(OUTER_NODES)
    x = np.sqrt(2 * signal) * t
    z = np.sqrt(2 * noise) * t
    weights = np.outer(w, w).ravel() / np.pi
    y = (x[:, None] + z[None, :]).ravel()
    z_flat = np.broadcast_to(z[None, :], (len(x), len(z))).ravel()

    s, v = hermgauss(inner)
    gain = signal / (signal + noise)
    spread = np.sqrt(2 * signal * noise / (signal + noise))
    xs = gain * y[:, None] + spread * s[None, :]
    log_joint = (
        -(xs ** 2) / (2 * signal)
        - (y[:, None] - xs) ** 2 / (2 * noise)
        - np.log(2 * np.pi)
        - 0.5 * np.log(signal * noise)
    )
    with np.errstate(divide="ignore"):
        log_v = np.log(v)
    log_py = logsumexp(log_v[None, :] + s[None, :] ** 2 + log_joint, axis=1)
    log_py = log_py + np.log(spread)
    log_cond = -(z_flat ** 2) / (2 * noise) - 0.5 * np.log(2 * np.pi * noise)
    return float(np.dot(weights, log_cond - log_py) / np.log(2.0))


def gaussian_mi(signal: float, noise: float) -> float:
    """Numerical ``C(signal / noise)``, refining the inner rule until it settles."""
    if signal <= 0:
        return 0.0
    previous = None
    for inner in INNER_NODES:
        value = _gaussian_mi(signal, noise, inner)
        if not np.isfinite(value):
            raise QuadratureError(
                f"quadrature is not finite for signal {signal}, noise {noise}"
            )
        if previous is not None and abs(value - previous) <= QUADRATURE_TOLERANCE:
            return value
        previous = value
    raise QuadratureError(
        f"quadrature did not settle for signal {signal}, noise {noise}"
    )


def quadrature_mi_check(
    params: GaussianParams,
    policy: PowerPolicy,
    slots: SlotSchedule,
    bound_name: str,
) -> Tuple[float, float]:
    """Closed-form bound and the same quantity by numerical integration."""
    if bound_name not in QUADRATURE_BOUNDS:
        raise UnsupportedBoundError(
            f"{bound_name} has no quadrature path; use one of {QUADRATURE_BOUNDS}"
        )
    closed = getattr(compute_bounds(params, policy, slots), bound_name)
    a1, a2, a3 = slots.alpha1, slots.alpha2, slots.alpha3
    one = params.k10 ** 2 * policy.p13
    two = params.k20 ** 2 * policy.p23

    if bound_name == "i2":
        numeric = a1 * gaussian_mi(params.k12 ** 2 * policy.mu1, params.n1)
    elif bound_name == "i4":
        numeric = a2 * gaussian_mi(params.k21 ** 2 * policy.mu2, params.n2)
    elif bound_name == "i5":
        numeric = a3 * gaussian_mi(one, params.n0)
    elif bound_name == "i6":
        numeric = a3 * gaussian_mi(two, params.n0)
    else:
        # chain rule: decode X13 treating X23 as noise, then X23
        numeric = a3 * (gaussian_mi(one, two + params.n0) + gaussian_mi(two, params.n0))
    return closed, numeric
