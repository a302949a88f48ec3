"""
Random-coding exponent of the destination error event in which user 1's
relayed part is decoded wrongly while both slot-3 codewords may be wrong.

The exponent is ``psi(rho) = -(alpha1 log2 q1 + alpha3 log2 q2)``; its
slope at ``rho = 0`` is ``alpha1 I(X10;Y1) + alpha3 I(X13,X23;Y3|V)``, the
I8 bound. The finite-blocklength correction term is dropped.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from coopmac.dmc import (
    DmcSpec,
    InputDistribution,
    SlotSchedule,
    check_compatible,
    slot1_destination,
    slot3_given_v,
)

logger = logging.getLogger(__name__)

MAX_STEP = 1e-3

# Destination error events by shared analysis; only event 16 is evaluated.
ERROR_EVENT_GROUPS: Dict[int, Tuple[int, ...]] = {
    1: (1, 2, 4, 8),
    2: (3, 5, 6, 7, 9, 10, 11),
    3: (12, 13, 14, 15),
    4: (16, 17, 18, 19, 20),
}


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ExponentInputs:
    spec: DmcSpec
    dist: InputDistribution
    slots: SlotSchedule
    rho: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.rho <= 1:
            raise DomainError(f"rho = {self.rho} is outside [0, 1]")
        check_compatible(self.spec, self.dist)

    def at(self, rho: float) -> "ExponentInputs":
        return ExponentInputs(self.spec, self.dist, self.slots, rho)


@dataclass(frozen=True)
class ExponentResult:
    rho: float
    q1: float
    q2: float
    psi: float
    e0_slope_at_zero: float

    def as_dict(self) -> Dict[str, float]:
        return {"rho": self.rho, "q1": self.q1, "q2": self.q2, "psi": self.psi}


def _gallager_sum(p_x: np.ndarray, channel: np.ndarray, rho: float) -> float:
    """sum_y (sum_x p(x) p(y|x)^(1/(1+rho)))^(1+rho) for channel rows indexed by x."""
    inner = p_x @ np.power(channel, 1.0 / (1.0 + rho))
    return float(np.power(inner, 1.0 + rho).sum())


def q_values(inputs: ExponentInputs) -> Tuple[float, float]:
    if inputs.rho == 0:
        return 1.0, 1.0
    spec, dist, rho = inputs.spec, inputs.dist, inputs.rho

    p_x10 = dist.pU_X10.sum(axis=0)
    q1 = _gallager_sum(p_x10, spec.ch1.sum(axis=2), rho)

    # p(x13, x23 | v) with U averaged out
    given_v = np.einsum(
        "u,uva,uvb->vab", dist.p_u, dist.pX13_given_UV, dist.pX23_given_UV
    )
    channel = spec.ch3.reshape(-1, spec.ch3.shape[2])
    q2 = sum(
        float(p_v) * _gallager_sum(given_v[v].ravel(), channel, rho)
        for v, p_v in enumerate(dist.p_v)
        if p_v > 0
    )
    return q1, q2


def psi(inputs: ExponentInputs) -> float:
    if inputs.rho == 0:
        return 0.0
    q1, q2 = q_values(inputs)
    slots = inputs.slots
    return -float(slots.alpha1 * np.log2(q1) + slots.alpha3 * np.log2(q2))


def event16_rate_bound(inputs: ExponentInputs) -> float:
    """alpha1 I(X10;Y1) + alpha3 I(X13,X23;Y3|V), equal to I8."""
    slots = inputs.slots
    return slots.alpha1 * slot1_destination(
        inputs.dist, inputs.spec.ch1
    ) + slots.alpha3 * slot3_given_v(inputs.dist, inputs.spec.ch3)


def slope_check(inputs: ExponentInputs, h: float) -> Tuple[float, float]:
    """Forward difference of psi at zero and the analytic slope."""
    if not 0 < h <= MAX_STEP:
        raise DomainError(f"step h = {h} must lie in (0, {MAX_STEP}]")
    finite = (psi(inputs.at(h)) - psi(inputs.at(0.0))) / h
    return finite, event16_rate_bound(inputs)


def evaluate(inputs: ExponentInputs) -> ExponentResult:
    q1, q2 = q_values(inputs)
    return ExponentResult(
        rho=inputs.rho,
        q1=q1,
        q2=q2,
        psi=psi(inputs),
        e0_slope_at_zero=event16_rate_bound(inputs),
    )


def rho_sweep(
    spec: DmcSpec, dist: InputDistribution, slots: SlotSchedule, rho_steps: int = 21
) -> List[ExponentResult]:
    if rho_steps < 2:
        raise DomainError("rho_steps must be at least 2")
    base = ExponentInputs(spec, dist, slots)
    results = [evaluate(base.at(float(rho))) for rho in np.linspace(0, 1, rho_steps)]
    logger.debug("swept %d values of rho", len(results))
    return results
