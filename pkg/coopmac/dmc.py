"""
Finite-alphabet model of the half-duplex cooperative MAC.

Slot 1: user 1 sends X10, the destination sees Y1 and user 2 sees Y12.
Slot 2: user 2 sends X20, the destination sees Y2 and user 1 sees Y21.
Slot 3: both users send (X13, X23), the destination sees Y3.

Inputs follow ``p(u, x10) p(v, x20) p(x13 | u, v) p(x23 | u, v)``. All
information quantities are in bits.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import entr, rel_entr

from coopmac.polytope import Inequality, RationalInequalitySystem
from coopmac.regions import aggregate_region_template

logger = logging.getLogger(__name__)

MAX_ALPHABET = 8
ROW_TOLERANCE = 1e-12
MASS_TOLERANCE = 1e-9
BOUND_GRANULARITY = 10 ** 12
FLAT_JOINT_LIMIT = 5_000_000

LN2 = np.log(2.0)


class InvalidDistributionError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class InvalidBoundsError(ValueError):
    pass


class AlphabetTooLargeError(ValueError):
    pass


class InvalidScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class SlotSchedule:
    """Durations of the three slots as fractions of the block."""

    alpha1: float
    alpha2: float

    def __post_init__(self) -> None:
        for name in ("alpha1", "alpha2"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0 or value > 1:
                raise InvalidScheduleError(f"{name} = {value} is outside [0, 1]")
        if self.alpha1 + self.alpha2 > 1 + 1e-12:
            raise InvalidScheduleError(
                f"alpha1 + alpha2 = {self.alpha1 + self.alpha2} exceeds 1"
            )

    @property
    def alpha3(self) -> float:
        rest = 1.0 - self.alpha1 - self.alpha2
        return rest if rest > 1e-12 else 0.0


def _check_stochastic(array: np.ndarray, name: str, axes: Sequence[str]) -> None:
    """Each distribution over the trailing ``axes`` sums to one."""
    if np.any(array < 0) or np.any(array > 1):
        raise InvalidDistributionError(f"{name} has entries outside [0, 1]")
    conditioning = array.ndim - len(axes)
    sums = np.atleast_1d(array.reshape(array.shape[:conditioning] + (-1,)).sum(axis=-1))
    bad = np.argwhere(np.abs(sums - 1.0) > ROW_TOLERANCE)
    if bad.size:
        index = tuple(int(i) for i in bad[0])
        raise InvalidDistributionError(
            f"{name} row {index} sums to {float(sums[index])!r}, not 1"
        )


def _check_alphabet(shape: Sequence[int], name: str, cap: int) -> None:
    for size in shape:
        if size < 1:
            raise ShapeError(f"{name} has an empty alphabet")
        if size > cap:
            raise AlphabetTooLargeError(
                f"{name} alphabet of size {size} exceeds the cap of {cap}"
            )


@dataclass(frozen=True)
class DmcSpec:
    """The three slot channels.

    Attributes:
        ch1: p(y1, y12 | x10), shape (X10, Y, Y12).
        ch2: p(y2, y21 | x20), shape (X20, Y, Y21).
        ch3: p(y3 | x13, x23), shape (X13, X23, Y).
        max_alphabet: largest alphabet accepted.
    """

    ch1: np.ndarray
    ch2: np.ndarray
    ch3: np.ndarray
    max_alphabet: int = MAX_ALPHABET

    def __post_init__(self) -> None:
        for name in ("ch1", "ch2", "ch3"):
            array = np.asarray(getattr(self, name), dtype=float)
            if array.ndim != 3:
                raise ShapeError(f"{name} must be three-dimensional, got {array.shape}")
            _check_alphabet(array.shape, name, self.max_alphabet)
            object.__setattr__(self, name, array)
        if self.ch1.shape[1] != self.ch2.shape[1] or self.ch1.shape[1] != self.ch3.shape[2]:
            raise ShapeError("the destination alphabet Y differs between slots")
        _check_stochastic(self.ch1, "ch1", ("Y", "Y12"))
        _check_stochastic(self.ch2, "ch2", ("Y", "Y21"))
        _check_stochastic(self.ch3, "ch3", ("Y",))

    @property
    def sizes(self) -> Dict[str, int]:
        return {
            "X10": self.ch1.shape[0],
            "X20": self.ch2.shape[0],
            "X13": self.ch3.shape[0],
            "X23": self.ch3.shape[1],
            "Y": self.ch1.shape[1],
            "Y12": self.ch1.shape[2],
            "Y21": self.ch2.shape[2],
        }


@dataclass(frozen=True)
class InputDistribution:
    """Attributes:
    pU_X10: p(u, x10), shape (U, X10).
    pV_X20: p(v, x20), shape (V, X20).
    pX13_given_UV: p(x13 | u, v), shape (U, V, X13).
    pX23_given_UV: p(x23 | u, v), shape (U, V, X23).
    """

    pU_X10: np.ndarray
    pV_X20: np.ndarray
    pX13_given_UV: np.ndarray
    pX23_given_UV: np.ndarray
    max_alphabet: int = MAX_ALPHABET

    def __post_init__(self) -> None:
        dims = {"pU_X10": 2, "pV_X20": 2, "pX13_given_UV": 3, "pX23_given_UV": 3}
        for name, ndim in dims.items():
            array = np.asarray(getattr(self, name), dtype=float)
            if array.ndim != ndim:
                raise ShapeError(f"{name} must have {ndim} dimensions, got {array.shape}")
            _check_alphabet(array.shape, name, self.max_alphabet)
            object.__setattr__(self, name, array)
        _check_stochastic(self.pU_X10, "pU_X10", ("U", "X10"))
        _check_stochastic(self.pV_X20, "pV_X20", ("V", "X20"))
        _check_stochastic(self.pX13_given_UV, "pX13_given_UV", ("X13",))
        _check_stochastic(self.pX23_given_UV, "pX23_given_UV", ("X23",))
        u, v = self.pU_X10.shape[0], self.pV_X20.shape[0]
        for name in ("pX13_given_UV", "pX23_given_UV"):
            if getattr(self, name).shape[:2] != (u, v):
                raise ShapeError(f"{name} is not indexed by (U, V) = ({u}, {v})")

    @property
    def p_u(self) -> np.ndarray:
        return self.pU_X10.sum(axis=1)

    @property
    def p_v(self) -> np.ndarray:
        return self.pV_X20.sum(axis=1)


@dataclass(frozen=True)
class IBounds:
    """The ten right-hand sides I1..I10, in bits.

    ``i1`` and ``i3`` are ``None`` when the model gives no expression for them.
    """

    i2: float
    i4: float
    i5: float
    i6: float
    i7: float
    i8: float
    i9: float
    i10: float
    slots: SlotSchedule
    i1: Optional[float] = None
    i3: Optional[float] = None

    def values(self) -> Dict[str, float]:
        """Known bounds keyed by parameter name (``I2`` ...)."""
        result = {}
        for k in range(1, 11):
            value = getattr(self, f"i{k}")
            if value is not None:
                result[f"I{k}"] = float(value)
        return result

    def as_dict(self) -> Dict[str, object]:
        result: Dict[str, object] = {f"i{k}": getattr(self, f"i{k}") for k in range(1, 11)}
        result["alpha1"] = self.slots.alpha1
        result["alpha2"] = self.slots.alpha2
        result["alpha3"] = self.slots.alpha3
        return result


def _check_mass(p: np.ndarray) -> None:
    if np.any(p < 0):
        raise InvalidDistributionError("joint distribution has negative entries")
    total = float(p.sum())
    if abs(total - 1.0) > MASS_TOLERANCE:
        raise InvalidDistributionError(f"joint distribution has mass {total!r}")


def mutual_information(joint: np.ndarray) -> float:
    """I(A;B) in bits for a joint distribution given as a 2-D array."""
    p = np.asarray(joint, dtype=float)
    if p.ndim != 2:
        raise ShapeError(f"expected a 2-D joint distribution, got shape {p.shape}")
    _check_mass(p)
    pa = p.sum(axis=1, keepdims=True)
    pb = p.sum(axis=0, keepdims=True)
    value = float(rel_entr(p, pa * pb).sum() / LN2)
    return max(0.0, value)


def _expected_mi(weights: np.ndarray, joints: np.ndarray) -> float:
    """Sum over c of p(c) I(A;B | C=c) for conditional joints stacked on axis 0."""
    total = 0.0
    for weight, joint in zip(weights.ravel(), joints.reshape((-1,) + joints.shape[-2:])):
        if weight > 0:
            total += float(weight) * mutual_information(joint)
    return total


def _conditional(joint: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Split p(c, a) into (p(c), p(a | c)), rows with p(c) = 0 left uniform."""
    marginal = joint.sum(axis=-1)
    safe = np.where(marginal > 0, marginal, 1.0)
    conditional = joint / safe[..., None]
    conditional[marginal == 0] = 1.0 / joint.shape[-1]
    return marginal, conditional


def check_compatible(spec: DmcSpec, dist: InputDistribution) -> None:
    sizes = spec.sizes
    given = {
        "X10": dist.pU_X10.shape[1],
        "X20": dist.pV_X20.shape[1],
        "X13": dist.pX13_given_UV.shape[2],
        "X23": dist.pX23_given_UV.shape[2],
    }
    for name, size in given.items():
        if sizes[name] != size:
            raise ShapeError(
                f"{name} has {sizes[name]} symbols in the channel but {size} in the input law"
            )


def _slot3_joint(dist: InputDistribution, ch3: np.ndarray) -> np.ndarray:
    """p(x13, x23, y3 | u, v), shape (U, V, X13, X23, Y)."""
    return np.einsum(
        "uva,uvb,aby->uvaby", dist.pX13_given_UV, dist.pX23_given_UV, ch3
    )


def _slot1_terms(
    p_ux: np.ndarray, channel: np.ndarray
) -> Tuple[float, float, float, float]:
    """I(X;Y|S), I(X;Y'|S), I(X;Y), I(X;Y') for p(s, x) and p(y, y' | x)."""
    to_dest = channel.sum(axis=2)
    to_partner = channel.sum(axis=1)
    p_s, p_x_given_s = _conditional(p_ux)
    dest_given = _expected_mi(p_s, p_x_given_s[:, :, None] * to_dest[None, :, :])
    partner_given = _expected_mi(p_s, p_x_given_s[:, :, None] * to_partner[None, :, :])
    p_x = p_ux.sum(axis=0)
    dest = mutual_information(p_x[:, None] * to_dest)
    partner = mutual_information(p_x[:, None] * to_partner)
    return dest_given, partner_given, dest, partner


def slot3_given_v(dist: InputDistribution, ch3: np.ndarray) -> float:
    """I(X13, X23; Y3 | V)."""
    joint = _slot3_joint(dist, ch3)
    mixed = np.einsum("u,uvaby->vaby", dist.p_u, joint)
    shape = mixed.shape
    return _expected_mi(dist.p_v, mixed.reshape(shape[0], shape[1] * shape[2], shape[3]))


def slot3_given_u(dist: InputDistribution, ch3: np.ndarray) -> float:
    """I(X13, X23; Y3 | U)."""
    joint = _slot3_joint(dist, ch3)
    mixed = np.einsum("v,uvaby->uaby", dist.p_v, joint)
    shape = mixed.shape
    return _expected_mi(dist.p_u, mixed.reshape(shape[0], shape[1] * shape[2], shape[3]))


def slot1_destination(dist: InputDistribution, ch1: np.ndarray) -> float:
    """I(X10; Y1)."""
    p_x = dist.pU_X10.sum(axis=0)
    return mutual_information(p_x[:, None] * ch1.sum(axis=2))


def evaluate_bounds(
    spec: DmcSpec, dist: InputDistribution, slots: SlotSchedule
) -> IBounds:
    """All ten bounds by structured marginalization."""
    check_compatible(spec, dist)
    a1, a2, a3 = slots.alpha1, slots.alpha2, slots.alpha3

    d1_given_u, p12_given_u, d1, p12 = _slot1_terms(dist.pU_X10, spec.ch1)
    d2_given_v, p21_given_v, d2, p21 = _slot1_terms(dist.pV_X20, spec.ch2)

    joint = _slot3_joint(dist, spec.ch3)
    weight_uv = np.outer(dist.p_u, dist.p_v)
    u, v, n13, n23, ny = joint.shape

    # X13 given (U, V, X23): weight p(u) p(v) p(x23 | u, v)
    weight_uvb = weight_uv[:, :, None] * dist.pX23_given_UV
    i5_raw = _expected_mi(
        weight_uvb,
        np.einsum("uva,aby->uvbay", dist.pX13_given_UV, spec.ch3),
    )
    weight_uva = weight_uv[:, :, None] * dist.pX13_given_UV
    i6_raw = _expected_mi(
        weight_uva,
        np.einsum("uvb,aby->uvaby", dist.pX23_given_UV, spec.ch3),
    )
    i7_raw = _expected_mi(weight_uv, joint.reshape(u, v, n13 * n23, ny))
    given_v = slot3_given_v(dist, spec.ch3)
    given_u = slot3_given_u(dist, spec.ch3)
    unconditioned = mutual_information(
        np.einsum("uv,uvaby->aby", weight_uv, joint).reshape(n13 * n23, ny)
    )

    bounds = IBounds(
        i1=a1 * min(d1_given_u, p12_given_u),
        i2=a1 * p12,
        i3=a2 * min(d2_given_v, p21_given_v),
        i4=a2 * p21,
        i5=a3 * i5_raw,
        i6=a3 * i6_raw,
        i7=a3 * i7_raw,
        i8=a1 * d1 + a3 * given_v,
        i9=a2 * d2 + a3 * given_u,
        i10=a1 * d1 + a2 * d2 + a3 * unconditioned,
        slots=slots,
    )
    logger.debug("structured bounds %s", bounds.values())
    return bounds


AXES = {
    "U": 0,
    "V": 1,
    "X10": 2,
    "X20": 3,
    "X13": 4,
    "X23": 5,
    "Y1": 6,
    "Y12": 7,
    "Y2": 8,
    "Y21": 9,
    "Y3": 10,
}


def flat_joint(spec: DmcSpec, dist: InputDistribution) -> np.ndarray:
    """The full joint over the eleven variables, axes ordered as in ``AXES``."""
    check_compatible(spec, dist)
    size = int(
        np.prod(dist.pU_X10.shape)
        * np.prod(dist.pV_X20.shape)
        * np.prod(spec.ch1.shape[1:])
        * np.prod(spec.ch2.shape[1:])
        * np.prod(spec.ch3.shape)
    )
    if size > FLAT_JOINT_LIMIT:
        raise AlphabetTooLargeError(f"flat joint would have {size} entries")
    return np.einsum(
        "ua,vb,uvc,uvd,aef,bgh,cdi->uvabcdefghi",
        dist.pU_X10,
        dist.pV_X20,
        dist.pX13_given_UV,
        dist.pX23_given_UV,
        spec.ch1,
        spec.ch2,
        spec.ch3,
    )


def _entropy(joint: np.ndarray, axes: Sequence[int]) -> float:
    if not axes:
        return 0.0
    others = tuple(i for i in range(joint.ndim) if i not in axes)
    marginal = joint.sum(axis=others)
    return float(entr(marginal).sum() / LN2)


def conditional_mutual_information(
    joint: np.ndarray,
    a_axes: Sequence[int],
    b_axes: Sequence[int],
    c_axes: Sequence[int] = (),
) -> float:
    """I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C) on an arbitrary joint."""
    a, b, c = list(a_axes), list(b_axes), list(c_axes)
    value = (
        _entropy(joint, a + c)
        + _entropy(joint, b + c)
        - _entropy(joint, a + b + c)
        - _entropy(joint, c)
    )
    return max(0.0, value)


def evaluate_bounds_flat(
    spec: DmcSpec, dist: InputDistribution, slots: SlotSchedule
) -> IBounds:
    """All ten bounds from the flattened joint, independent of ``evaluate_bounds``."""
    joint = flat_joint(spec, dist)
    x = AXES
    a1, a2, a3 = slots.alpha1, slots.alpha2, slots.alpha3

    def cmi(a: Sequence[str], b: Sequence[str], c: Sequence[str] = ()) -> float:
        return conditional_mutual_information(
            joint, [x[n] for n in a], [x[n] for n in b], [x[n] for n in c]
        )

    d1 = cmi(["X10"], ["Y1"])
    d2 = cmi(["X20"], ["Y2"])
    return IBounds(
        i1=a1 * min(cmi(["X10"], ["Y1"], ["U"]), cmi(["X10"], ["Y12"], ["U"])),
        i2=a1 * cmi(["X10"], ["Y12"]),
        i3=a2 * min(cmi(["X20"], ["Y2"], ["V"]), cmi(["X20"], ["Y21"], ["V"])),
        i4=a2 * cmi(["X20"], ["Y21"]),
        i5=a3 * cmi(["X13"], ["Y3"], ["U", "V", "X23"]),
        i6=a3 * cmi(["X23"], ["Y3"], ["U", "V", "X13"]),
        i7=a3 * cmi(["X13", "X23"], ["Y3"], ["U", "V"]),
        i8=a1 * d1 + a3 * cmi(["X13", "X23"], ["Y3"], ["V"]),
        i9=a2 * d2 + a3 * cmi(["X13", "X23"], ["Y3"], ["U"]),
        i10=a1 * d1 + a2 * d2 + a3 * cmi(["X13", "X23"], ["Y3"]),
        slots=slots,
    )


def _to_rational(name: str, value: float) -> Fraction:
    if value is None or not np.isfinite(value) or value < 0:
        raise InvalidBoundsError(f"{name} = {value} is not a finite non-negative bound")
    return Fraction(round(float(value) * BOUND_GRANULARITY), BOUND_GRANULARITY)


def region_from_bounds(
    bounds: IBounds, projected_rows: bool = False
) -> RationalInequalitySystem:
    """The aggregate region over (R1, R2) with the bounds substituted.

    Values are rounded to multiples of 1e-12.
    """
    template = aggregate_region_template(projected_rows)
    values = {name: _to_rational(name, value) for name, value in bounds.values().items()}
    rows = []
    for row in template.rows:
        const = row.const
        for name, coefficient in row.rhs.items():
            if name not in values:
                raise InvalidBoundsError(f"{name} is required by the region")
            const += coefficient * values[name]
        rows.append(Inequality(row.lhs, const, None, row.label))
    return RationalInequalitySystem(template.variables, [], rows)
