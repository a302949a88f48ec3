import numpy as np
import pytest

from coopmac.dmc import (
    AlphabetTooLargeError,
    DmcSpec,
    InputDistribution,
    InvalidBoundsError,
    InvalidDistributionError,
    InvalidScheduleError,
    ShapeError,
    SlotSchedule,
    IBounds,
    evaluate_bounds,
    evaluate_bounds_flat,
    mutual_information,
    region_from_bounds,
)
from coopmac.polytope import instantiate


def bsc(p):
    return np.array([[1 - p, p], [p, 1 - p]])


def slot_channel(dest, partner):
    """p(y, y' | x) with independent destination and partner links."""
    return np.einsum("xy,xz->xyz", bsc(dest), bsc(partner))


def binary_example(dest=0.11, partner=0.05, slot3=0.11, layer=0.2):
    ch3 = np.array(
        [[bsc(slot3)[a ^ b] for b in range(2)] for a in range(2)]
    )
    spec = DmcSpec(slot_channel(dest, partner), slot_channel(dest, partner), ch3)
    joint = 0.5 * bsc(layer)
    x13 = np.array([[[1, 0], [1, 0]], [[0, 1], [0, 1]]], dtype=float)
    x23 = np.array([[[1, 0], [0, 1]], [[1, 0], [0, 1]]], dtype=float)
    return spec, InputDistribution(joint, joint, x13, x23)


def random_example(rng, max_size=3):
    """A random channel and input law with alphabets of size 2 to ``max_size``."""
    x10, x20, x13, x23, y, y12, y21, u, v = rng.integers(2, max_size + 1, 9)

    def law(count, shape):
        size = tuple(int(n) for n in shape) or None
        draws = rng.dirichlet(np.ones(int(np.prod(count))), size=size)
        return draws.reshape(tuple(int(n) for n in shape + count))

    spec = DmcSpec(
        law((y, y12), (x10,)),
        law((y, y21), (x20,)),
        law((y,), (x13, x23)),
    )
    dist = InputDistribution(
        law((u, x10), ()),
        law((v, x20), ()),
        law((x13,), (u, v)),
        law((x23,), (u, v)),
    )
    return spec, dist


class TestMutualInformation:
    def test_independent(self):
        assert mutual_information(np.full((2, 2), 0.25)) == 0.0

    def test_noiseless_bit(self):
        assert mutual_information(np.diag([0.5, 0.5])) == pytest.approx(1.0)

    def test_bsc(self):
        value = mutual_information(0.5 * bsc(0.11))
        assert value == pytest.approx(0.5, abs=1e-3)

    def test_bad_mass(self):
        with pytest.raises(InvalidDistributionError):
            mutual_information(np.full((2, 2), 0.3))


class TestValidation:
    def test_row_not_summing_to_one(self):
        ch = slot_channel(0.1, 0.1)
        ch[1, 0, 0] += 0.01
        with pytest.raises(InvalidDistributionError) as info:
            DmcSpec(ch, slot_channel(0.1, 0.1), np.full((2, 2, 2), 0.5))
        assert "ch1 row (1,)" in str(info.value)

    def test_shape(self):
        with pytest.raises(ShapeError):
            DmcSpec(bsc(0.1), slot_channel(0.1, 0.1), np.full((2, 2, 2), 0.5))

    def test_destination_alphabet_mismatch(self):
        with pytest.raises(ShapeError):
            DmcSpec(slot_channel(0.1, 0.1), slot_channel(0.1, 0.1), np.full((2, 2, 3), 1 / 3))

    def test_alphabet_cap(self):
        big = np.full((9, 2, 2), 0.25)
        with pytest.raises(AlphabetTooLargeError):
            DmcSpec(big, slot_channel(0.1, 0.1), np.full((2, 2, 2), 0.5))

    def test_input_law_indexed_by_layers(self):
        joint = np.full((2, 2), 0.25)
        with pytest.raises(ShapeError):
            InputDistribution(joint, joint, np.full((3, 2, 2), 0.5), np.full((2, 2, 2), 0.5))

    def test_schedule(self):
        assert SlotSchedule(0.3, 0.3).alpha3 == pytest.approx(0.4)
        assert SlotSchedule(0.5, 0.5).alpha3 == 0.0
        with pytest.raises(InvalidScheduleError):
            SlotSchedule(0.7, 0.7)
        with pytest.raises(InvalidScheduleError):
            SlotSchedule(-0.1, 0.2)


class TestEvaluateBounds:
    @classmethod
    def setup_class(cls):
        cls.spec, cls.dist = binary_example()
        cls.slots = SlotSchedule(0.3, 0.3)
        cls.bounds = evaluate_bounds(cls.spec, cls.dist, cls.slots)

    def test_matches_flat_joint(self):
        flat = evaluate_bounds_flat(self.spec, self.dist, self.slots)
        for name, value in self.bounds.values().items():
            assert value == pytest.approx(flat.values()[name], abs=1e-12), name

    def test_cone_relations(self):
        b = self.bounds
        assert b.i1 <= b.i2 + 1e-12
        assert b.i3 <= b.i4 + 1e-12
        assert max(b.i5, b.i6) <= b.i7 + 1e-12
        assert b.i7 <= b.i5 + b.i6 + 1e-12
        assert b.i7 <= min(b.i8, b.i9) + 1e-12
        assert max(b.i8, b.i9) <= b.i10 + 1e-12

    def test_noiseless_partner_link(self):
        spec, dist = binary_example(partner=0.0)
        bounds = evaluate_bounds(spec, dist, SlotSchedule(0.5, 0.5))
        assert bounds.i2 == pytest.approx(0.5)
        assert bounds.i4 == pytest.approx(0.5)
        assert bounds.i5 == 0.0
        assert bounds.i7 == 0.0

    def test_scales_with_slot_duration(self):
        half = evaluate_bounds(self.spec, self.dist, SlotSchedule(0.15, 0.3))
        assert half.i2 == pytest.approx(self.bounds.i2 / 2)
        assert half.i4 == pytest.approx(self.bounds.i4)

    def test_noisier_partner_link_lowers_relay_bound(self):
        spec, dist = binary_example(partner=0.2)
        worse = evaluate_bounds(spec, dist, self.slots)
        assert worse.i2 < self.bounds.i2
        assert worse.i8 == pytest.approx(self.bounds.i8)

    def test_region_from_bounds(self):
        region = instantiate(region_from_bounds(self.bounds), {})
        assert (0, 0) in region.vertices()
        assert len(region.vertices()) >= 3

    def test_region_rejects_negative_bound(self):
        bounds = IBounds(-1.0, 0, 0, 0, 0, 0, 0, 0, slots=self.slots)
        with pytest.raises(InvalidBoundsError):
            region_from_bounds(bounds)


class TestRandomChannels:
    @classmethod
    def setup_class(cls):
        rng = np.random.default_rng(11)
        cls.cases = []
        for _ in range(100):
            spec, dist = random_example(rng)
            a1, a2 = rng.uniform(0.0, 0.5, 2)
            cls.cases.append((spec, dist, SlotSchedule(a1, a2)))

    def test_structured_matches_flat_joint(self):
        for spec, dist, slots in self.cases:
            bounds = evaluate_bounds(spec, dist, slots).values()
            flat = evaluate_bounds_flat(spec, dist, slots).values()
            for name, value in bounds.items():
                assert value == pytest.approx(flat[name], abs=1e-12), name

    def test_cone_relations(self):
        for spec, dist, slots in self.cases:
            b = evaluate_bounds(spec, dist, slots)
            assert max(b.i5, b.i6) <= b.i7 + 1e-12
            assert b.i7 <= min(b.i8, b.i9) + 1e-12
            assert max(b.i8, b.i9) <= b.i10 + 1e-12
