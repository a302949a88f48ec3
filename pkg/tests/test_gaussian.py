import math

import numpy as np
import pytest

from coopmac.dmc import SlotSchedule
from coopmac.gaussian import (
    DomainError,
    GaussianParams,
    QUADRATURE_BOUNDS,
    PowerPolicy,
    QuadratureError,
    UnsupportedBoundError,
    capacity_c,
    compute_bounds,
    gaussian_mi,
    power_feasible,
    quadrature_mi_check,
)

SYMMETRIC = GaussianParams(k10=1, k20=1, k12=2, k21=2, n0=1, n1=1, n2=1, p1=2, p2=2)


class TestCapacity:
    def test_values(self):
        assert capacity_c(0) == 0.0
        assert capacity_c(3) == pytest.approx(1.0)
        assert capacity_c(2) == pytest.approx(0.5 * math.log2(3))

    def test_negative(self):
        with pytest.raises(DomainError):
            capacity_c(-1)


class TestParams:
    def test_noise_must_be_positive(self):
        with pytest.raises(DomainError):
            SYMMETRIC.replace(n0=0)

    def test_power_must_be_non_negative(self):
        with pytest.raises(DomainError):
            SYMMETRIC.replace(p1=-1)
        with pytest.raises(DomainError):
            PowerPolicy(p13=-0.5)

    def test_swapped(self):
        params = SYMMETRIC.replace(k12=3, p1=5)
        swapped = params.swapped()
        assert swapped.k21 == 3
        assert swapped.p2 == 5
        assert swapped.swapped() == params


class TestPowerFeasible:
    def test_zero(self):
        params = SYMMETRIC.replace(p1=0, p2=0)
        check = power_feasible(PowerPolicy(), SlotSchedule(0.3, 0.3), params)
        assert check.feasible
        assert (check.slack1, check.slack2) == (0, 0)

    def test_user_one_spends_budget(self):
        policy = PowerPolicy(p10=2, pU=2, p13=1, c2=0.5)
        slots = SlotSchedule(0.25, 0.25)
        used1, _ = policy.consumption(slots)
        assert used1 == pytest.approx(2.0)
        check = power_feasible(policy, slots, SYMMETRIC.replace(p2=0))
        assert check.slack1 == pytest.approx(0.0)
        assert check.feasible

    def test_doubled_policy_is_infeasible(self):
        policy = PowerPolicy(p10=4, pU=4, p13=2, c2=0.5)
        check = power_feasible(policy, SlotSchedule(0.25, 0.25), SYMMETRIC.replace(p2=0))
        assert not check.feasible
        assert check.slack1 < 0


class TestComputeBounds:
    def test_relay_bound(self):
        params = SYMMETRIC.replace(k12=2, n1=1)
        policy = PowerPolicy(p10=1, pU=1)
        bounds = compute_bounds(params, policy, SlotSchedule(0.3, 0.2))
        assert bounds.i2 == pytest.approx(0.3 * 0.5 * math.log2(9))
        assert bounds.i2 == pytest.approx(0.4755, abs=1e-4)

    def test_no_cooperation_slot_reduces_to_mac(self):
        policy = PowerPolicy(p13=2, p23=2)
        bounds = compute_bounds(SYMMETRIC, policy, SlotSchedule(0, 0))
        assert bounds.i2 == 0
        assert bounds.i4 == 0
        assert bounds.i5 == pytest.approx(capacity_c(2))
        assert bounds.i6 == pytest.approx(capacity_c(2))
        assert bounds.i7 == pytest.approx(capacity_c(4))
        assert bounds.i10 == pytest.approx(capacity_c(4))

    def test_coherent_layers_raise_destination_bounds(self):
        slots = SlotSchedule(0.3, 0.3)
        incoherent = compute_bounds(SYMMETRIC, PowerPolicy(pU=1, p13=1, p23=1), slots)
        coherent = compute_bounds(
            SYMMETRIC, PowerPolicy(pU=1, p13=1, p23=1, c2=1, d3=1), slots
        )
        assert coherent.i8 > incoherent.i8
        assert coherent.i7 == pytest.approx(incoherent.i7)

    def test_cone_relations(self):
        policy = PowerPolicy(p10=1, pU=1, p20=1, pV=1, p13=1, p23=1, c2=0.5, d3=0.5, c3=0.5, d2=0.5)
        b = compute_bounds(SYMMETRIC, policy, SlotSchedule(0.2, 0.3))
        assert max(b.i5, b.i6) <= b.i7 <= b.i5 + b.i6
        assert b.i7 <= min(b.i8, b.i9)
        assert max(b.i8, b.i9) <= b.i10


class TestQuadrature:
    def test_relay_bound(self):
        params = SYMMETRIC.replace(k12=2, n1=1)
        policy = PowerPolicy(p10=2)
        closed, numeric = quadrature_mi_check(params, policy, SlotSchedule(0.3, 0.2), "i2")
        assert closed == pytest.approx(0.4755, abs=1e-4)
        assert numeric == pytest.approx(closed, abs=1e-3)

    def test_chain_rule(self):
        policy = PowerPolicy(p13=1, p23=2)
        closed, numeric = quadrature_mi_check(SYMMETRIC, policy, SlotSchedule(0.2, 0.2), "i7")
        assert numeric == pytest.approx(closed, abs=1e-3)

    def test_unsupported(self):
        with pytest.raises(UnsupportedBoundError):
            quadrature_mi_check(SYMMETRIC, PowerPolicy(), SlotSchedule(0.2, 0.2), "i8")

    def test_high_snr_stays_finite(self):
        for snr in (10.0, 100.0, 1e4):
            value = gaussian_mi(snr, 1.0)
            assert np.isfinite(value)
            assert value == pytest.approx(capacity_c(snr), abs=1e-6)

    def test_zero_signal(self):
        assert gaussian_mi(0.0, 1.0) == 0.0

    def test_non_finite_raises(self, monkeypatch):
        monkeypatch.setattr("coopmac.gaussian._gaussian_mi", lambda *args: float("nan"))
        with pytest.raises(QuadratureError):
            gaussian_mi(1.0, 1.0)

    def test_unsettled_raises(self, monkeypatch):
        values = iter([0.1, 0.2, 0.3, 0.4])
        monkeypatch.setattr("coopmac.gaussian._gaussian_mi", lambda *args: next(values))
        with pytest.raises(QuadratureError):
            gaussian_mi(1.0, 1.0)


class TestQuadratureRandom:
    @classmethod
    def setup_class(cls):
        rng = np.random.default_rng(20)
        cls.cases = []
        for _ in range(50):
            params = GaussianParams(
                *rng.uniform(0.1, 3.0, 4), *rng.uniform(0.2, 2.0, 3), *rng.uniform(0.0, 5.0, 2)
            )
            policy = PowerPolicy(
                *rng.uniform(0.0, 5.0, 6), *rng.uniform(0.0, 1.0, 4)
            )
            a1, a2 = rng.uniform(0.0, 0.5, 2)
            cls.cases.append((params, policy, SlotSchedule(a1, a2)))

    def test_closed_form_matches_numeric(self):
        for params, policy, slots in self.cases:
            for name in QUADRATURE_BOUNDS:
                closed, numeric = quadrature_mi_check(params, policy, slots, name)
                assert np.isfinite(numeric)
                assert numeric == pytest.approx(closed, abs=1e-3)
