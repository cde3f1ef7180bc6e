import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xspec_eval.errors import ArgumentError, ShapeError
from xspec_eval.losses import (
    ConversionBundle,
    DiscriminatorProbe,
    LossWeights,
    adversarial_loss,
    composite_loss,
    cycle_loss,
    evaluate_losses,
    idr_loss,
    syn_loss,
)

SHAPE = (1, 8, 8)


def bundle(**overrides):
    rng = np.random.default_rng(0)
    v, i = rng.uniform(size=SHAPE), rng.uniform(size=SHAPE)
    base = dict(v=v, i=i, g_v=rng.uniform(size=SHAPE), f_i=rng.uniform(size=SHAPE), fgv=v, gfi=i)
    base.update(overrides)
    return ConversionBundle(**base)


def probe(real, fake):
    return DiscriminatorProbe(real, fake, real, fake)


class TestAdversarial:
    def test_half_fixed_point(self):
        assert adversarial_loss(probe(0.5, 0.5)) == pytest.approx(4 * math.log(0.5), abs=1e-15)
        assert adversarial_loss(probe(0.5, 0.5)) == pytest.approx(-2.772589, abs=1e-6)

    def test_clamp_boundary(self):
        value = adversarial_loss(probe(1 - 1e-7, 1e-7))
        assert value == pytest.approx(4 * math.log(1 - 1e-7), rel=1e-9)
        assert value == pytest.approx(-4e-7, rel=1e-6)

    def test_saturated_inputs_stay_finite(self):
        assert math.isfinite(adversarial_loss(probe(1.0, 1.0)))
        assert math.isfinite(adversarial_loss(probe(0.0, 0.0)))

    def test_patch_maps_average_logs(self):
        real = np.full((30, 30), 0.5)
        real[0, 0] = 0.9
        fake = np.full((30, 30), 0.5)
        expected = np.mean(np.log(real)) + np.mean(np.log(1 - fake))
        assert adversarial_loss(DiscriminatorProbe(real, fake, real, fake)) == pytest.approx(2 * expected)

    def test_out_of_range(self):
        with pytest.raises(ArgumentError):
            probe(1.2, 0.5)
        with pytest.raises(ArgumentError):
            probe(0.5, np.array([0.1, -0.01]))

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.01, 0.98), st.floats(0.01, 0.98), st.floats(0.001, 0.01))
    def test_monotone(self, real, fake, step):
        base = adversarial_loss(probe(real, fake))
        assert adversarial_loss(probe(real + step, fake)) > base
        assert adversarial_loss(probe(real, fake + step)) < base

    def test_maximum_at_perfect_discrimination(self):
        grid = np.linspace(0.0, 1.0, 21)
        values = [adversarial_loss(probe(r, f)) for r in grid for f in grid]
        assert max(values) == adversarial_loss(probe(1.0, 0.0))


class TestCycleAndSyn:
    def test_perfect_cycle(self):
        assert cycle_loss(bundle()) == 0.0

    def test_both_offsets(self):
        b = bundle()
        assert cycle_loss(bundle(fgv=b.v + 0.1, gfi=b.i - 0.1)) == pytest.approx(0.2, abs=1e-12)

    def test_one_offset(self):
        b = bundle()
        assert cycle_loss(bundle(fgv=b.v + 0.1)) == pytest.approx(0.1, abs=1e-12)

    def test_syn_cases(self):
        b = bundle()
        assert syn_loss(bundle(f_i=b.fgv, g_v=b.gfi)) == 0.0
        assert syn_loss(bundle(f_i=b.fgv + 0.05, g_v=b.gfi)) == pytest.approx(0.05, abs=1e-12)
        assert syn_loss(bundle(f_i=b.fgv + 0.05, g_v=b.gfi - 0.05)) == pytest.approx(0.1, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            bundle(fgv=np.zeros((1, 4, 4)))

    def test_nonneg_zero_iff_equal(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            b = ConversionBundle(*(rng.normal(size=SHAPE) for _ in range(6)))
            assert cycle_loss(b) > 0 and syn_loss(b) > 0


class TestIdr:
    def test_cases(self):
        e = np.random.default_rng(2).normal(size=128)
        assert idr_loss(e, e) == 0.0
        bumped = e.copy()
        bumped[5] += 0.3
        assert idr_loss(e, bumped) == pytest.approx(0.3, abs=1e-12)
        assert idr_loss(e, e + 0.1) == pytest.approx(0.1 * math.sqrt(128), abs=1e-12)
        assert idr_loss(e, e + 0.1) == pytest.approx(1.13137, abs=1e-5)

    def test_length(self):
        with pytest.raises(ShapeError):
            idr_loss(np.zeros(127), np.zeros(127))

    def test_metric(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, b, c = rng.normal(size=(3, 128))
            assert idr_loss(a, b) == idr_loss(b, a)
            assert idr_loss(a, c) <= idr_loss(a, b) + idr_loss(b, c) + 1e-12


class TestComposite:
    def test_hand(self):
        total = composite_loss(4 * math.log(0.5), 0.2, 0.1, 0.3)
        assert total == pytest.approx(5.227411, abs=1e-6)

    def test_default_lambdas(self):
        assert LossWeights() == LossWeights(10.0, 30.0, 10.0)

    def test_zero_terms(self):
        assert composite_loss(0.0, 0.0, 0.0, 0.0) == 0.0
        assert composite_loss(-1.7, 3.0, 2.0, 1.0, LossWeights(0, 0, 0)) == -1.7

    def test_negative_rejected(self):
        with pytest.raises(ArgumentError):
            composite_loss(0.0, -0.1, 0.0, 0.0)
        with pytest.raises(ArgumentError):
            LossWeights(lambda_syn=-1.0)

    def test_affine_slopes(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            w = LossWeights(*rng.uniform(0, 50, size=3))
            adv, cyc, syn, idr = rng.normal(), *rng.uniform(0, 2, size=3)
            h = 0.5
            base = composite_loss(adv, cyc, syn, idr, w)
            slopes = [
                (composite_loss(adv + h, cyc, syn, idr, w) - base) / h,
                (composite_loss(adv, cyc + h, syn, idr, w) - base) / h,
                (composite_loss(adv, cyc, syn + h, idr, w) - base) / h,
                (composite_loss(adv, cyc, syn, idr + h, w) - base) / h,
            ]
            expected = [1.0, w.lambda_cyc, w.lambda_syn, w.lambda_idr]
            np.testing.assert_allclose(slopes, expected, rtol=0, atol=1e-12 * (1 + abs(base)))


def test_evaluate_losses_keys():
    b = bundle()
    e = np.zeros(128)
    out = evaluate_losses(probe(0.5, 0.5), b, e, e)
    assert set(out) == {"l_gan", "l_cyc", "l_syn", "l_idr", "total"}
    assert out["total"] == pytest.approx(out["l_gan"] + 30 * out["l_syn"])
