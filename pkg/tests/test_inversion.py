import math

import numpy as np
import pytest

from avszero.errors import DimensionMismatch, ZeroVector
from avszero.inversion import (
    InversionConfig,
    ToyEncoder,
    check_gradient,
    cosine_similarity,
    invert,
)

from oracles import matvec


class TestCosineSimilarity:
    def test_self_similarity(self):
        v = np.array([0.3, -1.2, 4.0])
        assert cosine_similarity(v, v) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine_similarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_closed_form(self):
        got = cosine_similarity(np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        assert got == pytest.approx(1 / math.sqrt(2), abs=1e-9)
        assert got == pytest.approx(0.70711, abs=1e-5)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_similarity(np.array([1.0]), np.array([1.0, 0.0]))

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine_similarity(np.zeros(3), np.ones(3))


class TestToyEncoder:
    def test_zero_tokens_raise(self):
        enc = ToyEncoder(token_dim=4, output_dim=3, seed=1)
        with pytest.raises(ZeroVector):
            enc.encode(np.zeros((2, 4)))

    def test_deterministic(self):
        enc = ToyEncoder(seed=9)
        tokens = np.random.default_rng(0).standard_normal((4, 16))
        assert (enc.encode(tokens) == enc.encode(tokens)).all()

    def test_single_row_matches_naive_matvec(self):
        enc = ToyEncoder(token_dim=5, output_dim=3, seed=2)
        row = [0.1, -0.4, 2.0, 0.3, -1.1]
        raw = np.array(matvec(enc.weight.tolist(), row))
        expected = raw / np.linalg.norm(raw)
        got = enc.encode(np.array([row]))
        assert got == pytest.approx(expected, abs=1e-12)

    def test_unit_output_norm(self):
        enc = ToyEncoder(seed=3)
        tokens = np.random.default_rng(1).standard_normal((2, 16))
        assert np.linalg.norm(enc.encode(tokens)) == pytest.approx(1.0)


class TestCheckGradient:
    def test_toy_encoder_gradient(self):
        enc = ToyEncoder(seed=7)
        rng = np.random.default_rng(11)
        err = check_gradient(enc, rng.standard_normal((4, 16)), rng.standard_normal(8))
        assert err < 1e-5

    def test_detects_sign_flip(self):
        enc = ToyEncoder(seed=7)

        class Flipped:
            token_dim = enc.token_dim
            output_dim = enc.output_dim
            encode = staticmethod(enc.encode)

            @staticmethod
            def encode_grad(tokens, target):
                return -enc.encode_grad(tokens, target)

        rng = np.random.default_rng(12)
        err = check_gradient(Flipped(), rng.standard_normal((4, 16)), rng.standard_normal(8))
        assert err == pytest.approx(2.0, abs=0.1)

    def test_constant_encoder_absolute_error(self):
        class Constant:
            token_dim = 4
            output_dim = 3

            @staticmethod
            def encode(tokens):
                return np.array([1.0, 0.0, 0.0])

            @staticmethod
            def encode_grad(tokens, target):
                return np.zeros_like(np.asarray(tokens, dtype=np.float64))

        rng = np.random.default_rng(13)
        err = check_gradient(Constant(), rng.standard_normal((2, 4)), rng.standard_normal(3))
        assert err < 1e-8


class TestInvert:
    def test_recoverable_target(self):
        enc = ToyEncoder(seed=7)
        target = enc.encode(np.random.default_rng(5).standard_normal((4, 16)))
        _, sim, iters = invert(target, enc)
        assert sim >= 0.999
        assert iters <= 500

    def test_single_iteration(self):
        enc = ToyEncoder(seed=7)
        target = enc.encode(np.random.default_rng(6).standard_normal((4, 16)))
        tokens, _, iters = invert(target, enc, InversionConfig(max_iters=1))
        assert iters == 1
        init = 0.02 * np.random.default_rng(0).standard_normal((4, 16))
        assert not np.allclose(tokens, init)  # exactly one update applied

    def test_deterministic_given_seed(self):
        enc = ToyEncoder(seed=7)
        target = enc.encode(np.random.default_rng(8).standard_normal((4, 16)))
        a = invert(target, enc, InversionConfig(seed=3))
        b = invert(target, enc, InversionConfig(seed=3))
        assert (a[0] == b[0]).all() and a[1] == b[1] and a[2] == b[2]

    def test_scale_invariance_in_target(self):
        enc = ToyEncoder(seed=7)
        target = enc.encode(np.random.default_rng(9).standard_normal((4, 16)))
        a = invert(target, enc, InversionConfig(seed=4))
        b = invert(7.5 * target, enc, InversionConfig(seed=4))
        assert a[0] == pytest.approx(b[0], abs=1e-12)
        assert a[1] == pytest.approx(b[1], abs=1e-12)

    def test_best_similarity_nondecreasing_in_budget(self):
        enc = ToyEncoder(seed=7)
        target = enc.encode(np.random.default_rng(10).standard_normal((4, 16)))
        sims = [invert(target, enc, InversionConfig(max_iters=n, seed=2))[1]
                for n in (1, 5, 25, 125, 500)]
        assert sims == sorted(sims)

    def test_unreachable_target_matches_projection_oracle(self):
        # output_dim > token_dim leaves targets outside the projection's column space.
        enc = ToyEncoder(token_dim=4, output_dim=12, seed=3)
        target = np.random.default_rng(0).standard_normal(12)
        coef, *_ = np.linalg.lstsq(enc.weight, target, rcond=None)
        projected = enc.weight @ coef
        best_possible = (projected @ target) / (np.linalg.norm(projected) * np.linalg.norm(target))
        _, sim, _ = invert(target, enc, InversionConfig(seed=1))
        assert sim == pytest.approx(best_possible, abs=1e-3)

    def test_target_dim_checked(self):
        enc = ToyEncoder(seed=7)
        with pytest.raises(DimensionMismatch):
            invert(np.ones(5), enc)
