import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_instance, random_binary, random_W
from secureas.errors import InvariantError
from secureas.fp import (
    AuxState,
    secrecy_surrogate,
    surrogate_f1,
    surrogate_f2,
    surrogate_g1,
    surrogate_objective,
    surrogate_terms,
    tight_aux,
    update_alpha,
    update_b,
    update_beta,
    update_eta,
)
from secureas.model import ChannelSet, SystemConfig, g_bound, sinr_all, wssr

LN2 = np.log(2.0)


def scalar_case():
    """One user, one live antenna, h = 1, w = 2, unit noise: SINR 4."""
    cfg = SystemConfig(2, 1, 1, 1, 10.0)
    ch = ChannelSet(np.array([[1.0], [0.0]]), np.array([[0.5], [0.0]]))
    return cfg, ch, np.array([[2.0], [0.0]]), np.array([1.0, 0.0])


class TestActivityWeights:
    def test_examples(self):
        assert update_b([1.0], [0.5], [1.0]).tolist() == [1.0]
        assert update_b([-2.0], [1.0], [1.0]).tolist() == [0.0]
        assert update_b([0.25], [-0.25], [3.0]).tolist() == [0.0]

    def test_bang_bang(self, rng):
        w = rng.uniform(0.1, 3, 20)
        b = update_b(rng.standard_normal(20), rng.standard_normal(20), w)
        assert np.all((b == 0) | (b == w))


class TestClosedForms:
    def test_alpha_is_sinr(self, rng):
        cfg, ch = make_instance(rng)
        W, s = random_W(rng, cfg), random_binary(rng, cfg.M, cfg.N)
        np.testing.assert_allclose(update_alpha(cfg, ch, W, s), sinr_all(cfg, ch, W, s))
        assert not np.any(update_alpha(cfg, ch, np.zeros_like(W), s))

    def test_alpha_stationarity_by_finite_differences(self, rng):
        cfg, ch = make_instance(rng)
        W, s = random_W(rng, cfg), random_binary(rng, cfg.M, cfg.N)
        alpha = update_alpha(cfg, ch, W, s)
        for k in range(cfg.K):
            d = 1e-5 * max(1.0, alpha[k])
            slope = (surrogate_f1(k, alpha[k] + d, cfg, ch, W, s) - surrogate_f1(k, alpha[k] - d, cfg, ch, W, s)) / (2 * d)
            assert abs(slope) < 1e-6

    def test_beta_examples(self):
        cfg, ch, W, s = scalar_case()
        # gamma_bar = 0.25 * 4 = 1, g = 10 * 0.25 = 2.5
        assert update_beta(cfg, ch, W, s)[0] == pytest.approx((2.5 - 1) / 2)
        assert update_beta(cfg, ch, np.zeros_like(W), s)[0] == pytest.approx(2.5)
        full = np.array([[np.sqrt(10.0)], [0.0]])
        assert update_beta(cfg, ch, full, s)[0] == pytest.approx(0.0, abs=1e-15)

    def test_beta_worked_numbers(self):
        # g = 5 (p = 20, |g|^2 = 1/4) and gamma_bar = 1 (|w|^2 = 4): beta = 2
        cfg = SystemConfig(2, 1, 1, 1, 20.0)
        ch = ChannelSet(np.array([[1.0], [0.0]]), np.array([[0.5], [0.0]]))
        assert update_beta(cfg, ch, np.array([[2.0], [0.0]]), [1, 0])[0] == pytest.approx(2.0)

    def test_beta_rejects_infeasible_selection(self):
        cfg, ch, W, _ = scalar_case()
        big = np.array([[np.sqrt(10.0)], [0.0]])
        with pytest.raises(InvariantError):
            update_beta(cfg, ch, big, [1.5, 0.0])
        relaxed = update_beta(cfg, ch, big, [1.5, 0.0], relaxed=True)
        assert -1 < relaxed[0] < 0

    def test_eta_examples(self):
        cfg, ch, W, s = scalar_case()
        assert update_eta(cfg, ch, W, s)[0] == pytest.approx(2 / 5)
        assert not np.any(update_eta(cfg, ch, np.zeros_like(W), s))


class TestSurrogates:
    def test_f1_tight_at_sinr(self):
        cfg, ch, W, s = scalar_case()
        assert surrogate_f1(0, 4.0, cfg, ch, W, s) == pytest.approx(np.log(5))
        assert surrogate_f1(0, 0.0, cfg, ch, np.zeros_like(W), s) == 0.0

    def test_f1_grid_maximum_at_sinr(self, rng):
        cfg, ch = make_instance(rng)
        W, s = random_W(rng, cfg), random_binary(rng, cfg.M, cfg.N)
        gamma = sinr_all(cfg, ch, W, s)
        grid = np.linspace(0, 4 * gamma.max() + 1, 2001)
        for k in range(cfg.K):
            values = [surrogate_f1(k, a, cfg, ch, W, s) for a in grid]
            assert max(values) <= surrogate_f1(k, gamma[k], cfg, ch, W, s) + 1e-12
            assert surrogate_f1(k, gamma[k], cfg, ch, W, s) == pytest.approx(np.log1p(gamma[k]))

    def test_f2_examples(self, rng):
        cfg, ch = make_instance(rng)
        W, s = random_W(rng, cfg), random_binary(rng, cfg.M, cfg.N)
        g = g_bound(cfg, ch)
        gbar = wssr(cfg, ch, W, s).gamma_bar
        beta = update_beta(cfg, ch, W, s, g)
        for k in range(cfg.K):
            assert surrogate_f2(k, 0.0, cfg, ch, W, s, g) == pytest.approx((g - gbar[k]) / (1 + g))
            assert surrogate_f2(k, beta[k], cfg, ch, W, s, g) == pytest.approx(np.log1p((g - gbar[k]) / (1 + gbar[k])))

    def test_f2_vanishes_at_the_bound(self):
        cfg, ch, _, s = scalar_case()
        W = np.array([[np.sqrt(10.0)], [0.0]])
        g = g_bound(cfg, ch)
        assert surrogate_f2(0, update_beta(cfg, ch, W, s, g)[0], cfg, ch, W, s, g) == pytest.approx(0.0, abs=1e-15)

    def test_g1_examples(self, rng):
        cfg, ch = make_instance(rng)
        W, s = random_W(rng, cfg), random_binary(rng, cfg.M, cfg.N)
        alpha, eta = update_alpha(cfg, ch, W, s), update_eta(cfg, ch, W, s)
        for k in range(cfg.K):
            assert surrogate_g1(k, alpha[k], 0.0, cfg, ch, W, s) == pytest.approx(np.log1p(alpha[k]) - alpha[k])
            assert surrogate_g1(k, alpha[k], eta[k], cfg, ch, W, s) == pytest.approx(
                surrogate_f1(k, alpha[k], cfg, ch, W, s), abs=1e-12
            )

    def test_g1_is_concave_in_eta(self, rng):
        cfg, ch = make_instance(rng)
        W, s = random_W(rng, cfg), random_binary(rng, cfg.M, cfg.N)
        for _ in range(50):
            e1, e2 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            mid = surrogate_g1(0, 0.7, 0.5 * (e1 + e2), cfg, ch, W, s)
            chord = 0.5 * (surrogate_g1(0, 0.7, e1, cfg, ch, W, s) + surrogate_g1(0, 0.7, e2, cfg, ch, W, s))
            assert mid >= chord - 1e-12

    def test_objective_zero_without_active_users(self, rng):
        cfg, ch = make_instance(rng)
        W, s = random_W(rng, cfg), random_binary(rng, cfg.M, cfg.N)
        g = g_bound(cfg, ch)
        aux = tight_aux(cfg, ch, W, s, g, b=np.zeros(cfg.K))
        assert surrogate_objective(cfg, ch, W, s, aux, g) == 0.0

    def test_symbolic_single_link(self):
        # K = J = 1, one live antenna: every quantity by hand
        p, h, ge, w = 4.0, 1.5, 0.5, 1.2
        cfg = SystemConfig(2, 1, 1, 1, p)
        ch = ChannelSet(np.array([[h], [0.0]]), np.array([[ge], [0.0]]))
        W, s = np.array([[w], [0.0]]), np.array([1.0, 0.0])
        g = p * ge**2
        gamma, gbar = (h * w) ** 2, (ge * w) ** 2
        aux = tight_aux(cfg, ch, W, s, g)
        expected = np.log1p(gamma) + np.log((1 + g) / (1 + gbar))
        assert surrogate_objective(cfg, ch, W, s, aux, g) == pytest.approx(expected, rel=1e-14)
        assert secrecy_surrogate(cfg, ch, W, s, aux, g) / LN2 == pytest.approx(np.log2((1 + gamma) / (1 + gbar)))


@given(seed=st.integers(0, 2**32 - 1))
def test_surrogate_chain_is_tight(seed):
    rng = np.random.default_rng(seed)
    M = int(rng.integers(2, 9))
    cfg, ch = make_instance(rng, M, int(rng.integers(1, M)), int(rng.integers(1, 4)), int(rng.integers(1, 3)))
    W, s = random_W(rng, cfg, rng.uniform(0, 1)), random_binary(rng, cfg.M, cfg.N)
    g = g_bound(cfg, ch)
    aux = tight_aux(cfg, ch, W, s, g)
    exact = wssr(cfg, ch, W, s).wssr
    offset = float(aux.b.sum() * np.log2(1 + g))
    assert surrogate_objective(cfg, ch, W, s, aux, g) / LN2 - offset == pytest.approx(exact, abs=1e-9)
    assert secrecy_surrogate(cfg, ch, W, s, aux, g) / LN2 == pytest.approx(exact, abs=1e-9)


@given(seed=st.integers(0, 2**32 - 1))
def test_each_auxiliary_block_is_a_marginal_maximizer(seed):
    rng = np.random.default_rng(seed)
    cfg, ch = make_instance(rng)
    W, s = random_W(rng, cfg), random_binary(rng, cfg.M, cfg.N)
    g = g_bound(cfg, ch)
    aux = tight_aux(cfg, ch, W, s, g)
    best = secrecy_surrogate(cfg, ch, W, s, aux, g)
    K = cfg.K
    for _ in range(20):
        trials = [
            aux.replace(alpha=np.maximum(aux.alpha + rng.standard_normal(K) * (0.1 + aux.alpha), 0)),
            aux.replace(beta=np.maximum(aux.beta + rng.standard_normal(K) * (0.1 + aux.beta), 0)),
            aux.replace(eta=aux.eta + (rng.standard_normal(K) + 1j * rng.standard_normal(K)) * (0.1 + np.abs(aux.eta))),
            aux.replace(b=rng.uniform(0, 1, K) * cfg.weights),
        ]
        for trial in trials:
            assert secrecy_surrogate(cfg, ch, W, s, trial, g) <= best + 1e-8 * max(1, abs(best))


def test_surrogate_terms_match_scalar_functions(rng):
    cfg, ch = make_instance(rng)
    W, s = random_W(rng, cfg), random_binary(rng, cfg.M, cfg.N)
    g = g_bound(cfg, ch)
    aux = AuxState(np.ones(cfg.K), rng.uniform(0, 2, cfg.K), rng.uniform(0, 2, cfg.K), rng.standard_normal(cfg.K) + 0j)
    g1, f2 = surrogate_terms(cfg, ch, W, s, aux, g)
    for k in range(cfg.K):
        assert g1[k] == pytest.approx(surrogate_g1(k, aux.alpha[k], aux.eta[k], cfg, ch, W, s))
        assert f2[k] == pytest.approx(surrogate_f2(k, aux.beta[k], cfg, ch, W, s, g))
