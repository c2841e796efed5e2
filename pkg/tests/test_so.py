from itertools import combinations

import numpy as np
import pytest

from conftest import make_instance, random_W
from secureas.model import ChannelSet, SystemConfig, power, wssr
from secureas.so import _wssr_batch, fp_beamforming, greedy_evaluations, greedy_select, so_solve


def exhaustive(cfg, ch, W):
    """Best subset of size N for a fixed beamformer, by enumeration."""
    best, best_s = -1.0, None
    for idx in combinations(range(cfg.M), cfg.N):
        s = np.zeros(cfg.M)
        s[list(idx)] = 1
        value = wssr(cfg, ch, W, s).wssr
        if value > best:
            best, best_s = value, s
    return best, best_s


class TestGreedy:
    def test_batch_matches_scalar_evaluation(self, rng):
        cfg, ch = make_instance(rng)
        W = random_W(rng, cfg)
        masks = (rng.uniform(size=(7, cfg.M)) < 0.5).astype(float)
        expected = [wssr(cfg, ch, W, m).wssr for m in masks]
        np.testing.assert_allclose(_wssr_batch(cfg, ch, W, masks), expected, rtol=1e-12, atol=1e-15)

    @pytest.mark.parametrize("seed", range(6))
    def test_single_chain_is_exhaustive(self, seed):
        rng = np.random.default_rng(seed)
        cfg, ch = make_instance(rng, M=6, N=1, K=2, J=2)
        W = random_W(rng, cfg)
        value, s = exhaustive(cfg, ch, W)
        sel = greedy_select(cfg, ch, W)
        assert wssr(cfg, ch, W, sel.s).wssr == pytest.approx(value)

    def test_against_exhaustive_search(self):
        # greedy is a heuristic: record the gap and require it to be the optimum often
        hits, gaps = 0, []
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            cfg, ch = make_instance(rng, M=6, N=2, K=2, J=2)
            W = fp_beamforming(cfg, ch)
            best, _ = exhaustive(cfg, ch, W)
            got = wssr(cfg, ch, W, greedy_select(cfg, ch, W).s).wssr
            assert got <= best + 1e-12
            gaps.append(best - got)
            hits += got >= best - 1e-9
        assert hits >= 10, gaps

    def test_greedy_beats_its_own_alternatives(self, rng):
        # every round picks the best extension of the previous prefix
        cfg, ch = make_instance(rng, M=6, N=3, K=2, J=2)
        W = random_W(rng, cfg)
        s = greedy_select(cfg, ch, W).s
        prefix = np.zeros(cfg.M)
        chosen = []
        for _ in range(cfg.N):
            values = {}
            for m in np.flatnonzero(prefix == 0):
                trial = prefix.copy()
                trial[m] = 1
                values[m] = wssr(cfg, ch, W, trial).wssr
            m = max(values, key=lambda i: (values[i], -i))
            prefix[m] = 1
            chosen.append(m)
        assert sorted(chosen) == np.flatnonzero(s).tolist()

    def test_zero_beamformer_picks_first_antennas(self, rng):
        cfg, ch = make_instance(rng, M=6, N=3)
        assert greedy_select(cfg, ch, np.zeros((6, cfg.K))).indices.tolist() == [0, 1, 2]

    def test_always_activates_exactly_n(self, rng):
        # every single activation hurts when the eavesdropper sees everything better
        cfg = SystemConfig(4, 2, 1, 1, 1.0)
        ch = ChannelSet(0.1 * np.ones((4, 1)), 10 * np.ones((4, 1)))
        sel = greedy_select(cfg, ch, np.ones((4, 1)))
        assert sel.s.sum() == 2

    def test_deterministic(self, rng):
        cfg, ch = make_instance(rng)
        W = random_W(rng, cfg)
        assert greedy_select(cfg, ch, W).indices.tolist() == greedy_select(cfg, ch, W.copy()).indices.tolist()

    @pytest.mark.parametrize("M, N, count", [(6, 1, 6), (6, 2, 11), (12, 4, 42)])
    def test_evaluation_count(self, M, N, count, monkeypatch):
        import secureas.so as so

        calls = []
        original = so._wssr_batch
        monkeypatch.setattr(so, "_wssr_batch", lambda cfg, ch, W, masks: calls.append(len(masks)) or original(cfg, ch, W, masks))
        rng = np.random.default_rng(M * 10 + N)
        cfg, ch = make_instance(rng, M=M, N=N, K=2, J=1)
        so.greedy_select(cfg, ch, random_W(rng, cfg))
        assert sum(calls) == count == greedy_evaluations(M, N)


class TestSolve:
    def test_asymmetric_pair(self):
        cfg = SystemConfig(2, 1, 1, 1, 1.0)
        ch = ChannelSet(np.array([[10.0], [0.1]], complex), np.array([[0.1], [10.0]], complex))
        assert so_solve(cfg, ch).selection.indices.tolist() == [0]
        assert so_solve(cfg, ch, refine=True).selection.indices.tolist() == [0]

    @pytest.mark.parametrize("refine", [False, True])
    def test_output_contract(self, rng, refine):
        cfg, ch = make_instance(rng, M=6, N=2, K=2, J=2)
        res = so_solve(cfg, ch, refine=refine)
        s = res.selection.s
        assert s.sum() == cfg.N and set(np.unique(s)) <= {0.0, 1.0}
        assert power(res.W) <= cfg.power_budget * (1 + 1e-6)
        assert not np.any(res.W[s == 0])
        assert res.report.wssr == pytest.approx(wssr(cfg, ch, res.W, s).wssr)

    def test_refinement_never_hurts(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            cfg, ch = make_instance(rng, M=6, N=2, K=2, J=2)
            assert so_solve(cfg, ch, refine=True).report.wssr >= so_solve(cfg, ch).report.wssr

    def test_unrefined_output_is_the_masked_full_array_design(self, rng):
        cfg, ch = make_instance(rng, M=5, N=2, K=2, J=1)
        res = so_solve(cfg, ch)
        W = fp_beamforming(cfg, ch)
        np.testing.assert_array_equal(res.W, res.selection.s[:, None] * W)


def test_so_tracks_pdd_on_desk_draws(desk_power_sweep):
    so = desk_power_sweep.cell(10.0, "so").mean
    pdd = desk_power_sweep.cell(10.0, "pdd").mean
    print(f"desk 10 dBm: so {so:.3f}, pdd {pdd:.3f}")
    assert so <= pdd + 0.05
