"""Ring-profile coefficients and the random-restart descent optimizer."""

import math

import numpy as np
import pytest

from felight.electron import IELSStage, iels_modulate
from felight.fock import Cat, Custom, SqueezedVacuum
from felight.synthesis import (RingProfile, SynthesisProblem, _descend,
                               _Workspace, objective, optimize,
                               ring_coefficients)


def aligned_max_error(a, b):
    phase = np.vdot(b, a)
    phase /= abs(phase)
    return np.abs(a - phase * b).max()


class TestRingCoefficients:
    def test_single_ring_matches_iels_stage(self):
        prof = RingProfile(betas=((1.3, 0.4),), drift=0.2)
        stage = iels_modulate(IELSStage(1.3, beta_phase=0.4, drift=0.2))
        ring = ring_coefficients(prof)
        lo = max(ring.offset, stage.offset)
        hi = min(ring.indices()[-1], stage.indices()[-1])
        idx = np.arange(lo, hi + 1)
        a = np.array([ring.amplitude(int(i)) for i in idx])
        b = np.array([stage.amplitude(int(i)) for i in idx])
        assert aligned_max_error(a, b) < 1e-13

    def test_equal_rings_collapse(self):
        one = ring_coefficients(RingProfile(betas=((2.0, 1.0),), drift=0.1))
        two = ring_coefficients(RingProfile(betas=((2.0, 1.0), (2.0, 1.0)),
                                            drift=0.1))
        idx = one.indices()
        a = np.array([one.amplitude(int(i)) for i in idx])
        b = np.array([two.amplitude(int(i)) for i in idx])
        assert aligned_max_error(a, b) < 1e-13

    def test_all_zero_profile_is_trivial(self):
        sp = ring_coefficients(RingProfile(betas=((0.0, 0.0), (0.0, 1.0))))
        assert abs(sp.amplitude(0) - 1.0) < 1e-15

    def test_harmonic_lattice(self):
        sp = ring_coefficients(RingProfile(betas=((1.0, 0.0),), harmonic=2))
        occupied = sp.indices()[np.abs(sp.amps) > 0]
        assert np.all(occupied % 2 == 0)


class TestObjective:
    def test_vacuum_target_trivial(self):
        prob = SynthesisProblem(target=Custom((1.0,)), beta0=1.0, rings=1,
                                n_max_coeff=4, restarts=1, max_iters=1, seed=0)
        fid, p = objective(RingProfile(betas=((0.0, 0.0),)), 0, prob)
        assert abs(fid - 1.0) < 1e-12
        assert abs(p - math.exp(-1.0)) < 1e-12

    def test_fock_one_target(self):
        prob = SynthesisProblem(target=Custom((0.0, 1.0)), beta0=1.0, rings=1,
                                n_max_coeff=4, restarts=1, max_iters=1, seed=0)
        fid, p = objective(RingProfile(betas=((0.0, 0.0),)), -1, prob)
        assert abs(fid - 1.0) < 1e-12
        assert abs(p - math.exp(-1.0)) < 1e-12

    def test_batched_workspace_matches_objective(self):
        prob = SynthesisProblem(target=SqueezedVacuum(0.4), beta0=1.0, rings=3,
                                harmonic=2, restarts=1, max_iters=1, seed=0)
        ws = _Workspace(prob)
        rng = np.random.default_rng(5)
        for _ in range(4):
            betas = rng.uniform(0, 12, 3)
            x = np.concatenate([ws.raw_from_betas(betas),
                                rng.uniform(0, 2 * np.pi, 3), [rng.uniform()]])
            prof = ws.profile_from_x(x)
            for s in (-2, 0, 2):
                assert abs(ws.evaluate(x[None, :], s)[0]
                           - objective(prof, s, prob)[0]) < 1e-12

    def test_ring_permutation_invariance(self):
        prob = SynthesisProblem(target=Cat(alpha=1.0, theta=0.3), beta0=1.5,
                                rings=3, restarts=1, max_iters=1, seed=0)
        prof_a = RingProfile(betas=((1.0, 0.2), (3.0, 1.1), (6.0, 2.0)), drift=0.3)
        prof_b = RingProfile(betas=((6.0, 2.0), (1.0, 0.2), (3.0, 1.1)), drift=0.3)
        fa, _ = objective(prof_a, -2, prob)
        fb, _ = objective(prof_b, -2, prob)
        assert abs(fa - fb) < 1e-12

    def test_target_global_phase_invariance(self):
        amps = np.zeros(5, dtype=complex)
        amps[0], amps[2] = 0.8, 0.6
        prob_a = SynthesisProblem(target=Custom(tuple(amps)), beta0=1.0,
                                  rings=2, restarts=1, max_iters=1, seed=0)
        prob_b = SynthesisProblem(target=Custom(tuple(amps * np.exp(0.7j))),
                                  beta0=1.0, rings=2, restarts=1, max_iters=1,
                                  seed=0)
        prof = RingProfile(betas=((2.0, 0.5), (4.0, 1.5)), drift=0.12)
        assert abs(objective(prof, -1, prob_a)[0]
                   - objective(prof, -1, prob_b)[0]) < 1e-12

    def test_even_harmonic_with_even_sideband_kills_odd_levels(self):
        from felight.emission import emit_exact
        sp = ring_coefficients(RingProfile(betas=((2.0, 0.3), (5.0, 1.0)),
                                           drift=0.2, harmonic=2))
        out = emit_exact([sp], 1.0, [-2])
        assert np.abs(out.state.amps[1::2]).max() == 0.0

    def test_gradient_halving_ratio(self):
        # central differences: error is O(h^2), so successive halvings shrink
        # the defect against the finest estimate by about 4
        prob = SynthesisProblem(target=SqueezedVacuum(0.4), beta0=1.0, rings=2,
                                harmonic=2, restarts=1, max_iters=1, seed=0)
        ws = _Workspace(prob)
        rng = np.random.default_rng(11)
        x = np.concatenate([ws.raw_from_betas(rng.uniform(0.5, 10, 2)),
                            rng.uniform(0, 2 * np.pi, 2), [0.37]])

        def diff(h, i):
            e = np.zeros_like(x)
            e[i] = h
            f = lambda v: ws.evaluate(v[None, :], 0)[0]
            return (f(x + e) - f(x - e)) / (2 * h)

        for i in range(x.size):
            d1, d2, d3 = (diff(h, i) for h in (2e-3, 1e-3, 5e-4))
            if abs(d2 - d3) < 1e-12:
                continue  # locally flat coordinate
            ratio = abs(d1 - d3) / abs(d2 - d3)
            assert 2.0 < ratio < 8.0


class TestOptimize:
    def test_deterministic_under_seed(self):
        prob = SynthesisProblem(target=SqueezedVacuum(0.3), beta0=1.0, rings=2,
                                harmonic=2, s_range=(-2, 0), restarts=3,
                                max_iters=60, seed=42)
        r1 = optimize(prob)
        r2 = optimize(prob)
        assert r1 == r2

    def test_restart_budget_monotonicity(self):
        base = dict(target=SqueezedVacuum(0.3), beta0=1.0, rings=2, harmonic=2,
                    s_range=(-2, 0), max_iters=60, seed=7)
        few = optimize(SynthesisProblem(restarts=2, **base))
        more = optimize(SynthesisProblem(restarts=5, **base))
        assert more.fidelity >= few.fidelity - 1e-12
        assert more.trace[:2] == few.trace

    def test_trace_has_one_entry_per_restart(self):
        prob = SynthesisProblem(target=SqueezedVacuum(0.3), beta0=1.0, rings=1,
                                harmonic=2, s_range=(-2, 0), restarts=4,
                                max_iters=40, seed=1)
        res = optimize(prob)
        assert len(res.trace) == 4
        assert max(res.trace) <= res.fidelity + 1e-9

    def test_squeezed_small_budget_reaches_high_fidelity(self):
        prob = SynthesisProblem(target=SqueezedVacuum(0.5), beta0=1.0, rings=2,
                                harmonic=2, s_range=(-4, 2), restarts=6,
                                max_iters=150, seed=3)
        res = optimize(prob)
        assert res.fidelity > 0.99
        assert all(a <= 14.0 for a, _ in res.best.betas)

    def test_descent_improves_or_keeps(self):
        prob = SynthesisProblem(target=Cat(alpha=1.0, theta=math.pi / 2),
                                beta0=1.5, rings=1, restarts=1, max_iters=50,
                                seed=2)
        ws = _Workspace(prob)
        x0 = np.concatenate([ws.raw_from_betas(np.array([3.0])), [0.5], [0.3]])
        f0 = -ws.evaluate(x0[None, :], -3)[0]
        _, f = _descend(lambda b: -ws.evaluate(b, -3), x0, 50)
        assert f <= f0 + 1e-15
