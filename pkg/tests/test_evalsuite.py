"""Force metrics, report files, ablation variants, and the trial runner."""

from dataclasses import replace

import numpy as np
import pytest

from contactflow.evalsuite import (ForceStat, VARIANTS, aggregate,
                                   apply_variant, expert_force, force_cost,
                                   force_statistic, read_trials_csv,
                                   run_suite, run_trial, statistic_mode,
                                   write_plot_data, write_trials_csv)
from contactflow.evalsuite.runner import TrialReport, target_surface_y
from contactflow.flow import SamplerConfig
from contactflow.policy.config import PolicyConfig
from contactflow.policy.policy import FlowPolicy
from contactflow.sim.tasks import make_task


def wrench_trace(norms):
    """Build a (T,3) trace whose force norms are exactly `norms`."""
    return np.array([[0.6 * n, 0.8 * n, 0.0] for n in norms])


class TestForceStatistic:
    def test_peak_is_force_norm(self):
        # (3, 4) has norm 5; the torque axis must not contribute
        trace = np.array([[3.0, 4.0, 99.0], [0.1, 0.1, 0.0]])
        stat = force_statistic(trace, "peak")
        assert stat.valid and stat.value == pytest.approx(5.0)

    def test_effective_mean_ignores_light_touches(self):
        # contact samples are those above 5 N: {6, 10, 8} -> mean 8
        stat = force_statistic(wrench_trace([2.0, 6.0, 10.0, 8.0, 0.0]), "mean")
        assert stat.valid and stat.value == pytest.approx(8.0)

    def test_no_contact_sentinel(self):
        stat = force_statistic(wrench_trace([0.0, 1.0, 4.9]), "mean")
        assert not stat.valid
        assert np.isnan(stat.value)

    def test_empty_trace_is_no_contact(self):
        assert not force_statistic(np.zeros((0, 3)), "peak").valid

    def test_mode_per_task(self):
        assert statistic_mode("stamp") == "peak"
        assert statistic_mode("wipe_plane") == "mean"
        with pytest.raises(ValueError):
            statistic_mode("juggle")

    def test_bad_inputs(self):
        with pytest.raises(ValueError, match="wrench trace"):
            force_statistic(np.zeros(5), "peak")
        with pytest.raises(ValueError, match="statistic mode"):
            force_statistic(wrench_trace([1.0]), "median")


class TestForceCost:
    def test_worked_example(self):
        # |10-10| + |12-10| + |8-10| over 3 episodes = 4/3
        stats = [ForceStat(10.0, True), ForceStat(12.0, True), ForceStat(8.0, True)]
        assert force_cost(stats, 10.0) == pytest.approx(4.0 / 3.0)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        stats = [ForceStat(float(v), True) for v in rng.uniform(2, 15, size=9)]
        base = force_cost(stats, 10.0)
        for _ in range(5):
            rng.shuffle(stats)
            assert force_cost(stats, 10.0) == pytest.approx(base)

    def test_zero_iff_all_match_expert(self):
        exact = [ForceStat(5.0, True)] * 4
        assert force_cost(exact, 5.0) == 0.0
        off = [ForceStat(5.0, True)] * 3 + [ForceStat(5.1, True)]
        assert force_cost(off, 5.0) > 0.0

    def test_invalid_episodes_excluded(self):
        stats = [ForceStat(12.0, True), ForceStat.no_contact()]
        assert force_cost(stats, 10.0) == pytest.approx(2.0)
        assert np.isnan(force_cost([ForceStat.no_contact()], 10.0))

    def test_expert_values(self):
        assert expert_force("stamp") == 10.0
        assert expert_force("wipe_curve") == 5.0


def fake_report(index, success, stat, norms=(1.0, 2.0)):
    return TrialReport(task="stamp", index=index, seed=100 + index,
                       success=success, force_stat=stat, steps=len(norms),
                       handover="none", target_x=0.05, spatial_shift=False,
                       material_factor=1.0, force_norms=np.array(norms))


class TestReports:
    def test_aggregate(self):
        reports = [fake_report(0, True, ForceStat(10.0, True)),
                   fake_report(1, False, ForceStat(12.0, True)),
                   fake_report(2, False, ForceStat.no_contact())]
        agg = aggregate(reports)
        assert agg["success_rate"] == pytest.approx(1 / 3)
        assert agg["force_cost"] == pytest.approx(1.0)
        assert agg["n_no_contact"] == 1

    def test_csv_roundtrip_with_footer(self, tmp_path):
        reports = [fake_report(0, True, ForceStat(9.5, True)),
                   fake_report(1, False, ForceStat.no_contact())]
        path = tmp_path / "trials.csv"
        agg = write_trials_csv(path, reports)
        text = path.read_text()
        assert text.strip().endswith(f"n_no_contact={agg['n_no_contact']}")
        assert "# aggregate" in text
        rows = read_trials_csv(path)
        assert len(rows) == 2
        assert rows[0]["force_stat"] == "9.5"
        assert rows[1]["force_stat"] == "no_contact"
        assert rows[0]["success"] == "1"

    def test_aggregate_rejects_mixed_tasks(self):
        a = fake_report(0, True, ForceStat(10.0, True))
        b = replace(a, task="wipe_plane")
        with pytest.raises(ValueError, match="task kinds"):
            aggregate([a, b])

    def test_plot_data_long_form(self, tmp_path):
        reports = [fake_report(0, True, ForceStat(10.0, True), norms=(0.0, 5.0, 9.5))]
        path = tmp_path / "plot.csv"
        write_plot_data(path, reports)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "trial,step,force_norm"
        assert lines[1:] == ["0,0,0", "0,1,5", "0,2,9.5"]


class TestAblation:
    def test_variant_deltas(self):
        base = PolicyConfig()
        assert apply_variant(base, "full") == base
        one = apply_variant(base, "one_step")
        assert one.h_force == 1 and one.predict_force
        nop = apply_variant(base, "no_prediction")
        assert nop.h_force == base.h_force and not nop.predict_force
        assert nop.step_dim == base.d_p
        both = apply_variant(base, "one_step_no_prediction")
        assert both.h_force == 1 and not both.predict_force
        assert set(VARIANTS) == {"full", "one_step", "no_prediction",
                                 "one_step_no_prediction"}

    def test_unknown_variant(self):
        with pytest.raises(ValueError, match="unknown ablation variant"):
            apply_variant(PolicyConfig(), "half_step")


def tiny_policy(**overrides):
    cfg = PolicyConfig(model_dim=16, heads=2, depth=1, h_a=4, h_o=1, h_force=2,
                       vis_token_dim=8, **overrides)
    policy = FlowPolicy(cfg, seed=0)
    rng = np.random.default_rng(0)
    n = 4
    from contactflow.policy.data import TrainingSet
    data = TrainingSet(
        q=rng.uniform(-0.1, 0.2, (n, cfg.h_o, 3)).astype(np.float32),
        f_hist=rng.uniform(-1, 12, (n, cfg.h_force, 3)).astype(np.float32),
        images=rng.uniform(0, 1, (n, cfg.h_o * cfg.views, 1, 64, 64)).astype(np.float32),
        actions=rng.uniform(-0.002, 0.002, (n, cfg.h_a, cfg.step_dim)).astype(np.float32),
    )
    policy.fit_normalization(data)
    return policy


class TestRunner:
    def test_dim_mismatch_rejected_before_trials(self):
        bad = FlowPolicy(PolicyConfig(model_dim=16, heads=2, depth=1, h_a=4,
                                      h_o=1, d_q=7, vis_token_dim=8), seed=0)
        with pytest.raises(ValueError, match="do not match this environment"):
            run_suite(bad, "stamp", 1, base_seed=0)

    def test_trial_report_fields_and_determinism(self):
        policy = tiny_policy()
        kwargs = dict(sampler=SamplerConfig(steps=2))
        # keep it quick: monkeypatch a short episode via a custom spec is
        # not possible here, so run the full (cheap) tiny-policy episode
        r1 = run_trial(policy, "stamp", 0, base_seed=42, **kwargs)
        r2 = run_trial(policy, "stamp", 0, base_seed=42, **kwargs)
        assert r1.seed == 42 and r1.task == "stamp"
        assert r1.handover == "none"
        assert r1.steps == make_task("stamp", 42).episode_len
        assert r1.success == r2.success
        assert np.array_equal(r1.force_norms, r2.force_norms)
        assert (r1.force_stat.value == r2.force_stat.value) or (
            not r1.force_stat.valid and not r2.force_stat.valid)

    def test_suite_seeds_are_distinct(self):
        policy = tiny_policy()
        reports = run_suite(policy, "stamp", 2, base_seed=7,
                            sampler=SamplerConfig(steps=1))
        assert [r.seed for r in reports] == [7, 8]
        assert [r.index for r in reports] == [0, 1]

    def test_v2f_trial_records_handover(self):
        policy = tiny_policy()
        r = run_trial(policy, "stamp", 0, base_seed=3, use_v2f=True,
                      sampler=SamplerConfig(steps=1))
        assert r.handover in ("succeeded", "failed")
        # an untrained policy should not stumble into stamping success
        assert isinstance(r.success, bool)

    def test_target_surface_heights(self):
        stamp = make_task("stamp", 0)
        assert target_surface_y(stamp) == pytest.approx(stamp.stack_top)
        wipe = make_task("wipe_plane", 0)
        h = target_surface_y(wipe)
        assert 0.015 < h < 0.025
        press = make_task("press", 0)
        assert target_surface_y(press) == pytest.approx(0.027)
