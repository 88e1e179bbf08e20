"""Contact simulator: physics laws, sensing, rendering, experts, datasets."""

import numpy as np
import pytest

from contactflow.policy.config import desk_profile
from contactflow.sim import (ContactEnv, PhysParams, SurfaceMaterial, TaskSpec,
                             World, build_scene, build_training_set,
                             generate_dataset, load_dataset, load_episode,
                             make_task, render_arm, render_fix, run_expert,
                             save_episode, scripted_expert, success)
from contactflow.sim.physics import ToolState, friction_force, normal_force
from contactflow.sim.sensing import WrenchSensor
from contactflow.sim.tasks import (FIXTURE_HEIGHT, SEGMENT_HALF_LENGTH,
                                   SLOT_DEPTH, StampScene)
from dataclasses import replace as dataclasses_replace

CFG = desk_profile()


# ---------------------------------------------------------------------------
# contact law


class TestContactLaw:
    def test_hooke_at_rest(self):
        # k_s = 1000 N/m and 2 mm penetration at rest is 2 N, by F = k*x
        mat = SurfaceMaterial(stiffness=1000.0, damping=50.0, friction=0.3)
        assert normal_force(mat, pen=0.002, pen_rate=0.0) == pytest.approx(2.0)

    def test_no_contact_is_exactly_zero(self):
        mat = SurfaceMaterial(1000.0, 50.0, 0.3)
        assert normal_force(mat, pen=0.0, pen_rate=-1.0) == 0.0
        assert normal_force(mat, pen=-0.01, pen_rate=5.0) == 0.0
        assert friction_force(mat, f_n=0.0, vx=1.0) == 0.0

    def test_kinetic_friction_magnitude(self):
        # mu = 0.4 under 10 N of normal force gives exactly 4 N opposing motion
        mat = SurfaceMaterial(1000.0, 0.0, 0.4)
        assert friction_force(mat, f_n=10.0, vx=0.05) == pytest.approx(-4.0)
        assert friction_force(mat, f_n=10.0, vx=-0.05) == pytest.approx(4.0)

    def test_separation_damping_term(self):
        # damping acts on the separating rate: c_d * max(0, -pen_rate)
        mat = SurfaceMaterial(1000.0, 60.0, 0.0)
        f = normal_force(mat, pen=0.001, pen_rate=-0.02)
        assert f == pytest.approx(1000.0 * 0.001 + 60.0 * 0.02)
        # compressing: the damping term is inactive
        assert normal_force(mat, pen=0.001, pen_rate=0.02) == pytest.approx(1.0)

    def test_normal_force_never_negative(self):
        rng = np.random.default_rng(0)
        mat = SurfaceMaterial(500.0, 80.0, 0.5)
        for _ in range(1000):
            pen = rng.uniform(-0.01, 0.01)
            rate = rng.uniform(-1.0, 1.0)
            assert normal_force(mat, pen, rate) >= 0.0

    def test_friction_bounded_by_coulomb_cone(self):
        rng = np.random.default_rng(1)
        mat = SurfaceMaterial(500.0, 80.0, 0.37)
        for _ in range(1000):
            f_n = rng.uniform(0.0, 30.0)
            f_t = friction_force(mat, f_n, rng.uniform(-0.1, 0.1))
            assert abs(f_t) <= mat.friction * f_n + 1e-9

    def test_material_validation(self):
        with pytest.raises(ValueError):
            SurfaceMaterial(0.0, 1.0, 0.3)
        with pytest.raises(ValueError):
            SurfaceMaterial(100.0, -1.0, 0.3)
        with pytest.raises(ValueError):
            SurfaceMaterial(100.0, 1.0, -0.1)


class TestWorld:
    def test_settles_on_surface_at_hooke_depth(self):
        # command the tool well below a soft surface; at equilibrium the
        # servo load matches the spring load
        spec = make_task("stamp", 0)
        scene = StampScene(spec)
        world = World(scene, start=(spec.target_x, spec.stack_top + 0.002))
        for _ in range(60):
            w = world.control_step(np.array([0.0, -0.0004, 0.0]))
        for _ in range(80):   # hold the setpoint and settle
            w = world.control_step(np.zeros(3))
        pen = spec.stack_top - world.state.y
        k_s = spec.material.stiffness
        assert pen > 0.005
        assert w.fy == pytest.approx(k_s * pen, rel=1e-9)

    def test_free_space_wrench_is_zero(self):
        spec = make_task("stamp", 0)
        world = World(StampScene(spec), start=(0.0, 0.15))
        w = world.control_step(np.array([0.001, 0.001, 0.0]))
        assert w.as_array().tolist() == [0.0, 0.0, 0.0]

    def test_actuator_limit_clamps_commands(self):
        spec = make_task("stamp", 0)
        world = World(StampScene(spec), start=(0.0, 0.15))
        world.control_step(np.array([1.0, -1.0, 0.0]))   # absurd command
        lim = world.params.step_limit
        assert world.state.target_x == pytest.approx(lim)
        assert world.state.target_y == pytest.approx(0.15 - lim)

    def test_rejects_bad_command_shape(self):
        world = World(StampScene(make_task("stamp", 0)))
        with pytest.raises(ValueError, match="motion command"):
            world.control_step(np.zeros(2))

    def test_grip_passthrough_clipped(self):
        world = World(StampScene(make_task("stamp", 0)))
        world.control_step(np.array([0.0, 0.0, 0.7]))
        world.control_step(np.array([0.0, 0.0, 0.7]))
        assert world.state.grip == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# task sampling and scenes


class TestTasks:
    def test_same_seed_same_spec(self):
        assert make_task("stamp", 7) == make_task("stamp", 7)
        assert make_task("stamp", 7) != make_task("stamp", 8)

    def test_spatial_shift_moves_target_out_of_training_range(self):
        for seed in range(10):
            spec = make_task("stamp", seed, spatial_shift=True)
            assert 0.16 <= abs(spec.target_x) <= 0.21
            indist = make_task("stamp", seed)
            assert abs(indist.target_x) <= 0.10

    def test_material_factor_scales_stiffness_and_friction(self):
        spec = make_task("stamp", 0, material_factor=2.0)
        eff = spec.effective_material
        assert eff.stiffness == pytest.approx(2 * spec.material.stiffness)
        assert eff.friction == pytest.approx(2 * spec.material.friction)
        assert eff.damping == pytest.approx(spec.material.damping)

    def test_spec_roundtrips_through_dict(self):
        spec = make_task("wipe_curve", 3, spatial_shift=True, material_factor=0.5)
        assert TaskSpec.from_dict(spec.to_dict()) == spec

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown task kind"):
            make_task("juggle", 0)

    def test_stamp_sheets_within_range(self):
        sheets = {make_task("stamp", s).sheets for s in range(200)}
        assert min(sheets) >= 1 and max(sheets) <= 50
        assert len(sheets) > 20   # actually randomized

    def test_press_resistance_monotone_until_trigger(self):
        # push the plunger down quasi-statically; resistance must grow
        # monotonically with displacement until the trigger point
        spec = make_task("press", 0)
        env = ContactEnv(spec, CFG)
        env.world.state.x = env.world.state.target_x = spec.target_x
        env.world.state.y = env.world.state.target_y = env.scene.cap_rest_top + 0.001
        forces, disps = [], []
        while not env.scene.latched and env.running:
            env.apply(np.array([0.0, -0.0003, 0.0]))
            forces.append(env.wrench_true_trace[-1][1])
            disps.append(env.scene.displacement)
        pre = [f for f, d in zip(forces, disps) if d < spec.trigger_depth and f > 0]
        assert len(pre) > 5
        assert all(b > a - 1e-9 for a, b in zip(pre, pre[1:]))
        # the click: resistance drops right after the latch
        assert forces[-1] < max(pre)

    def test_insert_misaligned_descent_jams(self):
        # descending with lateral error beyond the clearance: reactive
        # torque appears and the tool makes no depth progress
        spec = make_task("insert", 0)
        env = ContactEnv(spec, CFG)
        err = 0.003
        st = env.world.state
        st.x = st.target_x = spec.target_x + err
        st.y = st.target_y = FIXTURE_HEIGHT + 0.004
        for _ in range(15):
            env.apply(np.array([0.0, -0.0008, 0.0]))
        taus = np.array(env.wrench_true_trace)[:, 2]
        assert np.max(np.abs(taus)) > 0.01
        assert env.scene.max_depth <= 1e-6        # never entered the slot
        assert env.wrench_true_trace[-1][1] > 1.0  # parked on the mouth

    def test_insert_aligned_descent_reaches_depth_without_torque(self):
        spec = make_task("insert", 0)
        env = ContactEnv(spec, CFG)
        st = env.world.state
        st.x = st.target_x = spec.target_x
        st.y = st.target_y = FIXTURE_HEIGHT + 0.004
        for _ in range(40):
            env.apply(np.array([0.0, -0.0008, 0.0]))
        assert env.scene.max_depth >= 0.9 * SLOT_DEPTH
        taus = np.array(env.wrench_true_trace)[:, 2]
        assert np.max(np.abs(taus)) < 1e-9


# ---------------------------------------------------------------------------
# sensing


class TestSensing:
    def test_sigma_zero_reports_ground_truth_exactly(self):
        spec = dataclasses_replace(make_task("stamp", 0), sigma_force=0.0,
                                   sigma_torque=0.0, bias_sigma_force=0.0)
        sensor = WrenchSensor(spec, np.random.default_rng(0))
        from contactflow.sim.physics import Wrench
        w = Wrench(1.25, -3.5, 0.125)
        assert np.array_equal(sensor.sense(w), w.as_array())

    def test_noise_sigma_matches_configuration(self):
        # empirical sigma over 1e5 draws within 2% of the configured value
        spec = dataclasses_replace(make_task("stamp", 0), sigma_force=0.15,
                                   sigma_torque=0.01, bias_sigma_force=0.0)
        sensor = WrenchSensor(spec, np.random.default_rng(123))
        from contactflow.sim.physics import Wrench
        draws = np.stack([sensor.sense(Wrench.zero()) for _ in range(100_000)])
        assert draws[:, 0].std() == pytest.approx(0.15, rel=0.02)
        assert draws[:, 1].std() == pytest.approx(0.15, rel=0.02)
        assert draws[:, 2].std() == pytest.approx(0.01, rel=0.02)
        assert abs(draws.mean(axis=0)).max() < 0.005

    def test_bias_constant_within_episode_varies_across(self):
        spec = make_task("stamp", 0)   # stamp tasks carry sensor bias
        assert spec.bias_sigma_force > 0
        s1 = WrenchSensor(spec, np.random.default_rng(1))
        s2 = WrenchSensor(spec, np.random.default_rng(2))
        assert not np.array_equal(s1.bias, s2.bias)
        assert s1.bias[2] == 0.0   # bias is a force-axis effect

    def test_seeded_sensor_reproducible(self):
        spec = make_task("stamp", 5)
        from contactflow.sim.physics import Wrench
        a = WrenchSensor(spec, np.random.default_rng(9))
        b = WrenchSensor(spec, np.random.default_rng(9))
        for _ in range(50):
            assert np.array_equal(a.sense(Wrench(0, 1, 0)), b.sense(Wrench(0, 1, 0)))


# ---------------------------------------------------------------------------
# rendering


class TestRendering:
    def test_shape_range_dtype(self):
        spec = make_task("stamp", 0)
        img = render_fix(spec, build_scene(spec), 0.0, 0.1)
        assert img.shape == (64, 64, 1) and img.dtype == np.float32
        assert img.min() >= 0.0 and img.max() <= 1.0

    def test_deterministic(self):
        spec = make_task("wipe_plane", 2)
        scene = build_scene(spec)
        a = render_fix(spec, scene, 0.01, 0.05)
        b = render_fix(spec, scene, 0.01, 0.05)
        assert np.array_equal(a, b)

    def test_stamp_thickness_invisible(self):
        # two specs differing only in sheet count render identically
        thin = dataclasses_replace(make_task("stamp", 0), sheets=1)
        thick = dataclasses_replace(make_task("stamp", 0), sheets=50)
        assert np.array_equal(render_fix(thin, None, 0.0, 0.1),
                              render_fix(thick, None, 0.0, 0.1))
        assert np.array_equal(render_arm(thin, None, 0.02, 0.03),
                              render_arm(thick, None, 0.02, 0.03))

    def test_wipe_height_offset_invisible(self):
        lo = dataclasses_replace(make_task("wipe_plane", 0), height_offset=-0.002)
        hi = dataclasses_replace(make_task("wipe_plane", 0), height_offset=0.002)
        assert np.array_equal(render_fix(lo, None, 0.0, 0.1),
                              render_fix(hi, None, 0.0, 0.1))

    def test_tool_position_visible_in_both_views(self):
        spec = make_task("stamp", 0)
        a = render_fix(spec, None, -0.1, 0.1)
        b = render_fix(spec, None, 0.1, 0.1)
        assert not np.array_equal(a, b)
        # the arm view window follows the tool, so the scene content shifts
        c = render_arm(spec, None, spec.target_x - 0.01, 0.05)
        d = render_arm(spec, None, spec.target_x + 0.01, 0.05)
        assert not np.array_equal(c, d)

    def test_press_plunger_displacement_is_visible(self):
        spec = make_task("press", 0)
        scene = build_scene(spec)
        before = render_arm(spec, scene, spec.target_x, 0.05)
        scene.displacement = 0.008
        after = render_arm(spec, scene, spec.target_x, 0.05)
        assert not np.array_equal(before, after)


# ---------------------------------------------------------------------------
# episodes, experts, datasets


class TestEpisodes:
    def test_replay_bit_exact(self):
        for kind in ("stamp", "press", "insert", "wipe_plane", "wipe_curve"):
            a = run_expert(ContactEnv(make_task(kind, 3), CFG))
            b = run_expert(ContactEnv(make_task(kind, 3), CFG))
            for key in ("q", "motion", "wrench_true", "wrench_sensed"):
                assert np.array_equal(a[key], b[key]), f"{kind}/{key} diverged"

    def test_expert_succeeds_across_seeds(self):
        for kind in ("stamp", "press", "insert", "wipe_plane", "wipe_curve"):
            for seed in range(5):
                tr = run_expert(ContactEnv(make_task(kind, seed), CFG))
                assert tr["success"], f"expert failed {kind} seed {seed}"

    def test_stamp_expert_peak_force_band(self):
        for seed in range(10):
            tr = run_expert(ContactEnv(make_task("stamp", seed), CFG))
            peak = np.linalg.norm(tr["wrench_true"][:, :2], axis=1).max()
            assert 9.0 <= peak <= 11.0

    def test_wipe_expert_mean_contact_force_band(self):
        for seed in range(10):
            spec = make_task("wipe_plane", seed)
            tr = run_expert(ContactEnv(spec, CFG))
            fy = tr["wrench_true"][:, 1]
            on_seg = (np.abs(tr["q"][:, 0] - spec.target_x) <= SEGMENT_HALF_LENGTH)
            seg = fy[on_seg & (fy > 0.5)]
            assert 4.5 <= seg.mean() <= 5.5

    def test_success_rejects_zero_motion(self):
        for kind in ("stamp", "press", "insert", "wipe_plane"):
            spec = make_task(kind, 0)
            env = ContactEnv(spec, CFG)
            for _ in range(30):
                env.apply(np.zeros(3))
            assert not env.judge()

    def test_success_requires_correct_location(self):
        # a perfect press executed off-target must not count for stamp
        spec = make_task("stamp", 0)
        q = np.tile([spec.target_x + 0.05, 0.02, 0.0], (20, 1))
        w = np.zeros((20, 3)); w[10, 1] = 10.0
        assert not success(spec, build_scene(spec), q, w)
        q2 = np.tile([spec.target_x, 0.02, 0.0], (20, 1))
        assert success(spec, build_scene(spec), q2, w)

    def test_observation_window_pads_by_repeating_first_frame(self):
        env = ContactEnv(make_task("stamp", 0), CFG)
        w0 = env.observe_window()
        assert len(w0) == CFG.h_o
        assert np.array_equal(w0[0].view_fix, w0[1].view_fix)
        env.apply(np.zeros(3))
        w1 = env.observe_window()
        assert w1[0].q is not w1[1].q

    def test_force_history_is_sensed_not_true(self):
        spec = make_task("stamp", 0)   # noisy, biased sensor
        env = ContactEnv(spec, CFG)
        st = env.world.state
        st.x = st.target_x = spec.target_x
        st.y = st.target_y = spec.stack_top + 0.0005
        for _ in range(12):
            env.apply(np.array([0.0, -0.0004, 0.0]))
        hist = env.observe_window()[-1].f_hist
        true_tail = np.array(env.wrench_true_trace)[-CFG.h_force:]
        sensed_tail = np.array(env.wrench_sensed_trace)[-CFG.h_force:]
        assert np.array_equal(hist, sensed_tail)
        assert not np.allclose(hist, true_tail)

    def test_episode_ends_at_budget(self):
        spec = make_task("stamp", 0)
        env = ContactEnv(spec, CFG)
        for _ in range(spec.episode_len):
            env.apply(np.zeros(3))
        assert not env.running
        with pytest.raises(RuntimeError, match="episode already over"):
            env.apply(np.zeros(3))


class TestDataset:
    def test_episode_roundtrip(self, tmp_path):
        spec = make_task("stamp", 1)
        env = ContactEnv(spec, CFG, record_frames=True)
        traces = run_expert(env)
        save_episode(tmp_path / "ep", spec, traces)
        spec2, loaded = load_episode(tmp_path / "ep")
        assert spec2 == spec
        for name in ("q", "motion", "wrench_true", "wrench_sensed",
                     "view_fix", "view_arm"):
            assert np.allclose(loaded[name], traces[name], atol=1e-6)
            assert loaded[name].dtype == np.dtype("<f4")

    def test_manifest_records_layout(self, tmp_path):
        import json
        manifest = generate_dataset(tmp_path, "stamp", 2, base_seed=0, config=CFG)
        assert manifest["saved"] == 2
        assert manifest["discarded"] == 0
        assert manifest["expert_success_rate"] == 1.0
        assert manifest["control_period_s"] == pytest.approx(1 / 30)
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk["episodes"] == ["ep_00000", "ep_00001"]
        ep = json.loads((tmp_path / "ep_00000" / "manifest.json").read_text())
        assert ep["arrays"]["view_fix"]["shape"][1:] == [64, 64, 1]

    def test_training_set_geometry(self, tmp_path):
        generate_dataset(tmp_path, "stamp", 2, base_seed=0, config=CFG)
        episodes = load_dataset(tmp_path)
        ts = build_training_set(episodes, CFG)
        n = ts.actions.shape[0]
        assert ts.q.shape == (n, CFG.h_o, 3)
        assert ts.f_hist.shape == (n, CFG.h_force, 3)
        assert ts.images.shape == (n, CFG.h_o * CFG.views, 1, 64, 64)
        assert ts.actions.shape == (n, CFG.h_a, CFG.step_dim)
        ts.validate(CFG)

    def test_force_targets_lead_motion_by_one_step(self, tmp_path):
        generate_dataset(tmp_path, "stamp", 1, base_seed=0, config=CFG)
        spec, tr = load_dataset(tmp_path)[0]
        ts = build_training_set([(spec, tr)], CFG)
        # first window starts at step 0: motion rows match the trace and
        # force rows are the sensed wrench shifted by one step
        assert np.allclose(ts.actions[0, :, :3], tr["motion"][:CFG.h_a], atol=1e-6)
        assert np.allclose(ts.actions[0, :, 3:], tr["wrench_sensed"][1:CFG.h_a + 1],
                           atol=1e-6)

    def test_no_force_columns_when_not_predicting(self, tmp_path):
        generate_dataset(tmp_path, "stamp", 1, base_seed=0, config=CFG)
        episodes = load_dataset(tmp_path)
        plain = dataclasses_replace(CFG, predict_force=False)
        ts = build_training_set(episodes, plain)
        assert ts.actions.shape[2] == 3

    def test_dataset_deterministic(self, tmp_path):
        m1 = generate_dataset(tmp_path / "a", "press", 2, base_seed=5, config=CFG)
        m2 = generate_dataset(tmp_path / "b", "press", 2, base_seed=5, config=CFG)
        assert m1["episodes"] == m2["episodes"]
        a = load_dataset(tmp_path / "a")
        b = load_dataset(tmp_path / "b")
        for (_, ta), (_, tb) in zip(a, b):
            assert np.array_equal(ta["q"], tb["q"])
            assert np.array_equal(ta["view_fix"], tb["view_fix"])
