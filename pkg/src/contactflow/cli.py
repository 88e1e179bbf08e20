"""Command-line front end.

Five commands cover the full experiment loop:

    gen-data   scripted-expert demonstrations -> episode dataset
    train      dataset -> policy checkpoint (+ loss log CSV)
    eval       checkpoint -> seeded trial suite with success/force reports
    ablate     dataset -> table comparing conditioning variants
    rollout    checkpoint -> one debug episode, predicted vs measured force

Contract:

* Exit codes are stable: 0 success, 1 usage or config error, 2 runtime
  failure. (argparse's default exit code of 2 for bad flags is remapped
  to 1 so that 2 always means "the run itself broke".)
* Every command takes ``--config`` (YAML, see `runconfig`) plus flags that
  override individual file values; defaults apply when both are absent.
* Every command writes into ``--out``: a snapshot of the fully resolved
  config, a ``run.json`` with the seeds that drove it and a SHA-256
  content hash of any checkpoint it read or wrote, and its own artifacts.
  Given the same config file, flags, and seeds, the artifacts are
  byte-identical across re-runs; nothing in them depends on wall-clock
  time.
* Config problems (bad dimensions, unknown tasks, missing inputs) are
  rejected before anything is written.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .evalsuite.ablation import train_variant
from .evalsuite.reports import write_plot_data, write_trials_csv
from .evalsuite.runner import ensure_sim_compatible, run_suite
from .flow import SamplerConfig
from .policy.executor import ChunkExecutor
from .policy.policy import FlowPolicy
from .runconfig import RunConfig, dump_config, load_config
from .sim.dataset import build_training_set, generate_dataset, load_dataset
from .sim.env import ContactEnv
from .sim.tasks import make_task

__all__ = ["main", "entry", "UsageError"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    """Bad flags, bad config, or missing inputs - nothing was run."""


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        raise UsageError(message)


# ----------------------------------------------------------------------
# shared plumbing

def _load_config(args, overrides: dict) -> RunConfig:
    path = getattr(args, "config", None)
    if path is not None and not Path(path).is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        return load_config(path, overrides)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc


def _common_overrides(args) -> dict:
    """Map generic flags onto dotted config keys (None = keep file value)."""
    overrides = {}
    if getattr(args, "task", None) is not None:
        overrides["task.kind"] = args.task
    if getattr(args, "profile", None) is not None:
        overrides["profile"] = args.profile
    if getattr(args, "ode_steps", None) is not None:
        overrides["sampler.ode_steps_count"] = args.ode_steps
    if getattr(args, "trials", None) is not None:
        overrides["trials.count"] = args.trials
    if getattr(args, "v2f", None) is not None:
        overrides["v2f.enabled"] = args.v2f == "on"
    if getattr(args, "ood", None) is not None:
        overrides["ood.mode"] = args.ood
    if getattr(args, "material_factor", None) is not None:
        overrides["ood.material_factor"] = args.material_factor
    return overrides


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {p}")
    return p


def _write_run_record(out_dir: Path, config: RunConfig, command: str,
                      seeds: dict, extra: dict | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    dump_config(config, out_dir / "config_snapshot.yaml")
    record = {"command": command, "seeds": seeds}
    record.update(extra or {})
    (out_dir / "run.json").write_text(json.dumps(record, indent=1, sort_keys=True))


def _load_checkpoint(path) -> FlowPolicy:
    ckpt = _require_file(path, "checkpoint")
    try:
        policy = FlowPolicy.load(ckpt)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"cannot load checkpoint {ckpt}: {exc}") from exc
    try:
        ensure_sim_compatible(policy.config)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return policy


def _ood_settings(config: RunConfig) -> dict:
    return {
        "spatial_shift": config.ood_mode == "spatial",
        "material_factor": (config.material_factor
                            if config.ood_mode == "material" else 1.0),
    }


# ----------------------------------------------------------------------
# commands

def cmd_gen_data(args) -> int:
    config = _load_config(args, _common_overrides(args))
    out_dir = Path(args.out)
    if args.count < 0:
        raise UsageError("--count must be nonnegative")
    manifest = generate_dataset(out_dir, config.task_kind, args.count,
                                args.seed, config.policy_config())
    _write_run_record(out_dir, config, "gen-data",
                      seeds={"dataset_base_seed": args.seed},
                      extra={"dataset_manifest": "manifest.json"})
    print(f"task={config.task_kind} requested={manifest['requested']} "
          f"saved={manifest['saved']} discarded={manifest['discarded']} "
          f"expert_success_rate={manifest['expert_success_rate']:.3f}")
    if args.count == 0:
        print("warning: count is 0, wrote an empty dataset", file=sys.stderr)
        return EXIT_OK
    if manifest["discarded"] > 0 or manifest["saved"] < args.count:
        print(f"error: scripted expert failed on "
              f"{manifest['discarded']} in-distribution episode(s); "
              f"success rate {manifest['expert_success_rate']:.3f} "
              f"(see {out_dir / 'manifest.json'})", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_train(args) -> int:
    overrides = _common_overrides(args)
    if args.steps is not None:
        overrides["optimizer.steps_count"] = args.steps
    if args.seed is not None:
        overrides["optimizer.seed"] = args.seed
    config = _load_config(args, overrides)

    data_dir = Path(args.data)
    _require_file(data_dir / "manifest.json", "dataset manifest")
    if args.resume is not None:
        policy = _load_checkpoint(args.resume)
    else:
        policy = FlowPolicy(config.policy_config(), seed=config.optimizer.seed)

    episodes = load_dataset(data_dir)
    if not episodes:
        raise UsageError(f"dataset at {data_dir} contains no episodes")
    data = build_training_set(episodes, policy.config)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    start_step = policy.train_step
    result = policy.train(data, config.optimizer)

    with open(out_dir / "loss_log.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss"])
        for local_step, loss in result.loss_log:
            writer.writerow([start_step + local_step, f"{loss:.8f}"])
    ckpt_path = out_dir / "checkpoint.ckpt"
    policy.save(ckpt_path)
    _write_run_record(out_dir, config, "train",
                      seeds={"optimizer_seed": config.optimizer.seed,
                             "model_init_seed": policy.init_seed},
                      extra={"checkpoint": ckpt_path.name,
                             "checkpoint_sha256": _sha256(ckpt_path),
                             "resumed_from_step": start_step,
                             "final_step": policy.train_step,
                             "final_loss": result.final_loss})
    print(f"trained {result.steps} steps (counter {start_step} -> "
          f"{policy.train_step}), final loss {result.final_loss:.5f}")
    print(f"checkpoint: {ckpt_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    overrides = _common_overrides(args)
    if args.seed is not None:
        overrides["trials.base_seed"] = args.seed
    config = _load_config(args, overrides)
    policy = _load_checkpoint(args.checkpoint)
    if config.trials_count < 1:
        raise UsageError("eval needs trials.count >= 1")

    reports = run_suite(
        policy, config.task_kind, config.trials_count, config.trials_base_seed,
        sampler=config.sampler_config(), use_v2f=config.v2f_enabled,
        handover_config=config.handover_config(), **_ood_settings(config),
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    agg = write_trials_csv(out_dir / "trials.csv", reports)
    write_plot_data(out_dir / "force_traces.csv", reports)
    _write_run_record(out_dir, config, "eval",
                      seeds={"trials_base_seed": config.trials_base_seed},
                      extra={"checkpoint_sha256": _sha256(args.checkpoint),
                             "aggregate": agg})
    cost = agg["force_cost"]
    print(f"task={agg['task']} trials={agg['n_trials']} "
          f"ood={config.ood_mode} v2f={'on' if config.v2f_enabled else 'off'}")
    print(f"success_rate={agg['success_rate']:.3f} "
          f"force_cost={'nan' if cost != cost else f'{cost:.3f}'} "
          f"no_contact={agg['n_no_contact']}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    overrides = _common_overrides(args)
    if args.seed is not None:
        overrides["trials.base_seed"] = args.seed
    if args.steps is not None:
        overrides["optimizer.steps_count"] = args.steps
    if args.variants is not None:
        overrides["ablation.variants"] = [v.strip() for v in
                                          args.variants.split(",") if v.strip()]
    config = _load_config(args, overrides)
    if not config.ablation_variants:
        raise UsageError("no ablation variants selected")
    if config.trials_count < 1:
        raise UsageError("ablate needs trials.count >= 1")
    data_dir = Path(args.data)
    _require_file(data_dir / "manifest.json", "dataset manifest")
    episodes = load_dataset(data_dir)
    if not episodes:
        raise UsageError(f"dataset at {data_dir} contains no episodes")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_config = config.policy_config()
    ensure_sim_compatible(base_config)
    rows, hashes = [], {}
    for name in config.ablation_variants:
        policy = train_variant(episodes, base_config, name, config.optimizer)
        ckpt = out_dir / f"{name}.ckpt"
        policy.save(ckpt)
        hashes[name] = _sha256(ckpt)
        reports = run_suite(policy, config.task_kind, config.trials_count,
                            config.trials_base_seed,
                            sampler=config.sampler_config())
        agg = write_trials_csv(out_dir / f"{name}_trials.csv", reports)
        rows.append((name, agg["n_trials"], agg["success_rate"],
                     agg["force_cost"]))

    with open(out_dir / "ablation.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "n_trials", "success_rate", "force_cost"])
        for name, n, sr, cost in rows:
            writer.writerow([name, n, f"{sr:.4f}",
                             "nan" if cost != cost else f"{cost:.4f}"])
    _write_run_record(out_dir, config, "ablate",
                      seeds={"optimizer_seed": config.optimizer.seed,
                             "trials_base_seed": config.trials_base_seed},
                      extra={"checkpoint_sha256": hashes})
    print(f"{'variant':<24} {'n':>4} {'success_rate':>13} {'force_cost':>11}")
    for name, n, sr, cost in rows:
        cost_s = "nan" if cost != cost else f"{cost:.3f}"
        print(f"{name:<24} {n:>4} {sr:>13.3f} {cost_s:>11}")
    return EXIT_OK


def cmd_rollout(args) -> int:
    overrides = _common_overrides(args)
    if args.seed is not None:
        overrides["trials.base_seed"] = args.seed
    config = _load_config(args, overrides)
    policy = _load_checkpoint(args.checkpoint)

    seed = config.trials_base_seed
    ood = _ood_settings(config)
    spec = make_task(config.task_kind, seed, **ood)
    env = ContactEnv(spec, policy.config)
    executor = ChunkExecutor(policy, sampler=config.sampler_config(), seed=seed)

    handover_state = "none"
    approach_steps = 0
    log = None
    if config.v2f_enabled:
        # Mirror the evaluation runner's handover sequence, but keep the
        # executor's per-step prediction log for the dump below.
        from .evalsuite.runner import HOVER_OFFSET, target_surface_y
        from .v2f.camera import workspace_camera
        from .v2f.handover import Handover, HandoverState
        from .v2f.pointing import point_at_target

        camera = workspace_camera()
        rng = np.random.default_rng(np.random.SeedSequence([0x0F0C, seed]))
        target = np.array([spec.target_x, target_surface_y(spec), 0.0])
        res = point_at_target(camera, target, rng)
        _, _, depth_gt = camera.project(target)
        hit = camera.deproject(res.u, res.v, depth_gt)
        waypoint = np.array([hit[0], hit[1] + HOVER_OFFSET])
        h = Handover(waypoint, config.handover_config())
        while env.running and h.state is HandoverState.APPROACH:
            pose = np.array([env.world.state.x, env.world.state.y])
            env.apply(h.plan(pose))
            h.tick(np.array([env.world.state.x, env.world.state.y]))
            approach_steps += 1
        if h.state is HandoverState.INTERACTION:
            log = executor.run(env)
        h.finish(env.judge())
        handover_state = h.state.value
    else:
        log = executor.run(env)

    traces = env.traces()
    success = env.judge()
    if config.v2f_enabled and handover_state != "succeeded":
        success = False

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    q = traces["q"]
    motion = traces["motion"]
    sensed = traces["wrench_sensed"]
    true = traces["wrench_true"]
    preds = _rollout_predictions(env.step_count, approach_steps, log)
    with open(out_dir / "rollout.csv", "w", newline="") as fh:
        fh.write("# force prediction rows target the wrench measured on the"
                 " next control step; approach-phase rows have no prediction\n")
        writer = csv.writer(fh)
        writer.writerow([
            "step", "pose_x_m", "pose_y_m", "grip",
            "dx_m", "dy_m", "dgrip",
            "f_pred_x_n", "f_pred_y_n", "tau_pred_nm",
            "f_meas_x_n", "f_meas_y_n", "tau_meas_nm",
            "f_true_x_n", "f_true_y_n", "tau_true_nm",
        ])
        for t in range(env.step_count):
            row = [t, f"{q[t, 0]:.6f}", f"{q[t, 1]:.6f}", f"{q[t, 2]:.4f}",
                   f"{motion[t, 0]:.6f}", f"{motion[t, 1]:.6f}",
                   f"{motion[t, 2]:.4f}"]
            row += [f"{v:.4f}" if v == v else "nan" for v in preds[t]]
            row += [f"{v:.4f}" for v in sensed[t]]
            row += [f"{v:.4f}" for v in true[t]]
            writer.writerow(row)
    _write_run_record(out_dir, config, "rollout",
                      seeds={"episode_seed": seed},
                      extra={"checkpoint_sha256": _sha256(args.checkpoint),
                             "success": bool(success),
                             "handover": handover_state,
                             "steps": env.step_count})
    print(f"task={config.task_kind} seed={seed} steps={env.step_count} "
          f"success={success} handover={handover_state}")
    print(f"dump: {out_dir / 'rollout.csv'}")
    return EXIT_OK


def _rollout_predictions(total_steps: int, approach_steps: int,
                         log) -> np.ndarray:
    """Per-step predicted wrench rows, NaN where no prediction exists.

    The executor logs one prediction per step it executed; those steps start
    after any approach phase. A policy trained without a force head yields
    zero-width rows, which leave the whole column NaN.
    """
    preds = np.full((total_steps, 3), np.nan)
    if log is not None and log.force_preds:
        arr = np.asarray(log.force_preds)
        if arr.ndim == 2 and arr.shape[1] == 3:
            stop = min(total_steps, approach_steps + len(arr))
            preds[approach_steps:stop] = arr[: stop - approach_steps]
    return preds


# ----------------------------------------------------------------------
# parser

def build_parser() -> _Parser:
    parser = _Parser(prog="contactflow",
                     description="Flow-matching contact manipulation toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_common(p, *, task=True):
        p.add_argument("--config", metavar="FILE",
                       help="YAML run config; defaults apply if omitted")
        if task:
            p.add_argument("--task", metavar="KIND",
                           help="task kind override (stamp, press, insert, "
                                "wipe_plane, wipe_curve)")
        p.add_argument("--profile", choices=("desk", "paper"),
                       help="network size profile override")

    p = sub.add_parser("gen-data", parents=[], help="generate expert demonstrations")
    add_common(p)
    p.add_argument("--out", required=True, metavar="DIR", help="dataset directory")
    p.add_argument("--count", type=int, default=40,
                   help="number of successful episodes to save (default 40)")
    p.add_argument("--seed", type=int, default=0,
                   help="base seed for task sampling (default 0)")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a policy on a dataset")
    add_common(p)
    p.add_argument("--data", required=True, metavar="DIR", help="dataset directory")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.add_argument("--resume", metavar="CKPT",
                   help="continue training from this checkpoint")
    p.add_argument("--steps", type=int, help="optimizer steps override")
    p.add_argument("--seed", type=int, help="optimizer seed override")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run a seeded trial suite")
    add_common(p)
    p.add_argument("--checkpoint", required=True, metavar="CKPT")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.add_argument("--trials", type=int, help="number of trials (default 20)")
    p.add_argument("--seed", type=int, help="base seed for trials")
    p.add_argument("--ood", choices=("material", "spatial", "none"),
                   help="out-of-distribution mode (default none)")
    p.add_argument("--v2f", choices=("on", "off"),
                   help="vision-to-force handover for approach (default off)")
    p.add_argument("--ode-steps", type=int, help="sampler integration steps")
    p.add_argument("--material-factor", type=float,
                   help="stiffness/friction scale for --ood material")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate",
                       help="train and evaluate conditioning variants")
    add_common(p)
    p.add_argument("--data", required=True, metavar="DIR", help="dataset directory")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.add_argument("--variants", metavar="LIST",
                   help="comma-separated variant names (default: all four)")
    p.add_argument("--trials", type=int, help="trials per variant (default 20)")
    p.add_argument("--steps", type=int, help="optimizer steps override")
    p.add_argument("--seed", type=int, help="base seed for trials")
    p.add_argument("--ode-steps", type=int, help="sampler integration steps")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("rollout",
                       help="dump one episode with per-step predicted vs "
                            "measured force")
    add_common(p)
    p.add_argument("--checkpoint", required=True, metavar="CKPT")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.add_argument("--seed", type=int, help="episode seed")
    p.add_argument("--ood", choices=("material", "spatial", "none"),
                   help="out-of-distribution mode (default none)")
    p.add_argument("--v2f", choices=("on", "off"),
                   help="vision-to-force handover for approach (default off)")
    p.add_argument("--ode-steps", type=int, help="sampler integration steps")
    p.set_defaults(func=cmd_rollout)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
