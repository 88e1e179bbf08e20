"""The whole loop in miniature: demonstrate, train, act.

Generates a handful of scripted stamp demonstrations, trains the policy
briefly (far too briefly to master the task -- this demo shows the
plumbing, not performance), then rolls the policy out once and prints its
predicted wrench against what the force sensor measured.

Run:  python3 demos/train_and_roll.py        (about two minutes)
"""

import numpy as np

from contactflow.flow import SamplerConfig
from contactflow.policy import ChunkExecutor, FlowPolicy, TrainConfig, desk_profile
from contactflow.sim.dataset import build_training_set, generate_dataset, load_dataset
from contactflow.sim.env import ContactEnv
from contactflow.sim.tasks import make_task
import tempfile


def main():
    config = desk_profile()
    with tempfile.TemporaryDirectory() as tmp:
        print("1. scripted expert records 10 stamp episodes...")
        manifest = generate_dataset(tmp, "stamp", count=10, base_seed=0,
                                    config=config)
        print(f"   saved {manifest['saved']}, expert success rate "
              f"{manifest['expert_success_rate']:.0%}")

        episodes = load_dataset(tmp)
        data = build_training_set(episodes, config)
        print(f"2. {len(data)} training chunks of {config.h_a} steps "
              f"({config.step_dim} dims: {config.d_p} motion + "
              f"{config.d_f} predicted wrench)")

        policy = FlowPolicy(config, seed=0)
        tc = TrainConfig(steps=600, batch_size=32, lr=3e-4, log_every=200)
        print(f"3. training {tc.steps} steps...")
        result = policy.train(data, tc)
        for step, loss in result.loss_log:
            print(f"   step {step:4d}  loss {loss:.4f}")

    print("4. rollout on a fresh task...")
    spec = make_task("stamp", seed=101)
    env = ContactEnv(spec, config)
    executor = ChunkExecutor(policy, SamplerConfig(steps=10), seed=101)
    log = executor.run(env)
    traces = env.traces()
    print(f"   episode ran {env.step_count} steps, success={env.judge()}")

    print("   predicted vs sensed vs true |force| around first contact")
    print("   (the sensor carries a per-episode tare bias; the history-aware")
    print("   policy must see through it, which is the point of the design):")
    sensed = np.linalg.norm(traces["wrench_sensed"][:, :2], axis=1)
    true = np.linalg.norm(traces["wrench_true"][:, :2], axis=1)
    first = int(np.argmax(true > 0.5)) if (true > 0.5).any() else 20
    pred = np.asarray(log.force_preds)
    for t in range(max(0, first - 2), min(env.step_count, first + 6)):
        p = np.linalg.norm(pred[t][:2]) if t < len(pred) else float("nan")
        print(f"   step {t:3d}: predicted {p:6.2f} N   sensed {sensed[t]:6.2f} N"
              f"   true {true[t]:6.2f} N")


if __name__ == "__main__":
    main()
