"""Run each task's scripted expert once and report what it felt.

The experts are the data source for imitation: phase machines that read
the true contact force (a privilege the learned policy never gets) and
drive the tool through home -> approach -> work -> retract.

Run:  python3 demos/scripted_experts.py
"""

import numpy as np

from contactflow.evalsuite.metrics import force_statistic, statistic_mode
from contactflow.policy.config import desk_profile
from contactflow.sim.env import ContactEnv
from contactflow.sim.expert import run_expert
from contactflow.sim.tasks import TASK_KINDS, make_task


def main():
    config = desk_profile()
    print(f"{'task':<12} {'success':>8} {'steps':>6} {'statistic':>10}  notes")
    for kind in TASK_KINDS:
        spec = make_task(kind, seed=3)
        env = ContactEnv(spec, config)
        traces = run_expert(env)
        stat = force_statistic(traces["wrench_true"], statistic_mode(kind))
        mode = statistic_mode(kind)
        peak = np.linalg.norm(traces["wrench_true"][:, :2], axis=1).max()
        print(f"{kind:<12} {str(traces['success']):>8} "
              f"{len(traces['motion']):>6} {stat.value:>10.2f}  "
              f"({mode} of |f|, overall peak {peak:.1f} N)")


if __name__ == "__main__":
    main()
