"""Vision finds the target; force takes over on arrival.

A noisy pointing model picks the target pixel in an overhead camera, the
pixel deprojects to a bench waypoint, and a two-state controller walks the
tool there. The moment the pose is within epsilon of the waypoint -- a
purely positional trigger -- control hands over to the interaction policy
(here a scripted expert, to keep the demo self-contained).

Run:  python3 demos/vision_handover.py
"""

import numpy as np

from contactflow.evalsuite.runner import HOVER_OFFSET, target_surface_y
from contactflow.policy.config import desk_profile
from contactflow.sim.env import ContactEnv
from contactflow.sim.expert import run_expert
from contactflow.sim.tasks import make_task
from contactflow.v2f.camera import workspace_camera
from contactflow.v2f.handover import Handover, HandoverConfig, HandoverState
from contactflow.v2f.pointing import point_at_target


def main():
    rng = np.random.default_rng(7)
    spec = make_task("stamp", seed=11, spatial_shift=True)
    env = ContactEnv(spec, desk_profile())
    print(f"target sits at x = {spec.target_x * 1000:+.1f} mm; "
          f"tool starts at x = {spec.start_x * 1000:+.1f} mm "
          f"(outside anything the policy trained on)")

    camera = workspace_camera()
    target = np.array([spec.target_x, target_surface_y(spec), 0.0])
    hit = point_at_target(camera, target, rng)
    _, _, depth = camera.project(target)
    world_pt = camera.deproject(hit.u, hit.v, depth)
    err_mm = abs(world_pt[0] - spec.target_x) * 1000
    print(f"pointing picked pixel ({hit.u:.1f}, {hit.v:.1f}) -> "
          f"bench x = {world_pt[0] * 1000:+.1f} mm (error {err_mm:.1f} mm)")

    waypoint = np.array([world_pt[0], world_pt[1] + HOVER_OFFSET])
    handover = Handover(waypoint, HandoverConfig())
    while env.running and handover.state is HandoverState.APPROACH:
        pose = np.array([env.world.state.x, env.world.state.y])
        env.apply(handover.plan(pose))
        handover.tick(np.array([env.world.state.x, env.world.state.y]))

    print(f"approach took {handover.steps} steps; "
          f"state is now {handover.state.value}")
    if handover.state is HandoverState.INTERACTION:
        traces = run_expert(env)
        handover.finish(bool(traces["success"]))
    arrows = " -> ".join([handover.transitions[0][0].value]
                         + [b.value for _, b in handover.transitions])
    print(f"episode finished: {handover.state.value} (path: {arrows})")


if __name__ == "__main__":
    main()
