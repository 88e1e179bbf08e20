"""The contact model, checked against hand arithmetic.

A position-servoed tool presses into a springy surface. At rest the normal
force is exactly stiffness x penetration, and the servo settles where the
commanded depth splits between actuator spring and surface spring:
pen = kp * depth / (kp + k_s). Sliding sideways under load shows the
Coulomb cap |F_t| <= mu * F_n.

Run:  python3 demos/contact_physics.py
"""

import numpy as np

from contactflow.sim.physics import PhysParams, SurfaceMaterial, World


class FlatTable:
    """Minimal scene: a rigid plane at y = 0 with one material."""

    def __init__(self, material):
        self.material = material

    def height(self, x):
        return 0.0

    def contact(self, state, dt):
        from contactflow.sim.physics import Wrench, friction_force, normal_force
        pen = -state.y
        pen_rate = -state.vy
        f_n = normal_force(self.material, pen, pen_rate)
        f_t = friction_force(self.material, f_n, state.vx)
        return Wrench(fx=f_t, fy=f_n, tau=0.0)


def main():
    mat = SurfaceMaterial(stiffness=2000.0, damping=15.0, friction=0.4)
    params = PhysParams()
    world = World(FlatTable(mat), params, start=(0.0, 0.02))

    print("descend 0.5 mm per control step until contact, then hold...")
    wrench = None
    for step in range(120):
        dp = np.array([0.0, -0.0005, 0.0]) if step < 50 else np.zeros(3)
        wrench = world.control_step(dp)

    commanded_depth = 0.02 - 50 * 0.0005  # target ends below the surface
    target_y = world.state.target_y
    pen = -world.state.y
    expected_pen = params.servo_kp * (-target_y) / (params.servo_kp + mat.stiffness)
    print(f"commanded tool target y = {target_y * 1000:+.2f} mm")
    print(f"settled penetration      = {pen * 1000:.4f} mm")
    print(f"servo/spring split says  = {expected_pen * 1000:.4f} mm")
    print(f"measured normal force    = {wrench.fy:.3f} N")
    print(f"stiffness x penetration  = {mat.stiffness * pen:.3f} N")

    print("\nthe Coulomb law at the substep level:")
    from contactflow.sim.physics import friction_force
    for vx in (0.05, -0.05, 0.0):
        f_t = friction_force(mat, wrench.fy, vx)
        print(f"  sliding at vx={vx:+.2f} m/s under {wrench.fy:.1f} N -> "
              f"F_t = {f_t:+.3f} N (cap mu*F_n = {mat.friction * wrench.fy:.3f})")
    print("(at the 30 Hz sensor tap, lateral friction under the stiff servo"
          "\n averages near zero: the substep velocity rings around the"
          "\n setpoint, so the opposing force alternates sign with it)")


if __name__ == "__main__":
    main()
