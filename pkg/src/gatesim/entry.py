"""Time-stepped planar simulation of one drone entry into the gate.

World frame: origin at the center of the gate mouth, x along the rail
axis into the port, y lateral.  The tip starts upstream of the timing
plane at x = -0.100 m, flies under a constant drive force along a fixed
heading (speed-capped), and the run ends when it is captured by the
rail, bounces back out of the mouth, stalls in contact, or times out.

Both links move as a single degree of freedom: impacts on either link
torque the shared gate coordinate, a linear spring restores it toward
zero, and hard stops clip it at +/- the taper angle.  Impacts follow the
pivoted-link collision model; persistent contact is handled with
zero-restitution constraint impulses so the tip can slide along a link
while pressing it.  Links are thin two-sided bars with step-to-step
crossing detection, so the tip can strike either face and never tunnels
through.  The guide channel (end width wide, from the link tail ends to
past the rail plane) abstracts a hanging rail: a tip outside it can
rise freely into the slot, but once inside the walls constrain it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .collision import CollisionResponse, ImpactInput, resolve_impact
from .geometry import (EPS_CONTACT, GateSpec, InvalidSpecError, Vec2,
                       build_link_shape, effective_lever_arm)

RAIL_PLANE_X = 0.410      # [m] where the rigid rail begins; crossing = capture
APPROACH_PLANE_X = -0.100  # [m] landing-time start plane
START_X = -0.150          # [m] initial tip position, upstream of both planes
GUIDE_EXTENT_X = 0.450    # [m] end of the modeled guide channel
ESCAPE_Y = 0.30           # [m] lateral bound of the modeled region
STALL_SPEED = 1e-3        # [m/s]
STALL_WINDOW = 0.5        # [s] of continuous low speed in contact
PENETRATION_CAP = 0.003   # [m] deepest crossing still resolved as contact
MIN_IMPACT_SPEED = 1e-6   # [m/s] closing speed below which contact just rests


class NumericalDivergenceError(RuntimeError):
    """Simulation state became non-finite."""


class EntryResult(str, Enum):
    SUCCESS = "success"
    BOUNCE_BACK = "bounce_back"
    STALL = "stall"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class DroneSpec:
    """Drone mass and tip geometry.  Mass figures follow the reference
    airframe (501.8 g all-up with a 180 mm rod)."""

    total_mass: float = 0.5018    # [kg]
    rod_length: float = 0.180     # [m] geometric datum, not used in the planar dynamics
    tip_half_width: float = 0.0   # [m] contact radius of the tip; 0 = mass point
    drive_force: float = 2.0      # [N] constant advance thrust along the heading
    max_speed: float | None = None  # [m/s]; None caps at the scenario approach speed

    def __post_init__(self):
        if self.total_mass <= 0.0:
            raise InvalidSpecError(f"total_mass must be positive, got {self.total_mass}")
        if self.rod_length <= 0.0:
            raise InvalidSpecError(f"rod_length must be positive, got {self.rod_length}")
        if self.tip_half_width < 0.0:
            raise InvalidSpecError("tip_half_width must be >= 0")
        if self.drive_force < 0.0:
            raise InvalidSpecError("drive_force must be >= 0")
        if self.max_speed is not None and self.max_speed <= 0.0:
            raise InvalidSpecError("max_speed must be positive when set")


@dataclass(frozen=True)
class DroneState:
    """Instantaneous planar state of the tip."""

    tip_position: Vec2
    velocity: Vec2
    heading: float   # [rad]
    time: float      # [s]


@dataclass(frozen=True)
class Scenario:
    """One entry trial: gate, drone, and approach conditions.

    lateral_offset is where the undisturbed approach line crosses the
    gate mouth plane (x = 0).
    """

    gate: GateSpec
    drone: DroneSpec
    approach_speed: float          # [m/s]
    approach_angle: float = 0.0    # [rad] heading relative to the rail axis
    lateral_offset: float = 0.0    # [m]
    gate_mode: str = "passive"     # "passive" | "fixed"
    time_step: float = 1e-4        # [s]
    timeout: float = 5.0           # [s]
    record_stride: int = 5         # trajectory sample every N steps; 0 = endpoints only
    strict_paper: bool = False

    def __post_init__(self):
        if self.approach_speed < 0.0:
            raise InvalidSpecError("approach_speed must be >= 0")
        if not (0.0 < self.time_step <= 1e-3):
            raise InvalidSpecError(f"time_step must lie in (0, 1e-3], got {self.time_step}")
        if self.timeout <= 0.0:
            raise InvalidSpecError("timeout must be positive")
        if abs(self.approach_angle) >= math.pi / 2 - 1e-6:
            raise InvalidSpecError("approach_angle must point into the port (|angle| < pi/2)")
        if self.gate_mode not in ("passive", "fixed"):
            raise InvalidSpecError(f"gate_mode must be passive or fixed, got {self.gate_mode}")
        if self.record_stride < 0:
            raise InvalidSpecError("record_stride must be >= 0")


@dataclass(frozen=True)
class CollisionRecord:
    """One recorded impact with its resolved response.

    The impact input is expressed in the frame of the contact point at
    impact time (relative velocity), so the recorded input/response pair
    replays exactly through resolve_impact.  link_frame_y is the
    contact's lateral coordinate in the struck link's pivot frame (None
    for guide wall hits).
    """

    time: float
    position: Vec2               # world frame
    surface: str                 # link_left | link_right | wall_left | wall_right
    link_frame_y: float | None
    impact: ImpactInput
    response: CollisionResponse


@dataclass(frozen=True)
class EntryOutcome:
    """Classified result of one entry trial."""

    result: EntryResult
    landing_time: float | None
    trajectory: tuple[DroneState, ...]
    gate_angle_trace: tuple[float, ...]
    collisions: tuple[CollisionRecord, ...]
    max_gate_deflection: float


def run_entry(scenario: Scenario) -> EntryOutcome:
    """Simulate one entry with the gate mode taken from the scenario."""
    return _simulate(scenario, fixed=scenario.gate_mode == "fixed")


def run_entry_fixed(scenario: Scenario) -> EntryOutcome:
    """Simulate one entry with the gate locked at zero deflection."""
    if scenario.gate_mode != "fixed":
        scenario = replace(scenario, gate_mode="fixed")
    return _simulate(scenario, fixed=True)


def landing_time(outcome: EntryOutcome) -> float | None:
    """Time for the tip to travel between the timing planes.

    Linearly interpolates the recorded trajectory crossings of
    x = -0.100 m and x = 0.410 m; None for anything but a success.
    """
    if outcome.result is not EntryResult.SUCCESS:
        return None
    t_start = _interp_crossing(outcome.trajectory, APPROACH_PLANE_X)
    t_end = _interp_crossing(outcome.trajectory, RAIL_PLANE_X)
    if t_start is None or t_end is None:
        return None
    return t_end - t_start


def _interp_crossing(trajectory, plane_x):
    for a, b in zip(trajectory, trajectory[1:]):
        xa = a.tip_position[0]
        xb = b.tip_position[0]
        if xa < plane_x <= xb:
            frac = (plane_x - xa) / (xb - xa)
            return a.time + frac * (b.time - a.time)
    return None


# Surface ids inside the step loop.
_LINK_RIGHT, _LINK_LEFT, _WALL_RIGHT, _WALL_LEFT = 0, 1, 2, 3
_SURFACE_NAMES = ("link_right", "link_left", "wall_right", "wall_left")


def _simulate(sc: Scenario, fixed: bool) -> EntryOutcome:
    gate = sc.gate
    drone = sc.drone
    link = build_link_shape(gate)
    if gate.taper_run + gate.straight_length >= RAIL_PLANE_X:
        raise InvalidSpecError("link extends past the rail plane; no guide channel left")

    # Canonical segment table: (ax, ay, ux, uy, length, nx, ny, angle).
    # (nx, ny) is the left normal of the travel direction, i.e. the
    # funnel side of the canonical (right) link.
    segs = []
    bps = link.breakpoints
    for i in range(len(bps) - 1):
        ax, ay = bps[i]
        bx, by = bps[i + 1]
        dx, dy = bx - ax, by - ay
        length = math.hypot(dx, dy)
        if length <= 0.0:
            continue
        ux, uy = dx / length, dy / length
        segs.append((ax, ay, ux, uy, length, -uy, ux, math.atan2(dy, dx)))
    link_max_x = max(p[0] for p in bps)
    link_max_y = max(p[1] for p in bps)
    bbox_margin = 0.02

    gx_cog, gy_cog = link.center_of_gravity
    inertia = link.inertia_about_pivot
    e_rest = gate.restitution
    k_spring = gate.restoring_torque_coeff
    c_damp = gate.angular_damping
    half_mouth = 0.5 * gate.entrance_width
    half_rail = 0.5 * gate.end_width
    guide_x0 = gate.taper_run + gate.straight_length
    stop = gate.taper_angle
    tol = EPS_CONTACT + drone.tip_half_width

    m = drone.total_mass
    dt = sc.time_step
    strict = sc.strict_paper
    heading = sc.approach_angle
    cos_h = math.cos(heading)
    sin_h = math.sin(heading)
    cap = drone.max_speed if drone.max_speed is not None else sc.approach_speed
    cap = max(cap, 1e-12)
    cap2 = cap * cap
    accel = drone.drive_force / m
    ax_drive = accel * cos_h
    ay_drive = accel * sin_h

    v0 = min(sc.approach_speed, cap)
    x = START_X
    y = sc.lateral_offset + START_X * math.tan(heading)
    vx = v0 * cos_h
    vy = v0 * sin_h
    phi = 0.0
    phid = 0.0
    t = 0.0

    stride = sc.record_stride
    traj: list[DroneState] = [DroneState((x, y), (vx, vy), heading, t)]
    gate_trace: list[float] = [phi]
    collisions: list[CollisionRecord] = []
    in_contact = [False, False, False, False]
    # Face bookkeeping: for links, which side of the surface the tip was
    # last seen on (+1 = canonical interior); for walls, whether the tip
    # currently counts as inside the guide channel.
    face = [1.0, 1.0,
            1.0 if y + half_rail > 0.0 else -1.0,
            1.0 if half_rail - y > 0.0 else -1.0]
    t_approach = None
    t_rail = None
    stall_acc = 0.0
    max_defl = 0.0
    has_contacted = False
    result = EntryResult.TIMEOUT
    n_steps = int(math.ceil(sc.timeout / dt))

    sqrt = math.sqrt
    cos = math.cos
    sin = math.sin

    for step in range(1, n_steps + 1):
        # Gate free dynamics (symplectic Euler) with hard stops.
        if not fixed:
            phid += dt * (-k_spring * phi - c_damp * phid) / inertia
            phi += dt * phid
            if phi > stop:
                phi = stop
                if phid > 0.0:
                    phid = 0.0
            elif phi < -stop:
                phi = -stop
                if phid < 0.0:
                    phid = 0.0
            a = phi if phi >= 0.0 else -phi
            if a > max_defl:
                max_defl = a

        # Drone: drive force, speed cap, advance.
        vx += ax_drive * dt
        vy += ay_drive * dt
        sp2 = vx * vx + vy * vy
        if sp2 > cap2:
            f = cap / sqrt(sp2)
            vx *= f
            vy *= f
        x_prev = x
        x += vx * dt
        y += vy * dt
        t += dt

        # Contact scan over both links and both guide walls; keep the
        # deepest candidate but remember every touched surface for
        # contact-episode tracking.  Candidate tuple:
        # (signed depth s_d, normal toward the tip's face, contact point
        #  data).  s_d <= tol means touching; s_d < 0 means the tip
        # crossed the surface this step.
        best_sid = -1
        best_sd = tol
        best_data = None
        touched = [False, False, False, False]

        if x > -0.01:
            if fixed:
                cg = 1.0
                sg = 0.0
            else:
                cg = cos(phi)
                sg = sin(phi)
            for sid in (_LINK_RIGHT, _LINK_LEFT):
                if sid == _LINK_RIGHT:
                    lx = x
                    ly = y + half_mouth
                    # local gate angle = +phi: query rotates tip by R(-phi)
                    ca, sa = cg, sg
                else:
                    lx = x
                    ly = half_mouth - y
                    # mirrored link: local gate angle = -phi
                    ca, sa = cg, -sg
                qx = ca * lx + sa * ly
                qy = -sa * lx + ca * ly
                if (qx < -bbox_margin or qx > link_max_x + bbox_margin
                        or qy < -bbox_margin or qy > link_max_y + bbox_margin):
                    continue
                b_d2 = math.inf
                b_px = b_py = b_ang = 0.0
                b_nx = b_ny = 0.0
                for (sax, say, sux, suy, slen, snx, sny, sang) in segs:
                    ddx = qx - sax
                    ddy = qy - say
                    tp = ddx * sux + ddy * suy
                    if tp < 0.0:
                        tp = 0.0
                    elif tp > slen:
                        tp = slen
                    px = sax + tp * sux
                    py = say + tp * suy
                    rx = qx - px
                    ry = qy - py
                    d2 = rx * rx + ry * ry
                    if d2 < b_d2:
                        b_d2 = d2
                        b_px, b_py = px, py
                        b_nx, b_ny = snx, sny
                        b_ang = sang
                dist = sqrt(b_d2)
                rx = qx - b_px
                ry = qy - b_py
                side_now = 1.0 if rx * b_nx + ry * b_ny >= 0.0 else -1.0
                if dist <= tol:
                    touched[sid] = True
                    if dist < best_sd:
                        if dist > 1e-12:
                            ncx, ncy = rx / dist, ry / dist
                        else:
                            fs = face[sid]
                            ncx, ncy = fs * b_nx, fs * b_ny
                        best_sd = dist
                        best_sid = sid
                        best_data = (ncx, ncy, b_px, b_py, b_ang, ca, sa)
                elif side_now != face[sid] and dist < PENETRATION_CAP:
                    # Crossed the surface since the last step: resolve as a
                    # penetrated contact on the face it came from.
                    touched[sid] = True
                    sd = -dist
                    if sd < best_sd:
                        fs = face[sid]
                        best_sd = sd
                        best_sid = sid
                        best_data = (fs * b_nx, fs * b_ny, b_px, b_py, b_ang, ca, sa)
                else:
                    face[sid] = side_now

        # Guide walls model a hanging rail: a tip outside the channel may
        # rise freely into it, but a tip inside is constrained.  face[sid]
        # tracks whether the tip currently counts as inside (+1).
        if guide_x0 <= x <= GUIDE_EXTENT_X:
            for sid, wy, int_sign in ((_WALL_RIGHT, -half_rail, 1.0),
                                      (_WALL_LEFT, half_rail, -1.0)):
                s_int = (y - wy) * int_sign
                if face[sid] > 0.0:
                    if s_int <= tol:
                        if s_int > -PENETRATION_CAP:
                            touched[sid] = True
                            if s_int < best_sd:
                                best_sd = s_int
                                best_sid = sid
                                best_data = None
                        else:
                            face[sid] = -1.0
                elif s_int > 0.0:
                    face[sid] = 1.0

        if best_sid >= 0:
            has_contacted = True
            if best_sid >= _WALL_RIGHT:
                nwx = 0.0
                nwy = 1.0 if best_sid == _WALL_RIGHT else -1.0
                world_cx = x
                world_cy = -half_rail if best_sid == _WALL_RIGHT else half_rail
                arm = 0.0
                sigma = 1.0
                wall = True
                th2_eff = 0.0
                link_y = None
            else:
                ncx, ncy, cpx, cpy, cang, ca, sa = best_data
                # Canonical direction -> world: rotate by the local gate
                # angle, then mirror y for the left link.
                wnx = ca * ncx - sa * ncy
                wny = sa * ncx + ca * ncy
                wcx = ca * cpx - sa * cpy
                wcy = sa * cpx + ca * cpy
                if best_sid == _LINK_RIGHT:
                    nwx, nwy = wnx, wny
                    world_cx = wcx
                    world_cy = wcy - half_mouth
                    r_wx, r_wy = wcx, wcy
                    ga_local = phi
                else:
                    nwx, nwy = wnx, -wny
                    world_cx = wcx
                    world_cy = half_mouth - wcy
                    r_wx, r_wy = wcx, -wcy
                    ga_local = -phi
                arm = effective_lever_arm((gx_cog, gy_cog), (cpx, cpy))
                if arm < 0.0:
                    arm = 0.0
                h_w = r_wx * nwy - r_wy * nwx
                sigma = 1.0 if h_w >= 0.0 else -1.0
                wall = False
                th2_eff = cang + ga_local
                link_y = cpy

            w_n = 0.0 if (wall or fixed) else phid * sigma * arm
            gdot = vx * nwx + vy * nwy - w_n
            if gdot < -MIN_IMPACT_SPEED:
                closing = -gdot
                was_in = in_contact[best_sid]
                e_use = 0.0 if was_in else e_rest
                if wall or fixed:
                    eff_inf = True
                else:
                    push = -sigma   # sign of the gate's angular velocity change
                    eff_inf = ((phi >= stop and push > 0.0)
                               or (phi <= -stop and push < 0.0))
                if eff_inf:
                    j = m * (1.0 + e_use) * closing
                else:
                    arm_term = arm if strict else arm * arm
                    j = (1.0 + e_use) * closing * m * inertia / (inertia + m * arm_term)
                if not was_in and closing > 1e-6:
                    # Record the impact in the contact point's frame so the
                    # stored input/response pair replays exactly.
                    vrx = vx - w_n * nwx
                    vry = vy - w_n * nwy
                    if wall:
                        v_t = vrx
                    else:
                        # World tangent of the contacted face, toward the rail.
                        ttx = cos(th2_eff)
                        tty = sin(th2_eff) if best_sid == _LINK_RIGHT else -sin(th2_eff)
                        v_t = vrx * ttx + vry * tty
                    v0r = math.hypot(closing, v_t)
                    th1_eff = math.atan2(closing, v_t) - th2_eff
                    rec_inertia = math.inf if eff_inf else inertia
                    impact = ImpactInput(drone_mass=m, speed_before=v0r,
                                         approach_angle=th1_eff,
                                         opening_angle=th2_eff,
                                         gate_inertia=rec_inertia,
                                         restitution=e_use,
                                         lever_arm=arm)
                    response = resolve_impact(impact, strict)
                    collisions.append(CollisionRecord(
                        time=t, position=(world_cx, world_cy),
                        surface=_SURFACE_NAMES[best_sid],
                        link_frame_y=link_y, impact=impact, response=response))
                vx += j / m * nwx
                vy += j / m * nwy
                if not eff_inf:
                    phid -= j * sigma * arm / inertia

            # Positional correction: project a crossed tip back onto the
            # face it came from.
            if best_sd < 0.0:
                x -= best_sd * nwx
                y -= best_sd * nwy

        in_contact[0] = touched[0]
        in_contact[1] = touched[1]
        in_contact[2] = touched[2]
        in_contact[3] = touched[3]

        # Stall: continuous low speed while touching something.
        if (touched[0] or touched[1] or touched[2] or touched[3]) and \
                vx * vx + vy * vy < STALL_SPEED * STALL_SPEED:
            stall_acc += dt
            if stall_acc >= STALL_WINDOW:
                result = EntryResult.STALL
                break
        else:
            stall_acc = 0.0

        # Plane crossings and classification.
        if t_approach is None and x_prev < APPROACH_PLANE_X <= x:
            frac = (APPROACH_PLANE_X - x_prev) / (x - x_prev)
            t_approach = t - dt + frac * dt
        if x_prev < RAIL_PLANE_X <= x:
            frac = (RAIL_PLANE_X - x_prev) / (x - x_prev)
            y_hit = y - vy * dt * (1.0 - frac)
            if abs(y_hit) <= half_rail:
                t_rail = t - dt + frac * dt
                result = EntryResult.SUCCESS
                break
        if x <= 0.0 and vx < 0.0 and has_contacted:
            result = EntryResult.BOUNCE_BACK
            break
        if x > GUIDE_EXTENT_X or (y if y >= 0.0 else -y) > ESCAPE_Y:
            # Left the modeled region without capture; cannot succeed.
            result = EntryResult.TIMEOUT
            break

        if not math.isfinite(x + y + vx + vy + phi + phid):
            raise NumericalDivergenceError(
                f"non-finite state at t={t:.6f}: x={x} y={y} vx={vx} vy={vy} "
                f"phi={phi} phid={phid}")

        if stride and step % stride == 0:
            traj.append(DroneState((x, y), (vx, vy), heading, t))
            gate_trace.append(phi)

    traj.append(DroneState((x, y), (vx, vy), heading, t))
    gate_trace.append(phi)

    landing = None
    if result is EntryResult.SUCCESS and t_approach is not None and t_rail is not None:
        landing = t_rail - t_approach

    return EntryOutcome(result=result,
                        landing_time=landing,
                        trajectory=tuple(traj),
                        gate_angle_trace=tuple(gate_trace),
                        collisions=tuple(collisions),
                        max_gate_deflection=max_defl)
