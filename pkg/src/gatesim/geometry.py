"""Gate geometry: link shapes, inertia, lever arms, and contact queries.

The gate is a pair of mirror-image links pivoting at the two entrance
corners.  Each link is described once, in a canonical pivot frame whose
origin is the pivot, whose y axis points toward the opposite pivot, and
whose x axis points toward the rail.  All quantities here are SI.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields

Vec2 = tuple[float, float]

EPS_GEOM = 1e-9      # [m] degeneracy threshold
EPS_CONTACT = 1e-4   # [m] default contact detection tolerance


class InvalidSpecError(ValueError):
    """A gate or drone specification violates one of its invariants."""


class DegenerateGeometryError(ValueError):
    """Inputs are too close to a degenerate configuration to evaluate."""


@dataclass(frozen=True)
class GateSpec:
    """Geometric and inertial description of the entry gate.

    Defaults follow the reference prototype: 270 mm entrance, 30 mm end
    width, 280 mm depth, 45 deg taper, 120 g per link.  The straight tail
    segment, restitution, and restoring stiffness have no published values
    and carry documented working defaults instead.
    """

    entrance_width: float = 0.270          # [m]
    end_width: float = 0.030               # [m]
    depth: float = 0.280                   # [m]
    taper_angle: float = math.radians(45.0)  # [rad] between taper and rail axis
    straight_length: float = 0.050         # [m] tail parallel to the rail axis
    link_mass: float = 0.120               # [kg] one link
    restitution: float = 0.3               # [-] tip-on-link impacts
    restoring_torque_coeff: float = 0.05   # [N*m/rad] toward zero deflection
    angular_damping: float = 0.0           # [N*m*s/rad] suspension dissipation
    pivot_left: Vec2 | None = None         # [m] +y pivot, world frame
    pivot_right: Vec2 | None = None        # [m] -y pivot, world frame
    polyline_resolution: int = 100         # pieces used for mass properties
    inertia_override: float | None = None  # [kg*m^2] replaces computed inertia
    joint_smoothing_radius: float = 0.0    # [m] optional fillet at the bend

    def __post_init__(self):
        if not (self.entrance_width > self.end_width > 0.0):
            raise InvalidSpecError(
                "need entrance_width > end_width > 0, got "
                f"{self.entrance_width} and {self.end_width}")
        if self.depth <= 0.0:
            raise InvalidSpecError(f"depth must be positive, got {self.depth}")
        if not (0.0 < self.taper_angle < math.pi / 2):
            raise InvalidSpecError(
                f"taper_angle must lie in (0, pi/2), got {self.taper_angle}")
        if self.straight_length < 0.0:
            raise InvalidSpecError(
                f"straight_length must be >= 0, got {self.straight_length}")
        if self.link_mass <= 0.0:
            raise InvalidSpecError(f"link_mass must be positive, got {self.link_mass}")
        if not (0.0 <= self.restitution <= 1.0):
            raise InvalidSpecError(
                f"restitution must lie in [0, 1], got {self.restitution}")
        if self.restoring_torque_coeff < 0.0:
            raise InvalidSpecError("restoring_torque_coeff must be >= 0")
        if self.angular_damping < 0.0:
            raise InvalidSpecError("angular_damping must be >= 0")
        if self.polyline_resolution < 2:
            raise InvalidSpecError("polyline_resolution must be >= 2")
        if self.inertia_override is not None and self.inertia_override <= 0.0:
            raise InvalidSpecError("inertia_override must be positive when set")
        if self.joint_smoothing_radius < 0.0:
            raise InvalidSpecError("joint_smoothing_radius must be >= 0")
        half = 0.5 * self.entrance_width
        if self.pivot_left is None:
            object.__setattr__(self, "pivot_left", (0.0, half))
        if self.pivot_right is None:
            object.__setattr__(self, "pivot_right", (0.0, -half))
        dx = self.pivot_left[0] - self.pivot_right[0]
        dy = self.pivot_left[1] - self.pivot_right[1]
        sep = math.hypot(dx, dy)
        if abs(sep - self.entrance_width) > 1e-9 * max(1.0, self.entrance_width):
            raise InvalidSpecError(
                f"pivot separation {sep} must equal entrance_width {self.entrance_width}")

    @property
    def half_close(self) -> float:
        """Lateral travel of one link from entrance to end width [m]."""
        return 0.5 * (self.entrance_width - self.end_width)

    @property
    def taper_run(self) -> float:
        """Axial extent of the taper segment [m]."""
        return self.half_close / math.tan(self.taper_angle)

    def canonical_breakpoints(self) -> tuple[Vec2, ...]:
        """Geometric vertices of one link in its pivot frame.

        Starts at the pivot, follows the taper, then the straight tail.
        A positive joint_smoothing_radius replaces the bend with a fillet
        arc sampled from polyline_resolution.
        """
        run = self.taper_run
        half = self.half_close
        taper_len = math.hypot(run, half)
        pts: list[Vec2] = [(0.0, 0.0), (run, half)]
        if self.straight_length > 0.0:
            pts.append((run + self.straight_length, half))
        r = self.joint_smoothing_radius
        if r > 0.0 and self.straight_length > 0.0:
            # Concave fillet between taper and tail, bulging into the corner.
            alpha = self.taper_angle
            td = r / math.tan(0.5 * (math.pi - alpha))
            if td > min(taper_len, self.straight_length):
                raise InvalidSpecError(
                    "joint_smoothing_radius too large for segment lengths")
            bx, by = run, half
            u1 = (math.cos(alpha), math.sin(alpha))
            p1 = (bx - td * u1[0], by - td * u1[1])
            p2 = (bx + td, by)
            # Center sits on the interior side, r away from both faces.
            n1 = (-u1[1], u1[0])
            cx, cy = p1[0] + r * n1[0], p1[1] + r * n1[1]
            a1 = math.atan2(p1[1] - cy, p1[0] - cx)
            a2 = math.atan2(p2[1] - cy, p2[0] - cx)
            while a2 > a1:
                a2 -= 2.0 * math.pi
            n_arc = max(2, self.polyline_resolution // 8)
            arc = [(cx + r * math.cos(a1 + (a2 - a1) * k / n_arc),
                    cy + r * math.sin(a1 + (a2 - a1) * k / n_arc))
                   for k in range(n_arc + 1)]
            pts = [(0.0, 0.0)] + arc + [(run + self.straight_length, half)]
        return tuple(pts)

    def stable_hash(self) -> str:
        """Deterministic digest of all field values."""
        items = ";".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return hashlib.sha256(items.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class LinkShape:
    """One gate link resolved to a polyline with mass properties.

    polyline is the densely sampled outline in the pivot frame (first
    point is the pivot); breakpoints are the underlying geometric
    vertices used for contact queries.
    """

    polyline: tuple[Vec2, ...]
    center_of_gravity: Vec2
    inertia_about_pivot: float   # [kg*m^2]
    breakpoints: tuple[Vec2, ...]

    def __post_init__(self):
        p0 = self.polyline[0]
        if math.hypot(p0[0], p0[1]) > EPS_GEOM:
            raise InvalidSpecError("first polyline point must be the pivot")
        if self.inertia_about_pivot <= 0.0:
            raise InvalidSpecError("inertia_about_pivot must be positive")
        xs = [p[0] for p in self.polyline]
        ys = [p[1] for p in self.polyline]
        gx, gy = self.center_of_gravity
        if not (min(xs) <= gx <= max(xs) and min(ys) <= gy <= max(ys)):
            raise InvalidSpecError("center_of_gravity outside polyline bounding box")


@dataclass(frozen=True)
class ContactPoint:
    """Nearest link surface point to a drone tip, in the link frame.

    local_opening_angle is the contacted segment's angle to the rail
    axis in the undeflected link frame; callers add the instantaneous
    gate deflection to obtain the physical opening angle.
    """

    position: Vec2
    local_opening_angle: float   # [rad]
    segment_index: int


def build_link_shape(spec: GateSpec) -> LinkShape:
    """Resolve a GateSpec into one canonical link.

    The polyline is sampled at spec.polyline_resolution pieces spread
    over the breakpoint segments in proportion to length.  Mass is
    distributed uniformly along the polyline (slender rod); the center
    of gravity and the inertia about the pivot come from midpoint
    lumping of the pieces, so the inertia converges monotonically from
    below as the resolution grows.
    """
    bps = spec.canonical_breakpoints()
    seg_lens = [math.hypot(bps[i + 1][0] - bps[i][0], bps[i + 1][1] - bps[i][1])
                for i in range(len(bps) - 1)]
    total = sum(seg_lens)
    if total <= EPS_GEOM:
        raise InvalidSpecError("link has zero length")

    dense: list[Vec2] = [bps[0]]
    lam = spec.link_mass / total
    cgx = cgy = inertia = 0.0
    for i, seg_len in enumerate(seg_lens):
        if seg_len <= 0.0:
            continue
        ax, ay = bps[i]
        bx, by = bps[i + 1]
        n = max(1, round(spec.polyline_resolution * seg_len / total))
        m_piece = lam * seg_len / n
        for k in range(n):
            t0 = (k + 0.5) / n
            mx = ax + (bx - ax) * t0
            my = ay + (by - ay) * t0
            cgx += m_piece * mx
            cgy += m_piece * my
            inertia += m_piece * (mx * mx + my * my)
            t1 = (k + 1.0) / n
            dense.append((ax + (bx - ax) * t1, ay + (by - ay) * t1))
    cgx /= spec.link_mass
    cgy /= spec.link_mass
    if spec.inertia_override is not None:
        inertia = spec.inertia_override
    return LinkShape(polyline=tuple(dense),
                     center_of_gravity=(cgx, cgy),
                     inertia_about_pivot=inertia,
                     breakpoints=bps)


def effective_lever_arm(center_of_gravity: Vec2, contact: Vec2) -> float:
    """Effective moment arm of an impact about the pivot.

    Distance from the pivot to the foot of the perpendicular dropped
    from the contact point onto the pivot-to-center-of-gravity line,
    computed as d_G - d or d_G + d depending on whether the contact
    projects short of or beyond the center of gravity.  Algebraically
    this equals the scalar projection (G . P)/|G|; both branches are
    kept explicit so the case split can be exercised directly.
    """
    gx, gy = center_of_gravity
    px, py = contact
    gg = gx * gx + gy * gy
    if gg < EPS_GEOM * EPS_GEOM:
        raise DegenerateGeometryError(
            "center of gravity too close to the pivot for a lever arm")
    d_g = math.sqrt(gg)
    gp = gx * px + gy * py
    cross = gx * py - gy * px
    under = (px - gx) ** 2 + (py - gy) ** 2 - cross * cross / gg
    d = math.sqrt(max(under, 0.0))
    if gp <= gg:
        return d_g - d
    return d_g + d


def nearest_surface_point(tip: Vec2, breakpoints: tuple[Vec2, ...], gate_angle: float
                          ) -> tuple[float, Vec2, float, int]:
    """Distance and nearest point from a tip to a rotated link polyline.

    The tip is given in the link pivot frame; the polyline is rotated by
    gate_angle about the pivot.  Returns (distance, nearest point in the
    unrotated link frame, segment angle in the unrotated frame, segment
    index).  Ties go to the lower segment index.
    """
    c = math.cos(gate_angle)
    s = math.sin(gate_angle)
    qx = c * tip[0] + s * tip[1]
    qy = -s * tip[0] + c * tip[1]
    best_d2 = math.inf
    best = (0.0, 0.0)
    best_ang = 0.0
    best_idx = -1
    for i in range(len(breakpoints) - 1):
        ax, ay = breakpoints[i]
        bx, by = breakpoints[i + 1]
        ux, uy = bx - ax, by - ay
        seg2 = ux * ux + uy * uy
        if seg2 <= 0.0:
            continue
        t = ((qx - ax) * ux + (qy - ay) * uy) / seg2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        px = ax + t * ux
        py = ay + t * uy
        d2 = (qx - px) ** 2 + (qy - py) ** 2
        if d2 < best_d2:
            best_d2 = d2
            best = (px, py)
            best_ang = math.atan2(uy, ux)
            best_idx = i
    return math.sqrt(best_d2), best, best_ang, best_idx


def find_contact(drone_tip: Vec2, link: LinkShape, gate_angle: float,
                 tolerance: float = EPS_CONTACT) -> ContactPoint | None:
    """Contact query between a drone tip and the rotated link.

    Returns the nearest polyline point if the tip lies within tolerance
    of the surface, None otherwise.  Position and opening angle are
    reported in the unrotated link frame, which makes the result
    invariant under co-rotation of tip and gate_angle.
    """
    dist, pos, ang, idx = nearest_surface_point(drone_tip, link.breakpoints, gate_angle)
    if dist > tolerance:
        return None
    return ContactPoint(position=pos, local_opening_angle=ang, segment_index=idx)


def gate_world_outline(spec: GateSpec, deflection: float = 0.0
                       ) -> tuple[tuple[Vec2, ...], tuple[Vec2, ...]]:
    """World polylines (left, right) of both links at a given deflection.

    Both links rotate together by the world angle deflection; the left
    link is the mirror image of the canonical one about the rail axis.
    """
    bps = spec.canonical_breakpoints()
    c = math.cos(deflection)
    s = math.sin(deflection)
    plx, ply = spec.pivot_left
    prx, pry = spec.pivot_right
    right = []
    left = []
    for x, y in bps:
        rx = c * x - s * y
        ry = s * x + c * y
        right.append((prx + rx, pry + ry))
        # Mirror conjugation: world rotation of the mirrored shape.
        mx = c * x + s * y
        my = s * x - c * y
        left.append((plx + mx, ply + my))
    return tuple(left), tuple(right)
