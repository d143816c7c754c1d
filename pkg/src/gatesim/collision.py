"""Impulsive collision between a point-mass drone tip and a pivoted link.

The drone is a frictionless mass point; the gate is a rigid body free to
rotate about its pivot with inertia I.  Resolving momentum exchange and
restitution along the impact normal gives the impulse, the post-impact
tip velocity split into components normal and tangential to the link,
and the angular velocity picked up by the gate.

The impulse partition uses the effective lever arm d' squared in the
denominators (I + m*d'^2), which is what the momentum/restitution
derivation produces and keeps every term in consistent units.  A
strict_paper flag switches to the first-power form (I + m*d') for
comparison runs; that variant mixes units and is not used by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class InvalidImpactError(ValueError):
    """An ImpactInput violates one of its preconditions."""


@dataclass(frozen=True)
class ImpactInput:
    """Pre-impact state, all SI.

    approach_angle is the tip velocity's angle to the rail axis and
    opening_angle the contacted segment's; their sum is the angle
    between velocity and segment, so the normal closing speed is
    speed_before * sin(approach_angle + opening_angle).
    """

    drone_mass: float        # [kg]
    speed_before: float      # [m/s]
    approach_angle: float    # [rad]
    opening_angle: float     # [rad]
    gate_inertia: float      # [kg*m^2]; math.inf models a rigid wall
    restitution: float       # [-]
    lever_arm: float         # [m]

    def __post_init__(self):
        if self.drone_mass <= 0.0:
            raise InvalidImpactError(f"drone_mass must be positive, got {self.drone_mass}")
        if self.speed_before < 0.0:
            raise InvalidImpactError(f"speed_before must be >= 0, got {self.speed_before}")
        if self.gate_inertia <= 0.0:
            raise InvalidImpactError(f"gate_inertia must be positive, got {self.gate_inertia}")
        if not (0.0 <= self.restitution <= 1.0):
            raise InvalidImpactError(f"restitution must lie in [0, 1], got {self.restitution}")
        if self.lever_arm < 0.0:
            raise InvalidImpactError(f"lever_arm must be >= 0, got {self.lever_arm}")
        total = self.approach_angle + self.opening_angle
        if not (-1e-12 <= total <= math.pi + 1e-12):
            raise InvalidImpactError(
                f"approach_angle + opening_angle must lie in [0, pi], got {total}")


@dataclass(frozen=True)
class CollisionResponse:
    """Outcome of one impact.

    normal_velocity_after keeps the inbound sign convention: positive
    means the tip is still moving toward where the link surface was,
    i.e. it entered; negative means it rebounded.
    """

    impulse: float                  # [N*s]
    normal_velocity_after: float    # [m/s]
    tangential_velocity_after: float  # [m/s], positive toward the rail
    gate_angular_velocity: float    # [rad/s]


def resolve_impact(impact: ImpactInput, strict_paper: bool = False) -> CollisionResponse:
    """Resolve one frictionless impact against the pivoted link.

    With v_n = v0*sin(t1+t2) and v_h = v0*cos(t1+t2):

        impulse  f = m*(1+e)*I*v_n / (I + m*d'^2)
        normal   v_v = (1 - (1+e)*I/(I + m*d'^2)) * v_n
        tangent  v_h unchanged (no friction)
        gate     w = m*d'*(1+e)*v_n / (I + m*d'^2)

    An infinite gate_inertia gives the rigid-wall limit v_v = -e*v_n,
    w = 0.  strict_paper uses d' instead of d'^2 in the denominators.
    """
    m = impact.drone_mass
    e = impact.restitution
    d = impact.lever_arm
    inertia = impact.gate_inertia
    total = impact.approach_angle + impact.opening_angle
    v_n = impact.speed_before * math.sin(total)
    v_h = impact.speed_before * math.cos(total)
    if math.isinf(inertia):
        impulse = m * (1.0 + e) * v_n
        v_v = -e * v_n
        omega = 0.0
    else:
        denom = inertia + m * (d if strict_paper else d * d)
        share = (1.0 + e) * inertia / denom
        impulse = m * share * v_n
        v_v = (1.0 - share) * v_n
        omega = m * d * (1.0 + e) * v_n / denom
    return CollisionResponse(impulse=impulse,
                             normal_velocity_after=v_v,
                             tangential_velocity_after=v_h,
                             gate_angular_velocity=omega)


def geometric_entry_feasible(approach_angle: float, opening_angle: float) -> bool:
    """True when the post-impact tangential velocity points at the rail.

    Equivalent to approach_angle + opening_angle < pi/2 (strict); at
    exactly pi/2 the tip stops making forward progress.
    """
    if not (math.isfinite(approach_angle) and math.isfinite(opening_angle)):
        raise InvalidImpactError("angles must be finite")
    return approach_angle + opening_angle < math.pi / 2


def momentum_entry_feasible(drone_mass: float, lever_arm: float, restitution: float,
                            gate_inertia: float, strict_paper: bool = False) -> bool:
    """True when the tip keeps its inbound normal motion after impact.

    m*d'^2 > e*I (strict inequality); this is exactly the condition for
    resolve_impact to return a positive normal_velocity_after.  Against a
    rigid wall (infinite inertia) the inbound motion is never kept.
    """
    if drone_mass <= 0.0 or gate_inertia <= 0.0:
        raise InvalidImpactError("drone_mass and gate_inertia must be positive")
    if math.isinf(gate_inertia):
        return False
    arm = lever_arm if strict_paper else lever_arm * lever_arm
    return drone_mass * arm > restitution * gate_inertia


def energy_audit(impact: ImpactInput, response: CollisionResponse) -> float:
    """Kinetic energy lost in the impact [J].

    Non-negative for restitution <= 1 and zero (to rounding) for a
    perfectly elastic impact.
    """
    m = impact.drone_mass
    ke_before = 0.5 * m * impact.speed_before ** 2
    omega = response.gate_angular_velocity
    gate_ke = 0.0 if omega == 0.0 else 0.5 * impact.gate_inertia * omega * omega
    ke_after = 0.5 * m * (response.normal_velocity_after ** 2
                          + response.tangential_velocity_after ** 2) + gate_ke
    return ke_before - ke_after
