"""Single-rigid-body model of a quadruped with steerable, actuated wheels.

State (28 dims): CoM position r, Euler angles theta = [roll, pitch, yaw],
their rates, and per foot [x, y, z, sigma] where sigma is the steering angle.
Controls: u1 = [contact forces (4x3), wheel speeds v (4), steering rates (4)]
held constant over a planning interval, plus u2 = vertical foot velocities (4)
free at every collocation node.

The base orientation enters the dynamics through the yaw-pitch-roll Euler-rate
map C(theta) with omega = C(theta) * theta_dot; C depends on pitch and yaw
only and is singular at pitch = pi/2 + k*pi, guarded by SingularPitch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import ad

GRAVITY = np.array([0.0, 0.0, -9.81])
DEFAULT_PITCH_MARGIN = 0.1  # rad; |cos(pitch)| at or below this raises SingularPitch

FOOT_NAMES = ("LF", "RF", "LH", "RH")
NUM_FEET = 4
STATE_DIM = 28
U1_DIM = 20

# state vector layout
R_SLICE = slice(0, 3)
THETA_SLICE = slice(3, 6)
RDOT_SLICE = slice(6, 9)
THETADOT_SLICE = slice(9, 12)


def foot_slice(i: int) -> slice:
    """Slice of state dims [x, y, z, sigma] for foot i."""
    return slice(12 + 4 * i, 16 + 4 * i)


class SingularPitch(ValueError):
    """Pitch too close to the Euler-rate mapping singularity."""


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class FootState:
    p_c: np.ndarray  # wheel contact point, world frame (3,)
    sigma: float  # steering angle, world frame

    def __post_init__(self):
        object.__setattr__(self, "p_c", np.asarray(self.p_c, dtype=float))
        if self.p_c.shape != (3,):
            raise ValueError("p_c must have shape (3,)")
        object.__setattr__(self, "sigma", float(self.sigma))


@dataclass(frozen=True)
class State:
    r: np.ndarray
    theta: np.ndarray
    r_dot: np.ndarray
    theta_dot: np.ndarray
    feet: tuple

    def __post_init__(self):
        for name in ("r", "theta", "r_dot", "theta_dot"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3,):
                raise ValueError(f"{name} must have shape (3,)")
            object.__setattr__(self, name, arr)
        if len(self.feet) != NUM_FEET:
            raise ValueError("state needs exactly four feet")
        object.__setattr__(self, "feet", tuple(self.feet))
        if abs(np.cos(self.theta[1])) <= DEFAULT_PITCH_MARGIN:
            raise SingularPitch(f"pitch {self.theta[1]:.4f} rad is inside the guard band")

    def as_vector(self) -> np.ndarray:
        out = np.empty(STATE_DIM)
        out[R_SLICE] = self.r
        out[THETA_SLICE] = self.theta
        out[RDOT_SLICE] = self.r_dot
        out[THETADOT_SLICE] = self.theta_dot
        for i, f in enumerate(self.feet):
            out[foot_slice(i)] = [f.p_c[0], f.p_c[1], f.p_c[2], f.sigma]
        return out

    @classmethod
    def from_vector(cls, x) -> "State":
        x = np.asarray(x, dtype=float)
        if x.shape != (STATE_DIM,):
            raise ValueError(f"state vector must have shape ({STATE_DIM},)")
        feet = tuple(
            FootState(p_c=x[foot_slice(i)][:3], sigma=x[foot_slice(i)][3])
            for i in range(NUM_FEET)
        )
        return cls(x[R_SLICE], x[THETA_SLICE], x[RDOT_SLICE], x[THETADOT_SLICE], feet)


@dataclass(frozen=True)
class Control:
    f_c: np.ndarray  # contact forces, world frame (4, 3)
    v: np.ndarray  # wheel speeds along the steering direction (4,)
    sigma_dot: np.ndarray  # steering rates (4,)
    u2: np.ndarray  # vertical foot velocities (4,)

    def __post_init__(self):
        object.__setattr__(self, "f_c", np.asarray(self.f_c, dtype=float).reshape(4, 3))
        for name in ("v", "sigma_dot", "u2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (4,):
                raise ValueError(f"{name} must have shape (4,)")
            object.__setattr__(self, name, arr)

    def u1_vector(self) -> np.ndarray:
        return np.concatenate([self.f_c.reshape(-1), self.v, self.sigma_dot])

    @classmethod
    def from_vectors(cls, u1, u2) -> "Control":
        u1 = np.asarray(u1, dtype=float)
        return cls(u1[:12].reshape(4, 3), u1[12:16], u1[16:20], u2)


@dataclass(frozen=True)
class RobotModel:
    """Massless-limb quadruped: inertial constants plus actuation limits."""

    mass: float = 92.0
    inertia: np.ndarray = field(default_factory=lambda: np.diag([4.0, 8.0, 9.0]))
    gravity: np.ndarray = field(default_factory=lambda: GRAVITY.copy())
    wheel_radius: float = 0.078
    nominal_feet: np.ndarray = field(
        default_factory=lambda: np.array(
            [
                [0.35, 0.35, -0.70],  # LF
                [0.35, -0.35, -0.70],  # RF
                [-0.35, 0.35, -0.70],  # LH
                [-0.35, -0.35, -0.70],  # RH
            ]
        )
    )
    box_bounds: np.ndarray = field(default_factory=lambda: np.array([0.15, 0.10, 0.10]))
    sigma_range: np.ndarray = field(default_factory=lambda: np.array([-2.618, 2.618]))
    sigma_dot_range: np.ndarray = field(default_factory=lambda: np.array([-5.0, 5.0]))
    v_range: np.ndarray = field(default_factory=lambda: np.array([-1.5, 1.5]))
    mu: float = 0.5
    z_ground: float = 0.0
    z_fly: float = 0.10

    def __post_init__(self):
        for name in ("inertia", "gravity", "nominal_feet", "box_bounds",
                     "sigma_range", "sigma_dot_range", "v_range"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.inertia.shape != (3, 3) or not np.allclose(self.inertia, self.inertia.T):
            raise ValueError("inertia must be a symmetric 3x3 matrix")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0):
            raise ValueError("inertia must be positive definite")
        if self.wheel_radius <= 0:
            raise ValueError("wheel_radius must be positive")
        if self.nominal_feet.shape != (NUM_FEET, 3):
            raise ValueError("nominal_feet must have shape (4, 3)")
        if np.any(self.box_bounds <= 0):
            raise ValueError("box_bounds must be positive")
        for name in ("sigma_range", "sigma_dot_range", "v_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} must be ordered")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.z_fly <= self.z_ground:
            raise ValueError("z_fly must sit above z_ground")
        object.__setattr__(self, "inertia_inv", np.linalg.inv(self.inertia))

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        out = {
            "mass": self.mass,
            "wheel_radius": self.wheel_radius,
            "nominal_feet": self.nominal_feet.tolist(),
            "box_bounds": self.box_bounds.tolist(),
            "sigma_range": self.sigma_range.tolist(),
            "sigma_dot_range": self.sigma_dot_range.tolist(),
            "v_range": self.v_range.tolist(),
            "mu": self.mu,
            "z_ground": self.z_ground,
            "z_fly": self.z_fly,
            "gravity": self.gravity.tolist(),
        }
        diag = np.diag(np.diag(self.inertia))
        if np.allclose(self.inertia, diag):
            out["inertia_diag"] = np.diag(self.inertia).tolist()
        else:
            out["inertia_full"] = self.inertia.tolist()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "RobotModel":
        data = dict(data)
        if "inertia_diag" in data:
            data["inertia"] = np.diag(data.pop("inertia_diag"))
        elif "inertia_full" in data:
            data["inertia"] = np.asarray(data.pop("inertia_full"), dtype=float)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown robot profile keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "RobotModel":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def replace(self, **kwargs) -> "RobotModel":
        data = {name: getattr(self, name) for name in self.__dataclass_fields__}
        data.update(kwargs)
        return RobotModel(**data)


def default_robot() -> RobotModel:
    return RobotModel()


def nominal_state(model: RobotModel, xy=(0.0, 0.0), yaw: float = 0.0) -> State:
    """Standing state: feet at nominal positions on the ground, wheels aligned."""
    height = model.z_ground - float(np.mean(model.nominal_feet[:, 2]))
    r = np.array([xy[0], xy[1], height])
    cz, sz = np.cos(yaw), np.sin(yaw)
    rot_t = np.array([[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]])  # base->world
    feet = []
    for i in range(NUM_FEET):
        p = r + rot_t @ model.nominal_feet[i]
        feet.append(FootState(np.array([p[0], p[1], model.z_ground]), yaw))
    return State(r, np.array([0.0, 0.0, yaw]), np.zeros(3), np.zeros(3), tuple(feet))


# ---------------------------------------------------------------------------
# Euler-rate mapping (yaw-pitch-roll; depends on pitch and yaw only)


def euler_rate_matrix(theta):
    """C(theta) with omega = C(theta) * theta_dot. Works on ndarrays and Duals."""
    ty = theta[..., 1]
    tz = theta[..., 2]
    sy, cy = ad.sin(ty), ad.cos(ty)
    sz, cz = ad.sin(tz), ad.cos(tz)
    zero = 0.0 * ad.value(ty)
    one = zero + 1.0
    row0 = ad.stack([cy * cz, -sz, zero], axis=-1)
    row1 = ad.stack([cy * sz, cz, zero], axis=-1)
    row2 = ad.stack([-sy, zero, one], axis=-1)
    return ad.stack([row0, row1, row2], axis=-2)


def euler_rate_matrix_dot(theta, theta_dot):
    """Time derivative of C(theta) along theta_dot."""
    ty, tz = theta[..., 1], theta[..., 2]
    ty_d, tz_d = theta_dot[..., 1], theta_dot[..., 2]
    sy, cy = ad.sin(ty), ad.cos(ty)
    sz, cz = ad.sin(tz), ad.cos(tz)
    zero = 0.0 * ad.value(ty)
    row0 = ad.stack([-sy * ty_d * cz - cy * sz * tz_d, -cz * tz_d, zero], axis=-1)
    row1 = ad.stack([-sy * ty_d * sz + cy * cz * tz_d, -sz * tz_d, zero], axis=-1)
    row2 = ad.stack([-cy * ty_d, zero, zero], axis=-1)
    return ad.stack([row0, row1, row2], axis=-2)


def euler_rates_to_omega(theta, theta_dot):
    """Body angular velocity from Euler angles and their rates."""
    ty, tz = theta[..., 1], theta[..., 2]
    sy, cy = ad.sin(ty), ad.cos(ty)
    sz, cz = ad.sin(tz), ad.cos(tz)
    tdx, tdy, tdz = theta_dot[..., 0], theta_dot[..., 1], theta_dot[..., 2]
    wx = cy * cz * tdx - sz * tdy
    wy = cy * sz * tdx + cz * tdy
    wz = -sy * tdx + tdz
    return ad.stack([wx, wy, wz], axis=-1)


def _solve_euler_rates(sy, cy, sz, cz, bx, by, bz):
    """Solve C(theta) u = b componentwise using the closed-form inverse."""
    u0 = (bx * cz + by * sz) / cy
    u1 = by * cz - bx * sz
    u2 = bz + sy * u0
    return u0, u1, u2


def euler_accel(theta, theta_dot, omega_dot, eps: float = DEFAULT_PITCH_MARGIN):
    """Euler-angle accelerations from angular acceleration.

    Inverts omega_dot = C*theta_ddot + C_dot*theta_dot.  Raises SingularPitch
    when |cos(pitch)| <= eps anywhere in the batch.
    """
    ty, tz = theta[..., 1], theta[..., 2]
    cy_val = np.cos(ad.value(ty))
    if np.any(np.abs(cy_val) <= eps):
        raise SingularPitch("pitch too close to +-pi/2 for the Euler-rate inverse")
    sy, cy = ad.sin(ty), ad.cos(ty)
    sz, cz = ad.sin(tz), ad.cos(tz)
    tdx, tdy, tdz = theta_dot[..., 0], theta_dot[..., 1], theta_dot[..., 2]
    # C_dot * theta_dot, written out
    cd_x = (-sy * tdy * cz - cy * sz * tdz) * tdx - cz * tdz * tdy
    cd_y = (-sy * tdy * sz + cy * cz * tdz) * tdx - sz * tdz * tdy
    cd_z = -cy * tdy * tdx
    bx = omega_dot[..., 0] - cd_x
    by = omega_dot[..., 1] - cd_y
    bz = omega_dot[..., 2] - cd_z
    u0, u1, u2 = _solve_euler_rates(sy, cy, sz, cz, bx, by, bz)
    return ad.stack([u0, u1, u2], axis=-1)


# ---------------------------------------------------------------------------
# rigid-body forces and torques


def srbd_translational(state: State, control: Control, model: RobotModel):
    """CoM acceleration: gravity plus summed contact forces over mass."""
    return model.gravity + control.f_c.sum(axis=0) / model.mass


def srbd_rotational(state: State, control: Control, model: RobotModel):
    """Angular acceleration from contact-force torques about the CoM."""
    omega = euler_rates_to_omega(state.theta, state.theta_dot)
    torque = np.zeros(3)
    for i in range(NUM_FEET):
        d = state.r - state.feet[i].p_c
        torque = torque + np.cross(control.f_c[i], d)
    gyro = np.cross(omega, model.inertia @ omega)
    return model.inertia_inv @ (torque - gyro)


def rolling_residual(p_dot_x, p_dot_y, sigma):
    """Lateral (no-slip) velocity of a wheel contact point; zero when rolling."""
    return p_dot_x * ad.sin(sigma) - p_dot_y * ad.cos(sigma)


def wheel_spin_rate(p_dot, sigma, model: RobotModel):
    """Wheel angular speed consistent with the contact-point velocity."""
    return (p_dot[..., 0] * ad.cos(sigma) + p_dot[..., 1] * ad.sin(sigma)) / model.wheel_radius


# ---------------------------------------------------------------------------
# full state derivative, componentwise so Duals pass through


def _state_rate_components(comp: dict, model: RobotModel, eps: float):
    """28 state-rate components from named inputs of any common batch shape.

    ``comp`` keys: r (3 comps), theta (3), r_dot (3), theta_dot (3),
    feet positions px/py/pz (lists of 4), sigma, v, sigma_dot, u2 (lists of 4),
    forces fx/fy/fz (lists of 4).
    """
    m = model.mass
    gx, gy, gz = model.gravity
    inertia = model.inertia
    inertia_inv = model.inertia_inv

    tx, ty, tz = comp["theta"]
    tdx, tdy, tdz = comp["theta_dot"]
    del tx  # roll does not enter the rate map

    cy_val = np.cos(ad.value(ty))
    if np.any(np.abs(cy_val) <= eps):
        raise SingularPitch("pitch too close to +-pi/2 for the Euler-rate inverse")

    sy, cy = ad.sin(ty), ad.cos(ty)
    sz, cz = ad.sin(tz), ad.cos(tz)

    # translational dynamics
    fx_sum = comp["fx"][0] + comp["fx"][1] + comp["fx"][2] + comp["fx"][3]
    fy_sum = comp["fy"][0] + comp["fy"][1] + comp["fy"][2] + comp["fy"][3]
    fz_sum = comp["fz"][0] + comp["fz"][1] + comp["fz"][2] + comp["fz"][3]
    ax = gx + fx_sum / m
    ay = gy + fy_sum / m
    az = gz + fz_sum / m

    # torque about the CoM: sum_i f_i x (r - p_i)
    rx, ry, rz = comp["r"]
    taux = tauy = tauz = 0.0
    for i in range(NUM_FEET):
        dx = rx - comp["px"][i]
        dy = ry - comp["py"][i]
        dz = rz - comp["pz"][i]
        fx, fy, fz = comp["fx"][i], comp["fy"][i], comp["fz"][i]
        taux = taux + fy * dz - fz * dy
        tauy = tauy + fz * dx - fx * dz
        tauz = tauz + fx * dy - fy * dx

    # gyroscopic term
    wx = cy * cz * tdx - sz * tdy
    wy = cy * sz * tdx + cz * tdy
    wz = -sy * tdx + tdz
    iw_x = inertia[0, 0] * wx + inertia[0, 1] * wy + inertia[0, 2] * wz
    iw_y = inertia[1, 0] * wx + inertia[1, 1] * wy + inertia[1, 2] * wz
    iw_z = inertia[2, 0] * wx + inertia[2, 1] * wy + inertia[2, 2] * wz
    gyrox = wy * iw_z - wz * iw_y
    gyroy = wz * iw_x - wx * iw_z
    gyroz = wx * iw_y - wy * iw_x

    bx = taux - gyrox
    by = tauy - gyroy
    bz = tauz - gyroz
    wdx = inertia_inv[0, 0] * bx + inertia_inv[0, 1] * by + inertia_inv[0, 2] * bz
    wdy = inertia_inv[1, 0] * bx + inertia_inv[1, 1] * by + inertia_inv[1, 2] * bz
    wdz = inertia_inv[2, 0] * bx + inertia_inv[2, 1] * by + inertia_inv[2, 2] * bz

    # C_dot * theta_dot and the mapping inverse
    cd_x = (-sy * tdy * cz - cy * sz * tdz) * tdx - cz * tdz * tdy
    cd_y = (-sy * tdy * sz + cy * cz * tdz) * tdx - sz * tdz * tdy
    cd_z = -cy * tdy * tdx
    edd0, edd1, edd2 = _solve_euler_rates(sy, cy, sz, cz, wdx - cd_x, wdy - cd_y, wdz - cd_z)

    rates = list(comp["r_dot"]) + list(comp["theta_dot"])
    rates += [ax, ay, az, edd0, edd1, edd2]
    for i in range(NUM_FEET):
        sig = comp["sigma"][i]
        rates += [
            comp["v"][i] * ad.cos(sig),
            comp["v"][i] * ad.sin(sig),
            comp["u2"][i],
            comp["sigma_dot"][i],
        ]
    return rates


def state_derivative_vector(x, u1, u2, model: RobotModel, eps: float = DEFAULT_PITCH_MARGIN):
    """State derivative on flat vectors; shared by the integrator and tests."""
    comp = {
        "r": [x[..., 0], x[..., 1], x[..., 2]],
        "theta": [x[..., 3], x[..., 4], x[..., 5]],
        "r_dot": [x[..., 6], x[..., 7], x[..., 8]],
        "theta_dot": [x[..., 9], x[..., 10], x[..., 11]],
        "px": [x[..., 12 + 4 * i] for i in range(4)],
        "py": [x[..., 13 + 4 * i] for i in range(4)],
        "pz": [x[..., 14 + 4 * i] for i in range(4)],
        "sigma": [x[..., 15 + 4 * i] for i in range(4)],
        "fx": [u1[..., 3 * i] for i in range(4)],
        "fy": [u1[..., 3 * i + 1] for i in range(4)],
        "fz": [u1[..., 3 * i + 2] for i in range(4)],
        "v": [u1[..., 12 + i] for i in range(4)],
        "sigma_dot": [u1[..., 16 + i] for i in range(4)],
        "u2": [u2[..., i] for i in range(4)],
    }
    rates = _state_rate_components(comp, model, eps)
    return ad.stack(rates, axis=-1)


def state_derivative(state: State, control: Control, model: RobotModel,
                     eps: float = DEFAULT_PITCH_MARGIN) -> np.ndarray:
    """Time derivative of the 28-dim state under the given control."""
    return state_derivative_vector(
        state.as_vector(), control.u1_vector(), control.u2, model, eps
    )
