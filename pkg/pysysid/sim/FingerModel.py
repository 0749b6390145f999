import math
import numpy as np
from ..CalibError import BoundsError, DivergedSimulationError
from ..Control import ControlProfile
from ..Platforms import Platforms
from ..Trajectory import Trajectory
from .Camera import Camera, CAMERAS

from typing import Mapping, Sequence, Tuple

class FingerModel:
    """
    Reduced-order finger: three revolute joints in a horizontal plane, each a PD position servo.

    Channel 0 drives the MCP joint; channel 1 drives the coupled PIP and DIP joints.
    Per joint:

        I q'' = kp (u - q) - kd q' - frictionloss tanh(q' / eps)

    with I = density * c_j + armature. There is no gravity and no coupling between joints.
    """

    LINK_LENGTHS = (0.045, 0.028, 0.022)
    """Proximal, middle and distal link lengths in metres"""
    INERTIA_PER_DENSITY = (0.15, 0.06, 0.02)
    """Link inertia about each joint per unit density (kg m^2 per kg/m^3)"""
    KP = 1000.0
    """Fixed proportional gain (N m / rad)"""
    FRICTION_EPS = 1e-3
    """Velocity scale of the smoothed dry friction (rad/s)"""
    DT = 1e-3
    """Internal step (s)"""
    GUARD = 1e3
    """Joint angles beyond this many radians count as diverged"""
    TUNABLES = ("frictionloss", "damping", "armature", "density")

    def __init__(self, frictionloss:float=50.0, damping:float=100.0, armature:float=1.0, density:float=5.0, link_lengths:Sequence[float]=LINK_LENGTHS):
        self.frictionloss = float(frictionloss)
        """Joint dry friction torque (N m)"""
        self.damping = float(damping)
        """Viscous damping kd (N m s / rad)"""
        self.armature = float(armature)
        """Rotor inertia added to every joint (kg m^2)"""
        self.density = float(density)
        """Link mass scale"""
        self.link_lengths = tuple(float(l) for l in link_lengths)
        if len(self.link_lengths) != 3:
            raise BoundsError("The finger has exactly 3 links")
        if not np.all(self.inertia > 0):
            raise BoundsError("Joint inertia must be positive, got {}".format(self.inertia))

    @classmethod
    def from_params(cls, params:Mapping[str, float]) -> "FingerModel":
        """Build from any mapping holding the four tunables (extra keys are ignored)"""
        return cls(**{name: params[name] for name in cls.TUNABLES})

    @property
    def inertia(self) -> np.ndarray:
        """Diagonal inertia per joint"""
        return self.density * np.array(self.INERTIA_PER_DENSITY) + self.armature

    def joint_targets(self, control:ControlProfile, t) -> np.ndarray:
        """Joint targets in radians (..., 3) for motion time(s) t"""
        u = np.radians(control.signal(t))
        return np.stack([u[..., 0], u[..., 1], u[..., 1]], axis=-1)

    def forward_kinematics(self, q) -> np.ndarray:
        """Tip position (..., 2) in metres for joint angles (..., 3)"""
        phi = np.cumsum(np.asarray(q, dtype=float), axis=-1)
        lengths = np.array(self.link_lengths)
        return np.stack([np.sum(lengths * np.cos(phi), axis=-1), np.sum(lengths * np.sin(phi), axis=-1)], axis=-1)

    def integrate(self, control:ControlProfile, duration:float, fps:float, settle:float=2.0) -> np.ndarray:
        """
        Integrate and sample the joint angles

        The joints hold the rest pose (target 0) for `settle` seconds, then follow the control for `duration` seconds.
        Velocities are updated implicitly in stiffness, damping and the linearized friction; positions use the new velocity.

        Returns:
            (np.ndarray): Joint angles (frames, 3) at motion times k / fps
        """
        if not duration > 0:
            raise ValueError("duration must be > 0")
        if len(control.channels) != 2:
            raise BoundsError("The finger needs a 2-channel control profile")
        dt = self.DT
        settle_steps = int(round(settle / dt))
        n_frames = int(round(duration * fps))
        record = settle_steps + np.round(np.arange(n_frames) / (fps * dt)).astype(int)
        n_steps = int(record[-1]) if n_frames else 0

        motion_t = np.arange(1, n_steps + 1) * dt - settle_steps * dt
        targets = self.joint_targets(control, np.maximum(motion_t, 0.0))
        targets[motion_t < 0] = 0.0

        inertia = self.inertia
        kp, kd, fl, eps = self.KP, self.damping, self.frictionloss, self.FRICTION_EPS
        q = np.zeros(3)
        v = np.zeros(3)
        frames = np.empty((n_frames, 3))
        k = 0
        while k < n_frames and record[k] == 0:
            frames[k] = q
            k += 1
        with np.errstate(over="ignore", invalid="ignore"):
            for step in range(n_steps):
                th = np.tanh(v / eps)
                friction = fl * th
                dfriction = (fl / eps) * (1.0 - th * th)
                v = (inertia * v / dt + kp * (targets[step] - q) - friction + dfriction * v) / (inertia / dt + kp * dt + kd + dfriction)
                q = q + dt * v
                if not np.all(np.isfinite(q)) or np.max(np.abs(q)) > self.GUARD:
                    raise DivergedSimulationError("Finger diverged at step {} (t={:.3f} s)".format(step + 1, (step + 1) * dt), step=step + 1, time=(step + 1) * dt)
                while k < n_frames and record[k] == step + 1:
                    frames[k] = q
                    k += 1
        return frames

    def run(self, control:ControlProfile, duration:float=10.0, fps:float=None, settle:float=2.0, camera:Camera=None, space:str="px") -> Trajectory:
        """
        Simulate and return the tip trajectory (1 point per frame)

        Parameters:
            control (ControlProfile): 2-channel finger profile (degrees)
            duration (float): Recorded seconds after the settle phase
            fps (float): Output frame rate (default 30)
            settle (float): Discarded hold time at the rest pose
            camera (Camera): Projection (default: the finger rig camera)
            space (str): `px` or `mm`
        """
        fps = fps or Platforms.FPS[Platforms.FINGER]
        camera = camera or CAMERAS[Platforms.FINGER]
        q = self.integrate(control, duration, fps, settle)
        tip = camera.project(self.forward_kinematics(q), space)
        return Trajectory(tip[:, None, :], fps, space, {
            "model": "finger",
            "params": {name: getattr(self, name) for name in self.TUNABLES},
            "control": control.to_dict(),
        })

    def __repr__(self):
        return "FingerModel({})".format(", ".join("{}={:.6g}".format(n, getattr(self, n)) for n in self.TUNABLES))

def run_finger(model:FingerModel, control:ControlProfile, duration:float=10.0, fps:float=30.0, **kwargs) -> Trajectory:
    """Tip trajectory of a finger model under a control profile (see `FingerModel.run`)"""
    return model.run(control, duration, fps, **kwargs)
