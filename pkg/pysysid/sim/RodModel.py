import collections
import math
import numpy as np
from ..CalibError import BoundsError, DivergedSimulationError
from ..Control import ControlProfile
from ..Platforms import Platforms
from ..Trajectory import Trajectory, resample_polyline
from .Camera import Camera, CAMERAS

from typing import Callable, Mapping

RodRun = collections.namedtuple('RodRun', 'times positions energy')
"""
NamedTuple returned by `RodModel.integrate`

**Properties:**
- `times` - Motion time of every recorded frame (s)
- `positions` - World positions `(frames, N + 1, 2)` in metres, base node first
- `energy` - Total mechanical energy per frame (J), or None if not recorded
"""

class RodModel:
    """
    Planar discrete elastic rod hanging from an actuated base.

    `N` free nodes below a base node fixed at the origin. The base joint angle is the control signal;
    it is imposed through a ghost node one segment above the base. Forces: axial springs, bending on
    discrete second differences, mass-proportional damping, gravity and (optionally) quadratic fluid drag.
    Steps are linearly implicit Euler at 1 ms.
    """

    N_SEGMENTS = 20
    LENGTH = 0.2
    """Rest length (m)"""
    RADIUS = 0.01
    """Cross-section radius (m)"""
    GRAVITY = 9.81
    DT = 1e-3
    OUTPUT_POINTS = 10
    """Arc-length resampled points per output frame"""
    GUARD = 1e3
    """Node positions beyond this many rod lengths count as diverged"""
    TUNABLES = ("youngs_modulus", "rod_density", "poisson_ratio", "damping_const", "fluid_density", "perp_drag", "tang_drag")

    def __init__(self, youngs_modulus:float=2e5, rod_density:float=1050.0, poisson_ratio:float=0.5, damping_const:float=3.0,
                 fluid_density:float=0.0, perp_drag:float=1.0, tang_drag:float=0.1,
                 n_segments:int=N_SEGMENTS, length:float=LENGTH, radius:float=RADIUS):
        self.youngs_modulus = float(youngs_modulus)
        self.rod_density = float(rod_density)
        self.poisson_ratio = float(poisson_ratio)
        self.damping_const = float(damping_const)
        """Damping rate (1/s). Negative values inject energy"""
        self.fluid_density = float(fluid_density)
        """0 disables drag"""
        self.perp_drag = float(perp_drag)
        self.tang_drag = float(tang_drag)
        self.n_segments = int(n_segments)
        self.length = float(length)
        self.radius = float(radius)
        if self.youngs_modulus <= 0 or self.rod_density <= 0:
            raise BoundsError("youngs_modulus and rod_density must be > 0")
        if not -1.0 < self.poisson_ratio <= 0.5:
            raise BoundsError("poisson_ratio must lie in (-1, 0.5], got {}".format(self.poisson_ratio))
        if self.n_segments < 3:
            raise BoundsError("A rod needs at least 3 segments")
        self._bending = None

    @classmethod
    def from_params(cls, params:Mapping[str, float]) -> "RodModel":
        """Build from a mapping. Missing tunables keep their defaults"""
        return cls(**{name: params[name] for name in cls.TUNABLES if name in params})

    @property
    def ds(self) -> float:
        """Rest segment length"""
        return self.length / self.n_segments

    @property
    def node_mass(self) -> float:
        return self.rod_density * math.pi * self.radius ** 2 * self.ds

    @property
    def k_stretch(self) -> float:
        """Axial spring constant G A / ds"""
        shear = self.youngs_modulus / (2 * (1 + self.poisson_ratio))
        return shear * math.pi * self.radius ** 2 / self.ds

    @property
    def k_bend(self) -> float:
        """Bending constant E I / ds^3"""
        return self.youngs_modulus * math.pi * self.radius ** 4 / 4 / self.ds ** 3

    def _second_difference(self) -> np.ndarray:
        """D with (D x)_j = x_j - 2 x_(j+1) + x_(j+2) over [ghost, base, free nodes]"""
        n = self.n_segments
        d = np.zeros((n, n + 2))
        j = np.arange(n)
        d[j, j] = 1.0
        d[j, j + 1] = -2.0
        d[j, j + 2] = 1.0
        return d

    def _bending_matrix(self) -> np.ndarray:
        if self._bending is None:
            d = self._second_difference()
            self._bending = self.k_bend * d.T @ d
        return self._bending

    def ghost(self, angle:float) -> np.ndarray:
        """Ghost node position for base angle `angle` (0 = hanging straight down)"""
        return -self.ds * np.array([math.sin(angle), -math.cos(angle)])

    def rest_state(self) -> np.ndarray:
        """
        Static hanging equilibrium at base angle 0

        Returns:
            (np.ndarray): Free node positions (N, 2)
        """
        n = self.n_segments
        g = np.zeros((n, n + 2))
        s = np.arange(n)
        g[s, s + 1] = -1.0
        g[s, s + 2] = 1.0
        d = self._second_difference()
        y_fixed = np.array([self.ds, 0.0])
        gf, gp = g[:, 2:], g[:, :2]
        df, dp = d[:, 2:], d[:, :2]
        lhs = self.k_stretch * gf.T @ gf + self.k_bend * df.T @ df
        rhs = -self.k_stretch * gf.T @ (gp @ y_fixed + self.ds) - self.k_bend * df.T @ (dp @ y_fixed) - self.node_mass * self.GRAVITY
        y = np.linalg.solve(lhs, rhs)
        return np.stack([np.zeros(n), y], axis=1)

    def _stretch(self, x:np.ndarray):
        """Segment tangents, lengths and stiffness blocks for full positions [base, free]"""
        e = x[1:] - x[:-1]
        l = np.linalg.norm(e, axis=1)
        t = e / l[:, None]
        ratio = self.ds / l
        outer = t[:, :, None] * t[:, None, :]
        blocks = self.k_stretch * (np.maximum(0.0, 1.0 - ratio)[:, None, None] * np.eye(2) + ratio[:, None, None] * outer)
        return t, l, outer, blocks

    def energy(self, x:np.ndarray, v:np.ndarray, angle:float) -> float:
        """Kinetic + stretch + bending + gravity energy of free positions x and velocities v"""
        full = np.vstack([self.ghost(angle), np.zeros(2), x])
        l = np.linalg.norm(full[2:] - full[1:-1], axis=1)
        bend = self._second_difference() @ full
        m = self.node_mass
        return float(0.5 * m * np.sum(v * v) + 0.5 * self.k_stretch * np.sum((l - self.ds) ** 2)
                     + 0.5 * self.k_bend * np.sum(bend * bend) + m * self.GRAVITY * np.sum(x[:, 1]))

    def integrate(self, angles:Callable[[np.ndarray], np.ndarray], duration:float, fps:float, settle:float=2.0, environment:bool=None, record_energy:bool=False) -> RodRun:
        """
        Integrate from the static equilibrium and sample node positions

        Parameters:
            angles (callable): Base angle in rad as a function of motion time (vectorized). Held at 0 during settle
            duration (float): Recorded seconds after the settle phase
            fps (float): Frame rate of the recording
            settle (float): Discarded seconds before motion starts
            environment (bool): Apply fluid drag (default: when fluid_density > 0)
            record_energy (bool): Also return the total energy per frame

        Returns:
            (RodRun): Frames with the base node first
        """
        if not duration > 0:
            raise ValueError("duration must be > 0")
        n, dt, m = self.n_segments, self.DT, self.node_mass
        settle_steps = int(round(settle / dt))
        n_frames = int(round(duration * fps))
        record = settle_steps + np.round(np.arange(n_frames) / (fps * dt)).astype(int)
        n_steps = int(record[-1]) if n_frames else 0
        motion_t = np.arange(0, n_steps + 1) * dt - settle_steps * dt
        theta = np.where(motion_t < 0, 0.0, np.asarray(angles(np.maximum(motion_t, 0.0)), dtype=float))

        drag = self.fluid_density > 0 if environment is None else bool(environment)
        c0 = 0.5 * self.fluid_density * 2 * self.radius * self.ds
        bending = self._bending_matrix()
        b_ff, b_fp = bending[2:, 2:], bending[2:, :2]
        base_matrix = m * (1.0 + dt * self.damping_const) * np.eye(2 * n) + dt * dt * np.kron(b_ff, np.eye(2))
        gravity = np.array([0.0, -m * self.GRAVITY])
        idx = np.arange(n)
        eye = np.eye(2)

        x = self.rest_state()
        v = np.zeros((n, 2))
        positions = np.empty((n_frames, n + 1, 2))
        energy = np.empty(n_frames) if record_energy else None

        def store(k, step):
            positions[k, 0] = 0.0
            positions[k, 1:] = x
            if record_energy:
                energy[k] = self.energy(x, v, theta[step])

        k = 0
        while k < n_frames and record[k] == 0:
            store(k, 0)
            k += 1
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            for step in range(1, n_steps + 1):
                prescribed = np.vstack([self.ghost(theta[step]), np.zeros(2)])
                full = np.vstack([np.zeros(2), x])
                t, l, outer, blocks = self._stretch(full)
                tension = self.k_stretch * (l - self.ds)[:, None] * t
                force = -tension
                force[:-1] += tension[1:]
                force -= b_ff @ x + b_fp @ prescribed
                force += gravity
                force -= self.damping_const * m * v

                dv_rel = v - np.vstack([np.zeros(2), v[:-1]])
                w = np.einsum('nij,nj->ni', blocks, dv_rel)
                kv = -w
                kv[:-1] += w[1:]
                kv -= b_ff @ v

                matrix = base_matrix.copy()
                view = matrix.reshape(n, 2, n, 2)
                diag = dt * dt * blocks
                diag[:-1] += dt * dt * blocks[1:]
                if drag:
                    vt = np.einsum('ni,ni->n', v, t)
                    v_par = vt[:, None] * t
                    v_perp = v - v_par
                    speed_perp = np.linalg.norm(v_perp, axis=1)
                    force -= c0 * (self.perp_drag * speed_perp[:, None] * v_perp + self.tang_drag * np.abs(vt)[:, None] * v_par)
                    diag += dt * c0 * (2 * self.perp_drag * speed_perp[:, None, None] * (eye - outer) + 2 * self.tang_drag * np.abs(vt)[:, None, None] * outer)
                view[idx, :, idx, :] += diag
                off = -dt * dt * blocks[1:]
                view[idx[:-1], :, idx[1:], :] += off
                view[idx[1:], :, idx[:-1], :] += off

                rhs = dt * (force + dt * kv)
                try:
                    dv = np.linalg.solve(matrix, rhs.reshape(-1)).reshape(n, 2)
                except np.linalg.LinAlgError:
                    dv = np.full((n, 2), np.nan)
                v = v + dv
                x = x + dt * v
                if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > self.GUARD * self.length:
                    raise DivergedSimulationError("Rod diverged at step {} (t={:.3f} s)".format(step, step * dt), step=step, time=step * dt)
                while k < n_frames and record[k] == step:
                    store(k, step)
                    k += 1
        return RodRun(np.arange(n_frames) / fps, positions, energy)

    def run(self, control:ControlProfile, duration:float=10.0, fps:float=None, settle:float=2.0, camera:Camera=None, space:str="px", environment:bool=None, setting:str=None) -> Trajectory:
        """
        Simulate and return the centerline trajectory (10 points per frame, base first)

        Parameters:
            control (ControlProfile): 1-channel tentacle profile (rad)
            duration (float): Recorded seconds after the settle phase
            fps (float): Output frame rate (default 25)
            settle (float): Discarded hold time at the rest pose
            camera (Camera): Projection (default: the camera of `setting`)
            space (str): `px` or `mm`
            environment (bool): Apply fluid drag (default: when fluid_density > 0)
            setting (str): `tentacle_air` (default) or `tentacle_water`
        """
        setting = setting or (Platforms.TENTACLE_WATER if self.fluid_density > 0 else Platforms.TENTACLE_AIR)
        fps = fps or Platforms.FPS[setting]
        camera = camera or CAMERAS[setting]
        if len(control.channels) != 1:
            raise BoundsError("The tentacle needs a 1-channel control profile")
        run = self.integrate(lambda t: control.signal(t)[..., 0], duration, fps, settle, environment)
        points = np.stack([resample_polyline(p, self.OUTPUT_POINTS) for p in run.positions])
        return Trajectory(camera.project(points, space), fps, space, {
            "model": "rod",
            "params": {name: getattr(self, name) for name in self.TUNABLES},
            "control": control.to_dict(),
        })

    def __repr__(self):
        return "RodModel({})".format(", ".join("{}={:.6g}".format(n, getattr(self, n)) for n in self.TUNABLES))

def run_rod(model:RodModel, control:ControlProfile, duration:float=10.0, fps:float=25.0, **kwargs) -> Trajectory:
    """Centerline trajectory of a rod model under a control profile (see `RodModel.run`)"""
    return model.run(control, duration, fps, **kwargs)
