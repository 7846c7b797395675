"""High-fidelity finite-difference solvers.

1D viscous Burgers: first-order upwind advection + central diffusion,
forward Euler in time, periodic domain. 2D lid-driven cavity in stream
function / vorticity form: Gauss-Seidel Poisson solve, centered velocity
recovery, explicit Euler vorticity transport, Thom wall closure.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError, SolverDivergenceError
from .fields import Field, Grid1D, Grid2D, check_shape


@dataclass(frozen=True)
class BurgersParams:
    viscosity: float
    dt: float
    t_end: float

    def __post_init__(self):
        if self.viscosity <= 0:
            raise ConfigError(f"viscosity must be positive, got {self.viscosity}")
        if self.dt <= 0 or self.t_end < 0:
            raise ConfigError("dt must be positive and t_end non-negative")


@dataclass(frozen=True)
class CavityParams:
    reynolds: float
    dt: float
    t_end: float
    lid_speed: float = 1.0
    poisson_tol: float = 1e-6
    poisson_max_iter: int = 10_000

    def __post_init__(self):
        if self.reynolds <= 0:
            raise ConfigError(f"Reynolds number must be positive, got {self.reynolds}")
        if self.poisson_tol <= 0:
            raise ConfigError("poisson_tol must be positive")


def default_burgers_dt(u0: np.ndarray, grid: Grid1D, viscosity: float) -> float:
    """0.2 times the tighter of the advective and diffusive limits."""
    dx = grid.spacing
    umax = float(np.max(np.abs(u0)))
    adv = dx / umax if umax > 0 else np.inf
    diff = 0.5 * dx * dx / viscosity
    return 0.2 * min(adv, diff)


def default_cavity_dt(grid: Grid2D, reynolds: float, lid_speed: float = 1.0) -> float:
    h = grid.spacing
    return 0.2 * min(h / max(abs(lid_speed), 1e-12), 0.25 * reynolds * h * h)


def _check_burgers_stability(u: np.ndarray, grid: Grid1D, p: BurgersParams) -> None:
    dx = grid.spacing
    cfl = float(np.max(np.abs(u))) * p.dt / dx
    if cfl > 1.0 + 1e-12:
        raise ConfigError(f"CFL violated: max|u|*dt/dx = {cfl:.4g} > 1")
    dnum = p.viscosity * p.dt / (dx * dx)
    if dnum > 0.5 + 1e-12:
        raise ConfigError(f"diffusion limit violated: nu*dt/dx^2 = {dnum:.4g} > 0.5")


def burgers_hf_step(u: Field, grid: Grid1D, p: BurgersParams) -> Field:
    """One forward-Euler step of the upwind/central Burgers discretization."""
    check_shape(u, grid)
    _check_burgers_stability(u.values, grid, p)
    v = u.values
    dx = grid.spacing
    vp = np.roll(v, -1)   # u_{i+1}
    vm = np.roll(v, 1)    # u_{i-1}
    # upwind: backward difference where u_i >= 0, forward otherwise
    dudx = np.where(v >= 0.0, (v - vm) / dx, (vp - v) / dx)
    out = v - p.dt * v * dudx + p.viscosity * p.dt / (dx * dx) * (vp - 2.0 * v + vm)
    if not np.all(np.isfinite(out)):
        raise SolverDivergenceError("Burgers step produced non-finite values")
    return Field(out, u.time + p.dt)


def burgers_hf_solve(u0: Field, grid: Grid1D, p: BurgersParams,
                     snapshot_times=None) -> list[Field]:
    """Integrate to t_end; return snapshots at the nearest completed steps."""
    if snapshot_times is None:
        snapshot_times = [p.t_end]
    snapshot_times = list(snapshot_times)
    if sorted(snapshot_times) != snapshot_times:
        raise ConfigError("snapshot_times must be sorted")
    if snapshot_times and (snapshot_times[0] < -1e-12 or snapshot_times[-1] > p.t_end + 1e-12):
        raise ConfigError("snapshot_times must lie within [0, t_end]")

    n_steps = int(round(p.t_end / p.dt))
    # map each requested time to the nearest completed step (error <= dt/2)
    targets = [min(n_steps, int(round(t / p.dt))) for t in snapshot_times]
    out: list[Field] = []
    u = u0.copy()
    step = 0
    for t in targets:
        while step < t:
            u = burgers_hf_step(u, grid, p)
            step += 1
        out.append(u.copy())
    return out


@njit(cache=True)
def _gauss_seidel_sweeps(psi, omega, h2, tol, max_iter):
    """In-place lexicographic Gauss-Seidel for psi_xx + psi_yy = -omega.

    Returns (iterations, final max residual). psi boundary rows/cols are
    left untouched.
    """
    n = psi.shape[0]
    it = 0
    res = 0.0
    while it < max_iter:
        it += 1
        for i in range(1, n - 1):
            for j in range(1, n - 1):
                psi[i, j] = 0.25 * (psi[i + 1, j] + psi[i - 1, j]
                                    + psi[i, j + 1] + psi[i, j - 1]
                                    + h2 * omega[i, j])
        res = 0.0
        for i in range(1, n - 1):
            for j in range(1, n - 1):
                r = (psi[i + 1, j] + psi[i - 1, j] + psi[i, j + 1] + psi[i, j - 1]
                     - 4.0 * psi[i, j]) / h2 + omega[i, j]
                if abs(r) > res:
                    res = abs(r)
        if res <= tol:
            break
    return it, res


def poisson_gauss_seidel(omega: Field, psi_init: Field, grid: Grid2D,
                         tol: float = 1e-6, max_iter: int = 10_000):
    """Solve the Poisson equation for the stream function by Gauss-Seidel.

    Returns (psi, iterations, residual, converged). Walls of psi are pinned
    at their psi_init values (0 for the cavity). Non-convergence is flagged,
    not fatal.
    """
    check_shape(omega, grid)
    check_shape(psi_init, grid)
    psi = psi_init.values.copy()
    h2 = grid.spacing ** 2
    if not np.any(omega.values) and not np.any(psi[1:-1, 1:-1]):
        return Field(psi, omega.time), 0, 0.0, True
    it, res = _gauss_seidel_sweeps(psi, omega.values, h2, tol, max_iter)
    return Field(psi, omega.time), int(it), float(res), bool(res <= tol)


def velocity_from_streamfunction(psi: Field, grid: Grid2D, lid_speed: float = 1.0):
    """Centered-difference velocities u = dpsi/dy, v = -dpsi/dx.

    Boundary values come from the cavity BCs: u = lid_speed on the lid
    (j = n-1), zero elsewhere; v = 0 on all walls.
    """
    check_shape(psi, grid)
    n = grid.n
    h = grid.spacing
    s = psi.values
    u = np.zeros((n, n))
    v = np.zeros((n, n))
    u[1:-1, 1:-1] = (s[1:-1, 2:] - s[1:-1, :-2]) / (2.0 * h)
    v[1:-1, 1:-1] = -(s[2:, 1:-1] - s[:-2, 1:-1]) / (2.0 * h)
    u[:, -1] = lid_speed
    u[0, -1] = u[-1, -1] = 0.0  # corner nodes belong to the side walls
    return Field(u, psi.time), Field(v, psi.time)


def thom_wall_vorticity(omega: np.ndarray, psi: np.ndarray, h: float,
                        lid_speed: float = 1.0) -> None:
    """Overwrite boundary vorticity in place with Thom's first-order closure.

    omega_wall = -2 (psi_adj - psi_wall)/h^2 - 2 U_wall/h, with U_wall the
    tangential wall speed (lid_speed on the lid, 0 on the other walls).
    Corner nodes take the top/bottom row values.
    """
    h2 = h * h
    omega[0, :] = -2.0 * (psi[1, :] - psi[0, :]) / h2        # left wall
    omega[-1, :] = -2.0 * (psi[-2, :] - psi[-1, :]) / h2     # right wall
    omega[:, 0] = -2.0 * (psi[:, 1] - psi[:, 0]) / h2        # bottom wall
    omega[:, -1] = (-2.0 * (psi[:, -2] - psi[:, -1]) / h2    # lid
                    - 2.0 * lid_speed / h)


def cavity_hf_solve(p: CavityParams, grid: Grid2D, snapshot_times):
    """Fractional-step cavity solve from a quiescent state.

    Per step: Poisson solve for psi, centered velocity recovery, explicit
    Euler update of the vorticity transport equation (central differences
    for advection and diffusion), then Thom boundary closure. Returns a
    list of (omega, psi, u, v) Field tuples at the requested times.
    """
    snapshot_times = list(snapshot_times)
    if sorted(snapshot_times) != snapshot_times:
        raise ConfigError("snapshot_times must be sorted")
    if snapshot_times and (snapshot_times[0] < -1e-12
                           or snapshot_times[-1] > p.t_end + 1e-12):
        raise ConfigError("snapshot_times must lie within [0, t_end]")
    n = grid.n
    h = grid.spacing
    omega = np.zeros((n, n))
    psi = np.zeros((n, n))
    n_steps = int(round(p.t_end / p.dt))
    targets = [min(n_steps, int(round(t / p.dt))) for t in snapshot_times]

    def pack(step):
        t = step * p.dt
        psi_f = Field(psi.copy(), t)
        u_f, v_f = velocity_from_streamfunction(psi_f, grid, p.lid_speed)
        return Field(omega.copy(), t), psi_f, u_f, v_f

    out = []
    step = 0
    for tgt in targets:
        while step < tgt:
            psi_f, _, _, _ = poisson_gauss_seidel(
                Field(omega, step * p.dt), Field(psi, step * p.dt), grid,
                tol=p.poisson_tol, max_iter=p.poisson_max_iter)
            psi = psi_f.values
            u_f, v_f = velocity_from_streamfunction(psi_f, grid, p.lid_speed)
            u, v = u_f.values, v_f.values
            w = omega
            adv = np.zeros_like(w)
            lap = np.zeros_like(w)
            adv[1:-1, 1:-1] = (u[1:-1, 1:-1] * (w[2:, 1:-1] - w[:-2, 1:-1])
                               + v[1:-1, 1:-1] * (w[1:-1, 2:] - w[1:-1, :-2])) / (2.0 * h)
            lap[1:-1, 1:-1] = (w[2:, 1:-1] + w[:-2, 1:-1] + w[1:-1, 2:]
                               + w[1:-1, :-2] - 4.0 * w[1:-1, 1:-1]) / (h * h)
            omega = w + p.dt * (-adv + lap / p.reynolds)
            thom_wall_vorticity(omega, psi, h, p.lid_speed)
            step += 1
            if not np.all(np.isfinite(omega)):
                raise SolverDivergenceError(
                    f"cavity vorticity diverged at step {step}", step=step)
        out.append(pack(step))
    return out
