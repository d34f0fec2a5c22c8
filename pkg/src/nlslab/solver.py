"""Pseudospectral split-step integrator with blow-up detection.

The equation i du/dt + Lap(u) = lam |u|^p is evolved on a periodic box
[-L, L)^n as du/dt = i Lap(u) - i lam |u|^p with Strang splitting:

  * linear half step: exact Fourier multiplier exp(-i |xi|^2 dt / 2)
  * nonlinear full step: one classical RK4 step of du/dt = -i lam |u|^p
    (no closed form exists for general complex lam because the
    nonlinearity is not gauge invariant)
  * linear half step again.

The time step adapts to the amplitude, dt = min(dt0, c_cfl / max(1,
||u||_inf^(p-1))), and a run ends when any of three thresholds fires:
sup amplitude above amp_threshold, L2 mass above mass_factor times its
initial value, or dt underflow.  Runs that exhaust max_steps are
reported as censored, not failed.  A boundary monitor records the
largest amplitude seen on the outermost 5 percent of the box; a run is
boundary clean when that peak stays below 1e-6 times the overall peak,
so nothing dynamically relevant ever reached the edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from .exponents import CaseBranch, CaseTag, ProblemParams

FFT_THREADS = 1  # numpy's pocketfft is single threaded and bitwise reproducible

REASON_AMPLITUDE = "AMPLITUDE_THRESHOLD"
REASON_L2 = "L2_THRESHOLD"
REASON_UNDERFLOW = "STEP_UNDERFLOW"
REASON_CENSORED = "CENSORED"


class DataConstructionError(ValueError):
    """Initial data failed its pointwise admissibility check."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L)^n, n in {1, 2}, N points per axis."""

    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.n!r}")
        if self.N < 64 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 64, got {self.N!r}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L!r}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @cached_property
    def radii(self) -> np.ndarray:
        """|x| at every grid point."""
        if self.n == 1:
            return np.abs(self.axis)
        xx, yy = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.sqrt(xx * xx + yy * yy)

    @cached_property
    def ksq(self) -> np.ndarray:
        """|xi|^2 for the discrete wavenumbers pi j / L."""
        k = 2.0 * math.pi * np.fft.fftfreq(self.N, d=self.dx)
        if self.n == 1:
            return k * k
        kx, ky = np.meshgrid(k, k, indexing="ij")
        return kx * kx + ky * ky

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """Points in the outermost 5 percent of the box (sup-norm band)."""
        cut = 0.95 * self.L
        if self.n == 1:
            return np.abs(self.axis) >= cut
        xx, yy = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.maximum(np.abs(xx), np.abs(yy)) >= cut

    def integrate(self, values: np.ndarray):
        return self.dx ** self.n * values.sum()

    def fft(self, u: np.ndarray) -> np.ndarray:
        return np.fft.fft(u) if self.n == 1 else np.fft.fft2(u)

    def ifft(self, u: np.ndarray) -> np.ndarray:
        return np.fft.ifft(u) if self.n == 1 else np.fft.ifft2(u)


@dataclass
class ComplexField:
    """A complex state on a grid at a moment in time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        expected = (self.grid.N,) * self.grid.n
        if self.values.shape != expected:
            raise ValueError(f"field shape {self.values.shape} != grid {expected}")
        if not np.iscomplexobj(self.values):
            self.values = self.values.astype(np.complex128)

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy(), self.time)


def observables(values: np.ndarray, grid: Grid) -> Tuple[float, float]:
    """(L2 mass, sup amplitude) in one pass."""
    a2 = values.real ** 2 + values.imag ** 2
    mass = math.sqrt(float(grid.integrate(a2)))
    linf = math.sqrt(float(a2.max()))
    return mass, linf


# ---------------------------------------------------------------------------
# initial data


@dataclass(frozen=True)
class InitialDataSpec:
    """Algebraically decaying profile with tail rate k.

    The profile scale(2)^(k/2) (1+|x|^2)^(-k/2) dominates |x|^(-k)
    outside the unit ball; the case branch decides whether it is placed
    in the real or imaginary part of f and with which sign, so that the
    data pairing J_R comes out positive.
    """

    k: float
    case: CaseTag
    amplitude_scale: float = 1.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k!r}")
        if not self.amplitude_scale >= 1.0:
            raise ValueError(
                f"amplitude_scale must be >= 1, got {self.amplitude_scale!r}")


def profile_radial(spec: InitialDataSpec, r):
    """The positive radial profile shared by all four sign branches."""
    r = np.asarray(r, dtype=float)
    out = (spec.amplitude_scale * 2.0 ** (spec.k / 2.0)
           * (1.0 + r * r) ** (-spec.k / 2.0))
    return out if out.shape else float(out)


def jr_radial_density(spec: InitialDataSpec, lam: complex, r):
    """Case-selected signed component of f entering the data pairing.

    All four branches reduce to profile * max(1, 1/lambda_eff), which is
    positive and dominates |x|^(-k) outside radius 1 both on its own and
    after weighting by lambda_eff.
    """
    lam_eff = spec.case.lambda_eff(lam)
    if lam_eff == 0:
        raise DataConstructionError("selected coefficient component vanishes")
    return profile_radial(spec, r) * max(1.0, 1.0 / lam_eff)


def initial_profile(spec: InitialDataSpec, grid: Grid,
                    params: ProblemParams) -> np.ndarray:
    """The complex profile f on the grid (without the eps factor).

    The selected component ends up as profile * max(1, 1/lambda_eff),
    so it dominates |x|^(-k) outside the unit ball both raw and after
    weighting by the selected coefficient.  Raises DataConstructionError
    if the realized arrays violate either bound at a grid point.
    """
    lam1, lam2 = params.lambda_re, params.lambda_im
    branch = spec.case.branch
    g = profile_radial(spec, grid.radii)
    if branch in (CaseBranch.LAMBDA1_POS, CaseBranch.LAMBDA1_NEG):
        if lam1 == 0:
            raise DataConstructionError("case needs a nonzero real part of lam")
        f = (-1j / lam1) * max(1.0, abs(lam1)) * g
        pairing = -lam1 * f.imag
    else:
        if lam2 == 0:
            raise DataConstructionError("case needs a nonzero imaginary part of lam")
        f = (1.0 / lam2) * max(1.0, abs(lam2)) * g.astype(np.complex128)
        pairing = lam2 * f.real
    lam_eff = spec.case.lambda_eff(params.lam)
    outside = grid.radii > 1.0
    required = grid.radii[outside] ** (-spec.k)
    checked = pairing * min(1.0, 1.0 / lam_eff)
    if not np.all(checked[outside] >= required * (1.0 - 1e-9)):
        worst = float((checked[outside] / required).min())
        raise DataConstructionError(
            f"pointwise data bound violated (min ratio {worst:.3e})")
    return f


def make_initial_data(spec: InitialDataSpec, grid: Grid,
                      params: ProblemParams) -> ComplexField:
    """u(0, x) = eps * f(x) on the grid."""
    f = initial_profile(spec, grid, params)
    return ComplexField(grid, params.epsilon * f, time=0.0)


def constant_field(grid: Grid, value: complex) -> ComplexField:
    """Spatially constant state; reduces the solver to a pointwise ODE."""
    return ComplexField(grid, np.full((grid.N,) * grid.n, value,
                                      dtype=np.complex128), time=0.0)


# ---------------------------------------------------------------------------
# stepping


def _abs_pow(values: np.ndarray, p: float) -> np.ndarray:
    a2 = values.real ** 2 + values.imag ** 2
    if p == 2.0:
        return a2
    return a2 ** (0.5 * p)


def linear_step(values: np.ndarray, grid: Grid, dt: float) -> np.ndarray:
    """Exact free propagator: each mode gains the phase exp(-i |xi|^2 dt)."""
    return grid.ifft(np.exp(-1j * grid.ksq * dt) * grid.fft(values))


def nonlinear_step(values: np.ndarray, dt: float, lam: complex,
                   p: float) -> np.ndarray:
    """One RK4 step of the pointwise ODE du/dt = -i lam |u|^p."""
    c = -1j * lam

    def rhs(u):
        return c * _abs_pow(u, p)

    k1 = rhs(values)
    k2 = rhs(values + 0.5 * dt * k1)
    k3 = rhs(values + 0.5 * dt * k2)
    k4 = rhs(values + dt * k3)
    return values + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def strang_step(values: np.ndarray, grid: Grid, dt: float, lam: complex,
                p: float) -> np.ndarray:
    """Half linear, full nonlinear, half linear."""
    u = linear_step(values, grid, 0.5 * dt)
    u = nonlinear_step(u, dt, lam, p)
    return linear_step(u, grid, 0.5 * dt)


def evolve_fixed_steps(state: ComplexField, dt: float, n_steps: int,
                       lam: complex, p: float) -> ComplexField:
    """Advance n_steps at fixed dt; used by convergence and mass checks."""
    u = state.values
    for _ in range(n_steps):
        u = strang_step(u, state.grid, dt, lam, p)
    return ComplexField(state.grid, u, state.time + n_steps * dt)


# ---------------------------------------------------------------------------
# lifespan measurement


@dataclass(frozen=True)
class SolverSettings:
    dt0: float = 0.01
    c_cfl: float = 0.1
    amp_threshold: float = 1e6
    mass_factor: float = 1e3
    dt_min: float = 1e-12
    snapshot_stride: int = 0     # 0 disables snapshots beyond t = 0
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.dt0 > 0 and self.c_cfl > 0 and self.dt_min > 0):
            raise ValueError("dt0, c_cfl, dt_min must be positive")
        if self.snapshot_stride < 0 or self.max_steps < 1:
            raise ValueError("bad snapshot_stride or max_steps")


@dataclass
class LifespanRecord:
    """Outcome of one blow-up measurement."""

    epsilon: float
    T_detected: float
    reason: str
    censored: bool
    steps: int
    N: int
    L: float
    dt0: float
    mass_initial: float
    sup_peak: float
    boundary_peak: float
    boundary_clean: bool
    fft_threads: int = FFT_THREADS
    refined_agreement: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "T_detected": self.T_detected,
            "reason": self.reason,
            "censored": self.censored,
            "steps": self.steps,
            "N": self.N,
            "L": self.L,
            "dt0": self.dt0,
            "mass_initial": self.mass_initial,
            "sup_peak": self.sup_peak,
            "boundary_peak": self.boundary_peak,
            "boundary_clean": self.boundary_clean,
            "fft_threads": self.fft_threads,
            "refined_agreement": self.refined_agreement,
        }


@dataclass
class TrajectoryLog:
    """Snapshots of one run plus the metadata needed to re-weigh it."""

    grid: Grid
    times: list
    fields: list
    epsilon: float
    lam: complex
    p: float
    data: Optional[InitialDataSpec] = None

    def end_time(self) -> float:
        return self.times[-1] if self.times else 0.0

    def field_at(self, t: float) -> np.ndarray:
        """Linear interpolation between stored snapshots."""
        times = self.times
        if not times:
            raise ValueError("trajectory holds no snapshots")
        if t <= times[0]:
            return self.fields[0]
        if t >= times[-1]:
            return self.fields[-1]
        j = int(np.searchsorted(times, t))
        t0, t1 = times[j - 1], times[j]
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * self.fields[j - 1] + w * self.fields[j]


def evolve_until_blowup(state: ComplexField, settings: SolverSettings,
                        lam: complex, p: float,
                        epsilon: float = float("nan"),
                        data: Optional[InitialDataSpec] = None,
                        ) -> Tuple[LifespanRecord, TrajectoryLog]:
    """Run until a blow-up threshold fires or max_steps is exhausted.

    The returned record carries the detection time and reason; censored
    runs report the time reached.  Snapshots are appended every
    snapshot_stride steps (plus the initial and final states) when the
    stride is positive.
    """
    grid = state.grid
    u = state.values.copy()
    t = state.time
    bmask = grid.boundary_mask

    mass0, linf = observables(u, grid)
    if not (math.isfinite(mass0) and mass0 > 0):
        raise ValueError("initial state must have positive finite mass")
    sup_peak = linf
    boundary_peak = float(np.abs(u[bmask]).max())

    stride = settings.snapshot_stride
    times, fields = [t], [u.copy()]

    reason = REASON_CENSORED
    censored = True
    steps = 0
    while steps < settings.max_steps:
        dt = min(settings.dt0, settings.c_cfl / max(1.0, linf ** (p - 1.0)))
        if dt < settings.dt_min:
            reason, censored = REASON_UNDERFLOW, False
            break
        u = strang_step(u, grid, dt, lam, p)
        t += dt
        steps += 1

        mass, linf = observables(u, grid)
        if not math.isfinite(linf):
            # Overflow inside a single step counts as an amplitude trigger.
            reason, censored = REASON_AMPLITUDE, False
            break
        sup_peak = max(sup_peak, linf)
        boundary_peak = max(boundary_peak, float(np.abs(u[bmask]).max()))
        if stride > 0 and steps % stride == 0:
            times.append(t)
            fields.append(u.copy())
        if linf > settings.amp_threshold:
            reason, censored = REASON_AMPLITUDE, False
            break
        if mass > settings.mass_factor * mass0:
            reason, censored = REASON_L2, False
            break

    if stride > 0 and times[-1] < t and math.isfinite(float(np.abs(u).max())):
        times.append(t)
        fields.append(u.copy())

    boundary_clean = boundary_peak < 1e-6 * sup_peak
    record = LifespanRecord(
        epsilon=epsilon, T_detected=t, reason=reason, censored=censored,
        steps=steps, N=grid.N, L=grid.L, dt0=settings.dt0,
        mass_initial=mass0, sup_peak=sup_peak, boundary_peak=boundary_peak,
        boundary_clean=boundary_clean)
    traj = TrajectoryLog(grid=grid, times=times, fields=fields,
                         epsilon=epsilon, lam=lam, p=p, data=data)
    return record, traj
