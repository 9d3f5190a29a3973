"""Geometric-optics wave packet: transported envelope, accumulated
coefficient phase, the approximate solution, its PDE defect, and the
envelope derivative-norm scaling checks.

Construction summary. A probe is the small-amplitude modulated packet

    v(t, x) = eps^p * a(eps^(2n) (t+T), eps (x + T xi)) * exp(i (x.xi + t/(2n)))

whose envelope a is transported along straight characteristics with unit
modulus factor and accumulates a phase proportional to the running line
integral of the localized coefficient along the probe direction. After
substitution the accumulated phase in lab coordinates collapses to

    phi(t, x) = -G(eps^(2p) |a0(z)|^2) * S(t, x),
    z = eps (x + (t + 2T) xi),    S(t, x) = int_0^(t+T) beta(x + s xi) ds,

which is how this module evaluates packets on grids (the profile-frame
segment integral differs from S by an exact eps^(2n) scale factor that
cancels against the phase prefactor).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, ThresholdError, ValidationError
from .fitting import FitResult, fit_loglog
from .grid import ComplexField, Grid, derivative_sum_field, fl1_norm
from .nonlinearity import AnalyticNonlinearity, BumpCoefficient

DEFECT_TIME_STEP_FRACTION = 1e-3   # time-derivative stencil step as a fraction of T


@dataclass(frozen=True)
class ProbeParams:
    """One wave-packet experiment: dispersion order, amplitude exponent,
    scale, horizon, direction, and the initial envelope.

    The envelope is the Gaussian a0(z) = amplitude * exp(-|z - center|^2 /
    (2 width^2)); amplitude and width are in rescaled (envelope) units.
    """

    n: int
    p: float
    eps: float
    T: float
    xi: np.ndarray
    a0_amplitude: float = 1.0
    a0_width: float = 1.0
    a0_center: np.ndarray | None = None

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        object.__setattr__(self, "xi", xi)
        center = (np.zeros_like(xi) if self.a0_center is None
                  else np.atleast_1d(np.asarray(self.a0_center, dtype=float)))
        object.__setattr__(self, "a0_center", center)
        if self.n < 1 or int(self.n) != self.n:
            raise ValidationError(f"dispersion order must be a positive integer, got {self.n}")
        if not self.p > self.n:
            raise ValidationError(
                f"amplitude exponent requires p > n, got p = {self.p}, n = {self.n}")
        if not 0.0 < self.eps < 1.0:
            raise ValidationError(f"scale eps must lie in (0, 1), got {self.eps}")
        if not self.T > 0:
            raise ValidationError(f"horizon T must be positive, got {self.T}")
        if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
            raise ValidationError(f"direction must be a unit vector, |xi| = {np.linalg.norm(xi)}")
        if center.shape != xi.shape:
            raise ValidationError("envelope center dimension does not match direction")
        if self.a0_amplitude < 0 or not self.a0_width > 0:
            raise ValidationError("envelope amplitude must be >= 0 and width positive")

    @property
    def d(self) -> int:
        return self.xi.shape[0]

    def a0(self, z: np.ndarray) -> np.ndarray:
        """Initial envelope at rescaled points z of shape (..., d)."""
        rel = np.asarray(z, dtype=float) - self.a0_center
        return self.a0_amplitude * np.exp(-np.sum(rel * rel, axis=-1)
                                          / (2.0 * self.a0_width**2))

    def validate_against(self, g: AnalyticNonlinearity,
                         bump: BumpCoefficient | None = None) -> None:
        """Hypothesis checks that need the model: packet-size admissibility
        eps^(2p) A^2 < R/4, support radius < horizon, matching dimensions."""
        peak = self.eps ** (2 * self.p) * self.a0_amplitude**2
        if not peak < g.radius / 4.0:
            raise ValidationError(
                f"packet admissibility requires eps^(2p) A^2 < R/4; "
                f"got {peak:.3e} vs {g.radius / 4.0:.3e}")
        if bump is not None:
            if bump.d != self.d:
                raise ValidationError("bump dimension does not match probe dimension")
            if not bump.is_zero() and not bump.support_radius < self.T:
                raise ValidationError(
                    f"support radius must satisfy r < T, got r = "
                    f"{bump.support_radius}, T = {self.T}")

    def replace(self, **kw) -> "ProbeParams":
        data = dict(n=self.n, p=self.p, eps=self.eps, T=self.T, xi=self.xi,
                    a0_amplitude=self.a0_amplitude, a0_width=self.a0_width,
                    a0_center=self.a0_center)
        data.update(kw)
        return ProbeParams(**data)


def segment_integral(params: ProbeParams, bump: BumpCoefficient,
                     t: float, x) -> float:
    """Running coefficient integral I(t, x) in the envelope frame:

        I(t, x) = int_0^t beta(eps^(-1) x + eps^(-2n) (t - s) xi - T xi) ds,

    computed after the substitution sigma = eps^(-2n)(t - s) as
    eps^(2n) * int_0^(eps^(-2n) t) beta(q + sigma xi) dsigma with
    q = eps^(-1) x - T xi, by adaptive quadrature on the support-clipped
    segment. Nondecreasing in t because the coefficient is nonnegative.
    """
    if t < 0:
        raise ValidationError("segment integral is defined for t >= 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if bump.is_zero() or t == 0.0:
        return 0.0
    eps = params.eps
    scale = eps ** (2 * params.n)
    q = x / eps - params.T * params.xi
    upper = t / scale
    lo, hi = bump.clip_to_support(q[None, :], params.xi,
                                  np.array([0.0]), np.array([upper]))
    if hi[0] <= lo[0]:
        return 0.0
    val, _ = quad(lambda s: float(bump(q + s * params.xi)), lo[0], hi[0],
                  epsabs=1e-13, epsrel=1e-12, limit=200)
    return scale * val


@dataclass
class PhaseIntegralTable:
    """Precomputed running integrals I(t_i, x_j) on a time-point lattice."""

    times: np.ndarray            # envelope-frame times, shape (M,)
    points: np.ndarray           # envelope-frame points, shape pts_shape + (d,)
    values: np.ndarray           # shape (M,) + pts_shape

    @classmethod
    def build(cls, params: ProbeParams, bump: BumpCoefficient,
              times, points) -> "PhaseIntegralTable":
        times = np.asarray(times, dtype=float)
        points = np.asarray(points, dtype=float)
        scale = params.eps ** (2 * params.n)
        q = points / params.eps - params.T * params.xi
        vals = np.empty((times.shape[0],) + points.shape[:-1])
        for i, t in enumerate(times):
            if t < 0:
                raise ValidationError("phase table times must be >= 0")
            vals[i] = scale * bump.segment_integrals(q, params.xi, s_hi=t / scale)
        return cls(times, points, vals)


def packet_envelope(params: ProbeParams, g: AnalyticNonlinearity,
                    bump: BumpCoefficient, t: float, x) -> complex:
    """Envelope a(t, x) in its own frame: transported initial profile times
    the accumulated-phase factor. |a(t,x)| equals |a0(x + eps^(1-2n) t xi)|
    exactly (the modulus is conserved along characteristics)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = x + params.eps ** (1 - 2 * params.n) * t * params.xi
    amp = params.a0(z)
    phase = -params.eps ** (-2 * params.n) * g(
        params.eps ** (2 * params.p) * amp**2) * segment_integral(params, bump, t, x)
    return complex(amp * np.exp(1j * phase))


def _lab_frame_parts(params: ProbeParams, g: AnalyticNonlinearity,
                     bump: BumpCoefficient, t: float, points: np.ndarray):
    """Envelope magnitude, accumulated phase, and carrier at lab points."""
    z = params.eps * (points + (t + 2 * params.T) * params.xi)
    amp = params.a0(z)
    if bump.is_zero():
        acc = np.zeros(points.shape[:-1])
    else:
        seg = bump.segment_integrals(points, params.xi, s_hi=t + params.T)
        acc = -g(params.eps ** (2 * params.p) * amp**2) * seg
    carrier = points @ params.xi + t / (2.0 * params.n)
    return amp, acc, carrier


def approximate_solution_at(params: ProbeParams, g: AnalyticNonlinearity,
                            bump: BumpCoefficient, t: float,
                            points: np.ndarray) -> np.ndarray:
    """Packet values at arbitrary lab points of shape (..., d)."""
    amp, acc, carrier = _lab_frame_parts(params, g, bump, t, np.asarray(points, float))
    return params.eps**params.p * amp * np.exp(1j * (acc + carrier))


def approximate_solution(params: ProbeParams, g: AnalyticNonlinearity,
                         bump: BumpCoefficient, t: float, grid: Grid) -> ComplexField:
    """The approximate solution v(t) sampled on a grid.

    The carrier exp(i x.xi) must be representable on the frequency lattice
    (grid half-length an integer multiple of pi along the direction), which
    the grid check enforces; sup |v| <= eps^p max a0 holds exactly.
    """
    if grid.d != params.d:
        raise ValidationError("grid dimension does not match probe dimension")
    grid.carrier_index(params.xi)
    return ComplexField(grid, approximate_solution_at(params, g, bump, t, grid.points()))


def initial_data(params: ProbeParams, g: AnalyticNonlinearity,
                 bump: BumpCoefficient, grid: Grid) -> ComplexField:
    """Packet state at t = -T, gated by the well-posedness threshold.

    Raises ThresholdError when the coefficient norm of the data is not
    below the contraction threshold (the zero-coefficient model is linear
    and needs no gate).
    """
    params.validate_against(g, bump)
    u0 = approximate_solution(params, g, bump, -params.T, grid)
    if not bump.is_zero():
        beta_fl1 = fl1_norm(bump.sample(grid))
        limit = g.contraction_threshold(params.T, beta_fl1)
        actual = fl1_norm(u0)
        if not actual < limit:
            raise ThresholdError(
                f"initial data coefficient norm {actual:.6g} is not below the "
                f"well-posedness threshold {limit:.6g}; shrink the envelope "
                f"amplitude or eps")
    return u0


def pde_defect(params: ProbeParams, g: AnalyticNonlinearity,
               bump: BumpCoefficient, t: float, grid: Grid,
               dt_fraction: float = DEFECT_TIME_STEP_FRACTION) -> ComplexField:
    """Residual E(t) of the packet under the full equation:

        E = (i d_t + (1/2n) (-Lap)^n) v - beta G(|v|^2) v,

    with the time derivative by a fourth-order centered stencil of step
    dt_fraction * T and the dispersion applied spectrally. Needs t in the
    open horizon so the stencil stays inside [-T, T].
    """
    T = params.T
    hstep = dt_fraction * T
    if not (-T < t < T):
        raise ValidationError(f"defect time must lie in (-T, T), got t = {t}")
    if t - 2 * hstep < -T or t + 2 * hstep > T:
        raise ValidationError(
            f"time t = {t} is too close to the horizon for the stencil "
            f"(step {hstep:.3e}); shrink dt_fraction")
    pts = grid.points()
    vm2 = approximate_solution_at(params, g, bump, t - 2 * hstep, pts)
    vm1 = approximate_solution_at(params, g, bump, t - hstep, pts)
    v0 = approximate_solution_at(params, g, bump, t, pts)
    vp1 = approximate_solution_at(params, g, bump, t + hstep, pts)
    vp2 = approximate_solution_at(params, g, bump, t + 2 * hstep, pts)
    dv_dt = (-vp2 + 8 * vp1 - 8 * vm1 + vm2) / (12.0 * hstep)

    v_field = ComplexField(grid, v0)
    lam = grid.freq_sq ** params.n / (2.0 * params.n)
    disp = (lam * v_field.spectrum().coeffs)
    from .grid import SpectralField
    disp_field = SpectralField(grid, disp).field()

    beta_vals = bump(pts)
    nonlinear = beta_vals * g(np.abs(v0) ** 2) * v0
    return ComplexField(grid, 1j * dv_dt + disp_field.samples - nonlinear)


def envelope_derivative_scaling(params: ProbeParams, g: AnalyticNonlinearity,
                                bump: BumpCoefficient, j: int, eps_values,
                                n_points: int = 4096,
                                box_radius: float | None = None) -> tuple[FitResult, np.ndarray]:
    """Coefficient-norm scaling of the j-th envelope derivative over a
    scale sweep.

    Samples the envelope at the fixed rescaled time corresponding to the
    mid-experiment (t = 0), applies the spectral derivative-sum of order j,
    and fits the log-log slope of the coefficient norm against eps. The
    guaranteed floor for the fitted exponent is min(0, 2p - 2n - j).
    """
    if not 0 <= j <= 2 * params.n:
        raise ValidationError(f"derivative order must satisfy 0 <= j <= 2n, got {j}")
    if params.d != 1:
        raise ValidationError("derivative scaling sweep is implemented for d = 1")
    eps_values = np.asarray(sorted(eps_values, reverse=True), dtype=float)
    if box_radius is None:
        # envelope support plus traversal-image locations, all O(1) in the frame
        box_radius = 8.0 * params.a0_width + 2.0 * params.T + bump.support_radius
    norms = []
    for eps in eps_values:
        pp = params.replace(eps=eps)
        # resolve the eps-scale features the accumulated phase imprints
        n_req = int(2 ** np.ceil(np.log2(max(n_points,
                    16 * box_radius / (eps * bump.support_radius)))))
        gr = Grid(1, n_req, box_radius)
        tprof = eps ** (2 * pp.n) * pp.T   # mid-experiment envelope time
        pts = gr.points()
        z = pts + eps ** (1 - 2 * pp.n) * tprof * pp.xi
        amp = pp.a0(z)
        scale = eps ** (2 * pp.n)
        q = pts / eps - pp.T * pp.xi
        seg = scale * bump.segment_integrals(q, pp.xi, s_hi=tprof / scale)
        phase = -eps ** (-2 * pp.n) * g(eps ** (2 * pp.p) * amp**2) * seg
        env = ComplexField(gr, amp * np.exp(1j * phase))
        norms.append(fl1_norm(derivative_sum_field(env, j)))
    fit = fit_loglog(eps_values, np.asarray(norms))
    return fit, np.asarray(norms)
