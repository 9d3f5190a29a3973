"""Periodic grids, complex fields, the discrete Fourier contract and norms.

The computational domain is the box [-L, L)^d with periodic boundary
conditions, d in {1, 2}. Fields are represented by their samples on the
uniform lattice x_j = -L + j*h, h = 2L/N, and spectrally by Fourier-series
coefficients c_k normalized so that

    u(x) = sum_k c_k exp(i * freq(k) . x),      freq(k) = (pi/L) * k,

with integer wavenumbers k in {-N/2, ..., N/2 - 1} per axis. In this
normalization the coefficient-sum norm is exactly an algebra under
pointwise multiplication and exactly dominates the sup norm on the grid,
so the classical Wiener-algebra inequalities become testable identities.

The continuum transform carries a (2pi)^(d/2) factor that is absorbed into
the series convention above; all norms in this package refer to the series
coefficients, not the continuum transform.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, ValidationError

NYQUIST_MASS_LIMIT = 1e-8  # max relative coefficient mass allowed on the Nyquist modes


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class Grid:
    """Uniform periodic grid on [-L, L)^d.

    Parameters
    ----------
    d : int
        Spatial dimension, 1 or 2.
    n_points : int
        Points per axis; a power of two, at least 8.
    half_length : float
        Box half-length L; the box is [-L, L)^d.
    """

    def __init__(self, d: int, n_points: int, half_length: float):
        if d not in (1, 2):
            raise ValidationError(f"grid dimension must be 1 or 2, got {d}")
        if not _is_power_of_two(n_points) or n_points < 8:
            raise ValidationError(
                f"n_points must be a power of two >= 8, got {n_points}")
        if not half_length > 0:
            raise ValidationError(f"half_length must be positive, got {half_length}")
        self.d = d
        self.n = int(n_points)
        self.half_length = float(half_length)
        self.spacing = 2.0 * self.half_length / self.n

        # integer wavenumbers in numpy FFT ordering: 0, 1, ..., N/2-1, -N/2, ..., -1
        self.k_int = np.rint(np.fft.fftfreq(self.n, 1.0 / self.n)).astype(int)
        self.freq_axis = (np.pi / self.half_length) * self.k_int
        self.axis = -self.half_length + self.spacing * np.arange(self.n)

        # phase (-1)^k per axis accounts for the origin at -L rather than 0;
        # well defined mod N because N is even
        sign = (-1.0) ** self.k_int
        if d == 1:
            self.shape = (self.n,)
            self._phase = sign
            self.freq_sq = self.freq_axis**2
        else:
            self.shape = (self.n, self.n)
            self._phase = np.outer(sign, sign)
            f1, f2 = np.meshgrid(self.freq_axis, self.freq_axis, indexing="ij")
            self.freq_sq = f1**2 + f2**2

    @property
    def n_total(self) -> int:
        return self.n**self.d

    def points(self) -> np.ndarray:
        """Physical sample points as an array of shape grid.shape + (d,)."""
        if self.d == 1:
            return self.axis[:, None]
        x1, x2 = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.stack([x1, x2], axis=-1)

    def freq_components(self):
        """Per-axis frequency arrays broadcast to grid.shape."""
        if self.d == 1:
            return (self.freq_axis,)
        f1, f2 = np.meshgrid(self.freq_axis, self.freq_axis, indexing="ij")
        return (f1, f2)

    def dispersion_phase(self, t: float, n_disp: int) -> np.ndarray:
        """Multiplier exp(i t |freq|^(2n) / (2n)) of the free flow."""
        lam = self.freq_sq ** n_disp / (2.0 * n_disp)
        return np.exp(1j * t * lam)

    def carrier_index(self, xi: np.ndarray) -> np.ndarray:
        """Integer lattice index k with freq(k) == xi, or raise ConfigError.

        The probe carrier exp(i x.xi) with |xi| = 1 is representable only
        when L is an integer multiple of pi along the direction axis.
        """
        xi = np.asarray(xi, dtype=float)
        k = xi * self.half_length / np.pi
        k_round = np.rint(k)
        if not np.allclose(k, k_round, atol=1e-9):
            raise ConfigError(
                f"carrier direction {xi} is not representable on the frequency "
                f"lattice (requires L/pi * xi integral; L = {self.half_length})")
        if np.any(np.abs(k_round) > self.n // 2 - 1):
            raise ConfigError("carrier frequency exceeds the resolved lattice")
        return k_round.astype(int)

    def __eq__(self, other):
        return (isinstance(other, Grid) and self.d == other.d
                and self.n == other.n and self.half_length == other.half_length)

    def __repr__(self):
        return f"Grid(d={self.d}, n_points={self.n}, half_length={self.half_length})"


class ComplexField:
    """Immutable complex samples of a function on a Grid."""

    def __init__(self, grid: Grid, samples: np.ndarray):
        samples = np.asarray(samples, dtype=complex)
        if samples.shape != grid.shape:
            raise ValidationError(
                f"sample shape {samples.shape} does not match grid shape {grid.shape}")
        if not np.all(np.isfinite(samples.view(float))):
            raise ValidationError("field samples must be finite")
        self.grid = grid
        self.samples = samples.copy()
        self.samples.setflags(write=False)
        self._coeffs = None

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ComplexField":
        """Sample a callable of the point array (shape grid.shape + (d,))."""
        values = np.asarray(fn(grid.points()), dtype=complex)
        return cls(grid, np.broadcast_to(values, grid.shape))

    def spectrum(self) -> "SpectralField":
        if self._coeffs is None:
            raw = np.fft.fftn(self.samples) / self.grid.n_total
            self._coeffs = raw * self.grid._phase
            self._coeffs.setflags(write=False)
        return SpectralField(self.grid, self._coeffs, _checked=True)

    def __add__(self, other):
        return ComplexField(self.grid, self.samples + other.samples)

    def __sub__(self, other):
        return ComplexField(self.grid, self.samples - other.samples)

    def __mul__(self, other):
        if isinstance(other, ComplexField):
            return ComplexField(self.grid, self.samples * other.samples)
        return ComplexField(self.grid, self.samples * other)

    __rmul__ = __mul__


class SpectralField:
    """Fourier-series coefficients c_k of a field, numpy FFT ordering."""

    def __init__(self, grid: Grid, coeffs: np.ndarray, _checked: bool = False):
        if not _checked:
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.shape != grid.shape:
                raise ValidationError("coefficient shape does not match grid")
            coeffs = coeffs.copy()
            coeffs.setflags(write=False)
        self.grid = grid
        self.coeffs = coeffs

    def field(self) -> ComplexField:
        samples = np.fft.ifftn(self.coeffs * self.grid._phase * self.grid.n_total)
        return ComplexField(self.grid, samples)


def forward_dft(f: ComplexField) -> SpectralField:
    """Fourier-series coefficients of a sampled field (linear, invertible)."""
    return f.spectrum()


def inverse_dft(c: SpectralField) -> ComplexField:
    return c.field()


def fl1_norm(f: ComplexField) -> float:
    """Coefficient-sum (Wiener) norm: sum_k |c_k|.

    Exactly submultiplicative under pointwise products and an exact upper
    bound for the grid sup norm.
    """
    return float(np.sum(np.abs(f.spectrum().coeffs)))


def linf_norm(f: ComplexField) -> float:
    """Largest sample magnitude; never exceeds fl1_norm."""
    return float(np.max(np.abs(f.samples)))


def l2_coeff_norm(f: ComplexField) -> float:
    """(sum_k |c_k|^2)^(1/2); conserved by the free flow."""
    return float(np.sqrt(np.sum(np.abs(f.spectrum().coeffs) ** 2)))


def sobolev_norm(f: ComplexField, s: float) -> float:
    """Weighted coefficient norm (sum_k (1+|freq(k)|^2)^s |c_k|^2)^(1/2).

    At s = 0 this is the plain l2 norm of the coefficient sequence. With
    the series normalization it equals ((1/2L)^d * integral of
    |u|^2 + ... )^(1/2) computed by the Plancherel pairing.
    """
    if s < 0:
        raise ValidationError(f"sobolev order must be >= 0, got {s}")
    c = f.spectrum().coeffs
    w = (1.0 + f.grid.freq_sq) ** s
    return float(np.sqrt(np.sum(w * np.abs(c) ** 2)))


def grid_mass(f: ComplexField) -> float:
    """Discrete L2 mass: sum |u(x)|^2 h^d (conserved by the evolution)."""
    return float(np.sum(np.abs(f.samples) ** 2) * f.grid.spacing**f.grid.d)


def free_propagate(f: ComplexField, t: float, n_disp: int) -> ComplexField:
    """Exact free flow of the order-2n dispersive equation.

    Multiplies each coefficient by exp(i t |freq(k)|^(2n) / (2n)); unitary
    on the coefficient sequence and a group in t.
    """
    if n_disp < 1 or int(n_disp) != n_disp:
        raise ValidationError(f"dispersion order must be a positive integer, got {n_disp}")
    c = f.spectrum().coeffs * f.grid.dispersion_phase(t, int(n_disp))
    return SpectralField(f.grid, c).field()


def derivative_sum_field(f: ComplexField, j: int) -> ComplexField:
    """Sum of all j-th order partial derivatives, computed spectrally.

    In one dimension this is the plain j-th derivative. In two dimensions
    it is sum over (j1, j2), j1 + j2 = j, of d^j1_x1 d^j2_x2 f.
    """
    if j < 0 or int(j) != j:
        raise ValidationError("derivative order must be a nonnegative integer")
    j = int(j)
    c = f.spectrum().coeffs
    if f.grid.d == 1:
        mult = (1j * f.grid.freq_components()[0]) ** j
    else:
        f1, f2 = f.grid.freq_components()
        mult = np.zeros(f.grid.shape, dtype=complex)
        for a in range(j + 1):
            mult += (1j * f1) ** a * (1j * f2) ** (j - a)
    return SpectralField(f.grid, c * mult).field()


def nyquist_fraction(f: ComplexField) -> float:
    """Fraction of fl1 mass carried by the Nyquist index -N/2 (per axis)."""
    c = np.abs(f.spectrum().coeffs)
    total = np.sum(c)
    if total == 0:
        return 0.0
    nyq = f.grid.n // 2
    if f.grid.d == 1:
        edge = c[nyq]
    else:
        edge = np.sum(c[nyq, :]) + np.sum(c[:, nyq]) - c[nyq, nyq]
    return float(edge / total)


def check_resolution(f: ComplexField, limit: float = NYQUIST_MASS_LIMIT) -> float:
    """Return the Nyquist mass fraction, raising if it exceeds the limit."""
    frac = nyquist_fraction(f)
    if frac > limit:
        raise ValidationError(
            f"resolution check failed: Nyquist modes carry {frac:.3e} of the "
            f"coefficient mass (limit {limit:.1e}); refine the grid")
    return frac
