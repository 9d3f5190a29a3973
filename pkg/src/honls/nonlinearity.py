"""The analytic nonlinearity, the localized coefficient bump, and the
smallness threshold of the fixed-point well-posedness argument."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, ValidationError
from .grid import ComplexField, Grid

# strict inequalities in the threshold bound are honored by a fixed margin
THRESHOLD_MARGIN = 0.99


class AnalyticNonlinearity:
    """Power-series nonlinearity m -> sum_{k=1}^{K} (a_k / k!) m^k.

    The series is guaranteed on |m| < radius only; evaluation outside
    raises DomainError. The finite truncation K is a representation
    choice: probe experiments evaluate the series at arguments far inside
    the radius where the dropped tail is below solver tolerance.
    """

    def __init__(self, coeffs, radius: float):
        self.coeffs = tuple(float(a) for a in coeffs)
        self.radius = float(radius)
        if len(self.coeffs) < 1:
            raise ValidationError("nonlinearity needs at least one series coefficient")
        if not any(a != 0.0 for a in self.coeffs):
            raise ValidationError("nonlinearity must have a nonzero coefficient")
        if not self.radius > 0:
            raise ValidationError(f"convergence radius must be positive, got {radius}")

    @classmethod
    def cubic(cls, strength: float = 1.0, radius: float = 1.0) -> "AnalyticNonlinearity":
        """Single-term series a_1 = strength, i.e. the cubic model."""
        return cls([strength], radius)

    def __call__(self, m):
        """Evaluate the series at m >= 0 (scalar or array)."""
        m = np.asarray(m, dtype=float)
        if np.any(m >= self.radius):
            raise DomainError(
                f"nonlinearity argument {float(np.max(m)):.6g} is outside the "
                f"convergence radius {self.radius:.6g}")
        out = np.zeros_like(m)
        for k in range(len(self.coeffs), 0, -1):
            out = (out + self.coeffs[k - 1] / math.factorial(k)) * m
        return out if out.shape else float(out)

    def majorant_sums(self):
        """Majorant series values (S1, S2) at the quarter-radius point:

        S1 = sum |a_k|/k! (R/4)^k,   S2 = sum (2k+1)|a_k|/k! (R/4)^k.
        """
        q = self.radius / 4.0
        s1 = sum(abs(a) / math.factorial(k + 1) * q ** (k + 1)
                 for k, a in enumerate(self.coeffs))
        s2 = sum((2 * (k + 1) + 1) * abs(a) / math.factorial(k + 1) * q ** (k + 1)
                 for k, a in enumerate(self.coeffs))
        return s1, s2

    def contraction_threshold(self, horizon: float, beta_fl1: float) -> float:
        """Smallness threshold on the initial-data coefficient norm below
        which the Duhamel fixed-point map is a contraction on [-T, T].

        Returns THRESHOLD_MARGIN times the bound

            (R^(1/2)/4) * min(1, 1 / (2 sqrt(T * |beta| * S2)))

        so the strict inequality holds with a concrete margin. Monotone
        nonincreasing in both the horizon and the coefficient norm.
        """
        if horizon <= 0:
            raise DomainError(f"horizon must be positive, got {horizon}")
        if beta_fl1 <= 0:
            raise DomainError(f"coefficient norm must be positive, got {beta_fl1}")
        _, s2 = self.majorant_sums()
        bound = (math.sqrt(self.radius) / 4.0) * min(
            1.0, 1.0 / (2.0 * math.sqrt(horizon * beta_fl1 * s2)))
        return THRESHOLD_MARGIN * bound

    def __repr__(self):
        return f"AnalyticNonlinearity(coeffs={self.coeffs}, radius={self.radius})"


# quadrature rule reused for all line-segment integrals of the bump
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_GL_PANELS = 4


class BumpCoefficient:
    """Nonnegative, compactly supported coefficient profile.

    kind "smooth-bump":
        amplitude * exp(-1 / (1 - |x-c|^2 / r^2))   for |x-c| < r, else 0.
    kind "gaussian-truncated":
        amplitude * exp(-|x-c|^2 / (2 width^2))     for |x-c| < r, else 0
        (width defaults to r/3 so the cutoff jump is ~1e-5 of amplitude).

    Evaluated analytically at arbitrary points so supports and norms are
    reproducible; the discrete coefficient norm is that of the sampled
    field on a given grid.
    """

    KINDS = ("smooth-bump", "gaussian-truncated")

    def __init__(self, kind: str, amplitude: float, support_radius: float,
                 center=0.0, width: float | None = None):
        if kind not in self.KINDS:
            raise ValidationError(f"unknown bump kind {kind!r}; choose from {self.KINDS}")
        if amplitude < 0:
            raise ValidationError("bump amplitude must be >= 0 (coefficient is nonnegative)")
        if not support_radius > 0:
            raise ValidationError("bump support radius must be positive")
        self.kind = kind
        self.amplitude = float(amplitude)
        self.support_radius = float(support_radius)
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.width = float(width) if width is not None else self.support_radius / 3.0
        if not self.width > 0:
            raise ValidationError("bump width must be positive")

    @property
    def d(self) -> int:
        return self.center.shape[0]

    def is_zero(self) -> bool:
        return self.amplitude == 0.0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at points of shape (..., d)."""
        pts = np.asarray(points, dtype=float)
        rel = pts - self.center
        r2 = np.sum(rel * rel, axis=-1)
        out = np.zeros_like(r2)
        if self.amplitude == 0.0:
            return out
        inside = r2 < self.support_radius**2
        if self.kind == "smooth-bump":
            s2 = r2[inside] / self.support_radius**2
            out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - s2))
        else:
            out[inside] = self.amplitude * np.exp(-r2[inside] / (2.0 * self.width**2))
        return out

    def sample(self, grid: Grid) -> ComplexField:
        if grid.d != self.d:
            raise ValidationError("bump dimension does not match grid dimension")
        return ComplexField(grid, self(grid.points()).astype(complex))

    def rotated(self, angle: float) -> "BumpCoefficient":
        """Profile composed with a rotation (d = 2): center moves, shape fixed."""
        if self.d != 2:
            raise ValidationError("rotation applies to d = 2 bumps only")
        c, s = np.cos(angle), np.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        return BumpCoefficient(self.kind, self.amplitude, self.support_radius,
                               rot @ self.center, width=self.width)

    def clip_to_support(self, starts: np.ndarray, direction: np.ndarray,
                        s_lo: np.ndarray, s_hi: np.ndarray):
        """Intersect parameter ranges [s_lo, s_hi] of the rays
        start + s*direction with the support ball."""
        starts = np.asarray(starts, dtype=float)
        rel = starts - self.center
        b = rel @ direction
        d2 = np.sum(rel * rel, axis=-1)
        disc = b * b - (d2 - self.support_radius**2)
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = np.clip(-b - root, s_lo, s_hi)
        hi = np.clip(-b + root, s_lo, s_hi)
        hi = np.maximum(hi, lo)
        empty = disc <= 0
        lo = np.where(empty, 0.0, lo)
        hi = np.where(empty, 0.0, hi)
        return lo, hi

    def segment_integrals(self, starts: np.ndarray, direction: np.ndarray,
                          s_hi, s_lo=0.0) -> np.ndarray:
        """Integrals of the profile over {start + s*direction : s in [s_lo, s_hi]}.

        Vectorized over starts (shape (..., d)); |direction| = 1. Panelled
        Gauss-Legendre on the support-clipped interval; the clipped
        integrand is smooth, so the rule is accurate to ~1e-12 relative.
        """
        starts = np.asarray(starts, dtype=float)
        direction = np.asarray(direction, dtype=float)
        base = starts.shape[:-1]
        s_lo = np.broadcast_to(np.asarray(s_lo, dtype=float), base)
        s_hi = np.broadcast_to(np.asarray(s_hi, dtype=float), base)
        if self.amplitude == 0.0:
            return np.zeros(base)
        lo, hi = self.clip_to_support(starts, direction, s_lo, s_hi)
        total = np.zeros(base)
        edges = np.linspace(0.0, 1.0, _GL_PANELS + 1)
        for i in range(_GL_PANELS):
            a = lo + (hi - lo) * edges[i]
            b = lo + (hi - lo) * edges[i + 1]
            mid = 0.5 * (a + b)
            hw = 0.5 * (b - a)
            for q in range(_GL_NODES.shape[0]):
                s = mid + hw * _GL_NODES[q]
                total += _GL_WEIGHTS[q] * hw * self(starts + s[..., None] * direction)
        return total

    def line_integral(self, point, direction) -> float:
        """Full-line integral through `point` along unit `direction`."""
        pts = np.asarray(point, dtype=float)[None, :]
        big = 4.0 * self.support_radius + float(np.linalg.norm(pts[0] - self.center))
        return float(self.segment_integrals(pts, np.asarray(direction, float),
                                            s_hi=np.array([big]), s_lo=np.array([-big]))[0])

    def __repr__(self):
        return (f"BumpCoefficient({self.kind!r}, amplitude={self.amplitude}, "
                f"support_radius={self.support_radius}, center={self.center.tolist()})")


def apply_nonlinearity(g: AnalyticNonlinearity, bump: BumpCoefficient,
                       u: ComplexField) -> ComplexField:
    """Pointwise nonlinear term beta(x) * G(|u(x)|^2) * u(x)."""
    m = np.abs(u.samples) ** 2
    if np.any(m >= g.radius):
        raise DomainError(
            f"|u|^2 reaches {float(np.max(m)):.6g}, outside the nonlinearity "
            f"radius {g.radius:.6g}")
    beta_vals = bump(u.grid.points())
    return ComplexField(u.grid, beta_vals * g(m) * u.samples)
