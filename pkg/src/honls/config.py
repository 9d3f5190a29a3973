"""Experiment configuration: flat key = value sections (INI) or JSON.

Sections and keys (defaults in parentheses):

[model]    n (1), g_coeffs (1.0), g_radius (1.0), T (1.0),
           beta_kind (smooth-bump), beta_amplitude (0.5), beta_radius (0.5),
           beta_center (0), beta_width (radius/3)
[probe]    d (1), p, xi (1) or direction_count (d=2 recovery),
           a0_amplitude (1.0), a0_width (1.0), a0_center (0)
[numerics] n_points (auto), half_length (auto), dt (auto), picard_tol (1e-8),
           picard_max_iter (40), time_nodes (256), threshold (0.3),
           calibrate (true), recover_mode (solve | ansatz), freq_margin (6.0)
[sweep]    eps (list; single runs use the first entry)
[output]   dir (out), formats (csv,json)

Every module precondition is validated up front with the failing
hypothesis named in the error message.
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .ansatz import ProbeParams
from .errors import ConfigError
from .grid import Grid
from .nonlinearity import AnalyticNonlinearity, BumpCoefficient


def _floats(text: str):
    return [float(tok) for tok in str(text).replace(",", " ").split()]


@dataclass
class ExperimentConfig:
    # model
    n: int = 1
    g_coeffs: tuple = (1.0,)
    g_radius: float = 1.0
    T: float = 1.0
    beta_kind: str = "smooth-bump"
    beta_amplitude: float = 0.5
    beta_radius: float = 0.5
    beta_center: tuple = (0.0,)
    beta_width: float | None = None
    # probe
    d: int = 1
    p: float = 2.0
    xi: tuple = (1.0,)
    direction_count: int = 64
    a0_amplitude: float = 1.0
    a0_width: float = 1.0
    a0_center: tuple | None = None
    # numerics
    n_points: int | None = None
    half_length: float | None = None
    dt: float | None = None
    picard_tol: float = 1e-8
    picard_max_iter: int = 40
    time_nodes: int = 256
    threshold: float = 0.3
    calibrate: bool = True
    recover_mode: str = "solve"
    freq_margin: float = 6.0
    # sweep
    eps_values: tuple = (0.1,)
    # output
    out_dir: str = "out"
    formats: tuple = ("csv", "json")

    # ---------------- building blocks ----------------

    def nonlinearity(self) -> AnalyticNonlinearity:
        return AnalyticNonlinearity(self.g_coeffs, self.g_radius)

    def bump(self) -> BumpCoefficient:
        center = np.asarray(self.beta_center, dtype=float)
        if center.shape[0] != self.d:
            center = np.zeros(self.d) if center.shape[0] == 1 and np.all(center == 0) \
                else center
        return BumpCoefficient(self.beta_kind, self.beta_amplitude,
                               self.beta_radius, center, width=self.beta_width)

    def probe(self, eps: float, xi=None) -> ProbeParams:
        xi_arr = np.asarray(self.xi if xi is None else xi, dtype=float)
        center = (np.zeros(self.d) if self.a0_center is None
                  else np.asarray(self.a0_center, dtype=float))
        return ProbeParams(n=self.n, p=self.p, eps=eps, T=self.T, xi=xi_arr,
                           a0_amplitude=self.a0_amplitude, a0_width=self.a0_width,
                           a0_center=center)

    def grid(self, eps_min: float | None = None) -> Grid:
        """Grid sized by the box rule L >= 2T + 8 * (packet width) with L
        snapped to a multiple of pi so the unit carrier is on-lattice."""
        eps_min = eps_min if eps_min is not None else min(self.eps_values)
        if self.half_length is not None:
            L = self.half_length
        else:
            L_min = 2.0 * self.T + 8.0 * self.a0_width / eps_min
            L = math.pi * math.ceil(L_min / math.pi)
        if abs(L / math.pi - round(L / math.pi)) > 1e-9:
            raise ConfigError(
                f"half_length must be an integer multiple of pi for the unit "
                f"carrier to be representable; got {L}")
        if self.n_points is not None:
            n_pts = self.n_points
        else:
            n_pts = 256
            # resolve the carrier well and keep a frequency margin above it
            while (math.pi / L) * (n_pts / 2) < self.freq_margin \
                    or 2 * L / n_pts > math.pi / 8:
                n_pts *= 2
        return Grid(self.d, n_pts, L)

    def dt_for(self, eps: float) -> float:
        if self.dt is not None:
            return self.dt
        return min(1e-2, 0.1 * eps**self.p)

    # ---------------- validation ----------------

    def validate(self) -> None:
        if self.d not in (1, 2):
            raise ConfigError(f"dimension must be 1 or 2, got {self.d}")
        g = self.nonlinearity()
        bump = self.bump()
        if not self.p > self.n:
            raise ConfigError(
                f"probe requires p > n (amplitude exponent above dispersion "
                f"order); got p = {self.p}, n = {self.n}")
        if not bump.is_zero() and not bump.support_radius < self.T:
            raise ConfigError(
                f"coefficient support must satisfy r < T; got r = "
                f"{bump.support_radius}, T = {self.T}")
        for eps in self.eps_values:
            probe = self.probe(eps)
            probe.validate_against(g, bump)
        if self.recover_mode not in ("solve", "ansatz"):
            raise ConfigError(f"recover_mode must be solve or ansatz, got {self.recover_mode}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"phase threshold must be in (0, 1), got {self.threshold}")
        # grid construction performs its own carrier/lattice checks
        self.grid()

    def resolved(self) -> dict:
        """Plain-dict snapshot embedded in every report for reproducibility."""
        out = {}
        for key, val in self.__dict__.items():
            if isinstance(val, tuple):
                out[key] = list(val)
            else:
                out[key] = val
        return out

    # ---------------- parsing ----------------

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        text = path.read_text()
        if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
            return cls.from_dict(json.loads(text))
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.read_string(text)
        data = {section: dict(parser.items(section)) for section in parser.sections()}
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        cfg = cls()
        model = data.get("model", {})
        probe = data.get("probe", {})
        numerics = data.get("numerics", {})
        sweep = data.get("sweep", {})
        output = data.get("output", {})

        def grab(section, key, cast, default):
            if key in section:
                return cast(section[key])
            return default

        cfg.n = grab(model, "n", int, cfg.n)
        cfg.g_coeffs = tuple(grab(model, "g_coeffs", _floats, list(cfg.g_coeffs)))
        cfg.g_radius = grab(model, "g_radius", float, cfg.g_radius)
        cfg.T = grab(model, "t", float, grab(model, "T", float, cfg.T))
        cfg.beta_kind = grab(model, "beta_kind", str, cfg.beta_kind)
        cfg.beta_amplitude = grab(model, "beta_amplitude", float, cfg.beta_amplitude)
        cfg.beta_radius = grab(model, "beta_radius", float, cfg.beta_radius)
        cfg.beta_center = tuple(grab(model, "beta_center", _floats, list(cfg.beta_center)))
        cfg.beta_width = grab(model, "beta_width", float, cfg.beta_width)

        cfg.d = grab(probe, "d", int, cfg.d)
        cfg.p = grab(probe, "p", float, cfg.p)
        default_xi = [1.0] if cfg.d == 1 else [1.0, 0.0]
        cfg.xi = tuple(grab(probe, "xi", _floats, default_xi))
        cfg.direction_count = grab(probe, "direction_count", int, cfg.direction_count)
        cfg.a0_amplitude = grab(probe, "a0_amplitude", float, cfg.a0_amplitude)
        cfg.a0_width = grab(probe, "a0_width", float, cfg.a0_width)
        if "a0_center" in probe:
            cfg.a0_center = tuple(_floats(probe["a0_center"]))

        cfg.n_points = grab(numerics, "n_points", int, cfg.n_points)
        cfg.half_length = grab(numerics, "half_length", float, cfg.half_length)
        cfg.dt = grab(numerics, "dt", float, cfg.dt)
        cfg.picard_tol = grab(numerics, "picard_tol", float, cfg.picard_tol)
        cfg.picard_max_iter = grab(numerics, "picard_max_iter", int, cfg.picard_max_iter)
        cfg.time_nodes = grab(numerics, "time_nodes", int, cfg.time_nodes)
        cfg.threshold = grab(numerics, "threshold", float, cfg.threshold)
        cfg.calibrate = grab(numerics, "calibrate",
                             lambda s: str(s).strip().lower() in ("1", "true", "yes", "on"),
                             cfg.calibrate)
        cfg.recover_mode = grab(numerics, "recover_mode", str, cfg.recover_mode)
        cfg.freq_margin = grab(numerics, "freq_margin", float, cfg.freq_margin)

        cfg.eps_values = tuple(grab(sweep, "eps", _floats, list(cfg.eps_values)))
        cfg.out_dir = grab(output, "dir", str, cfg.out_dir)
        cfg.formats = tuple(grab(output, "formats",
                                 lambda s: [t.strip() for t in str(s).split(",") if t.strip()],
                                 list(cfg.formats)))
        if cfg.beta_center == (0.0,) and cfg.d == 2:
            cfg.beta_center = (0.0, 0.0)
        return cfg
