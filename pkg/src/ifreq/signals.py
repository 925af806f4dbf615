"""Synthetic complex waveforms with polynomial phase, white noise and an optional modulator."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .lti import Init, apply
from .weights import design_butterworth


@dataclass(frozen=True)
class PhasePolynomial:
    """Instantaneous phase ``theta(t) = sum_k theta_k t^k / k!`` (radians)."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise ValidationError("phase polynomial needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def _taylor(self, deriv: int) -> np.ndarray:
        # power-series coefficients of the deriv-th derivative
        c = self.coefficients[deriv:]
        return np.array([ck / math.factorial(k) for k, ck in enumerate(c)]) if c else np.zeros(1)

    def phase(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), self._taylor(0))

    def frequency(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), self._taylor(1))

    def with_offset(self, theta0: float) -> PhasePolynomial:
        return PhasePolynomial((theta0,) + self.coefficients[1:])


def true_frequency(phase: PhasePolynomial, t):
    """Analytic instantaneous frequency (rad/sample) at real-valued time ``t``."""
    return phase.frequency(t)


@dataclass(frozen=True)
class ModulatorSpec:
    """Low-pass filtered complex Gaussian noise used as a multiplicative modulator."""

    order: int = 4
    cutoff: float = 2 * np.pi / 100
    variance: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.cutoff < np.pi:
            raise ValidationError(f"modulator cutoff must lie in (0, pi), got {self.cutoff}")
        if self.order < 1:
            raise ValidationError("modulator filter order must be >= 1")
        if self.variance < 0:
            raise ValidationError("modulator noise variance must be >= 0")


@dataclass(frozen=True)
class WaveformSpec:
    magnitude: float = 1.0
    phase: PhasePolynomial = field(default_factory=lambda: PhasePolynomial((0.0,)))
    sigma: float = 0.0
    length: int = 1000
    modulator: ModulatorSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.magnitude > 0:
            raise ValidationError(f"magnitude must be > 0, got {self.magnitude}")
        if self.sigma < 0:
            raise ValidationError(f"noise sigma must be >= 0, got {self.sigma}")
        if self.length < 2:
            raise ValidationError(f"waveform needs at least 2 samples, got {self.length}")

    def replace(self, **changes) -> WaveformSpec:
        return replace(self, **changes)


def _complex_normal(rng: np.random.Generator, n: int, std: float) -> np.ndarray:
    re, im = rng.standard_normal((2, n))
    return std * (re + 1j * im)


def synth_modulator(spec: ModulatorSpec, length: int) -> np.ndarray:
    if length < 1:
        raise ValidationError("modulator length must be >= 1")
    rng = np.random.default_rng(spec.seed)
    noise = _complex_normal(rng, length, math.sqrt(spec.variance))
    lpf = design_butterworth(spec.order, spec.cutoff)
    return apply(lpf, noise, Init.STEADY_STATE_FIRST_SAMPLE)


def synth_clean(spec: WaveformSpec) -> np.ndarray:
    """Noise-free signal ``A exp(i theta[n])``, times the modulator when present."""
    n = np.arange(spec.length, dtype=float)
    psi = spec.magnitude * np.exp(1j * spec.phase.phase(n))
    if spec.modulator is not None:
        psi = psi * synth_modulator(spec.modulator, spec.length)
    return psi


def synth_signal(spec: WaveformSpec) -> np.ndarray:
    x = synth_clean(spec)
    if spec.sigma > 0:
        rng = np.random.default_rng(spec.seed)
        x = x + _complex_normal(rng, spec.length, spec.sigma)
    return x


# ---------------------------------------------------------------------------
# CSV  n,re,im
# ---------------------------------------------------------------------------


def write_waveform_csv(x, dest=None) -> str:
    x = np.asarray(x, dtype=complex)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "re", "im"])
    for n, v in enumerate(x):
        w.writerow([n, f"{v.real:.17g}", f"{v.imag:.17g}"])
    text = buf.getvalue()
    if dest is not None:
        Path(dest).write_text(text)
    return text


def read_waveform_csv(source) -> np.ndarray:
    text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValidationError("waveform CSV has no samples")
    try:
        rows.sort(key=lambda r: int(r["n"]))
        return np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed waveform CSV (expected header n,re,im): {exc}") from exc
