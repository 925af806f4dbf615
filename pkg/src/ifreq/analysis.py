"""Frequency-domain and noise characteristics of the smoothing filters."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .lti import impulse_response
from .weights import FilterDesign, FilterKind, design_differentiator

# quarter of the first-null bandwidth of a 25-tap rectangular window
PROBE_OMEGA = 2 * np.pi / (4 * 25)


def freq_response(design: FilterDesign, omega):
    """``B(e^{iw}) / A(e^{iw})``."""
    omega = np.asarray(omega, dtype=float)
    zinv = np.exp(-1j * omega)
    num = np.polynomial.polynomial.polyval(zinv, design.b)
    den = np.polynomial.polynomial.polyval(zinv, design.a)
    return num / den


def dc_derivatives(design: FilterDesign, order: int) -> np.ndarray:
    """``d^k H(e^{iw}) / dw^k`` at ``w = 0`` for ``k = 0..order``.

    Computed exactly from the Taylor series of numerator and denominator, which
    equals the impulse-response moments ``sum_m h[m] (-i m)^k``.
    """
    k = np.arange(order + 1)
    fact = np.array([math.factorial(int(j)) for j in k], dtype=float)

    def series(c):
        m = np.arange(c.size, dtype=float)
        return np.array([np.sum(c * (-1j * m) ** j) for j in k]) / fact

    nb, na = series(design.b), series(design.a)
    if na[0] == 0:
        raise DomainError("denominator vanishes at dc")
    h = np.zeros(order + 1, dtype=complex)
    for j in range(order + 1):
        h[j] = (nb[j] - np.dot(na[1 : j + 1], h[j - 1 :: -1][:j])) / na[0] if j else nb[0] / na[0]
    return h * fact


def dc_flatness(design: FilterDesign, max_order: int) -> list[complex]:
    return [complex(v) for v in dc_derivatives(design, max_order)]


def group_delay_dc(design: FilterDesign) -> float:
    """``-d arg H / dw`` at dc, i.e. the normalized first moment of ``h``."""
    d0, d1 = dc_derivatives(design, 1)
    if abs(d0) < 1e-300:
        raise DomainError("group delay undefined for zero dc gain")
    return float((1j * d1 / d0).real)


def group_delay_moment(design: FilterDesign, rel_tail_tol: float = 1e-15) -> float:
    """First moment of the tail-truncated impulse response (cross-check route)."""
    h = impulse_response(design, rel_tail_tol)
    s = h.sum()
    if abs(s) < 1e-300:
        raise DomainError("group delay undefined for zero dc gain")
    return float(np.arange(h.size) @ h / s)


def wng(design: FilterDesign, rel_tail_tol: float = 1e-15) -> float:
    """White-noise gain ``sum h[m]^2``."""
    h = impulse_response(design, rel_tail_tol)
    return float(h @ h)


def wng_parseval(design: FilterDesign, n_grid: int = 1 << 14) -> float:
    """``(1/2pi) int |H|^2 dw`` by the trapezoid rule on a uniform grid."""
    w = np.linspace(-np.pi, np.pi, n_grid + 1)
    mag2 = np.abs(freq_response(design, w)) ** 2
    return float(np.trapezoid(mag2, w) / (2 * np.pi))


def bandpass(lpf: FilterDesign) -> FilterDesign:
    """Differentiator followed by ``lpf``."""
    return design_differentiator().cascade(lpf, FilterKind.BPF)


def wng_bpf(lpf: FilterDesign, rel_tail_tol: float = 1e-15) -> float:
    return wng(bandpass(lpf), rel_tail_tol)


def probe_gain(design: FilterDesign, omega: float = PROBE_OMEGA) -> float:
    return float(np.abs(freq_response(design, omega)))


def phase_error_at(design: FilterDesign, omega, q: float):
    """Deviation of the phase response from linear phase ``-q w``.

    The numerator is summed about ``q`` so a symmetric FIR comes out real to
    rounding instead of through a large compensating rotation.
    """
    omega = np.asarray(omega, dtype=float)
    m = np.arange(design.b.size, dtype=float) - q
    num = np.sum(design.b * np.exp(-1j * omega[..., None] * m), axis=-1)
    den = np.polynomial.polynomial.polyval(np.exp(-1j * omega), design.a)
    return np.angle(num / den)


def expected_rmse_white(lpf: FilterDesign, sigma: float, magnitude: float = 1.0) -> float:
    """Predicted estimator RMSE for a constant tone in white noise of per-part std ``sigma``."""
    if magnitude <= 0:
        raise DomainError("magnitude must be positive")
    return math.sqrt(wng_bpf(lpf) * sigma**2 / magnitude**2)


@dataclass(frozen=True)
class FilterCharacteristics:
    kind: FilterKind
    group_delay: float
    wng_lpf: float
    wng_bpf: float
    flatness: tuple[complex, ...]
    probe_gain: float

    @property
    def d2_dc(self) -> complex:
        return self.flatness[2]

    @property
    def d2_ideal(self) -> float:
        return -self.group_delay**2

    def row(self) -> dict[str, float | str]:
        return {
            "kind": self.kind.value,
            "grp_del": self.group_delay,
            "wng_lpf": self.wng_lpf,
            "wng_bpf": self.wng_bpf,
            "mag_probe": self.probe_gain,
            "d2_dc_real": self.d2_dc.real,
        }


def characterize(design: FilterDesign, max_order: int = 2,
                 probe_omega: float = PROBE_OMEGA) -> FilterCharacteristics:
    return FilterCharacteristics(
        kind=design.kind,
        group_delay=group_delay_dc(design),
        wng_lpf=wng(design),
        wng_bpf=wng_bpf(design),
        flatness=tuple(dc_flatness(design, max(max_order, 2))),
        probe_gain=probe_gain(design, probe_omega),
    )
