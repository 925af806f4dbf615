"""Smoothing-filter designs for phase-difference averaging.

Every design is returned as a :class:`FilterDesign` holding a rational
transfer function ``H(z) = B(z) / A(z)`` in powers of ``z^-1`` with a monic
denominator. The low-pass ("LPF") kinds all have unity dc gain.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import linalg, optimize

from .errors import DomainError, NumericalError, ValidationError


class FilterKind(str, enum.Enum):
    HPF_DIFF = "HPF_DIFF"
    LPF_REC = "LPF_REC"
    LPF_KAY = "LPF_KAY"
    LPF_CIC = "LPF_CIC"
    LPF_ERL = "LPF_ERL"
    LPF_LSQ = "LPF_LSQ"
    LPF_BUT = "LPF_BUT"
    # differentiator followed by a low-pass smoother
    BPF = "BPF"

    @property
    def is_lowpass(self) -> bool:
        return self.value.startswith("LPF_")


@dataclass(frozen=True, eq=False)
class FilterDesign:
    """Rational transfer function ``sum(b[m] z^-m) / sum(a[m] z^-m)`` with ``a[0] == 1``.

    ``sections`` optionally factors the same response into a series of
    ``(b, a)`` stages. Filtering then runs stage by stage, which avoids the
    root splitting that rounding the expanded coefficients causes for
    repeated poles.
    """

    kind: FilterKind
    b: np.ndarray
    a: np.ndarray
    params: dict[str, Any] = field(default_factory=dict)
    sections: tuple[tuple[np.ndarray, np.ndarray], ...] | None = None

    def __post_init__(self):
        b, a = _monic(self.b, self.a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "kind", FilterKind(self.kind))
        if self.sections is not None:
            secs = tuple(_monic(sb, sa) for sb, sa in self.sections)
            if not secs:
                raise ValidationError("sections must be non-empty when given")
            pb, pa = np.ones(1), np.ones(1)
            for sb, sa in secs:
                pb, pa = np.convolve(pb, sb), np.convolve(pa, sa)
            if not (_same_poly(pb, b) and _same_poly(pa, a)):
                raise ValidationError("sections do not multiply out to (b, a)")
            object.__setattr__(self, "sections", secs)

    def stages(self) -> list[FilterDesign]:
        """The factors as single-section designs (just ``[self]`` when unfactored)."""
        if self.sections is None:
            return [self]
        return [FilterDesign(self.kind, sb, sa) for sb, sa in self.sections]

    @property
    def is_fir(self) -> bool:
        return bool(np.all(self.a[1:] == 0.0))

    @property
    def order(self) -> int:
        """Length of the Direct Form II Transposed state vector."""
        return max(self.b.size, self.a.size) - 1

    def poles(self) -> np.ndarray:
        if self.sections is not None:
            return np.concatenate([st.poles() for st in self.stages()]).astype(complex)
        a = np.trim_zeros(self.a, "b")
        return np.roots(a) if a.size > 1 else np.empty(0, dtype=complex)

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def dc_gain(self) -> float:
        if self.sections is not None:
            return float(np.prod([st.dc_gain() for st in self.stages()]))
        return float(self.b.sum() / self.a.sum())

    def cascade(self, other: FilterDesign, kind: FilterKind | None = None) -> FilterDesign:
        """Series connection of two designs."""
        secs = None
        if self.sections is not None or other.sections is not None:
            secs = tuple((st.b, st.a) for st in self.stages() + other.stages())
        return FilterDesign(
            kind or self.kind,
            np.convolve(self.b, other.b),
            np.convolve(self.a, other.a),
            {"stages": [self.kind.value, other.kind.value]},
            secs,
        )

    def to_dict(self) -> dict[str, Any]:
        d = {
            "kind": self.kind.value,
            "b": [float(v) for v in self.b],
            "a": [float(v) for v in self.a],
            "params": _jsonable(self.params),
        }
        if self.sections is not None:
            d["sections"] = [[_jsonable(sb), _jsonable(sa)] for sb, sa in self.sections]
        return d

    def to_json(self) -> str:
        # json writes floats with repr(), i.e. shortest round-tripping form
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> FilterDesign:
        secs = d.get("sections")
        return cls(FilterKind(d["kind"]), d["b"], d["a"], dict(d.get("params", {})),
                   None if secs is None else tuple((sb, sa) for sb, sa in secs))

    @classmethod
    def from_json(cls, text: str) -> FilterDesign:
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"FilterDesign({self.kind.value}, b={list(self.b)}, a={list(self.a)})"


def _monic(b, a) -> tuple[np.ndarray, np.ndarray]:
    b = np.array(b, dtype=float).ravel()
    a = np.array(a, dtype=float).ravel()
    if b.size == 0 or a.size == 0:
        raise ValidationError("numerator and denominator must be non-empty")
    if a[0] == 0.0:
        raise ValidationError("leading denominator coefficient must be non-zero")
    if a[0] != 1.0:
        b, a = b / a[0], a / a[0]
    b.setflags(write=False)
    a.setflags(write=False)
    return b, a


def _same_poly(u: np.ndarray, v: np.ndarray) -> bool:
    n = max(u.size, v.size)
    u = np.pad(u, (0, n - u.size))
    v = np.pad(v, (0, n - v.size))
    return bool(np.allclose(u, v, rtol=1e-9, atol=1e-12 * max(1.0, np.max(np.abs(v)))))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _normalize_dc(b: np.ndarray, a: np.ndarray) -> np.ndarray:
    return b * (a.sum() / b.sum())


# ---------------------------------------------------------------------------
# Moment sums  S(k, x) = sum_{m>=0} m^k x^m
# ---------------------------------------------------------------------------


def _eulerian_row(k: int) -> list[int]:
    row = [1]
    for n in range(1, k + 1):
        new = [0] * n
        for j in range(n):
            left = (n - j) * row[j - 1] if 0 < j <= len(row) else 0
            right = (j + 1) * row[j] if j < len(row) else 0
            new[j] = left + right
        row = new
    return row


def power_geometric_sum(k: int, x: float) -> float:
    """Closed form of ``sum_{m>=0} m^k x^m`` for ``|x| < 1`` (``0^0 = 1``)."""
    if k == 0:
        return 1.0 / (1.0 - x)
    coeffs = _eulerian_row(k)
    poly = sum(c * x**j for j, c in enumerate(coeffs))
    return x * poly / (1.0 - x) ** (k + 1)


# ---------------------------------------------------------------------------
# Parameter records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErlangParams:
    """Sampled Erlang weight ``w[m] = c_w m^kappa p^m``."""

    kappa: int
    p: float

    def __post_init__(self):
        if self.kappa < 0 or int(self.kappa) != self.kappa:
            raise ValidationError(f"kappa must be a non-negative integer, got {self.kappa}")
        if not 0.0 < self.p < 1.0:
            raise ValidationError(f"Erlang pole must lie in (0, 1), got {self.p}")

    @property
    def timescale(self) -> float:
        return -1.0 / math.log(self.p)

    @property
    def c_w(self) -> float:
        return 1.0 / power_geometric_sum(self.kappa, self.p)

    @property
    def n_cascade(self) -> int:
        return self.kappa + 1

    @property
    def mean(self) -> float:
        return (self.kappa + 1) * self.timescale

    @property
    def variance(self) -> float:
        return (self.kappa + 1) * self.timescale**2

    @property
    def skew(self) -> float:
        return 2.0 / math.sqrt(self.kappa + 1)

    def weight(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        return self.c_w * m**self.kappa * self.p**m


@dataclass(frozen=True)
class CicParams:
    n_stages: int
    section_length: int

    def __post_init__(self):
        if self.n_stages < 1:
            raise ValidationError("CIC needs at least one stage")
        if self.section_length < 2:
            raise ValidationError("CIC section length must be at least 2")

    @property
    def length(self) -> int:
        return self.n_stages * (self.section_length - 1) + 1


# ---------------------------------------------------------------------------
# FIR designs
# ---------------------------------------------------------------------------


def design_differentiator() -> FilterDesign:
    """Two-point difference ``1 - z^-1``."""
    return FilterDesign(FilterKind.HPF_DIFF, [1.0, -1.0], [1.0])


def design_rect(M: int) -> FilterDesign:
    if M < 1:
        raise ValidationError(f"window length must be >= 1, got {M}")
    return FilterDesign(FilterKind.LPF_REC, np.full(M, 1.0 / M), [1.0], {"M": M})


def colored_noise_covariance(M: int) -> np.ndarray:
    """Covariance of differentiated white noise: tridiagonal Toeplitz ``[2, -1]``.

    The autocorrelation is the inverse DTFT of ``|1 - e^{-iw}|^2 = 2 - 2 cos w``.
    """
    if M < 1:
        raise ValidationError(f"M must be >= 1, got {M}")
    col = np.zeros(M)
    col[0] = 2.0
    if M > 1:
        col[1] = -1.0
    return linalg.toeplitz(col)


def gls_weight(X: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Rows of ``(X^T P^-1 X)^-1 X^T P^-1``; for a single regressor, the weight vector."""
    X = np.atleast_2d(np.asarray(X, dtype=float).T).T
    try:
        cho = linalg.cho_factor(P)
        PiX = linalg.cho_solve(cho, X)
        gram = X.T @ PiX
        W = linalg.solve(gram, PiX.T, assume_a="pos")
    except linalg.LinAlgError as exc:
        raise NumericalError(f"singular normal equations: {exc}") from exc
    return W[0] if W.shape[0] == 1 else W


def design_kay(M: int) -> FilterDesign:
    """Minimum-variance weight for a constant in differentiated white noise."""
    if M < 2:
        raise ValidationError(f"Kay window needs M >= 2, got {M}")
    w = gls_weight(np.ones(M), colored_noise_covariance(M))
    return FilterDesign(FilterKind.LPF_KAY, w, [1.0], {"M": M})


def kay_closed_form(M: int) -> np.ndarray:
    """Parabolic window ``6 (m+1)(M-m) / (M (M+1)(M+2))``, m = 0..M-1."""
    m = np.arange(M, dtype=float)
    return 6.0 * (m + 1.0) * (M - m) / (M * (M + 1.0) * (M + 2.0))


def design_cic(params: CicParams) -> FilterDesign:
    w = np.ones(1)
    box = np.ones(params.section_length)
    for _ in range(params.n_stages):
        w = np.convolve(w, box)
    w /= w.sum()
    return FilterDesign(
        FilterKind.LPF_CIC,
        w,
        [1.0],
        {"n_stages": params.n_stages, "section_length": params.section_length},
    )


# ---------------------------------------------------------------------------
# Erlang (cascaded leaky integrator) designs
# ---------------------------------------------------------------------------


def erlang_wng(kappa: int, p: float) -> float:
    """White-noise gain ``sum (c_w m^kappa p^m)^2`` in closed form."""
    s = power_geometric_sum(kappa, p)
    return power_geometric_sum(2 * kappa, p * p) / (s * s)


def solve_erlang_p(kappa: int, target_wng: float) -> float:
    """Pole ``p`` in (0, 1) whose Erlang weight has the requested white-noise gain.

    The gain falls monotonically from 1 (p -> 0) to 0 (p -> 1); ``target_wng == 1``
    returns the degenerate limit ``p = 0``.
    """
    if kappa < 0:
        raise ValidationError("kappa must be >= 0")
    if not 0.0 < target_wng <= 1.0:
        raise DomainError(f"target WNG must lie in (0, 1], got {target_wng}")
    if target_wng == 1.0:
        return 0.0

    def f(p):
        return erlang_wng(kappa, p) - target_wng

    lo, hi = 1e-12, 1.0 - 1e-12
    if f(lo) <= 0.0 or f(hi) >= 0.0:
        raise DomainError(f"WNG {target_wng} unattainable for kappa={kappa}")
    return optimize.brentq(f, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)


def _repeated_pole_denominator(p: float, count: int) -> np.ndarray:
    a = np.ones(1)
    for _ in range(count):
        a = np.convolve(a, [1.0, -p])
    return a


def _pole_sections(b: np.ndarray, p: float, count: int):
    # FIR numerator, then one single-pole section per repeated root
    head = np.trim_zeros(b, "b")
    return ((head if head.size else b[:1], [1.0]),) + ((([1.0], [1.0, -p]),) * count)


def _numerator_from_impulse(h_head: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Numerator making ``B/A`` start with ``h_head``; exact when the response is ``p^m poly(m)``."""
    return np.convolve(a, h_head)[: h_head.size]


def _normalize_dc_poles(b: np.ndarray, p: float, count: int) -> np.ndarray:
    # exact denominator dc value (1 - p)^count, not a cancelling coefficient sum
    return b * ((1.0 - p) ** count / b.sum())


def design_erlang(kappa: int, p: float) -> FilterDesign:
    """IIR with ``kappa + 1`` poles at ``z = p`` and impulse response ``c_w m^kappa p^m``.

    The numerator comes from ``sum m^k x^m = x A_k(x) / (1 - x)^(k+1)`` with the
    Eulerian polynomial ``A_k``, so every coefficient is a positive product.
    """
    prm = ErlangParams(kappa, p)
    a = _repeated_pole_denominator(p, kappa + 1)
    b = np.zeros(kappa + 2)
    if kappa == 0:
        b[0] = prm.c_w
    else:
        e = np.array(_eulerian_row(kappa), dtype=float)
        b[1 : kappa + 1] = prm.c_w * e * p ** np.arange(1, kappa + 1)
    b = _normalize_dc_poles(b, p, kappa + 1)
    return FilterDesign(FilterKind.LPF_ERL, b, a, {"kappa": kappa, "p": p},
                        _pole_sections(b, p, kappa + 1))


# ---------------------------------------------------------------------------
# Wide-band designs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LsqSolution:
    """Erlang-weighted polynomial fit, reduced to its equivalent impulse response."""

    kappa: int
    p: float
    n_terms: int
    delay: float
    gram: np.ndarray
    gram_sq: np.ndarray

    def poly_coeffs(self) -> np.ndarray:
        """Coefficients ``c_j`` with ``h[m] = w[m] sum_j c_j m^j``."""
        xq = self.delay ** np.arange(self.n_terms)
        return linalg.solve(self.gram, xq, assume_a="pos")

    def impulse(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        w = ErlangParams(self.kappa, self.p).weight(m)
        return w * np.polynomial.polynomial.polyval(m, self.poly_coeffs())

    def wng(self) -> float:
        c = self.poly_coeffs()
        return float(c @ self.gram_sq @ c)


def _lsq_grams(kappa: int, p: float, n_terms: int) -> tuple[np.ndarray, np.ndarray]:
    c_w = ErlangParams(kappa, p).c_w
    j = np.arange(n_terms)
    jk = j[:, None] + j[None, :]
    gram = np.vectorize(lambda k: c_w * power_geometric_sum(kappa + int(k), p))(jk)
    gram_sq = np.vectorize(lambda k: c_w**2 * power_geometric_sum(2 * kappa + int(k), p * p))(jk)
    return gram, gram_sq


def lsq_min_wng_delay(kappa: int, p: float, n_terms: int) -> float:
    """Evaluation delay minimizing the white-noise gain of the fitted-polynomial weight.

    The gain is a polynomial of degree ``2 (n_terms - 1)`` in the delay, so the
    candidates are the real roots of its derivative. Of the local minima, the
    one closest to the centroid of the Erlang weight is returned.
    """
    if n_terms == 1:
        # gain does not depend on the delay; report the weight's first moment
        return float(ErlangParams(kappa, p).c_w * power_geometric_sum(kappa + 1, p))
    gram, gram_sq = _lsq_grams(kappa, p, n_terms)
    Gi = linalg.inv(gram)
    Q = Gi @ gram_sq @ Gi
    deg = 2 * (n_terms - 1)
    coef = np.zeros(deg + 1)
    for j in range(n_terms):
        for k in range(n_terms):
            coef[j + k] += Q[j, k]
    P = np.polynomial.Polynomial(coef)
    dP, ddP = P.deriv(), P.deriv(2)
    roots = dP.roots()
    real = roots[np.abs(roots.imag) < 1e-9 * (1 + np.abs(roots.real))].real
    minima = real[ddP(real) > 0]
    if minima.size == 0:
        raise NumericalError("no local minimum of the WNG polynomial")
    # the gain can have several near-equal local minima; keep the one at the
    # weight's centroid (the far one trades latency for nothing)
    centroid = ErlangParams(kappa, p).c_w * power_geometric_sum(kappa + 1, p)
    return float(minima[np.argmin(np.abs(minima - centroid))])


def lsq_solution(kappa: int, p: float, n_terms: int, delay: float | None = None) -> LsqSolution:
    ErlangParams(kappa, p)
    if n_terms < 1:
        raise ValidationError("n_terms must be >= 1")
    gram, gram_sq = _lsq_grams(kappa, p, n_terms)
    if np.linalg.cond(gram) > 1e13:
        raise NumericalError("Erlang-weighted normal equations are ill-conditioned")
    if delay is None:
        delay = lsq_min_wng_delay(kappa, p, n_terms)
    return LsqSolution(kappa, p, n_terms, float(delay), gram, gram_sq)


def design_lsq(kappa: int, p: float, n_terms: int, delay: float | None = None) -> FilterDesign:
    """Recursive polynomial-regression smoother over an Erlang-weighted infinite window.

    A degree ``n_terms - 1`` polynomial is fitted to past inputs with weight
    ``c_w m^kappa p^m`` and evaluated ``delay`` samples in the past. The
    resulting weight is ``p^m`` times a degree ``kappa + n_terms - 1``
    polynomial, realized exactly with ``kappa + n_terms`` poles at ``z = p``.
    By default the delay minimizes the white-noise gain.
    """
    sol = lsq_solution(kappa, p, n_terms, delay)
    n_poles = kappa + n_terms
    a = _repeated_pole_denominator(p, n_poles)
    b = _numerator_from_impulse(sol.impulse(np.arange(n_poles + 1)), a)
    b = _normalize_dc_poles(b, p, n_poles)
    return FilterDesign(
        FilterKind.LPF_LSQ,
        b,
        a,
        {"kappa": kappa, "p": p, "n_terms": n_terms, "delay": sol.delay},
        _pole_sections(b, p, n_poles),
    )


def butterworth_analog_poles(order: int, cutoff: float) -> np.ndarray:
    k = np.arange(1, order + 1)
    return cutoff * np.exp(1j * np.pi * (2 * k + order - 1) / (2 * order))


def design_butterworth(order: int, cutoff: float, fs: float = 1.0) -> FilterDesign:
    """Analogue Butterworth low-pass mapped by the bilinear transform without pre-warping.

    ``cutoff`` is the analogue -3 dB frequency in rad/s; with ``fs = 1`` it is
    used directly as rad/sample.
    """
    if order < 1:
        raise ValidationError("Butterworth order must be >= 1")
    if not 0.0 < cutoff < np.pi * fs:
        raise ValidationError(f"cutoff must lie in (0, pi*fs), got {cutoff}")
    s = butterworth_analog_poles(order, cutoff)
    z = (2 * fs + s) / (2 * fs - s)
    a = np.real(np.poly(z))
    b = np.real(np.poly(-np.ones(order)))
    b = _normalize_dc(b, a)
    return FilterDesign(FilterKind.LPF_BUT, b, a, {"order": order, "cutoff": cutoff, "fs": fs})
