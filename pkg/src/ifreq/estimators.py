"""Frequency estimators built on one-sample delayed conjugate products.

Three ways of smoothing the products ``p[n] = x[n] x*[n-1]``:

* angle domain: filter ``arg p[n]`` (optionally unwrapped against the running estimate);
* complex domain: filter ``p[n]`` and take the angle afterwards;
* magnitude-weighted angle domain: filter ``|p| arg p`` and divide by filtered ``|p|``.

All inputs may carry leading batch axes; time is the last axis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .analysis import group_delay_dc
from .errors import ValidationError
from .lti import Init, apply, steady_state
from .weights import FilterDesign

HPF_DELAY = 0.5
MIN_WEIGHT = 1e-30


class Domain(str, enum.Enum):
    ANG = "DOM_ANG"
    CPX = "DOM_CPX"
    ANG_MAG_WGT = "DOM_ANG_MAG_WGT"


class Unwrap(str, enum.Enum):
    NONE = "none"
    RECURSIVE = "recursive"


@dataclass(frozen=True)
class EstimatorConfig:
    domain: Domain
    lpf: FilterDesign
    unwrap: Unwrap = Unwrap.NONE

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        object.__setattr__(self, "unwrap", Unwrap(self.unwrap))
        if self.unwrap is Unwrap.RECURSIVE and self.domain is not Domain.ANG:
            raise ValidationError("recursive unwrapping applies to angle-domain smoothing only")


@dataclass(frozen=True, eq=False)
class FrequencyEstimate:
    """``values[..., j]`` estimates the frequency at waveform time ``j + 1 - q_total``."""

    values: np.ndarray
    q_total: float
    held: np.ndarray | None = None

    @property
    def f_hat(self) -> np.ndarray:
        return self.values / (2 * np.pi)

    def sample_index(self) -> np.ndarray:
        """Waveform sample index ``n`` at which each estimate is produced."""
        return np.arange(1, self.values.shape[-1] + 1)


def conjugate_product(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] < 2:
        raise ValidationError("need at least two samples to form a conjugate product")
    return x[..., 1:] * np.conj(x[..., :-1])


def _wrap(phi):
    # principal value in (-pi, pi]
    return np.angle(np.exp(1j * phi))


def _q_total(lpf: FilterDesign) -> float:
    return HPF_DELAY + group_delay_dc(lpf)


def estimate_angle(x, cfg: EstimatorConfig) -> FrequencyEstimate:
    if cfg.domain is not Domain.ANG:
        raise ValidationError(f"estimate_angle needs domain {Domain.ANG.value}")
    raw = np.angle(conjugate_product(x))
    if cfg.unwrap is Unwrap.NONE:
        est = apply(cfg.lpf, raw, Init.STEADY_STATE_FIRST_SAMPLE).real
    else:
        est = np.empty_like(raw)
        state = steady_state(cfg.lpf, raw[..., 0])
        prev = raw[..., 0]
        for n in range(raw.shape[-1]):
            unwrapped = prev + _wrap(raw[..., n] - prev)
            prev = state.step(unwrapped).real
            est[..., n] = prev
    return FrequencyEstimate(est, _q_total(cfg.lpf))


def estimate_complex(x, cfg: EstimatorConfig) -> FrequencyEstimate:
    if cfg.domain is not Domain.CPX:
        raise ValidationError(f"estimate_complex needs domain {Domain.CPX.value}")
    y = apply(cfg.lpf, conjugate_product(x), Init.STEADY_STATE_FIRST_SAMPLE)
    return FrequencyEstimate(np.angle(y), _q_total(cfg.lpf))


def estimate_mag_weighted(x, cfg: EstimatorConfig) -> FrequencyEstimate:
    if cfg.domain is not Domain.ANG_MAG_WGT:
        raise ValidationError(f"estimate_mag_weighted needs domain {Domain.ANG_MAG_WGT.value}")
    prod = conjugate_product(x)
    weight = np.abs(prod)
    raw = np.angle(prod)
    num = apply(cfg.lpf, weight * raw, Init.STEADY_STATE_FIRST_SAMPLE).real
    den = apply(cfg.lpf, weight, Init.STEADY_STATE_FIRST_SAMPLE).real
    held = np.abs(den) < MIN_WEIGHT
    with np.errstate(divide="ignore", invalid="ignore"):
        est = num / den
    if held.any():
        # carry the previous estimate over samples with no usable weight
        est = np.where(held, np.nan, est)
        if held[..., 0].any():
            est[..., 0] = np.where(held[..., 0], raw[..., 0], est[..., 0])
        for n in range(1, est.shape[-1]):
            col = held[..., n]
            if np.any(col):
                est[..., n] = np.where(col, est[..., n - 1], est[..., n])
    return FrequencyEstimate(est, _q_total(cfg.lpf), held)


_DISPATCH = {
    Domain.ANG: estimate_angle,
    Domain.CPX: estimate_complex,
    Domain.ANG_MAG_WGT: estimate_mag_weighted,
}


def estimate(x, cfg: EstimatorConfig) -> FrequencyEstimate:
    return _DISPATCH[cfg.domain](x, cfg)
