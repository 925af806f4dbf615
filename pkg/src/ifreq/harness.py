"""Monte-Carlo scenarios RUN1..RUN7 and their RMSE reports."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .analysis import expected_rmse_white, group_delay_dc, phase_error_at
from .errors import ValidationError
from .estimators import Domain, EstimatorConfig, FrequencyEstimate, Unwrap, estimate
from .signals import ModulatorSpec, PhasePolynomial, WaveformSpec, synth_signal, true_frequency
from .weights import (
    CicParams,
    FilterDesign,
    FilterKind,
    design_butterworth,
    design_cic,
    design_erlang,
    design_kay,
    design_lsq,
    design_rect,
    solve_erlang_p,
)

TWO_PI = 2 * np.pi
WINDOW = 25
N_DEFAULT = 1000
TRIALS_DEFAULT = 100

LPF_ORDER = ("LPF_REC", "LPF_KAY", "LPF_CIC", "LPF_ERL", "LPF_LSQ", "LPF_BUT")
MAG_WGT_KINDS = ("LPF_REC", "LPF_KAY", "LPF_CIC", "LPF_ERL")


@lru_cache(maxsize=None)
def standard_filters(M: int = WINDOW) -> dict[str, FilterDesign]:
    """The six smoothers, all tuned against an ``M``-tap rectangular window."""
    p = solve_erlang_p(2, 1.0 / M)
    cic_len = (M - 1) // 3 + 1
    return {
        "LPF_REC": design_rect(M),
        "LPF_KAY": design_kay(M),
        "LPF_CIC": design_cic(CicParams(3, cic_len)),
        "LPF_ERL": design_erlang(2, p),
        "LPF_LSQ": design_lsq(2, p, 3),
        "LPF_BUT": design_butterworth(4, TWO_PI / M),
    }


@dataclass(frozen=True)
class Algorithm:
    alg_id: str
    config: EstimatorConfig

    @property
    def kind(self) -> FilterKind:
        return self.config.lpf.kind


def standard_algorithms(with_mag_weighted: bool = False) -> list[Algorithm]:
    """ALG01..ALG12 (complex, angle per filter), plus ALG13..ALG16 if requested."""
    filters = standard_filters()
    algs = []
    for i, kind in enumerate(LPF_ORDER):
        lpf = filters[kind]
        unwrap = Unwrap.RECURSIVE if kind == "LPF_LSQ" else Unwrap.NONE
        algs.append(Algorithm(f"ALG{2 * i + 1:02d}", EstimatorConfig(Domain.CPX, lpf)))
        algs.append(Algorithm(f"ALG{2 * i + 2:02d}", EstimatorConfig(Domain.ANG, lpf, unwrap)))
    if with_mag_weighted:
        for i, kind in enumerate(MAG_WGT_KINDS):
            cfg = EstimatorConfig(Domain.ANG_MAG_WGT, filters[kind])
            algs.append(Algorithm(f"ALG{13 + i:02d}", cfg))
    return algs


@dataclass(frozen=True)
class ScenarioSpec:
    scenario_id: str
    waveform: WaveformSpec
    trials: int = TRIALS_DEFAULT
    algorithms: tuple[Algorithm, ...] = field(default_factory=lambda: tuple(standard_algorithms()))
    random_phase_offset: bool = True
    # "white" -> noise-gain prediction, "phase" -> phase-response prediction
    expected: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("a scenario needs at least one trial")
        object.__setattr__(self, "algorithms", tuple(self.algorithms))

    def with_trials(self, trials: int) -> ScenarioSpec:
        return replace(self, trials=trials)


def _tone(f: float, sigma: float, N: int = N_DEFAULT) -> WaveformSpec:
    return WaveformSpec(1.0, PhasePolynomial((0.0, TWO_PI * f)), sigma, N)


def builtin_scenario(scenario_id) -> ScenarioSpec:
    key = str(scenario_id).upper()
    if not key.startswith("RUN"):
        key = f"RUN{key}"
    N = N_DEFAULT
    if key == "RUN1":
        return ScenarioSpec(key, _tone(0.1, 0.01), expected="white")
    if key == "RUN2":
        return ScenarioSpec(key, _tone(0.1, 0.10), expected="white")
    if key == "RUN3":
        return ScenarioSpec(key, _tone(0.4, 0.2))
    if key == "RUN4":
        return ScenarioSpec(key, _tone(0.4, 0.4))
    if key == "RUN5":
        phase = PhasePolynomial((0.0, -TWO_PI * 0.4, TWO_PI * 0.8 / (N - 1)))
        return ScenarioSpec(key, WaveformSpec(1.0, phase, 0.0, N), expected="phase")
    if key == "RUN6":
        # sweep 0 -> 0.25 -> -0.25 cycles/sample: f(t) = 1.2513e-3 t - 1.5030e-6 t^2,
        # so the t^3/3! phase coefficient is twice the quoted jerk
        phase = PhasePolynomial((0.0, 0.0, TWO_PI * 1.2513e-3, -2 * TWO_PI * 1.5030e-6))
        return ScenarioSpec(key, WaveformSpec(1.0, phase, 0.0, N))
    if key == "RUN7":
        wf = WaveformSpec(1.0, PhasePolynomial((0.0, TWO_PI * 0.2)), 0.0, N,
                          modulator=ModulatorSpec(4, TWO_PI / 100))
        return ScenarioSpec(key, wf, algorithms=tuple(standard_algorithms(True)))
    raise ValidationError(f"unknown scenario {scenario_id!r}; expected RUN1..RUN7")


# ---------------------------------------------------------------------------
# Error metric
# ---------------------------------------------------------------------------


def window_start(N: int) -> int:
    return math.ceil((N - 1) / 8)


def _errors(values: np.ndarray, truth: PhasePolynomial, q_total: float, N: int) -> np.ndarray:
    if values.shape[-1] != N - 1:
        raise ValidationError(f"estimate length {values.shape[-1]} does not match N-1 = {N - 1}")
    n = np.arange(window_start(N), N)
    if n.size == 0:
        raise ValidationError("empty RMSE evaluation window")
    err = values[..., n - 1] - true_frequency(truth, n - q_total)
    # frequencies 2*pi apart are the same tone at unit sample rate
    return np.angle(np.exp(1j * err))


def rmse(est: FrequencyEstimate | np.ndarray, truth: PhasePolynomial, q_total: float | None = None,
         N: int | None = None) -> float:
    """Delay-aligned RMSE over waveform samples ``ceil((N-1)/8) .. N-1``.

    Errors are taken modulo 2*pi (principal value), since an estimate that is
    off by a whole turn names the same tone.
    """
    values = est.values if isinstance(est, FrequencyEstimate) else np.asarray(est, dtype=float)
    if q_total is None:
        if not isinstance(est, FrequencyEstimate):
            raise ValidationError("q_total is required for raw arrays")
        q_total = est.q_total
    N = values.shape[-1] + 1 if N is None else N
    err = _errors(values, truth, q_total, N)
    return float(np.sqrt(np.mean(err**2)))


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlgorithmResult:
    alg_id: str
    kind: str
    domain: str
    unwrap: str
    sim_rmse: float
    expected_rmse: float | None
    trials: int

    @property
    def ratio(self) -> float | None:
        if self.expected_rmse is None or self.expected_rmse == 0:
            return None
        return self.sim_rmse / self.expected_rmse


@dataclass(frozen=True)
class RunReport:
    scenario_id: str
    results: tuple[AlgorithmResult, ...]
    base_seed: int | None = None

    def __getitem__(self, alg_id: str) -> AlgorithmResult:
        for r in self.results:
            if r.alg_id == alg_id:
                return r
        raise KeyError(alg_id)

    def lookup(self, kind: str, domain: Domain | str) -> AlgorithmResult:
        domain = Domain(domain).value
        for r in self.results:
            if r.kind == kind and r.domain == domain:
                return r
        raise KeyError((kind, domain))


def trial_waveforms(spec: ScenarioSpec, base_seed: int) -> list[WaveformSpec]:
    """Per-trial waveform specs; trial ``t`` depends only on ``(base_seed, t)``."""
    children = np.random.SeedSequence(base_seed).spawn(spec.trials)
    out = []
    for child in children:
        rng = np.random.default_rng(child)
        theta0 = rng.uniform(-np.pi, np.pi)
        noise_seed, mod_seed = (int(s) for s in rng.integers(0, 2**63 - 1, size=2))
        wf = spec.waveform
        phase = wf.phase.with_offset(theta0) if spec.random_phase_offset else wf.phase
        mod = replace(wf.modulator, seed=mod_seed) if wf.modulator is not None else None
        out.append(replace(wf, phase=phase, seed=noise_seed, modulator=mod))
    return out


def _expected(spec: ScenarioSpec, lpf: FilterDesign) -> float | None:
    wf = spec.waveform
    if spec.expected == "white":
        return expected_rmse_white(lpf, wf.sigma, wf.magnitude)
    if spec.expected == "phase":
        chirp = wf.phase.coefficients[2] if wf.phase.order >= 2 else 0.0
        return float(abs(phase_error_at(lpf, chirp, group_delay_dc(lpf))))
    return None


def run(spec: ScenarioSpec, base_seed: int = 0) -> RunReport:
    """Run every algorithm on the same set of trial waveforms and pool squared errors."""
    waveforms = trial_waveforms(spec, base_seed)
    N = spec.waveform.length
    x = np.stack([synth_signal(wf) for wf in waveforms])
    truth = spec.waveform.phase
    results = []
    for alg in spec.algorithms:
        try:
            est = estimate(x, alg.config)
        except Exception as exc:
            raise type(exc)(f"{spec.scenario_id}/{alg.alg_id}: {exc}") from exc
        err = _errors(est.values, truth, est.q_total, N)
        sim = float(np.sqrt(np.sum(err**2) / err.size))
        cfg = alg.config
        results.append(AlgorithmResult(
            alg.alg_id, cfg.lpf.kind.value, cfg.domain.value, cfg.unwrap.value,
            sim, _expected(spec, cfg.lpf), spec.trials,
        ))
    return RunReport(spec.scenario_id, tuple(results), base_seed)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

REPORT_COLUMNS = ("alg", "filter", "domain", "unwrap", "sim_rmse", "exp_rmse", "ratio")


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.17g}"


def emit_report(report: RunReport, fmt: str = "csv") -> str:
    fmt = fmt.lower()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in report.results:
            w.writerow([r.alg_id, r.kind, r.domain, r.unwrap,
                        _fmt(r.sim_rmse), _fmt(r.expected_rmse), _fmt(r.ratio)])
        return buf.getvalue()
    if fmt == "text":
        lines = [f"{report.scenario_id}  (trials={report.results[0].trials if report.results else 0},"
                 f" seed={report.base_seed})",
                 f"{'alg':<6} {'filter':<8} {'domain':<16} {'sim RMSE':>10} {'exp RMSE':>10} {'ratio':>7}"]
        for r in report.results:
            exp = f"{r.expected_rmse:10.3E}" if r.expected_rmse is not None else " " * 10
            ratio = f"{r.ratio:7.3f}" if r.ratio is not None else " " * 7
            lines.append(f"{r.alg_id:<6} {r.kind:<8} {r.domain:<16} {r.sim_rmse:10.3E} {exp} {ratio}")
        return "\n".join(lines) + "\n"
    raise ValidationError(f"unknown report format {fmt!r}")


# ---------------------------------------------------------------------------
# Custom scenario files: flat "key = value" text, '#' comments
# ---------------------------------------------------------------------------

_FLOAT_KEYS = {"sigma", "A", "theta0", "theta1", "theta2", "theta3",
               "modulator_cutoff", "modulator_variance"}
_INT_KEYS = {"N", "trials", "modulator_order"}


def parse_scenario_text(text: str, name: str = "custom") -> ScenarioSpec:
    """Build a scenario from key/value text.

    Phase coefficients are given as multiples of 2*pi; ``theta0`` omitted means a
    random offset per trial. ``modulator_cutoff`` is in cycles/sample and enables
    the modulator together with ``modulator_order``.
    """
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ValidationError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split(sep, 1))
        if key not in _FLOAT_KEYS | _INT_KEYS | {"mag_weighted", "id"}:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        values[key] = val
    try:
        num = {k: float(v) for k, v in values.items() if k in _FLOAT_KEYS}
        num.update({k: int(v) for k, v in values.items() if k in _INT_KEYS})
    except ValueError as exc:
        raise ValidationError(f"bad numeric value: {exc}") from exc

    coeffs = [TWO_PI * num.get(f"theta{k}", 0.0) for k in range(4)]
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
    modulator = None
    if "modulator_cutoff" in num or "modulator_order" in num:
        modulator = ModulatorSpec(num.get("modulator_order", 4),
                                  TWO_PI * num.get("modulator_cutoff", 0.01),
                                  num.get("modulator_variance", 1.0))
    wf = WaveformSpec(num.get("A", 1.0), PhasePolynomial(tuple(coeffs)), num.get("sigma", 0.0),
                      num.get("N", N_DEFAULT), modulator)
    mag = values.get("mag_weighted", "false").lower() in {"1", "true", "yes"}
    expected = None
    if modulator is None and wf.phase.order <= 1 and wf.sigma > 0:
        expected = "white"
    elif modulator is None and wf.phase.order == 2 and wf.sigma == 0:
        expected = "phase"
    return ScenarioSpec(values.get("id", name), wf, num.get("trials", TRIALS_DEFAULT),
                        tuple(standard_algorithms(mag)), random_phase_offset="theta0" not in num,
                        expected=expected)


def load_scenario_file(path) -> ScenarioSpec:
    path = Path(path)
    return parse_scenario_text(path.read_text(), path.stem)
