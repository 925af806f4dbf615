"""Filtering with Direct Form II Transposed state, batch and one sample at a time.

Complex inputs are filtered with real coefficients acting on both parts.
Sequences may carry leading batch axes; time is always the last axis.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy import linalg, signal

from .errors import DomainError, NumericalError, ValidationError
from .weights import FilterDesign


class Init(str, enum.Enum):
    ZERO = "zero"
    STEADY_STATE_FIRST_SAMPLE = "steady_state"


def _padded(design: FilterDesign) -> tuple[np.ndarray, np.ndarray]:
    n = design.order + 1
    b = np.zeros(n)
    a = np.zeros(n)
    b[: design.b.size] = design.b
    a[: design.a.size] = design.a
    return b, a


def _require_stable(design: FilterDesign) -> None:
    if not design.is_stable():
        raise DomainError(f"{design.kind.value} design is not stable: poles {design.poles()}")


def state_size(design: FilterDesign) -> int:
    """Number of delay elements: summed over stages for a factored design."""
    return sum(st.order for st in design.stages())


def _state_space_single(design: FilterDesign):
    b, a = _padded(design)
    k = design.order
    if k == 0:
        return np.zeros((0, 0)), np.zeros(0), np.zeros(0), float(b[0])
    A = np.zeros((k, k))
    A[:, 0] = -a[1:]
    A[:-1, 1:] = np.eye(k - 1) if k > 1 else A[:-1, 1:]
    B = b[1:] - a[1:] * b[0]
    C = np.zeros(k)
    if k:
        C[0] = 1.0
    return A, B, C, float(b[0])


def state_space(design: FilterDesign) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """``(A, B, C, D)`` of the DF2T realization, ``s' = A s + B x``, ``y = C s + D x``.

    For a factored design the stage realizations are connected in series and
    the state is the concatenation of the stage states.
    """
    A, B, C, D = _state_space_single(design.stages()[0])
    for st in design.stages()[1:]:
        A2, B2, C2, D2 = _state_space_single(st)
        n1, n2 = A.shape[0], A2.shape[0]
        A = np.block([[A, np.zeros((n1, n2))], [np.outer(B2, C), A2]])
        B = np.concatenate([B, B2 * D])
        C = np.concatenate([D2 * C, C2])
        D = D2 * D
    return A, B, C, D


def _steady_single(design: FilterDesign) -> np.ndarray:
    b, a = _padded(design)
    g = b.sum() / a.sum()
    # s_i = sum_{k > i} (b_k - a_k g)
    return np.cumsum((b[1:] - a[1:] * g)[::-1])[::-1].copy()


def steady_state_vector(design: FilterDesign) -> np.ndarray:
    """DF2T state after an infinitely long unit step (final-value construction)."""
    _require_stable(design)
    parts = []
    level = 1.0
    for st in design.stages():
        parts.append(level * _steady_single(st))
        level *= st.dc_gain()
    return np.concatenate(parts) if parts else np.zeros(0)


def steady_state_vector_iterative(design: FilterDesign, tol: float = 1e-12,
                                  max_steps: int = 1_000_000) -> np.ndarray:
    """Unit-step state found by running the recursion until it stops changing."""
    _require_stable(design)
    state = FilterState(design)
    for _ in range(max_steps):
        prev = state.state.copy()
        state.step(1.0)
        if np.max(np.abs(state.state - prev), initial=0.0) < tol:
            return state.state.real.copy()
    raise NumericalError(f"step response did not settle in {max_steps} samples")


class _SectionState:
    def __init__(self, design: FilterDesign, z: np.ndarray):
        b, a = _padded(design)
        self.b = [float(v) for v in b]
        self.a = [float(v) for v in a]
        self.z = z

    def step(self, x):
        b, a, z = self.b, self.a, self.z
        k = len(z)
        if k == 0:
            return b[0] * x
        y = z[0] + b[0] * x
        for i in range(k - 1):
            z[i] = z[i + 1] + b[i + 1] * x - a[i + 1] * y
        z[k - 1] = b[k] * x - a[k] * y
        return y


class FilterState:
    """Mutable DF2T state for sample-by-sample filtering.

    ``state`` has shape ``(n_state, *batch)`` so a single object can advance
    many independent channels in lockstep. Stages of a factored design own
    consecutive slices of it.
    """

    def __init__(self, design: FilterDesign, state=None, batch_shape: tuple[int, ...] = ()):
        self.design = design
        k = state_size(design)
        if state is None:
            self.state = np.zeros((k, *batch_shape), dtype=complex)
        else:
            state = np.asarray(state, dtype=complex)
            if state.shape[:1] != (k,):
                raise ValidationError(f"state must have leading length {k}, got {state.shape}")
            self.state = state.copy()
        self._sections = []
        off = 0
        for st in design.stages():
            # views into self.state, so updates land in place
            self._sections.append(_SectionState(st, self.state[off : off + st.order]))
            off += st.order

    def step(self, x):
        """Advance one sample; returns the output."""
        for sec in self._sections:
            x = sec.step(x)
        return x

    def copy(self) -> FilterState:
        return FilterState(self.design, self.state)


def steady_state(design: FilterDesign, x0=1.0) -> FilterState:
    """State primed so a constant input ``x0`` yields the steady-state output immediately."""
    x0 = np.asarray(x0, dtype=complex)
    s = steady_state_vector(design)
    return FilterState(design, s.reshape((-1,) + (1,) * x0.ndim) * x0)


def step(state: FilterState, x):
    return state.step(x)


def _run(design: FilterDesign, x: np.ndarray, zi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Filter with initial state ``zi`` (time on the last axis of ``zi`` too)."""
    zf = []
    off = 0
    for st in design.stages():
        k = st.order
        b, a = _padded(st)
        if k == 0:
            x = b[0] * x
            continue
        x, z = signal.lfilter(b, a, x, axis=-1, zi=zi[..., off : off + k])
        zf.append(z)
        off += k
    return x, (np.concatenate(zf, axis=-1) if zf else zi)


def apply(design: FilterDesign, x, init: Init | str = Init.ZERO) -> np.ndarray:
    """Filter along the last axis; same recurrence as :meth:`FilterState.step`."""
    _require_stable(design)
    x = np.asarray(x)
    if x.size == 0 or x.shape[-1] == 0:
        raise ValidationError("cannot filter an empty sequence")
    init = Init(init)
    k = state_size(design)
    if init is Init.ZERO:
        zi = np.zeros(x.shape[:-1] + (k,), dtype=np.result_type(x, float))
    else:
        zi = x[..., :1] * steady_state_vector(design)
    y, _ = _run(design, x, zi)
    return y


def apply_stepwise(design: FilterDesign, x, init: Init | str = Init.ZERO) -> np.ndarray:
    """Reference loop over :meth:`FilterState.step`; slow, used to check :func:`apply`."""
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] == 0:
        raise ValidationError("cannot filter an empty sequence")
    if Init(init) is Init.ZERO:
        st = FilterState(design, batch_shape=x.shape[:-1])
    else:
        st = steady_state(design, x[..., 0])
    out = np.empty_like(x)
    for n in range(x.shape[-1]):
        out[..., n] = st.step(x[..., n])
    return out


def tail_gramian(design: FilterDesign) -> np.ndarray:
    """Observability Gramian ``Q``: free-response energy from state ``s`` is ``s^T Q s``."""
    A, _, C, _ = state_space(design)
    return linalg.solve_discrete_lyapunov(A.T, np.outer(C, C))


def impulse_response(design: FilterDesign, rel_tail_tol: float = 1e-15,
                     max_length: int = 10_000_000) -> np.ndarray:
    """``h[m]`` up to the FIR length, or until the IIR tail energy is negligible.

    The remaining IIR tail energy is evaluated exactly from the current state
    via the observability Gramian, so truncation stops as soon as it falls
    below ``rel_tail_tol`` times the energy accumulated so far.
    """
    if rel_tail_tol <= 0:
        raise ValidationError("rel_tail_tol must be positive")
    _require_stable(design)
    if design.is_fir:
        return np.trim_zeros(design.b.copy(), "b") if np.any(design.b) else design.b[:1].copy()
    Q = tail_gramian(design)
    chunk = 256
    pieces = []
    energy = 0.0
    zi = np.zeros(state_size(design))
    x = np.zeros(chunk)
    x[0] = 1.0
    total = 0
    while total < max_length:
        h, zi = _run(design, x, zi)
        pieces.append(h)
        total += chunk
        energy += float(h @ h)
        tail = float(zi @ Q @ zi)
        if tail <= rel_tail_tol * energy:
            break
        chunk = min(chunk * 2, 1 << 16)
        x = np.zeros(chunk)
    else:
        raise NumericalError("impulse response did not decay within max_length")
    h = np.concatenate(pieces)
    # drop samples after the tolerance is met
    cum_tail = np.cumsum((h * h)[::-1])[::-1] + float(zi @ Q @ zi)
    keep = np.nonzero(cum_tail > rel_tail_tol * energy)[0]
    n = int(keep[-1]) + 1 if keep.size else 1
    return h[:n]
