"""Brute-force truncated number-basis simulator.

States are dense tensors with one axis per mode. Ladder operators are applied
axis-wise on the tensor, which is the same contraction as multiplying by
``1 x ... x a x ... x 1`` but never forms the full matrix; dense matrices are
only built on request for small spaces (:func:`operator_matrix`).

Only the unit-weight (true quantum) vacuum has a number-basis
representation, so everything here corresponds to weights of 1.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import DimensionCap, DimensionMismatch, TruncationInsufficient
from .modes import LinearFieldForm

DEFAULT_CAP = 10**6
DEFICIT_TOL = 1e-10
DENSE_CAP = 4096


@dataclass(frozen=True)
class TruncationSpec:
    """Per-mode Fock cutoff over an ordered list of modes.

    ``dims`` overrides ``dim`` for individual modes, e.g. to keep vacuum-only
    modes small when the carrier needs a deep cutoff.
    """

    modes: tuple[str, ...]
    dim: int = 40
    dims: Mapping[str, int] = field(default_factory=dict)
    cap: int = DEFAULT_CAP

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "dims", dict(self.dims))
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"duplicate modes in {self.modes}")
        if not self.modes:
            raise ValueError("at least one mode is required")
        for d in (self.dim, *self.dims.values()):
            if int(d) != d or d < 2:
                raise ValueError(f"Fock dimension must be an integer >= 2, got {d!r}")
        unknown = set(self.dims) - set(self.modes)
        if unknown:
            raise DimensionMismatch(f"dims given for unknown modes {sorted(unknown)}")
        if self.size > self.cap:
            raise DimensionCap(f"{self.size} amplitudes exceed the cap of {self.cap}")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(self.dims.get(m, self.dim)) for m in self.modes)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def axis(self, mode: str) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise DimensionMismatch(f"mode {mode!r} is not in the truncation {self.modes}") from None


def truncation_deficit(alpha: complex, dim: int) -> float:
    """Poisson weight of ``|alpha>`` at or above the cutoff ``dim``."""
    lam = abs(alpha) ** 2
    if lam == 0:
        return 0.0
    return float(gammainc(dim, lam))


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    mag = np.exp(-0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1))
    return mag * np.exp(1j * n * np.angle(alpha))


@dataclass(frozen=True)
class StateVector:
    spec: TruncationSpec
    amplitudes: np.ndarray
    deficit: float = 0.0

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))


def build_coherent(alphas: Mapping[str, complex] | Sequence[complex], spec: TruncationSpec,
                   tol: float = DEFICIT_TOL) -> StateVector:
    """Product coherent state, truncated at the spec cutoffs.

    ``alphas`` is either a mode->amplitude mapping (missing modes are vacuum)
    or a sequence aligned with ``spec.modes``.

    Raises
    ------
    TruncationInsufficient
        If any mode loses ``tol`` or more probability to the cutoff.
    """
    if isinstance(alphas, Mapping):
        for m in alphas:
            spec.axis(m)
        values = [complex(alphas.get(m, 0j)) for m in spec.modes]
    else:
        values = [complex(a) for a in alphas]
        if len(values) != len(spec.modes):
            raise DimensionMismatch(f"{len(values)} amplitudes for {len(spec.modes)} modes")
    psi = np.ones((), dtype=complex)
    deficit = 0.0
    for mode, a, d in zip(spec.modes, values, spec.shape):
        loss = truncation_deficit(a, d)
        if loss >= tol:
            raise TruncationInsufficient(
                f"mode {mode!r}: |alpha|={abs(a):.3g} loses {loss:.3g} of its weight at dim={d}; "
                f"raise the cutoff or lower |alpha|")
        deficit = 1.0 - (1.0 - deficit) * (1.0 - loss)
        psi = np.multiply.outer(psi, coherent_amplitudes(a, d))
    return StateVector(spec, psi, deficit)


def fock_state(occupations: Mapping[str, int], spec: TruncationSpec) -> StateVector:
    psi = np.zeros(spec.shape, dtype=complex)
    idx = tuple(int(occupations.get(m, 0)) for m in spec.modes)
    psi[idx] = 1.0
    return StateVector(spec, psi)


# --- ladder operators --------------------------------------------------------


def lowering_matrix(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def raising_matrix(dim: int) -> np.ndarray:
    return lowering_matrix(dim).conj().T


def _lower(psi: np.ndarray, axis: int) -> np.ndarray:
    d = psi.shape[axis]
    out = np.zeros_like(psi)
    shape = [1] * psi.ndim
    shape[axis] = d - 1
    factors = np.sqrt(np.arange(1, d, dtype=float)).reshape(shape)
    src = [slice(None)] * psi.ndim
    dst = [slice(None)] * psi.ndim
    src[axis] = slice(1, d)
    dst[axis] = slice(0, d - 1)
    out[tuple(dst)] = factors * psi[tuple(src)]
    return out


def _raise(psi: np.ndarray, axis: int) -> np.ndarray:
    d = psi.shape[axis]
    out = np.zeros_like(psi)
    shape = [1] * psi.ndim
    shape[axis] = d - 1
    factors = np.sqrt(np.arange(1, d, dtype=float)).reshape(shape)
    src = [slice(None)] * psi.ndim
    dst = [slice(None)] * psi.ndim
    src[axis] = slice(0, d - 1)
    dst[axis] = slice(1, d)
    out[tuple(dst)] = factors * psi[tuple(src)]
    return out


def _check(form: LinearFieldForm, spec: TruncationSpec) -> None:
    for m in form.terms:
        spec.axis(m)


def apply_positive(form: LinearFieldForm, psi: np.ndarray, spec: TruncationSpec) -> np.ndarray:
    """``sum_i c_i a_i |psi>``."""
    out = np.zeros_like(psi)
    for m, c in form.terms.items():
        out += c * _lower(psi, spec.axis(m))
    return out


def apply_negative(form: LinearFieldForm, psi: np.ndarray, spec: TruncationSpec) -> np.ndarray:
    """``sum_i conj(c_i) a_i^dag |psi>``."""
    out = np.zeros_like(psi)
    for m, c in form.terms.items():
        out += c.conjugate() * _raise(psi, spec.axis(m))
    return out


def apply_field(form: LinearFieldForm, psi: np.ndarray, spec: TruncationSpec) -> np.ndarray:
    return apply_positive(form, psi, spec) + apply_negative(form, psi, spec)


@dataclass(frozen=True)
class LadderProduct:
    """Operator product such as ``b^dag b``: ``(mode, dagger)`` factors, left to right."""

    factors: tuple[tuple[str, bool], ...]

    def apply(self, psi: np.ndarray, spec: TruncationSpec) -> np.ndarray:
        for mode, dagger in reversed(self.factors):
            psi = (_raise if dagger else _lower)(psi, spec.axis(mode))
        return psi


def number(mode: str) -> LadderProduct:
    return LadderProduct(((mode, True), (mode, False)))


def _same_spec(state: StateVector, spec: TruncationSpec | None) -> None:
    if spec is not None and spec != state.spec:
        raise DimensionMismatch("operator and state were built on different truncations")


def expectation(op: LinearFieldForm | LadderProduct | np.ndarray, state: StateVector,
                spec: TruncationSpec | None = None) -> complex:
    """``<psi|O|psi>`` by direct contraction.

    ``op`` may be a field form (its Hermitian field is used), a ladder
    product, or a dense matrix over the full truncated space.
    """
    _same_spec(state, spec)
    psi = state.amplitudes
    if isinstance(op, LinearFieldForm):
        _check(op, state.spec)
        out = apply_field(op, psi, state.spec)
    elif isinstance(op, LadderProduct):
        out = op.apply(psi, state.spec)
    else:
        op = np.asarray(op)
        if op.shape != (psi.size, psi.size):
            raise DimensionMismatch(f"matrix of shape {op.shape} on a state of size {psi.size}")
        out = (op @ psi.reshape(-1)).reshape(psi.shape)
    return complex(np.vdot(psi, out))


def field_mean(form: LinearFieldForm, state: StateVector) -> float:
    return expectation(form, state).real


def field_variance(form: LinearFieldForm, state: StateVector) -> float:
    _check(form, state.spec)
    psi = state.amplitudes
    e_psi = apply_field(form, psi, state.spec)
    first = np.vdot(psi, e_psi).real
    second = np.vdot(e_psi, e_psi).real
    return float(second - first**2)


def photocurrent_variance_exact(positive_part: LinearFieldForm, state: StateVector) -> float:
    """Exact ``<I^2> - <I>^2`` for ``I = E^(-) E^(+)`` in the truncated space."""
    _check(positive_part, state.spec)
    psi = state.amplitudes
    a_psi = apply_positive(positive_part, psi, state.spec)
    i_psi = apply_negative(positive_part, a_psi, state.spec)
    mean_i = np.vdot(a_psi, a_psi).real
    second = np.vdot(i_psi, i_psi).real
    return float(second - mean_i**2)


def photocurrent_mean_exact(positive_part: LinearFieldForm, state: StateVector) -> float:
    _check(positive_part, state.spec)
    a_psi = apply_positive(positive_part, state.amplitudes, state.spec)
    return float(np.vdot(a_psi, a_psi).real)


def operator_matrix(form: LinearFieldForm, spec: TruncationSpec, part: str = "field") -> np.ndarray:
    """Dense matrix of the field (or its ``positive``/``negative`` part).

    Limited to ``DENSE_CAP`` basis states.
    """
    _check(form, spec)
    if spec.size > DENSE_CAP:
        raise DimensionCap(f"dense matrix of size {spec.size} exceeds {DENSE_CAP}")
    shape = spec.shape
    total = np.zeros((spec.size, spec.size), dtype=complex)
    for m, c in form.terms.items():
        ax = spec.axis(m)
        ops = [np.eye(d, dtype=complex) for d in shape]
        if part in ("field", "positive"):
            ops[ax] = lowering_matrix(shape[ax])
            total += c * _kron_all(ops)
        if part in ("field", "negative"):
            ops[ax] = raising_matrix(shape[ax])
            total += c.conjugate() * _kron_all(ops)
    return total


def _kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def photon_number_distribution(state: StateVector, mode: str) -> np.ndarray:
    ax = state.spec.axis(mode)
    probs = np.abs(state.amplitudes) ** 2
    other = tuple(i for i in range(probs.ndim) if i != ax)
    return probs.sum(axis=other) if other else probs


def histogram_csv(state: StateVector, mode: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("n", "probability"))
    for n, p in enumerate(photon_number_distribution(state, mode)):
        writer.writerow((n, format(float(p), ".17g")))
    return buf.getvalue()


def alpha_sq_slope(alphas: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``values`` against ``|alpha|^2``."""
    x = np.abs(np.asarray(alphas, dtype=complex)) ** 2
    slope, _ = np.polyfit(x, np.asarray(values, dtype=float), 1)
    return float(slope)
