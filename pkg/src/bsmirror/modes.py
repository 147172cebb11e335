"""Field operators as linear forms over labeled bosonic modes.

A :class:`LinearFieldForm` stores the annihilation-operator coefficients
``c_i`` of ``E = sum_i (c_i a_i + conj(c_i) a_i^dag)``; the creation half is
implied. The same coefficient map serves as the positive-frequency part
``E^(+) = sum_i c_i a_i`` when computing photocurrents ``I = E^(-) E^(+)``.

On coherent product states every moment needed here has a closed form:

* mean            ``sum_i 2 Re(c_i alpha_i)``
* variance        ``sum_i |c_i|^2 v_i^2``
* photocurrent    ``|sum_i c_i alpha_i|^2 * sum_j |c_j|^2 v_j^2``
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Mapping

from .config import OpticalConfig
from .errors import NegativeWeight, UnknownMode


def _clean(terms: Mapping[str, complex]) -> dict[str, complex]:
    return {str(m): complex(c) for m, c in sorted(terms.items()) if complex(c) != 0}


@dataclass(frozen=True)
class LinearFieldForm:
    terms: Mapping[str, complex]
    t: float | None = None
    z: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", _clean(self.terms))

    @property
    def modes(self) -> tuple[str, ...]:
        return tuple(self.terms)

    def coefficient(self, mode: str) -> complex:
        return self.terms.get(mode, 0j)

    def norm_sq(self) -> float:
        return sum(abs(c) ** 2 for c in self.terms.values())

    def scaled(self, factor: complex) -> "LinearFieldForm":
        return LinearFieldForm({m: factor * c for m, c in self.terms.items()}, self.t, self.z)

    def __add__(self, other: "LinearFieldForm") -> "LinearFieldForm":
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0j) + c
        return LinearFieldForm(terms, self.t, self.z)

    def to_json(self) -> str:
        return json.dumps({"terms": [{"mode": m, "re": c.real, "im": c.imag}
                                     for m, c in self.terms.items()]})

    @classmethod
    def from_json(cls, text: str) -> "LinearFieldForm":
        doc = json.loads(text)
        return cls({t["mode"]: complex(t["re"], t["im"]) for t in doc["terms"]})


@dataclass(frozen=True)
class CoherentProductState:
    """Product of coherent states; unlisted modes are vacuum with weight 1."""

    amplitudes: Mapping[str, complex] = field(default_factory=dict)
    weights: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        amps = {str(m): complex(a) for m, a in sorted(self.amplitudes.items())}
        weights = {str(m): float(w) for m, w in sorted(self.weights.items())}
        for m, w in weights.items():
            if not w >= 0:
                raise NegativeWeight(f"weight of mode {m!r} must be >= 0, got {w!r}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "weights", weights)

    def amplitude(self, mode: str) -> complex:
        return self.amplitudes.get(mode, 0j)

    def weight(self, mode: str) -> float:
        return self.weights.get(mode, 1.0)

    def displaced(self, shifts: Mapping[str, complex]) -> "CoherentProductState":
        amps = dict(self.amplitudes)
        for m, s in shifts.items():
            amps[m] = amps.get(m, 0j) + s
        return CoherentProductState(amps, self.weights)


def mean(form: LinearFieldForm, state: CoherentProductState) -> float:
    return sum(2.0 * (c * state.amplitude(m)).real for m, c in form.terms.items())


def variance(form: LinearFieldForm, state: CoherentProductState) -> float:
    return sum(abs(c) ** 2 * state.weight(m) for m, c in form.terms.items())


def carrier_amplitude(form: LinearFieldForm, state: CoherentProductState) -> complex:
    """``<E^(+)>`` for a positive-frequency coefficient map."""
    return sum((c * state.amplitude(m) for m, c in form.terms.items()), 0j)


def photocurrent_variance(positive_part: LinearFieldForm, state: CoherentProductState) -> float:
    """Variance of ``I = E^(-) E^(+)`` to leading order in the carrier.

    At unit weights this is also the exact result: a normally ordered
    intensity on a coherent product state is Poissonian in the single
    effective mode ``E^(+)`` picks out.
    """
    return abs(carrier_amplitude(positive_part, state)) ** 2 * variance(positive_part, state)


def photocurrent_mean(positive_part: LinearFieldForm, state: CoherentProductState) -> float:
    return abs(carrier_amplitude(positive_part, state)) ** 2


# --- field operators -------------------------------------------------------


def build_field_free(cfg: OpticalConfig, t: float, z: float) -> LinearFieldForm:
    """Traveling free field ``i E (b e^{-i(wt-kz)} - h.c.)`` on mode ``b``."""
    c = 1j * cfg.E_unit * cmath.exp(-1j * (cfg.omega * t - cfg.k * z))
    return LinearFieldForm({"b": c}, t=t, z=z)


def build_field_free_bidirectional(cfg: OpticalConfig, t: float, z: float) -> LinearFieldForm:
    """Free field as forward (``bF``) plus backward (``bB``) vacuum carriers.

    Each direction gets coefficient ``E/sqrt(2)``, so the variance is
    ``E^2 (v_F^2 + v_B^2) / 2``; with :func:`free_field_state` this equals the
    SQL reference.
    """
    s = 1j * cfg.E_unit / math.sqrt(2.0)
    return LinearFieldForm({
        "bF": s * cmath.exp(-1j * (cfg.omega * t - cfg.k * z)),
        "bB": s * cmath.exp(-1j * (cfg.omega * t + cfg.k * z)),
    }, t=t, z=z)


def free_field_state(cfg: OpticalConfig) -> CoherentProductState:
    w = cfg.weights
    return CoherentProductState(
        {"bF": cfg.alpha},
        {"bF": w.v_b2, "bB": cfg.T * w.v_1sq + cfg.R * w.v_2sq},
    )


def _port_form(prefactor: complex, carrier: complex, own: str, other: str,
               split: float, other_t: float, cfg: OpticalConfig, t: float,
               Z: float, z: float) -> LinearFieldForm:
    # Creation-operator coefficients as written for the port field, then
    # conjugated into the annihilation convention stored by the form.
    # back - split*fwd is evaluated as e^{iwt}(2i sin kz + other_t e^{-ikz}):
    # the direct difference of two unit phasors cancels badly when split -> 1
    # near a node.
    wt = cfg.omega * t
    fwd = cmath.exp(1j * (wt - cfg.k * z))
    own_coeff = cmath.exp(1j * wt) * 2j * math.sin(cfg.k * z) + other_t * fwd
    d = {
        "b": prefactor * carrier * cmath.exp(1j * (wt - cfg.k * Z)),
        own: prefactor * own_coeff,
        other: -prefactor * math.sqrt(split * other_t) * fwd,
    }
    return LinearFieldForm({m: v.conjugate() for m, v in d.items()}, t=t, z=z)


def build_field_e1(cfg: OpticalConfig, t: float) -> LinearFieldForm:
    """Field at port a1 on modes ``b``, ``a1``, ``a2``."""
    pre = -1j * cfg.E_unit / math.sqrt(2.0)
    return _port_form(pre, math.sqrt(cfg.T), "a1", "a2", cfg.R, cfg.T, cfg, t, cfg.Z1, cfg.z1)


def build_field_e2(cfg: OpticalConfig, t: float) -> LinearFieldForm:
    """Field at port a2; the carrier enters with ``-sqrt(R)`` as in ``a2 = -sqrt(R) b + ...``."""
    pre = -1j * cfg.E_unit / math.sqrt(2.0)
    return _port_form(pre, -math.sqrt(cfg.R), "a2", "a1", cfg.T, cfg.R, cfg, t, cfg.Z2, cfg.z2)


def port_state(cfg: OpticalConfig) -> CoherentProductState:
    """Coherent ``b`` with vacua on ``a1``, ``a2`` carrying the config weights."""
    w = cfg.weights
    return CoherentProductState({"b": cfg.alpha}, {"b": w.v_b2, "a1": w.v_1sq, "a2": w.v_2sq})


# --- beam splitter ---------------------------------------------------------


def bs_matrix(T: float):
    """Input-to-output matrix: rows ``(a1, a2)``, columns ``(b, c)``."""
    t, r = math.sqrt(T), math.sqrt(1.0 - T)
    return ((t, r), (-r, t))


def apply_beam_splitter(obj, T: float, inputs: tuple[str, str] = ("b", "c"),
                        outputs: tuple[str, str] = ("a1", "a2")):
    """Mix two modes with ``a1 = sqrt(T) b + sqrt(R) c``, ``a2 = -sqrt(R) b + sqrt(T) c``.

    A :class:`CoherentProductState` on the inputs is carried to the output
    modes. A :class:`LinearFieldForm` written on the outputs is rewritten on
    the inputs, so that ``mean(form, out_state) == mean(new_form, in_state)``.

    Output weights are ``T v_b^2 + R v_c^2`` and ``R v_b^2 + T v_c^2``; this
    keeps the per-mode fluctuation bookkeeping but drops the cross
    correlation that unequal weights would create.
    """
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"T must lie in [0, 1], got {T!r}")
    labels = tuple(inputs) + tuple(outputs)
    if len(labels) != 4 or len(set(labels)) != 4 or not all(isinstance(x, str) and x for x in labels):
        raise UnknownMode(f"beam splitter needs four distinct mode labels, got {labels}")
    (m11, m12), (m21, m22) = bs_matrix(T)
    b, c = inputs
    o1, o2 = outputs

    if isinstance(obj, CoherentProductState):
        if any(m in obj.amplitudes or m in obj.weights for m in outputs):
            raise UnknownMode(f"state already holds output modes {outputs}")
        ab, ac = obj.amplitude(b), obj.amplitude(c)
        wb, wc = obj.weight(b), obj.weight(c)
        amps = {m: a for m, a in obj.amplitudes.items() if m not in inputs}
        weights = {m: w for m, w in obj.weights.items() if m not in inputs}
        amps[o1] = m11 * ab + m12 * ac
        amps[o2] = m21 * ab + m22 * ac
        weights[o1] = m11**2 * wb + m12**2 * wc
        weights[o2] = m21**2 * wb + m22**2 * wc
        return CoherentProductState(amps, weights)

    if isinstance(obj, LinearFieldForm):
        if any(m in obj.terms for m in inputs):
            raise UnknownMode(f"form already holds input modes {inputs}")
        c1, c2 = obj.coefficient(o1), obj.coefficient(o2)
        terms = {m: v for m, v in obj.terms.items() if m not in outputs}
        terms[b] = m11 * c1 + m21 * c2
        terms[c] = m12 * c1 + m22 * c2
        return LinearFieldForm(terms, obj.t, obj.z)

    raise TypeError(f"cannot apply a beam splitter to {type(obj).__name__}")


def substitute(form: LinearFieldForm, mode: str, expansion: Mapping[str, complex]) -> LinearFieldForm:
    """Replace ``mode`` by ``sum_j expansion[j] * a_j`` in the form."""
    if mode not in form.terms:
        raise UnknownMode(mode)
    c = form.terms[mode]
    terms = {m: v for m, v in form.terms.items() if m != mode}
    for m, e in expansion.items():
        terms[m] = terms.get(m, 0j) + c * e
    return LinearFieldForm(terms, form.t, form.z)


# --- photodetection at port a1 ---------------------------------------------


def _bidirectional_probe(cfg: OpticalConfig, t: float) -> LinearFieldForm:
    # E^(+) at z1 with unit field scale: forward and backward waves at port a1.
    wt, kz = cfg.omega * t, cfg.k * cfg.z1
    return LinearFieldForm({
        "a1F": cmath.exp(-1j * (wt - kz)),
        "a1B": cmath.exp(-1j * (wt + kz)),
    }, t=t, z=cfg.z1)


def build_detector_open(cfg: OpticalConfig, t: float) -> LinearFieldForm:
    """Positive-frequency field seen by a detector at a1, second input open.

    Both travel directions pass through the beam splitter independently:
    ``a1F = sqrt(T) bF + sqrt(R) cF`` and likewise for ``B``. Modes:
    ``bF``, ``bB``, ``cF``, ``cB``.
    """
    probe = _bidirectional_probe(cfg, t)
    probe = apply_beam_splitter(probe, cfg.T, ("bF", "cF"), ("a1F", "a2F"))
    return apply_beam_splitter(probe, cfg.T, ("bB", "cB"), ("a1B", "a2B"))


def build_detector_mirror(cfg: OpticalConfig, t: float) -> LinearFieldForm:
    """Positive-frequency field at a1 with the mirror on the second input.

    The mirror ties the two directions of port c into one standing-wave mode
    ``cs``: ``cF = cs/sqrt(2)``, ``cB = -cs/sqrt(2)`` (field node on the
    mirror). Modes: ``bF`` (carrier), ``bB``, ``cs``.
    """
    form = build_detector_open(cfg, t)
    h = 1.0 / math.sqrt(2.0)
    form = substitute(form, "cF", {"cs": h}) if "cF" in form.terms else form
    form = substitute(form, "cB", {"cs": -h}) if "cB" in form.terms else form
    return form


def detector_open_state(alpha: complex, v_bF2: float = 1.0, v_bB2: float = 1.0,
                        v_cF2: float = 1.0, v_cB2: float = 1.0) -> CoherentProductState:
    return CoherentProductState(
        {"bF": alpha}, {"bF": v_bF2, "bB": v_bB2, "cF": v_cF2, "cB": v_cB2})


def detector_mirror_state(cfg: OpticalConfig) -> CoherentProductState:
    """State for :func:`build_detector_mirror`.

    The backward vacuum of mode b is what the beam splitter recombines from
    the port vacua (``T v1^2 + R v2^2``); the standing mode is attributed to
    the port-a1 vacuum.
    """
    w = cfg.weights
    return CoherentProductState(
        {"bF": cfg.alpha},
        {"bF": w.v_b2, "bB": cfg.T * w.v_1sq + cfg.R * w.v_2sq, "cs": w.v_1sq},
    )
