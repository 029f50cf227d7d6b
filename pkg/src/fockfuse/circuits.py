"""Circuit container, apparatus builders, and end-to-end runners.

The fusion apparatus merges two polarization qubits (spatial modes ``t`` and
``c``, plus an H-polarized ancilla on ``a``) into one photon spanning modes
``t1``/``t2`` and polarization.  The fission apparatus splits such a
four-dimensional photon (entering on ``c1``/``c2``) back onto two photons
exiting on ``t`` and on one of the two channels ``c``/``c'``.  Detection
heralds success; pattern-dependent unitary corrections (feed-forward) fold
all heralded branches onto the canonical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .elements import (
    Hwp,
    Merge,
    OpticalElement,
    Pbs,
    Relabel,
    SigmaX,
    Unfold,
    apply_element,
    apply_relabel,
    apply_sigma_x,
    apply_sign_flip_v,
)
from .states import (
    H,
    V,
    ConditionalOutcome,
    DetectionPattern,
    DEFAULT_PHOTON_CAP,
    MixedState,
    PureState,
)

INV_SQRT2 = 1.0 / math.sqrt(2.0)


class CircuitError(ValueError):
    """Structural problem in a circuit definition."""


@dataclass(frozen=True)
class PhotonIn:
    """A fixed single-photon injection."""

    mode: str
    pol: str
    tag: str = ""


@dataclass(frozen=True)
class QubitSlot:
    """A polarization qubit whose two amplitudes are bound at run time."""

    mode: str
    name: str


@dataclass(frozen=True)
class QuditSlot:
    """A single photon over two modes x polarization, bound at run time.

    Amplitude order: (mode1 H, mode1 V, mode2 H, mode2 V).
    """

    mode1: str
    mode2: str
    name: str


CircuitInput = PhotonIn | QubitSlot | QuditSlot


@dataclass(frozen=True)
class Circuit:
    modes: tuple[str, ...]
    inputs: tuple[CircuitInput, ...]
    elements: tuple[OpticalElement, ...]
    patterns: tuple[DetectionPattern, ...]

    def slot_names(self) -> list[str]:
        return [i.name for i in self.inputs if not isinstance(i, PhotonIn)]

    def input_modes(self) -> list[str]:
        out = []
        for i in self.inputs:
            if isinstance(i, QuditSlot):
                out.extend([i.mode1, i.mode2])
            else:
                out.append(i.mode)
        return out

    def output_modes(self) -> set[str]:
        """Declared modes still live after tracking unfold/merge/relabel."""
        live = set(self.modes) | set(self.input_modes())
        for el in self.elements:
            if isinstance(el, Unfold):
                live.discard(el.src)
                live.update((el.out_h, el.out_v))
            elif isinstance(el, Merge):
                live.discard(el.in_h)
                live.discard(el.in_v)
                live.add(el.out)
            elif isinstance(el, Relabel):
                live.discard(el.src)
                live.add(el.dst)
            elif isinstance(el, Pbs) and (el.in1 in live or el.in2 in live):
                live.discard(el.in1)
                live.discard(el.in2)
                live.update((el.out1, el.out2))
        return live

    def validate(self) -> None:
        declared = set(self.modes)
        if len(self.modes) != len(declared):
            raise CircuitError("duplicate mode declaration")

        def check(mode: str) -> None:
            if mode not in declared:
                raise CircuitError(f"undeclared mode {mode!r}")

        for mode in self.input_modes():
            check(mode)
        retired: set[str] = set()
        for el in self.elements:
            used: tuple[str, ...]
            if isinstance(el, Hwp):
                used = (el.mode,)
            elif isinstance(el, Pbs):
                used = (el.in1, el.in2, el.out1, el.out2)
            elif isinstance(el, Unfold):
                used = (el.src, el.out_h, el.out_v)
            elif isinstance(el, Merge):
                used = (el.in_h, el.in_v, el.out)
            elif isinstance(el, Relabel):
                used = (el.src, el.dst)
            else:
                used = (el.mode,)
            for mode in used:
                check(mode)
                if mode in retired:
                    raise CircuitError(
                        f"mode {mode!r} reused after being unfolded away"
                    )
            if isinstance(el, Unfold):
                retired.add(el.src)
        live = self.output_modes()
        for pattern in self.patterns:
            for mode in pattern.constrained_modes():
                check(mode)
                if mode not in live:
                    raise CircuitError(
                        f"detection references non-output mode {mode!r}"
                    )


# -- state preparation and running ----------------------------------------


def normalized_amplitudes(amps, n: int, *, tol: float = 1e-9) -> tuple[complex, ...]:
    vec = tuple(complex(a) for a in amps)
    if len(vec) != n:
        raise ValueError(f"expected {n} amplitudes, got {len(vec)}")
    norm = math.sqrt(sum(abs(a) ** 2 for a in vec))
    if norm == 0.0:
        raise ValueError("amplitudes are all zero")
    if abs(norm - 1.0) > tol:
        raise ValueError(f"amplitudes not normalized (norm {norm:.6f})")
    return tuple(a / norm for a in vec)


def initial_state(
    circuit: Circuit,
    bindings: dict[str, tuple[complex, ...]] | None = None,
    *,
    tags: dict[str, str] | None = None,
    cap: int | None = DEFAULT_PHOTON_CAP,
) -> PureState:
    """Build the input state, binding slot amplitudes by name.

    ``tags`` optionally assigns a distinguishability tag per input mode.
    """
    bindings = bindings or {}
    tags = tags or {}
    missing = [n for n in circuit.slot_names() if n not in bindings]
    if missing:
        raise ValueError(f"unbound input slots: {', '.join(missing)}")
    state = PureState.vacuum()
    for inp in circuit.inputs:
        if isinstance(inp, PhotonIn):
            tag = tags.get(inp.mode, inp.tag)
            state = state.create(inp.mode, inp.pol, tag, cap=cap)
        elif isinstance(inp, QubitSlot):
            a0, a1 = normalized_amplitudes(bindings[inp.name], 2)
            tag = tags.get(inp.mode, "")
            state = a0 * state.create(inp.mode, H, tag, cap=cap) + a1 * state.create(
                inp.mode, V, tag, cap=cap
            )
        else:
            amps = normalized_amplitudes(bindings[inp.name], 4)
            tag = tags.get(inp.mode1, "")
            components = (
                (inp.mode1, H),
                (inp.mode1, V),
                (inp.mode2, H),
                (inp.mode2, V),
            )
            state = sum(
                (
                    a * state.create(mode, pol, tags.get(mode, tag), cap=cap)
                    for a, (mode, pol) in zip(amps, components)
                    if a != 0
                ),
                PureState.zero(),
            )
    return state


def apply_elements(state: PureState, elements) -> PureState:
    for el in elements:
        state = apply_element(state, el)
    return state


def run_circuit(
    circuit: Circuit,
    input_state: PureState | MixedState | None = None,
    bindings: dict[str, tuple[complex, ...]] | None = None,
) -> list[ConditionalOutcome]:
    """Apply all elements in order, then each detection pattern."""
    if input_state is None:
        input_state = initial_state(circuit, bindings)
    if isinstance(input_state, MixedState):
        evolved: PureState | MixedState = input_state.map_states(
            lambda s: apply_elements(s, circuit.elements)
        )
    else:
        evolved = apply_elements(input_state, circuit.elements)
    return [evolved.project(pattern) for pattern in circuit.patterns]


# -- fusion apparatus -------------------------------------------------------

FUSION_BRANCH_ORDER = ((H, H), (H, V), (V, H), (V, V))


def fusion_patterns() -> tuple[DetectionPattern, ...]:
    """One pattern per (a, c) polarization pair, plus exactly one photon
    across the two target outputs (the fourfold coincidence)."""
    return tuple(
        DetectionPattern.of({"a": pa, "c": pc, ("t1", "t2"): "any"})
        for pa, pc in FUSION_BRANCH_ORDER
    )


def build_fusion_circuit() -> Circuit:
    """Three-photon fusion apparatus.

    Ancilla Hadamard, copy of ``c`` onto ``a`` at a PBS, Hadamards, unfolding
    of ``t`` into ``t1``/``t2``, target Hadamards (the ``t2`` plate is a NOT
    followed by a Hadamard), the two PBS CNOTs, and exit Hadamards on all
    four outputs.
    """
    circuit = Circuit(
        modes=("a", "c", "t", "t1", "t2"),
        inputs=(PhotonIn("a", H), QubitSlot("t", "psi"), QubitSlot("c", "phi")),
        elements=(
            Hwp("a", 22.5),
            Pbs("c", "a", "c", "a"),
            Hwp("a", 22.5),
            Hwp("c", 22.5),
            Unfold("t", "t1", "t2"),
            Hwp("t1", 22.5),
            SigmaX("t2"),
            Hwp("t2", 22.5),
            Pbs("a", "t1", "a", "t1"),
            Pbs("c", "t2", "c", "t2"),
            Hwp("a", 22.5),
            Hwp("c", 22.5),
            Hwp("t1", 22.5),
            Hwp("t2", 22.5),
        ),
        patterns=fusion_patterns(),
    )
    circuit.validate()
    return circuit


def fused_target(amps) -> PureState:
    """The merged single-photon state for qudit amplitudes (t1H, t1V, t2H, t2V)."""
    amps = tuple(complex(a) for a in amps)
    vac = PureState.vacuum()
    comps = (("t1", H), ("t1", V), ("t2", H), ("t2", V))
    return sum(
        (a * vac.create(m, p) for a, (m, p) in zip(amps, comps) if a != 0),
        PureState.zero(),
    )


def product_qudit(psi, phi) -> tuple[complex, ...]:
    """Tensor-product amplitudes (a0*c0, a0*c1, a1*c0, a1*c1)."""
    a0, a1 = (complex(x) for x in psi)
    b0, b1 = (complex(x) for x in phi)
    return (a0 * b0, a0 * b1, a1 * b0, a1 * b1)


def run_fusion(
    psi=None,
    phi=None,
    *,
    entangled=None,
) -> list[ConditionalOutcome]:
    """Run the fusion apparatus; outcomes ordered HH, HV, VH, VV on (a, c).

    Either two qubit amplitude pairs or a single 4-amplitude entangled input
    for the t/c photon pair.
    """
    circuit = build_fusion_circuit()
    if entangled is not None:
        if psi is not None or phi is not None:
            raise ValueError("give either psi/phi or an entangled input")
        amps = normalized_amplitudes(entangled, 4)
        state = PureState.vacuum().create("a", H)
        comps = (("t", H, "c", H), ("t", H, "c", V), ("t", V, "c", H), ("t", V, "c", V))
        state = sum(
            (
                a * state.create(tm, tp).create(cm, cp)
                for a, (tm, tp, cm, cp) in zip(amps, comps)
                if a != 0
            ),
            PureState.zero(),
        )
        return run_circuit(circuit, input_state=state)
    if psi is None or phi is None:
        raise ValueError("psi and phi amplitude pairs are required")
    return run_circuit(circuit, bindings={"psi": tuple(psi), "phi": tuple(phi)})


def apply_feed_forward(outcome: ConditionalOutcome) -> PureState:
    """Correct a heralded fusion branch onto the canonical merged state.

    A V detection on ``a`` flips H/V on ``t1``; a V detection on ``c`` flips
    them on ``t2``.  Returns the corrected output-photon state on t1/t2.
    """
    if not isinstance(outcome.state, PureState):
        raise ValueError("feed-forward applies to pure conditional branches")
    pa = outcome.pattern.requirement_for("a")
    pc = outcome.pattern.requirement_for("c")
    if pa not in (H, V) or pc not in (H, V):
        raise ValueError("outcome does not carry a fusion detection pattern")
    state = outcome.state
    if pa == V:
        state = apply_sigma_x(state, "t1")
    if pc == V:
        state = apply_sigma_x(state, "t2")
    return state.factor_on_modes(("t1", "t2"))


# -- fission apparatus ------------------------------------------------------

FISSION_BRANCH_ORDER = ((H, "c"), (V, "c"), (H, "c'"), (V, "c'"))


def fission_patterns() -> tuple[DetectionPattern, ...]:
    out = []
    for pa, channel in FISSION_BRANCH_ORDER:
        other = "c'" if channel == "c" else "c"
        out.append(
            DetectionPattern.of({"a": pa, "t": "any", channel: "any", other: "none"})
        )
    return tuple(out)


def build_fission_circuit() -> Circuit:
    """Three-photon fission apparatus (the fusion layout traversed backwards).

    The four-dimensional photon enters on ``c1``/``c2``; target and ancilla
    photons enter H-polarized on ``t`` and ``a``.  The PBS recombining
    ``c1``/``c2`` has two exits ``c`` and ``c'``; a NOT plate on ``c'``
    aligns that channel's polarization with the ``c`` exit.
    """
    circuit = Circuit(
        modes=("c1", "c2", "t", "a", "c", "c'"),
        inputs=(QuditSlot("c1", "c2", "input"), PhotonIn("t", H), PhotonIn("a", H)),
        elements=(
            Hwp("a", 22.5),
            Hwp("t", 22.5),
            Hwp("c1", 22.5),
            Hwp("c2", 22.5),
            Pbs("t", "c2", "t", "c2"),
            Pbs("a", "c1", "a", "c1"),
            Hwp("c1", 22.5),
            Hwp("c2", 22.5),
            SigmaX("c2"),
            Pbs("c1", "c2", "c", "c'"),
            SigmaX("c'"),
            Hwp("a", 22.5),
            Hwp("t", 22.5),
            Pbs("t", "a", "t", "a"),
            Hwp("a", 22.5),
        ),
        patterns=fission_patterns(),
    )
    circuit.validate()
    return circuit


def run_fission(amps) -> list[ConditionalOutcome]:
    """Run the fission apparatus on qudit amplitudes (c1H, c1V, c2H, c2V).

    Outcomes ordered (H_a, c), (V_a, c), (H_a, c'), (V_a, c').
    """
    circuit = build_fission_circuit()
    return run_circuit(circuit, bindings={"input": tuple(amps)})


def fission_success_target(amps) -> PureState:
    """Expected split two-photon state on (t, c) for the heralded branch."""
    amps = tuple(complex(a) for a in amps)
    vac = PureState.vacuum()
    comps = ((H, H), (V, H), (H, V), (V, V))
    return sum(
        (
            a * vac.create("t", tp).create("c", cp)
            for a, (tp, cp) in zip(amps, comps)
            if a != 0
        ),
        PureState.zero(),
    )


def fission_feed_forward(outcome: ConditionalOutcome) -> PureState:
    """Correct a heralded fission branch onto the canonical split state.

    A V-polarized ancilla needs a sign flip of the V component on ``t``; an
    exit through ``c'`` needs an H/V swap on ``t`` (flip applied first), and
    the output is relabeled onto ``c``.  Returns the two-photon state on
    (t, c).
    """
    if not isinstance(outcome.state, PureState):
        raise ValueError("feed-forward applies to pure conditional branches")
    pa = outcome.pattern.requirement_for("a")
    via_prime = outcome.pattern.requirement_for("c'") == "any"
    if pa not in (H, V):
        raise ValueError("outcome does not carry a fission detection pattern")
    state = outcome.state
    if pa == V:
        state = apply_sign_flip_v(state, "t")
    if via_prime:
        state = apply_sigma_x(state, "t")
        state = apply_relabel(state, "c'", "c")
    return state.factor_on_modes(("t", "c"))
