"""Linear optical elements acting on states by creation-operator substitution.

Conventions: a half-wave plate at angle theta (degrees from the H axis)
applies the Jones matrix [[cos 2t, sin 2t], [sin 2t, -cos 2t]]; polarizing
beam splitters transmit H and reflect V without adding a phase.  Every
element preserves total photon number, and all act identically on each
distinguishability tag sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .states import H, V, PureState


@dataclass(frozen=True)
class Hwp:
    """Half-wave plate on one mode; ``theta`` in degrees."""

    mode: str
    theta: float


@dataclass(frozen=True)
class Pbs:
    """Polarizing beam splitter between two spatial modes."""

    in1: str
    in2: str
    out1: str
    out2: str


@dataclass(frozen=True)
class Unfold:
    """Split a mode by polarization: H goes to ``out_h``, V to ``out_v``."""

    src: str
    out_h: str
    out_v: str


@dataclass(frozen=True)
class Merge:
    """Inverse of Unfold: recombine an H-only and a V-only mode."""

    in_h: str
    in_v: str
    out: str


@dataclass(frozen=True)
class Relabel:
    src: str
    dst: str


@dataclass(frozen=True)
class SigmaX:
    """Swap H and V on one mode (a NOT in the polarization basis)."""

    mode: str


@dataclass(frozen=True)
class SignFlipV:
    """Negate the V amplitude on one mode."""

    mode: str


OpticalElement = Hwp | Pbs | Unfold | Merge | Relabel | SigmaX | SignFlipV


def apply_hwp(state: PureState, mode: str, theta: float) -> PureState:
    rad = math.radians(2.0 * theta)
    c, s = math.cos(rad), math.sin(rad)
    return state.substituted(
        {
            (mode, H): (((mode, H), c), ((mode, V), s)),
            (mode, V): (((mode, H), s), ((mode, V), -c)),
        }
    )


def apply_pbs(state: PureState, in1: str, in2: str, out1: str, out2: str) -> PureState:
    return state.substituted(
        {
            (in1, H): (((out1, H), 1.0),),
            (in1, V): (((out2, V), 1.0),),
            (in2, H): (((out2, H), 1.0),),
            (in2, V): (((out1, V), 1.0),),
        }
    )


def apply_unfold(state: PureState, src: str, out_h: str, out_v: str) -> PureState:
    for target in (out_h, out_v):
        if target in state.modes():
            raise ValueError(f"unfold target {target!r} already carries photons")
    return state.substituted(
        {
            (src, H): (((out_h, H), 1.0),),
            (src, V): (((out_v, V), 1.0),),
        }
    )


def apply_merge(state: PureState, in_h: str, in_v: str, out: str) -> PureState:
    for occ, _ in state.items():
        for (mode, channel, _tag), _n in occ:
            if (mode == in_h and channel == V) or (mode == in_v and channel == H):
                raise ValueError(
                    f"merge undefined: {mode!r} carries the reflected polarization"
                )
    return state.substituted(
        {
            (in_h, H): (((out, H), 1.0),),
            (in_v, V): (((out, V), 1.0),),
        }
    )


def apply_relabel(state: PureState, src: str, dst: str) -> PureState:
    if src == dst:
        return state
    if dst in state.modes():
        raise ValueError(f"relabel target {dst!r} already carries photons")
    return state.substituted(
        {
            (src, H): (((dst, H), 1.0),),
            (src, V): (((dst, V), 1.0),),
        }
    )


def apply_sigma_x(state: PureState, mode: str) -> PureState:
    return state.substituted(
        {
            (mode, H): (((mode, V), 1.0),),
            (mode, V): (((mode, H), 1.0),),
        }
    )


def apply_sign_flip_v(state: PureState, mode: str) -> PureState:
    return state.substituted({(mode, V): (((mode, V), -1.0),)})


def apply_element(state: PureState, element: OpticalElement) -> PureState:
    match element:
        case Hwp(mode, theta):
            return apply_hwp(state, mode, theta)
        case Pbs(in1, in2, out1, out2):
            return apply_pbs(state, in1, in2, out1, out2)
        case Unfold(src, out_h, out_v):
            return apply_unfold(state, src, out_h, out_v)
        case Merge(in_h, in_v, out):
            return apply_merge(state, in_h, in_v, out)
        case Relabel(src, dst):
            return apply_relabel(state, src, dst)
        case SigmaX(mode):
            return apply_sigma_x(state, mode)
        case SignFlipV(mode):
            return apply_sign_flip_v(state, mode)
    raise TypeError(f"unknown optical element {element!r}")
