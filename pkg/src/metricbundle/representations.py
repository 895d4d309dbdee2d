"""Transport of states, duals, and operators between the three pictures.

S  — Schroedinger: states evolve, duals carry the metric, O_S(t) as given.
H  — Heisenberg: states frozen at t0, operators O_H = U_L O_S U_R.
HL — Heisenberg-like: states frozen and premultiplied by the initial
     vielbein, duals are exact conjugates, operators O_HL = E O_S inv(E).

A fourth tag, NAIVE, marks operators transported with the conventional
adj(U) O U rule. It is kept deliberately distinct: for non-Hermitian
dynamics that transport is NOT a similarity transformation and breaks
commutation relations, which is exactly what the diagnostic is for.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, TagMismatchError
from .evolution import EvolutionBundle
from .matops import DEFAULT_TOL, Tolerance, as_matrix, commutator, frobenius, inverse

__all__ = [
    "RepresentationTag",
    "TaggedState",
    "TaggedOperator",
    "expectation_schrodinger",
    "to_heisenberg",
    "to_heisenberg_like",
    "heisenberg_state",
    "heisenberg_like_state",
    "expectation_heisenberg",
    "expectation_heisenberg_like",
    "heisenberg_rhs",
    "hermitized_hamiltonian",
    "commutator_transport_check",
    "naive_dagger_transport",
    "naive_commutator_residual",
]


class RepresentationTag(enum.Enum):
    S = "S"
    H = "H"
    HL = "HL"
    NAIVE = "NAIVE"


@dataclass(frozen=True)
class TaggedState:
    rep: RepresentationTag
    ket: np.ndarray
    dual: np.ndarray  # row covector components
    time: float


@dataclass(frozen=True)
class TaggedOperator:
    rep: RepresentationTag
    matrix: np.ndarray
    time: float


def _require(op: TaggedOperator, tag: RepresentationTag, what: str) -> None:
    if op.rep is not tag:
        raise TagMismatchError(f"{what} requires a {tag.value}-tagged operator, got {op.rep.value}")


def expectation_schrodinger(bundle: EvolutionBundle, index: int, obs) -> complex:
    """dual . O . ket at a grid node, with dual = adj(psi) G(t)."""
    obs = as_matrix(obs, "observable")
    psi = bundle.psi[index]
    if obs.shape[0] != psi.shape[0]:
        raise DimensionMismatchError("observable dimension mismatch")
    return complex(psi.conj() @ bundle.g[index] @ obs @ psi)


def to_heisenberg(obs_s: TaggedOperator, bundle: EvolutionBundle, index: int) -> TaggedOperator:
    """Similarity transport U_L O_S U_R; isospectral with the input."""
    _require(obs_s, RepresentationTag.S, "to_heisenberg")
    return TaggedOperator(
        RepresentationTag.H,
        bundle.u_l[index] @ obs_s.matrix @ bundle.u_r[index],
        float(bundle.ts[index]),
    )


def to_heisenberg_like(
    obs_s: TaggedOperator,
    bundle: EvolutionBundle,
    index: int,
    tol: Tolerance = DEFAULT_TOL,
) -> TaggedOperator:
    """Vielbein transport E O_S inv(E); singular near an exceptional point."""
    _require(obs_s, RepresentationTag.S, "to_heisenberg_like")
    e = bundle.e[index]
    return TaggedOperator(
        RepresentationTag.HL,
        e @ obs_s.matrix @ inverse(e, tol),
        float(bundle.ts[index]),
    )


def heisenberg_state(bundle: EvolutionBundle) -> TaggedState:
    ket = bundle.psi[0]
    return TaggedState(
        RepresentationTag.H,
        ket,
        ket.conj() @ bundle.g0,
        float(bundle.ts[0]),
    )


def heisenberg_like_state(bundle: EvolutionBundle) -> TaggedState:
    ket = bundle.e[0] @ bundle.psi[0]
    # The HL dual is the exact conjugate of the ket, by construction.
    return TaggedState(RepresentationTag.HL, ket, ket.conj(), float(bundle.ts[0]))


def _bilinear(state: TaggedState, op: TaggedOperator, tag: RepresentationTag) -> complex:
    if state.rep is not tag or op.rep is not tag:
        raise TagMismatchError(
            f"expectation requires matching {tag.value} tags, "
            f"got state={state.rep.value}, operator={op.rep.value}"
        )
    return complex(state.dual @ op.matrix @ state.ket)


def expectation_heisenberg(state: TaggedState, op: TaggedOperator) -> complex:
    return _bilinear(state, op, RepresentationTag.H)


def expectation_heisenberg_like(state: TaggedState, op: TaggedOperator) -> complex:
    return _bilinear(state, op, RepresentationTag.HL)


def heisenberg_rhs(
    obs_h: TaggedOperator, h_h: TaggedOperator, dt_obs_h: TaggedOperator
) -> np.ndarray:
    """i [H_H, O_H] + (dO/dt)_H — the equation of motion for H-picture operators."""
    for op, what in ((obs_h, "observable"), (h_h, "hamiltonian"), (dt_obs_h, "d/dt observable")):
        _require(op, RepresentationTag.H, f"heisenberg_rhs {what}")
    return 1j * commutator(h_h.matrix, obs_h.matrix) + dt_obs_h.matrix


def hermitized_hamiltonian(h_s, e, de_dt, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """E H_S inv(E) + i (dE/dt) inv(E) — the generator seen by vielbein states.

    In the zero-generator gauge (dE/dt = i E H_S) the two terms cancel and the
    returned norm is a pure numerical residual.
    """
    e_inv = inverse(e, tol)
    return e @ as_matrix(h_s) @ e_inv + 1j * as_matrix(de_dt) @ e_inv


def commutator_transport_check(
    oa_s: TaggedOperator, ob_s: TaggedOperator, bundle: EvolutionBundle, index: int
) -> float:
    """Relative gap between transported commutator and commutator of transports."""
    for op in (oa_s, ob_s):
        _require(op, RepresentationTag.S, "commutator_transport_check")
    oa_h = to_heisenberg(oa_s, bundle, index).matrix
    ob_h = to_heisenberg(ob_s, bundle, index).matrix
    comm_s = TaggedOperator(RepresentationTag.S, commutator(oa_s.matrix, ob_s.matrix), oa_s.time)
    transported = to_heisenberg(comm_s, bundle, index).matrix
    scale = max(1.0, frobenius(oa_h) * frobenius(ob_h))
    return frobenius(commutator(oa_h, ob_h) - transported) / scale


def naive_dagger_transport(
    obs_s: TaggedOperator, bundle: EvolutionBundle, index: int
) -> TaggedOperator:
    """Conventional adj(U) O_S U transport, kept as a diagnostic picture."""
    _require(obs_s, RepresentationTag.S, "naive_dagger_transport")
    u = bundle.u_r[index]
    return TaggedOperator(
        RepresentationTag.NAIVE,
        u.conj().T @ obs_s.matrix @ u,
        float(bundle.ts[index]),
    )


def naive_commutator_residual(
    oa_s: TaggedOperator, ob_s: TaggedOperator, bundle: EvolutionBundle, index: int
) -> float:
    """As commutator_transport_check but with the conventional transport."""
    for op in (oa_s, ob_s):
        _require(op, RepresentationTag.S, "naive_commutator_residual")
    u = bundle.u_r[index]
    oa_n = naive_dagger_transport(oa_s, bundle, index).matrix
    ob_n = naive_dagger_transport(ob_s, bundle, index).matrix
    transported = u.conj().T @ commutator(oa_s.matrix, ob_s.matrix) @ u
    scale = max(1.0, frobenius(oa_n) * frobenius(ob_n))
    return frobenius(commutator(oa_n, ob_n) - transported) / scale
