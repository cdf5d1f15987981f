"""One-round transition kernels for the lazy local Metropolis chain.

The synchronous round: every vertex activates independently with
probability p, active vertices propose uniform colors, and a vertex keeps
its proposal only when every incident edge check passes. ``step`` is a pure
function of the immutable (coloring, choices) snapshot, so any
vertex-partitioned parallel evaluation produces the same result.

Colors are 1-based: [q] = {1, ..., q}.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .graph import Graph, MixedGraph
from .rng import (
    STREAM_ACTIVE,
    STREAM_BATCH,
    STREAM_PROPOSAL,
    stream,
    uniform_colors,
)

Coloring = np.ndarray


class NoAvailableColor(ValueError):
    """Every color is blocked by a neighbor."""


class MalformedContext(ValueError):
    """EdgeCheckContext fields do not match its kind."""


@dataclass(frozen=True)
class ChainParams:
    """Color count q, activeness p in (0,1), and the 64-bit stream seed."""

    q: int
    p: float
    seed: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be a positive integer")
        if not 0.0 < self.p < 1.0:
            raise ValueError("activeness p must lie strictly inside (0,1)")

    def convergence_guaranteed(self, g: Graph | MixedGraph) -> bool:
        """True when q >= max degree + 2, the convergence hypothesis."""
        base = g.base if isinstance(g, MixedGraph) else g
        return self.q >= base.max_degree + 2


@dataclass(frozen=True)
class StepChoices:
    """One round's randomness: activeness flags and per-vertex proposals.

    ``proposals[v]`` is a color in [q] exactly when ``active[v]``, and 0
    otherwise, so misuse is loud.
    """

    active: np.ndarray
    proposals: np.ndarray

    def __post_init__(self):
        if self.active.shape != self.proposals.shape:
            raise ValueError("active and proposals must have equal length")
        if self.active.dtype != np.bool_:
            raise ValueError("active must be a boolean array")

    @property
    def n(self) -> int:
        return len(self.active)

    def proposal_map(self) -> dict[int, int]:
        idx = np.nonzero(self.active)[0]
        return {int(v): int(self.proposals[v]) for v in idx}


def sample_choices(params: ChainParams, round_index: int, n: int) -> StepChoices:
    """Draw one round of choices, addressed per (seed, round, tag, vertex)."""
    u_act = stream(params.seed, round_index, STREAM_ACTIVE).random(n)
    active = u_act < params.p
    u_prop = stream(params.seed, round_index, STREAM_PROPOSAL).random(n)
    proposals = uniform_colors(u_prop, params.q)
    proposals[~active] = 0
    return StepChoices(active=active, proposals=proposals)


class EdgeKind(Enum):
    UNDIRECTED_BOTH_ACTIVE = "undirected-both-active"
    UNDIRECTED_ONE_LAZY = "undirected-one-lazy"
    DIRECTED_OUT_ACTIVE_HEAD = "directed-out-active-head"
    DIRECTED_OUT_LAZY_HEAD = "directed-out-lazy-head"


# Which context fields each kind reads. The initiator is always active;
# "head" is the peer vertex the check looks at.
_REQUIRED_FIELDS = {
    EdgeKind.UNDIRECTED_BOTH_ACTIVE: (
        "initiator_color",
        "initiator_proposal",
        "head_color",
        "head_proposal",
    ),
    EdgeKind.UNDIRECTED_ONE_LAZY: ("initiator_proposal", "head_color"),
    EdgeKind.DIRECTED_OUT_ACTIVE_HEAD: (
        "initiator_color",
        "initiator_proposal",
        "head_proposal",
    ),
    EdgeKind.DIRECTED_OUT_LAZY_HEAD: (),
}

_ALL_FIELDS = ("initiator_color", "initiator_proposal", "head_color", "head_proposal")


@dataclass(frozen=True)
class EdgeCheckContext:
    """Inputs for one edge check, initiated at an active vertex.

    Undirected kinds also cover inward directed edges, which use the same
    rules; the directed kinds are for the initiator's outgoing edge, whose
    check ignores the head's current color.
    """

    kind: EdgeKind
    initiator_color: int | None = None
    initiator_proposal: int | None = None
    head_color: int | None = None
    head_proposal: int | None = None


def check_edge(ctx: EdgeCheckContext) -> bool:
    """Apply the filter for one edge; True means the check passes."""
    required = _REQUIRED_FIELDS[ctx.kind]
    for name in _ALL_FIELDS:
        value = getattr(ctx, name)
        if name in required and value is None:
            raise MalformedContext(f"{ctx.kind.value} requires {name}")
        if name not in required and value is not None:
            raise MalformedContext(f"{ctx.kind.value} must not set {name}")
    if ctx.kind is EdgeKind.UNDIRECTED_BOTH_ACTIVE:
        return (
            ctx.initiator_proposal != ctx.head_proposal
            and ctx.initiator_proposal != ctx.head_color
            and ctx.initiator_color != ctx.head_proposal
        )
    if ctx.kind is EdgeKind.UNDIRECTED_ONE_LAZY:
        return ctx.initiator_proposal != ctx.head_color
    if ctx.kind is EdgeKind.DIRECTED_OUT_ACTIVE_HEAD:
        return (
            ctx.initiator_proposal != ctx.head_proposal
            and ctx.initiator_color != ctx.head_proposal
        )
    return True  # DIRECTED_OUT_LAZY_HEAD


def _blocked(n: int, fail_u: np.ndarray, idx_u: np.ndarray, fail_w, idx_w) -> np.ndarray:
    counts = np.bincount(idx_u[fail_u], minlength=n)
    counts += np.bincount(idx_w[fail_w], minlength=n)
    return counts > 0


def accepted_vertices(g: Graph, x: Coloring, choices: StepChoices) -> np.ndarray:
    """Boolean mask of vertices that accept their proposal this round."""
    act, c = choices.active, choices.proposals
    eu, ew = g.edge_u, g.edge_w
    au, aw = act[eu], act[ew]
    cu, cw = c[eu], c[ew]
    xu, xw = x[eu], x[ew]
    fail = (
        (au & aw & ((cu == cw) | (cu == xw) | (xu == cw)))
        | (au & ~aw & (cu == xw))
        | (~au & aw & (cw == xu))
    )
    return act & ~_blocked(g.n, fail, eu, fail, ew)


def step(g: Graph, params: ChainParams, x: Coloring, choices: StepChoices) -> Coloring:
    """One synchronous round on a plain graph."""
    accept = accepted_vertices(g, x, choices)
    return np.where(accept, choices.proposals, x)


def step_mixed(
    mg: MixedGraph, params: ChainParams, x: Coloring, choices: StepChoices
) -> Coloring:
    """One synchronous round on a mixed graph.

    Undirected and inward edges use the plain filters; an outgoing edge's
    check ignores the head's current color and always passes toward a lazy
    head. With no directed edges this reduces bit-exactly to ``step``.
    """
    act, c = choices.active, choices.proposals
    n = mg.n

    su, sw = mg.un_u, mg.un_w
    au, aw = act[su], act[sw]
    cu, cw = c[su], c[sw]
    xu, xw = x[su], x[sw]
    fail_un = (
        (au & aw & ((cu == cw) | (cu == xw) | (xu == cw)))
        | (au & ~aw & (cu == xw))
        | (~au & aw & (cw == xu))
    )

    tl, hd = mg.dir_tail, mg.dir_head
    at, ah = act[tl], act[hd]
    ct, ch = c[tl], c[hd]
    xt, xh = x[tl], x[hd]
    # tail -> head: trimmed filter, oblivious to the head's current color
    fail_tail = at & ah & ((ct == ch) | (xt == ch))
    # head -> tail: full filter toward an active tail, boundary rule otherwise
    fail_head = ah & (
        (at & ((ch == ct) | (ch == xt) | (xh == ct))) | (~at & (ch == xt))
    )

    counts = np.bincount(su[fail_un], minlength=n)
    counts += np.bincount(sw[fail_un], minlength=n)
    counts += np.bincount(tl[fail_tail], minlength=n)
    counts += np.bincount(hd[fail_head], minlength=n)
    accept = act & (counts == 0)
    return np.where(accept, c, x)


def available_colors(g: Graph | MixedGraph, q: int, x: Coloring, v: int) -> np.ndarray:
    """Colors in [q] not used by any neighbor of v, ascending.

    Mixed graphs use the full neighborhood regardless of edge direction.
    """
    nbrs = g.neighbors(v)
    if len(nbrs) == 0:
        return np.arange(1, q + 1, dtype=np.int64)
    return np.setdiff1d(np.arange(1, q + 1, dtype=np.int64), x[nbrs])


def glauber_step(g: Graph, q: int, x: Coloring, v: int, u: float) -> Coloring:
    """Single-site heat-bath update: recolor v by quantile inversion of u
    over its available colors sorted ascending."""
    avail = available_colors(g, q, x, v)
    if len(avail) == 0:
        raise NoAvailableColor(f"vertex {v} has no available color")
    idx = min(int(u * len(avail)), len(avail) - 1)
    out = x.copy()
    out[v] = avail[idx]
    return out


def validate_coloring(x: Coloring, n: int, q: int) -> None:
    """Reject color vectors of the wrong length or with entries outside [q]."""
    arr = np.asarray(x)
    if arr.shape != (n,):
        raise ValueError(f"coloring must have length {n}, got shape {arr.shape}")
    if len(arr) and (arr.min() < 1 or arr.max() > q):
        raise ValueError(f"colors must lie in 1..{q}")


def run(
    g: Graph | MixedGraph,
    params: ChainParams,
    x0: Coloring,
    rounds: int,
    observer=None,
) -> Coloring:
    """Apply ``rounds`` synchronous rounds with choices at rounds 1..T.

    ``observer(round_index, coloring)``, when given, is invoked after each
    round on the coordinating thread.
    """
    kernel = step_mixed if isinstance(g, MixedGraph) else step
    n = g.n
    validate_coloring(x0, n, params.q)
    x = np.asarray(x0, dtype=np.int64).copy()
    for t in range(1, rounds + 1):
        x = kernel(g, params, x, sample_choices(params, t, n))
        if observer is not None:
            observer(t, x)
    return x


def is_proper(g: Graph | MixedGraph, x: Coloring) -> bool:
    base = g.base if isinstance(g, MixedGraph) else g
    if base.m == 0:
        return True
    return not bool(np.any(x[base.edge_u] == x[base.edge_w]))


def monochromatic(n: int, color: int = 1) -> Coloring:
    """Default worst-case start: every vertex the same color."""
    return np.full(n, color, dtype=np.int64)


# ---------------------------------------------------------------------------
# Batched variants: many independent chains advanced in lockstep. Draws are
# addressed by (seed, round, tag, chain, vertex) on a dedicated stream, so
# batch runs are reproducible but distinct from per-chain ``run`` streams.
# ---------------------------------------------------------------------------


def sample_choices_batch(
    params: ChainParams, round_index: int, n: int, batch: int
) -> tuple[np.ndarray, np.ndarray]:
    rng = stream(params.seed, round_index, STREAM_BATCH)
    active = rng.random((batch, n)) < params.p
    proposals = uniform_colors(rng.random((batch, n)), params.q)
    proposals[~active] = 0
    return active, proposals


def step_batch(
    g: Graph, x: np.ndarray, active: np.ndarray, proposals: np.ndarray
) -> np.ndarray:
    """Vectorized ``step`` over a (batch, n) block of colorings."""
    eu, ew = g.edge_u, g.edge_w
    au, aw = active[:, eu], active[:, ew]
    cu, cw = proposals[:, eu], proposals[:, ew]
    xu, xw = x[:, eu], x[:, ew]
    fail = (
        (au & aw & ((cu == cw) | (cu == xw) | (xu == cw)))
        | (au & ~aw & (cu == xw))
        | (~au & aw & (cw == xu))
    )
    blocked = np.zeros(x.shape, dtype=bool)
    np.logical_or.at(blocked, (slice(None), eu), fail)
    np.logical_or.at(blocked, (slice(None), ew), fail)
    accept = active & ~blocked
    return np.where(accept, proposals, x)
