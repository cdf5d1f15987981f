"""Couplings of the lazy local Metropolis chain and disagreement tracking.

Three constructions live here: the local coupling for colorings that
disagree at a single vertex (shared laziness, Red/Blue-switched proposals
near the disagreement), its path-coupling extension to arbitrary pairs,
and the identical coupling that drives a plain-graph chain and a
mixed-graph chain with the same randomness.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .chain import ChainParams, Coloring, StepChoices, sample_choices, step, step_mixed
from .graph import Graph, MixedGraph


class NotAdjacent(ValueError):
    """The two colorings do not differ at exactly one vertex."""


class ProposalMode(Enum):
    IDENTICAL = "identical"
    RED_BLUE_SWITCHED = "red-blue-switched"


@dataclass(frozen=True)
class ProposalCouplingMode:
    """How one disagreement-adjacent vertex's proposals are coupled."""

    mode: ProposalMode
    red: int | None = None
    blue: int | None = None


@dataclass(frozen=True)
class CoupledPair:
    """Two colorings with their disagreement set and Hamming distance."""

    x: Coloring
    y: Coloring
    disagreement: np.ndarray
    hamming: int

    @classmethod
    def of(cls, x: Coloring, y: Coloring) -> "CoupledPair":
        dis = np.nonzero(x != y)[0]
        return cls(x=x, y=y, disagreement=dis, hamming=len(dis))

    def check(self) -> None:
        dis = np.nonzero(self.x != self.y)[0]
        if not np.array_equal(dis, self.disagreement) or self.hamming != len(dis):
            raise ValueError("disagreement fields inconsistent with colorings")


@dataclass(frozen=True)
class TraceRecord:
    round: int
    hamming: int
    new_disagreements: int
    cumulative: int
    max_dist_from_seed: int
    max_nbhd_disagreements: int | None = None


@dataclass
class CouplingTrace:
    """Per-round disagreement history of one coupled run."""

    records: list[TraceRecord] = field(default_factory=list)
    coalesced_at: int | None = None
    containment_violations: int = 0
    spread_violations: int = 0
    violation_examples: list[str] = field(default_factory=list)

    def check(self) -> None:
        cums = [r.cumulative for r in self.records]
        for a, b in zip(cums, cums[1:]):
            if b < a:
                raise ValueError("cumulative disagreement set shrank")
        for r in self.records:
            if r.hamming > r.cumulative:
                raise ValueError("hamming exceeds cumulative disagreements")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["round", "hamming", "new_disagreements", "cumulative", "max_dist_from_seed"]
            )
            for r in self.records:
                writer.writerow(
                    [r.round, r.hamming, r.new_disagreements, r.cumulative, r.max_dist_from_seed]
                )


def swap_red_blue(color: int, red: int, blue: int) -> int:
    if color == red:
        return blue
    if color == blue:
        return red
    return color


def couple_proposals(
    g: Graph, x: Coloring, y: Coloring, v0: int, choices: StepChoices
) -> tuple[StepChoices, dict[int, ProposalCouplingMode]]:
    """Derive the Y-chain's choices from the X-chain's, for x ⊕ y = {v0}.

    Laziness is shared. Proposals are identical everywhere except at active
    neighbors of v0, which switch the roles of Red = x(v0) and Blue = y(v0)
    unless a trigger forces identical coupling: some neighbor u != v0
    currently colored Red/Blue, or some active neighbor outside Γ(v0) whose
    (shared) proposal is Red/Blue.
    """
    blue = int(y[v0])
    cy = choices.proposals.copy()
    modes: dict[int, ProposalCouplingMode] = {}
    _couple_link(g, x, v0, blue, choices.active, cy, modes)
    return StepChoices(active=choices.active, proposals=cy), modes


def _couple_link(
    g: Graph,
    z: Coloring,
    v0: int,
    blue: int,
    active: np.ndarray,
    props: np.ndarray,
    modes: dict | None = None,
) -> None:
    """Rewrite ``props`` in place from the Z_{i-1} side to the Z_i side of
    one path-coupling link; ``z`` holds Z_{i-1}, whose color at v0 is Red.

    Triggers only read proposals outside Γ(v0), which this link never
    touches, so the in-place sweep is order-independent.
    """
    red = int(z[v0])
    nbr0 = g.adj[v0]
    nbr0_set = set(nbr0.tolist())
    for v in nbr0:
        v = int(v)
        if not active[v]:
            continue
        triggered = False
        for u in g.adj[v]:
            u = int(u)
            if u != v0 and (z[u] == red or z[u] == blue):
                triggered = True
                break
        if not triggered:
            for u in g.adj[v]:
                u = int(u)
                if u in nbr0_set or not active[u]:
                    continue
                cu = props[u]
                if cu == red or cu == blue:
                    triggered = True
                    break
        if triggered:
            mode = ProposalCouplingMode(ProposalMode.IDENTICAL, red, blue)
        else:
            mode = ProposalCouplingMode(ProposalMode.RED_BLUE_SWITCHED, red, blue)
            props[v] = swap_red_blue(int(props[v]), red, blue)
        if modes is not None:
            modes[v] = mode


def local_coupling_step(
    g: Graph,
    params: ChainParams,
    x: Coloring,
    y: Coloring,
    v0: int,
    round_index: int,
) -> tuple[Coloring, Coloring]:
    """One coupled transition for colorings differing exactly at v0.

    Both marginals follow the single-chain kernel: the X side uses the raw
    round choices and the Y side a measure-preserving rewrite of them.
    """
    dis = np.nonzero(x != y)[0]
    if len(dis) != 1 or dis[0] != v0:
        raise NotAdjacent(f"colorings must differ exactly at {{{v0}}}, differ at {dis}")
    choices = sample_choices(params, round_index, g.n)
    choices_y, _ = couple_proposals(g, x, y, v0, choices)
    return step(g, params, x, choices), step(g, params, y, choices_y)


def path_coupling_step(
    g: Graph,
    params: ChainParams,
    x: Coloring,
    y: Coloring,
    round_index: int,
) -> tuple[Coloring, Coloring]:
    """Coupled transition for an arbitrary pair, via the interpolation path.

    Disagreeing vertices are taken in ascending index order; each link
    rewrites the running proposal vector by the local-coupling rule,
    conditioning on everything sampled so far.
    """
    diff = np.nonzero(x != y)[0]
    choices = sample_choices(params, round_index, g.n)
    if len(diff) == 0:
        x2 = step(g, params, x, choices)
        return x2, x2.copy()
    props = choices.proposals.copy()
    z = x.copy()
    for vi in diff:
        vi = int(vi)
        _couple_link(g, z, vi, int(y[vi]), choices.active, props)
        z[vi] = y[vi]
    x2 = step(g, params, x, choices)
    y2 = step(g, params, y, StepChoices(active=choices.active, proposals=props))
    return x2, y2


def couple_until_coalesced(
    g: Graph,
    params: ChainParams,
    x0: Coloring,
    y0: Coloring,
    max_rounds: int,
) -> CouplingTrace:
    """Iterate the path coupling until the chains agree or the budget ends.

    Each round is audited: disagreements never spawn at distance >= 2 from
    the previous disagreement set, and for a single-vertex initial
    disagreement at v the live set stays inside the radius-t ball around v.
    Violations are recorded, never silently dropped; non-coalescence within
    ``max_rounds`` leaves ``coalesced_at`` as None.
    """
    x = np.asarray(x0, dtype=np.int64).copy()
    y = np.asarray(y0, dtype=np.int64).copy()
    dis = x != y
    d0 = np.nonzero(dis)[0]
    trace = CouplingTrace()
    if len(d0) == 0:
        trace.coalesced_at = 0
        trace.records.append(TraceRecord(0, 0, 0, 0, 0))
        return trace
    dist_seed = g.distances_from_set(d0)
    single_seed = len(d0) == 1
    cumulative = dis.copy()
    trace.records.append(
        TraceRecord(0, int(dis.sum()), int(dis.sum()), int(cumulative.sum()), 0)
    )
    prev = dis
    for t in range(1, max_rounds + 1):
        x, y = path_coupling_step(g, params, x, y, t)
        dis = x != y
        new_idx = np.nonzero(dis & ~prev)[0]
        for w in new_idx:
            if not prev[g.adj[int(w)]].any():
                trace.spread_violations += 1
                if len(trace.violation_examples) < 8:
                    trace.violation_examples.append(
                        f"round {t}: vertex {int(w)} disagreed with no disagreeing neighbor"
                    )
        if single_seed and dis.any():
            worst = int(dist_seed[dis].max())
            if worst > t:
                trace.containment_violations += 1
                if len(trace.violation_examples) < 8:
                    trace.violation_examples.append(
                        f"round {t}: disagreement at distance {worst} > t from seed"
                    )
        cumulative |= dis
        trace.records.append(
            TraceRecord(
                t,
                int(dis.sum()),
                int(len(new_idx)),
                int(cumulative.sum()),
                int(dist_seed[cumulative].max()),
            )
        )
        prev = dis
        if not dis.any():
            trace.coalesced_at = t
            break
    return trace


def run_identical_coupling(
    g: Graph,
    mg: MixedGraph,
    params: ChainParams,
    x0: Coloring,
    rounds: int,
) -> CouplingTrace:
    """Drive the plain chain on g and the mixed chain on mg with the same
    (activeness, proposals) every round, from a shared start.

    The trace records, per round, the worst per-vertex neighborhood overlap
    max_u |D_<=t ∩ Γ(u)| of the cumulative disagreement set, and when mg
    has a recorded center v, audits D_<=t ⊆ B_{t+3}(v).
    """
    if mg.base is not g:
        if mg.base.n != g.n or not np.array_equal(mg.base.edges, g.edges):
            raise ValueError("mixed graph must share the plain graph's edge set")
    n = g.n
    x = np.asarray(x0, dtype=np.int64).copy()
    xs = x.copy()
    cumulative = np.zeros(n, dtype=bool)
    dist_center = (
        g.distances_from(mg.center) if mg.center is not None else None
    )
    trace = CouplingTrace()
    trace.records.append(TraceRecord(0, 0, 0, 0, 0, 0))
    prev = np.zeros(n, dtype=bool)
    for t in range(1, rounds + 1):
        choices = sample_choices(params, t, n)
        x = step(g, params, x, choices)
        xs = step_mixed(mg, params, xs, choices)
        dis = x != xs
        new = int((dis & ~prev).sum())
        cumulative |= dis
        counts = np.bincount(g.edge_u[cumulative[g.edge_w]], minlength=n)
        counts += np.bincount(g.edge_w[cumulative[g.edge_u]], minlength=n)
        max_nbhd = int(counts.max()) if n else 0
        if dist_center is not None and cumulative.any():
            worst = int(dist_center[cumulative].max())
            if worst > t + 3:
                trace.containment_violations += 1
                if len(trace.violation_examples) < 8:
                    trace.violation_examples.append(
                        f"round {t}: disagreement at distance {worst} > t+3 from center"
                    )
            max_dist = worst
        else:
            max_dist = 0
        trace.records.append(
            TraceRecord(t, int(dis.sum()), new, int(cumulative.sum()), max_dist, max_nbhd)
        )
        prev = dis
    return trace


def local_coupling_violations(
    g: Graph,
    x: Coloring,
    y: Coloring,
    x_next: Coloring,
    y_next: Coloring,
    choices_x: StepChoices,
    choices_y: StepChoices,
    v0: int,
) -> list[str]:
    """Audit one local-coupling execution against its structural guarantees.

    Checks, for Red = x(v0), Blue = y(v0):
      1. next to any shared Red/Blue vertex u != v0, every active neighbor
         proposed identically in both chains;
      2. each active v in Γ(v0) is coupled identically exactly when a
         trigger holds, switched otherwise, and an identical coupling is
         witnessed by some neighbor that is currently or proposal-wise
         Red/Blue in both chains;
      3. a vertex u != v0 ends up disagreeing only if it was active with
         both proposals inside {Red, Blue};
    plus the bookkeeping fact that proposals outside Γ(v0) are shared.
    Returns human-readable violation strings; empty means clean.
    """
    red, blue = int(x[v0]), int(y[v0])
    act = choices_x.active
    cx, cy = choices_x.proposals, choices_y.proposals
    nbr0 = set(g.adj[v0].tolist())
    violations: list[str] = []

    if not np.array_equal(act, choices_y.active):
        violations.append("active sets differ between the chains")

    for u in range(g.n):
        if u == v0 or not act[u]:
            continue
        if u not in nbr0 and cx[u] != cy[u]:
            violations.append(f"vertex {u} outside Γ(v0) proposed differently")

    for u in range(g.n):
        if u == v0 or x[u] != y[u] or x[u] not in (red, blue):
            continue
        for w in g.adj[u]:
            w = int(w)
            if act[w] and cx[w] != cy[w]:
                violations.append(
                    f"vertex {w} next to shared Red/Blue vertex {u} proposed inconsistently"
                )

    for v in nbr0:
        if not act[v]:
            continue
        trig = any(
            int(u) != v0 and x[int(u)] in (red, blue) for u in g.adj[v]
        ) or any(
            int(u) not in nbr0 and act[int(u)] and cx[int(u)] in (red, blue)
            for u in g.adj[v]
        )
        expected = cx[v] if trig else swap_red_blue(int(cx[v]), red, blue)
        if cy[v] != expected:
            violations.append(
                f"vertex {v} in Γ(v0): expected {'identical' if trig else 'switched'}"
                f" proposal, got {int(cy[v])} from {int(cx[v])}"
            )
        if trig:
            witnessed = any(
                (int(u) != v0 and x[int(u)] == y[int(u)] and x[int(u)] in (red, blue))
                or (act[int(u)] and cx[int(u)] == cy[int(u)] and cx[int(u)] in (red, blue))
                for u in g.adj[v]
            )
            if not witnessed:
                violations.append(f"vertex {v}: identical coupling without a witness")

    for u in range(g.n):
        if u == v0 or x_next[u] == y_next[u]:
            continue
        if not act[u]:
            violations.append(f"lazy vertex {u} changed disagreement status")
        elif not (cx[u] in (red, blue) and cy[u] in (red, blue)):
            violations.append(
                f"vertex {u} disagrees with proposals ({int(cx[u])},{int(cy[u])})"
                " outside {Red, Blue}"
            )
    return violations
