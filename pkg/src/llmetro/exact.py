"""Brute-force ground truth on tiny instances.

Builds the full q^n x q^n transition matrix of the synchronous chain by
enumerating every activity pattern and proposal map, measures detailed
balance against the uniform-over-proper distribution, powers out exact
total-variation mixing curves, and hosts the missed-colors concentration
oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .chain import (
    ChainParams,
    Coloring,
    StepChoices,
    sample_choices_batch,
    step,
    step_batch,
)
from .graph import Graph
from .rng import STREAM_BATCH, derive_seed, stream

STATE_GUARD = 100_000


class StateSpaceTooLarge(ValueError):
    """q^n exceeds the enumeration guard."""


class GammaViolated(ValueError):
    """A per-draw distribution puts more than gamma mass on a tracked color."""


def _check_guard(n: int, q: int, guard: int = STATE_GUARD) -> int:
    size = q**n
    if size > guard:
        raise StateSpaceTooLarge(f"q^n = {size} exceeds guard {guard}")
    return size


def coloring_to_index(x: Coloring, q: int) -> int:
    """Lexicographic rank of the color vector (first vertex most significant)."""
    idx = 0
    for c in x:
        idx = idx * q + (int(c) - 1)
    return idx


def index_to_coloring(idx: int, n: int, q: int) -> Coloring:
    out = np.empty(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        idx, digit = divmod(idx, q)
        out[i] = digit + 1
    return out


@dataclass
class ExactChain:
    """State space, transition matrix, and stationary target for one instance."""

    graph: Graph
    params: ChainParams
    n_states: int
    transition: np.ndarray
    stationary: np.ndarray
    proper: np.ndarray  # boolean mask over states

    def state(self, idx: int) -> Coloring:
        return index_to_coloring(idx, self.graph.n, self.params.q)

    def index(self, x: Coloring) -> int:
        return coloring_to_index(x, self.params.q)


def _proper_mask(g: Graph, n_states: int, q: int) -> np.ndarray:
    digits = np.empty((n_states, g.n), dtype=np.int64)
    idx = np.arange(n_states)
    for i in range(g.n - 1, -1, -1):
        idx, rem = np.divmod(idx, q)
        digits[:, i] = rem + 1
    if g.m == 0:
        return np.ones(n_states, dtype=bool)
    ok = np.ones(n_states, dtype=bool)
    for u, w in g.edges:
        ok &= digits[:, u] != digits[:, w]
    return ok


def _choice_atoms(n: int, params: ChainParams) -> list[tuple[StepChoices, float]]:
    """Every (activity pattern, proposal map) with its probability."""
    atoms: list[tuple[StepChoices, float]] = []
    p, q = params.p, params.q
    for bits in itertools.product((False, True), repeat=n):
        active = np.array(bits, dtype=bool)
        k = int(active.sum())
        base_w = (p**k) * ((1.0 - p) ** (n - k)) / (q**k)
        act_idx = np.nonzero(active)[0]
        for combo in itertools.product(range(1, q + 1), repeat=k):
            proposals = np.zeros(n, dtype=np.int64)
            proposals[act_idx] = combo
            atoms.append((StepChoices(active=active, proposals=proposals), base_w))
    return atoms


def build_exact_chain(g: Graph, params: ChainParams, guard: int = STATE_GUARD) -> ExactChain:
    """Exact transition matrix by total enumeration, routed through ``step``.

    Probabilities accumulate with Kahan compensation; memory grows with the
    square of q^n, so the guard is a hard error.
    """
    size = _check_guard(g.n, params.q, guard)
    atoms = _choice_atoms(g.n, params)
    P = np.zeros((size, size))
    comp = np.zeros((size, size))
    for ix in range(size):
        x = index_to_coloring(ix, g.n, params.q)
        for choices, w in atoms:
            iy = coloring_to_index(step(g, params, x, choices), params.q)
            # Kahan update of P[ix, iy] += w
            yv = w - comp[ix, iy]
            t = P[ix, iy] + yv
            comp[ix, iy] = (t - P[ix, iy]) - yv
            P[ix, iy] = t
    proper = _proper_mask(g, size, params.q)
    mu = np.zeros(size)
    count = int(proper.sum())
    if count:
        mu[proper] = 1.0 / count
    return ExactChain(
        graph=g,
        params=params,
        n_states=size,
        transition=P,
        stationary=mu,
        proper=proper,
    )


def detailed_balance_residual(ec: ExactChain) -> float:
    """max over state pairs of |mu(X) P(X,Y) - mu(Y) P(Y,X)|."""
    flow = ec.stationary[:, None] * ec.transition
    return float(np.abs(flow - flow.T).max())


@dataclass
class MixingCurve:
    """Worst-start total variation per round and the times it crosses eps."""

    tv: np.ndarray
    tau: dict[float, int | None]

    def check_monotone(self) -> bool:
        return bool(np.all(np.diff(self.tv) <= 1e-12))


def mixing_curve(ec: ExactChain, t_max: int, eps_list) -> MixingCurve:
    """Power the chain from every start simultaneously; TV is exact."""
    dists = np.eye(ec.n_states)
    tv = np.empty(t_max + 1)
    tv[0] = 0.5 * np.abs(dists - ec.stationary).sum(axis=1).max()
    for t in range(1, t_max + 1):
        dists = dists @ ec.transition
        tv[t] = 0.5 * np.abs(dists - ec.stationary).sum(axis=1).max()
    tau: dict[float, int | None] = {}
    for eps in eps_list:
        hits = np.nonzero(tv <= eps)[0]
        tau[float(eps)] = int(hits[0]) if len(hits) else None
    return MixingCurve(tv=tv, tau=tau)


def enumerate_proper(g: Graph, q: int, guard: int = STATE_GUARD) -> list[Coloring]:
    """All proper colorings in lexicographic order."""
    size = _check_guard(g.n, q, guard)
    mask = _proper_mask(g, size, q)
    return [index_to_coloring(int(i), g.n, q) for i in np.nonzero(mask)[0]]


@dataclass
class DyerFriezeReport:
    trials: int
    gamma: float
    empirical_mean: float
    bound_tight: float
    bound_loose: float
    tail: list[tuple[float, float, float]]  # (a, empirical freq, bound)


def expected_missed_uniform(q: int, s: int) -> float:
    """Closed form E|A| = q (1 - 1/q)^s for i.i.d. uniform draws."""
    return q * (1.0 - 1.0 / q) ** s


def dyer_frieze_oracle(
    q: int,
    s: int,
    distributions: np.ndarray,
    subset,
    gamma: float,
    trials: int = 100_000,
    seed: int = 0,
    tail_a=(5.0, 10.0),
) -> DyerFriezeReport:
    """Monte Carlo check of the missed-colors concentration bounds.

    ``distributions`` is an (s, q) row-stochastic matrix of per-draw laws;
    ``subset`` indexes the tracked colors S (1-based), on which every draw
    must put mass at most ``gamma``. Compares the empirical mean of
    |[q] \\ {draws}| with m(1-gamma)^(s/(m*gamma)) and m((1-gamma)/e)^(s/m),
    and the lower-tail frequencies with exp(-a^2/(2q)).
    """
    dists = np.asarray(distributions, dtype=float).reshape(s, q)
    if s and not np.allclose(dists.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("each distribution row must sum to 1")
    S = np.asarray(sorted(int(c) for c in subset), dtype=np.int64)
    if len(S) and (S.min() < 1 or S.max() > q):
        raise ValueError("subset colors must lie in [q]")
    m = len(S)
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0,1)")
    if s and m:
        worst = float(dists[:, S - 1].max())
        if worst > gamma + 1e-12:
            raise GammaViolated(f"distribution mass {worst} exceeds gamma={gamma}")

    if s == 0:
        missed = np.full(trials, q, dtype=np.int64)
    else:
        rng = stream(seed, 0, STREAM_BATCH)
        u = rng.random((trials, s))
        cdf = np.cumsum(dists, axis=1)
        draws = np.empty((trials, s), dtype=np.int64)
        for i in range(s):
            draws[:, i] = np.searchsorted(cdf[i], u[:, i], side="right") + 1
        np.clip(draws, 1, q, out=draws)
        seen = np.zeros((trials, q + 1), dtype=bool)
        rows = np.repeat(np.arange(trials), s)
        seen[rows, draws.ravel()] = True
        missed = q - seen[:, 1:].sum(axis=1)

    mean = float(missed.mean())
    bound_tight = m * (1.0 - gamma) ** (s / (m * gamma)) if m else 0.0
    bound_loose = m * ((1.0 - gamma) / math.e) ** (s / m) if m else 0.0
    tail = []
    for a in tail_a:
        freq = float((missed <= mean - a).mean())
        tail.append((float(a), freq, math.exp(-a * a / (2 * q))))
    return DyerFriezeReport(
        trials=trials,
        gamma=gamma,
        empirical_mean=mean,
        bound_tight=bound_tight,
        bound_loose=bound_loose,
        tail=tail,
    )


def _final_state_counts(
    g: Graph, params: ChainParams, x0: Coloring, t: int, trials: int
) -> np.ndarray:
    """Advance ``trials`` i.i.d. chains in lockstep; returns state counts."""
    n, q = g.n, params.q
    x = np.tile(np.asarray(x0, dtype=np.int64), (trials, 1))
    batch_params = ChainParams(q=q, p=params.p, seed=derive_seed(params.seed, t, trials))
    for rnd in range(1, t + 1):
        active, proposals = sample_choices_batch(batch_params, rnd, n, trials)
        x = step_batch(g, x, active, proposals)
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    indices = (x - 1) @ powers
    return np.bincount(indices, minlength=q**n)


def empirical_tv(
    g: Graph, params: ChainParams, x0: Coloring, t: int, trials: int
) -> tuple[float, float]:
    """Plug-in TV estimate against uniform-over-proper after t rounds.

    Returns (estimate, half_width); the half width covers both the
    multinomial noise and the plug-in bias of the absolute-difference sum.
    """
    size = _check_guard(g.n, params.q)
    proper = _proper_mask(g, size, params.q)
    mu = np.zeros(size)
    count = int(proper.sum())
    if count:
        mu[proper] = 1.0 / count
    counts = _final_state_counts(g, params, x0, t, trials)
    f = counts / trials
    est = 0.5 * float(np.abs(f - mu).sum())
    half = 0.5 * float(np.sqrt(f * (1.0 - f) / trials).sum()) + 2.0 / trials
    return est, half
