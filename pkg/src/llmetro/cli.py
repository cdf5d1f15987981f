"""Seeded experiment drivers and the command-line front end.

Commands: sample, mix-exact, couple, uniformity, compare-gstar,
dyer-frieze. Every randomized report embeds (seed, trials, config hash);
no wall-clock state enters any output, so fixed-seed runs are
byte-reproducible at any worker count. Exit codes: 0 success, 2 config or
input error, 3 guard violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .chain import (
    ChainParams,
    accepted_vertices,
    is_proper,
    monochromatic,
    sample_choices,
    sample_choices_batch,
    step,
    step_batch,
)
from .coupling import couple_until_coalesced, run_identical_coupling
from .exact import (
    GammaViolated,
    StateSpaceTooLarge,
    build_exact_chain,
    detailed_balance_residual,
    dyer_frieze_oracle,
    expected_missed_uniform,
    mixing_curve,
)
from .graph import (
    GirthTooSmall,
    Graph,
    GraphFormatError,
    load_graph,
    make_graph,
    orient_ball_inward,
)
from .rng import derive_seed

SCHEMA_VERSION = 1
DEFAULT_EPS = (0.25, 0.1, 0.01)
DEFAULT_ZETA = 0.05
DEFAULT_TRIALS = 10_000

_PURPOSE_COUPLE = 11
_PURPOSE_GSTAR = 12


# ---------------------------------------------------------------------------
# Named constants and parameter formulas
# ---------------------------------------------------------------------------


def alpha_star() -> float:
    """Fixed point of a -> e^(1/a), by damped iteration from 1.5."""
    a = 1.5
    for _ in range(200):
        nxt = a + 0.5 * (math.exp(1.0 / a) - a)
        if abs(nxt - a) < 1e-15:
            return nxt
        a = nxt
    return a


def regime_activeness(delta: float, regime: str) -> float:
    """Activeness prescribed for each color regime: min(delta/3, 1/2) on
    general graphs, delta/30 in the girth-9 regime."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if regime == "general":
        return min(delta / 3.0, 0.5)
    if regime == "girth9":
        return delta / 30.0
    raise ValueError(f"unknown regime {regime!r}")


def uniformity_t0(p: float, delta: float, zeta: float) -> float:
    """Start of the local-uniformity window: (1/p)((1+d)/d)^2 ln(1/zeta)."""
    return (1.0 / p) * ((1.0 + delta) / delta) ** 2 * math.log(1.0 / zeta)


def uniformity_threshold(deg: int, q: int, zeta: float) -> float:
    """Available-color fraction target (1 - 10*zeta) e^(-deg/q)."""
    return (1.0 - 10.0 * zeta) * math.exp(-deg / q)


def default_burn_in(p: float) -> float:
    """Burn-in rounds (1/p)(2.7/1.7)^2 ln(20/p); override when impractical."""
    return (1.0 / p) * (2.7 / 1.7) ** 2 * math.log(20.0 / p)


def default_coupling_horizon(delta: float) -> float:
    """Contraction window (1200/d^2) ln(600/d); override when impractical."""
    return (1200.0 / delta**2) * math.log(600.0 / delta)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    graph_spec: str | None = None
    graph_path: str | None = None
    q: int = 0
    p: float | None = None
    delta: float | None = None
    regime: str = "general"
    zeta: float = DEFAULT_ZETA
    rounds: int = 0
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    out: str | None = None
    fmt: str = "json"
    workers: int = 1
    extras: dict = field(default_factory=dict)

    def resolved_p(self) -> float:
        """Explicit p wins; otherwise derive from delta per the regime."""
        if self.p is not None:
            if not 0.0 < self.p < 1.0:
                raise ValueError("p must lie strictly inside (0,1)")
            return self.p
        if self.delta is not None:
            return regime_activeness(self.delta, self.regime)
        raise ValueError("specify exactly one of --p or --delta")

    def chain_params(self) -> ChainParams:
        return ChainParams(q=self.q, p=self.resolved_p(), seed=self.seed)

    def to_dict(self) -> dict:
        d = {
            "graph_spec": self.graph_spec,
            "graph_path": self.graph_path,
            "q": self.q,
            "p": self.p,
            "delta": self.delta,
            "regime": self.regime,
            "zeta": self.zeta,
            "rounds": self.rounds,
            "trials": self.trials,
            "seed": self.seed,
        }
        # extras hold per-command knobs; output destinations are not config
        d.update({k: v for k, v in self.extras.items() if k != "trace_out"})
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def build_graph(cfg: ExperimentConfig) -> Graph:
    if (cfg.graph_spec is None) == (cfg.graph_path is None):
        raise ValueError("specify exactly one of --gen or --graph")
    if cfg.graph_path is not None:
        return load_graph(cfg.graph_path)
    return make_graph(cfg.graph_spec, seed=cfg.seed)


def _provenance(cfg: ExperimentConfig, command: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "trials": cfg.trials,
    }


def _graph_info(cfg: ExperimentConfig, g: Graph) -> dict:
    return {
        "source": cfg.graph_spec or cfg.graph_path,
        "n": g.n,
        "m": g.m,
        "max_degree": g.max_degree,
    }


def write_report(report: dict, path: str, fmt: str) -> None:
    if fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        return
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["key", "value"])
            for key in sorted(report):
                value = report[key]
                if isinstance(value, (dict, list)):
                    value = json.dumps(value, sort_keys=True)
                writer.writerow([key, value])
        return
    raise ValueError(f"unknown format {fmt!r}")


def _map_tasks(fn, tasks: list, workers: int) -> list:
    """Evaluate fn over tasks, aggregating in task order regardless of
    worker scheduling, so outputs never depend on the worker count."""
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(tasks) // (workers * 4))
        return list(pool.map(fn, tasks, chunksize=chunk))


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def cmd_sample(cfg: ExperimentConfig) -> dict:
    g = build_graph(cfg)
    params = cfg.chain_params()
    n = g.n
    x = monochromatic(n)
    accepted_total = 0
    first_proper = 0 if is_proper(g, x) else None
    for t in range(1, cfg.rounds + 1):
        choices = sample_choices(params, t, n)
        accepted_total += int(accepted_vertices(g, x, choices).sum())
        x = step(g, params, x, choices)
        if first_proper is None and is_proper(g, x):
            first_proper = t
    report = _provenance(cfg, "sample")
    report.update(
        {
            "graph": _graph_info(cfg, g),
            "q": cfg.q,
            "p": params.p,
            "rounds": cfg.rounds,
            "proper": is_proper(g, x),
            "first_proper_round": first_proper,
            "mean_accepted_per_round": (
                accepted_total / cfg.rounds if cfg.rounds else 0.0
            ),
            "warning_q_below_degree_plus_2": not params.convergence_guaranteed(g),
        }
    )
    if report["warning_q_below_degree_plus_2"]:
        print(
            f"WARNING: q={cfg.q} < max degree + 2 = {g.max_degree + 2}; "
            "convergence to uniform proper colorings is not guaranteed",
            file=sys.stderr,
        )
    if cfg.out:
        lines = [
            "# coloring produced by llmetro sample",
            f"# config {report['config_hash']} seed {cfg.seed}",
            f"{n} {cfg.q}",
        ]
        lines.extend(str(int(c)) for c in x)
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    return report


# ---------------------------------------------------------------------------
# mix-exact
# ---------------------------------------------------------------------------


def cmd_mix_exact(cfg: ExperimentConfig) -> dict:
    g = build_graph(cfg)
    params = cfg.chain_params()
    t_max = cfg.rounds if cfg.rounds > 0 else 500
    eps_list = cfg.extras.get("eps_list", DEFAULT_EPS)
    ec = build_exact_chain(g, params)
    curve = mixing_curve(ec, t_max, eps_list)
    report = _provenance(cfg, "mix-exact")
    report.update(
        {
            "graph": _graph_info(cfg, g),
            "q": cfg.q,
            "p": params.p,
            "states": ec.n_states,
            "proper_states": int(ec.proper.sum()),
            "residual": detailed_balance_residual(ec),
            "tv_monotone": curve.check_monotone(),
            "tau": {str(eps): curve.tau[float(eps)] for eps in eps_list},
            "tv_final": float(curve.tv[-1]),
            "tv": [float(v) for v in curve.tv],
        }
    )
    if cfg.out:
        write_report(report, cfg.out, cfg.fmt)
    return report


# ---------------------------------------------------------------------------
# couple
# ---------------------------------------------------------------------------


def _couple_trial(task) -> dict:
    g, params, x0, y0, max_rounds, trial = task
    p_i = replace(params, seed=derive_seed(params.seed, trial, _PURPOSE_COUPLE))
    trace = couple_until_coalesced(g, p_i, x0, y0, max_rounds)
    hams = [r.hamming for r in trace.records]
    return {
        "coalesced_at": trace.coalesced_at,
        "containment_violations": trace.containment_violations,
        "spread_violations": trace.spread_violations,
        "sum_h": sum(hams[1:]),
        "sum_h_prev": sum(hams[:-1]),
    }


def cmd_couple(cfg: ExperimentConfig) -> dict:
    g = build_graph(cfg)
    params = cfg.chain_params()
    if cfg.q < 2:
        raise ValueError("couple needs q >= 2 to build a disagreeing pair")
    max_rounds = cfg.rounds if cfg.rounds > 0 else 1000
    pair_mode = cfg.extras.get("pair", "worst")
    x0 = monochromatic(g.n, 1)
    if pair_mode == "worst":
        y0 = monochromatic(g.n, 2)
    elif pair_mode == "single":
        v0 = int(cfg.extras.get("vertex", 0))
        y0 = x0.copy()
        y0[v0] = 2
    else:
        raise ValueError(f"unknown pair mode {pair_mode!r}")

    tasks = [(g, params, x0, y0, max_rounds, i) for i in range(cfg.trials)]
    results = _map_tasks(_couple_trial, tasks, cfg.workers)

    times = [r["coalesced_at"] for r in results if r["coalesced_at"] is not None]
    cont_bad = sum(1 for r in results if r["containment_violations"])
    spread_bad = sum(1 for r in results if r["spread_violations"])
    sum_h = sum(r["sum_h"] for r in results)
    sum_h_prev = sum(r["sum_h_prev"] for r in results)
    ratios = [
        r["sum_h"] / r["sum_h_prev"] for r in results if r["sum_h_prev"] > 0
    ]
    report = _provenance(cfg, "couple")
    report.update(
        {
            "graph": _graph_info(cfg, g),
            "q": cfg.q,
            "p": params.p,
            "pair": pair_mode,
            "max_rounds": max_rounds,
            # computed defaults for the burn-in/contraction window; --rounds
            # overrides them since they grow impractically for small delta
            "default_burn_in": default_burn_in(params.p),
            "default_horizon": (
                default_coupling_horizon(cfg.delta) if cfg.delta else None
            ),
            "coalesced": len(times),
            "not_coalesced": cfg.trials - len(times),
            "median_coalescence": statistics.median(times) if times else None,
            "mean_coalescence": statistics.fmean(times) if times else None,
            "containment_pass_count": cfg.trials - cont_bad,
            "containment_violation_trials": cont_bad,
            "spread_violation_trials": spread_bad,
            "contraction_estimate": (sum_h / sum_h_prev) if sum_h_prev else None,
            "contraction_trial_mean": statistics.fmean(ratios) if ratios else None,
            "contraction_3sigma": (
                3.0 * statistics.stdev(ratios) / math.sqrt(len(ratios))
                if len(ratios) > 1
                else None
            ),
        }
    )
    if cfg.out:
        write_report(report, cfg.out, cfg.fmt)
    trace_out = cfg.extras.get("trace_out")
    if trace_out:
        p0 = replace(params, seed=derive_seed(params.seed, 0, _PURPOSE_COUPLE))
        couple_until_coalesced(g, p0, x0, y0, max_rounds).write_csv(trace_out)
    return report


# ---------------------------------------------------------------------------
# uniformity
# ---------------------------------------------------------------------------


@dataclass
class UniformityReport:
    vertex: int
    deg: int
    q: int
    p: float
    delta: float
    zeta: float
    t0: float
    rounds: int
    seeds: int
    threshold: float
    naive_floor: float
    window: tuple[int, int] | None
    frac_pairs_above_threshold: float | None
    frac_pairs_above_naive_floor: float | None
    frac_seeds_always_above_threshold: float | None
    frac_seeds_always_above_naive_floor: float | None
    per_round_mean_fraction: list[float]

    def to_dict(self) -> dict:
        return {
            "vertex": self.vertex,
            "deg": self.deg,
            "q": self.q,
            "p": self.p,
            "delta": self.delta,
            "zeta": self.zeta,
            "t0": self.t0,
            "rounds": self.rounds,
            "seeds": self.seeds,
            "threshold": self.threshold,
            "naive_floor": self.naive_floor,
            "window": list(self.window) if self.window else None,
            "window_empty": self.window is None,
            "frac_pairs_above_threshold": self.frac_pairs_above_threshold,
            "frac_pairs_above_naive_floor": self.frac_pairs_above_naive_floor,
            "frac_seeds_always_above_threshold": self.frac_seeds_always_above_threshold,
            "frac_seeds_always_above_naive_floor": self.frac_seeds_always_above_naive_floor,
            "per_round_mean_fraction": self.per_round_mean_fraction,
        }


def available_fraction_trace(
    g: Graph, params: ChainParams, v: int, rounds: int, seeds: int
) -> np.ndarray:
    """(seeds, rounds+1) available-color fractions at v, batched chains."""
    n, q = g.n, params.q
    nbrs = g.neighbors(v)
    x = np.tile(monochromatic(n), (seeds, 1))

    def frac(xb: np.ndarray) -> np.ndarray:
        if len(nbrs) == 0:
            return np.ones(len(xb))
        cols = np.sort(xb[:, nbrs], axis=1)
        distinct = (cols[:, 1:] != cols[:, :-1]).sum(axis=1) + 1
        return (q - distinct) / q

    out = np.empty((seeds, rounds + 1))
    out[:, 0] = frac(x)
    for t in range(1, rounds + 1):
        active, proposals = sample_choices_batch(params, t, n, seeds)
        x = step_batch(g, x, active, proposals)
        out[:, t] = frac(x)
    return out


def cmd_uniformity(cfg: ExperimentConfig) -> dict:
    if cfg.delta is None:
        raise ValueError("uniformity needs --delta for the window formula")
    g = build_graph(cfg)
    params = cfg.chain_params()
    v = int(cfg.extras.get("vertex", 0))
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    rounds = cfg.rounds if cfg.rounds > 0 else 200
    deg = g.degree(v)
    t0 = uniformity_t0(params.p, cfg.delta, cfg.zeta)
    threshold = uniformity_threshold(deg, cfg.q, cfg.zeta)
    naive_floor = (cfg.q - deg) / cfg.q
    fractions = available_fraction_trace(g, params, v, rounds, cfg.trials)

    start = math.ceil(t0)
    if start > rounds:
        window = None
        fpt = fpn = fst = fsn = None
    else:
        window = (start, rounds)
        block = fractions[:, start : rounds + 1]
        # The uniformity target is met at >=; the naive floor must be
        # strictly exceeded to count.
        fpt = float((block >= threshold).mean())
        fpn = float((block > naive_floor).mean())
        fst = float((block >= threshold).all(axis=1).mean())
        fsn = float((block > naive_floor).all(axis=1).mean())

    uf = UniformityReport(
        vertex=v,
        deg=deg,
        q=cfg.q,
        p=params.p,
        delta=cfg.delta,
        zeta=cfg.zeta,
        t0=t0,
        rounds=rounds,
        seeds=cfg.trials,
        threshold=threshold,
        naive_floor=naive_floor,
        window=window,
        frac_pairs_above_threshold=fpt,
        frac_pairs_above_naive_floor=fpn,
        frac_seeds_always_above_threshold=fst,
        frac_seeds_always_above_naive_floor=fsn,
        per_round_mean_fraction=[float(f) for f in fractions.mean(axis=0)],
    )
    report = _provenance(cfg, "uniformity")
    report["graph"] = _graph_info(cfg, g)
    report.update(uf.to_dict())
    if window is None:
        print(
            f"WARNING: window start t0 = {t0:.2f} exceeds rounds = {rounds}; "
            "no rounds qualify",
            file=sys.stderr,
        )
    if cfg.out:
        write_report(report, cfg.out, cfg.fmt)
    return report


# ---------------------------------------------------------------------------
# compare-gstar
# ---------------------------------------------------------------------------


def _gstar_trial(task) -> list:
    g, mg, params, rounds, trial = task
    p_i = replace(params, seed=derive_seed(params.seed, trial, _PURPOSE_GSTAR))
    trace = run_identical_coupling(g, mg, p_i, monochromatic(g.n), rounds)
    delta = max(g.max_degree, 1)
    rows = [
        (
            trial,
            r.round,
            r.hamming,
            r.cumulative,
            r.max_nbhd_disagreements,
            r.max_nbhd_disagreements / delta,
        )
        for r in trace.records
    ]
    return [rows, trace.containment_violations]


def cmd_compare_gstar(cfg: ExperimentConfig) -> dict:
    g = build_graph(cfg)
    params = cfg.chain_params()
    v = int(cfg.extras.get("vertex", 0))
    radius = int(cfg.extras.get("radius", 4))
    rounds = cfg.rounds if cfg.rounds > 0 else 50
    mg = orient_ball_inward(g, v, radius)
    tasks = [(g, mg, params, rounds, i) for i in range(cfg.trials)]
    results = _map_tasks(_gstar_trial, tasks, cfg.workers)

    delta = max(g.max_degree, 1)
    zeta_delta = cfg.zeta * delta
    all_rows = [row for rows, _ in results for row in rows]
    max_density = max((row[5] for row in all_rows), default=0.0)
    containment_violations = sum(v_ for _, v_ in results)
    report = _provenance(cfg, "compare-gstar")
    report.update(
        {
            "graph": _graph_info(cfg, g),
            "q": cfg.q,
            "p": params.p,
            "vertex": v,
            "radius": radius,
            "rounds": rounds,
            "directed_edges": int(len(mg.directed_edges)),
            "zeta": cfg.zeta,
            "zeta_delta_ref": zeta_delta,
            "zeta_delta_density_ref": cfg.zeta,
            "max_density": max_density,
            "containment_violations": containment_violations,
        }
    )
    if cfg.out:
        with open(cfg.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            fh.write(f"# zeta_delta_ref {zeta_delta}\n")
            writer.writerow(
                ["seed_index", "round", "hamming", "cumulative", "max_nbhd_disagreements", "density"]
            )
            for row in all_rows:
                writer.writerow(row)
    return report


# ---------------------------------------------------------------------------
# dyer-frieze
# ---------------------------------------------------------------------------


def cmd_dyer_frieze(
    q: int,
    s: int,
    mode: str,
    trials: int,
    seed: int,
    gamma: float | None = None,
    tail_a=(5.0, 10.0),
    out: str | None = None,
    fmt: str = "json",
) -> dict:
    if mode == "uniform":
        gamma = 1.0 / q
        dists = np.full((s, q), 1.0 / q)
    elif mode == "capped":
        if gamma is None:
            raise ValueError("capped mode needs --gamma")
        if gamma < 1.0 / q or gamma >= 1.0:
            raise ValueError("capped mode needs 1/q <= gamma < 1")
        dists = np.full((s, q), (1.0 - gamma) / (q - 1)) if q > 1 else np.ones((s, q))
        for i in range(s):
            dists[i, i % q] = gamma
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rep = dyer_frieze_oracle(
        q, s, dists, range(1, q + 1), gamma, trials=trials, seed=seed, tail_a=tail_a
    )
    cfg_blob = json.dumps(
        {"q": q, "s": s, "mode": mode, "gamma": gamma, "trials": trials, "seed": seed},
        sort_keys=True,
    ).encode()
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "dyer-frieze",
        "config_hash": hashlib.sha256(cfg_blob).hexdigest()[:12],
        "q": q,
        "s": s,
        "mode": mode,
        "gamma": gamma,
        "trials": trials,
        "seed": seed,
        "empirical_mean": rep.empirical_mean,
        "bound_tight": rep.bound_tight,
        "bound_loose": rep.bound_loose,
        "uniform_closed_form": expected_missed_uniform(q, s) if mode == "uniform" else None,
        "tail": [{"a": a, "freq": f, "bound": b} for a, f, b in rep.tail],
    }
    if out:
        write_report(report, out, fmt)
    return report


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser, graph: bool = True) -> None:
    if graph:
        src = parser.add_mutually_exclusive_group(required=True)
        src.add_argument("--graph", help="graph file path ('n m' header, 'u w' lines)")
        src.add_argument("--gen", help="generator spec, e.g. cycle:64, tree:8:3, er:50:0.08:7")
        parser.add_argument("--q", type=int, required=True, help="number of colors")
        parser.add_argument("--p", type=float, help="explicit activeness in (0,1)")
        parser.add_argument("--delta", type=float, help="derive p from delta per --regime")
        parser.add_argument(
            "--regime",
            choices=("general", "girth9"),
            default="general",
            help="p-derivation regime: min(delta/3,1/2) or delta/30",
        )
        parser.add_argument("--zeta", type=float, default=DEFAULT_ZETA)
        parser.add_argument("--rounds", type=int, default=0, help="0 picks the command default")
        parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="primary output path")
    parser.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    parser.add_argument("--workers", type=int, default=1)


def _config(args: argparse.Namespace, **extras) -> ExperimentConfig:
    return ExperimentConfig(
        graph_spec=args.gen,
        graph_path=args.graph,
        q=args.q,
        p=args.p,
        delta=args.delta,
        regime=args.regime,
        zeta=args.zeta,
        rounds=args.rounds,
        trials=args.trials,
        seed=args.seed,
        out=args.out,
        fmt=args.fmt,
        workers=args.workers,
        extras=extras,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="llmetro",
        description="Lazy local Metropolis coloring sampler and verification lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="run the chain and write the final coloring")
    _add_common(p_sample)

    p_mix = sub.add_parser("mix-exact", help="exact TV mixing curve on a tiny instance")
    _add_common(p_mix)
    p_mix.add_argument("--eps", default="0.25,0.1,0.01", help="comma-separated epsilons")

    p_couple = sub.add_parser("couple", help="coupled trajectories and coalescence stats")
    _add_common(p_couple)
    p_couple.add_argument("--pair", choices=("worst", "single"), default="worst")
    p_couple.add_argument("--vertex", type=int, default=0, help="disagreement vertex for --pair single")
    p_couple.add_argument("--trace-out", dest="trace_out", help="CSV trace of trial 0")

    p_unif = sub.add_parser("uniformity", help="available-color fraction trace at a vertex")
    _add_common(p_unif)
    p_unif.add_argument("--vertex", type=int, required=True)

    p_gstar = sub.add_parser(
        "compare-gstar", help="identical coupling of the plain and inward-oriented chains"
    )
    _add_common(p_gstar)
    p_gstar.add_argument("--vertex", type=int, required=True)
    p_gstar.add_argument("--radius", type=int, default=4)

    p_df = sub.add_parser("dyer-frieze", help="missed-colors concentration oracle")
    p_df.add_argument("--q", type=int, required=True)
    p_df.add_argument("--s", type=int, required=True)
    p_df.add_argument("--mode", choices=("uniform", "capped"), default="uniform")
    p_df.add_argument("--gamma", type=float)
    p_df.add_argument("--trials", type=int, default=100_000)
    p_df.add_argument("--tail-a", dest="tail_a", default="5,10")
    _add_common(p_df, graph=False)

    args = parser.parse_args(argv)
    try:
        if args.command == "sample":
            report = cmd_sample(_config(args))
        elif args.command == "mix-exact":
            eps = tuple(float(e) for e in args.eps.split(","))
            report = cmd_mix_exact(_config(args, eps_list=eps))
        elif args.command == "couple":
            report = cmd_couple(
                _config(args, pair=args.pair, vertex=args.vertex, trace_out=args.trace_out)
            )
        elif args.command == "uniformity":
            report = cmd_uniformity(_config(args, vertex=args.vertex))
        elif args.command == "compare-gstar":
            report = cmd_compare_gstar(_config(args, vertex=args.vertex, radius=args.radius))
        elif args.command == "dyer-frieze":
            tail = tuple(float(a) for a in args.tail_a.split(","))
            report = cmd_dyer_frieze(
                args.q,
                args.s,
                args.mode,
                args.trials,
                args.seed,
                gamma=args.gamma,
                tail_a=tail,
                out=args.out,
                fmt=args.fmt,
            )
        else:  # pragma: no cover
            parser.error(f"unknown command {args.command}")
    except (StateSpaceTooLarge, GirthTooSmall, GammaViolated) as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return 3
    except (GraphFormatError, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(report, sort_keys=True))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
