"""Command-line interface.

Subcommands: ``distance`` (pairwise distances to CSV), ``gram`` (kernel
matrix plus JSON diagnostics), ``verify`` (seeded property suites),
``bench`` (timing table on synthetic instances), ``synth`` (instance file
generation).  Exit codes: 0 on success, 1 when a verification suite fails,
2 on configuration errors, 3 on data errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .errors import GSobolevError
from .graph import Graph, load_graph, save_graph
from .kernels import (
    GramSpec,
    KERNEL_EXP,
    KERNEL_EXP_POW,
    check_negative_definite,
    distance_matrix,
    gram_matrix,
    min_eigenvalue,
    write_matrix_csv,
)
from .measures import DiscreteMeasure, gamma_mass, load_measures, save_measures
from .metrics import (
    VARIANT_SOBOLEV_IPM,
    VARIANT_SOBOLEV_TRANSPORT,
    measure_distance,
    prepare_root,
    sample_roots,
)
from .oracles import LP_MAX_NODES, wasserstein1_lp
from .synth import (
    FAMILIES,
    PointCloud,
    build_random_graph,
    farthest_point_clustering,
    random_measures,
    save_point_cloud,
)
from .verify import SUITES, run_suites

VARIANT_FLAGS = {"sipm": VARIANT_SOBOLEV_IPM, "st": VARIANT_SOBOLEV_TRANSPORT}
KERNEL_FLAGS = {"exp": KERNEL_EXP, "exp-pow": KERNEL_EXP_POW}


class CliError(Exception):
    """Configuration problem; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Validated flag set shared by the computing subcommands."""

    graph_path: str
    measures_path: str
    roots: tuple[int, ...] | tuple[str, int, int]
    p: float
    variant: str
    threads: int
    seed: int

    def resolve_roots(self, g: Graph) -> list[int]:
        if self.roots and self.roots[0] == "sliced":
            _, k, seed = self.roots
            return sample_roots(g, int(k), int(seed))
        roots = [int(r) for r in self.roots]
        for r in roots:
            if not 0 <= r < g.node_count:
                raise CliError(f"root {r} outside [0, {g.node_count})")
        return roots


def _parse_p(text: str) -> float:
    if text.strip().lower() in {"inf", "infinity"}:
        return math.inf
    try:
        p = float(text)
    except ValueError:
        raise CliError(f"cannot parse order p from {text!r}")
    if math.isnan(p) or p < 1.0:
        raise CliError(f"order p must be >= 1, got {text!r}")
    return p


def _parse_root(text: str) -> tuple:
    if text.startswith("sliced:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError("sliced root spec must look like sliced:K:SEED")
        try:
            k, seed = int(parts[1]), int(parts[2])
        except ValueError:
            raise CliError("sliced root spec must hold integers")
        if k < 1:
            raise CliError("sliced root count must be at least 1")
        return ("sliced", k, seed)
    try:
        return (int(text),)
    except ValueError:
        raise CliError(f"root must be an integer or sliced:K:SEED, got {text!r}")


def _default_threads() -> int:
    env = os.environ.get("GSOBOLEV_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _require_file(path: str, what: str) -> str:
    if not os.path.isfile(path):
        raise CliError(f"{what} file not found: {path}")
    return path


def _load_inputs(cfg: RunConfig) -> tuple[Graph, list[DiscreteMeasure]]:
    g = load_graph(cfg.graph_path)
    measures = load_measures(cfg.measures_path, g)
    if not measures:
        raise CliError(f"no measures in {cfg.measures_path}")
    return g, measures


def _parse_pairs(path: str, n: int) -> list[tuple[int, int]]:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            tok = text.replace(",", " ").split()
            if len(tok) != 2:
                raise GSobolevError(f"{path}:{lineno}: pair line must be 'i j'")
            i, j = int(tok[0]), int(tok[1])
            if not (0 <= i < n and 0 <= j < n):
                raise GSobolevError(f"{path}:{lineno}: index outside [0, {n})")
            pairs.append((min(i, j), max(i, j)))
    return sorted(set(pairs))


def cmd_distance(args: argparse.Namespace) -> int:
    p = _parse_p(args.p)
    variant = VARIANT_FLAGS[args.variant]
    if math.isinf(p) and variant == VARIANT_SOBOLEV_TRANSPORT:
        raise CliError("the transport variant needs a finite order p")
    cfg = RunConfig(
        graph_path=_require_file(args.graph, "graph"),
        measures_path=_require_file(args.measures, "measures"),
        roots=_parse_root(args.root),
        p=p,
        variant=variant,
        threads=args.threads,
        seed=args.seed,
    )
    g, measures = _load_inputs(cfg)
    roots = cfg.resolve_roots(g)
    n = len(measures)
    if args.pairs == "all":
        wanted = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        wanted = _parse_pairs(_require_file(args.pairs, "pairs"), n)

    t0 = time.perf_counter()
    prepared = {r: prepare_root(g, r) for r in roots}
    prep_ms = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    acc = np.zeros(len(wanted))
    use_matrix = args.pairs == "all"
    for r in roots:
        rs, prep = prepared[r]
        if use_matrix:
            vecs = [gamma_mass(rs, mu) for mu in measures]
            D = distance_matrix(prep, vecs, p, threads=cfg.threads, variant=variant)
            acc += np.array([D.value(i, j) for i, j in wanted])
        else:
            acc += np.array(
                [
                    measure_distance(rs, prep, measures[i], measures[j], p, variant)
                    for i, j in wanted
                ]
            )
    acc /= len(roots)
    eval_ms = (time.perf_counter() - t0) * 1e3

    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("i,j,distance\n")
        for (i, j), d in zip(wanted, acc):
            fh.write(f"{i},{j},{d:.17g}\n")
    print(
        f"distance: {len(wanted)} pairs, {len(roots)} root(s), "
        f"prep {prep_ms:.1f} ms, eval {eval_ms:.1f} ms -> {args.out}",
        file=sys.stderr,
    )
    return 0


def cmd_gram(args: argparse.Namespace) -> int:
    p = _parse_p(args.p)
    if math.isinf(p):
        raise CliError("gram needs a finite order p")
    if not (1.0 <= p <= 2.0) and not args.allow_outside_range:
        raise CliError(
            f"p={p} is outside [1, 2], where positive definiteness is guaranteed; "
            f"pass --allow-outside-range to proceed"
        )
    if args.t <= 0.0 or math.isnan(args.t):
        raise CliError(f"bandwidth --t must be positive, got {args.t}")
    cfg = RunConfig(
        graph_path=_require_file(args.graph, "graph"),
        measures_path=_require_file(args.measures, "measures"),
        roots=_parse_root(args.root),
        p=p,
        variant=VARIANT_SOBOLEV_IPM,
        threads=args.threads,
        seed=args.seed,
    )
    g, measures = _load_inputs(cfg)
    roots = cfg.resolve_roots(g)

    t0 = time.perf_counter()
    prepared = {r: prepare_root(g, r) for r in roots}
    vectors = {r: [gamma_mass(rs, mu) for mu in measures] for r, (rs, _) in prepared.items()}
    prep_ms = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    n = len(measures)
    D_full = np.zeros((n, n))
    for r in roots:
        _, prep = prepared[r]
        D_full += distance_matrix(prep, vectors[r], p, threads=cfg.threads).full()
    D_full /= len(roots)
    from .kernels import SymmetricMatrix

    D = SymmetricMatrix.from_full(D_full)
    spec = GramSpec(
        p=p, t=args.t, form=KERNEL_FLAGS[args.kernel],
        allow_outside_range=args.allow_outside_range,
    )
    K = gram_matrix(D, spec)
    gram_ms = (time.perf_counter() - t0) * 1e3

    write_matrix_csv(K, args.out)
    nd = check_negative_definite(D, p, trials=200, seed=cfg.seed)
    sidecar = {
        "min_eigenvalue": min_eigenvalue(K),
        "nd_violations": nd.violations,
        "preprocessing_ms": prep_ms,
        "gram_ms": gram_ms,
    }
    with open(args.out + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")
    print(
        f"gram: {n} measures, min eigenvalue {sidecar['min_eigenvalue']:.3e} "
        f"-> {args.out} (+.json)",
        file=sys.stderr,
    )
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    reports = run_suites([args.suite], seed=args.seed)
    payload = [r.as_dict() for r in reports]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    ok = True
    for rep in reports:
        for chk in rep.checks:
            status = "ok" if chk.passed else "FAIL"
            print(
                f"[{rep.suite}] {chk.name}: {status} "
                f"({chk.instances} instances, {chk.violations} violations, "
                f"worst {chk.worst:.3e})"
            )
        ok = ok and rep.passed
    if not ok:
        print(f"verification FAILED (offending seed: {args.seed})")
        return 1
    print("verification passed")
    return 0


def _time_pairs(fn, pairs, repeat: int = 1) -> float:
    """Median over repeats of the mean per-pair time, in seconds."""
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for i, j in pairs:
            fn(i, j)
        times.append((time.perf_counter() - t0) / len(pairs))
    times.sort()
    return times[len(times) // 2]


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = []
    for tok in args.sizes.split(","):
        try:
            sizes.append(int(tok))
        except ValueError:
            raise CliError(f"--sizes must be comma-separated integers, got {tok!r}")
    families = args.families.split(",")
    for fam in families:
        if fam not in FAMILIES:
            raise CliError(f"unknown family {fam!r}; pick from {FAMILIES}")
    p = _parse_p(args.p)
    if math.isinf(p):
        raise CliError("bench needs a finite order p")
    rng = np.random.default_rng(args.seed)
    rows = []
    for m in sizes:
        for fam in families:
            pts = PointCloud(rng.random((4 * m, 2)))
            centroids, _ = farthest_point_clustering(pts, m, seed=args.seed)
            g = build_random_graph(centroids, fam, seed=args.seed)
            measures = random_measures(g, args.count, args.support_size, seed=args.seed)
            t0 = time.perf_counter()
            rs, prep = prepare_root(g, 0)
            from .metrics import beta_weights

            beta_weights(prep, p)
            vecs = [gamma_mass(rs, mu) for mu in measures]
            prep_ms = (time.perf_counter() - t0) * 1e3

            pairs = [(i, j) for i in range(len(measures)) for j in range(i + 1, len(measures))]
            if len(pairs) > args.max_pairs:
                idx = rng.choice(len(pairs), size=args.max_pairs, replace=False)
                pairs = [pairs[int(k)] for k in sorted(idx)]
            from .metrics import sobolev_ipm_distance, sobolev_transport_distance

            s_ns = _time_pairs(
                lambda i, j: sobolev_ipm_distance(prep, vecs[i], vecs[j], p), pairs, 3
            ) * 1e9
            st_ns = _time_pairs(
                lambda i, j: sobolev_transport_distance(prep, vecs[i], vecs[j], p), pairs, 3
            ) * 1e9
            union = float(
                np.mean(
                    [np.union1d(vecs[i].edge_ids, vecs[j].edge_ids).size for i, j in pairs]
                )
            )
            if g.node_count <= LP_MAX_NODES:
                lp_pairs = pairs[: min(len(pairs), 20)]
                lp_ms = _time_pairs(
                    lambda i, j: wasserstein1_lp(g, measures[i], measures[j]),
                    lp_pairs,
                ) * 1e3
                lp_cell = f"{lp_ms:.3f}"
            else:
                lp_cell = ""
            rows.append(
                {
                    "M": m,
                    "family": fam,
                    "edges": g.edge_count,
                    "preprocessing_ms": f"{prep_ms:.2f}",
                    "per_pair_ns_sipm": f"{s_ns:.0f}",
                    "per_pair_ns_st": f"{st_ns:.0f}",
                    "per_pair_ms_lp": lp_cell,
                    "mean_union_edges": f"{union:.1f}",
                }
            )
            print(
                f"bench M={m} family={fam}: |E|={g.edge_count}, prep {prep_ms:.1f} ms, "
                f"sipm {s_ns:.0f} ns/pair, st {st_ns:.0f} ns/pair, "
                f"lp {lp_cell or 'skipped'} ms/pair, mean union {union:.1f} edges",
                file=sys.stderr,
            )
    header = list(rows[0].keys())
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(row[k]) for k in header) + "\n")
    print(f"bench table -> {args.out}", file=sys.stderr)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    if args.points < args.m:
        raise CliError(f"--points must be >= --m ({args.points} < {args.m})")
    if args.family not in FAMILIES:
        raise CliError(f"unknown family {args.family!r}; pick from {FAMILIES}")
    rng = np.random.default_rng(args.seed)
    pts = PointCloud(rng.random((args.points, args.dim)))
    centroids, _ = farthest_point_clustering(pts, args.m, seed=args.seed)
    g = build_random_graph(centroids, args.family, seed=args.seed)
    measures = random_measures(g, args.count, args.support_size, seed=args.seed)
    save_graph(g, args.out_prefix + ".graph")
    save_measures(measures, args.out_prefix + ".measures")
    save_point_cloud(centroids, args.out_prefix + ".points")
    print(
        f"synth: {g.node_count} nodes, {g.edge_count} edges, {len(measures)} measures "
        f"-> {args.out_prefix}.graph/.measures/.points",
        file=sys.stderr,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="gsobolev",
        description="Closed-form Sobolev-type distances and kernels for measures on a graph",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p_: argparse.ArgumentParser) -> None:
        p_.add_argument("--graph", required=True, help="graph file")
        p_.add_argument("--measures", required=True, help="measure file")
        p_.add_argument("--root", default="0", help="root node id, or sliced:K:SEED")
        p_.add_argument("--p", default="1", help="order, a decimal >= 1 or 'inf'")
        p_.add_argument("--threads", type=int, default=_default_threads())
        p_.add_argument("--seed", type=int, default=0)

    d = sub.add_parser("distance", help="pairwise distances to CSV")
    common(d)
    d.add_argument("--variant", choices=sorted(VARIANT_FLAGS), default="sipm")
    d.add_argument("--pairs", default="all", help="'all' or a file of 'i j' lines")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_distance)

    g = sub.add_parser("gram", help="kernel matrix plus JSON diagnostics")
    common(g)
    g.add_argument("--kernel", choices=sorted(KERNEL_FLAGS), default="exp")
    g.add_argument("--t", type=float, default=1.0, help="bandwidth, > 0")
    g.add_argument("--allow-outside-range", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gram)

    v = sub.add_parser("verify", help="run a seeded property suite")
    v.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="optional JSON report path")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="timing table on synthetic instances")
    b.add_argument("--sizes", default="100,1000", help="comma-separated node counts")
    b.add_argument("--families", default="log,sqrt")
    b.add_argument("--p", default="2")
    b.add_argument("--count", type=int, default=20, help="measures per instance")
    b.add_argument("--support-size", type=int, default=5)
    b.add_argument("--max-pairs", type=int, default=500)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("synth", help="write synthetic instance files")
    s.add_argument("--points", type=int, default=1000)
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--m", type=int, default=100, help="number of graph nodes")
    s.add_argument("--family", default="log")
    s.add_argument("--count", type=int, default=10, help="number of measures")
    s.add_argument("--support-size", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-prefix", required=True)
    s.set_defaults(func=cmd_synth)
    return top


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GSobolevError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
