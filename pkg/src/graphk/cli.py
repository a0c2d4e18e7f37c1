"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .graph import (
    AdmissiblePair,
    Graph,
    GraphError,
    RelativeGraph,
    admissible_pairs,
    breaking_vertices,
    classify_vertices,
    condition_K,
    family_e,
    family_f,
    hasse_edges,
    validate_pair,
)
from .sixterm import (
    build_six_term,
    cone_generators,
    group_summary,
    invariant_summary,
    kgroups,
    verify_exactness,
)
from .toeplitz import NotInKernel, ResidueError, index_oracle, witness_report

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    path: str | None = None
    H: tuple[str, ...] = ()
    S: tuple[str, ...] = ()
    relset: tuple[str, ...] | None = None
    x: tuple[int, ...] = ()
    bound: int = 3
    fmt: str = "text"
    all_pairs: bool = False
    jobs: int = 1
    family: str = "E"
    params: tuple[str, ...] = ()


def _names(s: str | None) -> tuple[str, ...]:
    if not s:
        return ()
    return tuple(t.strip() for t in s.split(",") if t.strip())


def _ints(s: str | None) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in _names(s))
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {s!r}") from None


def _load(cfg: RunConfig) -> Graph:
    try:
        return Graph.load(cfg.path)
    except OSError as exc:
        raise InputError(str(exc)) from None
    except GraphError as exc:
        raise InputError(f"{cfg.path}: {exc}") from None


def _resolve_pair(g: Graph, cfg: RunConfig) -> AdmissiblePair:
    unknown = [v for v in cfg.H + cfg.S if v not in g.index]
    if unknown:
        raise InputError(f"unknown vertices: {', '.join(unknown)}")
    p = AdmissiblePair(cfg.H, cfg.S)
    try:
        validate_pair(g, p)
    except GraphError as exc:
        raise InputError(f"(H, S) is not admissible: {exc}") from None
    return p


def _pair_json(g: Graph, p: AdmissiblePair) -> dict:
    return {"H": g.ordered(p.H), "S": g.ordered(p.S)}


def _fmt_set(g: Graph, vs) -> str:
    return "{" + ",".join(g.ordered(vs)) + "}"


def _emit(cfg: RunConfig, obj, text: str) -> None:
    if cfg.fmt == "json":
        print(json.dumps(obj, indent=2, sort_keys=False))
    else:
        print(text)


# -- reports -------------------------------------------------------------------------


def sixterm_report(g: Graph, p: AdmissiblePair) -> dict:
    seq = build_six_term(g, p)
    ex = verify_exactness(seq)
    d = seq.decomposition
    return {
        "pair": _pair_json(g, p),
        "classes": dict(zip(("reg_H", "sing_H", "reg_out", "sing_out", "S"), map(list, d.classes))),
        "groups": {name: group_summary(G) for name, G in seq.groups().items()},
        "presentations": {
            "ideal": d.ideal_matrix().tolist(),
            "full": d.full_matrix().tolist(),
            "quotient": d.quotient_matrix().tolist(),
            "kernel_ideal": seq.kernel_ideal.tolist(),
            "kernel_full": seq.kernel_full.tolist(),
            "kernel_quot": seq.kernel_quot.tolist(),
        },
        # maps that exist were built through make_hom, which rejects ill-defined lifts
        "maps": {name: {"matrix": f.lift.tolist(), "well_defined": True} for name, f in seq.maps().items()},
        "exactness": ex.nodes,
        "partial0_zero": ex.partial0_zero,
        "summary": invariant_summary(seq),
    }


def _sixterm_text(g: Graph, rep: dict) -> str:
    lines = [f"pair H={rep['pair']['H']} S={rep['pair']['S']}"]
    for name, grp in rep["groups"].items():
        parts = [f"Z/{d}" for d in grp["invariant_factors"]] + ["Z"] * grp["free_rank"]
        lines.append(f"  {name:9s} {' + '.join(parts) if parts else '0'}")
    for name, m in rep["maps"].items():
        lines.append(f"  {name:9s} {m['matrix']}")
    ok = all(rep["exactness"].values()) and rep["partial0_zero"]
    lines.append("  exact at " + ", ".join(f"{k}={'yes' if v else 'NO'}" for k, v in rep["exactness"].items()))
    lines.append(f"  partial0 = 0: {rep['partial0_zero']}  ->  {'EXACT' if ok else 'NOT EXACT'}")
    return "\n".join(lines)


def _sixterm_job(args):
    g_json, H, S = args
    g = Graph.from_json(g_json)
    return sixterm_report(g, AdmissiblePair(H, S))


def oracle_report(g: Graph, p: AdmissiblePair) -> dict:
    seq = build_six_term(g, p)
    target = seq.K0_ideal
    mat = seq.decomposition.partial1_matrix()
    rows = []
    for x in seq.kernel_quot.columns():
        res = index_oracle(g, p, x)
        via_matrix = mat.apply(x)
        rows.append({
            "x": list(x),
            "matrix_image": via_matrix,
            "oracle_class": res.vector,
            "defect_in": list(res.defect_in),
            "defect_out": list(res.defect_out),
            "h": res.witness.h,
            "agree": target.equal(res.vector, via_matrix),
        })
    return {"pair": _pair_json(g, p), "vectors": rows, "all_agree": all(r["agree"] for r in rows)}


# -- commands ------------------------------------------------------------------------------


def cmd_ideals(cfg: RunConfig) -> int:
    g = _load(cfg)
    pairs = admissible_pairs(g)
    edges = hasse_edges(pairs)
    K = condition_K(g)
    obj = {
        "pairs": [_pair_json(g, p) for p in pairs],
        "hasse": [list(e) for e in edges],
        "condition_K": K,
        "all_ideals_gauge_invariant": K,
    }
    lines = [f"{len(pairs)} admissible pairs"]
    for i, p in enumerate(pairs):
        lines.append(f"  [{i}] H={_fmt_set(g, p.H)} S={_fmt_set(g, p.S)}  B_H={_fmt_set(g, breaking_vertices(g, p.H))}")
    lines.append("covering relations: " + ", ".join(f"{i}<{j}" for i, j in edges))
    lines.append(f"Condition (K): {K}" + ("  (every ideal is gauge invariant)" if K else ""))
    _emit(cfg, obj, "\n".join(lines))
    return EXIT_OK


def cmd_kgroups(cfg: RunConfig) -> int:
    g = _load(cfg)
    relset = cfg.relset if cfg.relset is not None else tuple(classify_vertices(g)[0])
    unknown = [v for v in relset if v not in g.index]
    if unknown:
        raise InputError(f"unknown vertices: {', '.join(unknown)}")
    try:
        rg = RelativeGraph(g, frozenset(relset))
    except GraphError as exc:
        raise InputError(str(exc)) from None
    kg = kgroups(rg)
    cone = cone_generators(rg, cfg.bound)
    obj = {
        "relset": rg.relset_ordered,
        "rows": list(kg.rows),
        "matrix": kg.matrix.tolist(),
        "K0": group_summary(kg.K0),
        "K1": group_summary(kg.K1),
        "kernel_basis": kg.kernel.tolist(),
        "cone": {"coordinates": list(cone.vertices), "generators": [list(v) for v in cone.vectors], "bound": cone.bound},
    }
    text = "\n".join([
        f"relative set {rg.relset_ordered}",
        f"K0 = {kg.K0.describe()}",
        f"K1 = {kg.K1.describe()}  (kernel basis columns {kg.kernel.tolist()})",
        f"positive cone generators in coordinates {list(cone.vertices)} (bound {cone.bound}):",
        *[f"  {list(v)}" for v in cone.vectors],
    ])
    _emit(cfg, obj, text)
    return EXIT_OK


def cmd_sixterm(cfg: RunConfig) -> int:
    g = _load(cfg)
    if cfg.all_pairs:
        pairs = admissible_pairs(g)
    else:
        pairs = [_resolve_pair(g, cfg)]
    jobs = [(g.to_json(), tuple(p.H), tuple(p.S)) for p in pairs]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            reports = list(pool.map(_sixterm_job, jobs))
    else:
        reports = [sixterm_report(g, p) for p in pairs]
    ok = all(all(r["exactness"].values()) and r["partial0_zero"] for r in reports)
    obj = reports if cfg.all_pairs else reports[0]
    _emit(cfg, obj, "\n".join(_sixterm_text(g, r) for r in reports))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_witness(cfg: RunConfig) -> int:
    g = _load(cfg)
    relset = cfg.relset if cfg.relset is not None else tuple(classify_vertices(g)[0])
    try:
        rg = RelativeGraph(g, frozenset(relset))
        rep = witness_report(rg, list(cfg.x))
    except (GraphError, NotInKernel, ValueError) as exc:
        if isinstance(exc, ResidueError):
            raise
        raise InputError(str(exc)) from None
    ok = rep["residue_vector"] == [dict(zip(rg.relset_ordered, cfg.x)).get(v, 0) for v in rg.relset_ordered]
    ok = ok and all(rep["foureqs"].values()) and all(rep["partial_isometry"].values())
    text = "\n".join([
        f"h = {rep['h']}",
        "up:   " + ", ".join(f"{_idx_text(i)}->{k}" for i, k in rep["upindex"]),
        "down: " + ", ".join(f"{_idx_text(i)}->{k}" for i, k in rep["downindex"]),
        f"residue vector {rep['residue_vector']} (input {list(cfg.x)})",
        f"identities: {rep['foureqs']} {rep['partial_isometry']}",
    ])
    _emit(cfg, rep, text)
    return EXIT_OK if ok else EXIT_FAIL


def _idx_text(i: dict) -> str:
    if "vertex" in i:
        return f"({i['vertex']},{i['i']})"
    s, t, k = i["edge"]
    return f"({s}>{t}#{k},{i['i']})"


def cmd_oracle(cfg: RunConfig) -> int:
    g = _load(cfg)
    p = _resolve_pair(g, cfg)
    rep = oracle_report(g, p)
    lines = [f"pair H={rep['pair']['H']} S={rep['pair']['S']}: {len(rep['vectors'])} kernel basis vectors"]
    for r in rep["vectors"]:
        lines.append(
            f"  x={r['x']}  matrix={r['matrix_image']}  defect={r['oracle_class']}  "
            f"{'agree' if r['agree'] else 'MISMATCH'}"
        )
    if not rep["vectors"]:
        lines.append("  kernel is trivial; nothing to compare")
    _emit(cfg, rep, "\n".join(lines))
    return EXIT_OK if rep["all_agree"] else EXIT_FAIL


def _param_range(s: str) -> list[int]:
    try:
        if ".." in s:
            lo, hi = s.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(s)]
    except ValueError:
        raise InputError(f"bad parameter range {s!r}; use N or LO..HI") from None


def cmd_examples(cfg: RunConfig) -> int:
    family = cfg.family.upper()
    arity = {"E": 3, "F": 2}.get(family)
    if arity is None:
        raise InputError("family must be E or F")
    params = cfg.params or (("0..2",) * arity)
    if len(params) != arity:
        raise InputError(f"family {family} takes {arity} parameters")
    ranges = [_param_range(s) for s in params]
    out = []
    ok = True
    for combo in itertools.product(*ranges):
        if family == "E":
            g, p = family_e(*combo), AdmissiblePair({"v1"})
        else:
            g, p = family_f(*combo), AdmissiblePair({"v1"}, {"v3"})
        rep = sixterm_report(g, p)
        orc = oracle_report(g, p)
        ok = ok and all(rep["exactness"].values()) and rep["partial0_zero"] and orc["all_agree"]
        out.append({
            "params": list(combo),
            "graph": g.to_json(),
            "groups": rep["groups"],
            "maps": {k: v["snf_factors"] for k, v in rep["summary"]["maps"].items()},
            "partial1": rep["maps"]["partial1"]["matrix"],
            "exact": all(rep["exactness"].values()) and rep["partial0_zero"],
            "oracle_agrees": orc["all_agree"],
        })
    lines = []
    for r in out:
        gs = r["groups"]
        lines.append(
            f"{family}{tuple(r['params'])}: "
            + "  ".join(f"{k}={_gtext(v)}" for k, v in gs.items())
            + f"  exact={r['exact']} oracle={r['oracle_agrees']}"
        )
    _emit(cfg, out, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def _gtext(grp: dict) -> str:
    parts = [f"Z/{d}" for d in grp["invariant_factors"]] + ["Z"] * grp["free_rank"]
    return "+".join(parts) if parts else "0"


COMMANDS = {
    "ideals": cmd_ideals,
    "kgroups": cmd_kgroups,
    "sixterm": cmd_sixterm,
    "witness": cmd_witness,
    "oracle": cmd_oracle,
    "examples": cmd_examples,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphk", description="K-theory six-term sequences of graph algebra ideals")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_file=True):
        if with_file:
            p.add_argument("file", help="graph JSON file")
        p.add_argument("--format", dest="fmt", choices=("text", "json"), default="text")
        return p

    common(sub.add_parser("ideals", help="list admissible pairs"))
    p = common(sub.add_parser("kgroups", help="K-groups of a relative graph algebra"))
    p.add_argument("--relset", help="comma-separated vertices (default: all regular vertices)")
    p.add_argument("--bound", type=int, default=3, help="cone enumeration bound")
    p = common(sub.add_parser("sixterm", help="six-term exact sequence of an ideal"))
    p.add_argument("--H", default="")
    p.add_argument("--S", default="")
    p.add_argument("--all", dest="all_pairs", action="store_true", help="every admissible pair")
    p.add_argument("--jobs", type=int, default=1, help="worker processes with --all")
    p = common(sub.add_parser("witness", help="unitary witness for a K1 class"))
    p.add_argument("--relset", help="comma-separated vertices (default: all regular vertices)")
    p.add_argument("--x", required=True, help="kernel vector on the relative set, in vertex order")
    p = common(sub.add_parser("oracle", help="compare the index map with the defect computation"))
    p.add_argument("--H", default="")
    p.add_argument("--S", default="")
    p = common(sub.add_parser("examples", help="the two example families"), with_file=False)
    p.add_argument("--family", required=True, choices=("E", "F", "e", "f"))
    p.add_argument("--params", default="", help="comma-separated N or LO..HI per parameter")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    relset = getattr(ns, "relset", None)
    return RunConfig(
        command=ns.command,
        path=getattr(ns, "file", None),
        H=_names(getattr(ns, "H", "")),
        S=_names(getattr(ns, "S", "")),
        relset=_names(relset) if relset is not None else None,
        x=_ints(getattr(ns, "x", "")),
        bound=getattr(ns, "bound", 3),
        fmt=ns.fmt,
        all_pairs=getattr(ns, "all_pairs", False),
        jobs=getattr(ns, "jobs", 1),
        family=getattr(ns, "family", "E"),
        params=_names(getattr(ns, "params", "")),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ResidueError, ArithmeticError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
