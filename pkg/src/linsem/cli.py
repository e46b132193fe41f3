"""Command-line front end.

Exit codes: 0 success, 1 error, 2 negative verdict when ``--fail-on-negative``
is given.  ``--json`` prints one JSON document whose header echoes the run
configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .algebra import DEFAULT_SIZE_GUARD, AlgebraError
from .cas import DIALECTS, TASKS, emit_cas_script
from .constraints import (
    certify_all,
    ci_constraints,
    dedupe,
    minor_constraints,
    verma_constraints,
)
from .decomposition import mixed_components, tian_tau_all
from .graph import GraphError, MixedGraph, properties, read_graph, serialize, to_dot
from .identifiability import (
    STATUS_GENERIC,
    STATUS_GLOBAL,
    IdentificationError,
    fiber_degree_estimate,
    identify,
    recover_parameters,
)
from .numerics import (
    NumericsError,
    Tolerances,
    format_matrix,
    matrix_json,
    phi_numeric,
    read_matrix,
    sample_params,
)
from .parametrization import list_treks, phi_symbolic, trek_monomial
from .separation import (
    ci_statements,
    d_separated,
    generic_rank_numeric,
    trek_separation_rank,
    verify_trek_separation,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


@dataclass
class RunConfig:
    """Settings echoed into every report."""

    seed: int = 0
    threads: int = 1
    trials: int = 20
    starts: int = 200
    size_guard: int = DEFAULT_SIZE_GUARD
    tolerances: dict = field(default_factory=lambda: asdict(Tolerances()))

    def tol(self) -> Tolerances:
        return Tolerances(**self.tolerances)


class CliError(Exception):
    pass


def load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise CliError("config must be a JSON object")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    cfg = RunConfig()
    file_cfg = load_config(args.config)
    known = {f.name for f in fields(RunConfig)}
    for key, value in file_cfg.items():
        if key not in known:
            raise CliError(f"unknown config key {key!r}")
        if key == "tolerances":
            _merge_tolerances(cfg, value)
        else:
            setattr(cfg, key, value)
    for key in ("seed", "threads", "trials", "starts", "size_guard"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    for item in args.tol or ():
        name, _, value = item.partition("=")
        _merge_tolerances(cfg, {name: value})
    return cfg


def _merge_tolerances(cfg: RunConfig, updates: dict) -> None:
    types = {f.name: f.type for f in fields(Tolerances)}
    for name, value in updates.items():
        if name not in types:
            raise CliError(f"unknown tolerance {name!r}; known: {', '.join(sorted(types))}")
        cfg.tolerances[name] = int(value) if name == "newton_max_iter" else float(value)


# -- helpers ------------------------------------------------------------------


def _nodes(G: MixedGraph, text: Optional[str]) -> list[int]:
    if not text:
        return []
    try:
        return [G.node(x.strip()) for x in text.split(",") if x.strip()]
    except (KeyError, ValueError, GraphError) as exc:
        raise CliError(str(exc)) from None


def _node(G: MixedGraph, text: str) -> int:
    out = _nodes(G, text)
    if len(out) != 1:
        raise CliError(f"expected one node, got {text!r}")
    return out[0]


def load_sigma(path: str, G: MixedGraph) -> np.ndarray:
    S, nodes = read_matrix(path)
    if S.shape != (G.n, G.n):
        raise CliError(f"covariance is {S.shape[0]}x{S.shape[1]} but the graph has {G.n} nodes")
    if nodes is not None:
        perm = [nodes.index(lab) if lab in nodes else -1 for lab in G.labels]
        if -1 in perm:
            raise CliError("covariance node labels do not match the graph")
        S = S[np.ix_(perm, perm)]
    return S


def _labels(G: MixedGraph, xs) -> str:
    return "{" + ",".join(G.label_list(xs)) + "}"


@dataclass
class Outcome:
    """Payload for JSON, text lines for humans, and a negative flag."""

    payload: dict
    lines: list[str]
    negative: bool = False


# -- subcommands ----------------------------------------------------------------


def cmd_validate(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    p = properties(G)
    payload = {
        "nodes": list(G.labels),
        "directed": len(G.directed),
        "bidirected": len(G.bidirected),
        "acyclic": p.acyclic,
        "simple": p.simple,
        "sinks": G.label_list(p.sinks),
        "sources": G.label_list(p.sources),
    }
    lines = [
        f"nodes: {' '.join(G.labels)}",
        f"directed edges: {len(G.directed)}, bidirected edges: {len(G.bidirected)}",
        f"acyclic: {p.acyclic}, simple: {p.simple}",
        f"sinks: {_labels(G, p.sinks)}, sources: {_labels(G, p.sources)}",
    ]
    return Outcome(payload, lines)


def cmd_parametrize(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    if args.numeric:
        p = sample_params(G, cfg.seed, tol=cfg.tol())
        S = phi_numeric(p.lam, p.omega)
        if args.sigma_out:
            Path(args.sigma_out).write_text(format_matrix(S), encoding="utf-8")
        return Outcome({"lambda": matrix_json(p.lam, G.labels), "omega": matrix_json(p.omega, G.labels),
                        "sigma": matrix_json(S, G.labels)},
                       ["Lambda", format_matrix(p.lam).rstrip(), "Omega", format_matrix(p.omega).rstrip(),
                        "Sigma", format_matrix(S).rstrip()])
    try:
        sc = phi_symbolic(G, cfg.size_guard)
    except AlgebraError as exc:
        raise CliError(str(exc)) from None
    if args.entry:
        pair = _nodes(G, args.entry)
        if len(pair) != 2:
            raise CliError("--entry takes two nodes, e.g. 2,4")
        pairs = [tuple(pair)]
    else:
        pairs = [(i, j) for i in range(G.n) for j in range(i, G.n)]
    entries = [{"i": G.labels[i], "j": G.labels[j], "value": sc.entry_str(i, j)} for i, j in pairs]
    lines = [f"Sigma[{e['i']},{e['j']}] = {e['value']}" for e in entries]
    return Outcome({"rational": sc.rational, "entries": entries}, lines)


def cmd_treks(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    i, j = _node(G, args.i), _node(G, args.j)
    try:
        ts = list_treks(G, i, j, args.max_edges)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    items = [{"trek": t.to_str(G), "monomial": trek_monomial(t).to_str(G.n),
              "left": G.label_list(t.lhs), "right": G.label_list(t.rhs)} for t in ts]
    lines = [f"{it['trek']}    {it['monomial']}" for it in items]
    return Outcome({"i": G.labels[i], "j": G.labels[j], "treks": items}, lines or ["no treks"])


def cmd_dsep(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    if args.all:
        sts = ci_statements(G, args.max_cond)
        return Outcome({"statements": [s.to_str(G) for s in sts]}, [s.to_str(G) for s in sts])
    if not (args.i and args.j):
        raise CliError("dsep needs --i and --j (or --all)")
    i, j = _node(G, args.i), _node(G, args.j)
    S = _nodes(G, args.given)
    try:
        sep = d_separated(G, i, j, S)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    word = "d-separated" if sep else "d-connected"
    return Outcome({"i": G.labels[i], "j": G.labels[j], "given": G.label_list(S), "separated": sep},
                   [f"{G.labels[i]} and {G.labels[j]} are {word} given {_labels(G, S)}"], negative=not sep)


def cmd_treksep(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    A, C = _nodes(G, args.rows), _nodes(G, args.cols)
    if not A or not C:
        raise CliError("treksep needs --rows and --cols")
    cert = trek_separation_rank(G, A, C)
    payload = cert.to_json(G)
    lines = [f"rank {cert.rank}", f"S_A = {_labels(G, cert.S_A)}", f"S_C = {_labels(G, cert.S_C)}"]
    if args.verify:
        ok = verify_trek_separation(G, A, C, cert.S_A, cert.S_C)
        payload["verified"] = ok
        lines.append(f"interception check (treks with at most {2 * G.n} edges): {'ok' if ok else 'FAILED'}")
    if args.check_rank:
        r = generic_rank_numeric(G, A, C, seed=cfg.seed)
        payload["generic_rank"] = r
        lines.append(f"exact generic rank: {r}")
    return Outcome(payload, lines, negative=cert.rank >= min(len(set(A)), len(set(C))))


def cmd_decompose(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    dec = mixed_components(G)
    payload = dec.to_json(G)
    lines = []
    for comp in dec.components:
        lines.append(f"block {_labels(G, comp.block)}  V[C] = {{{','.join(G.labels[v] for v in comp.vertices)}}}")
        lines += ["  " + ln for ln in serialize(comp.graph).rstrip().splitlines()]
    if args.sigma:
        S = load_sigma(args.sigma, G)
        taus = tian_tau_all(G, S, dec)
        payload["tau"] = [matrix_json(T, comp.graph.labels) for T, comp in zip(taus, dec.components)]
        for T, comp in zip(taus, dec.components):
            lines.append(f"tau for block {_labels(G, comp.block)}")
            lines.append(format_matrix(T).rstrip())
    return Outcome(payload, lines)


def _degree(G, cfg):
    return fiber_degree_estimate(G, cfg.trials, cfg.starts, cfg.seed, cfg.tol(), cfg.threads)


def cmd_identify(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    rep = identify(G)
    if args.degree:
        rep.degree = _degree(G, cfg).to_json()
    payload = rep.to_json(G)
    lines = [f"status: {rep.status}"]
    gid = rep.global_id
    lines.append(f"global: {'injective' if gid.injective else 'not injective'}"
                 + (f" (witness {_labels(G, gid.witness)}, {gid.reason})" if gid.witness is not None else ""))
    h = payload["htc"]
    lines.append(f"half-trek sufficient: {h['sufficient']}, necessary: {h['necessary']}")
    if rep.htc.sufficient:
        lines.append("ordering: " + " < ".join(h["certificate"]["ordering"]))
        for i in h["certificate"]["ordering"]:
            lines.append(f"  Y_{i} = {{{','.join(h['certificate']['Y'][i])}}}")
    for c in payload["components"]:
        lines.append(f"component {{{','.join(c['block'])}}}: injective={c['global_id']['injective']}, "
                     f"htc={c['htc']['sufficient']}, necessary={c['htc']['necessary']}")
    if rep.degree:
        lines.append(f"real fiber size estimate: {rep.degree['estimate']} {rep.degree['distribution']}")
    return Outcome(payload, lines, negative=rep.status not in (STATUS_GLOBAL, STATUS_GENERIC))


def cmd_recover(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    S = load_sigma(args.sigma, G)
    try:
        rec = recover_parameters(G, S)
    except IdentificationError as exc:
        raise CliError(str(exc)) from None
    payload = {"lambda": matrix_json(rec.lam, G.labels), "omega": matrix_json(rec.omega, G.labels),
               "residual": rec.residual}
    lines = ["Lambda", format_matrix(rec.lam).rstrip(), "Omega", format_matrix(rec.omega).rstrip(),
             f"max |phi(Lambda, Omega) - Sigma| = {rec.residual:.3e}"]
    return Outcome(payload, lines, negative=rec.residual > 1e-8)


def cmd_degree(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    est = _degree(G, cfg)
    dist = ", ".join(f"{k}: {v}" for k, v in est.distribution.items())
    return Outcome(est.to_json(), [f"estimate {est.estimate} (counts {dist}; {est.trials} trials, "
                                   f"{est.starts} starts; real solutions only)"],
                   negative=est.estimate != 1)


def cmd_constraints(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    cs = ci_constraints(G, args.max_cond) + minor_constraints(G, args.max_minor)
    notes = []
    if G.is_acyclic:
        cs += verma_constraints(G, args.max_depth, size_guard=cfg.size_guard, seed=cfg.seed)
    else:
        notes.append("recursive constraints skipped: graph is cyclic")
    cs = dedupe(cs, G.n, cfg.seed)
    if args.certify:
        certify_all(G, cs, cfg.trials, cfg.seed, cfg.threads)
    lines = []
    for c in cs:
        tag = ""
        if c.certification is not None:
            tag = "  [certified]" if c.certification.certified else "  [NOT certified]"
        lines.append(f"{c.kind}: {c.poly.to_str(G.n)}{tag}")
        lines.append(f"  from: {'; '.join(c.provenance)}")
    negative = any(c.certification is not None and not c.certification.certified for c in cs)
    return Outcome({"constraints": [c.to_json(G) for c in cs], "notes": notes}, lines + notes or ["none"],
                   negative=negative)


def cmd_emit_cas(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    script = emit_cas_script(G, args.task, args.dialect)
    if args.output:
        Path(args.output).write_text(script.text, encoding="utf-8")
    return Outcome({"task": script.task, "dialect": script.dialect, "text": script.text,
                    "output": args.output}, [script.text.rstrip("\n")] if not args.output else
                   [f"wrote {args.output}"])


def cmd_export_dot(G: MixedGraph, args, cfg: RunConfig) -> Outcome:
    text = to_dot(G, args.name)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    return Outcome({"dot": text, "output": args.output},
                   [text.rstrip("\n")] if not args.output else [f"wrote {args.output}"])


COMMANDS = {
    "validate": (cmd_validate, "parse a graph and report basic properties"),
    "parametrize": (cmd_parametrize, "symbolic covariance entries (or a numeric sample)"),
    "treks": (cmd_treks, "list treks between two nodes"),
    "dsep": (cmd_dsep, "d-separation query or all CI statements"),
    "treksep": (cmd_treksep, "trek-separation rank with a minimum cut"),
    "decompose": (cmd_decompose, "mixed components and their covariances"),
    "identify": (cmd_identify, "identifiability report"),
    "recover": (cmd_recover, "recover Lambda and Omega from a covariance matrix"),
    "degree": (cmd_degree, "estimate the real fiber size by Newton multistart"),
    "constraints": (cmd_constraints, "polynomial constraints on the covariance model"),
    "emit-cas": (cmd_emit_cas, "write a Singular or Macaulay2 script"),
    "export-dot": (cmd_export_dot, "Graphviz rendering of the graph"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("graph", help="graph file ('nodes:' line, then 'a -> b' and 'a <-> b' lines)")
    common.add_argument("--json", action="store_true", help="print a JSON report")
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--threads", type=int, default=None, help="worker threads for trials")
    common.add_argument("--config", default=None, help="JSON config file; flags override it")
    common.add_argument("--fail-on-negative", action="store_true", help="exit 2 on a negative verdict")
    common.add_argument("--size-guard", type=int, default=None, help="largest graph for symbolic work")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")

    parser = argparse.ArgumentParser(prog="linsem", description="Linear structural equation models on mixed graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    ps = {name: sub.add_parser(name, parents=[common], help=h) for name, (_, h) in COMMANDS.items()}

    ps["parametrize"].add_argument("--entry", help="one entry, e.g. 2,4")
    ps["parametrize"].add_argument("--numeric", action="store_true", help="sample parameters instead")
    ps["parametrize"].add_argument("--sigma-out", help="with --numeric, write the covariance matrix file")
    ps["treks"].add_argument("--i", required=True)
    ps["treks"].add_argument("--j", required=True)
    ps["treks"].add_argument("--max-edges", type=int, default=None, help="required on cyclic graphs")
    ps["dsep"].add_argument("--i")
    ps["dsep"].add_argument("--j")
    ps["dsep"].add_argument("--given", default="", help="comma-separated conditioning set")
    ps["dsep"].add_argument("--all", action="store_true", help="list every CI statement")
    ps["dsep"].add_argument("--max-cond", type=int, default=None)
    ps["treksep"].add_argument("--rows", required=True)
    ps["treksep"].add_argument("--cols", required=True)
    ps["treksep"].add_argument("--verify", action="store_true", help="check the cut on bounded treks")
    ps["treksep"].add_argument("--check-rank", action="store_true", help="compare with exact generic rank")
    ps["decompose"].add_argument("--sigma", help="covariance file to map to the components")
    ps["identify"].add_argument("--degree", action="store_true", help="add a fiber size estimate")
    ps["identify"].add_argument("--trials", type=int, default=None)
    ps["identify"].add_argument("--starts", type=int, default=None)
    ps["recover"].add_argument("--sigma", required=True)
    ps["degree"].add_argument("--trials", type=int, default=None)
    ps["degree"].add_argument("--starts", type=int, default=None)
    ps["constraints"].add_argument("--max-cond", type=int, default=None)
    ps["constraints"].add_argument("--max-minor", type=int, default=2)
    ps["constraints"].add_argument("--max-depth", type=int, default=2)
    ps["constraints"].add_argument("--certify", action="store_true")
    ps["constraints"].add_argument("--trials", type=int, default=None)
    ps["emit-cas"].add_argument("--task", choices=TASKS, default="identifiability")
    ps["emit-cas"].add_argument("--dialect", choices=DIALECTS, default="singular")
    ps["emit-cas"].add_argument("--output", "-o")
    ps["export-dot"].add_argument("--name", default="G")
    ps["export-dot"].add_argument("--output", "-o")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        G = read_graph(args.graph)
        handler = COMMANDS[args.command][0]
        out = handler(G, args, cfg)
    except GraphError as exc:
        print(f"error: {args.graph}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (CliError, NumericsError, AlgebraError, OSError, NotImplementedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.json:
        doc = {"schema_version": SCHEMA_VERSION, "command": args.command, "graph": Path(args.graph).name,
               "config": asdict(cfg), "result": out.payload}
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print("\n".join(out.lines))
    if args.fail_on_negative and out.negative:
        return EXIT_NEGATIVE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
