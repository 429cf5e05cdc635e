"""``qcpag`` command line.

Exit codes: 0 success or certified, 1 verification failure, 2 usage or input
error, 3 internal error.  Text output starts with a ``#`` header carrying the
toolkit version and the resolved arguments; ``--json`` output carries the
same under ``"version"`` and ``"config"``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import traceback
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import alist
from ._version import __version__
from .base import (
    BaseMatrix,
    MaskingMatrix,
    build_cyclic_base,
    build_prime_base,
    mask,
    parse_index_spec,
    random_indices,
    select_submatrix,
)
from .binary import as_csr
from .dispersion import QcBinaryMatrix, disperse, qc_structure_check
from .errors import FormatError, NotBlockStructuredError, QcpagError
from .geometry import (
    GeometryDescriptor,
    protograph,
    rc_constraint_check,
    verify_definition,
    verify_theorem1,
    verify_theorem2,
)
from .gf2 import gf2_rank
from .graph import count_cycles, cycle_report, girth
from .sim import SimConfig, csv_text, parse_grid, run_monte_carlo
from .spectral import (
    eigen_ratio,
    expansion_lower_bound,
    is_ramanujan_biregular,
    numeric_spectrum_check,
    srg_spectrum,
    tanner_spectrum,
)
from .trapping import classify_configuration, reports_to_csv, search_trapping_sets

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 as well; keep the message format
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ helpers

def _resolved(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "json")}


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps({"version": __version__, "command": args.command, "config": _resolved(args), **payload}, indent=2, default=str))
    else:
        print(f"# qcpag {__version__} {args.command}")
        print(f"# config: {json.dumps(_resolved(args), default=str)}")
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def load_matrix(path: str, t: int | None = None):
    """Read an alist or base-matrix text file; QC structure is recovered when possible."""
    p = Path(path)
    if not p.exists():
        raise UsageError(f"no such file: {path}")
    text = p.read_text()
    first = text.split("\n", 1)[0].split()
    if len(first) == 4 and not first[3].lstrip("-").isdigit():
        return disperse(BaseMatrix.from_text(text))
    H = alist.loads(text)
    if t is not None:
        return qc_structure_check(H, t)
    return _guess_qc(H)


def _guess_qc(H):
    m, n = H.shape
    g = math.gcd(m, n)
    for t in sorted((d for d in range(2, g + 1) if g % d == 0), reverse=True):
        try:
            return qc_structure_check(H, t)
        except NotBlockStructuredError:
            continue
    return H


def _certify(H, mode: str = "auto", delta=None, exhaustive=False, samples=64, seed=0) -> GeometryDescriptor:
    if mode == "thm1":
        return verify_theorem1(_need_qc(H))
    if mode == "thm2":
        return verify_theorem2(_need_qc(H), delta=delta, mode="exhaustive" if exhaustive else "fast", samples=samples, seed=seed)
    if mode == "definition":
        return verify_definition(H)
    if isinstance(H, QcBinaryMatrix) and not H.has_zero_blocks:
        if H.block_order == H.block_rows:
            try:
                return verify_theorem1(H)
            except QcpagError:
                pass
        return verify_theorem2(H, mode="exhaustive" if exhaustive else "fast", samples=samples, seed=seed)
    return verify_definition(H)


def _need_qc(H) -> QcBinaryMatrix:
    if not isinstance(H, QcBinaryMatrix):
        raise UsageError("matrix has no recognizable CPM block structure; pass --t or use --mode definition")
    return H


def _summary(H) -> dict:
    A = as_csr(H)
    cw = np.bincount(A.indices, minlength=A.shape[1])
    rw = np.diff(A.indptr)
    out = {
        "m": A.shape[0],
        "n": A.shape[1],
        "column_weights": sorted(set(int(x) for x in cw)),
        "row_weights": sorted(set(int(x) for x in rw)),
        "ones": int(A.nnz),
    }
    if isinstance(H, QcBinaryMatrix):
        out["block_order"] = H.block_order
        out["block_shape"] = [H.block_rows, H.block_cols]
        out["zero_blocks"] = int(np.count_nonzero(H.shifts < 0))
    return out


def _fmt(d: dict) -> str:
    width = max(len(k) for k in d) if d else 0
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in d.items())


def _ints(spec: str) -> list[int]:
    return [int(x) for x in spec.split(",") if x.strip()]


# ------------------------------------------------------------------ commands

def cmd_construct(args) -> int:
    if args.kind == "prime":
        if len(args.params) != 1:
            raise UsageError("construct prime takes one parameter p")
        B = build_prime_base(args.params[0])
        name = args.name or f"prime{args.params[0]}"
    else:
        if len(args.params) != 2:
            raise UsageError("construct cyclic takes two parameters q t")
        B = build_cyclic_base(*args.params)
        name = args.name or f"cyclic{args.params[0]}_{args.params[1]}"
    rows = parse_index_spec(args.rows) if args.rows else list(range(B.rows))
    cols = parse_index_spec(args.cols) if args.cols else list(range(B.cols))
    if args.random:
        rows, cols = random_indices(B, args.random[0], args.random[1], args.seed)
    if rows != list(range(B.rows)) or cols != list(range(B.cols)):
        B = select_submatrix(B, rows, cols)
    if args.mask:
        B = mask(B, MaskingMatrix.load(args.mask))
    H = disperse(B)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base_path, alist_path = out / f"{name}.base", out / f"{name}.alist"
    B.save(base_path)
    alist.write(H, alist_path)
    if args.dot:
        Path(args.dot).write_text(protograph(B).to_dot(name))
    info = _summary(H)
    geo = None
    try:
        if not H.has_zero_blocks:
            geo = _certify(H)
        elif info["n"] <= 10_000:
            geo = verify_definition(H)
    except QcpagError:
        geo = None
    info.update({
        "gamma": geo.gamma if geo else None,
        "rho": geo.rho if geo else None,
        "delta": geo.delta if geo else None,
        "certification": geo.certification.value if geo else None,
        "base_file": str(base_path),
        "alist_file": str(alist_path),
    })
    _emit(args, info, _fmt(info))
    return EXIT_OK


def cmd_verify(args) -> int:
    H = load_matrix(args.matrix, args.t)
    try:
        G = _certify(H, args.mode, args.delta, args.exhaustive, args.samples, args.seed)
    except QcpagError as exc:
        payload = {"certified": False, "error": type(exc).__name__, "witness": str(exc)}
        _emit(args, payload, f"NOT CERTIFIED: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL
    text = (
        f"certified PaG({G.gamma}, {G.rho}, {G.delta}) by {G.certification.value}\n"
        f"points {G.n_points}, lines {G.m_lines}, net {G.is_net}, GQ {G.is_gq}\n"
    )
    if G.detail:
        text += f"detail {json.dumps(G.detail)}\n"
    geometry = {k: v for k, v in G.to_dict().items() if k != "matrix"}
    _emit(args, {"certified": True, "geometry": geometry}, text)
    return EXIT_OK


def cmd_analyze(args) -> int:
    H = load_matrix(args.matrix, args.t)
    info = _summary(H)
    rank = gf2_rank(H)
    info["rank"] = rank
    info["k"] = info["n"] - rank
    info["rate"] = info["k"] / info["n"]
    rc = rc_constraint_check(H)
    info["rc_constraint"] = bool(rc)
    g = girth(H)
    info["girth"] = g if math.isfinite(g) else None
    if math.isfinite(g) and g in (4, 6, 8, 10):
        info[f"cycles_{g}"] = count_cycles(H, int(g))
    try:
        G = _certify(H, samples=args.samples, seed=args.seed) if info["n"] <= 10_000 or isinstance(H, QcBinaryMatrix) else None
    except QcpagError:
        G = None
    info["geometry"] = list(G.params) if G else None
    info["certification"] = G.certification.value if G else None
    _emit(args, info, _fmt(info))
    return EXIT_OK


def cmd_cycles(args) -> int:
    H = load_matrix(args.matrix, args.t)
    rep = cycle_report(H, _ints(args.lengths), args.method)
    _emit(args, rep.to_dict(), rep.to_table())
    return EXIT_OK


def cmd_spectrum(args) -> int:
    gamma, rho, delta = args.gamma, args.rho, args.delta
    a1 = srg_spectrum(gamma, rho, delta)
    ta = tanner_spectrum(gamma, rho, delta)
    ratio = eigen_ratio(gamma, rho, delta)
    payload = {
        "A1": a1.to_dict(),
        "A": ta.to_dict(),
        "eigen_ratio": str(ratio),
        "ramanujan": is_ramanujan_biregular(gamma, rho, ta.mu1),
        "alpha": args.alpha,
        "expansion_lower_bound": expansion_lower_bound(gamma, rho, ta.mu1, args.alpha),
    }
    text = a1.to_table() + "\n" + ta.to_table() + "\n"
    text += _fmt({k: payload[k] for k in ("eigen_ratio", "ramanujan", "alpha", "expansion_lower_bound")})
    if args.matrix:
        res = numeric_spectrum_check(load_matrix(args.matrix, args.t), gamma, rho, delta)
        payload["numeric"] = res.to_dict()
        text += _fmt({"numeric_a1_residual": res.a1_residual, "numeric_tanner_residual": res.tanner_residual})
    _emit(args, payload, text)
    return EXIT_OK


def cmd_trap(args) -> int:
    H = load_matrix(args.matrix, args.t)
    G = _certify(H)
    if args.points:
        c = classify_configuration(G, _ints(args.points))
        _emit(args, c.to_dict(), _fmt({
            "tag": c.tag.value,
            "kappa": c.computed.kappa,
            "tau": c.computed.tau,
            "profile": c.computed.profile,
            "claimed_profile": c.claimed_profile,
            "claimed_tau": c.claimed_tau,
            "agrees": c.agrees,
            **{f"note_{i}": n for i, n in enumerate(c.notes)},
        }))
        return EXIT_OK
    res = search_trapping_sets(
        G, args.kappa_max, args.tau_max, mode=args.mode, samples=args.samples, seed=args.seed, strict=False
    )
    if args.csv:
        Path(args.csv).write_text(reports_to_csv(res.reports))
    payload = {
        "geometry": list(G.params),
        "exhaustive": res.exhaustive,
        "examined": res.examined,
        "reported": len(res.reports),
        "violations": [r.to_dict() for r in res.violations],
    }
    text = _fmt({k: v for k, v in payload.items() if k != "violations"} | {"violations": len(res.violations)})
    if not args.csv and not args.json:
        text += reports_to_csv(res.reports)
    _emit(args, payload, text)
    return EXIT_FAIL if res.violations else EXIT_OK


def cmd_rank(args) -> int:
    H = load_matrix(args.matrix, args.t)
    n = as_csr(H).shape[1]
    info = {}
    if args.by in ("rows", "both"):
        info["rank_rows"] = gf2_rank(H, by="rows")
    if args.by in ("columns", "both"):
        info["rank_columns"] = gf2_rank(H, by="columns")
    rank = next(iter(info.values()))
    info.update({"n": n, "k": n - rank, "rate": (n - rank) / n})
    _emit(args, info, _fmt(info))
    if args.by == "both" and info["rank_rows"] != info["rank_columns"]:
        return EXIT_FAIL
    return EXIT_OK


_SIM_FLAGS = {
    "code": str,
    "ebno_db": parse_grid,
    "max_iter": int,
    "decoder": str,
    "attenuation": float,
    "min_block_errors": int,
    "max_trials": lambda s: int(float(s)),
    "seed": int,
    "workers": int,
    "batch_size": int,
    "clamp": float,
}


def cmd_simulate(args) -> int:
    cfg = SimConfig.load(args.config) if args.config else SimConfig()
    over = {k: getattr(args, k) for k in _SIM_FLAGS if getattr(args, k) is not None}
    if args.random_codeword:
        over["random_codeword"] = True
    cfg = cfg.replace(**over)
    if not cfg.code:
        raise UsageError("no code: set 'code' in the config file or pass --code")
    H = load_matrix(cfg.code)
    result = run_monte_carlo(cfg, H)
    body = csv_text(result)
    if args.out:
        Path(args.out).write_text(body, encoding="ascii")
        meta = {"version": __version__, "config": {f.name: getattr(cfg, f.name) for f in fields(cfg)}}
        Path(str(args.out) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    if args.json:
        print(json.dumps({"version": __version__, "command": "simulate", **result.to_dict()}, indent=2))
    elif not args.out:
        sys.stdout.write(body)
    print(f"# qcpag {__version__} simulate config: {json.dumps(result.to_dict()['config'])}", file=sys.stderr)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    mat = argparse.ArgumentParser(add_help=False)
    mat.add_argument("matrix", help="alist or base-matrix text file")
    mat.add_argument("--t", type=int, default=None, help="CPM block order (inferred when omitted)")

    p = _Parser(prog="qcpag", description="Quasi-cyclic partial geometries and their LDPC codes.")
    p.add_argument("--version", action="version", version=f"qcpag {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", parents=[common], help="build a base matrix and its dispersion")
    c.add_argument("kind", choices=["prime", "cyclic"])
    c.add_argument("params", type=int, nargs="+", help="p for prime; q t for cyclic")
    c.add_argument("--rows", help="row indices, e.g. 1..6 or 1,118,56,79")
    c.add_argument("--cols", help="column indices")
    c.add_argument("--random", type=int, nargs=2, metavar=("K", "R"), help="seeded random K x R submatrix")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--mask", help="masking matrix file (rows of 0/1)")
    c.add_argument("--out-dir", default=".")
    c.add_argument("--name", default=None, help="output file stem")
    c.add_argument("--dot", default=None, help="also write the protograph as Graphviz DOT")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", parents=[common, mat], help="certify a partial geometry")
    v.add_argument("--mode", choices=["thm1", "thm2", "definition", "auto"], default="auto")
    v.add_argument("--delta", type=int, default=None, help="expected connection number (thm2)")
    v.add_argument("--exhaustive", action="store_true", help="check every (block-column, shift) pair (thm2)")
    v.add_argument("--samples", type=int, default=64)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("analyze", parents=[common, mat], help="rank, girth, shortest cycles and geometry")
    a.add_argument("--samples", type=int, default=64)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_analyze)

    cy = sub.add_parser("cycles", parents=[common, mat], help="girth and exact short-cycle counts")
    cy.add_argument("--lengths", default="4,6,8")
    cy.add_argument("--method", choices=["auto", "nbt", "dfs"], default="auto")
    cy.set_defaults(func=cmd_cycles)

    s = sub.add_parser("spectrum", parents=[common], help="closed-form spectra and expansion bounds")
    s.add_argument("gamma", type=int)
    s.add_argument("rho", type=int)
    s.add_argument("delta", type=int)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--matrix", default=None, help="also run a dense numeric check on this matrix")
    s.add_argument("--t", type=int, default=None)
    s.set_defaults(func=cmd_spectrum)

    t = sub.add_parser("trap", parents=[common, mat], help="trapping-set search and bound checks")
    t.add_argument("--kappa-max", type=int, default=3)
    t.add_argument("--tau-max", type=int, default=10**9)
    t.add_argument("--mode", choices=["auto", "exhaustive", "sample"], default="auto")
    t.add_argument("--samples", type=int, default=10_000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--points", default=None, help="classify this point set instead of searching")
    t.add_argument("--csv", default=None, help="write reports to this CSV file")
    t.set_defaults(func=cmd_trap)

    r = sub.add_parser("rank", parents=[common, mat], help="GF(2) rank and code dimension")
    r.add_argument("--by", choices=["rows", "columns", "both"], default="rows")
    r.set_defaults(func=cmd_rank)

    m = sub.add_parser("simulate", parents=[common], help="Monte Carlo BER/BLER over BPSK-AWGN")
    m.add_argument("config", nargs="?", default=None, help="key = value config file")
    m.add_argument("--out", default=None, help="CSV output path (stdout when omitted)")
    for key in _SIM_FLAGS:
        m.add_argument("--" + key.replace("_", "-"), dest=key, default=None, type=_SIM_FLAGS[key])
    m.add_argument("--random-codeword", action="store_true")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, FormatError, OSError) as exc:
        print(f"qcpag {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QcpagError as exc:
        # invalid input everywhere except where the input itself is under test
        print(f"qcpag {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL if args.command in ("verify", "trap") else EXIT_USAGE
    except Exception:  # pragma: no cover - safety net
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
