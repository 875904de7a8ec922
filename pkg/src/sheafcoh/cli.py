"""Batch command line: one input program (declarations + one pipeline), one
deterministic output.

    sheafcoh run FILE [--format text|json] [--prime P]
    sheafcoh expr 'PROGRAM'  [--format ...]

Exit codes: 0 success, 2 parse error, 3 precondition failure, 4 uncertified
window.  The default prime may be set through SHEAFCOH_PRIME.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import dsl
from .complexes import GradedMap
from .emodules import EModule
from .generators import (elliptic_quartic, elliptic_quartic_matrix,
                         horrocks_mumford_matrix, ideal_power_pieces,
                         max_ideal_power, omega_module, rnc_module)
from .rings import RingSig
from .smodules import FPModuleS, GradedPiecesModule, regularity
from .tate import (TateWindow, UncertifiedWindowError, betti_table,
                   cohomology_table, linear_monad, local_cohomology_table,
                   tate_dual, tate_from_ematrix, tate_from_module)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_UNCERTIFIED = 4


@dataclass
class SessionConfig:
    prime: int
    fmt: str = "text"
    verbose: bool = False


class PreconditionError(RuntimeError):
    pass


def default_prime() -> int:
    env = os.environ.get("SHEAFCOH_PRIME")
    if env:
        return int(env)
    from .linalg import DEFAULT_PRIME
    return DEFAULT_PRIME


def _int_flag(stage: dsl.Stage, name: str, default=None):
    if name in stage.flags:
        return int(stage.flags[name])
    if default is None:
        raise PreconditionError(f"stage '{stage.name}' needs --{name}")
    return default


def _range_flag(stage: dsl.Stage, name: str):
    raw = stage.flags.get(name)
    if raw is None:
        raise PreconditionError(f"stage '{stage.name}' needs --{name} a:b")
    a, _, b = raw.partition(":")
    if not _:
        raise PreconditionError(f"--{name} must look like a:b")
    return int(a), int(b)


def run_example_stage(stage: dsl.Stage, cfg: SessionConfig):
    if not stage.args:
        raise PreconditionError("example stage needs a name")
    name = stage.args[0]
    p = cfg.prime
    if name == "omega":
        i = _int_flag(stage, "i")
        v = _int_flag(stage, "v")
        return {"module": omega_module(RingSig("S", v, p), i),
                "trunc_hint": 2}
    if name == "powers":
        j = _int_flag(stage, "j")
        v = _int_flag(stage, "v")
        kind = stage.flags.get("ring", "E")
        if kind == "E":
            return {"emodule": max_ideal_power(RingSig("E", v, p), j)}
        return {"module": ideal_power_pieces(RingSig("S", v, p), j, 0, j + 10),
                "trunc_hint": j + 1}
    if name == "rnc":
        d = _int_flag(stage, "d")
        k = _int_flag(stage, "k")
        return {"module": rnc_module(d, k, 0, 10, p), "trunc_hint": 2}
    if name == "elliptic":
        lam = _int_flag(stage, "lam", 1)
        return {"module": elliptic_quartic(lam, p), "trunc_hint": 3}
    if name == "hm":
        return {"ematrix": horrocks_mumford_matrix(p)}
    if name == "elliptic_matrix":
        lam = _int_flag(stage, "lam", 1)
        return {"ematrix": elliptic_quartic_matrix(lam, p)}
    raise PreconditionError(f"unknown example {name!r}")


def run_pipeline(prog: dsl.InputProgram, cfg: SessionConfig) -> tuple[str, int]:
    state: dict = {}
    if len(prog.modules) == 1:
        state["module"] = next(iter(prog.modules.values()))
    elif len(prog.matrices) == 1 and not prog.modules:
        gm = next(iter(prog.matrices.values()))
        key = "ematrix" if gm.ring.kind == "E" else "matrix"
        state[key] = gm
    out_lines: list[str] = []
    payload = None
    for stage in prog.pipeline:
        name = stage.name
        if name == "use":
            if not stage.args:
                raise PreconditionError("use stage needs a name")
            ident = stage.args[0]
            if ident in prog.modules:
                state = {"module": prog.modules[ident]}
            elif ident in prog.matrices:
                gm = prog.matrices[ident]
                state = {"ematrix" if gm.ring.kind == "E" else "matrix": gm}
            else:
                raise PreconditionError(f"unknown symbol {ident!r}")
        elif name == "example":
            state = run_example_stage(stage, cfg)
        elif name == "tate":
            state["tate"] = _stage_tate(stage, state)
        elif name == "dualtate":
            win = _need(state, "tate")
            state["tate"] = tate_dual(win)
        elif name == "betti":
            win = _need(state, "tate")
            bt = betti_table(win)
            payload = bt.to_json_dict()
            out_lines.append(bt.render())
        elif name == "cohomology":
            win = _need(state, "tate")
            jr = _range_flag(stage, "jrange")
            lr = _range_flag(stage, "lrange")
            ct = cohomology_table(win, jr, lr)
            payload = ct.to_json_dict(jr, lr)
            out_lines.append(ct.render(jr, lr))
        elif name == "linmonad":
            win = _need(state, "tate")
            tlo = _int_flag(stage, "dlo", -4)
            thi = _int_flag(stage, "dhi", 6)
            G, rep = linear_monad(win, (tlo, thi))
            payload = {"schema": 1,
                       "terms": {str(k): list(G.term(k).gen_degrees)
                                 for k in G.positions()},
                       "homology": {f"{i},{t}": h
                                    for (i, t), h in sorted(rep.items())}}
            shape = " -> ".join(
                _s_term(G.term(k).gen_degrees) for k in G.positions())
            out_lines.append("0 -> " + shape + " -> 0")
            out_lines.append("homology: " + json.dumps(
                {f"H^{i} deg {t}": h for (i, t), h in sorted(rep.items())}))
        elif name == "linpart":
            win = _need(state, "tate")
            from .complexes import linear_part
            lp = linear_part(win.complex)
            payload = lp.to_json_dict()
            out_lines.append(json.dumps(payload, indent=1, sort_keys=True))
        elif name == "localcoh":
            mod = _need(state, "module")
            d = _int_flag(stage, "trunc")
            lo = _int_flag(stage, "lo", -3)
            hi = _int_flag(stage, "hi", d + 2)
            dr = _range_flag(stage, "degrees")
            table = local_cohomology_table(mod, d, lo, hi, dr)
            payload = {"schema": 1,
                       "entries": [{"j": j, "degree": t, "dim": dim}
                                   for (j, t), dim in sorted(table.items())]}
            out_lines.append(json.dumps(payload["entries"]))
        elif name == "beilinson1":
            win = _need(state, "tate")
            rlo, rhi = _range_flag(stage, "range")
            from .beilinson import omega_functor
            oc = omega_functor(win, rlo, rhi)
            oc.verify()
            payload = oc.to_json_dict()
            out_lines.append(_render_omega(oc))
        elif name == "beilinson2":
            win = _need(state, "tate")
            rlo, rhi = _range_flag(stage, "range")
            from .beilinson import beilinson_monad2
            mm, rep = beilinson_monad2(win, rlo, rhi)
            payload = {"schema": 1,
                       "terms": [{"position": k,
                                  "bundles": [{"twist": -q, "multiplicity": m}
                                              for q, m in sorted(c.items())]}
                                 for k, c in sorted(rep.items())]}
            out_lines.append(" -> ".join(
                _o_term(rep.get(k, {})) for k in sorted(rep)))
        elif name == "regularity":
            mod = _need(state, "module")
            if not isinstance(mod, FPModuleS):
                raise PreconditionError(
                    "regularity needs a finitely presented module")
            r, cert = regularity(mod, hard_limit=_int_flag(stage, "limit", 20))
            payload = {"schema": 1, "regularity": r, "certified": cert}
            out_lines.append(f"regularity {r} certified {str(cert).lower()}")
            if not cert:
                raise UncertifiedWindowError("regularity not certified")
        else:
            raise PreconditionError(f"unknown stage {stage.name!r}")
    if cfg.fmt == "json":
        return json.dumps(payload if payload is not None else {"schema": 1},
                          indent=1, sort_keys=True) + "\n", EXIT_OK
    return "\n".join(out_lines) + "\n", EXIT_OK


def _need(state: dict, key: str):
    val = state.get(key)
    if val is None:
        raise PreconditionError(f"pipeline stage needs a {key} input")
    return val


def _stage_tate(stage: dsl.Stage, state: dict) -> TateWindow:
    lo = _int_flag(stage, "lo", -3)
    hi = _int_flag(stage, "hi", 3)
    if "ematrix" in state:
        return tate_from_ematrix(state["ematrix"], lo, hi)
    mod = _need(state, "module")
    if "trunc" in stage.flags:
        d = int(stage.flags["trunc"])
        return tate_from_module(mod, d, lo, hi, assume_regular=True)
    if not isinstance(mod, FPModuleS):
        raise UncertifiedWindowError(
            "pieces-module input needs an explicit --trunc override")
    r, cert = regularity(mod)
    if not cert:
        raise UncertifiedWindowError("regularity not certified; pass --trunc")
    return tate_from_module(mod, r + 1, lo, hi)


def _s_term(degs) -> str:
    if not degs:
        return "0"
    counts: dict[int, int] = {}
    for g in degs:
        counts[g] = counts.get(g, 0) + 1
    return " + ".join(f"S^{m}({-g})" if g else f"S^{m}"
                      for g, m in sorted(counts.items()))


def _o_term(counts) -> str:
    if not counts:
        return "0"
    return " + ".join(f"O(-{q})^{m}" if q else f"O^{m}"
                      for q, m in sorted(counts.items()))


def _render_omega(oc) -> str:
    parts = []
    for k in range(oc.lo, oc.hi + 1):
        ms = oc.term_multiset(k)
        if not ms:
            parts.append("0")
        else:
            parts.append(" + ".join(f"Om^{i}({i})^{m}" for i, m in
                                    sorted(ms.items())))
    return " -> ".join(parts)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="sheafcoh", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    runp = sub.add_parser("run", help="run a program file")
    runp.add_argument("file")
    exprp = sub.add_parser("expr", help="run an inline program")
    exprp.add_argument("program")
    for sp in (runp, exprp):
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--prime", type=int, default=None)
        sp.add_argument("-o", "--output", default=None)
    args = ap.parse_args(argv)

    cfg = SessionConfig(prime=args.prime or default_prime(), fmt=args.format)
    if args.cmd == "run":
        try:
            with open(args.file, "r", encoding="utf-8") as fh:
                source = fh.read()
        except OSError as exc:
            print(f"cannot read {args.file}: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION
    else:
        source = args.program
    try:
        prog = dsl.parse(source)
    except dsl.DSLError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        text, code = run_pipeline(prog, cfg)
    except UncertifiedWindowError as exc:
        print(f"uncertified window: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except (PreconditionError, ValueError) as exc:
        print(f"precondition failure: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
