"""Command line front-end.

Every command reads JSON inputs, runs one construction or check suite and
writes a JSON report with a schema version, input digests, the full
configuration and the results.  Exit codes: 0 all checks pass, 1 malformed
input or a failed check, 2 an Unknown verdict.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fixtures
from .causet import (
    AffineMap,
    CircleRotation,
    SymmetryAction,
    build_causal_set_poset,
    build_circle,
    build_minkowski_lattice,
    from_relations,
    geometric_properties,
    sprinkle,
    validate_poset,
)
from .errors import LoopnetError, NoInvariantFrame, UnknownElement
from .loopgrp import (
    abelianize,
    format_word,
    in_loop_group,
    inverse,
    is_loop,
    is_path,
    parse_word,
    reduce,
    word_perp,
)

SCHEMA = "loopnet-report/1"

# values used inside the library that have no command line flag
LIBRARY_DEFAULTS = {
    "loopCap": "4 when the fibre element has at most 6 elements below it, else 2",
    "quotientMaxLength": 40,
    "quotientInsertLetters": 8,
    "causalityEngine": {"depth": 2, "width": 5000},
    "matrixTol": 1e-8,
    "matrixSeparationTol": 1e-6,
    "weylZeroTol": 1e-9,
}
DEFAULT_SEED = 0xC0FFEE

FIXTURES = {
    "diamond": lambda: (fixtures.diamond(), None),
    "diamond-swap": fixtures.diamond_swap,
    "twotowers": lambda: (fixtures.two_towers(), None),
    "minkowski": fixtures.minkowski_with_rotations,
    "circle": fixtures.circle_with_rotations,
    "causal-set": lambda: (fixtures.causal_set(), None),
    "mismatched": fixtures.mismatched_realization,
}


class InputError(Exception):
    """Malformed input; reported as an error object with exit code 1."""


# ------------------------------------------------------------------ loading


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _affine(doc):
    if "rotate" in doc:
        return CircleRotation(int(doc["rotate"]), int(doc["n"]))
    return AffineMap(tuple(tuple(r) for r in doc.get("A", np.eye(4, dtype=int).tolist())),
                     tuple(doc.get("b", (0, 0, 0, 0))))


def poset_from_json(doc: dict):
    """(poset, symmetry action or None) from a poset description."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InputError("poset description needs a 'kind'")
    kind = doc["kind"]
    try:
        if kind == "explicit":
            P = from_relations(doc["elements"], doc.get("leq", ()), doc.get("perp", ()),
                               close_perp=doc.get("closePerp", False))
        elif kind == "minkowski-lattice":
            cones = doc["cones"]
            P = build_minkowski_lattice(
                [(tuple(Fraction(str(v)) for v in c["center"]), Fraction(str(c["radius"])))
                 for c in cones],
                [c.get("id", f"c{i}") for i, c in enumerate(cones)],
            )
        elif kind == "circle":
            P = build_circle(int(doc["n"]), doc["lengths"])
        elif kind == "causal-set":
            pts = doc.get("points")
            if pts is None:
                pts = sprinkle(int(doc["count"]), int(doc.get("seed", DEFAULT_SEED)),
                               tuple(doc.get("box", (1, 1, 1, 1))))
            else:
                pts = [tuple(Fraction(str(v)) for v in p) for p in pts]
            P = build_causal_set_poset(pts, int(doc.get("maxSubsetSize", 2)),
                                       int(doc.get("cap", 5000)))
        elif kind == "fixture":
            name = doc["name"]
            if name not in FIXTURES:
                raise InputError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}")
            P, action = FIXTURES[name]()
            return P, action
        else:
            raise InputError(f"unknown poset kind {kind!r}")
    except UnknownElement as exc:
        raise InputError(str(exc)) from None
    except KeyError as exc:
        raise InputError(f"poset description of kind {kind!r} is missing {exc}") from None
    action = None
    sym = doc.get("symmetry")
    if sym:
        gens = sym.get("generators")
        real = sym.get("geometricRealization")
        maps = {k: _affine(v) for k, v in real.items()} if real else None
        try:
            if gens:
                action = SymmetryAction.generate(P, gens, maps)
            elif maps:
                action = SymmetryAction.from_geometry(P, maps)
        except ValueError as exc:
            raise InputError(f"symmetry: {exc}") from None
    return P, action


def load_poset(path):
    return poset_from_json(_read_json(path))


def field_config(path):
    """Field parameters and quadrature configuration from field.json."""
    from .weyl import QuadratureConfig

    doc = _read_json(path) if path else {}
    tol = doc.get("tolerances", {})
    samples = int(doc.get("mcSamples", 2**18))
    cfg = QuadratureConfig(
        cutoff_factor=float(doc.get("cutoff", 40.0)),
        radial_nodes=int(doc.get("nodes", 4096)),
        profile_nodes=int(doc.get("profileNodes", 256)),
        mc_log2=max(4, int(round(math.log2(max(samples, 16))))),
        seed=int(doc.get("seed", DEFAULT_SEED)),
        rel_tol=float(tol.get("relTol", 1e-8)),
        mc_rel_tol=float(tol.get("mcRelTol", 1e-2)),
    )
    return {
        "mass": float(doc.get("mass", 1.0)),
        "amplitude": float(doc.get("amplitude", 4.0)),
        "config": cfg,
        "phaseTol": float(tol.get("phase", 1e-6)),
    }


def _require(P, *names):
    for n in names:
        if n not in P:
            raise InputError(f"unknown element {n!r}")


def _word(text, P=None):
    try:
        return parse_word(text, P)
    except (ValueError, LoopnetError) as exc:
        raise InputError(f"bad word {text!r}: {exc}") from None


def _action(P, action):
    return action or SymmetryAction.trivial(P)


# ----------------------------------------------------------------- commands


def cmd_validate(args):
    P, action = load_poset(args.poset)
    rep = validate_poset(P)
    res = {"validation": rep.to_json(), "elements": len(P)}
    if P.geometry:
        res["geometricProperties"] = geometric_properties(P)
    if action is not None:
        res["symmetryOrder"] = action.order
    return res, rep.ok and rep.connected


def cmd_simplices(args):
    from .simplex import enumerate_simplices, simplex_counts

    P, _ = load_poset(args.poset)
    res = {"counts": simplex_counts(P)}
    if args.list:
        items, truncated = enumerate_simplices(P, args.degree, args.cap)
        res["simplices"] = [str(x) for x in items]
        res["truncated"] = truncated
    return res, True


def cmd_word(args):
    P = load_poset(args.poset)[0] if args.poset else None
    w = _word(args.word, P)
    op = args.op
    if op == "reduce":
        r = reduce(w)
        return {"word": format_word(r), "length": len(r)}, True
    if op == "inverse":
        return {"word": format_word(inverse(w))}, True
    if op == "is-path":
        return {"path": is_path(w)}, True
    if op == "is-loop":
        return {"loop": is_loop(w), "loopGroup": in_loop_group(w)}, True
    if op == "abelianize":
        ab = abelianize(w)
        return {"abelianization": {str(k): v for k, v in sorted(ab.items(), key=str)}}, True
    if op in ("perp", "equal"):
        if P is None or args.other is None:
            raise InputError(f"word {op} needs --poset and a second word")
        v = _word(args.other, P)
        if op == "perp":
            return {"perp": word_perp(w, v, P)}, True
        from .quotient import QuotientEngine, UNKNOWN, EQUAL

        engine = QuotientEngine(P, depth=args.depth, width=args.width)
        verdict = engine.equal(w, v)
        res = {"verdict": verdict.status, "witness": verdict.witness, "stats": verdict.stats}
        if verdict.certificate is not None:
            res["certificate"] = verdict.certificate.to_json()
        return res, None if verdict.status == UNKNOWN else True
    raise InputError(f"unknown word operation {op!r}")


def cmd_net(args):
    from .net import check_causality, check_isotony, default_cap, FibreCache, symmetry_on_net

    P, action = load_poset(args.poset)
    cap = args.cap if args.cap else default_cap
    fib = FibreCache(P, cap)
    iso = check_isotony(P, fibres=fib)
    cau = check_causality(P, fibres=fib, replay=args.replay, seed=args.seed)
    cau.pop("families", None)
    res = {"isotony": iso, "causality": cau,
           "fibres": {o: {"generators": len(fib[o]), "cap": fib[o].cap} for o in P.elements}}
    ok = iso["ok"] and cau["ok"]
    if action is not None:
        sym = symmetry_on_net(action, fibres=fib)
        res["symmetry"] = sym
        ok = ok and sym["ok"]
    return res, ok


def cmd_pathframe(args):
    from .connection import build_covariant_system, build_path_frame, system_covariance_defects

    P, action = load_poset(args.poset)
    if args.pole:
        _require(P, args.pole)
        return {"frame": build_path_frame(P, args.pole).to_json()}, True
    try:
        system = build_covariant_system(P, _action(P, action))
    except NoInvariantFrame as exc:
        return {"status": "obstructed", "message": str(exc), "witness": exc.witness}, False
    bad = system_covariance_defects(system)
    return {
        "status": "covariant",
        "poles": len(system.frames),
        "covarianceViolations": bad,
        "frames": {o: fr.to_json() for o, fr in sorted(system.frames.items())},
    }, not bad


def _matrix_backend(P, action, args):
    from .connection import MatrixBackend

    comps = args.components.split(",") if args.components else []
    _require(P, *comps)
    return MatrixBackend.covariant(P, action, comps, dim=args.dim, seed=args.seed)


def _weyl_backend(P, action, field):
    from .connection import WeylBackend
    from .weyl import free_field_connection

    _, _, fc = free_field_connection(_action(P, action), field["mass"], field["amplitude"],
                                     field["config"])
    return WeylBackend(fc, phase_tol=field["phaseTol"])


def _backend(P, action, args):
    if args.backend == "weyl":
        if not P.geometry or P.kind != "minkowski":
            raise InputError("the weyl backend needs a Minkowski double-cone poset")
        return _weyl_backend(P, action, field_config(args.field))
    return _matrix_backend(P, action, args)


def cmd_gauge_apply(args):
    from .connection import (
        GaugeTransformation,
        apply_gauge,
        build_path_frame,
        connection_from_rep,
        frame_change_gauge,
    )

    P, action = load_poset(args.poset)
    be = _backend(P, action, args)
    _require(P, args.pole)
    Pf = build_path_frame(P, args.pole, order=1)
    Qf = build_path_frame(P, args.pole, order=-1)
    uP = connection_from_rep(be, Pf, P)
    uQ = connection_from_rep(be, Qf, P)
    g = GaugeTransformation(be, {args.pole: frame_change_gauge(be, Pf, Qf)})
    from .connection import ConnectionSystem

    moved = apply_gauge(ConnectionSystem(be, {args.pole: uP}), g)[args.pole]
    worst = max((be.distance(moved.value(b), uQ.value(b)) for b in uQ.values), default=0.0)
    tol = 1e-8 if be.name == "matrix" else 1e-9
    changed = sum(Pf.paths[a] != Qf.paths[a] for a in Pf.paths)
    return {"pole": args.pole, "framesDiffer": changed, "gaugeIdentityDeviation": worst,
            "tolerance": tol}, worst <= tol


def cmd_connection_check(args):
    from .connection import (
        build_connection_system,
        build_covariant_system,
        check_system,
        connection_from_backend,
    )

    P, action = load_poset(args.poset)
    act = _action(P, action)
    be = _backend(P, action, args)
    res = {"backend": be.name, "letterCausalDefect": be.causal_defect(P)}
    system = build_covariant_system(P, act)
    cs = build_connection_system(be, system, P)
    rep = check_system(cs, P, fibre_cap=args.cap, tol=args.tol)
    res["system"] = rep
    u = connection_from_backend(be, P)
    res["inverseDefect"] = u.inverse_defect()
    ok = rep["ok"] and res["letterCausalDefect"] <= args.tol and res["inverseDefect"] <= args.tol
    return res, ok


def cmd_holonomy(args):
    P, action = load_poset(args.poset)
    w = _word(args.word, P)
    be = _backend(P, action, args)
    val = be.holonomy(w)
    if be.name == "weyl":
        out = be.element(val).to_json()
    else:
        out = {"re": np.round(val.real, 12).tolist(), "im": np.round(val.imag, 12).tolist()}
    return {"word": format_word(w), "backend": be.name, "value": out}, True


def cmd_certify(args):
    P, action = load_poset(args.poset)
    act = _action(P, action)
    if args.what == "causality":
        from .net import check_causality

        rep = check_causality(P, replay=args.replay, seed=args.seed)
        rep.pop("families", None)
        return rep, rep["ok"]
    if P.kind != "minkowski":
        raise InputError("field certificates need a Minkowski double-cone poset")
    field = field_config(args.field)
    from .simplex import Simplex1
    from .weyl import certify_nonflat, certify_nontrivial, free_field_connection

    f0, prof, fc = free_field_connection(act, field["mass"], field["amplitude"], field["config"])
    if args.what == "nontrivial":
        if args.simplex:
            b = Simplex1(*_word(args.simplex, P)[0].oriented)
            try:
                rep = certify_nontrivial(f0, b, prof)
            except ValueError as exc:
                raise InputError(str(exc)) from None
        else:
            b, rep = _first_nontrivial(P, f0, prof)
        zero = Simplex1(b.support, b.d1, b.d1)
        ctl = certify_nontrivial(f0, zero, prof)
        res = {"certificate": rep.to_json(), "control": ctl.to_json(),
               "controlVanishes": ctl.direct == 0.0 and ctl.factorized == 0.0,
               "converged": prof.convergence_ok()}
        return res, rep.ok and ctl.direct == 0.0 and prof.convergence_ok()
    supports = args.support.split(",") if args.support else None
    if supports:
        _require(P, *supports)
    wit = certify_nonflat(fc, supports, tol=args.tol)
    if wit is None:
        return {"witness": None, "message": "no witness found"}, False
    return {"witness": wit.to_json(), "tolerance": args.tol}, True


def _first_nontrivial(P, f0, prof):
    """First tangent simplex with distinct, translated faces.

    Spatial translations come first: for a purely timelike one the two
    routes reduce to the same radial integral and agree trivially.
    """
    from .simplex import enumerate_simplices, is_nerve
    from .weyl import certify_nontrivial

    def timelike(b):
        lo, hi = f0[b.d1].atoms, f0[b.d0].atoms
        return bool(lo and hi) and lo[0].center[1:] == hi[0].center[1:]

    cands = [b for b in enumerate_simplices(P, 1)[0]
             if b.d0 != b.d1 and not b.is_degenerate() and not is_nerve(P, b)]
    for b in sorted(cands, key=timelike):
        try:
            return b, certify_nontrivial(f0, b, prof)
        except ValueError:
            continue
    raise InputError("no simplex has translated faces")


def cmd_em_transform(args):
    from .weyl import HyperboloidProfile, em_transform
    from .cochain import build_invariant_0cochain

    P, action = load_poset(args.poset)
    field = field_config(args.field)
    _require(P, args.element)
    f0 = build_invariant_0cochain(_action(P, action), field["amplitude"])
    prof = HyperboloidProfile(field["mass"], field["config"])
    momenta = None
    if args.momenta:
        try:
            momenta = [[float(v) for v in m.split(",")] for m in args.momenta.split(";")]
        except ValueError:
            raise InputError("momenta are 'px,py,pz;px,py,pz;...'") from None
    p, E = em_transform(f0[args.element], prof, momenta)
    if args.csv:
        data = np.column_stack([p, E.real, E.imag])
        np.savetxt(args.csv, data, delimiter=",", header="px,py,pz,re,im", comments="",
                   fmt="%.17g")
    res = {"element": args.element, "points": len(p), "converged": prof.convergence_ok()}
    if len(p) <= 64:
        res["values"] = [[*map(float, q), float(e.real), float(e.imag)] for q, e in zip(p, E)]
    return res, prof.convergence_ok()


# --------------------------------------------------------------------- main


def build_parser():
    ap = argparse.ArgumentParser(prog="loopnet", description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub = ap.add_subparsers(dest="command", required=True)

    def backend_opts(p):
        p.add_argument("--backend", choices=("matrix", "weyl"), default="matrix")
        p.add_argument("--field", help="field.json for the weyl backend")
        p.add_argument("--components", help="comma separated disjoint elements (matrix backend)")
        p.add_argument("--dim", type=int, default=2)

    p = sub.add_parser("validate", help="check the poset axioms")
    p.add_argument("poset")
    p.set_defaults(run=cmd_validate)

    p = sub.add_parser("simplices", help="count (and list) singular simplices")
    p.add_argument("poset")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--cap", type=int, default=10000)
    p.add_argument("--list", action="store_true")
    p.set_defaults(run=cmd_simplices)

    p = sub.add_parser("word", help="free-group word operations")
    p.add_argument("op", choices=("reduce", "inverse", "is-path", "is-loop", "abelianize",
                                  "perp", "equal"))
    p.add_argument("word")
    p.add_argument("other", nargs="?")
    p.add_argument("--poset")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--width", type=int, default=20000)
    p.set_defaults(run=cmd_word)

    p = sub.add_parser("net", help="isotony, causality and covariance of the loop net")
    p.add_argument("poset")
    p.add_argument("--cap", type=int, default=0, help="loop length cap (0: size based)")
    p.add_argument("--replay", type=int, default=200)
    p.set_defaults(run=cmd_net)

    p = sub.add_parser("pathframe", help="path frame or covariant path-frame system")
    p.add_argument("poset")
    p.add_argument("--pole")
    p.set_defaults(run=cmd_pathframe)

    p = sub.add_parser("gauge-apply", help="frame change as a gauge transformation")
    p.add_argument("poset")
    p.add_argument("--pole", required=True)
    backend_opts(p)
    p.set_defaults(run=cmd_gauge_apply)

    p = sub.add_parser("connection-check", help="connection system axioms")
    p.add_argument("poset")
    p.add_argument("--cap", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-6)
    backend_opts(p)
    p.set_defaults(run=cmd_connection_check)

    p = sub.add_parser("holonomy", help="holonomy of a word")
    p.add_argument("poset")
    p.add_argument("word")
    backend_opts(p)
    p.set_defaults(run=cmd_holonomy)

    p = sub.add_parser("certify", help="nontrivial | nonflat | causality certificates")
    p.add_argument("what", choices=("nontrivial", "nonflat", "causality"))
    p.add_argument("poset")
    p.add_argument("field", nargs="?")
    p.add_argument("--simplex")
    p.add_argument("--support")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--replay", type=int, default=200)
    p.set_defaults(run=cmd_certify)

    p = sub.add_parser("em-transform", help="hyperboloid transform of an element's test function")
    p.add_argument("poset")
    p.add_argument("field", nargs="?")
    p.add_argument("--element", required=True)
    p.add_argument("--momenta")
    p.add_argument("--csv")
    p.set_defaults(run=cmd_em_transform)
    return ap


def _config_echo(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("run", "out")}
    cfg["threads"] = int(os.environ.get("LOOPNET_THREADS", "1"))
    cfg["defaults"] = LIBRARY_DEFAULTS
    if getattr(args, "field", None) or args.command in ("certify", "em-transform"):
        if args.command != "certify" or args.what != "causality":
            try:
                f = field_config(getattr(args, "field", None))
                cfg["fieldConfig"] = {"mass": f["mass"], "amplitude": f["amplitude"],
                                      "phaseTol": f["phaseTol"], **f["config"].to_json()}
            except InputError:
                pass
    return cfg


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=str) if isinstance(x, (set, frozenset)) else items
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, Fraction):
        return str(x)
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


def run(argv=None) -> tuple[int, dict]:
    args = build_parser().parse_args(argv)
    inputs = {}
    for key in ("poset", "field"):
        path = getattr(args, key, None)
        if path:
            try:
                inputs[key] = {"path": str(path), "sha256": digest(path)}
            except OSError as exc:
                err = {"type": "InputError", "message": f"cannot read {path}: {exc.strerror}"}
                return 1, {"schema": SCHEMA, "command": args.command, "status": "error",
                           "error": err}
    report = {"schema": SCHEMA, "command": args.command, "inputs": inputs}
    try:
        report["config"] = _config_echo(args)
        results, ok = args.run(args)
    except (InputError, LoopnetError, ValueError, KeyError) as exc:
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        return 1, _jsonable(report)
    report["results"] = results
    if ok is None:
        report["status"] = "unknown"
        code = 2
    else:
        report["status"] = "pass" if ok else "fail"
        code = 0 if ok else 1
    return code, _jsonable(report)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    code, report = run(argv)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    out = None
    for i, a in enumerate(argv):
        if a == "--out" and i + 1 < len(argv):
            out = argv[i + 1]
        elif a.startswith("--out="):
            out = a.split("=", 1)[1]
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
