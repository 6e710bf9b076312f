"""Command-line front end.

Subcommands: fox, identities, goldman, lambda-check, monodromy, kawai.
Exit codes: 0 success, 2 tolerance failure (report still emitted), 1 input
error.  All reports embed the resolved tolerance set and the version.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .cocycles import CocycleNotParabolicError, verify_cocycle
from .goldman import goldman_closed, goldman_orbifold
from .monodromy import IntegrationError, OrderingError
from .schwarzian import (check_identities, exp_provider, moebius_provider,
                         poly_provider, solve_lambda_report)
from .serialize import (cocycle_in, complex_in, complex_out, dumps_deterministic,
                        moebius_in, representation_in, representation_out,
                        signature_in, sphere_in, sphere_out)
from .sl2 import MoebiusMap, QuadPoly
from .words import fox_derivative, parse_word, verify_presentation_identities


class InputError(ValueError):
    pass


def _load_json(args) -> dict:
    if getattr(args, "input", None):
        try:
            with open(args.input) as fh:
                return json.load(fh)
        except OSError as e:
            raise InputError(f"cannot read {args.input}: {e}")
        except json.JSONDecodeError as e:
            raise InputError(f"malformed JSON in {args.input}: {e}")
    if getattr(args, "json", None):
        try:
            return json.loads(args.json)
        except json.JSONDecodeError as e:
            raise InputError(f"malformed inline JSON: {e}")
    raise InputError("provide --input FILE or --json TEXT")


def _parse_sig(text: str):
    try:
        return signature_in(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise InputError(f"bad signature: {e}")


def _tolerances(args, defaults: dict) -> dict:
    tols = dict(defaults)
    for item in getattr(args, "tol", None) or []:
        if "=" not in item:
            raise InputError(f"--tol expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        if k not in tols:
            raise InputError(f"unknown tolerance {k!r}; known: {sorted(tols)}")
        tols[k] = float(v)
    return tols


def _emit(report: dict, args, code: int) -> int:
    report["version"] = __version__
    text = dumps_deterministic(report)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return code


def _cmd_fox(args) -> int:
    sig = _parse_sig(args.sig)
    if args.gen not in sig.generators:
        raise InputError(f"unknown generator {args.gen!r} for signature {sig}")
    word = parse_word(args.word, sig) if args.word != "R" else None
    if word is None:
        from .words import relator
        word = relator(sig)
    deriv = fox_derivative(word, args.gen)
    report = {
        "config": {"sig": args.sig, "word": args.word, "gen": args.gen},
        "tolerances": {},
        "word": str(word),
        "derivative": [{"coeff": c, "word": str(w)} for w, c in deriv.sorted_terms(sig)],
    }
    return _emit(report, args, 0)


def _cmd_identities(args) -> int:
    sig = _parse_sig(args.sig)
    rep = verify_presentation_identities(sig)
    report = {"config": {"sig": args.sig}, "tolerances": {}, **rep.as_dict()}
    return _emit(report, args, 0 if rep.all_pass else 2)


def _cmd_goldman(args) -> int:
    bundle = _load_json(args)
    tols = _tolerances(args, {"local": 1e-6})
    try:
        rho = representation_in(bundle["representation"])
        chi1 = cocycle_in(bundle["cocycle1"], rho)
        chi2 = cocycle_in(bundle["cocycle2"], rho)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"bad goldman bundle: {e}")
    report: dict = {
        "config": {"signature": bundle["representation"]["signature"]},
        "tolerances": tols,
        "representation_relator_residual": rho.relator_residual(),
    }
    code = 0
    try:
        if rho.signature.num_marked == 0:
            value = goldman_closed(rho, chi1, chi2)
            report.update({"value": complex_out(value), "residuals": {
                "chi1_relator": verify_cocycle(rho, chi1).relator_residual,
                "chi2_relator": verify_cocycle(rho, chi2).relator_residual,
            }, "p2_list": {}})
        else:
            pairing = goldman_orbifold(rho, chi1, chi2, local_tol=tols["local"])
            d = pairing.as_dict()
            report.update({"value": d["value"], "residuals": {
                "chi1_relator": pairing.relator_residuals[0],
                "chi2_relator": pairing.relator_residuals[1],
                "local": d["local_residuals"],
            }, "p2_list": d["p2_list"]})
    except CocycleNotParabolicError as e:
        report["error"] = str(e)
        code = 2
    return _emit(report, args, code)


_F_KINDS = {"exp": lambda cfg: exp_provider(complex_in(cfg.get("scale", 1.0))),
            "poly": lambda cfg: poly_provider([complex_in(c) for c in cfg["coeffs"]]),
            "moebius": lambda cfg: moebius_provider(moebius_in(cfg["matrix"]))}


def _cmd_lambda_check(args) -> int:
    cfg = _load_json(args) if (args.input or args.json) else {}
    tols = _tolerances(args, {"identity": 1e-8, "solver": 1e-8})
    f_cfg = cfg.get("f", {"kind": "exp"})
    if f_cfg.get("kind") not in _F_KINDS:
        raise InputError(f"unknown f kind {f_cfg.get('kind')!r}")
    f = _F_KINDS[f_cfg["kind"]](f_cfg)
    gamma = moebius_in(cfg["gamma"]) if "gamma" in cfg else MoebiusMap(1, 1, 1, 2)
    P = QuadPoly(*(complex_in(c) for c in cfg.get("P", [1, 0.5, -0.25])))
    samples = [complex_in(z) for z in cfg.get("samples",
               [[0.1, 0.2], [0.4, -0.3], [-0.2, 0.5], [0.7, 0.1]])]
    order = int(cfg.get("order", 8))
    residuals = check_identities(f, P, gamma, samples, order=order,
                                 seed=int(cfg.get("seed", 7)))
    solve = solve_lambda_report(f, lambda z: 6.0 + 0j, complex(0), complex(0.8, 0.3),
                                (0, 0, 0))
    residuals["lambda4_solver"] = solve.residual
    worst = max(residuals.values())
    report = {"config": cfg, "tolerances": tols, "residuals": residuals,
              "max_residual": worst}
    return _emit(report, args, 0 if worst <= max(tols.values()) else 2)


def _cmd_monodromy(args) -> int:
    cfg = _load_json(args)
    tols = _tolerances(args, {"trace": 1e-6, "relation": 1e-5, "wronskian": 1e-9})
    try:
        data = sphere_in(cfg)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"bad sphere data: {e}")
    from .monodromy import MonodromyEngine
    engine = MonodromyEngine(data, rtol=float(cfg.get("rtol", 1e-12)))
    code = 0
    report: dict = {"config": sphere_out(data), "tolerances": tols}
    try:
        rho = engine.representation(relation_tol=tols["relation"])
    except OrderingError as e:
        report["error"] = str(e)
        return _emit(report, args, 2)
    traces = rho.trace_residuals()
    wdrift = engine.max_wronskian_drift()
    report.update({
        "representation": representation_out(rho),
        "lasso_order": [str(t) for t in engine.order],
        "relation_residual": rho.relator_residual(),
        "trace_residuals": traces,
        "wronskian_drift": wdrift,
    })
    if max(traces.values()) > tols["trace"] or wdrift > tols["wronskian"]:
        code = 2
    return _emit(report, args, code)


def _cmd_kawai(args) -> int:
    cfg = _load_json(args)
    tols = _tolerances(args, {"antisymmetry": 1e-8, "relation": 1e-5})
    from .kawai import AccessoryDirection, GridOffset, PointDirection, kawai_experiment
    try:
        base = sphere_in(cfg["sphere"])
        t_dirs = [PointDirection(tuple(complex_in(v) for v in d["velocities"]))
                  for d in cfg.get("t_directions", [])]
        acc = None
        if "accessory_directions" in cfg:
            acc = [AccessoryDirection(int(d["index"]), complex_in(d.get("scale", 1.0)))
                   for d in cfg["accessory_directions"]]
        grid = [GridOffset(tuple(complex_in(v) for v in g.get("t", [])),
                           tuple(complex_in(v) for v in g.get("c", [])))
                for g in cfg.get("grid", [{}])]
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"bad kawai config: {e}")
    try:
        rep = kawai_experiment(base, t_dirs, h=float(cfg.get("h", 1e-3)), grid=grid,
                               accessory_directions=acc,
                               rtol=float(cfg.get("rtol", 1e-12)),
                               relation_tol=tols["relation"])
    except (OrderingError, IntegrationError, CocycleNotParabolicError) as e:
        return _emit({"config": cfg, "tolerances": tols, "error": str(e)}, args, 2)
    report = {"config": cfg, "tolerances": tols, **rep.as_dict()}
    ok = rep.max_antisymmetry_defect <= tols["antisymmetry"] * max(rep.scale, 1e-30)
    return _emit(report, args, 0 if ok else 2)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="charvar", description=__doc__)
    ap.add_argument("--version", action="version", version=f"charvar {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="also write the JSON report to this path")
        p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                       help="override a tolerance (repeatable)")

    p = sub.add_parser("fox", help="Fox derivative of a word")
    p.add_argument("--sig", required=True, help='signature JSON, e.g. {"g":2,"elliptic":[],"cusps":0}')
    p.add_argument("--word", required=True, help='word text, or "R" for the relator')
    p.add_argument("--gen", required=True)
    common(p)
    p.set_defaults(func=_cmd_fox)

    p = sub.add_parser("identities", help="exact presentation-identity suite")
    p.add_argument("--sig", required=True)
    common(p)
    p.set_defaults(func=_cmd_identities)

    for name, fn, desc in (
            ("goldman", _cmd_goldman, "Goldman pairing of a cocycle bundle"),
            ("lambda-check", _cmd_lambda_check, "Lambda/B identity residual table"),
            ("monodromy", _cmd_monodromy, "lasso monodromy representation"),
            ("kawai", _cmd_kawai, "pullback experiment over a (t,c) grid")):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--input", "--config", dest="input", help="path to JSON input")
        p.add_argument("--json", help="inline JSON input")
        common(p)
        p.set_defaults(func=fn)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(dumps_deterministic({"error": str(e), "version": __version__}))
        return 1
    except (OSError, ValueError) as e:
        print(dumps_deterministic({"error": str(e), "version": __version__}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
