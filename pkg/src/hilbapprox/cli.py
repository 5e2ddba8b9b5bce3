"""Command-line entry point ``hilbapprox``.

Subcommands: ``fit``, ``eval``, ``cover``, ``op-fit`` and ``demo``. Exit codes:
0 success, 1 pipeline failure (for instance an unattainable epsilon), 2 usage,
3 budget violation under ``--strict``, 4 I/O.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import assemble, operator
from .config import FitConfig
from .cover import SampleSet, greedy_net
from .demos import (DEFAULT_BOXES, OPERATOR_BOX, PHI, FamilySpec, blur_operator, generate,
                    integral_functional, tomography_functional)
from .errors import ApproxError, UsageError

log = logging.getLogger("hilbapprox")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET, EXIT_IO = 0, 1, 2, 3, 4

FUNCTIONALS = sorted(PHI) + ["tomo"]
OPERATORS = ["blur"]
DEMO_DEFAULTS = {"integral": 0.1, "tomo": 0.01, "image": 0.15}


class IOFailure(Exception):
    pass


# --- handles rebuilt from model metadata ------------------------------------

def make_functional(spec: dict, grid):
    name = spec["name"]
    if name in PHI:
        return integral_functional(name)
    if name == "tomo":
        return tomography_functional(grid, spec.get("angles", 4), spec.get("bins", 16))[0]
    raise UsageError(f"unknown functional {name!r}; choose from {FUNCTIONALS}")


def make_operator(spec: dict):
    if spec["name"] == "blur":
        return blur_operator(float(spec.get("sigma", 1.5)))
    raise UsageError(f"unknown operator {spec['name']!r}; choose from {OPERATORS}")


def _family(kind, seed, counts, m, box, n) -> FamilySpec:
    return FamilySpec(kind, tuple(counts), seed, n, m, box)


def _family_dict(spec: FamilySpec) -> dict:
    return {"kind": spec.kind, "seed": spec.seed, "counts": list(spec.counts), "n": spec.n,
            "m": spec.m, "box": {k: list(v) for k, v in spec.box.items()}}


def _config(args) -> FitConfig:
    return FitConfig(pair_budget=args.pair_budget, reg=args.reg, r_max=args.r_max,
                     identity_terms=not args.no_identity)


# --- file helpers -----------------------------------------------------------

def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc


def _write_text(path, text):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def _load_samples(path, label=""):
    d = _read_json(path)
    try:
        return SampleSet.from_dict(d, label), d.get("f_values")
    except (KeyError, TypeError) as exc:
        raise IOFailure(f"malformed sample file {path}: {exc}") from exc


def _save_samples(path, samples, f_values=None):
    d = samples.to_dict()
    if f_values is not None:
        d["f_values"] = [float(v) for v in f_values]
    _write_text(path, json.dumps(d))


def _save_model(path, model):
    _write_text(path, assemble.dumps(model))


def _load_model(path):
    try:
        return assemble.load_model(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise IOFailure(f"cannot read model {path}: {exc}") from exc
    except (KeyError, TypeError) as exc:
        raise IOFailure(f"malformed model file {path}: {exc}") from exc


# --- budget checks ----------------------------------------------------------

def functional_violations(g) -> list:
    md, s = g.metadata, g.metadata["stage_residuals"]
    out = []
    if s["end_to_end_max_error_val"] >= md["epsilon"]:
        out.append(f"end-to-end val error {s['end_to_end_max_error_val']:.3g} >= "
                   f"epsilon {md['epsilon']:.3g}")
    if not md["target_met"]:
        out.append("ridge stage missed its eps/3 target")
    if md["val_covered"] == 0:
        out.append("no validation point is covered by the net")
    bound = s["interpolation_max_error_val"] + s["ridge_max_residual_val"] + 1e-8
    if s["end_to_end_max_error_val"] > bound:
        out.append("triangle budget violated on validation points")
    return out


def operator_violations(g) -> list:
    md, s = g.metadata, g.metadata["stage_residuals"]
    out = []
    if s["end_to_end_max_error_val"] >= md["epsilon"]:
        out.append(f"end-to-end val Y-error {s['end_to_end_max_error_val']:.3g} >= "
                   f"epsilon {md['epsilon']:.3g}")
    if md["val_covered"] == 0:
        out.append("no validation point is covered at every stage")
    bound = s["range_pou_max_residual_val"] + sum(s["coordinate_max_error_val"]) + 1e-8
    if s["end_to_end_max_error_val"] > bound:
        out.append("triangle budget violated on validation points")
    return out


def _check(violations, strict) -> int:
    for v in violations:
        log.warning("budget: %s", v)
    return EXIT_BUDGET if strict and violations else EXIT_OK


# --- reports ----------------------------------------------------------------

def operator_report(f, g, test) -> dict:
    rep = operator.sup_error(f, g, test)
    w = g.range_grid.weight
    rep["f"] = np.sqrt(w * np.sum(rep["outputs"] ** 2, axis=1))
    rep["g"] = np.sqrt(w * np.sum(rep["approx"] ** 2, axis=1))
    return rep


def _test_report(model, test, f_values=None) -> dict:
    md = model.metadata
    if isinstance(model, operator.FiniteRankOperator):
        if "operator" not in md:
            raise UsageError("model metadata does not name its operator")
        return operator_report(make_operator(md["operator"]), model, test)
    if f_values is None and "functional" not in md:
        raise UsageError("test file has no f_values and the model does not name its functional")
    f = make_functional(md["functional"], test.grid) if "functional" in md else None
    return assemble.sup_error(f, model, test, f_values)


def _summary(model, rep) -> dict:
    md = model.metadata
    return {"stage_residuals": md["stage_residuals"],
            "end_to_end_max_error": rep["max_error"],
            "mean_error": rep["mean_error"],
            "uncovered_count": rep["uncovered_count"],
            "covered_count": rep["covered_count"],
            "r": md["r"],
            "d": md.get("dim", md.get("range_dim")),
            "net_size": md.get("net_size", md.get("range_net_size"))}


# --- builders shared by fit / op-fit / demo ---------------------------------

def fit_functional(kind, name, epsilon, seed, counts=(400, 200, 200), m=None, box=None,
                   config=None, angles=4, bins=16):
    n = 1 if name == "tomo" else 2
    if name == "tomo" and kind != "image_phantom":
        raise UsageError("the tomography functional needs the image_phantom family")
    if name in PHI and kind == "image_phantom":
        raise UsageError("integral functionals need a 1-D family")
    spec = _family(kind, seed, counts, m, box, n)
    train, val, test = generate(spec)
    fspec = {"name": name}
    if name == "tomo":
        fspec.update(angles=angles, bins=bins)
    f = make_functional(fspec, spec.grid)
    g = assemble.build_approximant(f, train, val, epsilon, config, seed)
    g.metadata.update(functional=fspec, family=_family_dict(spec))
    return g, f, (train, val, test)


def fit_operator(kind, name, epsilon, seed, counts=(400, 200, 200), m=None, box=None,
                 config=None, sigma=1.5):
    if kind != "image_phantom":
        raise UsageError("image-to-image operators need the image_phantom family")
    spec = _family(kind, seed, counts, m, box, 1)
    train, val, test = generate(spec)
    ospec = {"name": name, "sigma": sigma}
    f = make_operator(ospec)
    g = operator.build_operator(f, train, val, epsilon, config, seed)
    g.metadata.update(operator=ospec, family=_family_dict(spec))
    return g, f, (train, val, test)


def _box(text):
    if text is None:
        return None
    try:
        box = json.loads(text)
        return {k: (float(v[0]), float(v[1])) for k, v in box.items()}
    except (ValueError, TypeError, IndexError, AttributeError) as exc:
        raise UsageError(f"--box must be a JSON object of [lo, hi] pairs: {exc}") from exc


# --- subcommands ------------------------------------------------------------

def cmd_fit(args) -> int:
    g, _, sets = fit_functional(args.family, args.functional, args.epsilon, args.seed,
                                args.counts, args.m, _box(args.box), _config(args),
                                args.angles, args.bins)
    _save_model(args.out, g)
    if args.samples_dir:
        _write_sets(args.samples_dir, sets)
    print(json.dumps({k: g.metadata[k] for k in
                      ("epsilon", "delta", "net_size", "dim", "r", "target_met",
                       "val_uncovered", "stage_residuals")}, indent=2))
    return _check(functional_violations(g), args.strict)


def cmd_op_fit(args) -> int:
    box = _box(args.box)
    if box is None:
        box = dict(OPERATOR_BOX)
    g, _, sets = fit_operator(args.family, args.operator, args.epsilon, args.seed,
                              args.counts, args.m, box, _config(args), args.sigma)
    _save_model(args.out, g)
    if args.samples_dir:
        _write_sets(args.samples_dir, sets)
    print(json.dumps({k: g.metadata[k] for k in
                      ("epsilon", "range_net_size", "range_dim", "r", "val_uncovered",
                       "stage_residuals")}, indent=2))
    return _check(operator_violations(g), args.strict)


def cmd_eval(args) -> int:
    model = _load_model(args.model)
    test, f_values = _load_samples(args.test, "test")
    rep = _test_report(model, test, f_values)
    try:
        assemble.write_report(rep, args.report)
    except OSError as exc:
        raise IOFailure(f"cannot write {args.report}: {exc}") from exc
    print(json.dumps({"max_error": rep["max_error"], "mean_error": rep["mean_error"],
                      "covered_count": rep["covered_count"],
                      "uncovered_count": rep["uncovered_count"]}, indent=2))
    return EXIT_OK


def cmd_cover(args) -> int:
    samples, _ = _load_samples(args.samples)
    net = greedy_net(samples, args.radius)
    print(json.dumps({"net_size": len(net), "radius": net.radius,
                      "max_residual": float(net.cover_distances.max())}))
    return EXIT_OK


def _write_sets(outdir, sets, f=None):
    try:
        os.makedirs(outdir, exist_ok=True)
    except OSError as exc:
        raise IOFailure(f"cannot create {outdir}: {exc}") from exc
    for s in sets:
        _save_samples(os.path.join(outdir, f"{s.label}.json"), s)


def run_demo(which, epsilon, seed, outdir, config=None) -> dict:
    """Fit one canonical demo, write its artifacts into ``outdir`` and return the summary."""
    if which == "integral":
        g, f, sets = fit_functional("fourier_band", "product", epsilon, seed, config=config)
    elif which == "tomo":
        g, f, sets = fit_functional("image_phantom", "tomo", epsilon, seed, config=config)
    elif which == "image":
        g, f, sets = fit_operator("image_phantom", "blur", epsilon, seed,
                                  box=dict(OPERATOR_BOX), config=config)
    else:
        raise UsageError(f"unknown demo {which!r}")
    _write_sets(outdir, sets)
    _save_model(os.path.join(outdir, "model.json"), g)
    rep = _test_report(g, sets[2])
    try:
        assemble.write_report(rep, os.path.join(outdir, "report.csv"))
    except OSError as exc:
        raise IOFailure(f"cannot write report: {exc}") from exc
    summary = _summary(g, rep)
    summary.update(demo=which, epsilon=epsilon, seed=seed)
    _write_text(os.path.join(outdir, "summary.json"), json.dumps(summary, indent=2))
    return summary


def cmd_demo(args) -> int:
    eps = args.epsilon if args.epsilon is not None else DEMO_DEFAULTS[args.which]
    summary = run_demo(args.which, eps, args.seed, args.outdir, _config(args))
    print(json.dumps(summary, indent=2))
    model = _load_model(os.path.join(args.outdir, "model.json"))
    check = operator_violations if args.which == "image" else functional_violations
    return _check(check(model), args.strict)


# --- parser -----------------------------------------------------------------

def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _add_fit_options(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when a stage budget is violated")
    p.add_argument("--pair-budget", type=int, default=FitConfig.pair_budget)
    p.add_argument("--reg", type=float, default=FitConfig.reg)
    p.add_argument("--r-max", type=int, default=FitConfig.r_max)
    p.add_argument("--no-identity", action="store_true",
                   help="drop the identity ridge terms")


def _add_family_options(p):
    p.add_argument("--counts", type=int, nargs=3, default=[400, 200, 200],
                   metavar=("TRAIN", "VAL", "TEST"))
    p.add_argument("--m", type=int, default=None, help="grid points per axis")
    p.add_argument("--box", default=None,
                   help='JSON parameter box overrides, e.g. \'{"a1": [-0.4, 0.4]}\'')
    p.add_argument("--samples-dir", default=None,
                   help="also write train/val/test sample files here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hilbapprox", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a scalar functional on a generated family")
    p.add_argument("--family", choices=sorted(DEFAULT_BOXES), required=True)
    p.add_argument("--functional", choices=FUNCTIONALS, required=True)
    p.add_argument("--epsilon", type=_positive, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--angles", type=int, default=4)
    p.add_argument("--bins", type=int, default=16)
    _add_fit_options(p)
    _add_family_options(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="evaluate a saved model on a sample file")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cover", help="greedy net statistics of a sample file")
    p.add_argument("--samples", required=True)
    p.add_argument("--radius", type=_positive, required=True)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("op-fit", help="fit a finite-rank image-to-image operator")
    p.add_argument("--family", choices=["image_phantom"], default="image_phantom")
    p.add_argument("--operator", choices=OPERATORS, default="blur")
    p.add_argument("--sigma", type=_positive, default=1.5, help="blur width in cells")
    p.add_argument("--epsilon", type=_positive, required=True)
    p.add_argument("--out", required=True)
    _add_fit_options(p)
    _add_family_options(p)
    p.set_defaults(func=cmd_op_fit)

    p = sub.add_parser("demo", help="run a canonical experiment end to end")
    p.add_argument("which", choices=sorted(DEMO_DEFAULTS))
    p.add_argument("--epsilon", type=_positive, default=None,
                   help="defaults: integral 0.1, tomo 0.01, image 0.15")
    p.add_argument("--outdir", required=True)
    _add_fit_options(p)
    p.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ApproxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
