"""Command-line entry point: ``lipfree <command> [options]``.

Exit codes: 0 ok, 1 usage or parse error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import io
from .errors import (
    ContradictionDiagnostic,
    LipfreeError,
    PreconditionError,
    ResolutionError,
    StructureError,
    VerificationError,
)
from .experiments import RNG_NAME, duality_suite, make_rng, zigzag_rows
from .free_space import decompose, norm, pairing
from .lip_func import lip_attaining_pair
from .metric_core import validate_metric
from .squareness import ZigzagFamily, molecule_filter, nonwasq_certificate, rung_zigzag
from .ssd2p import (
    anchored_interval,
    as_decomposition,
    build_instance,
    random_slice_point,
    random_y,
    refute,
)

log = logging.getLogger("lipfree")

COMMANDS = ("validate", "norm", "decompose", "lip", "zigzag", "ladder-nonwasq",
            "molecule-filter", "ssd2p-refute", "oracle-suite")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class ExperimentConfig:
    seed: int = 0
    tol: float = 1e-9
    out: Path | None = None
    params: dict = field(default_factory=dict)


def _stamp(report, cfg):
    report = dict(report)
    report["seed"] = cfg.seed
    report["rng"] = RNG_NAME
    report["timestamp"] = datetime.now(timezone.utc).isoformat()
    return report


def _emit(text, cfg):
    if cfg.out is not None:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _need(args, name):
    val = getattr(args, name)
    if val is None:
        raise UsageError(f"--{name.replace('_', '-')} is required")
    return val


def _parse_range(text):
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(t) for t in text.split(",")]


def cmd_validate(args, cfg):
    obj = io.read_json(_need(args, "space"))
    if "dist" in obj:
        D = np.array(obj["dist"], dtype=float)
        rep = validate_metric(D, tol=args.tol if args.tol is not None else 1e-12)
        if rep.ok:
            space, _ = io.space_from_json(obj, args.space)
    else:
        space, _ = io.space_from_json(obj, args.space)
        rep = validate_metric(space.dist)
    report = _stamp({"command": "validate", **rep.to_dict()}, cfg)
    if rep.ok and args.roundtrip:
        Path(args.roundtrip).write_text(io.dumps(io.space_to_json(space)))
    _emit(io.dumps(report), cfg)
    if not rep.ok:
        name, item = rep.first_violation()
        raise VerificationError(f"metric check failed: {name} {item}")


def cmd_norm(args, cfg):
    space, _ = io.load_space(_need(args, "space"))
    el = io.element_from_json(space, io.read_json(_need(args, "element")), args.element)
    cert = norm(space, el)
    report = _stamp({
        "value": cert.value,
        "flow": [[u, v, a] for u, v, a in cert.flow],
        "potentials": io.function_to_json(cert.potentials)["values"],
    }, cfg)
    _emit(io.dumps(report), cfg)
    gap = cert.value - pairing(cert.potentials, el)
    if gap > cfg.tol or cert.potentials.lip > 1 + cfg.tol:
        raise VerificationError(f"duality gap {gap!r} or lip {cert.potentials.lip!r} out of tolerance")


def cmd_decompose(args, cfg):
    space, _ = io.load_space(_need(args, "space"))
    el = io.element_from_json(space, io.read_json(_need(args, "element")), args.element)
    dec = decompose(space, el)
    err = el.max_abs_diff(dec.as_element())
    report = _stamp({**io.decomposition_to_json(dec), "total_weight": dec.total_weight,
                     "reconstruction_error": err}, cfg)
    _emit(io.dumps(report), cfg)
    if err > cfg.tol:
        raise VerificationError(f"reconstruction error {err!r}")


def cmd_lip(args, cfg):
    space, _ = io.load_space(_need(args, "space"))
    f = io.function_from_json(space, io.read_json(_need(args, "function")), args.function)
    lip, pair = lip_attaining_pair(space, f.values)
    _emit(io.dumps(_stamp({"lip": lip, "pair": list(pair) if pair else None}, cfg)), cfg)


def cmd_zigzag(args, cfg):
    obj = io.read_json(_need(args, "graph"))
    _, graph = io.space_from_json(obj, args.graph)
    if graph is None:
        raise UsageError("zigzag needs a graph space")
    geos = obj.get("geodesics")
    if not geos:
        raise UsageError(f"{args.graph}: missing 'geodesics' list of [u, v] or [u, v, path]")
    fam = ZigzagFamily(graph, [tuple(g) for g in geos])
    rows = zigzag_rows(fam, _parse_range(args.k))
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "norm_mu", "norm_y_plus", "norm_y_minus", "max_test_pairing"])
    for r in rows:
        w.writerow([r["k"]] + [repr(float(r[c])) for c in
                               ("norm_mu", "norm_y_plus", "norm_y_minus", "max_test_pairing")])
    _emit(buf.getvalue(), cfg)
    for r in rows:
        if abs(r["norm_mu"] - 1) > cfg.tol or max(r["norm_y_plus"], r["norm_y_minus"]) > 1 + cfg.tol:
            raise VerificationError(f"zigzag level k={r['k']} violates ||mu_k|| = 1 or ||y +- mu_k|| <= 1")


def cmd_ladder_nonwasq(args, cfg):
    rep = nonwasq_certificate(n_strips=args.levels, k=args.k)
    _emit(io.dumps(_stamp(rep.to_dict(), cfg)), cfg)
    if rep.lip > 3 + cfg.tol:
        raise VerificationError(f"glued functional has lip {rep.lip!r} > 3")
    bad = [r["i"] for r in rep.rows if not r["holds"]]
    if bad:
        raise VerificationError(f"pairing bound fails for strips {bad}")


def cmd_molecule_filter(args, cfg):
    space, _ = io.load_space(_need(args, "space"))
    eps = _need(args, "eps")
    if args.element is not None:
        mu = io.element_from_json(space, io.read_json(args.element), args.element)
    elif args.rung_height is not None:
        mu, _ = rung_zigzag(space, args.rung_height, args.k)
    else:
        raise UsageError("molecule-filter needs --element or --rung-height")
    res = molecule_filter(space, mu, eps)
    report = {"window_delta": res.delta, "window_eps": eps, "distance": res.distance,
              "j_mass": res.j_mass, "split_mismatch": res.split_mismatch,
              "norms": res.norms, **io.decomposition_to_json(res.nu)}
    _emit(io.dumps(_stamp(report, cfg)), cfg)


def cmd_ssd2p_refute(args, cfg):
    d_param = args.d
    eps = args.eps if args.eps is not None else d_param / 8
    rng = make_rng(cfg.seed)
    if args.space is not None:
        space, _ = io.load_space(args.space)
        if not args.anchors:
            raise UsageError("--anchors is required with --space")
        anchors = [int(a) for a in args.anchors.split(",")]
    else:
        space, anchors = anchored_interval(args.n, eps)
    inst = build_instance(space, anchors, d_param, eps)
    if args.y is not None:
        obj = io.read_json(args.y)
        y = (io.decomposition_from_json(space, obj, args.y) if "terms" in obj
             else io.element_from_json(space, obj, args.y))
        y = as_decomposition(space, y)
    else:
        y = random_y(space, rng, eps=eps)
    if args.x is not None:
        xs_obj = io.read_json(args.x)
        xs = [io.element_from_json(space, o, args.x) for o in xs_obj]
    else:
        xs = [random_slice_point(space, inst, i, rng) for i in range(inst.n)]
    rep = refute(space, inst, y, xs)
    report = {"d": d_param, "eps": eps, "n": inst.n, "R": inst.R, "r": inst.r,
              "anchors": inst.anchors, **rep.to_dict()}
    _emit(io.dumps(_stamp(report, cfg)), cfg)
    failed = [k for k, v in rep.checks.items() if not v]
    if failed:
        raise VerificationError(f"refutation check failed: {failed[0]}")


def cmd_oracle_suite(args, cfg):
    rep = duality_suite(count=args.count, seed=cfg.seed)
    _emit(io.dumps(_stamp(rep, cfg)), cfg)
    if not rep["ok"]:
        raise VerificationError(f"duality suite failed: {rep['worst']}")


HANDLERS = {
    "validate": cmd_validate, "norm": cmd_norm, "decompose": cmd_decompose, "lip": cmd_lip,
    "zigzag": cmd_zigzag, "ladder-nonwasq": cmd_ladder_nonwasq,
    "molecule-filter": cmd_molecule_filter, "ssd2p-refute": cmd_ssd2p_refute,
    "oracle-suite": cmd_oracle_suite,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space")
    common.add_argument("--element")
    common.add_argument("--function")
    common.add_argument("--out")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float)

    p = _Parser(prog="lipfree", description="Lipschitz-free space verification toolkit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sp = sub.add_parser("validate", parents=[common])
    sp.add_argument("--roundtrip", help="write the parsed space back as a matrix JSON")
    sub.add_parser("norm", parents=[common])
    sub.add_parser("decompose", parents=[common])
    sub.add_parser("lip", parents=[common])
    sp = sub.add_parser("zigzag", parents=[common])
    sp.add_argument("--graph")
    sp.add_argument("--k", default="1..10")
    sp = sub.add_parser("ladder-nonwasq", parents=[common])
    sp.add_argument("--levels", type=int, default=5)
    sp.add_argument("--k", type=int, default=3)
    sp = sub.add_parser("molecule-filter", parents=[common])
    sp.add_argument("--eps", type=float)
    sp.add_argument("--rung-height", type=float)
    sp.add_argument("--k", type=int, default=4)
    sp = sub.add_parser("ssd2p-refute", parents=[common])
    sp.add_argument("--anchors")
    sp.add_argument("--n", type=int, default=32)
    sp.add_argument("--d", type=float, default=1.0)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--y")
    sp.add_argument("--x", help="JSON list of elements, one per slice")
    sp = sub.add_parser("oracle-suite", parents=[common])
    sp.add_argument("--count", type=int, default=100)
    return p


def run(argv=None):
    """Parse ``argv`` and run one command; returns the exit status."""
    logging.basicConfig(level=os.environ.get("LIPFREE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError(f"choose a command: {', '.join(COMMANDS)}")
        cfg = ExperimentConfig(seed=args.seed, out=args.out,
                               tol=args.tol if args.tol is not None else 1e-9)
        log.info("running %s with seed %d", args.command, cfg.seed)
        HANDLERS[args.command](args, cfg)
        return 0
    except (UsageError, io.ParseError, StructureError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (VerificationError, PreconditionError, ContradictionDiagnostic, ResolutionError) as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return 2
    except LipfreeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())
