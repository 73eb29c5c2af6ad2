"""Command-line interface: ``entmap {measure,map,find-discordant,trajectory,verify-axioms}``.

Exit codes: 0 success, 1 property violation, 2 usage, configuration or data error.
Set ``ENTMAP_LOG`` (e.g. ``DEBUG``, ``INFO``) to control log verbosity.
"""

import argparse
import json
import logging
import os
import sys

from . import __version__, report
from .axioms import SuiteConfig, broken_measure, default_measures, verify_axioms
from .errors import EntmapError, ParseError, ValidationError
from .locc import trajectory
from .measures import NEGATIVITY_CONVENTION, MeasureId, REEOptions, evaluate, is_applicable
from .ordering import Ensemble, evaluate_ensemble, find_discordant, state_from_fingerprint
from .states import bell, load_state, random_mixed, tiles_upb_state, werner

log = logging.getLogger("entmap")


class ConfigError(Exception):
    pass


def _configure_logging():
    level = os.environ.get("ENTMAP_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, None) if not level.isdigit() else int(level),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _dims(text):
    try:
        da, db = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected dA,dB, got {text!r}")
    if da < 1 or db < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return (da, db)


def _rank(text):
    if text in ("full", "none", ""):
        return None
    try:
        if "-" in text:
            lo, hi = (int(x) for x in text.split("-"))
            if not 1 <= lo <= hi:
                raise ValueError
            return (lo, hi)
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"rank must be K, LO-HI or 'full', got {text!r}")


def _measure_list(text):
    try:
        return [MeasureId.parse(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _measure_pair(text):
    ids = _measure_list(text)
    if len(ids) != 2:
        raise argparse.ArgumentTypeError(f"expected two measures A,B, got {text!r}")
    return ids


PPT_TOL = 1e-10


def _run_config(args):
    # output paths are not part of the run configuration
    skip = {"func", "inject_broken_measure", "out", "svg", "csv", "json"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, (list, tuple)):
            value = [v.value if isinstance(v, MeasureId) else v for v in value]
        elif isinstance(value, MeasureId):
            value = value.value
        out[key] = value
    return out


def _ree_options(args):
    return REEOptions(restarts=args.ree_restarts, seed=args.seed if hasattr(args, "seed") else 0)


def _ensemble(args):
    if args.count < 0:
        raise ConfigError(f"--count must be non-negative, got {args.count}")
    rank = args.rank
    d = args.dims[0] * args.dims[1]
    if rank is not None:
        hi = rank if isinstance(rank, int) else rank[1]
        if not 1 <= hi <= d:
            raise ConfigError(f"--rank must lie in 1..{d}")
    return Ensemble(dims=args.dims, kind=args.kind, rank=rank, count=args.count, seed=args.seed)


# --------------------------------------------------------------------------- #
# Commands
# --------------------------------------------------------------------------- #

def cmd_measure(args):
    try:
        state = load_state(args.state)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.report.as_dict() if exc.report else {}, indent=1), file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ids = args.measures or [m for m in MeasureId if is_applicable(m, state)]
    ree = _ree_options(args)
    rows = []
    for m in ids:
        if not is_applicable(m, state):
            print(f"error: {m.value} is not applicable to this state (dims {state.dims})", file=sys.stderr)
            return 2
        mv = evaluate(m, state, ree)
        note = ""
        if m in (MeasureId.NEGATIVITY, MeasureId.LOG_NEGATIVITY) and mv.value <= PPT_TOL:
            note = "PPT"
        elif mv.diagnostics.get("support_mismatch", 0.0) > 1e-9:
            note = "support mismatch"
        rows.append((m.value, mv.value, mv.bound_kind.value, note))
    print(f"# {NEGATIVITY_CONVENTION}")
    print(f"{'measure':<8} {'value':>22}  {'bound':<10} note")
    for name, value, bound, note in rows:
        print(f"{name:<8} {report.fmt(value):>22}  {bound:<10} {note}".rstrip())
    if args.json:
        payload = {"state": str(args.state), "dims": list(state.dims),
                   "results": [{"measure": n, "value": v, "bound_kind": b, "note": t} for n, v, b, t in rows]}
        report.write_json(args.json, _run_config(args), payload)
    return 0


def cmd_map(args):
    ensemble = _ensemble(args)
    id_a, id_b = args.measures
    values = evaluate_ensemble(ensemble, (id_a, id_b), workers=args.workers, ree_options=_ree_options(args))
    config = _run_config(args)
    report.write_csv(args.out, config, ["index", "eA", "eB"],
                     [(i, float(a), float(b)) for i, (a, b) in enumerate(values)])
    if args.svg:
        from .plotting import map_figure, save_svg

        fig = map_figure(values[:, 0], values[:, 1], id_a.value, id_b.value,
                         title=f"{ensemble.kind} {ensemble.dims[0]}x{ensemble.dims[1]}, n={ensemble.count}, seed={ensemble.seed}")
        save_svg(fig, args.svg)
    print(f"wrote {ensemble.count} points to {args.out}")
    return 0


def cmd_find_discordant(args):
    ensemble = _ensemble(args)
    if ensemble.count < 2:
        raise ConfigError("--count must be at least 2")
    id_a, id_b = args.measures
    ree = _ree_options(args)
    result = find_discordant(ensemble, id_a, id_b, tol=args.tol, workers=args.workers, ree_options=ree)
    payload = result.as_dict()
    if args.recheck_er:
        rechecks = []
        er = MeasureId.RELATIVE_ENTROPY_OF_ENTANGLEMENT
        for rec in [r for r in result.records if r.robust][: args.recheck_er]:
            v1 = evaluate(er, state_from_fingerprint(rec.first), ree).value
            v2 = evaluate(er, state_from_fingerprint(rec.second), ree).value
            rechecks.append({"pair_index": rec.pair_index, "Er_first": v1, "Er_second": v2})
        payload["er_rechecks"] = rechecks
    report.write_json(args.out, _run_config(args), payload)
    if args.csv:
        report.write_csv(args.csv, _run_config(args), ["index", "eA", "eB"],
                         [(i, float(a), float(b)) for i, (a, b) in enumerate(result.values)])
    s = result.stats
    tau = "nan" if s["kendall_tau"] is None else report.fmt(s["kendall_tau"])
    print(f"pairs_checked={s['pairs_checked']} discordant={s['discordant']} "
          f"discordant_fraction={report.fmt(s['discordant_fraction'])} kendall_tau={tau} "
          f"robust={s['robust_discordant']}")
    return 0


def _start_state(args):
    spec = args.start
    if spec == "bell":
        return bell(0).density(), "bell"
    if spec.startswith("werner:"):
        return werner(float(spec.split(":", 1)[1])), spec
    if spec == "tiles":
        return tiles_upb_state(), spec
    if spec.startswith("random:"):
        seed = int(spec.split(":", 1)[1])
        return random_mixed(args.dims, seed, rank=args.rank), spec
    if os.path.exists(spec):
        return load_state(spec), spec
    raise ConfigError(f"unknown start state {spec!r} (bell, werner:P, tiles, random:SEED or a state file)")


def cmd_trajectory(args):
    if args.steps < 0:
        raise ConfigError("--steps must be non-negative")
    rho0, label = _start_state(args)
    id_a, id_b = args.measures
    traj = trajectory(rho0, args.steps, id_a, id_b, args.seed, step_kind=args.step_kind,
                      n_kraus=args.n_kraus, ree_options=_ree_options(args))
    rows = [(0, traj.points[0].e_a, traj.points[0].e_b, f"start:{label}")]
    rows += [(k + 1, p.e_a, p.e_b, d) for k, (p, d) in enumerate(zip(traj.points[1:], traj.steps))]
    config = _run_config(args)
    report.write_csv(args.out, config, ["step", "eA", "eB", "op_descriptor"], rows)
    if args.svg:
        from .plotting import map_figure, save_svg

        bx, by = [], []
        if args.background:
            bg = Ensemble(dims=rho0.dims, kind="mixed", rank=args.rank, count=args.background, seed=args.seed)
            vals = evaluate_ensemble(bg, (id_a, id_b), workers=args.workers)
            bx, by = vals[:, 0], vals[:, 1]
        fig = map_figure(bx, by, id_a.value, id_b.value, title=f"trajectory from {label}",
                         path=[(p.e_a, p.e_b) for p in traj.points])
        save_svg(fig, args.svg)
    exact = id_a.is_exact and id_b.is_exact
    monotone = traj.is_monotone()
    print(f"monotone={'yes' if monotone else 'no'} max_increase={report.fmt(traj.max_increase())} "
          f"points={len(traj.points)}")
    if exact and not monotone and args.step_kind == "channel":
        return 1
    return 0


def cmd_verify_axioms(args):
    config = SuiteConfig(
        dims=args.dims, separable_trials=args.separable_trials, unitary_trials=args.unitary_trials, local_op_trials=args.trials,
        ree_trials=args.ree_trials, seed=args.seed, include_ree=not args.no_ree,
    )
    try:
        config.check()
    except EntmapError as exc:
        raise ConfigError(str(exc))
    measures = default_measures()
    if args.inject_broken_measure:
        measures.append(broken_measure())
    rep = verify_axioms(config, measures, ree_options=_ree_options(args))
    for r in rep.results:
        flag = "ok" if r.passed else ("FAIL" if r.hard else "warn")
        print(f"{flag:<4} {r.measure:<6} {r.property:<20} trials={r.trials:<5} "
              f"max_violation={r.max_violation:.3e} threshold={r.threshold:.0e}")
    ex = rep.exhibit
    print(f"tiles state: negativity={ex['negativity']:.3e} realignment_norm={ex['realignment_norm']:.10f}")
    if args.out:
        report.write_json(args.out, _run_config(args), rep.as_dict())
    print(f"hard_violations={len(rep.hard_violations)}")
    return 0 if rep.passed else 1


# --------------------------------------------------------------------------- #
# Parser
# --------------------------------------------------------------------------- #

def _ensemble_args(p, default_measures="Ef,En"):
    p.add_argument("--dims", type=_dims, default=(2, 2), help="subsystem dimensions dA,dB")
    p.add_argument("--kind", choices=("mixed", "pure"), default="mixed")
    p.add_argument("--rank", type=_rank, default=None, help="Ginibre rank K, range LO-HI, or 'full'")
    p.add_argument("--count", type=int, default=300)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--measures", type=_measure_pair, default=_measure_pair(default_measures))
    p.add_argument("--workers", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="entmap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"entmap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="evaluate measures on a state file")
    p.add_argument("state")
    p.add_argument("--measures", type=_measure_list, default=None)
    p.add_argument("--json", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ree-restarts", type=int, default=5)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("map", help="two-measure scatter of a random ensemble")
    _ensemble_args(p, "En,Ef")
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None)
    p.add_argument("--ree-restarts", type=int, default=5)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("find-discordant", help="search an ensemble for pairs ordered differently")
    _ensemble_args(p, "Ef,En")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None)
    p.add_argument("--recheck-er", type=int, default=0, metavar="N",
                   help="re-evaluate the first N robust records with the relative entropy of entanglement")
    p.add_argument("--ree-restarts", type=int, default=5)
    p.set_defaults(func=cmd_find_discordant)

    p = sub.add_parser("trajectory", help="random local-operation walk on the two-measure map")
    p.add_argument("--start", default="bell")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--dims", type=_dims, default=(2, 2))
    p.add_argument("--rank", type=_rank, default=None)
    p.add_argument("--measures", type=_measure_pair, default=_measure_pair("En,Ef"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-kind", choices=("channel", "measurement-average"), default="channel")
    p.add_argument("--n-kraus", type=int, default=2)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None)
    p.add_argument("--background", type=int, default=0, metavar="COUNT")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--ree-restarts", type=int, default=5)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("verify-axioms", help="randomized checks that every measure behaves as an entanglement monotone")
    p.add_argument("--dims", type=_dims, default=(2, 2))
    p.add_argument("--trials", type=int, default=1000, help="local channel / measurement trials")
    p.add_argument("--separable-trials", type=int, default=200)
    p.add_argument("--unitary-trials", type=int, default=200)
    p.add_argument("--ree-trials", type=int, default=20)
    p.add_argument("--no-ree", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--ree-restarts", type=int, default=5)
    p.add_argument("--inject-broken-measure", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify_axioms)
    return parser


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, EntmapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
