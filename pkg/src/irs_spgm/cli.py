"""Command-line front end: ``irs-spgm {solve,sweep,audit} --config FILE``.

Exit codes: 0 success, 1 usage or config error, 2 invariant violation,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .audit import FAULTS, audit_instance, run_audit
from .baselines import no_irs_rate
from .channel import draw_realization
from .config import ConfigError, load_config
from .design import design
from .harness import los_asymptote, build_id, doubling_deviation, run_sweep
from .serialize import dumps

log = logging.getLogger("irs_spgm")

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_IO = 0, 1, 2, 3


class _IOFailure(Exception):
    pass


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from None


def cmd_solve(args, rc) -> int:
    real = draw_realization(rc.system, rc.rician, rc.seed)
    res = design(real, rc.system, rc.solver)
    violations = audit_instance(rc.system, rc.rician, rc.seed, rc.solver,
                                identity_samples=rc.audit.identity_samples)
    doc = {
        "config": rc.resolved(),
        "build": build_id(),
        "result": res.to_dict(),
        "no_irs_rate": no_irs_rate(real, rc.system),
        "audit": {"violations": [str(v) for v in violations]},
    }
    text = dumps(doc)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    if not res.admm.converged:
        log.warning("ADMM stopped after %d iterations without meeting epsilon", res.admm.iterations)
    for v in violations:
        log.error("invariant violated: %s", v)
    return EXIT_INVARIANT if violations else EXIT_OK


def cmd_sweep(args, rc) -> int:
    if rc.sweep is None:
        raise ConfigError([("sweep", "config has no 'sweep' section")])
    if not args.out:
        raise ConfigError([("--out", "sweep needs an output directory")])
    spec = rc.sweep
    result = run_sweep(spec, args.workers)
    out = Path(args.out)
    summary = json.loads(result.to_json())
    summary["config"] = rc.resolved()
    if spec.sweep_variable == "n_r":
        summary["los_asymptote"] = {
            str(int(n)): los_asymptote(spec.base_config, spec.rician, int(n)) for n in spec.sweep_values
        }
        growth = {}
        for method in spec.methods:
            try:
                growth[method] = doubling_deviation(spec.sweep_values, result.means(method))
            except ValueError:
                break
        if growth:
            summary["quadratic_growth_deviation"] = growth
    _write(out / "sweep.csv", result.to_csv())
    _write(out / "summary.json", dumps(summary))
    for r in result.bound_violations:
        log.error("bound chain violated: method=%s value=%s trial=%d", r.method, r.sweep_value, r.trial)
    for r in result.failures:
        log.error("trial failed: method=%s value=%s trial=%d: %s", r.method, r.sweep_value, r.trial, r.error)
    return EXIT_INVARIANT if result.bound_violations else EXIT_OK


def cmd_audit(args, rc) -> int:
    violations = run_audit(rc.audit, rc.rician, rc.system, rc.seed, rc.solver, fault=args.inject_fault)
    lines = [str(v) for v in violations]
    checked = len(rc.audit.shapes) * rc.audit.instances
    report = {"config": rc.resolved(), "build": build_id(), "instances": checked, "violations": lines}
    if args.out:
        _write(Path(args.out), dumps(report))
    for line in lines:
        print(f"VIOLATION {line}")
    print(f"audited {checked} instances: {len(lines)} violation(s)")
    return EXIT_INVARIANT if violations else EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "audit": cmd_audit}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irs-spgm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="output file (solve, audit) or directory (sweep)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                       help="worker processes for Monte-Carlo trials")
        p.add_argument("--trials-override", type=int, default=None)
        p.add_argument("--seed-override", type=int, default=None)
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "audit":
            # test hook: deliberately break an invariant
            p.add_argument("--inject-fault", choices=FAULTS, default=None, help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers is not None and args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        rc = load_config(args.config, trials_override=args.trials_override,
                         seed_override=args.seed_override)
        return COMMANDS[args.command](args, rc)
    except ConfigError as exc:
        for path, msg in exc.errors:
            print(f"config error: {path}: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (_IOFailure, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
