# python3
# cli.py
# Command line front end: binds a run configuration (plus flag overrides)
# to the computational modules and writes data files with a run manifest.

# Subcommands:
# + spectrum  stick spectrum, sideband summaries, optional broadening
# + moments   Monte Carlo moments and every sideband prediction
# + count     counting verdict for N vs N+1 and N_max
# + fig3      red-sideband bands of two atom numbers against epsilon
# + fig4      N_max against epsilon for a list of extrinsic widths
# + validate  the self-check suite, printed as a table
#
# Exit codes: 0 success, 1 computation error, 2 configuration/usage error.

import argparse
import logging
import os
import sys

from . import __version__
from . import params as P
from .core import CavityTallyError, ConfigError
from .counting import COUNTING_METHODS, counting_report, default_epsilon_grid, figure3_sweep, figure4_sweep, n_max
from .emitters import FORMATS, Emitter, read_manifest, record_fields
from .hamiltonian import BACKENDS, DEFAULT_MAX_NONZEROS, assemble, dump_operator, initial_state, make_basis
from .moments import DEFAULT_BATCHES, DEFAULT_SAMPLES, all_predictions, mc_moments
from .spectra import convolve, projection_diagnostics, spectral_moments, split_sidebands, stick_spectrum
from .validate import CHECK_NAMES, format_report, run_checks

logger = logging.getLogger(__name__)

# parameters used by fig3, fig4 and validate when no configuration is given
SWEEP_DEFAULTS = {"n_atoms": 8, "epsilon": 0.5, "recoil_ratio": 0.01}

DEFAULT_KAPPAS = (0.0, 0.05, 0.1, 0.2)

_LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)

# options never taken from a replayed manifest
_NOT_REPLAYED = frozenset(("command", "needs_config", "func", "config", "verbose", "out", "threads"))


def _overrides(args):
    return {
        "n_atoms": args.n_atoms, "eta": args.eta, "epsilon": args.epsilon,
        "recoil_ratio": args.recoil_ratio, "kappa_ext": args.kappa,
        "n_max_fock": args.n_max_fock, "grid_points": args.grid_points, "grid_halfwidth": args.grid_halfwidth,
    }


def resolve_params(args):
    """SystemParams from --config (if any) with command line flags taking precedence."""
    overrides = _overrides(args)
    if args.config is not None:
        params = P.load(args.config, **overrides)
    else:
        raw = dict(SWEEP_DEFAULTS)
        if overrides["eta"] is not None:
            raw.pop("epsilon")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        params = P.from_config(raw)
    logger.info(f"Parameters: {params.describe()}")
    return params


def _explicit_dests(argv):
    """Destinations of the long options spelled out in argv."""
    return {
        token[2:].split("=", 1)[0].replace("-", "_")
        for token in argv if token.startswith("--")
    }


def replay_options(args, argv):
    """Restore seed and command options from a manifest passed as --config.

    Parameter overrides are already part of the recorded params, and flags
    given explicitly in argv win over recorded values.
    """
    if args.config is None or not str(args.config).endswith(".json"):
        return args
    manifest = read_manifest(args.config)
    if manifest is None:
        return args
    recorded = {"seed": manifest.get("seed", args.seed)}
    if manifest.get("command") == args.command:
        recorded.update(manifest["options"])
    else:
        logger.warning(f"manifest was written by {manifest.get('command')!r}; only its params and seed are replayed")
    skipped = _NOT_REPLAYED | set(_overrides(args)) | {"kappa"} | _explicit_dests(argv)
    for dest, value in recorded.items():
        if dest in skipped or not hasattr(args, dest):
            continue
        setattr(args, dest, value)
    logger.info(f"Replaying {args.command} from {args.config} with seed {args.seed}")
    return args


def _finish(args, emitter, params, argv):
    options = {k: v for k, v in vars(args).items() if k not in ("func", "config", "verbose")}
    emitter.write_manifest(
        args.command, argv, args.seed, None if params is None else P.to_config(params), options, __version__
    )
    for f in emitter.outputs:
        print(os.path.join(emitter.outdir, f))
    return 0


def cmd_spectrum(args, argv):
    params = resolve_params(args)
    basis = make_basis(params, args.backend)
    op = assemble(params, basis, args.max_nonzeros)
    psi = initial_state(params, basis)
    sticks = stick_spectrum(op, psi, args.iterations)
    emitter = Emitter(args.out, args.format)
    emitter.write_table("sticks", ("omega", "weight"), zip(sticks.omega, sticks.weight))

    if params.kappa_ext > 0:
        grid = None
        if args.omega_range is not None:
            grid = (args.omega_range[0], args.omega_range[1], int(args.omega_range[2]))
        broadened = convolve(sticks, params.kappa_ext, grid)
        emitter.write_table("broadened", ("omega", "intensity"), zip(broadened.omega_grid, broadened.intensity))

    red, blue = split_sidebands(sticks)
    moments = spectral_moments(sticks, 4)
    fields = [("origin", sticks.origin), ("n_lines", sticks.n_lines), ("dim", op.dim), ("backend", basis.backend)]
    fields += record_fields(red, "red_") + record_fields(blue, "blue_")
    fields += [(f"{side}_central_moments", m.central) for side, m in moments.items()]
    if args.projections:
        fields.append(("projection_agreement", projection_diagnostics(op, psi).agreement))
    emitter.write_summary("sidebands", fields, as_json=True)

    if args.dump_operator:
        dump_operator(op, emitter.path_for("operator.bin"))
    return _finish(args, emitter, params, argv)


def cmd_moments(args, argv):
    params = resolve_params(args)
    emitter = Emitter(args.out, args.format)
    est = None
    if params.is_tight_limit:
        logger.warning("eta == 0: no Monte Carlo sampling, closed-form predictions only")
    else:
        est = mc_moments(params, args.samples, args.seed, args.cutoff, args.batches, args.threads)
        emitter.write_summary("moment_estimates", record_fields(est))
    predictions = all_predictions(params, est)
    emitter.write_table(
        "predictions",
        ("side", "method", "mean", "variance", "mean_error", "variance_error", "valid"),
        [(p.side, p.method, p.mean, p.variance, p.mean_error, p.variance_error, p.valid) for p in predictions]
    )
    return _finish(args, emitter, params, argv)


def cmd_count(args, argv):
    params = resolve_params(args)
    n = params.n_atoms if args.n is None else args.n
    options = {}
    if args.method == "perturbative_mc":
        options = {"n_samples": args.samples, "seed": args.seed, "workers": args.threads}
    elif args.method == "spectrum":
        options = {"backend": args.backend}
    report = counting_report(n, params, args.method, args.width_multiplier, **options)
    limit = n_max(params.epsilon, params.kappa_ext)
    emitter = Emitter(args.out, args.format)
    fields = record_fields(report) + record_fields(limit, "n_max_")
    emitter.write_summary("counting_report", fields, as_json=True)
    return _finish(args, emitter, params, argv)


def cmd_fig3(args, argv):
    params = resolve_params(args)
    table = figure3_sweep(params, (args.n_low, args.n_high), default_epsilon_grid(args.eps_points))
    emitter = Emitter(args.out, args.format)
    header = ("epsilon", f"mean_n{args.n_low}", f"halfwidth_n{args.n_low}", f"mean_n{args.n_high}", f"halfwidth_n{args.n_high}", "overlap")
    emitter.write_table("figure3", header, table.rows)
    emitter.write_summary("figure3_crossover", [
        ("n_low", args.n_low), ("n_high", args.n_high),
        ("recoil_ratio", table.recoil_ratio), ("crossover_epsilon", table.crossover),
    ], as_json=True)
    return _finish(args, emitter, params, argv)


def cmd_fig4(args, argv):
    table = figure4_sweep(args.kappas, default_epsilon_grid(args.eps_points))
    emitter = Emitter(args.out, args.format)
    names = list(table.columns)
    rows = [[eps] + [table.columns[name][k] for name in names] for k, eps in enumerate(table.epsilon)]
    emitter.write_table("figure4", ["epsilon"] + names, rows)
    emitter.write_summary(
        "figure4_monotonic", [(f"{name}_monotonic", table.monotonic[name]) for name in names], as_json=True
    )
    return _finish(args, emitter, None, argv)


def cmd_validate(args, argv):
    results = run_checks(args.seed, args.threads, args.only)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 1


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _common_arguments():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (TOML, or a manifest.json to replay)")
    common.add_argument("--seed", type=int, default=0, help="seed for every random draw")
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count(), help="worker threads")
    common.add_argument("--out", default="output", help="output directory")
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("-v", "--verbose", action="count", default=0)
    overrides = common.add_argument_group("parameter overrides (take precedence over --config)")
    overrides.add_argument("--n-atoms", type=int)
    overrides.add_argument("--eta", type=float)
    overrides.add_argument("--epsilon", type=float)
    overrides.add_argument("--recoil-ratio", type=float)
    overrides.add_argument("--kappa", type=float, help="extrinsic half-linewidth kappa_ext/g")
    overrides.add_argument("--n-max-fock", type=int)
    overrides.add_argument("--grid-points", type=int)
    overrides.add_argument("--grid-halfwidth", type=float, help="grid backend box half-width in units of 1/k")
    return common


def build_parser():
    common = _common_arguments()
    parser = argparse.ArgumentParser(prog="cavitytally", description="Atom counting from cavity transmission spectra")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="stick spectrum by exact diagonalization")
    s.add_argument("--backend", choices=BACKENDS, default="fock")
    s.add_argument("--iterations", type=_positive_int, help="Lanczos iterations above the dense limit")
    s.add_argument("--max-nonzeros", type=_positive_int, default=DEFAULT_MAX_NONZEROS)
    s.add_argument("--omega-range", type=float, nargs=3, metavar=("START", "STOP", "POINTS"))
    s.add_argument("--projections", action="store_true", help="bright-state projection check (grid backend)")
    s.add_argument("--dump-operator", action="store_true", help="also write the operator in binary form")
    s.set_defaults(func=cmd_spectrum, needs_config=True)

    m = sub.add_parser("moments", parents=[common], help="Monte Carlo moments and sideband predictions")
    m.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES)
    m.add_argument("--cutoff", type=float, help="chi^2 clipping cutoff (default 1e-6 N)")
    m.add_argument("--batches", type=_positive_int, default=DEFAULT_BATCHES)
    m.set_defaults(func=cmd_moments, needs_config=True)

    c = sub.add_parser("count", parents=[common], help="distinguishability of N and N+1 atoms")
    c.add_argument("--n", type=_positive_int, help="atom number (default: n_atoms of the configuration)")
    c.add_argument("--method", choices=COUNTING_METHODS, default="series")
    c.add_argument("--width-multiplier", type=float, default=1.0)
    c.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES)
    c.add_argument("--backend", choices=BACKENDS, default="fock")
    c.set_defaults(func=cmd_count, needs_config=True)

    f3 = sub.add_parser("fig3", parents=[common], help="red-sideband bands of two atom numbers vs epsilon")
    f3.add_argument("--n-low", type=_positive_int, default=8)
    f3.add_argument("--n-high", type=_positive_int, default=9)
    f3.add_argument("--eps-points", type=_positive_int, default=100)
    f3.set_defaults(func=cmd_fig3, needs_config=False)

    f4 = sub.add_parser("fig4", parents=[common], help="N_max vs epsilon for several kappa_ext")
    f4.add_argument("--kappas", type=float, nargs="+", default=list(DEFAULT_KAPPAS))
    f4.add_argument("--eps-points", type=_positive_int, default=100)
    f4.set_defaults(func=cmd_fig4, needs_config=False)

    v = sub.add_parser("validate", parents=[common], help="run the self-check suite")
    v.add_argument("--only", nargs="+", choices=CHECK_NAMES, help="run only these checks")
    v.set_defaults(func=cmd_validate, needs_config=False)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.needs_config and args.config is None:
            parser.error(f"{args.command} needs --config")
    except SystemExit as e:
        return 0 if e.code is None else int(e.code)

    logging.basicConfig(
        level=_LOG_LEVELS[min(args.verbose, len(_LOG_LEVELS) - 1)],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        replay_options(args, argv)
        return args.func(args, argv)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except CavityTallyError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 1


def run():
    sys.exit(main())
