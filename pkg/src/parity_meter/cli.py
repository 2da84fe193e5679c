"""Command-line interface for fairness audits over prediction CSVs.

Subcommands: ``report``, ``sweep``, ``density``, ``bias-density``,
``synth``, ``convergence``, ``train-toy``.  Every command writes its outputs
plus a ``manifest.json`` (command, package version, resolved configuration,
and SHA-256 digests of the inputs) into the ``--out`` directory.  Outputs
are byte-identical across runs for identical inputs: floats are rendered by
shortest round-trip ``repr`` and manifests contain no timestamps.

Exit codes: 0 success; 2 for input or configuration errors; 3 for numeric
degeneracy (including training divergence); 4 when ``--check`` was requested
and a verdict failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import __version__
from .core import group_view, read_csv, split_groups, write_csv
from .density import KdeConfig, fit_ecdf, fit_kde, sample_curve
from .errors import (
    ConfigError,
    DegenerateError,
    DivergenceError,
    DivisionError,
    GroupError,
    MissingLabelError,
    MissingPositiveError,
    RangeError,
    SchemaError,
    SizeError,
    UnsupportedSpec,
)
from .metrics import MetricConfig, multi_group_report, pair_report, threshold_sweep
from .optim import TrainConfig, read_training_csv, train
from .synth import (
    MixtureSpec,
    NormalSpec,
    SynthSpec,
    convergence_experiment,
    generate,
)
from .transport import bias_density, heatmap, optimal_plan, render_svg, wasserstein1

_USAGE_ERRORS = (
    SchemaError,
    RangeError,
    GroupError,
    ConfigError,
    SizeError,
    MissingLabelError,
    MissingPositiveError,
    DivisionError,
    UnsupportedSpec,
)


def _fmt(x):
    """Shortest decimal string that round-trips to the same float64."""
    return repr(float(x))


def _write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _write_json(path, obj):
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(c) if isinstance(c, (str, int)) else _fmt(c) for c in row))
    _write_text(path, "\n".join(lines) + "\n")


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return "sha256:" + digest.hexdigest()


def _manifest(out_dir, command, config, inputs, seed=None):
    obj = {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": {os.path.basename(p): _sha256(p) for p in inputs},
        "seed": seed,
    }
    _write_json(os.path.join(out_dir, "manifest.json"), obj)


def _ensure_out(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _parse_bandwidth(text):
    try:
        return float(text)
    except ValueError:
        return text


def _metric_config(args):
    return MetricConfig(
        threshold=args.threshold,
        pdf_grid=args.pdf_grid,
        cdf_grid=args.cdf_grid,
        kde=KdeConfig(_parse_bandwidth(args.bandwidth)),
    )


def parse_dist(text):
    """Parse a distribution spec string.

    ``normal:MU,SIGMA`` or ``mix:W*normal:MU,SIGMA|W*normal:MU,SIGMA``.
    """
    text = text.strip()
    try:
        if text.startswith("normal:"):
            parts = text[len("normal:"):].split(",")
            if len(parts) != 2:
                raise ConfigError(f"bad normal spec {text!r}; expected normal:MU,SIGMA")
            return NormalSpec(float(parts[0]), float(parts[1]))
        if text.startswith("mix:"):
            weights, comps = [], []
            for chunk in text[len("mix:"):].split("|"):
                w, _, rest = chunk.partition("*")
                if not rest.startswith("normal:"):
                    raise ConfigError(f"bad mixture component {chunk!r}")
                weights.append(float(w))
                comps.append(parse_dist(rest))
            return MixtureSpec(tuple(weights), tuple(comps))
    except ValueError:
        raise ConfigError(f"could not parse distribution spec {text!r}") from None
    raise ConfigError(f"unknown distribution spec {text!r}; expected normal:... or mix:...")


def _dist_from_json(obj):
    kind = obj.get("type", "normal")
    if kind == "normal":
        return NormalSpec(float(obj["mean"]), float(obj["std"]))
    if kind == "mixture":
        weights = tuple(float(c["weight"]) for c in obj["components"])
        comps = tuple(NormalSpec(float(c["mean"]), float(c["std"])) for c in obj["components"])
        return MixtureSpec(weights, comps)
    raise ConfigError(f"unknown distribution type {kind!r}")


def _dist_to_json(dist):
    if isinstance(dist, NormalSpec):
        return {"type": "normal", "mean": dist.mean, "std": dist.std}
    return {
        "type": "mixture",
        "components": [
            {"weight": w, "mean": c.mean, "std": c.std}
            for w, c in zip(dist.weights, dist.components)
        ],
    }


def _synth_spec(args):
    config_inputs = []
    if args.config:
        with open(args.config) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        try:
            spec = SynthSpec(
                dist0=_dist_from_json(obj["dist0"]),
                dist1=_dist_from_json(obj["dist1"]),
                n_per_group=int(obj.get("n_per_group", args.n)),
                seed=int(obj.get("seed", args.seed)),
                sigmoid=bool(obj.get("sigmoid", args.sigmoid)),
            )
        except KeyError as exc:
            raise ConfigError(f"{args.config}: missing key {exc.args[0]!r}") from None
        config_inputs.append(args.config)
        return spec, config_inputs
    if not args.dist0 or not args.dist1:
        raise ConfigError("provide either --config or both --dist0 and --dist1")
    spec = SynthSpec(
        dist0=parse_dist(args.dist0),
        dist1=parse_dist(args.dist1),
        n_per_group=args.n,
        seed=args.seed,
        sigmoid=args.sigmoid,
    )
    return spec, config_inputs


def _spec_to_json(spec):
    return {
        "dist0": _dist_to_json(spec.dist0),
        "dist1": _dist_to_json(spec.dist1),
        "n_per_group": spec.n_per_group,
        "seed": spec.seed,
        "sigmoid": spec.sigmoid,
    }


def cmd_report(args):
    preds = read_csv(args.input)
    config = _metric_config(args)
    if args.pair is not None:
        report = pair_report(preds, tuple(args.pair), config)
    else:
        report = multi_group_report(preds, config)
    text = report.to_json()
    if args.table:
        lines = []
        for key, value in report.to_dict().items():
            if key in ("config", "pairs"):
                continue
            lines.append(f"{key:12} {value if value is not None else 'n/a'}")
        print("\n".join(lines))
    else:
        print(text)
    if args.out:
        out = _ensure_out(args)
        _write_text(os.path.join(out, "report.json"), text + "\n")
        cfg = report.config.to_dict()
        cfg["pair"] = list(args.pair) if args.pair is not None else None
        _manifest(out, "report", cfg, [args.input])
    return 0


def cmd_sweep(args):
    preds = read_csv(args.input)
    pair = tuple(args.pair) if args.pair is not None else None
    sweep = threshold_sweep(preds, pair, args.steps)
    from .metrics import abcc, delta_dp_c

    cdf_area = abcc(preds, pair)
    mean_gap = delta_dp_c(preds, pair)

    verdicts = [
        ("integral_ge_mean_gap", sweep.exact_integral + 1e-9 >= mean_gap),
        ("integral_matches_cdf_area", abs(sweep.exact_integral - cdf_area) <= 1e-3),
    ]
    print(f"integral={_fmt(sweep.integral)}")
    print(f"exact_integral={_fmt(sweep.exact_integral)}")
    print(f"delta_dp_c={_fmt(mean_gap)}")
    print(f"abcc={_fmt(cdf_area)}")
    for name, ok in verdicts:
        print(f"{name}: {'PASS' if ok else 'FAIL'}")

    if args.out:
        out = _ensure_out(args)
        _write_csv(
            os.path.join(out, "sweep.csv"),
            ["t", "delta_dp_b"],
            zip(sweep.thresholds, sweep.values),
        )
        _manifest(
            out,
            "sweep",
            {"steps": args.steps, "pair": list(sweep.pair)},
            [args.input],
        )
    if args.check and not all(ok for _, ok in verdicts):
        return 4
    return 0


def cmd_density(args):
    preds = read_csv(args.input)
    out = _ensure_out(args)
    kde_config = KdeConfig(_parse_bandwidth(args.bandwidth))
    written = []
    for view in split_groups(preds):
        pdf = sample_curve(fit_kde(view, kde_config), args.grid)
        cdf = sample_curve(fit_ecdf(view), args.grid)
        for stem, curve in (("pdf", pdf), ("cdf", cdf)):
            name = f"{stem}_group{view.group_id}.csv"
            _write_csv(os.path.join(out, name), ["x", "value"], curve)
            written.append(name)
    _manifest(
        out,
        "density",
        {"grid": args.grid, "bandwidth": _parse_bandwidth(args.bandwidth)},
        [args.input],
    )
    print("\n".join(written))
    return 0


def cmd_bias_density(args):
    preds = read_csv(args.input)
    if args.pair is not None:
        g0, g1 = args.pair
    else:
        ids = preds.group_ids
        if len(ids) != 2:
            raise GroupError(f"dataset has {len(ids)} groups; specify an explicit --pair")
        g0, g1 = ids
    view0 = group_view(preds, g0)
    view1 = group_view(preds, g1)
    plan = optimal_plan(view0, view1, args.resolution, args.method)
    bias = bias_density(plan)
    grid = heatmap(bias, args.bins)

    out = _ensure_out(args)
    _write_csv(
        os.path.join(out, "coupling.csv"),
        ["x", "y", "mass"],
        zip(plan.sources, plan.targets, plan.masses),
    )
    rows = [
        (i, j, grid[i, j])
        for i in range(args.bins)
        for j in range(args.bins)
        if grid[i, j] > 0.0
    ]
    _write_csv(os.path.join(out, "heatmap.csv"), ["x_bin", "y_bin", "rho"], rows)
    if args.svg:
        render_svg(grid, os.path.join(out, "heatmap.svg"))
    _manifest(
        out,
        "bias-density",
        {
            "pair": [int(g0), int(g1)],
            "resolution": args.resolution,
            "method": args.method,
            "bins": args.bins,
        },
        [args.input],
    )
    print(f"w1={_fmt(wasserstein1(view0, view1))}")
    print(f"total_rho={_fmt(bias.total)}")
    return 0


def cmd_synth(args):
    spec, config_inputs = _synth_spec(args)
    preds = generate(spec)
    out = _ensure_out(args)
    write_csv(preds, os.path.join(out, "synth.csv"))
    _manifest(out, "synth", _spec_to_json(spec), config_inputs, seed=spec.seed)
    print(f"wrote synth.csv ({preds.n} rows)")
    return 0


def _convergence_checks(report):
    checks = []
    by_metric = {m: [r for r in report.rows if r.metric == m] for m in report.metrics}
    for m in ("abpc", "abcc"):
        if m in report.metrics and len(report.n_values) >= 2:
            rows = by_metric[m]
            ok = all(b.median_err < a.median_err for a, b in zip(rows, rows[1:]))
            checks.append((f"{m}_median_decreases", ok))
    if "abcc" in report.metrics and len(report.n_values) >= 2:
        slope = report.slopes["abcc"]
        checks.append(("abcc_slope_in_band", -0.8 <= slope <= -0.25))
    if "mi" in report.metrics and "abcc" in report.metrics:
        ok = all(
            mi_row.median_err > ab_row.median_err
            for mi_row, ab_row in zip(by_metric["mi"], by_metric["abcc"])
        )
        checks.append(("mi_error_above_abcc", ok))
    return checks


def cmd_convergence(args):
    spec, config_inputs = _synth_spec(args)
    n_values = [int(v) for v in args.n_values.split(",") if v]
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    report = convergence_experiment(
        spec,
        n_values,
        args.trials,
        metrics=metrics,
        relative=not args.absolute,
    )

    out = _ensure_out(args)
    _write_csv(
        os.path.join(out, "convergence.csv"),
        ["n", "metric", "median_rel_err", "mean_rel_err", "trials"],
        [(r.n, r.metric, r.median_err, r.mean_err, r.trials) for r in report.rows],
    )
    summary = {
        "spec": _spec_to_json(spec),
        "n_values": list(report.n_values),
        "trials": report.trials,
        "relative": report.relative,
        "truth": {
            "abpc": report.truth.abpc,
            "abcc": report.truth.abcc,
            "mi": report.truth.mi,
            "method": report.truth.method,
        },
        "slopes": {m: report.slopes[m] for m in report.metrics},
    }
    _write_json(os.path.join(out, "summary.json"), summary)
    _manifest(
        out,
        "convergence",
        {
            "spec": _spec_to_json(spec),
            "n_values": list(report.n_values),
            "trials": report.trials,
            "metrics": list(report.metrics),
            "relative": report.relative,
        },
        config_inputs,
        seed=spec.seed,
    )

    for m in report.metrics:
        print(f"slope[{m}]={_fmt(report.slopes[m])}")
    checks = _convergence_checks(report)
    for name, ok in checks:
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
    if args.check and not all(ok for _, ok in checks):
        return 4
    return 0


def cmd_train_toy(args):
    features, labels, groups = read_training_csv(args.data)
    config = TrainConfig(
        penalty=args.penalty,
        lam=args.lam,
        bandwidth=args.bandwidth,
        penalty_grid=args.penalty_grid,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        halve_on_increase=not args.no_halving,
        metric_every=args.metric_every,
    )
    model, trajectory = train((features, labels, groups), config)

    out = _ensure_out(args)
    _write_csv(
        os.path.join(out, "trajectory.csv"),
        ["epoch", "loss", "acc", "delta_dp_c", "abpc", "abcc"],
        [(p.epoch, p.loss, p.acc, p.delta_dp_c, p.abpc, p.abcc) for p in trajectory],
    )
    config_echo = {
        "penalty": config.penalty,
        "lam": config.lam,
        "bandwidth": config.bandwidth,
        "penalty_grid": config.penalty_grid,
        "learning_rate": config.learning_rate,
        "epochs": config.epochs,
        "seed": config.seed,
        "halve_on_increase": config.halve_on_increase,
        "metric_every": config.metric_every,
    }
    final = trajectory[-1]
    _write_json(
        os.path.join(out, "model.json"),
        {
            "weights": [float(w) for w in model.weights],
            "bias": float(model.bias),
            "config": config_echo,
            "final": {
                "epoch": final.epoch,
                "loss": final.loss,
                "acc": final.acc,
                "delta_dp_c": final.delta_dp_c,
                "abpc": final.abpc,
                "abcc": final.abcc,
            },
        },
    )
    _manifest(out, "train-toy", config_echo, [args.data], seed=config.seed)
    print(
        f"epoch={final.epoch} loss={_fmt(final.loss)} acc={_fmt(final.acc)} "
        f"delta_dp_c={_fmt(final.delta_dp_c)} abpc={_fmt(final.abpc)} abcc={_fmt(final.abcc)}"
    )
    return 0


def _add_metric_flags(sub):
    sub.add_argument("--threshold", type=float, default=0.5)
    sub.add_argument("--pdf-grid", type=int, default=5000)
    sub.add_argument("--cdf-grid", type=int, default=10000)
    sub.add_argument("--bandwidth", default="scott")


def _add_spec_flags(sub):
    sub.add_argument("--config", help="JSON spec file (overrides --dist0/--dist1)")
    sub.add_argument("--dist0", help="e.g. normal:0.3,0.1 or mix:0.5*normal:0.2,0.05|0.5*normal:0.6,0.1")
    sub.add_argument("--dist1")
    sub.add_argument("--n", type=int, default=1000, help="samples per group")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--sigmoid", action=argparse.BooleanOptionalAction, default=True)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="parity-meter",
        description="Distribution-level demographic parity metrics and diagnostics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("report", help="full metric report for a prediction CSV")
    p.add_argument("--input", required=True)
    pairing = p.add_mutually_exclusive_group()
    pairing.add_argument("--pair", type=int, nargs=2, metavar=("G0", "G1"))
    pairing.add_argument(
        "--all-pairs",
        action="store_true",
        help="average over all group pairs (the default)",
    )
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="table", action="store_false", default=False)
    fmt.add_argument("--table", dest="table", action="store_true")
    p.add_argument("--out")
    _add_metric_flags(p)
    p.set_defaults(func=cmd_report)

    p = subs.add_parser("sweep", help="trace the binarised rate gap over all thresholds")
    p.add_argument("--input", required=True)
    p.add_argument("--pair", type=int, nargs=2, metavar=("G0", "G1"))
    p.add_argument("--steps", type=int, default=1001)
    p.add_argument("--out")
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("density", help="export per-group density and CDF curves")
    p.add_argument("--input", required=True)
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--bandwidth", default="scott")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_density)

    p = subs.add_parser("bias-density", help="transport coupling and disparity heatmap")
    p.add_argument("--input", required=True)
    p.add_argument("--pair", type=int, nargs=2, metavar=("G0", "G1"))
    p.add_argument("--resolution", type=int, default=1000)
    p.add_argument("--method", choices=("quantile_grid", "sorted_match"), default="quantile_grid")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_bias_density)

    p = subs.add_parser("synth", help="draw a synthetic two-group dataset")
    _add_spec_flags(p)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("convergence", help="estimator error vs sample size")
    _add_spec_flags(p)
    p.add_argument("--n-values", default="100,1000,10000")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--metrics", default="abpc,abcc,mi")
    p.add_argument("--absolute", action="store_true", help="absolute instead of relative errors")
    p.add_argument("--out", default=".")
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=cmd_convergence)

    p = subs.add_parser("train-toy", help="train the toy parity-regularised model")
    p.add_argument("--data", required=True)
    p.add_argument("--penalty", choices=("none", "delta_dp_c", "abpc_kde"), default="none")
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--bandwidth", type=float, default=0.05)
    p.add_argument("--penalty-grid", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metric-every", type=int, default=1)
    p.add_argument("--no-halving", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_train_toy)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
