"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .baselines import KernelPlan, kernel_estimate, soft_threshold_estimate
from .constants import basis_constants
from .estimator import Sample, adaptive_estimate, adaptive_plan
from .exceptions import ConfigurationError, LrdTrendError, NumericalError
from .harness import METHODS, ExperimentConfig, MiseReport, doppler_cstar_override, emit_figure_data, run_experiment
from .noise import simulate, write_column_csv
from .wavelets import as_table, available_bases
from ._validation import design_points

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("lrdtrend")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x for x in text.replace(",", " ").split() if x]


def _config_flags(p: argparse.ArgumentParser, seed_required: bool = False):
    g = p.add_argument_group("experiment config (overrides --config)")
    g.add_argument("--config", type=Path, help="JSON config file")
    g.add_argument("--trend", help="sine, jumpsine, sharp or doppler")
    g.add_argument("--delta", type=float, help="jump size for jumpsine")
    g.add_argument("--basis", choices=available_bases())
    g.add_argument("--d", type=float, help="fractional parameter in (0, 0.5)")
    g.add_argument("--n", dest="n_values", type=_int_list, help="sample sizes, e.g. 1024,2048")
    g.add_argument("--replicates", type=int)
    g.add_argument("--seed", type=int, required=seed_required, help="base seed; replicate i uses seed + i")
    g.add_argument("--methods", type=_str_list, help=f"subset of {','.join(METHODS)}")
    g.add_argument("--output-dir", dest="output_dir")
    g.add_argument("--innovation-variance", dest="innovation_variance", type=float)
    g.add_argument("--cap", choices=["aliasing", "full"])
    g.add_argument("--chunk-size", dest="chunk_size", type=int)


def _load_config(args) -> ExperimentConfig:
    base = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    names = ExperimentConfig.field_names()
    return base.with_overrides(**{k: getattr(args, k, None) for k in names})


def _single_n(cfg: ExperimentConfig) -> int:
    if len(cfg.n_values) != 1:
        raise ConfigurationError("this command needs exactly one sample size (--n)")
    return cfg.n_values[0]


def _read_column(path: Path) -> np.ndarray:
    try:
        with path.open() as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from None
    values = []
    for row in rows:
        if not row:
            continue
        try:
            values.append(float(row[0]))
        except ValueError:
            if values:
                raise ConfigurationError(f"non-numeric value {row[0]!r} in {path}") from None
    return np.asarray(values)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    n = _single_n(cfg)
    path = simulate(cfg.noise_model(), n, cfg.seed)
    values, header = path.values, "xi"
    if args.with_trend:
        values, header = values + cfg.build_trend()(design_points(n)), "y"
    out = Path(args.output or Path(cfg.output_dir) / f"{header}_n{n}_seed{cfg.seed}.csv")
    write_column_csv(out, values, header)
    print(out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _load_config(args)
    trend = cfg.build_trend()
    if args.input:
        y = _read_column(args.input)
    else:
        n = _single_n(cfg)
        y = trend(design_points(n)) + simulate(cfg.noise_model(), n, cfg.seed).values
    sample = Sample(y)
    model = cfg.noise_model()
    smooth = doppler_cstar_override(trend, as_table(cfg.basis).spec.m_psi)
    if args.method == "adaptive":
        est = adaptive_estimate(sample, model, smooth, cfg.basis, cap=cfg.cap)
    elif args.method == "minimax":
        plan, constants = adaptive_plan(sample.n, cfg.basis, model, smooth, cap=cfg.cap)
        est = soft_threshold_estimate(sample, cfg.basis, plan.J, plan.q, constants)
    else:
        curvature = trend.smoothness(2, trend.cstar_bounds or (0.0, 1.0)).integral_gr_sq
        est = kernel_estimate(sample, KernelPlan.optimal(sample.n, model, curvature))
    out = Path(args.output or Path(cfg.output_dir) / f"estimate_{args.method}_n{sample.n}.csv")
    est.to_csv(out, truth=trend)
    print(out)
    if args.coefficients:
        if est.coefficients is None:
            raise ConfigurationError("the kernel method has no wavelet coefficients")
        est.coefficients.to_csv(args.coefficients)
        print(args.coefficients)
    return EXIT_OK


def cmd_constants(args) -> int:
    cfg = _load_config(args)
    c = basis_constants(cfg.basis, cfg.noise_model())
    d = c.to_dict()
    doc = {k: d[k] for k in ("basis", "alpha", "C_phi_sq", "C_psi_sq", "nu_r", "regime")}
    text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _run_and_report(cfg: ExperimentConfig, stem: str) -> int:
    report = run_experiment(cfg, persist=False)
    paths = report.save(stem=stem)
    sys.stdout.write(report.to_csv_text())
    for p in paths:
        print(p, file=sys.stderr)
    return EXIT_NUMERIC if report.failed() else EXIT_OK


def cmd_mise_table(args) -> int:
    return _run_and_report(_load_config(args), "mise")


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    if args.methods is None:
        cfg = cfg.with_overrides(methods=list(METHODS))
    return _run_and_report(cfg, "compare")


def cmd_figure(args) -> int:
    if args.report:
        report = MiseReport.from_json(args.report)
        out = args.output_dir or report.config.output_dir
    else:
        cfg = _load_config(args)
        report = run_experiment(cfg)
        out = cfg.output_dir
    res = emit_figure_data(report, out, stem=args.stem)
    for key in ("csv", "svg", "slopes_json"):
        print(res[key])
    print(json.dumps(res["slopes"], sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lrdtrend", description="Adaptive wavelet trend estimation under long memory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="write one noise (or sample) path as a single-column CSV")
    _config_flags(s)
    s.add_argument("--with-trend", action="store_true", help="add the trend to the noise")
    s.add_argument("--output", type=Path)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("estimate", help="estimate the trend of one path")
    _config_flags(s)
    s.add_argument("--input", type=Path, help="single-column CSV of observations")
    s.add_argument("--method", choices=METHODS, default="adaptive")
    s.add_argument("--output", type=Path, help="estimate CSV (t, y, g_true, g_hat)")
    s.add_argument("--coefficients", type=Path, help="coefficient CSV (level, shift, value, kept)")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("constants", help="dump basis constants as JSON")
    _config_flags(s)
    s.add_argument("--output", type=Path)
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("mise-table", help="Monte Carlo MISE table")
    _config_flags(s, seed_required=True)
    s.set_defaults(func=cmd_mise_table)

    s = sub.add_parser("figure", help="log2 MISE vs log2 n data, SVG and slopes")
    _config_flags(s)
    s.add_argument("--report", type=Path, help="existing report JSON from mise-table/compare")
    s.add_argument("--stem", default="figure")
    s.set_defaults(func=cmd_figure)

    s = sub.add_parser("compare", help="adaptive vs minimax vs kernel report")
    _config_flags(s)
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LrdTrendError, ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
