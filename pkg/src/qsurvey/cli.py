"""``qsurvey`` command line: verify, epr, survey.

Exit codes: 0 all cases pass, 1 some case failed, 2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from datetime import datetime, timezone

from qsurvey import hidden_variable as hv
from qsurvey.errors import QSurveyError
from qsurvey.reports import Case, build_envelope, dumps
from qsurvey.suites import (
    ALL_SUITES,
    DEFAULT_CUTOFF,
    DEFAULT_R,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    MANIFOLDS,
    ConfigError,
    SuiteConfig,
    SuiteResult,
    run_suite,
    setting_pair,
    survey_rows,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

SURVEY_WH_GRID = [0.25 * k for k in range(13)]
SURVEY_SU2_GRID = [k * 3.141592653589793 / 8 for k in range(9)]


def _grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsurvey", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, suite=False):
        if suite:
            p.add_argument("--suite", default="all", choices=ALL_SUITES)
        p.add_argument("--manifold", default="su2", choices=MANIFOLDS)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--trials", type=int, default=DEFAULT_TRIALS, dest="n_trials")
        p.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
        p.add_argument("--r", type=float, default=DEFAULT_R)
        p.add_argument("--grid", type=_grid, default=None,
                       help="comma-separated separations (|dlambda| for wh, Bloch angle for su2)")
        p.add_argument("--out", default=None, dest="output_path", help="output file (default stdout)")
        p.add_argument("--format", default=None, choices=("json", "csv"))

    common(sub.add_parser("verify", help="run verification suites"), suite=True)
    common(sub.add_parser("epr", help="hidden-variable EPR Monte Carlo over a settings grid"))
    common(sub.add_parser("survey", help="tabulate diameters d and correlations p = 1 - d^2"))
    return parser


def _config(args, suite: str, default_format: str) -> SuiteConfig:
    cfg = SuiteConfig(
        suite=suite,
        manifold=args.manifold,
        seed=args.seed,
        n_trials=args.n_trials,
        cutoff=args.cutoff,
        r=args.r,
        grid=args.grid,
        output_path=args.output_path,
        format=args.format or default_format,
    )
    cfg.validate()
    return cfg


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def _envelope(cfg: SuiteConfig, suite: str, result: SuiteResult, started: str, t0: float) -> dict:
    return build_envelope(suite, cfg.echo(), result.cases, started,
                          1000.0 * (time.perf_counter() - t0), result.extra)


def cmd_verify(cfg: SuiteConfig) -> tuple[int, dict]:
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    result = run_suite(cfg)
    env = _envelope(cfg, cfg.suite, result, started, t0)
    return (EXIT_OK if env["overall_pass"] else EXIT_FAIL), env


def cmd_epr(cfg: SuiteConfig) -> tuple[int, dict]:
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    law = hv.HiddenVariableLaw(cfg.manifold)
    result = SuiteResult()
    experiments = []
    for coord in cfg.settings_grid():
        g1, g2 = setting_pair(cfg.manifold, coord)
        rep = hv.run_epr_experiment(law, g1, g2, cfg.n_trials, cfg.seed)
        experiments.append(rep.to_dict())
        sigma = (rep.predicted_rate * (1 - rep.predicted_rate) / rep.n_trials) ** 0.5
        result.cases.append(Case(f"epr[{coord!r}]", rep.predicted_rate, rep.observed_rate,
                                 hv.Z_THRESHOLD * sigma, rep.passed, "statistical"))
    result.extra["experiments"] = experiments
    env = _envelope(cfg, "hv-epr", result, started, t0)
    return (EXIT_OK if env["overall_pass"] else EXIT_FAIL), env


def epr_trials_csv(cfg: SuiteConfig) -> str:
    grid = cfg.settings_grid()
    if len(grid) != 1:
        raise ConfigError("per-trial csv needs exactly one grid point")
    g1, g2 = setting_pair(cfg.manifold, grid[0])
    buf = io.StringIO()
    law = hv.HiddenVariableLaw(cfg.manifold)
    hv.write_trials_csv(hv.trial_records(law, g1, g2, cfg.n_trials, cfg.seed), buf)
    return buf.getvalue()


def survey_csv(cfg: SuiteConfig) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["relation_coordinate", "d", "p"])
    for coord, d, p in survey_rows(cfg.manifold, _survey_grid(cfg)):
        writer.writerow([repr(coord), repr(d), repr(p)])
    return buf.getvalue()


def _survey_grid(cfg: SuiteConfig) -> list[float]:
    if cfg.grid is not None:
        return list(cfg.grid)
    return SURVEY_SU2_GRID if cfg.manifold == "su2" else SURVEY_WH_GRID


def cmd_survey(cfg: SuiteConfig) -> tuple[int, str]:
    if cfg.format == "csv":
        return EXIT_OK, survey_csv(cfg)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    rows = [{"relation_coordinate": c, "d": d, "p": p}
            for c, d, p in survey_rows(cfg.manifold, _survey_grid(cfg))]
    result = SuiteResult(extra={"rows": rows})
    return EXIT_OK, dumps(_envelope(cfg, "survey", result, started, t0))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            cfg = _config(args, args.suite, "json")
            if cfg.format != "json":
                raise ConfigError("verify reports are json only")
            code, env = cmd_verify(cfg)
            text = dumps(env)
        elif args.command == "epr":
            cfg = _config(args, "hv-epr", "json")
            if cfg.format == "csv":
                code, text = EXIT_OK, epr_trials_csv(cfg)
            else:
                code, env = cmd_epr(cfg)
                text = dumps(env)
        else:
            cfg = _config(args, "survey", "csv")
            code, text = cmd_survey(cfg)
        _write(text, cfg.output_path)
    except (ConfigError, QSurveyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.output_path not in (None, "-"):
        print(f"{args.command}: {'PASS' if code == EXIT_OK else 'FAIL'} -> {cfg.output_path}",
              file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
