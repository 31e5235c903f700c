"""Command-line entry point.

Subcommands: fit, predict, bound, mc, co2, check-identity. Every
subcommand reads a JSON config (validated against the bundled schema),
writes its outputs atomically into --out (temp file + rename, so a
failing run leaves no partial files), and maps failures to exit codes:

    0  success          2  config error
    3  numerical error  4  data error
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import co2 as co2mod
from . import experiments
from .bounds import bound_report, check_appendix_b_identity, hcrb, hcrb_via_eq8
from .errors import ConfigError, DataError, GphcrbError, NumericalError
from .gp import Dataset, GpModel, predict
from .learning import FitConfig, fit_ml

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_DATA = 4

IDENTITY_RTOL = 1e-8


def _load_schema() -> dict:
    text = resources.files("gphcrb").joinpath("schemas", "config.schema.json").read_text()
    return json.loads(text)


def load_config(path: str, subcommand: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    schema = _load_schema()
    try:
        jsonschema.validate(
            instance=cfg,
            schema={"$defs": schema["$defs"], "$ref": f"#/$defs/{subcommand}"},
        )
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config does not match the {subcommand} schema: {exc.message}")
    return cfg


class OutputStage:
    """Collects outputs and renames them into place only when all of
    them have been produced."""

    def __init__(self, out_dir: str):
        self.out_dir = Path(out_dir)
        self.items: list[tuple[str, str]] = []

    def add(self, name: str, content: str):
        self.items.append((name, content))

    def commit(self) -> list[Path]:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, content in self.items:
            fd, tmp = tempfile.mkstemp(dir=self.out_dir, prefix=f".{name}.")
            with os.fdopen(fd, "w") as fh:
                fh.write(content)
            final = self.out_dir / name
            os.replace(tmp, final)
            written.append(final)
        return written


def _read_dataset(cfg: dict, config_path: str) -> Dataset:
    path = Path(cfg["dataset"])
    if not path.is_absolute():
        path = Path(config_path).parent / path
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"dataset file not found: {path}")
    try:
        return Dataset.from_csv(text)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def cmd_fit(cfg: dict, args, stage: OutputStage) -> int:
    data = _read_dataset(cfg, args.config)
    model = GpModel.from_json(cfg["model"])
    fit_cfg = FitConfig.from_json(cfg.get("fit", {}))
    if args.seed is not None:
        fit_cfg = FitConfig.from_json(fit_cfg.to_json() | {"seed": args.seed})
    result = fit_ml(model.mean, model.kernel, data, model.theta, fit_cfg)
    stage.add("fit_result.json", json.dumps(result.to_json(), indent=2))
    return EXIT_OK


def cmd_predict(cfg: dict, args, stage: OutputStage) -> int:
    data = _read_dataset(cfg, args.config)
    model = GpModel.from_json(cfg["model"])
    xstars = experiments.make_grid(cfg["test_xs"])
    pred = predict(model, data, xstars)
    rows = [["x", "fhat", "var"]]
    for i, x in enumerate(xstars):
        rows.append([f"{x:.17g}", f"{pred.fhat[i]:.17g}", f"{pred.var[i]:.17g}"])
    stage.add("predictions.csv", _csv(rows))
    return EXIT_OK


def cmd_bound(cfg: dict, args, stage: OutputStage) -> int:
    data = _read_dataset(cfg, args.config)
    model = GpModel.from_json(cfg["model"])
    xstars = experiments.make_grid(cfg["test_xs"])
    rep = bound_report(model, data, xstars)
    rows = [["x", "fhat", "bcrb", "hcrb", "gap"]]
    for i in range(len(rep["x"])):
        rows.append(
            [
                f"{rep[c][i]:.17g}"
                for c in ("x", "fhat", "bcrb", "hcrb", "gap")
            ]
        )
    stage.add("bound.csv", _csv(rows))
    return EXIT_OK


def cmd_mc(cfg: dict, args, stage: OutputStage) -> int:
    if args.seed is not None:
        cfg = dict(cfg) | {"seed": args.seed}
    mc_cfg = experiments.McExperimentConfig.from_json(cfg)
    t0 = time.perf_counter()
    if mc_cfg.marginalized is not None:
        curves = experiments.run_marginalized_comparison(mc_cfg)
    else:
        curves = experiments.run_mc(mc_cfg)
    wall = time.perf_counter() - t0
    stage.add("curves.csv", curves.to_csv())
    stage.add("summary.json", experiments.summary_json(curves, mc_cfg, wall))
    return EXIT_OK


def cmd_co2(cfg: dict, args, stage: OutputStage) -> int:
    if "data" in cfg:
        path = Path(cfg["data"])
        if not path.is_absolute():
            path = Path(args.config).parent / path
        try:
            records = co2mod.parse_co2(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"data file not found: {path}")
    else:
        records = co2mod.load_snapshot()
    model = GpModel.from_json(cfg["model"])
    fit_cfg = FitConfig.from_json(cfg.get("fit", {}))
    if args.seed is not None:
        fit_cfg = FitConfig.from_json(fit_cfg.to_json() | {"seed": args.seed})
    result = experiments.run_co2(
        records,
        (tuple(cfg["train"]["from"]), tuple(cfg["train"]["to"])),
        (tuple(cfg["valid"]["from"]), tuple(cfg["valid"]["to"])),
        model,
        fit_cfg,
        x_center=cfg.get("x_center"),
    )
    stage.add("co2_bands.csv", result.bands_csv())
    stage.add("co2_coverage.json", result.coverage_json())
    return EXIT_OK


def cmd_check_identity(cfg: dict, args, stage: OutputStage) -> int:
    data = _read_dataset(cfg, args.config)
    model = GpModel.from_json(cfg["model"])
    if "test_xs" in cfg:
        xstars = experiments.make_grid(cfg["test_xs"])
    else:
        lo, hi = float(data.xs.min()), float(data.xs.max())
        xstars = np.array([lo - 1.0, 0.5 * (lo + hi), hi + 1.0])
    worst_b = worst_8 = 0.0
    for x in np.atleast_1d(xstars):
        ing = hcrb(model, data, [x])[0]
        resid_b = check_appendix_b_identity(model, data, [x])
        rel_b = resid_b / (1.0 + float(np.max(np.abs(ing.mmat))))
        rel_8 = abs(hcrb_via_eq8(model, data, [x]) - ing.hcrb) / (1.0 + ing.hcrb)
        worst_b = max(worst_b, rel_b)
        worst_8 = max(worst_8, rel_8)
    ok = worst_b <= IDENTITY_RTOL and worst_8 <= IDENTITY_RTOL
    print(
        f"appendix-b residual {worst_b:.3e}  hcrb-vs-joint residual {worst_8:.3e}  "
        f"{'OK' if ok else 'FAIL'} (tolerance {IDENTITY_RTOL:g} relative)"
    )
    return EXIT_OK if ok else EXIT_NUMERICAL


HANDLERS = {
    "fit": cmd_fit,
    "predict": cmd_predict,
    "bound": cmd_bound,
    "mc": cmd_mc,
    "co2": cmd_co2,
    "check-identity": cmd_check_identity,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gphcrb",
        description="GP regression with hybrid Cramer-Rao prediction bounds",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        verb = p.add_mutually_exclusive_group()
        verb.add_argument("--quiet", action="store_true")
        verb.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    stage = OutputStage(args.out)
    try:
        cfg = load_config(args.config, args.subcommand)
        code = HANDLERS[args.subcommand](cfg, args, stage)
        if code == EXIT_OK:
            written = stage.commit()
            if not args.quiet:
                for path in written:
                    print(f"wrote {path}", file=sys.stderr)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except GphcrbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
