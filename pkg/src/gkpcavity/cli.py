"""Experiment runner: sweeps, single-state phase-space dumps, and the
verification suite, driven by YAML config files.

Subcommands
    sweep   optimize over a C0 grid, emit sweep.csv + sweep.json
    state   run one protocol/breeding instance, emit wigner.csv,
            quadrature_x.csv, quadrature_p.csv, report.json
    verify  run the acceptance criteria and print a pass/fail table

Exit codes: 0 success, 1 computation error, 2 configuration error.
CSV output is byte-stable for a fixed config and seed; files are written
atomically.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import jsonschema
import numpy as np
import yaml

import gkpcavity
from gkpcavity import fock
from gkpcavity.acceptance import FAST_CRITERIA, format_report, run_acceptance
from gkpcavity.breeding import BreedConfig, bred_phase_space, breed
from gkpcavity.channel import CavityParams
from gkpcavity.metrics import SqueezingReport
from gkpcavity.optimize import SearchSpace, point_record, sweep
from gkpcavity.protocol import ProtocolConfig, run_protocol, two_level_weighting_config

CSV_COLUMNS = [
    "C0", "N_or_M", "eta", "C", "r_in", "scale", "atom_a",
    "dB_x", "dB_p", "min_dB", "success_prob",
]


class ConfigError(Exception):
    pass


def _load_schema(name: str) -> dict:
    ref = importlib.resources.files("gkpcavity") / "schemas" / f"{name}.json"
    return json.loads(ref.read_text())


def load_config(path: str | Path) -> dict:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}") from exc
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("config must be a mapping with a 'kind' key")
    kind = cfg["kind"]
    if kind not in ("sweep", "state"):
        raise ConfigError(f"unknown config kind {kind!r}")
    schema = _load_schema(f"{kind}_config.v1")
    try:
        jsonschema.validate(cfg, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config does not match {kind} schema: {exc.message}")
    return cfg


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".12g")
    return str(value)


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(rows: list[dict], columns: list[str]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col, "")) for col in columns))
    return "\n".join(lines) + "\n"


def _search_space(cfg: dict) -> tuple[SearchSpace, list[str]]:
    active = cfg.get("optimize", ["eta", "r"])
    box = cfg.get("space", {})

    def rng(key, default):
        return tuple(box.get(key, default))

    space = SearchSpace(
        eta_range=rng("eta", (0.5, 0.9999)),
        r_range=rng("r", (0.0, 2.0)),
        scale_range=rng("scale", (0.9, 1.15)),
        a_range=rng("atom_a", (1.0 / math.sqrt(2.0), 0.95)),
        p_range=rng("p_displacement", (0.02, 1.2)),
        optimize_eta="eta" in active,
        optimize_r="r" in active,
        optimize_scale="scale" in active,
        optimize_atom="atom" in active,
    )
    return space, active


def cmd_sweep(cfg: dict, out_dir: Path, jobs: int) -> int:
    space, active = _search_space(cfg)
    budget = cfg.get("budget", 300)
    seed = cfg.get("seed", 0)
    dim_cap = cfg.get("dim_cap", 256)
    result = sweep(
        cfg["c0"], cfg["protocol"], cfg["steps"], space, budget,
        seed=seed, dim_cap=dim_cap, jobs=jobs, keep_log=cfg.get("keep_log", False),
    )
    points = sorted(result.points, key=lambda p: (p.c0, p.steps))
    rows = [point_record(p) for p in points if p.best.error is None]
    csv_text = _csv(rows, CSV_COLUMNS)
    sidecar = {
        "schema": "gkpcavity/sweep_result.v1",
        "protocol": cfg["protocol"],
        "seed": seed,
        "budget": budget,
        "dim_cap": dim_cap,
        "optimize": active,
        "space": {k: list(v) for k, v in cfg.get("space", {}).items()},
        "package_version": gkpcavity.__version__,
        "csv_columns": CSV_COLUMNS,
        "points": [
            {
                **{k: v for k, v in point_record(p).items() if k != "p_displacement"},
                "n_evaluations": p.n_evaluations,
                **(
                    {"evaluations": [
                        {"params": e.params, "min_dB": e.min_db} for e in p.evaluations
                    ]}
                    if p.evaluations
                    else {}
                ),
            }
            for p in points
        ],
    }
    jsonschema.validate(sidecar, _load_schema("sweep_result.v1"))
    _write_atomic(out_dir / "sweep.csv", csv_text)
    _write_atomic(out_dir / "sweep.json", json.dumps(sidecar, indent=2) + "\n")
    failed = [p for p in points if p.best.error is not None]
    for p in failed:
        print(f"warning: C0={p.c0} steps={p.steps} failed: {p.best.error}",
              file=sys.stderr)
    print(f"wrote {out_dir / 'sweep.csv'} ({len(rows)} rows)")
    return 0


def _grid_from_cfg(cfg: dict) -> np.ndarray:
    grid = cfg.get("grid", {})
    half = grid.get("max", 6.0)
    points = grid.get("points", 81)
    return np.linspace(-half, half, points)


def cmd_state(cfg: dict, out_dir: Path) -> int:
    if "eta" not in cfg:
        raise ConfigError("state config needs an explicit 'eta'")
    cavity = CavityParams.from_internal(cfg["c0"], cfg["eta"])
    grid = _grid_from_cfg(cfg)
    dim_cap = cfg.get("dim_cap", 256)
    steps = cfg["steps"]
    r = cfg.get("r", 1.0)
    scale = cfg.get("scale", 1.0)
    extra: dict = {}
    if cfg["protocol"] == "cavity":
        atoms = None
        if "atom_a" in cfg and steps >= 2:
            atoms = two_level_weighting_config(steps, cfg["atom_a"])
        proto = ProtocolConfig(
            n_steps=steps,
            input_squeezing=r,
            cavity=cavity,
            displacement_scale=scale,
            atoms=atoms,
            deterministic_first_step=cfg.get("deterministic_first_step", False),
            dim=fock.default_dim(
                scale * math.sqrt(math.pi / 2) * (2**steps - 1), r, cap=dim_cap
            ),
        )
        res = run_protocol(proto)
        report = res.squeezing
        wig = fock.wigner(res.state, grid, grid)
        p_x = fock.quadrature_distribution(res.state, "x", grid)
        p_p = fock.quadrature_distribution(res.state, "p", grid)
        extra = {"mean_photons": res.mean_photons, "dim": res.state.dim}
    else:
        bcfg = BreedConfig(
            rounds=steps, input_squeezing=r, cavity=cavity, scale=scale,
            dim=fock.default_dim(
                scale * math.sqrt(math.pi) * math.sqrt(2.0) ** (steps - 1), r,
                cap=dim_cap,
            ),
        )
        report = breed(bcfg)
        wig, p_x, p_p = bred_phase_space(bcfg, grid, grid)
    _write_wigner(out_dir / "wigner.csv", grid, wig)
    _write_atomic(
        out_dir / "quadrature_x.csv",
        _csv([{"q": q, "P": v} for q, v in zip(grid, p_x)], ["q", "P"]),
    )
    _write_atomic(
        out_dir / "quadrature_p.csv",
        _csv([{"q": q, "P": v} for q, v in zip(grid, p_p)], ["q", "P"]),
    )
    payload = _report_json(cfg, report, extra)
    jsonschema.validate(payload, _load_schema("state_report.v1"))
    _write_atomic(out_dir / "report.json", json.dumps(payload, indent=2) + "\n")
    print(f"wrote state files to {out_dir} (min_dB={report.min_db:.3f})")
    return 0


def _write_wigner(path: Path, grid: np.ndarray, wig: np.ndarray) -> None:
    rows = []
    for i, p in enumerate(grid):
        for j, x in enumerate(grid):
            rows.append({"x": x, "p": p, "W": wig[i, j]})
    _write_atomic(path, _csv(rows, ["x", "p", "W"]))


def _report_json(cfg: dict, report: SqueezingReport, extra: dict) -> dict:
    payload = {
        "schema": "gkpcavity/state_report.v1",
        "protocol": cfg["protocol"],
        "config": cfg,
        "delta_x": report.delta_x,
        "delta_p": report.delta_p,
        "dB_x": report.db_x,
        "dB_p": report.db_p,
        "min_dB": report.min_db,
        "dx_expect": [report.dx_expect.real, report.dx_expect.imag],
        "dp_expect": [report.dp_expect.real, report.dp_expect.imag],
        "success_prob": report.success_probability,
        "package_version": gkpcavity.__version__,
    }
    payload.update(extra)
    return payload


def cmd_verify(fast: bool, out_dir: Path | None, budget: int, seed: int) -> int:
    ids = FAST_CRITERIA if fast else None
    results = run_acceptance(ids=ids, budget=budget, seed=seed)
    text = format_report(results)
    print(text)
    if out_dir is not None:
        payload = {
            "criteria": [
                {
                    "id": res.cid,
                    "name": res.name,
                    "passed": bool(res.passed),
                    "seconds": res.seconds,
                    "checks": [
                        {
                            "label": c.label,
                            "measured": float(c.measured),
                            "expected": c.expected,
                            "passed": bool(c.passed),
                        }
                        for c in res.checks
                    ],
                }
                for res in results
            ],
            "all_passed": bool(all(r.passed for r in results)),
        }
        _write_atomic(out_dir / "verify_report.json",
                      json.dumps(payload, indent=2) + "\n")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkpcavity",
        description="Grid-state generation with a lossy cavity: sweeps, "
        "states, verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sweep", "state"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="YAML experiment config")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--jobs", type=int, default=1)
        cmd.add_argument("--seed", type=int, default=None, help="override config seed")
        cmd.add_argument("--dim-cap", type=int, default=None,
                         help="override Fock dimension cap")
    ver = sub.add_parser("verify")
    ver.add_argument("--out", default=None)
    ver.add_argument("--fast", action="store_true",
                     help="skip the optimization-based criteria")
    ver.add_argument("--budget", type=int, default=300)
    ver.add_argument("--seed", type=int, default=11)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            out = Path(args.out) if args.out else None
            return cmd_verify(args.fast, out, args.budget, args.seed)
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.dim_cap is not None:
            cfg["dim_cap"] = args.dim_cap
        out_dir = Path(args.out or cfg.get("out") or ".")
        if args.command == "sweep":
            if cfg["kind"] != "sweep":
                raise ConfigError("sweep command needs a kind: sweep config")
            return cmd_sweep(cfg, out_dir, args.jobs)
        if cfg["kind"] != "state":
            raise ConfigError("state command needs a kind: state config")
        return cmd_state(cfg, out_dir)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    except Exception as exc:  # computation failure -> machine-readable stderr
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
