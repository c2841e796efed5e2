"""
Command-line front end: scenario files, experiment runs and the selftest.

Scenario files are flat ``key = value`` lines (``#`` starts a comment).
Powers are given in dBm and path loss in dB; this module is the only place
where dBm values become watts.  Every key is optional, and missing keys take
the defaults listed in :data:`DEFAULTS`:

=====================  =====================================================
key                    meaning
=====================  =====================================================
num_antennas           transmit antennas ``M``
num_rf_chains          RF chains ``N`` (``N < M``)
num_users              legitimate users ``K``
num_eves               eavesdroppers ``J``
power_dbm              power budget (dBm)
weights                one weight, or ``K`` comma-separated weights
noise_ut_dbm           user noise power (dBm), scalar or ``K`` values
noise_eve_dbm          eavesdropper noise power (dBm), scalar or ``J`` values
path_loss_db           large-scale path loss applied to every channel (dB)
sweep                  ``none``, ``power`` or ``rf``
sweep_values           comma-separated dBm values or RF-chain counts
num_realizations       channel draws per sweep point
rng_seed               master seed
schemes                comma-separated subset of pdd, so, random, energy, mrt
pdd_*                  any :class:`~secureas.pdd.PddConfig` field, prefixed
fp_tol, fp_max_iters   stopping rule of the fixed-selection FP iterations
so_refine              re-optimize the SO beamformer on its selection
=====================  =====================================================

Output files of ``run`` (schema version 1):

``wssr_vs_sweep.csv``
    sweep_value, scheme, mean_wssr, stderr, n_ok, n_fail
``pdd_trace.csv``
    realization, inner_iter_count, outer_iter, objective, violation,
    sweep_value.  One row per inner sweep; ``inner_iter_count`` counts inner
    sweeps from the start of the run and ``violation`` is the constraint
    violation measured at the end of that outer iteration.
``run_meta.json``
    spec echo, seed, package versions, failures and wall-clock timings.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError, SecureASError
from .model import SystemConfig, dbm_to_watts, watts_to_dbm
from .pdd import PddConfig
from .selftest import run_selftest
from .sim import SCHEMES, SWEEPS, ScenarioSpec, run_scenario

__all__ = ["DEFAULTS", "parse_scenario", "loads_scenario", "dumps_scenario", "cmd_run", "cmd_selftest", "main"]

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2, 3

_PDD_FIELDS = {f"pdd_{f.name}": f for f in dataclasses.fields(PddConfig)}
_PDD_DEFAULTS = PddConfig()

DEFAULTS = {
    "num_antennas": 24,
    "num_rf_chains": 6,
    "num_users": 6,
    "num_eves": 4,
    "power_dbm": 10.0,
    "weights": 1.0,
    "noise_ut_dbm": -120.0,
    "noise_eve_dbm": -120.0,
    "path_loss_db": -120.0,
    "sweep": "none",
    "sweep_values": (),
    "num_realizations": 500,
    "rng_seed": 0,
    "schemes": SCHEMES,
    "fp_tol": 1e-7,
    "fp_max_iters": 500,
    "so_refine": False,
    **{key: getattr(_PDD_DEFAULTS, f.name) for key, f in _PDD_FIELDS.items()},
}

_INTS = {"num_antennas", "num_rf_chains", "num_users", "num_eves", "num_realizations", "rng_seed", "fp_max_iters"}
_BOOLS = {"so_refine"}
_VECTORS = {"weights", "noise_ut_dbm", "noise_eve_dbm"}
_SECTION = "scenario"


def _as_bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _as_list(text):
    return [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]


def _convert(key, text):
    try:
        if key in _INTS:
            return int(text)
        if key in _BOOLS:
            return _as_bool(text)
        if key in _VECTORS:
            values = [float(v) for v in _as_list(text)]
            if not values:
                raise ValueError("empty list")
            return values[0] if len(values) == 1 else tuple(values)
        if key == "sweep":
            return text.strip().lower()
        if key == "schemes":
            return tuple(v.lower() for v in _as_list(text))
        if key == "sweep_values":
            return tuple(float(v) for v in _as_list(text))
        if key in _PDD_FIELDS:
            kind = type(getattr(_PDD_DEFAULTS, _PDD_FIELDS[key].name))
            return text.strip() if kind is str else kind(text)
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"{key}: malformed value {text!r} ({exc})", key) from None


def build_spec(values) -> ScenarioSpec:
    """ScenarioSpec from a dict of (already typed) scenario keys."""
    unknown = sorted(set(values) - set(DEFAULTS))
    if unknown:
        raise ConfigError(
            f"unknown key(s) {', '.join(unknown)}; valid keys are: {', '.join(DEFAULTS)}", unknown[0]
        )
    v = {**DEFAULTS, **values}
    base = SystemConfig(
        v["num_antennas"],
        v["num_rf_chains"],
        v["num_users"],
        v["num_eves"],
        float(dbm_to_watts(v["power_dbm"])),
        np.asarray(v["weights"], dtype=float),
        dbm_to_watts(v["noise_ut_dbm"]),
        dbm_to_watts(v["noise_eve_dbm"]),
    )
    try:
        pdd = PddConfig(**{f.name: v[key] for key, f in _PDD_FIELDS.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"pdd settings: {exc}", "pdd") from None
    sweep_values = v["sweep_values"]
    if v["sweep"] == "rf":
        if any(float(n) != int(n) for n in sweep_values):
            raise ConfigError("rf sweep values must be integers", "sweep_values")
        sweep_values = tuple(int(n) for n in sweep_values)
    return ScenarioSpec(
        base=base,
        path_loss_db=float(v["path_loss_db"]),
        sweep=v["sweep"],
        sweep_values=sweep_values,
        num_realizations=v["num_realizations"],
        rng_seed=v["rng_seed"],
        schemes=v["schemes"],
        pdd=pdd,
        fp_tol=float(v["fp_tol"]),
        fp_max_iters=v["fp_max_iters"],
        so_refine=v["so_refine"],
    )


def loads_scenario(text) -> ScenarioSpec:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n{text}")
    except configparser.Error as exc:
        raise ConfigError(f"malformed scenario file: {exc}", "file") from None
    if parser.sections() != [_SECTION]:
        raise ConfigError("scenario files are flat key = value lists without sections", "file")
    values = {key: raw for key, raw in parser[_SECTION].items()}
    unknown = sorted(set(values) - set(DEFAULTS))
    if unknown:
        build_spec(dict.fromkeys(unknown))  # raises with the list of valid keys
    return build_spec({key: _convert(key, raw) for key, raw in values.items()})


def parse_scenario(path) -> ScenarioSpec:
    """Read a scenario file; missing keys take the defaults."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc.strerror}", "file") from None
    return loads_scenario(text)


def _fmt(x):
    """Shortest text that parses back to the same float."""
    return repr(float(x))


def _fmt_vec(arr):
    arr = np.asarray(arr, dtype=float)
    if np.all(arr == arr[0]):
        return _fmt(arr[0])
    return ", ".join(_fmt(x) for x in arr)


def scenario_dict(spec: ScenarioSpec):
    """Every scenario key of ``spec`` in scenario-file units (dBm, dB).

    dBm values are chosen so that converting them back gives exactly the
    stored watts, which makes :func:`build_spec` invert this function.
    """
    base = spec.base
    out = {
        "num_antennas": base.num_antennas,
        "num_rf_chains": base.num_rf_chains,
        "num_users": base.num_users,
        "num_eves": base.num_eves,
        "power_dbm": _stable_dbm(base.power_budget),
        "weights": base.weights.tolist(),
        "noise_ut_dbm": [_stable_dbm(x) for x in base.noise_ut],
        "noise_eve_dbm": [_stable_dbm(x) for x in base.noise_eve],
        "path_loss_db": spec.path_loss_db,
        "sweep": spec.sweep,
        "sweep_values": list(spec.sweep_values),
        "num_realizations": spec.num_realizations,
        "rng_seed": spec.rng_seed,
        "schemes": list(spec.schemes),
        "fp_tol": spec.fp_tol,
        "fp_max_iters": spec.fp_max_iters,
        "so_refine": spec.so_refine,
    }
    for key, f in _PDD_FIELDS.items():
        out[key] = getattr(spec.pdd, f.name)
    return out


def dumps_scenario(spec: ScenarioSpec) -> str:
    """Scenario-file text that :func:`loads_scenario` maps back to ``spec``."""
    d = scenario_dict(spec)
    lines = []
    for key, value in d.items():
        if key in _VECTORS:
            text = _fmt_vec(value)
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, (list, tuple)):
            text = ", ".join(str(x) if isinstance(x, (str, int)) else _fmt(x) for x in value)
        elif isinstance(value, float):
            text = _fmt(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def _stable_dbm(watts):
    """A dBm float whose conversion to watts gives back exactly ``watts``.

    The direct conversion is usually exact; otherwise nearby floats are tried.
    """
    guess = float(watts_to_dbm(watts))
    if float(dbm_to_watts(guess)) == watts:
        return guess
    lo = hi = guess
    for _ in range(64):
        lo, hi = np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf)
        for cand in (lo, hi):
            if float(dbm_to_watts(cand)) == watts:
                return float(cand)
    raise ConfigError(f"power {watts!r} W has no exact dBm representation", "power")


def _g(x):
    return f"{x:.12g}"


def write_outputs(result, out_dir: Path, wall_clock):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "wssr_vs_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sweep_value", "scheme", "mean_wssr", "stderr", "n_ok", "n_fail"])
        for row in result.rows():
            w.writerow([_g(row["sweep_value"]), row["scheme"], _g(row["mean_wssr"]), _g(row["stderr"]),
                        row["n_ok"], row["n_fail"]])
    values = [v for v, _ in result.spec.points()]
    with open(out_dir / "pdd_trace.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["realization", "inner_iter_count", "outer_iter", "objective", "violation", "sweep_value"])
        for point, r, trace in result.pdd_traces:
            count = 0
            for t, seg in enumerate(trace.inner_segments()):
                for obj in seg[1:]:
                    count += 1
                    w.writerow([r, count, t, _g(obj), _g(trace.violation_per_outer_iter[t]), _g(values[point])])
    spec = result.spec
    meta = {
        "schema_version": SCHEMA_VERSION,
        "spec": scenario_dict(spec),
        "seed": spec.rng_seed,
        "paired_channels": result.paired,
        "versions": {
            "secureas": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "failures": [
            {"sweep_value": c.sweep_value, "scheme": c.scheme, "realization": r, "error": e}
            for c in result.cells for r, e in c.errors
        ],
        "wall_clock": wall_clock,
    }
    with open(out_dir / "run_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=False)
        fh.write("\n")


def cmd_run(spec: ScenarioSpec, out_dir, workers=1, out=print) -> int:
    """Run ``spec`` and write the CSV/JSON artifacts into ``out_dir``."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        out(f"error: output directory {out_dir} is not writable: {exc.strerror}")
        return EXIT_RUNTIME
    t0 = time.perf_counter()
    result = run_scenario(spec, workers=workers)
    wall = {
        "total_seconds": time.perf_counter() - t0,
        "mean_solve_seconds": {f"{c.scheme}@{c.sweep_value}": float(np.mean(c.seconds)) for c in result.cells},
    }
    try:
        write_outputs(result, out_dir, wall)
    except OSError as exc:
        out(f"error: writing results failed: {exc}")
        return EXIT_RUNTIME
    bad = [c for c in result.cells if c.n_fail > 0.5 * len(c.values)]
    for c in result.cells:
        out(f"{c.sweep_value:>8g}  {c.scheme:7s} mean WSSR {c.mean:8.4f}  (se {c.stderr:.4f}, {c.n_fail} failed)")
    if bad:
        for c in bad:
            first = c.errors[0][1] if c.errors else ""
            out(f"error: {c.scheme} failed on {c.n_fail}/{len(c.values)} draws at {c.sweep_value:g}: {first}")
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_selftest(tol_scale=1.0, out=print) -> int:
    failed = run_selftest(tol_scale=tol_scale, out=out)
    if failed:
        out(f"selftest failed: {', '.join(failed)}")
        return EXIT_RUNTIME
    out("selftest passed")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parser():
    p = _Parser(prog="secureas", description="Joint beamforming and antenna selection for secrecy.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run a Monte Carlo scenario")
    run.add_argument("--config", required=True, help="scenario file (key = value lines)")
    run.add_argument("--sweep", choices=[s for s in SWEEPS if s != "none"])
    run.add_argument("--values", help="comma-separated sweep values (dBm or RF-chain counts)")
    run.add_argument("--schemes", help=f"comma-separated subset of {','.join(SCHEMES)}")
    run.add_argument("--realizations", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", default="results", help="output directory (default: results)")
    run.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    run.add_argument("-v", "--verbose", action="store_true")
    st = sub.add_parser("selftest", help="run the fast invariant suite")
    st.add_argument("--tol-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "selftest":
        scale = float(os.environ.get("SECUREAS_SELFTEST_TOL_SCALE", args.tol_scale))
        return cmd_selftest(scale)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        spec = parse_scenario(args.config)
        overrides = {}
        if args.sweep is not None:
            overrides["sweep"] = args.sweep
        if args.values is not None:
            overrides["sweep_values"] = _convert("sweep_values", args.values)
        if args.schemes is not None:
            overrides["schemes"] = _convert("schemes", args.schemes)
        if args.realizations is not None:
            overrides["num_realizations"] = args.realizations
        if args.seed is not None:
            overrides["rng_seed"] = args.seed
        if overrides:
            values = scenario_dict(spec)
            values.update(overrides)
            if values["sweep"] == "rf":
                values["sweep_values"] = tuple(values["sweep_values"])
            spec = build_spec(values)
    except ConfigError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return cmd_run(spec, args.out, workers=args.workers)
    except SecureASError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
