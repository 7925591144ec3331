"""Command-line front end.

Experiments: spectrum, controls, tails, evolve, sweep-eps, asym-tails,
lz-check.  Flags override a flat key=value config file; defaults mirror
the standard figure parameters so a bare invocation reproduces the
corresponding data set.  Outputs are CSV series plus a summary.json
that validates against the shipped schema (salz/schema/) and embeds the
fully resolved configuration.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import experiments as ex
from .control import ControlKind
from .errors import ConfigError, NumericalError, SalzError
from .kernels import backend_name
from .models import ThreeLevelModel, TwoLevelModel, from_config
from .propagate import (
    asymptotic_value,
    diabatic_populations,
    evolve,
    nonadiabaticity,
)

EXPERIMENTS = ("spectrum", "controls", "tails", "evolve", "sweep-eps",
               "asym-tails", "lz-check")

DEFAULTS = {
    "spectrum": {"model": "three-level", "epsilon": 15.0, "alpha": 1.0,
                 "delta": 0.5},
    "controls": {"model": "three-level", "epsilon": 15.0, "alpha": 1.0,
                 "delta": 0.5},
    "tails": {"model": "three-level", "epsilon": 15.0, "alpha": 1.0,
              "delta": 0.5, "fit_lo": 100.0, "fit_hi": 1000.0},
    "evolve": {"model": "three-level", "epsilon": 7.0, "alpha": 1.0,
               "delta": 0.5, "control": "separated-matrix"},
    "sweep-eps": {"alpha": 1.0, "delta": 1.0, "control": "separated-matrix",
                  "eps_from": 5.0, "eps_to": 100.0, "fit_lo": 10.0},
    "asym-tails": {"model": "three-level", "epsilon": 5.0, "alpha": 1.0,
                   "delta": 0.5, "delta_alpha": 1e-3},
    "lz-check": {"model": "two-level", "alpha": 1.0, "delta": 0.5,
                 "tau_start": -200.0, "tau_end": 200.0},
}


def summary_schema() -> dict:
    with resources.files("salz").joinpath("schema/summary.schema.json").open() as fh:
        return json.load(fh)


def read_config_file(path: str) -> dict:
    cfg = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(
                        f"{path}:{lineno}: expected 'key = value', got {line!r}")
                key, _, value = line.partition("=")
                cfg[key.strip().replace("-", "_")] = value.strip()
    except OSError as err:
        raise ConfigError(f"config: cannot read {path}: {err}") from None
    return cfg


class _Writer:
    """Collects written artifact paths so a failed run leaves nothing
    behind."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.paths = []

    def path(self, name):
        os.makedirs(self.out_dir, exist_ok=True)
        p = os.path.join(self.out_dir, name)
        self.paths.append(p)
        return p

    def csv(self, name, header, rows):
        p = self.path(name)
        with open(p, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
        return p

    def cleanup(self):
        for p in self.paths:
            try:
                os.unlink(p)
            except OSError:
                pass
        try:
            os.rmdir(self.out_dir)
        except OSError:
            pass


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


def write_summary(writer, experiment, params, fits=None, checks=None,
                  results=None):
    payload = {
        "experiment": experiment,
        "backend": backend_name(),
        "params": _sanitize(params),
        "fits": _sanitize(fits or []),
        "checks": [c.to_dict() for c in (checks or [])],
        "artifacts": [os.path.basename(p) for p in writer.paths],
        "results": _sanitize(results or {}),
    }
    p = writer.path("summary.json")
    payload["artifacts"].append(os.path.basename(p))
    with open(p, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return payload


def _labelled_fits(named_fits):
    out = []
    for label, fit in named_fits:
        if fit is None:
            continue
        d = fit.to_dict()
        d["label"] = label
        out.append(d)
    return out


def _num(params, key, default=None):
    raw = params.get(key, default)
    if raw is None:
        return None
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


KNOWN_KEYS = frozenset({
    "model", "epsilon", "alpha", "delta", "delta_delta", "delta_alpha",
    "control", "tau_start", "tau_end", "step", "fit_lo", "fit_hi",
    "eps_list", "eps_from", "eps_to", "workers",
})


def _resolve(experiment, file_cfg, flags) -> dict:
    for key in file_cfg:
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{key}: unknown configuration key")
    params = dict(DEFAULTS[experiment])
    params.update(file_cfg)
    for key, value in flags.items():
        if value is not None:
            params[key] = value
    return params


def _model_from(params):
    model = from_config(params)
    if params.get("model", "three-level") == "two-level" and _num(params, "epsilon", 0.0):
        raise ConfigError("epsilon: not a two-level parameter")
    return model


def _window(params):
    lo = _num(params, "tau_start")
    hi = _num(params, "tau_end")
    if (lo is None) != (hi is None):
        raise ConfigError("tau_start/tau_end: give both window bounds or neither")
    if lo is not None and not lo < hi:
        raise ConfigError(f"tau_start/tau_end: need tau_start < tau_end, "
                          f"got [{lo!r}, {hi!r}]")
    step = _num(params, "step")
    if step is not None and step <= 0.0:
        raise ConfigError(f"step: must be > 0, got {step!r}")
    return lo, hi, step


def _eps_list(params):
    raw = params.get("eps_list")
    if raw:
        if isinstance(raw, str):
            try:
                eps = [float(x) for x in raw.replace(";", ",").split(",") if x.strip()]
            except ValueError:
                raise ConfigError(f"eps_list: expected comma-separated numbers, "
                                  f"got {raw!r}") from None
        else:
            eps = [float(x) for x in raw]
    else:
        lo = _num(params, "eps_from", 5.0)
        hi = _num(params, "eps_to", 100.0)
        if not 0.0 < lo <= hi:
            raise ConfigError(f"eps_from/eps_to: need 0 < from <= to, "
                              f"got [{lo!r}, {hi!r}]")
        eps = ex.eps_ladder(lo, hi)
    if not eps:
        raise ConfigError("eps_list: the sweep list is empty")
    return eps


# ------------------------------------------------------------ experiment runners


def _run_spectrum(params, writer):
    model = _model_from(params)
    scan = ex.spectrum_scan(model)
    d = model.dim
    header = (["tau"] + [f"adiabatic_{k + 1}" for k in range(d)]
              + [f"diabatic_{k + 1}" for k in range(d)])
    rows = np.column_stack([scan.taus, scan.adiabatic, scan.diabatic])
    writer.csv("spectrum.csv", header, rows)
    return write_summary(writer, "spectrum", params,
                         results={"n_points": len(scan.taus)})


def _run_controls(params, writer):
    model = _model_from(params)
    scan = ex.control_shape_scan(model)
    for key in ex.ELEMENT_KEYS:
        writer.csv(f"abs_{key}.csv", ["tau", "value"],
                   np.column_stack([scan.taus, scan.magnitudes[key]]))
    writer.csv("im_13.csv", ["tau", "value"],
               np.column_stack([scan.taus, scan.imag_corner]))
    return write_summary(writer, "controls", params, checks=scan.checks)


def _run_tails(params, writer):
    model = _model_from(params)
    window = (_num(params, "fit_lo", 100.0), _num(params, "fit_hi", 1000.0))
    if not 0.0 < window[0] < window[1]:
        raise ConfigError(f"fit_lo/fit_hi: need 0 < lo < hi, got {window!r}")
    res = ex.tail_exponent_experiment(model, fit_window=window)
    for key in ex.ELEMENT_KEYS:
        writer.csv(f"abs_{key}.csv", ["tau", "value"],
                   np.column_stack([res.taus, res.magnitudes[key]]))
    fits = _labelled_fits((k, res.fits[k]) for k in ex.ELEMENT_KEYS)
    return write_summary(writer, "tails", params, fits=fits, checks=res.checks)


def _run_evolve(params, writer):
    model = _model_from(params)
    lo, hi, step = _window(params)
    control = str(params.get("control", "none"))
    try:
        kind = ControlKind(control)
    except ValueError:
        raise ConfigError(f"control: unknown kind {control!r}") from None
    traj = evolve(model, kind.value, tau_start=lo, tau_end=hi, step=step)
    series = nonadiabaticity(traj)
    writer.csv("nonadiabaticity.csv", ["tau", "value"],
               np.column_stack([series.taus, series.values]))
    for pop in diabatic_populations(traj):
        writer.csv(f"{pop.label}.csv", ["tau", "value"],
                   np.column_stack([pop.taus, pop.values]))
    p_inf = asymptotic_value(series)
    return write_summary(writer, "evolve", params,
                         results={"asymptotic_nonadiabaticity": p_inf,
                                  "step": traj.step,
                                  "n_points": len(traj.taus)})


def _run_sweep(params, writer):
    alpha = _num(params, "alpha", 1.0)
    delta = _num(params, "delta", 1.0)
    eps = _eps_list(params)
    control = str(params.get("control", "separated-matrix"))
    if control not in ("separated-matrix", "separated-field"):
        raise ConfigError(f"control: sweep needs a separated control, got {control!r}")
    workers = int(_num(params, "workers", 1.0))
    fit_lo = _num(params, "fit_lo", 10.0)
    fit_hi = _num(params, "fit_hi", max(eps))
    res = ex.separability_sweep(alpha, delta, eps, control,
                                fit_window=(fit_lo, fit_hi), workers=workers)
    writer.csv("sweep.csv", ["epsilon", "p_asymptotic"],
               np.column_stack([res.epsilons, res.p_values]))
    fits = _labelled_fits([("p-vs-eps", res.fit)])
    return write_summary(writer, "sweep-eps", params, fits=fits, checks=res.checks)


def _run_asym_tails(params, writer):
    model = _model_from(params)
    if not isinstance(model, ThreeLevelModel):
        raise ConfigError("model: asym-tails needs the three-level model")
    res = ex.asymmetric_crossover_experiment(model)
    writer.csv("corner_below.csv", ["tau", "value"],
               np.column_stack([res.taus_below, res.mags_below]))
    named = [("below", res.fit_below)]
    if res.fit_above is not None:
        writer.csv("corner_above.csv", ["tau", "value"],
                   np.column_stack([res.taus_above, res.mags_above]))
        named.append(("above", res.fit_above))
    results = {"crossover_estimate": res.crossover_estimate,
               "crossover_nominal": res.crossover_nominal}
    return write_summary(writer, "asym-tails", params,
                         fits=_labelled_fits(named), checks=res.checks,
                         results=results)


def _run_lz_check(params, writer):
    model = _model_from(params)
    if not isinstance(model, TwoLevelModel):
        raise ConfigError("model: lz-check needs the two-level model")
    lo, hi, step = _window(params)
    res = ex.lz_check(model, tau_start=lo if lo is not None else -200.0,
                      tau_end=hi if hi is not None else 200.0, step=step)
    for pop in res.populations:
        writer.csv(f"{pop.label}.csv", ["tau", "value"],
                   np.column_stack([pop.taus, pop.values]))
    results = {"p_numeric": res.p_numeric, "p_formula": res.p_formula,
               "rel_error": res.rel_error}
    return write_summary(writer, "lz-check", params, checks=res.checks,
                         results=results)


_RUNNERS = {
    "spectrum": _run_spectrum,
    "controls": _run_controls,
    "tails": _run_tails,
    "evolve": _run_evolve,
    "sweep-eps": _run_sweep,
    "asym-tails": _run_asym_tails,
    "lz-check": _run_lz_check,
}


def run(experiment: str, params: dict, out_dir: str) -> dict:
    """Run one experiment; returns the summary payload.  Partial outputs
    are removed when the run fails."""
    writer = _Writer(out_dir)
    try:
        return _RUNNERS[experiment](params, writer)
    except BaseException:
        writer.cleanup()
        raise


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="salz",
        description="Counterdiabatic driving of two- and three-level "
                    "Landau-Zener crossings: figure-style experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--out", help="output directory "
                                     "(default salz-out/<experiment>)")
        p.add_argument("--model", choices=["two-level", "three-level"])
        p.add_argument("--epsilon", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--delta-delta", dest="delta_delta", type=float)
        p.add_argument("--delta-alpha", dest="delta_alpha", type=float)
        p.add_argument("--control",
                       choices=["exact", "separated-matrix", "separated-field",
                                "none"])
        p.add_argument("--tau-start", dest="tau_start", type=float)
        p.add_argument("--tau-end", dest="tau_end", type=float)
        p.add_argument("--step", type=float)
        p.add_argument("--fit-lo", dest="fit_lo", type=float)
        p.add_argument("--fit-hi", dest="fit_hi", type=float)
        p.add_argument("--eps-list", dest="eps_list")
        p.add_argument("--eps-from", dest="eps_from", type=float)
        p.add_argument("--eps-to", dest="eps_to", type=float)
        p.add_argument("--workers", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    experiment = args.experiment
    flag_keys = ("model", "epsilon", "alpha", "delta", "delta_delta",
                 "delta_alpha", "control", "tau_start", "tau_end", "step",
                 "fit_lo", "fit_hi", "eps_list", "eps_from", "eps_to",
                 "workers")
    flags = {k: getattr(args, k, None) for k in flag_keys}
    try:
        file_cfg = read_config_file(args.config) if args.config else {}
        params = _resolve(experiment, file_cfg, flags)
        out_dir = args.out or os.path.join("salz-out", experiment)
        summary = run(experiment, params, out_dir)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except NumericalError as err:
        print(f"numerical failure: {type(err).__name__}: {err}", file=sys.stderr)
        return 3
    except SalzError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    for c in summary["checks"]:
        status = "pass" if c["pass"] else "FAIL"
        print(f"[{status}] {c['name']}: value={c['value']:.6g} "
              f"tolerance={c['tolerance']:.6g}")
    print(f"wrote {len(summary['artifacts'])} artifact(s) to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
