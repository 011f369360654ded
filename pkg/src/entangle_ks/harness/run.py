"""Seeded orchestration of one experiment and emission of its result files."""

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .. import __version__
from ..classical import poincare_section
from ..ensemble import averaged_classical_entropy
from ..quantum import averaged_quantum_entropy
from ..tangent import ks_growth_prediction, lyapunov_spectrum
from .analysis import agreement_time, ehrenfest_time, gaussian_vs_histogram, occupied_fraction
from .fits import FitError, default_linear_window, fit_linear, fit_log

AGREEMENT_TOL = 0.25
SECTION_BINS = 50


def build_id():
    """Short content hash of the installed package sources."""
    root = Path(__file__).resolve().parent.parent
    h = hashlib.sha1(__version__.encode())
    for path in sorted(root.rglob("*.py")) + sorted(root.rglob("*.pyx")):
        h.update(path.relative_to(root).as_posix().encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:12]


class OutputError(OSError):
    pass


def _header(config):
    return [f"# config: {config.to_json()}", f"# build: {build_id()}"]


def _write_csv(path, config, columns, rows):
    try:
        with open(path, "w", newline="") as fh:
            for line in _header(config):
                fh.write(line + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_json(path, payload):
    try:
        with open(path, "w") as fh:
            json.dump(_finite(payload), fh, indent=2, sort_keys=True, default=_jsonable, allow_nan=False)
            fh.write("\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _finite(v):
    # strict JSON has no inf/nan; write them as strings
    if isinstance(v, dict):
        return {k: _finite(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_finite(x) for x in v]
    if isinstance(v, np.ndarray):
        return _finite(v.tolist())
    if isinstance(v, (float, np.floating)) and not math.isfinite(v):
        return str(float(v))
    return v


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"not JSON serializable: {type(v).__name__}")


def _fit(config, t, s):
    """Fit of ``s(t)`` per the config; returns the result dict or an error dict."""
    try:
        if config.fit_kind == "log":
            window = config.fit_window or (1.0, float(t[-1]))
            return fit_log(t, s, window).as_dict()
        window = config.fit_window or default_linear_window(t, s)
        return fit_linear(t, s, window).as_dict()
    except FitError as exc:
        return {"error": str(exc)}


def _spectrum(config):
    return lyapunov_spectrum(config.initial, config.a, config.c, config.lyapunov_steps, config.lyapunov_transient)


def _quantum(config, j):
    return averaged_quantum_entropy(j, config.a, config.c, config.n_steps, config.n_centers, config.seed,
                                    config.average_mode)


def _classical(config, hbar_c):
    return averaged_classical_entropy(config.a, config.c, hbar_c, config.n_steps, config.n_centers,
                                      config.n_traj, tuple(config.grid), config.seed)


def _run_poincare(config, out):
    pts = poincare_section(config.initial, config.a, config.c, config.n_steps, config.section_tol)
    _write_csv(out / "section.csv", config, ["theta1", "phi1", "theta2"], pts)
    return dict(n_points=len(pts), occupied_fraction=occupied_fraction(pts, SECTION_BINS),
                section_bins=SECTION_BINS, files=["section.csv"])


def _run_lyapunov(config, out):
    spec = _spectrum(config)
    sums, se = spec.pairing()
    _write_csv(out / "lyapunov.csv", config, ["block", "l1", "l2", "l3", "l4"],
               [[b, *r] for b, r in enumerate(spec.block_rates)])
    return dict(lyapunov=spec.as_dict(), pairing=dict(sums=sums, stderr=se), files=["lyapunov.csv"])


def _run_series(config, out, kind):
    summary = {"series": {}, "files": []}
    for j in config.j:
        hbar = config.hbar_for(j)
        series = _quantum(config, j) if kind == "quantum" else _classical(config, hbar)
        name = f"{kind}_j{_tag(j)}.csv"
        _write_csv(out / name, config, ["t", "S"], zip(series.times, series.values))
        summary["series"][_tag(j)] = dict(hbar=hbar, fit=_fit(config, series.times, series.values - series.values[0]))
        summary["files"].append(name)
    return summary


def _run_compare(config, out):
    spec = _spectrum(config)
    lam1 = max(float(spec.lambdas[0]), 0.0)
    summary = {"lyapunov": spec.as_dict(), "series": {}, "files": [], "agreement_tol": AGREEMENT_TOL}
    for j in config.j:
        hbar = config.hbar_for(j)
        q = _quantum(config, j).shifted()
        cl = _classical(config, hbar).shifted()
        t = q.times
        ks_line = ks_growth_prediction(spec, t)
        name = f"compare_j{_tag(j)}.csv"
        _write_csv(out / name, config, ["t", "S_q", "S_cl", "ks_line", "lambda1_line"],
                   zip(t, q.values, cl.values, ks_line, lam1 * t))
        t_e = ehrenfest_time(1.0 / j, lam1)
        horizon = max(3, int(t_e // 2)) if math.isfinite(t_e) else int(t[-1])
        inside = t <= horizon
        summary["series"][_tag(j)] = dict(
            hbar=1.0 / j,
            hbar_c=hbar,
            fit_quantum=_fit(config, t, q.values),
            fit_classical=_fit(config, t, cl.values),
            ehrenfest_time=t_e,
            comparison_horizon=horizon,
            max_difference=float(np.max(np.abs(q.values[inside] - cl.values[inside]))),
            agreement_time=agreement_time(t, q.values, cl.values, AGREEMENT_TOL),
        )
        summary["files"].append(name)
    return summary


def _run_gaussian(config, out):
    hbar_c = config.hbar_c if config.hbar_c is not None else 1.0 / config.j[0]
    res = gaussian_vs_histogram(config.initial, config.a, config.c, hbar_c, config.n_steps, config.n_traj,
                                tuple(config.grid), config.seed)
    _write_csv(out / "gaussian.csv", config, ["t", "S_gauss", "S_hist", "cloud_diameter", "log_det_d"],
               zip(res["t"], res["gaussian"], res["histogram"], res["diameter"], res["log_det_d"]))
    diff = np.abs(res["gaussian"] - res["histogram"])
    return dict(hbar_c=hbar_c, max_difference=float(diff.max()), max_diameter=float(res["diameter"].max()),
                files=["gaussian.csv"])


def _tag(j):
    return str(int(j)) if float(j).is_integer() else f"{float(j):g}"


_MODES = {
    "poincare": _run_poincare,
    "lyapunov": _run_lyapunov,
    "quantum": lambda cfg, out: _run_series(cfg, out, "quantum"),
    "classical": lambda cfg, out: _run_series(cfg, out, "classical"),
    "compare": _run_compare,
    "gaussian": _run_gaussian,
}


def run(config, out=None):
    """Validate ``config``, run its mode and write the result files into ``out``.

    Returns the summary dict that is also written to ``summary.json``.
    """
    config.validate()
    out = Path(out if out is not None else config.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    summary = _MODES[config.mode](config, out)
    summary = dict(summary, mode=config.mode, config=config.to_dict(), build=build_id(), version=__version__)
    _write_json(out / "summary.json", summary)
    return summary


__all__ = ["run", "build_id", "OutputError"]
