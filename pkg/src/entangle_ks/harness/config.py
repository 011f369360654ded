"""Experiment configuration, validation and named presets."""

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace

MODES = ("poincare", "quantum", "classical", "gaussian", "lyapunov", "compare")
FIG1_START = [math.pi / 4, 0.0, 3 * math.pi / 4, 0.0]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    mode: str = "compare"
    a: float = 5.0
    c: float = 3.0
    j: list = field(default_factory=lambda: [50])
    hbar_c: float | None = None  # None: hbar_c = hbar = 1/j for every j
    n_steps: int = 14
    n_centers: int = 16
    n_traj: int = 100_000
    grid: list = field(default_factory=lambda: [2000, 2000])
    seed: int = 0
    output: str = "out"
    average_mode: str = "entropy"
    fit_kind: str = "linear"
    fit_window: list | None = None  # None: default window rule of the fit kind
    initial: list = field(default_factory=lambda: list(FIG1_START))
    section_tol: float = 0.01
    lyapunov_steps: int = 1_000_000
    lyapunov_transient: int = 1000
    preset: str | None = None

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"{name}: {why} (got {getattr(self, name)!r})")

        if self.mode not in MODES:
            bad("mode", f"must be one of {', '.join(MODES)}")
        for name in ("a", "c", "section_tol"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                bad(name, "must be a finite number")
        if self.section_tol <= 0:
            bad("section_tol", "must be positive")
        if not isinstance(self.j, list) or not self.j:
            bad("j", "must be a non-empty list of spins")
        for j in self.j:
            if not isinstance(j, (int, float)) or j < 0.5 or abs(2 * j - round(2 * j)) > 1e-12:
                bad("j", "every entry must be a positive half-integer")
        if self.hbar_c is not None and not (isinstance(self.hbar_c, (int, float)) and self.hbar_c > 0):
            bad("hbar_c", "must be positive or null")
        for name, lo in (("n_steps", 1), ("n_centers", 1), ("n_traj", 1000), ("lyapunov_steps", 1),
                         ("lyapunov_transient", 0), ("seed", 0)):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < lo:
                bad(name, f"must be an integer >= {lo}")
        if len(self.grid) != 2 or any(not isinstance(g, int) or g < 1 for g in self.grid):
            bad("grid", "must be two positive integers [n_q, n_p]")
        if self.average_mode not in ("entropy", "purity"):
            bad("average_mode", "must be 'entropy' or 'purity'")
        if self.fit_kind not in ("linear", "log"):
            bad("fit_kind", "must be 'linear' or 'log'")
        if self.fit_window is not None:
            if len(self.fit_window) != 2 or not self.fit_window[0] < self.fit_window[1]:
                bad("fit_window", "must be [lo, hi] with lo < hi")
        if len(self.initial) != 4 or not all(isinstance(v, (int, float)) for v in self.initial):
            bad("initial", "must be four angles [theta1, phi1, theta2, phi2]")
        if not isinstance(self.output, str) or not self.output:
            bad("output", "must be a non-empty path")
        return self

    def hbar_for(self, j):
        return self.hbar_c if self.hbar_c is not None else 1.0 / j

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        data = dict(data)
        if "j" in data and not isinstance(data["j"], list):
            data["j"] = [data["j"]]
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def parse_assignment(text):
    """``key=value`` with ``value`` read as JSON when possible, else as a string."""
    if "=" not in text:
        raise ConfigError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def apply_overrides(config, assignments):
    data = config.to_dict()
    for text in assignments:
        key, value = parse_assignment(text)
        if key not in data:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "j" and not isinstance(value, list):
            value = [value]
        data[key] = value
    return ExperimentConfig.from_dict(data)


_FIG2 = dict(mode="compare", a=5.0, j=[50, 100], n_steps=14, n_centers=16, n_traj=100_000, grid=[2000, 2000])
_FIG3 = dict(mode="compare", a=5.0, c=0.5, j=[25, 100], n_steps=100, n_centers=16, n_traj=100_000,
             grid=[2000, 2000], fit_kind="log", fit_window=[10, 100])

PRESETS = {
    "fig1a": dict(mode="poincare", a=5.0, c=3.0, initial=FIG1_START, n_steps=1_000_000),
    "fig1b": dict(mode="poincare", a=5.0, c=0.5, initial=FIG1_START, n_steps=1_000_000),
    "fig2a": dict(_FIG2, c=3.0),
    "fig2b": dict(_FIG2, c=5.0),
    "fig3": dict(_FIG3),
    "fig2a-full": dict(_FIG2, c=3.0, n_traj=10_000_000),
    "fig2b-full": dict(_FIG2, c=5.0, n_traj=10_000_000),
    "fig3-full": dict(_FIG3, n_traj=10_000_000),
    "gaussian": dict(mode="gaussian", a=5.0, c=3.0, hbar_c=1e-3, n_steps=6, n_traj=100_000),
    "lyapunov-c3": dict(mode="lyapunov", a=5.0, c=3.0),
    "lyapunov-c5": dict(mode="lyapunov", a=5.0, c=5.0),
}


def preset(name):
    try:
        values = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
    return replace(ExperimentConfig(), **copy.deepcopy(values), preset=name)
