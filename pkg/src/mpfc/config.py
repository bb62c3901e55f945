"""Plain-text run configuration: ``key = value`` lines, ``#`` comments.

The ``mode`` key may repeat; each occurrence is one cosine term
``amplitude kx ky phase_x phase_y`` of the initial condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .grid import GridFunction, Params, cosine_modes
from .verify import DEFAULT_CONSTANT, DEFAULT_MODES

REQUIRED = ("m", "n", "h", "s", "T", "alpha", "beta")
DEFAULTS = {
    "Lx": None,
    "Ly": None,
    "tol_rel": 1e-10,
    "tol_abs": 1e-13,
    "max_newton": 50,
    "ic": "default",
    "ic_constant": 0.0,
    "out": "mpfc_out",
    "snapshot_interval": 100,
    "trace_interval": 1,
    "seed": 20240101,
}
_INT_KEYS = {"m", "n", "max_newton", "snapshot_interval", "trace_interval", "seed"}
_FLOAT_KEYS = {"h", "s", "T", "alpha", "beta", "Lx", "Ly", "tol_rel", "tol_abs", "ic_constant"}
PRESETS = ("default", "constant", "modes")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    params: Params
    ic: str = "default"
    ic_constant: float = 0.0
    modes: list[tuple[float, int, int, float, float]] = field(default_factory=list)
    out: str = "mpfc_out"
    snapshot_interval: int = 100
    trace_interval: int = 1
    seed: int = 20240101

    def initial_data(self, params: Params | None = None) -> GridFunction:
        p = params or self.params
        if self.ic == "default":
            return cosine_modes(p, DEFAULT_CONSTANT, DEFAULT_MODES)
        return cosine_modes(p, self.ic_constant, self.modes)

    def resolved_text(self) -> str:
        """Every setting, defaults included, in the input format."""
        p = self.params
        lines = [f"{k} = {getattr(p, k)!r}" for k in ("m", "n", "h", "s", "T", "alpha", "beta", "Lx", "Ly", "tol_rel", "tol_abs", "max_newton")]
        lines += [f"ic = {self.ic}", f"ic_constant = {self.ic_constant!r}"]
        lines += [f"mode = {a!r} {kx} {ky} {px!r} {py!r}" for a, kx, ky, px, py in self.modes]
        lines += [
            f"out = {self.out}",
            f"snapshot_interval = {self.snapshot_interval}",
            f"trace_interval = {self.trace_interval}",
            f"seed = {self.seed}",
        ]
        return "\n".join(lines) + "\n"


def _convert(key, raw, where):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: {key} = {raw!r} is not a valid number") from None
    return raw


def _parse_mode(raw, where):
    parts = raw.replace(",", " ").split()
    if len(parts) not in (3, 5):
        raise ConfigError(f"{where}: mode needs 'amplitude kx ky [phase_x phase_y]', got {raw!r}")
    try:
        a = float(parts[0])
        kx, ky = int(parts[1]), int(parts[2])
        px, py = (float(parts[3]), float(parts[4])) if len(parts) == 5 else (0.0, 0.0)
    except ValueError:
        raise ConfigError(f"{where}: malformed mode {raw!r}") from None
    return (a, kx, ky, px, py)


def parse_text(text: str, source: str = "<config>") -> dict:
    """Parse config text into raw values keyed by name; line numbers kept for error messages."""
    values, lines, modes = {}, {}, []
    known = set(REQUIRED) | set(DEFAULTS) | {"mode"}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key, raw = (t.strip() for t in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key == "mode":
            modes.append((_parse_mode(raw, where), where))
            continue
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r} (first set at line {lines[key]})")
        values[key] = _convert(key, raw, where)
        lines[key] = lineno
    return {"values": values, "lines": lines, "modes": modes, "source": source}


def build_config(parsed: dict, overrides: dict | None = None) -> RunConfig:
    values = dict(parsed["values"])
    lines = parsed["lines"]
    source = parsed["source"]
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})

    def where(key):
        return f"{source}:{lines[key]}" if key in lines else source

    missing = [k for k in REQUIRED if k not in values]
    if missing:
        defaults = ", ".join(f"{k}={v}" for k, v in DEFAULTS.items())
        raise ConfigError(f"{source}: missing required key(s) {', '.join(missing)}; optional keys with defaults: {defaults}")
    for key, default in DEFAULTS.items():
        values.setdefault(key, default)

    if values["beta"] < 0:
        raise ConfigError(f"{where('beta')}: beta = {values['beta']} violates beta >= 0")
    if not values["alpha"] > 0:
        raise ConfigError(f"{where('alpha')}: alpha = {values['alpha']} violates alpha > 0")
    for key in ("snapshot_interval", "trace_interval"):
        if values[key] < 1:
            raise ConfigError(f"{where(key)}: {key} must be >= 1")
    if values["ic"] not in PRESETS:
        raise ConfigError(f"{where('ic')}: ic must be one of {', '.join(PRESETS)}")

    try:
        params = Params(**{k: values[k] for k in ("m", "n", "h", "s", "T", "alpha", "beta", "Lx", "Ly", "tol_rel", "tol_abs", "max_newton")})
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    modes = []
    for mode, mode_where in parsed["modes"]:
        _, kx, ky, _, _ = mode
        if abs(kx) > params.m / 2:
            raise ConfigError(f"{mode_where}: kx = {kx} is not resolvable on m = {params.m} (|kx| <= m/2)")
        if abs(ky) > params.n / 2:
            raise ConfigError(f"{mode_where}: ky = {ky} is not resolvable on n = {params.n} (|ky| <= n/2)")
        modes.append(mode)
    ic = values["ic"]
    if modes and "ic" not in lines:
        ic = "modes"
    if ic != "modes" and modes:
        raise ConfigError(f"{where('ic')}: mode lines given but ic = {ic}")
    return RunConfig(
        params=params,
        ic=ic,
        ic_constant=values["ic_constant"],
        modes=modes,
        out=str(values["out"]),
        snapshot_interval=values["snapshot_interval"],
        trace_interval=values["trace_interval"],
        seed=values["seed"],
    )


def parse_config(path=None, text: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Read and validate a config file (or text)."""
    if text is None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        source = str(path)
    else:
        source = "<config>"
    return build_config(parse_text(text, source), overrides)
