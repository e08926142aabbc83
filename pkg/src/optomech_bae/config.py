"""key=value run configurations for the ``simulate`` front end."""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import asdict, dataclass, fields

from .errors import DegeneratePumps, ParseError, ValidationError
from .model import ProbeParams, SystemParams, bogolyubov
from .floquet import DEFAULT_K
from .spectra import DEFAULT_GRID_POINTS, READOUT_TABLE

SYSTEM_KEYS = tuple(f.name for f in fields(SystemParams))
PROBE_KEYS = ("G_p", "G_q", "phi_p", "phi_q", "lambda")


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    probe: ProbeParams
    theta: float = 0.0
    readout_row: int = 0           # 0 = use theta/phi_p/phi_q as given
    probe_scale: float = 1e-3     # probe amplitude in units of calG when G_p/G_q are absent
    grid_points: int = DEFAULT_GRID_POINTS
    window: float = 0.0           # half-width; 0 = 50 Gamma_eff
    ratio_min: float = 0.0
    ratio_max: float = 0.99
    ratio_count: int = 25
    oracle_K: int = DEFAULT_K
    method: str = "DirectQuadrature"

    def ratios(self) -> list[float]:
        if self.ratio_count == 1:
            return [self.ratio_min]
        step = (self.ratio_max - self.ratio_min) / (self.ratio_count - 1)
        return [self.ratio_min + i * step for i in range(self.ratio_count)]

    def with_readout_row(self) -> "RunConfig":
        """Config with theta and the probe phases taken from the selected readout-table row."""
        if not self.readout_row:
            return self
        row = READOUT_TABLE[self.readout_row - 1]
        from dataclasses import replace
        return replace(self, theta=row.theta,
                       probe=self.probe.replace(phi_p=row.phi_p, phi_q=row.phi_q))


_OPTION_TYPES = {
    "theta": float, "readout_row": int, "probe_scale": float, "grid_points": int,
    "window": float, "ratio_min": float, "ratio_max": float, "ratio_count": int,
    "oracle_K": int, "method": str,
}
KNOWN_KEYS = SYSTEM_KEYS + PROBE_KEYS + ("n_c",) + tuple(_OPTION_TYPES)

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PI_EXPR = re.compile(rf"^\s*(?P<sign>[+-]?)\s*(?:(?P<num>{_NUM})\s*\*?\s*)?pi\s*(?:/\s*(?P<den>{_NUM}))?\s*$")


def _parse_float(key: str, text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_EXPR.match(text)
    if m:
        val = float(m["num"]) if m["num"] else 1.0
        val *= math.pi
        if m["den"]:
            den = float(m["den"])
            if den == 0:
                raise ParseError(f"{key}: division by zero in {text!r}")
            val /= den
        return -val if m["sign"] == "-" else val
    raise ParseError(f"{key}: cannot parse {text!r} as a number")


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ParseError(f"{key}: expected an integer, got {text!r}") from None


def parse_config(text: str) -> RunConfig:
    """Parse key=value lines ('#' starts a comment) into a validated RunConfig."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        # allow several comma-separated pairs on one line
        for item in filter(None, (s.strip() for s in line.split(","))):
            if "=" not in item:
                raise ParseError(f"line {lineno}: expected key=value, got {item!r}")
            key, value = (s.strip() for s in item.split("=", 1))
            if key not in KNOWN_KEYS:
                raise ParseError(f"line {lineno}: unknown key {key!r}")
            if key in raw:
                raise ParseError(f"line {lineno}: duplicate key {key!r}")
            raw[key] = value
    return build_config(raw)


def build_config(raw: dict[str, str]) -> RunConfig:
    sysvals = {}
    for key in SYSTEM_KEYS:
        if key in raw:
            sysvals[key] = _parse_float(key, raw[key])
    if "n_c" in raw:
        if "n_E" in raw or "n_I" in raw:
            raise ValidationError("n_c: cannot be combined with n_E or n_I")
        sysvals["n_E"] = sysvals["n_I"] = _parse_float("n_c", raw["n_c"])
    params = SystemParams(**sysvals)
    try:
        calG = bogolyubov(params).calG
    except DegeneratePumps:
        raise ValidationError(
            f"G_minus > G_plus required, got G_minus={params.G_minus!r}, "
            f"G_plus={params.G_plus!r}") from None

    opts = {}
    for key, typ in _OPTION_TYPES.items():
        if key in raw:
            opts[key] = _parse_int(key, raw[key]) if typ is int else (
                raw[key].strip() if typ is str else _parse_float(key, raw[key]))
    scale = opts.get("probe_scale", 1e-3)
    if scale < 0:
        raise ValidationError("probe_scale: must be >= 0")
    pv = {"G_p": scale * calG, "G_q": scale * calG, "phi_p": 0.0, "phi_q": 0.0, "lam": 1.0}
    for key in PROBE_KEYS:
        if key in raw:
            pv["lam" if key == "lambda" else key] = _parse_float(key, raw[key])
    probe = ProbeParams(**pv)

    cfg = RunConfig(params=params, probe=probe, **opts)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if not 0 <= cfg.readout_row <= len(READOUT_TABLE):
        raise ValidationError(f"readout_row: must be 0..{len(READOUT_TABLE)}")
    if cfg.grid_points < 2:
        raise ValidationError("grid_points: must be >= 2")
    if cfg.window < 0:
        raise ValidationError("window: must be >= 0")
    if cfg.ratio_count < 1:
        raise ValidationError("ratio_count: must be >= 1")
    if not (0 <= cfg.ratio_min <= cfg.ratio_max < 1):
        raise ValidationError("ratio_min, ratio_max: need 0 <= ratio_min <= ratio_max < 1")
    if cfg.oracle_K < 2:
        raise ValidationError("oracle_K: must be >= 2")
    if cfg.method not in ("DirectQuadrature", "OutputExtraction"):
        raise ValidationError("method: must be DirectQuadrature or OutputExtraction")


def serialize_config(cfg: RunConfig) -> str:
    """Fully resolved config text; ``parse_config`` returns an equal RunConfig."""
    lines = [f"{k}={v!r}" for k, v in asdict(cfg.params).items()]
    p = cfg.probe
    lines += [f"G_p={p.G_p!r}", f"G_q={p.G_q!r}", f"phi_p={p.phi_p!r}",
              f"phi_q={p.phi_q!r}", f"lambda={p.lam!r}"]
    for key in _OPTION_TYPES:
        v = getattr(cfg, key)
        lines.append(f"{key}={v}" if isinstance(v, str) else f"{key}={v!r}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()
