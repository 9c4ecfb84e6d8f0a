"""Experiment configuration and the flat ``key=value`` manifest format."""

from dataclasses import dataclass, fields, replace
from enum import Enum

from tosecap.errors import InvalidParameterError, ReportIOError


class AreaShape(str, Enum):
    SQUARE = "square"  # side D, uniform nodes
    DISK = "disk"  # diameter D, truncated normal nodes


class RedrawMode(str, Enum):
    FADING_ONLY = "fading"
    FADING_AND_GEOMETRY = "all"


@dataclass(frozen=True)
class ScenarioConfig:
    """All knobs of one experiment. Defaults follow the paper's network setting.

    ``sigma`` only applies to the disk layout; ``None`` means ``D / 4``.
    """

    area_shape: AreaShape = AreaShape.SQUARE
    D: float = 800.0
    d0: float = 10.0
    d1: float = 50.0
    P: float = 1.0
    N0: float = 1e-12
    M: int = 25
    J: int = 2500
    beta: float = 0.5
    spike_ratio: float = 0.7
    trials: int = 200
    redraw_mode: RedrawMode = RedrawMode.FADING_ONLY
    seed: int = 0
    sigma: float | None = None
    kmeans_iters: int = 100
    max_retries: int = 20

    def __post_init__(self):
        object.__setattr__(self, "area_shape", AreaShape(self.area_shape))
        object.__setattr__(self, "redraw_mode", RedrawMode(self.redraw_mode))

    @property
    def K(self) -> int:
        return int(round(self.beta * self.J))

    @property
    def disk_sigma(self) -> float:
        return self.D / 4.0 if self.sigma is None else self.sigma

    def validate(self) -> "ScenarioConfig":
        checks = [
            (self.D > 0, "D must be positive"),
            (0 < self.d0 < self.d1, "need 0 < d0 < d1"),
            (self.P > 0, "P must be positive"),
            (self.N0 > 0, "N0 must be positive"),
            (self.M >= 1, "M must be >= 1"),
            (self.beta > 0, "beta must be positive"),
            (self.J >= self.M, "need J >= M"),
            (self.K >= self.M, "need K = round(beta*J) >= M"),
            (0 < self.spike_ratio <= 1, "spike_ratio must lie in (0, 1]"),
            (self.trials >= 1, "trials must be >= 1"),
            (self.sigma is None or self.sigma > 0, "sigma must be positive"),
            (self.kmeans_iters >= 1, "kmeans_iters must be >= 1"),
            (self.max_retries >= 1, "max_retries must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidParameterError(msg)
        return self

    def with_overrides(self, **kw) -> "ScenarioConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_items(self) -> list[tuple[str, str]]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Enum):
                v = v.value
            elif isinstance(v, float):
                v = repr(v)
            out.append((f.name, "" if v is None else str(v)))
        return out


def _coerce(name, raw):
    kinds = {f.name: f.type for f in fields(ScenarioConfig)}
    if name not in kinds:
        raise InvalidParameterError(f"unknown config key {name!r}")
    raw = raw.strip()
    kind = kinds[name]
    try:
        if name == "sigma":
            return None if raw in ("", "None") else float(raw)
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
    except ValueError as exc:
        raise InvalidParameterError(f"bad value for {name}: {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment, blank lines ignored."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"line {lineno}: expected key=value")
        key, raw = line.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), raw)
    return values


def load_config(path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ReportIOError(f"cannot read config {path}: {exc}", path) from exc
    base = base or ScenarioConfig()
    try:
        return replace(base, **parse_config_text(text))
    except ValueError as exc:
        raise InvalidParameterError(str(exc)) from exc
