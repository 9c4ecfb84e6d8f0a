"""File formats.

Benchmark CSV
    Header ``method,j_m,k_m,beta,capacity_mean,capacity_std,rel_error,
    wall_time_s,trials,seed`` then one row per record in emission order.
    UTF-8, LF line endings, floats written with 17 significant digits,
    missing ``rel_error`` written as an empty field.

Scenario dump
    ``#``-prefixed ``key=value`` lines carrying the full config, followed by
    one node per line: ``bs|user,x,y,cluster_index``.
"""

import csv
import io
from dataclasses import astuple, dataclass, fields

import numpy as np

from tosecap.config import ScenarioConfig, parse_config_text
from tosecap.errors import InvalidParameterError, ReportIOError
from tosecap.geometry import NetworkScenario

CSV_HEADER = ("method", "j_m", "k_m", "beta", "capacity_mean", "capacity_std",
              "rel_error", "wall_time_s", "trials", "seed")


@dataclass(frozen=True)
class BenchmarkRecord:
    method: str
    j_m: int
    k_m: int
    beta: float
    capacity_mean: float
    capacity_std: float
    rel_error: float | None
    wall_time_s: float
    trials: int
    seed: int


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def format_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_fmt(v) for v in astuple(r)])
    return buf.getvalue()


def emit_csv(records, path):
    text = format_csv(records)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc}", path) from exc


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise InvalidParameterError("missing or unexpected CSV header")
    casts = {f.name: f.type for f in fields(BenchmarkRecord)}
    out = []
    for row in rows[1:]:
        if len(row) != len(CSV_HEADER):
            raise InvalidParameterError(f"expected {len(CSV_HEADER)} fields, got {len(row)}")
        kw = {}
        for name, raw in zip(CSV_HEADER, row):
            if name == "rel_error":
                kw[name] = float(raw) if raw else None
            else:
                kw[name] = casts[name](raw)
        out.append(BenchmarkRecord(**kw))
    return out


def read_csv(path):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return parse_csv(fh.read())
    except OSError as exc:
        raise ReportIOError(f"cannot read {path}: {exc}", path) from exc


def dump_scenario(scenario: NetworkScenario, path):
    lines = ["# tosecap scenario"]
    cfg = scenario.config or ScenarioConfig(area_shape=scenario.area_shape, D=scenario.D,
                                            M=scenario.num_clusters)
    lines += [f"# {k}={v}" for k, v in cfg.to_items()]
    for kind, pos, lab in (("bs", scenario.bs_positions, scenario.cluster_of_bs),
                           ("user", scenario.user_positions, scenario.cluster_of_user)):
        lines += [f"{kind},{x!r},{y!r},{int(c)}" for (x, y), c in zip(pos.tolist(), lab)]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc}", path) from exc


def load_scenario(path) -> NetworkScenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ReportIOError(f"cannot read {path}: {exc}", path) from exc
    header, nodes = [], {"bs": ([], []), "user": ([], [])}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                header.append(body)
            continue
        parts = line.split(",")
        if len(parts) != 4 or parts[0] not in nodes:
            raise InvalidParameterError(f"{path}:{lineno}: malformed node line {line!r}")
        pos, lab = nodes[parts[0]]
        pos.append((float(parts[1]), float(parts[2])))
        lab.append(int(parts[3]))
    cfg = ScenarioConfig(**parse_config_text("\n".join(header)))
    bs_pos, bs_lab = nodes["bs"]
    u_pos, u_lab = nodes["user"]
    return NetworkScenario(
        np.array(bs_pos, dtype=float).reshape(-1, 2),
        np.array(u_pos, dtype=float).reshape(-1, 2),
        cfg.area_shape, cfg.D,
        np.array(bs_lab, dtype=int), np.array(u_lab, dtype=int),
        cfg.M, cfg)
