"""Trajectory traces: fixed-schema numeric table + metadata header + event
footer, serialized with 17 significant digits so write -> read round-trips
every float64 bit-exactly.

The table is self-contained for offline verification: it carries the
controller/robot parameters in the header and per-row boundary fields, so the
verify pass never needs the scenario file.
"""

from typing import NamedTuple

import numpy as np

FORMAT_LINE = "slidenav-trace v1"

COLUMNS = (
    "t", "x", "y", "theta", "v", "u", "mode", "in_range",
    "d", "d_dot", "hx", "hy", "s_value", "s_star", "metric",
    "rsx", "rsy", "tx", "ty", "nx", "ny", "kappa",
    "v_n", "v_t", "a_n", "sigma", "xi", "s_dot", "mu",
)
_IDX = {name: i for i, name in enumerate(COLUMNS)}

# header keys, in canonical write order
META_KEYS = (
    "scenario", "backend", "outcome", "variant",
    "dt", "horizon", "gamma", "delta", "d0", "d_safe", "d_av",
    "d_minus", "d_plus", "v0", "v_cr", "d0_y", "d_cr",
    "theta_tol", "r_reach", "sensor_range", "epsilon_bl",
    "half_axle", "wheel_radius", "wheel_rate_max",
    "target_x", "target_y",
)
_STR_KEYS = {"scenario", "backend", "outcome", "variant"}


class Event(NamedTuple):
    t: float
    kind: str
    detail: str


class Trace:
    """Immutable-by-convention run record."""

    def __init__(self, data: np.ndarray, meta: dict, events: list[Event]):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != len(COLUMNS):
            raise ValueError(f"trace table must have {len(COLUMNS)} columns")
        self.data = data
        self.meta = dict(meta)
        self.events = list(events)

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, _IDX[name]]

    def fnum(self, key: str) -> float:
        return float(self.meta[key])

    def write(self, path) -> None:
        lines = [f"# {FORMAT_LINE}"]
        for k in META_KEYS:
            if k in self.meta:
                v = self.meta[k]
                lines.append(f"# {k} = {v if k in _STR_KEYS else repr(float(v))}")
        lines.append("# columns = " + ",".join(COLUMNS))
        fmt = " ".join(["%.17g"] * len(COLUMNS))
        for row in self.data:
            lines.append(fmt % tuple(row))
        for ev in self.events:
            lines.append(f"# event {ev.t!r} {ev.kind} {ev.detail}")
        lines.append("")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines))

    @classmethod
    def read(cls, path) -> "Trace":
        meta: dict = {}
        events: list[Event] = []
        rows = []
        with open(path, encoding="utf-8") as fh:
            first = fh.readline().strip()
            if first != f"# {FORMAT_LINE}":
                raise ValueError(f"not a trace file: first line {first!r}")
            for ln, raw in enumerate(fh, start=2):
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if body.startswith("event "):
                        parts = body.split(" ", 3)
                        if len(parts) < 3:
                            raise ValueError(f"bad event line {ln}")
                        events.append(Event(float(parts[1]), parts[2],
                                            parts[3] if len(parts) > 3 else ""))
                    elif "=" in body:
                        k, v = body.split("=", 1)
                        meta[k.strip()] = v.strip()
                    continue
                vals = line.split()
                if len(vals) != len(COLUMNS):
                    raise ValueError(
                        f"row at line {ln} has {len(vals)} fields, expected {len(COLUMNS)}")
                try:
                    rows.append([float(v) for v in vals])
                except ValueError:
                    raise ValueError(f"non-numeric field at line {ln}") from None
        cols = meta.pop("columns", None)
        if cols is not None and tuple(cols.split(",")) != COLUMNS:
            raise ValueError("trace column schema does not match this build")
        if not rows:
            raise ValueError("trace has no data rows")
        return cls(np.array(rows), meta, events)


def traces_equal(a: Trace, b: Trace) -> bool:
    """Bitwise row equality with nan == nan."""
    return a.data.shape == b.data.shape and bool(
        np.array_equal(a.data, b.data, equal_nan=True))


def first_mismatch(a: Trace, b: Trace) -> int:
    """Index of the first differing row, -1 if equal (shapes must match)."""
    n = min(len(a), len(b))
    same = np.all((a.data[:n] == b.data[:n])
                  | (np.isnan(a.data[:n]) & np.isnan(b.data[:n])), axis=1)
    if same.all():
        return -1 if len(a) == len(b) else n
    return int(np.argmin(same))
