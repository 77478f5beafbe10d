"""Measurement ingest: run CSVs, network-rate logs, and run averaging.

Measurement CSV
    UTF-8, comma separated, header exactly
    ``app,maps,reduces,input_bytes,run,shuffle_bytes``. All numeric columns
    are integers except ``shuffle_bytes``, which may be a non-negative decimal.

Network-rate log
    One sample per line with whitespace-separated columns
    ``timestamp interface rxkB/s txkB/s``. Lines starting with ``#`` and blank
    lines are ignored. kB means 1000 bytes.
"""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    EmptyInput,
    MissingHeader,
    MixedInputSize,
    NegativeValue,
    NonMonotonicTimestamps,
    ParseError,
    TooFewSamples,
    UnknownInterface,
    WindowOutOfRange,
)
from .model import Observation, ParameterVector, ProfileDataset
from .records import RunRecord

CSV_COLUMNS = ("app", "maps", "reduces", "input_bytes", "run", "shuffle_bytes")
CSV_HEADER = ",".join(CSV_COLUMNS)
KILO = 1000.0


# -- measurement CSV ----------------------------------------------------------

def _int_field(value: str, line: int, column: str, minimum: int = 0) -> int:
    try:
        n = int(value.strip())
    except ValueError:
        raise ParseError(f"expected an integer, got {value!r}", line=line, field=column) from None
    if n < 0:
        raise NegativeValue(f"value {n} is negative", line=line, field=column)
    if n < minimum:
        raise ParseError(f"value {n} is below the minimum {minimum}", line=line, field=column)
    return n


def _load_field(value: str, line: int) -> float:
    try:
        x = float(value.strip())
    except ValueError:
        raise ParseError(f"expected a number, got {value!r}", line=line,
                         field="shuffle_bytes") from None
    if not math.isfinite(x):
        raise ParseError(f"value {value!r} is not finite", line=line, field="shuffle_bytes")
    if x < 0:
        raise NegativeValue(f"value {x} is negative", line=line, field="shuffle_bytes")
    return x


def parse_measurements_csv(text: str) -> list[RunRecord]:
    lines = text.lstrip("\ufeff").splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        found = lines[0].strip() if lines else ""
        raise MissingHeader(f"expected header {CSV_HEADER!r}, found {found!r}", line=1)

    records = []
    for lineno, row in enumerate(csv.reader(lines[1:]), start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ParseError(f"expected {len(CSV_COLUMNS)} columns, found {len(row)}", line=lineno)
        app, maps, reduces, input_bytes, run, load = row
        records.append(RunRecord(
            num_maps=_int_field(maps, lineno, "maps", minimum=1),
            num_reduces=_int_field(reduces, lineno, "reduces", minimum=1),
            input_bytes=_int_field(input_bytes, lineno, "input_bytes"),
            run_index=_int_field(run, lineno, "run"),
            shuffle_bytes=_load_field(load, lineno),
            app=app.strip(),
        ))
    return records


def format_load(x: float) -> str:
    """Shortest text that parses back to exactly ``x``."""
    x = float(x)
    if x.is_integer():
        return str(int(x))
    return repr(x)


def serialize_measurements_csv(records: Iterable[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([rec.app, rec.num_maps, rec.num_reduces, rec.input_bytes,
                         rec.run_index, format_load(rec.shuffle_bytes)])
    return buf.getvalue()


def serialize_profile_csv(dataset: ProfileDataset) -> str:
    """Averaged dataset as ``maps,reduces,load`` (one row per configuration)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["maps", "reduces", "load"])
    for obs in dataset.observations:
        writer.writerow([*obs.config.values, format_load(obs.load)])
    return buf.getvalue()


# -- run averaging ------------------------------------------------------------

def _mean(values: list[float]) -> float:
    # fsum is exactly rounded, so the mean does not depend on record order;
    # the division can still round one ulp outside the data range
    return min(max(math.fsum(values) / len(values), min(values)), max(values))


def aggregate_runs(records: Sequence[RunRecord]) -> ProfileDataset:
    """Average repeated runs into one observation per (maps, reduces), sorted."""
    records = list(records)
    if not records:
        raise EmptyInput("no run records to aggregate")
    sizes = {rec.input_bytes for rec in records}
    if len(sizes) > 1:
        raise MixedInputSize(f"records span several input sizes: {sorted(sizes)}")

    groups: dict[tuple[int, int], list[float]] = defaultdict(list)
    for rec in records:
        groups[rec.config].append(rec.shuffle_bytes)
    obs = tuple(Observation(ParameterVector(cfg), _mean(loads))
                for cfg, loads in sorted(groups.items()))
    apps = sorted({rec.app for rec in records if rec.app})
    return ProfileDataset(obs, input_bytes=sizes.pop(), meta=",".join(apps))


# -- network-rate logs --------------------------------------------------------

@dataclass(frozen=True)
class NetRateSample:
    timestamp: float
    rx_rate: float
    tx_rate: float
    interface: str

    @property
    def total_rate(self) -> float:
        return self.rx_rate + self.tx_rate


@dataclass(frozen=True)
class ShuffleWindow:
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"window end {self.t_end} must be after start {self.t_start}")


def parse_net_rate_log(text: str, interface: str) -> list[NetRateSample]:
    samples = []
    seen_any = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"expected 4 columns, found {len(parts)}", line=lineno)
        seen_any = True
        ts, iface, rx, tx = parts
        if iface != interface:
            continue
        values = []
        for name, tok in (("timestamp", ts), ("rxkB/s", rx), ("txkB/s", tx)):
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(f"expected a number, got {tok!r}", line=lineno, field=name) from None
            if not math.isfinite(v):
                raise ParseError(f"value {tok!r} is not finite", line=lineno, field=name)
            values.append(v)
        t, rx_k, tx_k = values
        if rx_k < 0 or tx_k < 0:
            raise NegativeValue("rates must be non-negative", line=lineno)
        if samples and t <= samples[-1].timestamp:
            raise NonMonotonicTimestamps(
                f"line {lineno}: timestamp {t} does not follow {samples[-1].timestamp}"
            )
        samples.append(NetRateSample(t, rx_k * KILO, tx_k * KILO, iface))
    if not samples:
        what = "log has no samples" if not seen_any else f"no samples for interface {interface!r}"
        raise UnknownInterface(what)
    return samples


def _rate_at(t: float, t0: float, f0: float, t1: float, f1: float) -> float:
    if t == t0:
        return f0
    if t == t1:
        return f1
    return f0 + (f1 - f0) * (t - t0) / (t1 - t0)


def integrate_window(samples: Sequence[NetRateSample], window) -> float:
    """Bytes moved during ``window``: trapezoidal integral of rx + tx rate.

    Rates between samples are linear, so window edges that fall between two
    samples are interpolated.
    """
    if not isinstance(window, ShuffleWindow):
        window = ShuffleWindow(*window)
    if len(samples) < 2:
        raise TooFewSamples(f"need at least 2 samples, got {len(samples)}")
    first, last = samples[0].timestamp, samples[-1].timestamp
    if window.t_start < first or window.t_end > last:
        raise WindowOutOfRange(
            f"window [{window.t_start}, {window.t_end}] outside samples [{first}, {last}]"
        )

    total = 0.0
    for s0, s1 in zip(samples, samples[1:]):
        t0, t1 = s0.timestamp, s1.timestamp
        lo, hi = max(window.t_start, t0), min(window.t_end, t1)
        if hi <= lo:
            continue
        f0, f1 = s0.total_rate, s1.total_rate
        total += (hi - lo) * (_rate_at(lo, t0, f0, t1, f1) + _rate_at(hi, t0, f0, t1, f1)) / 2.0
    return total
