"""CSV ingestion: location records, labeled records and stays."""

from __future__ import annotations

import re
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from ..errors import IngestError, RangeError, UnsortedInput
from ..models import TRANSIENT, DayTrajectory, LabeledRecord, LocationRecord, Stay, StaySource, split_days
from ..schemas import IngestConfig

RECORD_COLUMNS = ["device_id", "timestamp", "lat", "lon", "accuracy_m"]
LABEL_COLUMNS = ["stay_lat", "stay_lon", "stay_duration_min", "stay_index"]
LABELED_COLUMNS = RECORD_COLUMNS + LABEL_COLUMNS
STAY_COLUMNS = ["device_id", "centroid_lat", "centroid_lon", "start", "end", "duration_min", "record_count", "source"]

Corpus = dict[str, list[LocationRecord]]

_PARSER_LINE = re.compile(r"line (\d+)")


def _read_text_frame(path: Path, required: Sequence[str]) -> pd.DataFrame:
    """All columns as strings; an empty file yields an empty frame."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_values=[], skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=list(required))
    except pd.errors.ParserError as exc:
        match = _PARSER_LINE.search(str(exc))
        raise IngestError(f"malformed row: {exc}", str(path), int(match.group(1)) if match else None)
    except OSError as exc:
        raise IngestError(f"cannot read: {exc.strerror or exc}", str(path))
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise IngestError(f"missing column(s) {missing}; header must start with {','.join(required)}", str(path), 1)
    return frame


def _line(frame: pd.DataFrame, mask) -> int:
    """1-based file line of the first row flagged in ``mask`` (header is line 1)."""
    return int(np.flatnonzero(np.asarray(mask))[0]) + 2


def _numeric(frame: pd.DataFrame, column: str, path: Path, integral: bool = False) -> pd.Series:
    text = frame[column].fillna("").str.strip()
    values = pd.to_numeric(text, errors="coerce")
    bad = values.isna()
    if integral:
        bad |= values.notna() & (values % 1 != 0)
    if bad.any():
        line = _line(frame, bad)
        raise IngestError(f"column '{column}': cannot parse {frame[column].iloc[line - 2]!r}", str(path), line)
    if integral:
        return values.astype("int64")
    # pandas' fast parser can be an ulp off; Python's float() reads repr output exactly
    return text.map(float).astype(float)


def _timestamps(frame: pd.DataFrame, column: str, path: Path, iso: bool) -> pd.Series:
    if not iso:
        return _numeric(frame, column, path, integral=True)
    parsed = pd.to_datetime(frame[column].fillna("").str.strip(), utc=True, errors="coerce", format="ISO8601")
    if parsed.isna().any():
        line = _line(frame, parsed.isna())
        raise IngestError(f"column '{column}': not an ISO-8601 time", str(path), line)
    return (parsed - pd.Timestamp(0, tz="UTC")) // pd.Timedelta(seconds=1)


def _check_range(frame: pd.DataFrame, mask, detail: str, path: Path):
    if np.asarray(mask).any():
        raise RangeError(detail, str(path), _line(frame, mask))


def _record_frame(path: Path, cfg: IngestConfig, extra: Sequence[str] = ()) -> pd.DataFrame:
    raw = _read_text_frame(path, RECORD_COLUMNS + list(extra))
    if raw.empty:
        return pd.DataFrame(columns=RECORD_COLUMNS)
    device = raw["device_id"].fillna("").str.strip()
    if (device == "").any():
        raise IngestError("empty device_id", str(path), _line(raw, device == ""))

    frame = pd.DataFrame({
        "device_id": device,
        "timestamp": _timestamps(raw, "timestamp", path, cfg.iso_timestamps),
        "lat": _numeric(raw, "lat", path),
        "lon": _numeric(raw, "lon", path),
        "accuracy_m": _numeric(raw, "accuracy_m", path),
    })
    _check_range(raw, ~frame["lat"].between(-90, 90), "latitude outside [-90, 90]", path)
    _check_range(raw, ~frame["lon"].between(-180, 180), "longitude outside [-180, 180]", path)
    _check_range(raw, frame["accuracy_m"] < 0, "negative accuracy", path)
    _check_range(raw, frame["timestamp"] < 0, "negative timestamp", path)

    if cfg.sort_policy == "require":
        backwards = frame.groupby("device_id", sort=False)["timestamp"].diff() < 0
        if backwards.any():
            line = _line(raw, backwards)
            raise UnsortedInput(f"{path}:{line}: records out of time order")
    for column in extra:
        frame[column] = raw[column]
    return frame


def _dedupe(frame: pd.DataFrame) -> pd.DataFrame:
    frame = frame.sort_values(["device_id", "timestamp", "accuracy_m"], kind="mergesort")
    deduped = frame.drop_duplicates(["device_id", "timestamp"], keep="first")
    dropped = len(frame) - len(deduped)
    if dropped:
        logger.warning(f"dropped {dropped} duplicate (device_id, timestamp) row(s), kept the most accurate")
    return deduped


def _to_records(frame: pd.DataFrame) -> Corpus:
    corpus: Corpus = defaultdict(list)
    for device, ts, lat, lon, acc in frame[RECORD_COLUMNS].itertuples(index=False, name=None):
        corpus[device].append(LocationRecord(device, int(ts), float(lat), float(lon), float(acc)))
    return dict(sorted(corpus.items()))


def load_corpus(paths: Iterable[Path | str], cfg: IngestConfig | None = None) -> Corpus:
    """Time-sorted records per device, all days together."""
    cfg = cfg or IngestConfig()
    frames = [_record_frame(Path(path), cfg) for path in paths]
    frames = [frame for frame in frames if not frame.empty]
    if not frames:
        return {}
    corpus = _to_records(_dedupe(pd.concat(frames, ignore_index=True)))
    logger.info(f"ingested {sum(len(v) for v in corpus.values())} record(s) for {len(corpus)} device(s)")
    return corpus


def read_records(paths: Iterable[Path | str], cfg: IngestConfig | None = None) -> dict[str, list[DayTrajectory]]:
    """Records grouped by device and cut into local-day trajectories."""
    cfg = cfg or IngestConfig()
    return {
        device: split_days(device, records, cfg.utc_offset_min)
        for device, records in load_corpus(paths, cfg).items()
    }


def split_by_accuracy(
    records: Iterable[LocationRecord],
    cfg: IngestConfig | None = None,
) -> tuple[list[LocationRecord], list[LocationRecord]]:
    """GPS below the accuracy split (strict), cellular at or above it."""
    split = (cfg or IngestConfig()).accuracy_split_m
    gps, cellular = [], []
    for record in records:
        (gps if record.accuracy < split else cellular).append(record)
    return gps, cellular


def read_labeled_records(path: Path | str) -> dict[str, list[LabeledRecord]]:
    path = Path(path)
    frame = _record_frame(path, IngestConfig(sort_policy="require"), extra=LABEL_COLUMNS)
    if frame.empty:
        return {}
    labels = {column: _numeric(frame, column, path) for column in LABEL_COLUMNS}
    out: dict[str, list[LabeledRecord]] = defaultdict(list)
    for pos, (device, ts, lat, lon, acc) in enumerate(frame[RECORD_COLUMNS].itertuples(index=False, name=None)):
        record = LocationRecord(device, int(ts), float(lat), float(lon), float(acc))
        index = int(labels["stay_index"].iloc[pos])
        try:
            if index == TRANSIENT:
                item = LabeledRecord(record)
            else:
                item = LabeledRecord(
                    record,
                    float(labels["stay_lat"].iloc[pos]),
                    float(labels["stay_lon"].iloc[pos]),
                    float(labels["stay_duration_min"].iloc[pos]),
                    index,
                )
        except RangeError as exc:
            raise RangeError(exc.detail, str(path), pos + 2)
        out[device].append(item)
    return dict(sorted(out.items()))


def read_stays(path: Path | str) -> dict[str, list[Stay]]:
    path = Path(path)
    frame = _read_text_frame(path, STAY_COLUMNS)
    if frame.empty:
        return {}
    lats = _numeric(frame, "centroid_lat", path)
    lons = _numeric(frame, "centroid_lon", path)
    starts = _numeric(frame, "start", path, integral=True)
    ends = _numeric(frame, "end", path, integral=True)
    counts = _numeric(frame, "record_count", path, integral=True)
    out: dict[str, list[Stay]] = defaultdict(list)
    for pos, device in enumerate(frame["device_id"].str.strip()):
        try:
            source = StaySource(frame["source"].iloc[pos].strip())
            stay = Stay(device, float(lats.iloc[pos]), float(lons.iloc[pos]), int(starts.iloc[pos]),
                        int(ends.iloc[pos]), int(counts.iloc[pos]), source)
        except ValueError:
            raise IngestError(f"unknown stay source {frame['source'].iloc[pos]!r}", str(path), pos + 2)
        except RangeError as exc:
            raise RangeError(exc.detail, str(path), pos + 2)
        out[device].append(stay)
    for stays in out.values():
        stays.sort(key=lambda s: (s.start, s.end))
    return dict(sorted(out.items()))
