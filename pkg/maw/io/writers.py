"""Output files. Rows are ordered by device_id, then time, so reruns are byte-identical."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import pandas as pd
from loguru import logger

from ..errors import OutputError
from ..models import TRANSIENT, LabeledRecord, LocationRecord, Stay
from ..schemas import HISTOGRAM_BINS, MobilityMetrics, RunProfile
from .ingest import LABELED_COLUMNS, RECORD_COLUMNS, STAY_COLUMNS

OUTPUT_FILES = {
    "labeled": "labeled.csv",
    "stays": "stays.csv",
    "metrics": "metrics.json",
    "histogram": "histogram.csv",
    "profile": "profile.json",
}


def _record_row(record: LocationRecord) -> list[Any]:
    return [record.device_id, record.timestamp, record.lat, record.lon, record.accuracy]


def record_line(record: LocationRecord) -> str:
    return ",".join(str(value) for value in _record_row(record))


def corpus_bytes(corpus: Mapping[str, Sequence[LocationRecord]]) -> int:
    """Size of the corpus written as a records CSV."""
    if not any(corpus.values()):
        return 0
    header = len(",".join(RECORD_COLUMNS)) + 1
    return header + sum(len(record_line(r).encode("utf-8")) + 1 for records in corpus.values() for r in records)


def records_frame(records: Iterable[LocationRecord]) -> pd.DataFrame:
    return pd.DataFrame([_record_row(r) for r in records], columns=RECORD_COLUMNS, dtype=object)


def labeled_frame(labeled: Mapping[str, Sequence[LabeledRecord]]) -> pd.DataFrame:
    rows = []
    for device in sorted(labeled):
        for item in labeled[device]:
            if item.is_transient:
                labels = [TRANSIENT, TRANSIENT, TRANSIENT, TRANSIENT]
            else:
                labels = [item.stay_lat, item.stay_lon, item.stay_duration_min, item.stay_index]
            rows.append(_record_row(item.record) + labels)
    # object columns keep the int -1 sentinels from turning into -1.0
    return pd.DataFrame(rows, columns=LABELED_COLUMNS, dtype=object)


def stays_frame(stays: Mapping[str, Sequence[Stay]]) -> pd.DataFrame:
    rows = [
        [s.device_id, s.centroid_lat, s.centroid_lon, s.start, s.end, s.duration_min, s.record_count, s.source.value]
        for device in sorted(stays)
        for s in sorted(stays[device], key=lambda s: (s.start, s.end))
    ]
    return pd.DataFrame(rows, columns=STAY_COLUMNS, dtype=object)


def histogram_frame(metrics: Optional[MobilityMetrics]) -> pd.DataFrame:
    counts = metrics.departure_histogram if metrics is not None else [0] * HISTOGRAM_BINS
    return pd.DataFrame({
        "bin_index": range(HISTOGRAM_BINS),
        "start_hhmm": [f"{(b * 30) // 60:02d}:{(b * 30) % 60:02d}" for b in range(HISTOGRAM_BINS)],
        "count": counts,
    })


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    try:
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}")
    return path


def write_json(payload: Any, path: Path) -> Path:
    try:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}")
    return path


def prepare_dir(out_dir: Path | str) -> Path:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out_dir}: {exc.strerror or exc}")
    return out_dir


def metrics_payload(metrics: Optional[MobilityMetrics]) -> Optional[dict]:
    if metrics is None:
        return None
    payload = metrics.model_dump()
    payload["departure_shares"] = metrics.departure_shares
    return payload


def write_records(records: Iterable[LocationRecord], path: Path | str) -> Path:
    return _write_csv(records_frame(records), Path(path))


def write_stays(stays: Mapping[str, Sequence[Stay]], path: Path | str) -> Path:
    return _write_csv(stays_frame(stays), Path(path))


def write_metrics(out_dir: Path | str, metrics: Optional[MobilityMetrics]) -> dict[str, Path]:
    out_dir = prepare_dir(out_dir)
    return {
        "metrics": write_json(metrics_payload(metrics), out_dir / OUTPUT_FILES["metrics"]),
        "histogram": _write_csv(histogram_frame(metrics), out_dir / OUTPUT_FILES["histogram"]),
    }


def write_outputs(
    out_dir: Path | str,
    labeled: Mapping[str, Sequence[LabeledRecord]],
    stays: Mapping[str, Sequence[Stay]],
    metrics: Optional[MobilityMetrics],
    profile: Optional[RunProfile] = None,
) -> dict[str, Path]:
    """Write labeled.csv, stays.csv, metrics.json, histogram.csv and profile.json.

    ``metrics`` is None when no user has a stay; metrics.json then holds null and
    the histogram is all zeros.
    """
    out_dir = prepare_dir(out_dir)
    written = {
        "labeled": _write_csv(labeled_frame(labeled), out_dir / OUTPUT_FILES["labeled"]),
        "stays": _write_csv(stays_frame(stays), out_dir / OUTPUT_FILES["stays"]),
        **write_metrics(out_dir, metrics),
    }
    if profile is not None:
        written["profile"] = write_json(profile.model_dump(), out_dir / OUTPUT_FILES["profile"])
    logger.info(f"wrote {', '.join(p.name for p in written.values())} to {out_dir}")
    return written


def write_split(
    gps: Iterable[LocationRecord],
    cellular: Iterable[LocationRecord],
    out_dir: Path | str,
) -> dict[str, Path]:
    out_dir = prepare_dir(out_dir)
    return {
        "gps": write_records(gps, out_dir / "gps.csv"),
        "cellular": write_records(cellular, out_dir / "cellular.csv"),
    }
