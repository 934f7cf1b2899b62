from typing import Dict, List, Optional

from pydantic import BaseModel, Field

HISTOGRAM_BINS = 48


class MobilityMetrics(BaseModel):
    trips_per_person_day: float
    rg_km_per_person_day: float
    departure_histogram: List[int] = Field(min_length=HISTOGRAM_BINS, max_length=HISTOGRAM_BINS)
    users_included: int = Field(ge=0)
    person_days: int = Field(ge=0)

    @property
    def departure_shares(self) -> list[float]:
        total = sum(self.departure_histogram)
        if total == 0:
            return [0.0] * HISTOGRAM_BINS
        return [count / total for count in self.departure_histogram]


class StageTiming(BaseModel):
    index: int
    label: str
    seconds: float = Field(ge=0)
    completed_at_s: float = Field(ge=0)


class MemorySample(BaseModel):
    elapsed_s: float
    rss_mb: float


class RunProfile(BaseModel):
    workflow: str
    workers: int = 1
    stages: List[StageTiming] = []
    total_seconds: float = 0.0
    memory_samples: List[MemorySample] = []
    input_bytes: int = 0
    output_rows: Dict[str, int] = {}

    @property
    def peak_rss_mb(self) -> float:
        return max((s.rss_mb for s in self.memory_samples), default=0.0)


class ComparisonRow(BaseModel):
    name: str
    metrics: MobilityMetrics
    stays: int
    profile: RunProfile


class ComparisonReport(BaseModel):
    cohort_size: int
    rows: List[ComparisonRow]


class ScalingPoint(BaseModel):
    size_bytes: int
    records: int
    seconds: float


class ScalingReport(BaseModel):
    workflow: str
    points: List[ScalingPoint]
    slope: float
    intercept: float
    r2: Optional[float] = None
    degenerate: bool = False


class RecoveryScore(BaseModel):
    """Per person-day stay counts of an inference run against ground truth."""

    person_days: int
    exact_days: int
    missing_stays: int
    extra_stays: int

    @property
    def exact_ratio(self) -> float:
        return self.exact_days / self.person_days if self.person_days else 1.0
