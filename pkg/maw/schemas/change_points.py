from pydantic import BaseModel, ConfigDict, Field, model_validator

DURATION_RANGE_MIN = (0.5, 30.0)
DISTANCE_RANGE_KM = (0.05, 1.0)
OSC_WINDOW_RANGE_MIN = (1 / 6, 11.0)

CHANGE_POINT_RANGES = {
    "duration_min_threshold": (DURATION_RANGE_MIN, "min"),
    "distance_km_threshold": (DISTANCE_RANGE_KM, "km"),
    "osc_window_min": (OSC_WINDOW_RANGE_MIN, "min"),
}

# Stay Integrator spatial test, not a user change point
INTEGRATOR_DISTANCE_KM = 0.2


def range_violation(name: str, value: float) -> str | None:
    """Message for a change point outside its documented range, else None."""
    (low, high), unit = CHANGE_POINT_RANGES[name]
    # slack for rounded decimal input such as 0.166667
    if low - 1e-6 <= value <= high + 1e-6:
        return None
    return f"{name}={value:g} outside [{low:g}, {high:g}] {unit}; set override to allow it"


class ChangePoints(BaseModel):
    """Tunable thresholds of the stay-inference stages.

    Values outside the documented ranges are rejected unless ``override`` is set;
    non-positive values are rejected always.
    """

    model_config = ConfigDict(frozen=True)

    duration_min_threshold: float = Field(default=5.0, gt=0)
    distance_km_threshold: float = Field(default=0.2, gt=0)
    osc_window_min: float = Field(default=5.0, gt=0)
    override: bool = False

    @model_validator(mode="after")
    def check_ranges(self):
        if self.override:
            return self
        for name in CHANGE_POINT_RANGES:
            message = range_violation(name, getattr(self, name))
            if message:
                raise ValueError(message)
        return self

    @property
    def out_of_range(self) -> list[str]:
        return [name for name in CHANGE_POINT_RANGES if range_violation(name, getattr(self, name))]

    @property
    def duration_s(self) -> float:
        return self.duration_min_threshold * 60.0
