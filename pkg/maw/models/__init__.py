from .records import (
    TRANSIENT,
    DayTrajectory,
    LabeledRecord,
    LocationRecord,
    check_sorted,
    local_day,
    minutes_since_local_midnight,
    split_days,
)
from .stays import Stay, StaySource

__all__ = [
    'TRANSIENT',
    'DayTrajectory',
    'LabeledRecord',
    'LocationRecord',
    'Stay',
    'StaySource',
    'check_sorted',
    'local_day',
    'minutes_since_local_midnight',
    'split_days',
]
