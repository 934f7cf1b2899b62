from .integrator import integrate_stays, integration_tail, merge_cellular
from .oscillation import correct_oscillations, detect_oscillation_windows
from .stay_detection import (
    collect_stays,
    incremental_cluster_records,
    incremental_cluster_stays,
    kmeans_refine,
    stay_duration_filter,
    trace_segmentation,
)
