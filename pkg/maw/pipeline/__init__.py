from .compare import compare_workflows, expand_osc_windows, sweep_change_points
from .engine import WorkflowResult, execute_workflow
from .parser import load_workflow, parse_workflow
from .presets import PRESETS, get_preset
from .scaling import scaling_probe
from .validation import ensure_valid, validate_workflow
