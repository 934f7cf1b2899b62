"""Workflow documents: JSON text or ``preset:<name>`` references.

Document shape::

    {"name": "...", "input": "gps" | "cellular" | "both" | "all",
     "stages": [{"kind": "TRACE_SEG", "params": {"distance_km": 0.2, "duration_min": 5}}]}

Change points are given as ``duration_min``, ``distance_km`` and ``osc_window_min``;
every change point a stage kind reads must be present. The Stay Integrator takes its
two branches as ``gps`` and ``cellular`` params, each a stage list or a preset
reference.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, NoReturn

from loguru import logger
from pydantic import ValidationError

from ..errors import UsageError, WorkflowParseError
from ..schemas import (
    ChangePoints,
    IntegratorRules,
    StageKind,
    StageSpec,
    WorkflowSpec,
    range_violation,
)
from ..schemas.workflow import REQUIRED_CHANGE_POINTS
from .presets import PRESET_PREFIX, get_preset

# document name -> ChangePoints field
CHANGE_POINT_PARAMS = {
    "duration_min": "duration_min_threshold",
    "distance_km": "distance_km_threshold",
    "osc_window_min": "osc_window_min",
}
RULE_PARAMS = tuple(IntegratorRules.model_fields)
STAGE_PARAMS = set(CHANGE_POINT_PARAMS) | set(RULE_PARAMS) | {"override", "target", "per_day", "gps", "cellular"}
TOP_LEVEL_KEYS = {"name", "input", "stages"}
INPUTS = ("gps", "cellular", "both", "all")

_KIND_KEY = re.compile(r'"kind"\s*:')


def _stage_objects(stages: Any) -> list[Any]:
    """Stage objects in document (pre-)order, branches included."""
    found = []
    if not isinstance(stages, list):
        return found
    for stage in stages:
        found.append(stage)
        params = stage.get("params") if isinstance(stage, dict) else None
        if isinstance(params, dict):
            for key, value in params.items():
                if key in ("gps", "cellular"):
                    found.extend(_stage_objects(value))
    return found


def _stage_lines(text: str, stages: Any) -> dict[int, int]:
    """Map id(stage object) -> line of its "kind" key.

    Assumes each stage writes "kind" before its branches; when the counts do not
    line up no lines are reported.
    """
    lines = [text.count("\n", 0, m.start()) + 1 for m in _KIND_KEY.finditer(text)]
    objects = _stage_objects(stages)
    if len(lines) != len(objects):
        return {}
    return {id(obj): line for obj, line in zip(objects, lines)}


class _Builder:
    def __init__(self, lines: dict[int, int]):
        self.lines = lines

    def fail(self, detail: str, raw: Any = None, field: str | None = None) -> NoReturn:
        raise WorkflowParseError(detail, line=self.lines.get(id(raw)), field=field)

    def stages(self, raw_stages: Any, where: str) -> list[StageSpec]:
        if isinstance(raw_stages, str):
            if not raw_stages.startswith(PRESET_PREFIX):
                self.fail(f"expected a stage list or '{PRESET_PREFIX}<name>'", field=where)
            try:
                return list(get_preset(raw_stages).stages)
            except UsageError as exc:
                self.fail(exc.detail, field=where)
        if not isinstance(raw_stages, list):
            self.fail("expected a list of stages", field=where)
        return [self.stage(raw) for raw in raw_stages]

    def stage(self, raw: Any) -> StageSpec:
        if not isinstance(raw, dict):
            self.fail("stage must be an object", field="stages")
        unknown = set(raw) - {"kind", "params"}
        if unknown:
            self.fail(f"unknown stage key(s) {sorted(unknown)}", raw, sorted(unknown)[0])
        if "kind" not in raw:
            self.fail("stage has no kind", raw, "kind")
        try:
            kind = StageKind(raw["kind"])
        except (ValueError, TypeError):
            choices = ", ".join(k.value for k in StageKind)
            self.fail(f"unknown stage kind {raw['kind']!r}; expected one of {choices}", raw, "kind")

        params = raw.get("params", {})
        if not isinstance(params, dict):
            self.fail("params must be an object", raw, "params")
        unknown = set(params) - STAGE_PARAMS
        if unknown:
            name = sorted(unknown)[0]
            self.fail(f"unknown parameter '{name}' for {kind.value}", raw, name)

        override = bool(params.get("override", False))
        values: dict[str, Any] = {"override": override}
        for param, field in CHANGE_POINT_PARAMS.items():
            if field in REQUIRED_CHANGE_POINTS[kind] and param not in params:
                self.fail(f"{kind.value} needs change point '{param}'", raw, param)
            if param not in params:
                continue
            value = params[param]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                self.fail(f"'{param}' must be a number, got {value!r}", raw, param)
            if value <= 0:
                self.fail(f"'{param}'={value} out of range: must be positive", raw, param)
            if not override and range_violation(field, value):
                self.fail(f"'{param}' out of range: {range_violation(field, value)}", raw, param)
            values[field] = float(value)
        try:
            change_points = ChangePoints(**values)
        except ValidationError as exc:
            self.fail(exc.errors()[0]["msg"], raw, "params")

        spec: dict[str, Any] = {"kind": kind, "change_points": change_points}
        if "target" in params:
            if kind not in (StageKind.INCREMENTAL, StageKind.OSC_CORRECTOR):
                self.fail(f"{kind.value} takes no target", raw, "target")
            if params["target"] not in ("records", "stays", "auto"):
                self.fail(f"target must be records, stays or auto, got {params['target']!r}", raw, "target")
            spec["target"] = params["target"]
        if "per_day" in params:
            if kind != StageKind.INCREMENTAL:
                self.fail(f"{kind.value} takes no per_day", raw, "per_day")
            spec["per_day"] = bool(params["per_day"])

        branch_keys = [key for key in ("gps", "cellular", *RULE_PARAMS) if key in params]
        if branch_keys and kind != StageKind.STAY_INTEGRATOR:
            self.fail(f"'{branch_keys[0]}' only applies to STAY_INTEGRATOR", raw, branch_keys[0])
        if kind == StageKind.STAY_INTEGRATOR:
            for key in ("gps", "cellular"):
                if key in params:
                    spec[key] = self.stages(params[key], key)
            spec["rules"] = IntegratorRules(**{key: bool(params[key]) for key in RULE_PARAMS if key in params})
        return StageSpec(**spec)


def parse_workflow(text: str) -> WorkflowSpec:
    """Parse a workflow document; errors name the line and field where possible."""
    stripped = text.strip()
    if stripped.startswith(PRESET_PREFIX):
        try:
            return get_preset(stripped)
        except UsageError as exc:
            raise WorkflowParseError(exc.detail, line=1, field="preset")

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorkflowParseError(f"invalid JSON: {exc.msg}", line=exc.lineno)
    if not isinstance(doc, dict):
        raise WorkflowParseError("workflow document must be a JSON object", line=1)

    unknown = set(doc) - TOP_LEVEL_KEYS
    if unknown:
        raise WorkflowParseError(f"unknown key(s) {sorted(unknown)}", field=sorted(unknown)[0])
    if "stages" not in doc:
        raise WorkflowParseError("workflow has no stages", field="stages")
    stream = doc.get("input", "gps")
    if stream not in INPUTS:
        raise WorkflowParseError(f"input must be one of {', '.join(INPUTS)}, got {stream!r}", field="input")

    builder = _Builder(_stage_lines(text, doc["stages"]))
    stages = builder.stages(doc["stages"], "stages")
    spec = WorkflowSpec(name=str(doc.get("name", "custom")), stages=stages, input=stream)
    logger.debug(f"parsed workflow '{spec.name}' with {len(spec.stages)} stage(s)")
    return spec


def load_workflow(reference: str) -> WorkflowSpec:
    """``preset:<name>`` or a path to a JSON workflow document."""
    if reference.startswith(PRESET_PREFIX):
        return parse_workflow(reference)
    path = Path(reference)
    if not path.is_file():
        raise UsageError(f"workflow '{reference}' is neither a preset nor a readable file")
    return parse_workflow(path.read_text(encoding="utf-8"))
