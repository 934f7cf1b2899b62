# maw/errors.py
from typing import Any

VALIDATION_EXIT = 2
RUNTIME_EXIT = 1


class MawError(Exception):
    """Base error. Carries a human readable detail and the CLI exit code."""

    exit_code = RUNTIME_EXIT

    def __init__(self, detail: str, exit_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


# Validation class (exit 2)

class UsageError(MawError):
    exit_code = VALIDATION_EXIT


class RangeError(MawError):
    exit_code = VALIDATION_EXIT

    def __init__(self, detail: str, path: str | None = None, line: int | None = None):
        where = f"{path}:{line}: " if path is not None and line is not None else ""
        super().__init__(f"{where}{detail}")
        self.path = path
        self.line = line


class IngestError(MawError):
    exit_code = VALIDATION_EXIT

    def __init__(self, detail: str, path: str, line: int | None = None):
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {detail}")
        self.path = path
        self.line = line


class WorkflowParseError(MawError):
    exit_code = VALIDATION_EXIT

    def __init__(self, detail: str, line: int | None = None, field: str | None = None):
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field '{field}'")
        prefix = f"{', '.join(parts)}: " if parts else ""
        super().__init__(f"{prefix}{detail}")
        self.line = line
        self.field = field


class WorkflowValidationError(MawError):
    exit_code = VALIDATION_EXIT

    def __init__(self, diagnostics: list[Any]):
        codes = ", ".join(f"{d.code}" for d in diagnostics)
        super().__init__(f"workflow rejected ({codes})")
        self.diagnostics = diagnostics


# Runtime class (exit 1)

class EmptyInput(MawError):
    pass


class UnsortedInput(MawError):
    pass


class DeviceMismatch(MawError):
    pass


class EmptyCohort(MawError):
    pass


class Undefined(MawError):
    pass


class OutputError(MawError):
    pass


class StageError(MawError):
    def __init__(self, detail: str, device_id: str, stage_index: int, stage_kind: str):
        super().__init__(f"stage {stage_index} ({stage_kind}) failed for device '{device_id}': {detail}")
        self.device_id = device_id
        self.stage_index = stage_index
        self.stage_kind = stage_kind
        self._cause = detail

    # workers raise this across process boundaries
    def __reduce__(self):
        return (StageError, (self._cause, self.device_id, self.stage_index, self.stage_kind))
