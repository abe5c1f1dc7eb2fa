from .core import (
    Adornment,
    InfoProtocol,
    LocalSchema,
    MessageSchema,
    ParamDecl,
    parse_bspl,
    parse_bspl_file,
    print_bspl,
    project_bspl,
    validate_bspl,
)
from .enactment import (
    EmissionError,
    History,
    InstanceView,
    IntegrityConflict,
    MessageInstance,
    Observation,
    apply_observation,
    check_emission,
    instance_views,
    is_complete,
    known_bindings,
)

__all__ = [
    "Adornment",
    "InfoProtocol",
    "LocalSchema",
    "MessageSchema",
    "ParamDecl",
    "parse_bspl",
    "parse_bspl_file",
    "print_bspl",
    "project_bspl",
    "validate_bspl",
    "EmissionError",
    "History",
    "InstanceView",
    "IntegrityConflict",
    "MessageInstance",
    "Observation",
    "apply_observation",
    "check_emission",
    "instance_views",
    "is_complete",
    "known_bindings",
]
