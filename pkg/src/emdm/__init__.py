"""Sets, mappings and constraints: a scheme language, instance store, validator and compiler."""
from .dsl import DSLError, ParseError, SourceSpan, parse_formula, parse_scheme, serialize_scheme
from .engine import Engine, Report, Violation, relation_view, validate_all
from .kinds import ConstraintKind, kind_registry
from .relations import PairSet, check_pair_property, check_self_map
from .scheme import Scheme, SchemeError, build_scheme
from .store import Instance, StoreError, dump_data, load_data, new_instance

__all__ = [
    "ConstraintKind", "DSLError", "Engine", "Instance", "PairSet", "ParseError", "Report",
    "Scheme", "SchemeError", "SourceSpan", "StoreError", "Violation", "build_scheme",
    "check_pair_property", "check_self_map", "dump_data", "kind_registry", "load_data",
    "new_instance", "parse_formula", "parse_scheme", "relation_view", "serialize_scheme",
    "validate_all",
]
