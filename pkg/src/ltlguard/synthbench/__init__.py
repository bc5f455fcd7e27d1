"""Synthetic attribute-event benchmarks with construction-time ground truth."""

from .events import (
    AttributeEvent,
    AttributeEventLabeler,
    load_vocabulary,
    prop_name,
)
from .generator import (
    BenchCase,
    BenchConstraint,
    GenerationError,
    build_tree_formula,
    case_from_dict,
    extract_embedded_path,
    gen_constraint_scaling,
    gen_elasticity,
    gen_proposition_scaling,
    load_cases,
    save_cases,
)
from .judge import (
    CoinFlipJudge,
    JudgeReport,
    MonitorOracleJudge,
    eval_judge,
    prompt_for_case,
)
from .patterns import (
    LEVELS,
    PATTERN_IDS,
    UnknownPatternError,
    pattern_formula,
    render_constraint,
)

__all__ = [
    "AttributeEvent",
    "AttributeEventLabeler",
    "BenchCase",
    "BenchConstraint",
    "CoinFlipJudge",
    "GenerationError",
    "JudgeReport",
    "LEVELS",
    "MonitorOracleJudge",
    "PATTERN_IDS",
    "UnknownPatternError",
    "build_tree_formula",
    "case_from_dict",
    "eval_judge",
    "extract_embedded_path",
    "gen_constraint_scaling",
    "gen_elasticity",
    "gen_proposition_scaling",
    "load_cases",
    "load_vocabulary",
    "pattern_formula",
    "prompt_for_case",
    "prop_name",
    "render_constraint",
    "save_cases",
]
