"""Source-to-source translation of coroutine functions to continuation-passing style."""
from .box import box_variables
from .convert import (
    CpsFormViolation,
    IllegalNativeToCpsCall,
    LinearityViolation,
    RefusesHybrid,
    TranslationError,
    check_linear,
    cps_convert,
)
from .form import EXTERN_THEN_TAIL, PLAIN_RETURN, SHAPES, TAIL_CALL, CpsForm, verify_cps_form
from .lift import free_variables, lift, program_free_variables
from .normalize import normalize, normalize_control
from .pipeline import STAGES, hybrid_functions, run_pipeline, translate, verify_program
from .split import split, split_function

__all__ = [
    "box_variables", "normalize", "normalize_control", "split", "split_function", "lift", "cps_convert",
    "translate", "run_pipeline", "verify_cps_form", "verify_program", "check_linear",
    "free_variables", "program_free_variables", "hybrid_functions",
    "STAGES", "SHAPES", "TAIL_CALL", "EXTERN_THEN_TAIL", "PLAIN_RETURN", "CpsForm",
    "TranslationError", "IllegalNativeToCpsCall", "CpsFormViolation", "LinearityViolation", "RefusesHybrid",
]
