"""alpha-Rosen continued fractions and their natural extensions, computed exactly."""
from .numfield import FieldContext, FieldElem, FieldError, UndecidedError, field_setup
from .rosencf import Digit, PeriodicWord, expand, convergents, realize, parse_word, format_word
from .natext import PlanePoint, build_domain, classify_alpha, next_point, prev_point
from .spectrum import (
    hurwitz_const, thresholds, region_decomposition, tong_constants, flush_count, K_bound,
    lenstra_const, borel_certificate, reconstruct_tv,
)

__version__ = "0.1.0"
__all__ = [
    "FieldContext", "FieldElem", "FieldError", "UndecidedError", "field_setup",
    "Digit", "PeriodicWord", "expand", "convergents", "realize", "parse_word", "format_word",
    "PlanePoint", "build_domain", "classify_alpha", "next_point", "prev_point",
    "hurwitz_const", "thresholds", "region_decomposition", "tong_constants", "flush_count",
    "K_bound", "lenstra_const", "borel_certificate", "reconstruct_tv",
]
