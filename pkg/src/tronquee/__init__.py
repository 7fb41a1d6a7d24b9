"""Tronquee solutions of Painleve III and IV: transseries, Borel summation, integration and poles."""
from .equations import Case, EquationSpec, normalize
from .series import compute_h0, compute_levels
from .borel import tronquee_eval, tritronquee_eval

__all__ = ["Case", "EquationSpec", "normalize", "compute_h0", "compute_levels", "tronquee_eval",
           "tritronquee_eval"]
__version__ = "0.1.0"
