"""A type checker for a small Gallina-like language that decides fixpoint
termination and cofixpoint productivity by inferring size annotations and
solving the resulting stage constraints."""

from .constraints import ConstraintSet, rec_check, rec_check_loop
from .errors import SizecheckError
from .inference import Checker
from .prelude import load_prelude
from .syntax import CheckerState, GlobalEnv, Signature

__version__ = "0.1.0"

__all__ = [
    "Checker",
    "CheckerState",
    "ConstraintSet",
    "GlobalEnv",
    "Signature",
    "SizecheckError",
    "load_prelude",
    "rec_check",
    "rec_check_loop",
    "__version__",
]
