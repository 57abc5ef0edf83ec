"""Numerical toolkit for Plebanski generating functions, hyperkahler pencils and their worked examples."""

__version__ = "0.1.0"

from .errors import JoyceKitError  # noqa: E402
from .tensorcore import (  # noqa: E402
    PlebanskiModel,
    SymplecticData,
    TangentPoint,
    form_pencil,
    frames,
    hk_tensors,
    two_forms,
)
from .elliptic import Curve, abel_theta, complete_periods, legendre_residual  # noqa: E402
from .models import A2State, a1_model, flat_model, synthetic_counterexample_model  # noqa: E402

__all__ = [
    "__version__",
    "JoyceKitError",
    "PlebanskiModel",
    "SymplecticData",
    "TangentPoint",
    "form_pencil",
    "frames",
    "hk_tensors",
    "two_forms",
    "Curve",
    "abel_theta",
    "complete_periods",
    "legendre_residual",
    "A2State",
    "a1_model",
    "flat_model",
    "synthetic_counterexample_model",
]
