"""Time-varying vector error-correction models.

Local-linear estimation of the short-run coefficients, weighted least
squares for a constant cointegrating matrix, lag and rank selection, a
bootstrap constancy test and the simulation designs used to check them.
"""
__version__ = "0.1.0"

from .errors import (ConfigError, DataError, NumericalError, ParseError,  # noqa: E402
                     TvVecmError)
from .tvestim import (Panel, build_regressors, cv_bandwidth, fit_paths,  # noqa: E402
                      pointwise_ci)
from .cointegrate import fit_constant_vecm, wls_beta_star  # noqa: E402
from .selection import select_lag, select_rank  # noqa: E402
from .stabtest import Restriction, bg_lm_test, stability_test  # noqa: E402
from .data import load_panel  # noqa: E402

__all__ = ["ConfigError", "DataError", "NumericalError", "ParseError", "TvVecmError",
           "Panel", "build_regressors", "cv_bandwidth", "fit_paths", "pointwise_ci",
           "fit_constant_vecm", "wls_beta_star", "select_lag", "select_rank",
           "Restriction", "bg_lm_test", "stability_test", "load_panel"]
