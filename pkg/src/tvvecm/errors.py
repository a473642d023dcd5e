"""Exception hierarchy.

Every error carries a stable ``code`` string and an ``exit_code`` used by the
command-line front end (2 config, 3 data, 4 numerical degeneracy).
"""


class TvVecmError(Exception):
    code = "error"
    exit_code = 1


class ConfigError(TvVecmError, ValueError):
    code = "config_error"
    exit_code = 2


class DataError(TvVecmError, ValueError):
    code = "data_error"
    exit_code = 3


class NumericalError(TvVecmError, ArithmeticError):
    code = "numerical_error"
    exit_code = 4


class ParseError(DataError):
    code = "parse_error"

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class TooFewObservations(DataError):
    code = "too_few_observations"


class RankOutOfRange(ConfigError):
    code = "rank_out_of_range"


class InvalidPenalty(ConfigError):
    code = "invalid_penalty"


class NoValidBandwidth(NumericalError):
    code = "no_valid_bandwidth"


class DegenerateWindow(NumericalError):
    code = "degenerate_window"


class SingularInformation(NumericalError):
    code = "singular_information"


class SingularMoments(NumericalError):
    code = "singular_moments"


class SingularWeight(NumericalError):
    code = "singular_weight"
