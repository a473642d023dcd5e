"""JSON Schema (draft 2020-12) for the ``fit`` report, version 1.

The schema is additive: new optional members may appear in later versions of
the package, existing members keep their meaning.  ``number`` members reject
``null``, so a report that passes validation carries only finite floats.
"""

_NUM = {"type": "number"}
_NUMS = {"type": "array", "items": _NUM}
_MAT = {"type": "array", "items": _NUMS}
_NONNEG_INT = {"type": "integer", "minimum": 0}

FIT_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "tvvecm fit report",
    "type": "object",
    "required": ["schema", "command", "dims", "columns", "bandwidth", "beta_star",
                 "diagnostics", "provenance", "wall_clock"],
    "properties": {
        "schema": {"const": 1},
        "command": {"const": "fit"},
        "dims": {
            "type": "object",
            "required": ["T", "d", "p", "r"],
            "properties": {"T": {"type": "integer", "minimum": 2},
                           "d": {"type": "integer", "minimum": 1},
                           "p": {"type": "integer", "minimum": 1},
                           "r": _NONNEG_INT},
        },
        "columns": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "bandwidth": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "beta_star": {
            "oneOf": [
                {"type": "null"},
                {"type": "object",
                 "required": ["r", "beta_star", "se", "ci_lower", "ci_upper", "level"],
                 "properties": {"r": {"type": "integer", "minimum": 1},
                                "beta_star": _MAT, "se": _MAT,
                                "ci_lower": _MAT, "ci_upper": _MAT,
                                "level": {"type": "number", "exclusiveMinimum": 0,
                                          "exclusiveMaximum": 1}}},
            ],
        },
        "ic_table": {
            "type": "object",
            "required": ["candidates", "rss", "chi_T", "ic", "p_hat"],
            "properties": {"candidates": {"type": "array", "items": {"type": "integer"}},
                           "rss": _NUMS, "chi_T": _NUMS, "ic": _NUMS, "h": _NUMS,
                           "p_hat": {"type": "integer", "minimum": 1}},
        },
        "rank_table": {
            "type": "object",
            "required": ["mu", "mu0", "w_T", "ratios", "r_hat"],
            "properties": {"mu": _NUMS, "mu0": _NUM, "w_T": _NUM,
                           # a ratio is infinite (so null) when a trailing norm is exactly zero
                           "ratios": {"type": "array", "items": {"type": ["number", "null"]}},
                           "r_hat": _NONNEG_INT, "p": {"type": "integer"}, "h": _NUM},
        },
        "stability": {
            "type": "object",
            "required": ["q_hat", "q_star", "B", "crit", "alpha_level", "reject", "seed",
                         "p_value", "restriction"],
            "properties": {"q_hat": {"type": "number", "minimum": 0}, "q_star": _NUM,
                           "c_used": _NUMS, "B": {"type": "integer", "minimum": 99},
                           "crit": _NUM, "alpha_level": _NUM, "reject": {"type": "boolean"},
                           "seed": {"type": "integer"},
                           "p_value": {"type": "number", "minimum": 0, "maximum": 1},
                           "restriction": {"type": "string"}},
        },
        "diagnostics": {
            "type": "object",
            "required": ["breusch_godfrey"],
            "properties": {"breusch_godfrey": {
                "type": "object",
                "required": ["stat", "df", "p_value"],
                "properties": {"stat": {"type": "number", "minimum": 0},
                               "df": {"type": "integer", "minimum": 1},
                               "p_value": {"type": "number", "minimum": 0, "maximum": 1}},
            }},
        },
        "paths_csv": {"type": ["string", "null"]},
        "provenance": {
            "type": "object",
            "required": ["seed", "version", "config"],
            "properties": {"seed": {"type": "integer"}, "version": {"type": "string"},
                           "config": {"type": "object"}},
        },
        "wall_clock": {"type": "number", "minimum": 0},
    },
}
