"""JSON Schemas (draft 2020-12) for every ``--json`` record the CLI emits.

Infinite floats are written as the strings ``"inf"`` / ``"-inf"``, so numeric
fields that can be unbounded accept either form.
"""

NUMBER = {"oneOf": [{"type": "number"}, {"type": "string", "enum": ["inf", "-inf", "nan"]}]}
OPT_NUMBER = {"oneOf": [NUMBER, {"type": "null"}]}

CIPHER_INFO = {
    "type": "object",
    "required": ["label", "n_messages", "n_keys", "n_ciphertexts", "message_bits", "key_bits"],
    "properties": {
        "label": {"type": "string"},
        "n_messages": {"type": "integer", "minimum": 1},
        "n_keys": {"type": "integer", "minimum": 1},
        "n_ciphertexts": {"type": "integer", "minimum": 1},
        "message_bits": {"type": "number"},
        "key_bits": {"type": "number"},
    },
}

BOUND_CHECK = {
    "type": "object",
    "required": ["name", "value", "bound", "slack", "passed", "details"],
    "properties": {
        "name": {"type": "string"},
        "value": NUMBER,
        "bound": NUMBER,
        "slack": NUMBER,
        "passed": {"type": "boolean"},
        "details": {"type": "object"},
    },
}

ADVANTAGE_RESULT = {
    "type": "object",
    "required": ["best_f", "best_guess_probability", "baseline_probability", "advantage", "mode"],
    "properties": {
        "best_f": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "best_guess_probability": {"type": "number", "minimum": 0, "maximum": 1},
        "baseline_probability": {"type": "number", "minimum": 0, "maximum": 1},
        "advantage": {"type": "number"},
        "mode": {"enum": ["general", "one_bit"]},
    },
}

BOUND_RESULT = {
    "type": "object",
    "required": ["name", "kind", "value_log2", "value_decimal", "satisfied", "note", "details"],
    "properties": {
        "name": {"type": "string"},
        "kind": {"enum": ["key_bits", "probability", "exponent"]},
        "value_log2": NUMBER,
        "value_decimal": {"type": "string"},
        "satisfied": {"type": ["boolean", "null"]},
        "note": {"type": "string"},
        "details": {"type": "object"},
    },
}


def _command(name, required, properties):
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": ["command", *required],
        "properties": {"command": {"const": name}, **properties},
    }


SCHEMAS = {
    "analyze": _command("analyze", ["cipher", "report", "checks"], {
        "cipher": CIPHER_INFO,
        "report": {
            "type": "object",
            "required": ["rho_m"],
            "properties": {
                "rho_m": {"type": "number", "minimum": 0, "maximum": 1},
                "chi_sq": NUMBER,
                "mi_bits": {"type": "number"},
                "mi_upper_bound_bits": {"type": "number"},
                "b_matrix_rank_bound": {"type": "integer", "minimum": 0},
                "sandwich_holds": {"type": "boolean"},
                "mi_bound_holds": {"type": "boolean"},
            },
        },
        "checks": {
            "type": "object",
            "required": ["converse_min_key_bits", "converse_satisfied"],
            "properties": {
                "converse_min_key_bits": NUMBER,
                "converse_satisfied": {"type": "boolean"},
                "walsh_rho": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
    }),
    "construct": _command("construct", ["kind", "cipher", "out"], {
        "kind": {"enum": ["stream", "expander", "ref", "random"]},
        "cipher": CIPHER_INFO,
        "out": {"type": "string"},
        "ramanujan": {
            "type": "object",
            "required": ["lambda2", "degree", "rho", "threshold", "is_ramanujan", "rho_cap"],
        },
    }),
    "cascade": _command("cascade", ["cipher", "stage_rho", "rho_m", "rho_product", "submultiplicative"], {
        "cipher": CIPHER_INFO,
        "stage_rho": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "rho_m": {"type": "number", "minimum": 0, "maximum": 1},
        "rho_product": {"type": "number"},
        "submultiplicative": {"type": "boolean"},
        "out": {"type": "string"},
    }),
    "advantage": _command("advantage", ["cipher", "mode", "advantage"], {
        "cipher": CIPHER_INFO,
        "mode": {"enum": ["general", "one_bit"]},
        "advantage": {"type": "number"},
        "result": ADVANTAGE_RESULT,
        "side_info": BOUND_CHECK,
        "checks": {"type": "array", "items": BOUND_CHECK},
    }),
    "bounds": _command("bounds", [], {
        "query": {"type": "object", "required": ["n_bits"]},
        "results": {"type": "array", "items": BOUND_RESULT},
        "curves": {
            "type": "object",
            "required": ["n_bits", "rows"],
            "properties": {
                "rows": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["rho_log2", "converse_bits", "expander_bits", "stream_bits"],
                    },
                },
            },
        },
        "out": {"type": ["string", "null"]},
    }),
    "montecarlo": _command("montecarlo", ["seed", "n", "s", "rho", "trials", "passes", "pass_fraction"], {
        "seed": {"type": "integer"},
        "n": {"type": "integer"},
        "s": {"type": "integer"},
        "rho": {"type": "number"},
        "trials": {"type": "integer", "minimum": 0},
        "passes": {"type": "integer", "minimum": 0},
        "pass_fraction": {"type": ["number", "null"]},
        "guaranteed_pass_probability_log2_failure": NUMBER,
        "guaranteed_pass_probability": NUMBER,
    }),
    "verify": _command("verify", ["battery", "passed", "checks"], {
        "battery": {"enum": ["small", "full"]},
        "passed": {"type": "boolean"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed", "detail"],
                "properties": {"name": {"type": "string"}, "passed": {"type": "boolean"},
                               "detail": {"type": "string"}},
            },
        },
    }),
}
