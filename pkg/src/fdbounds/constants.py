"""Shared tolerances, caps and reserved characters."""

# Entropy-side and log-domain comparisons. Rational comparisons are exact.
TOL = 1e-9

# Subset-lattice LPs have 2^|X| variables.
LATTICE_CAP = 12

# Materialization guard for generated and power databases.
ROW_LIMIT = 1_000_000

# Tuple values (power databases, synthesized instances) join parts with this.
SEP = "|"
PLACEHOLDER_OPEN = "⟨"
PLACEHOLDER_CLOSE = "⟩"
RESERVED_VALUE_CHARS = frozenset({SEP, PLACEHOLDER_OPEN, PLACEHOLDER_CLOSE})
# names end up in comma-joined subset labels and in "x,y -> z" fd syntax
RESERVED_NAME_CHARS = frozenset({SEP, ",", "{", "}", ">", PLACEHOLDER_OPEN, PLACEHOLDER_CLOSE})


def placeholder(attribute: str) -> str:
    return f"{PLACEHOLDER_OPEN}{attribute}{PLACEHOLDER_CLOSE}"
