"""Python surface for the evosql C++ core.

Everything here is a thin re-export of the compiled `_evosql` module; see
that module's docstrings for the operation contracts.
"""

from _evosql import (
    EvosqlError,
    canonicalize_sql,
    depth_limit,
    execute,
    execution_accuracy,
    extract_select_statement,
    fingerprint,
    has_toplevel_order_by,
    load_schema,
    query_key,
    reward,
    select_query,
    soft_f1,
    solve,
    uniqueness_ratio,
)

__all__ = [
    "EvosqlError",
    "canonicalize_sql",
    "depth_limit",
    "execute",
    "execution_accuracy",
    "extract_select_statement",
    "fingerprint",
    "has_toplevel_order_by",
    "load_schema",
    "query_key",
    "reward",
    "select_query",
    "soft_f1",
    "solve",
    "uniqueness_ratio",
]
