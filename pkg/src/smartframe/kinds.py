"""Return-type identifiers: normalization, classification, acceptance checks.

Identifiers are opaque lowercase strings. The defaults cover the basic
Python scalars/containers plus the four rich kinds (geodataframe, dataframe,
map, figure), and there is a distinguished "none" kind for side-effect-only
code whose execution may legitimately produce no result.
"""

from __future__ import annotations

import numbers
from typing import Any, Iterable

import pandas as pd

from .errors import UsageError
from .metadata import has_geometry

NONE_KIND = "none"
GEODATAFRAME_KIND = "geodataframe"

DEFAULT_RETURN_TYPES = frozenset(
    {
        "int",
        "float",
        "str",
        "bool",
        "list",
        "dict",
        "geodataframe",
        "dataframe",
        "map",
        "figure",
    }
)

# Accepted spellings for rich kinds, normalized case-insensitively.
_ALIASES = {
    "geodataframe": "geodataframe",
    "geopandas.geodataframe": "geodataframe",
    "gdf": "geodataframe",
    "dataframe": "dataframe",
    "pandas.dataframe": "dataframe",
    "figure": "figure",
    "matplotlib.figure": "figure",
    "map": "map",
    "folium.map": "map",
    "none": NONE_KIND,
    "nonetype": NONE_KIND,
}


def normalize_kind(value: Any) -> str:
    """Normalize one return-type identifier.

    Accepts a lowercase-able string, a Python type (int, float, str, bool,
    list, dict, or a class named GeoDataFrame/DataFrame/Figure/Map), or None
    for the distinguished unit kind.
    """
    if value is None:
        return NONE_KIND
    if isinstance(value, str):
        lowered = value.strip().lower()
        if not lowered:
            raise UsageError("empty return-type identifier")
        return _ALIASES.get(lowered, lowered)
    if isinstance(value, type):
        return _ALIASES.get(value.__name__.lower(), value.__name__.lower())
    raise UsageError(f"cannot interpret return type {value!r}")


def normalize_return_types(value: Any) -> frozenset[str]:
    """Normalize a return-type argument to a set of identifiers.

    A single identifier (including None) becomes a singleton set; any
    non-string iterable is normalized element-wise.
    """
    if value is None or isinstance(value, (str, type)):
        return frozenset({normalize_kind(value)})
    if isinstance(value, Iterable):
        kinds = frozenset(normalize_kind(v) for v in value)
        if not kinds:
            raise UsageError("return-type set must not be empty")
        return kinds
    return frozenset({normalize_kind(value)})


def _is_figure(value: Any) -> bool:
    try:
        from matplotlib.figure import Figure
    except ImportError:
        return type(value).__name__ == "Figure"
    return isinstance(value, Figure)


def _is_map(value: Any) -> bool:
    # folium is typically absent; recognize map objects by class name.
    return type(value).__name__ == "Map"


def classify_value(value: Any) -> str | None:
    """Most specific kind identifier describing a value, or None."""
    if value is None:
        return NONE_KIND
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, numbers.Integral):
        return "int"
    if isinstance(value, numbers.Real):
        return "float"
    if isinstance(value, str):
        return "str"
    if isinstance(value, pd.DataFrame):
        return GEODATAFRAME_KIND if has_geometry(value) else "dataframe"
    if _is_figure(value):
        return "figure"
    if _is_map(value):
        return "map"
    if isinstance(value, list):
        return "list"
    if isinstance(value, dict):
        return "dict"
    return None


def kind_accepts(kind: str, value: Any) -> bool:
    """Whether a value satisfies one kind identifier."""
    if kind == NONE_KIND:
        return value is None
    if kind == "bool":
        return isinstance(value, bool)
    if kind == "int":
        return isinstance(value, numbers.Integral) and not isinstance(value, bool)
    if kind == "float":
        return isinstance(value, numbers.Real) and not isinstance(value, bool)
    if kind == "str":
        return isinstance(value, str)
    if kind == "list":
        return isinstance(value, list)
    if kind == "dict":
        return isinstance(value, dict)
    if kind == GEODATAFRAME_KIND:
        return isinstance(value, pd.DataFrame) and has_geometry(value)
    if kind == "dataframe":
        return isinstance(value, pd.DataFrame)
    if kind == "figure":
        return _is_figure(value)
    if kind == "map":
        return _is_map(value)
    return False


def match_kind(value: Any, expected: frozenset[str] | set[str]) -> str | None:
    """Kind identifier to report for a value against an expected set.

    Prefers the value's own classification when it is expected; otherwise the
    first (sorted) expected kind that accepts the value. None when nothing
    matches.
    """
    observed = classify_value(value)
    if observed in expected:
        return observed
    for kind in sorted(expected):
        if kind_accepts(kind, value):
            return kind
    return None
