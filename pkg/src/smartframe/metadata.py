"""Frame metadata derivation and privacy-preserving textual descriptions.

Automated metadata (schema, numeric statistics, spatial properties) is
computed from the frame itself. A Descriptor turns frame, metadata, and
user description into the unified textual description (UTD), which is the
only frame-derived text that ever leaves the process. The default
PublicDescriptor includes a bounded row excerpt; custom descriptors fully
control what is shared.

A "frame" here is duck-typed: any pandas.DataFrame exposing a geometry
attribute (a column of shapely geometries). CRS is read from ``frame.crs``
when present, else from ``frame.attrs["crs"]``.
"""

from __future__ import annotations

import hashlib
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Any, Mapping, Sequence

import pandas as pd
from pandas.api import types as pdtypes

from .errors import ConfigurationError, FrameConstructionError


def _six_sig(value: float) -> float:
    """Round to 6 significant digits; keeps UTDs and digests platform-stable."""
    return float(f"{value:.6g}")


@dataclass(frozen=True)
class ColumnInfo:
    """One schema entry: column name, data type, and nullability."""

    name: str
    dtype: str
    nullable: bool


@dataclass(frozen=True)
class NumericStats:
    """Summary statistics of one numeric column over its non-null values."""

    mean: float | None
    variance: float | None
    minimum: float | None
    maximum: float | None


@dataclass(frozen=True)
class SpatialInfo:
    """Spatial properties of the geometry attribute."""

    crs: str | None
    geometry_types: tuple[str, ...]
    bounds: tuple[float, float, float, float] | None
    row_count: int


@dataclass(frozen=True)
class AutomatedMetadata:
    """Metadata computed from the frame itself, with no user input."""

    schema: tuple[ColumnInfo, ...]
    stats: tuple[tuple[str, NumericStats], ...]
    spatial: SpatialInfo


@dataclass(frozen=True)
class LinkedSummary:
    """What is shared about a linked frame: metadata and description only."""

    label: str
    automated: AutomatedMetadata
    description: str


@dataclass(frozen=True)
class FrameMetadata:
    """Full metadata tuple: automated part, verbatim user text, linked summaries.

    The description is stored byte-for-byte as given and never parsed or
    rewritten. Linked summaries never contain row data.
    """

    automated: AutomatedMetadata
    description: str
    linked: tuple[LinkedSummary, ...] = ()


# ---------------------------------------------------------------------------
# frame inspection
# ---------------------------------------------------------------------------

def geometry_column(frame: Any) -> str:
    """Name of the frame's geometry column; raises if there is none."""
    geom = getattr(frame, "geometry", None)
    if geom is None:
        raise FrameConstructionError(
            "object has no geometry attribute; a geospatial dataframe "
            "(pandas DataFrame with a 'geometry' column of shapely "
            "geometries) is required"
        )
    return getattr(geom, "name", "geometry")


def has_geometry(frame: Any) -> bool:
    """True when the object quacks like a geospatial dataframe."""
    if not isinstance(frame, pd.DataFrame):
        return False
    try:
        geometry_column(frame)
    except FrameConstructionError:
        return False
    return True


def _frame_crs(frame: Any) -> str | None:
    crs = getattr(frame, "crs", None)
    if crs is None and hasattr(frame, "attrs"):
        crs = frame.attrs.get("crs")
    return str(crs) if crs is not None else None


def derive_automated_metadata(frame: Any) -> AutomatedMetadata:
    """Extract schema, numeric statistics, and spatial properties from a frame.

    Statistics are computed over non-null values only, with population
    variance, and rounded to 6 significant digits. Empty frames yield empty
    stats and absent bounds.
    """
    geom_col = geometry_column(frame)

    schema = []
    for name in frame.columns:
        series = frame[name]
        dtype = "geometry" if name == geom_col else str(series.dtype)
        schema.append(
            ColumnInfo(name=str(name), dtype=dtype, nullable=bool(series.isna().any()))
        )

    stats: list[tuple[str, NumericStats]] = []
    if len(frame) > 0:
        for name in frame.columns:
            if name == geom_col:
                continue
            series = frame[name]
            if not pdtypes.is_numeric_dtype(series) or pdtypes.is_bool_dtype(series):
                continue
            values = series.dropna()
            if values.empty:
                stats.append(
                    (str(name), NumericStats(None, None, None, None))
                )
                continue
            stats.append(
                (
                    str(name),
                    NumericStats(
                        mean=_six_sig(float(values.mean())),
                        variance=_six_sig(float(values.var(ddof=0))),
                        minimum=_six_sig(float(values.min())),
                        maximum=_six_sig(float(values.max())),
                    ),
                )
            )

    geoms = [g for g in frame[geom_col] if g is not None]
    geometry_types = tuple(sorted({g.geom_type for g in geoms}))
    if geoms:
        bounds_list = [g.bounds for g in geoms]
        bounds = (
            min(b[0] for b in bounds_list),
            min(b[1] for b in bounds_list),
            max(b[2] for b in bounds_list),
            max(b[3] for b in bounds_list),
        )
    else:
        bounds = None

    spatial = SpatialInfo(
        crs=_frame_crs(frame),
        geometry_types=geometry_types,
        bounds=bounds,
        row_count=int(len(frame)),
    )
    return AutomatedMetadata(schema=tuple(schema), stats=tuple(stats), spatial=spatial)


def initial_metadata(frame: Any, description: str | None) -> FrameMetadata:
    """Metadata of a freshly constructed smart frame (no linked summaries)."""
    return FrameMetadata(
        automated=derive_automated_metadata(frame),
        description=description or "",
        linked=(),
    )


def merge_linked_metadata(
    base: FrameMetadata, linked: Sequence[tuple[Any, FrameMetadata]]
) -> FrameMetadata:
    """Replace the linked summaries of ``base`` with those of ``linked``.

    Each entry is a (frame, metadata) pair; summaries keep only the automated
    metadata and description, labeled positionally df2, df3, ... Idempotent
    for identical input lists.
    """
    summaries = tuple(
        LinkedSummary(
            label=f"df{position + 2}",
            automated=metadata.automated,
            description=metadata.description,
        )
        for position, (_, metadata) in enumerate(linked)
    )
    return replace(base, linked=summaries)


# ---------------------------------------------------------------------------
# canonical serialization and digests
# ---------------------------------------------------------------------------

def _automated_payload(automated: AutomatedMetadata) -> dict:
    return {
        "schema": [
            [c.name, c.dtype, c.nullable] for c in automated.schema
        ],
        "stats": [
            [name, [s.mean, s.variance, s.minimum, s.maximum]]
            for name, s in automated.stats
        ],
        "spatial": {
            "crs": automated.spatial.crs,
            "geometry_types": list(automated.spatial.geometry_types),
            "bounds": list(automated.spatial.bounds)
            if automated.spatial.bounds is not None
            else None,
            "rows": automated.spatial.row_count,
        },
    }


def metadata_payload(metadata: FrameMetadata) -> dict:
    """JSON-friendly canonical form of full frame metadata."""
    return {
        "automated": _automated_payload(metadata.automated),
        "description": metadata.description,
        "linked": [
            {
                "label": s.label,
                "automated": _automated_payload(s.automated),
                "description": s.description,
            }
            for s in metadata.linked
        ],
    }


def _digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def metadata_digest(metadata: FrameMetadata) -> str:
    """Digest of the full metadata tuple (automated, description, linked)."""
    return _digest(metadata_payload(metadata))


def instance_digest(metadata: FrameMetadata) -> str:
    """Digest identifying a smart-frame instance: automated metadata + description.

    Stable across conversations of the same instance (linked summaries vary
    per call and are excluded).
    """
    return _digest(
        {
            "automated": _automated_payload(metadata.automated),
            "description": metadata.description,
        }
    )


# ---------------------------------------------------------------------------
# descriptors and the UTD
# ---------------------------------------------------------------------------

class Descriptor(ABC):
    """Policy object deciding what frame-derived text leaves the process.

    describe() must be a pure function of its inputs: identical
    (frame, metadata, description) always produce a byte-identical UTD.
    """

    @abstractmethod
    def describe(self, frame: Any, metadata: FrameMetadata, description: str) -> str:
        """Produce the unified textual description for this frame."""

    @property
    def excerpt_size(self) -> int:
        """Number of rows validation excerpts may use; 0 shares no rows."""
        return 0

    def generate_synthetic(self, frame: Any, metadata: FrameMetadata):
        """Build a synthetic stand-in frame for validation runs.

        Descriptors without a synthetic generator keep the default, which
        signals a configuration error when synthetic validation is requested.
        """
        raise ConfigurationError(
            f"{type(self).__name__} has no synthetic data generator; "
            "configure a descriptor that implements generate_synthetic() "
            "or use excerpt validation"
        )


def _render_automated(automated: AutomatedMetadata, indent: str = "") -> list[str]:
    lines = [f"{indent}Schema:"]
    for column in automated.schema:
        nullability = "nullable" if column.nullable else "no nulls"
        lines.append(f"{indent}- {column.name} ({column.dtype}, {nullability})")
    if automated.stats:
        lines.append(f"{indent}Numeric statistics (6 significant digits):")
        for name, s in automated.stats:
            if s.mean is None:
                lines.append(f"{indent}- {name}: all values null")
            else:
                lines.append(
                    f"{indent}- {name}: mean={s.mean:.6g}, variance={s.variance:.6g}, "
                    f"min={s.minimum:.6g}, max={s.maximum:.6g}"
                )
    spatial = automated.spatial
    lines.append(f"{indent}Spatial properties:")
    lines.append(f"{indent}- CRS: {spatial.crs if spatial.crs else '(not set)'}")
    types = ", ".join(spatial.geometry_types) if spatial.geometry_types else "(none)"
    lines.append(f"{indent}- Geometry types: {types}")
    if spatial.bounds is not None:
        minx, miny, maxx, maxy = spatial.bounds
        lines.append(
            f"{indent}- Bounds (minx, miny, maxx, maxy): "
            f"{minx!r}, {miny!r}, {maxx!r}, {maxy!r}"
        )
    else:
        lines.append(f"{indent}- Bounds (minx, miny, maxx, maxy): (no geometries)")
    lines.append(f"{indent}- Rows: {spatial.row_count}")
    return lines


class PublicDescriptor(Descriptor):
    """Default descriptor: metadata, description, and a bounded row excerpt.

    Only the primary frame's excerpt is ever serialized; linked frames are
    summarized by metadata and description alone, regardless of excerpt
    settings.
    """

    def __init__(self, excerpt_rows: int = 5):
        if excerpt_rows < 0:
            raise ConfigurationError("excerpt_rows must be >= 0")
        self.excerpt_rows = excerpt_rows

    @property
    def excerpt_size(self) -> int:
        return self.excerpt_rows

    def describe(self, frame: Any, metadata: FrameMetadata, description: str) -> str:
        lines = ["Frame df1:"]
        lines.append(
            f"Description: {description if description else '(not provided)'}"
        )
        lines.extend(_render_automated(metadata.automated))
        total = metadata.automated.spatial.row_count
        shown = min(self.excerpt_rows, total)
        if shown > 0:
            lines.append(f"Sample rows (first {shown} of {total}, CSV):")
            excerpt = frame.head(shown)
            lines.append(excerpt.to_csv(index=False, lineterminator="\n").rstrip("\n"))
        for summary in metadata.linked:
            lines.append("")
            lines.append(f"Linked frame {summary.label}:")
            lines.append(
                "Description: "
                f"{summary.description if summary.description else '(not provided)'}"
            )
            lines.extend(_render_automated(summary.automated))
        return "\n".join(lines)


class RedactingDescriptor(Descriptor):
    """Shares what an inner descriptor would, with columns renamed first.

    The rename map is applied to a copy of the frame and to a rebuilt
    metadata tuple (schema, stats, and linked summaries), so redacted tokens
    never reach the UTD. The geometry column cannot be renamed.
    """

    def __init__(self, renames: Mapping[str, str], inner: Descriptor | None = None):
        self.renames = dict(renames)
        self.inner = inner if inner is not None else PublicDescriptor()

    @property
    def excerpt_size(self) -> int:
        return self.inner.excerpt_size

    def _redact_automated(self, automated: AutomatedMetadata) -> AutomatedMetadata:
        schema = tuple(
            replace(c, name=self.renames.get(c.name, c.name)) for c in automated.schema
        )
        stats = tuple(
            (self.renames.get(name, name), s) for name, s in automated.stats
        )
        return replace(automated, schema=schema, stats=stats)

    def describe(self, frame: Any, metadata: FrameMetadata, description: str) -> str:
        geom_col = geometry_column(frame)
        renames = {k: v for k, v in self.renames.items() if k != geom_col}
        redacted_frame = frame.rename(columns=renames)
        redacted = FrameMetadata(
            automated=self._redact_automated(metadata.automated),
            description=description,
            linked=tuple(
                replace(s, automated=self._redact_automated(s.automated))
                for s in metadata.linked
            ),
        )
        return self.inner.describe(redacted_frame, redacted, description)


def build_utd(descriptor: Descriptor, frame: Any, metadata: FrameMetadata) -> str:
    """Produce the unified textual description through the given descriptor."""
    return descriptor.describe(frame, metadata, metadata.description)
