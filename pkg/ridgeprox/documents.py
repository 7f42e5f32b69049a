"""
Input documents and reports: JSON / CSV codecs, digests and atomic writes
"""
import dataclasses
import hashlib
import json
import logging
import math
import os
import tempfile
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from . import config
from .exceptions import InputDocumentError, RidgeProxError
from .geometry import PointSet, ToleranceParams, to_number

logger = logging.getLogger(__name__)

_DOCUMENT_KEYS = {"points", "labels", "directions", "field", "exact", "tolerances", "basis"}


@dataclasses.dataclass(frozen=True)
class InputDocument:
    """A point set, its two directions and optionally a field, as written by the user"""

    points: List[List[Any]]
    directions: List[List[Any]]
    labels: Optional[List[str]] = None
    field: Optional[List[Any]] = None
    exact: bool = False
    abs_tol: float = config.DEFAULT_ABS_TOL
    rel_tol: float = config.DEFAULT_REL_TOL
    basis: Optional[List[List[Any]]] = None
    digest: str = ""

    @classmethod
    def from_dict(cls, data: Any, digest: str = "") -> "InputDocument":
        """
        Validate the document schema

        Raises:
            InputDocumentError: naming the offending field
        """
        if not isinstance(data, dict):
            raise InputDocumentError("Document must be a JSON object", where="$")
        unknown = sorted(set(data) - _DOCUMENT_KEYS)
        if unknown:
            raise InputDocumentError(f"Unknown keys {unknown}", where="$")

        points = data.get("points")
        if not isinstance(points, list) or not points:
            raise InputDocumentError("Expected a non-empty list of points", where="points")
        width = None
        for i, row in enumerate(points):
            if not isinstance(row, list) or not row:
                raise InputDocumentError("Expected a non-empty list of numbers", where=f"points[{i}]")
            _check_numbers(row, f"points[{i}]")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InputDocumentError(f"Row has {len(row)} coordinates, expected {width}", where=f"points[{i}]")

        directions = data.get("directions")
        if not isinstance(directions, list) or len(directions) != 2:
            raise InputDocumentError("Expected exactly two direction vectors", where="directions")
        for i, d in enumerate(directions):
            if not isinstance(d, list) or len(d) != width:
                raise InputDocumentError(f"Expected {width} coordinates", where=f"directions[{i}]")
            _check_numbers(d, f"directions[{i}]")

        labels = data.get("labels")
        if labels is not None:
            if not isinstance(labels, list) or len(labels) != len(points):
                raise InputDocumentError(f"Expected {len(points)} labels", where="labels")
            labels = [str(s) for s in labels]

        field = data.get("field")
        if field is not None:
            if not isinstance(field, list) or len(field) != len(points):
                raise InputDocumentError(f"Expected {len(points)} field values", where="field")
            _check_numbers(field, "field")

        exact = data.get("exact", False)
        if not isinstance(exact, bool):
            raise InputDocumentError("Expected true or false", where="exact")

        tolerances = data.get("tolerances", {})
        if not isinstance(tolerances, dict) or set(tolerances) - {"abs_tol", "rel_tol"}:
            raise InputDocumentError("Expected an object with abs_tol and/or rel_tol", where="tolerances")
        abs_tol = tolerances.get("abs_tol", config.DEFAULT_ABS_TOL)
        rel_tol = tolerances.get("rel_tol", config.DEFAULT_REL_TOL)
        for name, value in (("abs_tol", abs_tol), ("rel_tol", rel_tol)):
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
                raise InputDocumentError("Expected a non-negative number", where=f"tolerances.{name}")

        basis = data.get("basis")
        if basis is not None:
            if not isinstance(basis, list) or not all(isinstance(b, list) and len(b) == width for b in basis):
                raise InputDocumentError(f"Expected a list of {width}-vectors", where="basis")
            for i, b in enumerate(basis):
                _check_numbers(b, f"basis[{i}]")

        return cls(
            points=points,
            directions=directions,
            labels=labels,
            field=field,
            exact=exact,
            abs_tol=float(abs_tol),
            rel_tol=float(rel_tol),
            basis=basis,
            digest=digest,
        )

    @classmethod
    def load(cls, path: Union[str, Path], dir1: Optional[str] = None, dir2: Optional[str] = None) -> "InputDocument":
        """Read a JSON document, or a CSV of points when the file ends in .csv"""
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise InputDocumentError(f"Cannot read input: {e.strerror}", where=str(path)) from e
        digest = sha256_hex(raw)
        if path.suffix.lower() == ".csv":
            return cls.from_csv(path, dir1, dir2, digest=digest)
        try:
            data = json.loads(raw.decode("utf-8"))
        except UnicodeDecodeError as e:
            raise InputDocumentError("Input is not UTF-8 text", where=str(path)) from e
        except json.JSONDecodeError as e:
            raise InputDocumentError(e.msg, where=f"{path}:{e.lineno}:{e.colno}") from e
        return cls.from_dict(data, digest=digest)

    @classmethod
    def from_csv(cls, path: Union[str, Path], dir1: Optional[str], dir2: Optional[str], digest: str = "") -> "InputDocument":
        """
        Points from CSV: one row per point, optional `label` and `field` columns,
        every other column a coordinate
        """
        if not dir1 or not dir2:
            raise InputDocumentError("CSV input needs --dir1 and --dir2", where=str(path))
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise InputDocumentError(str(e), where=str(path)) from e
        labels = frame.pop("label").tolist() if "label" in frame.columns else None
        field = frame.pop("field").tolist() if "field" in frame.columns else None
        points = frame.values.tolist()
        data = {
            "points": points,
            "directions": [_parse_vector(dir1, "--dir1"), _parse_vector(dir2, "--dir2")],
        }
        if labels is not None:
            data["labels"] = labels
        if field is not None:
            data["field"] = field
        return cls.from_dict(data, digest=digest)

    def tolerance(self, exact: Optional[bool] = None, abs_tol: Optional[float] = None, rel_tol: Optional[float] = None) -> ToleranceParams:
        return ToleranceParams(
            abs_tol=self.abs_tol if abs_tol is None else abs_tol,
            rel_tol=self.rel_tol if rel_tol is None else rel_tol,
            exact=self.exact if exact is None else exact,
        )

    def point_set(self, exact: Optional[bool] = None, abs_tol: Optional[float] = None, rel_tol: Optional[float] = None) -> PointSet:
        tol = self.tolerance(exact, abs_tol, rel_tol)
        try:
            return PointSet.from_coordinates(
                self.points, self.directions[0], self.directions[1], labels=self.labels, tol=tol, exact=tol.exact
            )
        except (ValueError, ZeroDivisionError) as e:
            if isinstance(e, RidgeProxError):
                raise
            raise InputDocumentError(str(e), where="points") from e


def _check_numbers(values: Sequence[Any], where: str):
    for j, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float, str)):
            raise InputDocumentError(f"Expected a number or 'p/q' string, got {v!r}", where=f"{where}[{j}]")
        if isinstance(v, str):
            try:
                to_number(v, exact=True)
            except (ValueError, ZeroDivisionError) as e:
                raise InputDocumentError(f"Cannot parse {v!r} as a number", where=f"{where}[{j}]") from e


def _parse_vector(text: str, where: str) -> List[str]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise InputDocumentError("Expected comma-separated numbers", where=where)
    return parts


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_digest(payload: Any) -> str:
    """Digest of a JSON-able payload in canonical form"""
    text = json.dumps(jsonable(payload), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return sha256_hex(text.encode("utf-8"))


def jsonable(value: Any) -> Any:
    """Convert results to JSON types; Fractions with a denominator become 'p/q' strings, non-finite floats 'inf' / '-inf' / 'nan'"""
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    if isinstance(value, Enum):
        return str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if hasattr(value, "_asdict"):
        return {k: jsonable(v) for k, v in value._asdict().items()}
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [jsonable(v) for v in items]
    return value


@dataclasses.dataclass
class Report:
    """Machine-readable command output"""

    command: Dict[str, Any]
    input_digest: str
    results: Dict[str, Any]
    warnings: List[str] = dataclasses.field(default_factory=list)
    timing: Dict[str, float] = dataclasses.field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": jsonable(self.command),
            "input_digest": self.input_digest,
            "results": jsonable(self.results),
            "warnings": list(self.warnings),
            "timing": jsonable(self.timing),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        data = json.loads(text)
        return cls(
            command=data["command"],
            input_digest=data["input_digest"],
            results=data["results"],
            warnings=data.get("warnings", []),
            timing=data.get("timing", {}),
        )

    def write(self, path: Union[str, Path]):
        atomic_write_text(path, self.to_json())
        logger.info(f"Report written to {path}")


def atomic_write_text(path: Union[str, Path], text: str):
    """Write through a temporary file in the target directory, then rename over the target"""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_value(value: Any) -> Any:
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def series_frame(rows: Sequence[Any], columns: Sequence[str]) -> pd.DataFrame:
    """Rows (NamedTuples or dicts) to a DataFrame with the given column order"""
    records = []
    for row in rows:
        data = row._asdict() if hasattr(row, "_asdict") else dict(row)
        records.append({c: _csv_value(data[c]) for c in columns})
    return pd.DataFrame.from_records(records, columns=list(columns))


def write_csv(rows: Sequence[Any], columns: Sequence[str], path: Union[str, Path]):
    """Plot-ready CSV with '.' decimals, shortest round-trip floats and '\\n' line endings"""
    frame = series_frame(rows, columns)
    atomic_write_text(path, frame.to_csv(index=False, lineterminator="\n"))
    logger.info(f"CSV series ({len(frame)} rows) written to {path}")
