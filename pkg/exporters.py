"""
Report export for gapdiag.

JSON for single runs, CSV for sweeps. Files are written to a temporary file in
the target directory and renamed into place, so a report is either complete or
absent. Output is byte-deterministic: sorted keys, '\\n' line endings.
"""

import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from matrix_core import ComplexMatrix, matrix_to_json, model_to_json

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """json.dumps fallback for numpy scalars, complex numbers and arrays"""
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.complexfloating):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        if value.ndim == 2:
            return matrix_to_json(value)
        if np.iscomplexobj(value):
            return [[float(v.real), float(v.imag)] for v in value.reshape(-1)]
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


class ReportExporter:
    """Atomic JSON and CSV report writers"""

    @staticmethod
    def _write_atomic(path: Path, text: str) -> bool:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
            try:
                with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
                    handle.write(text)
                os.replace(tmp_name, path)
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise
            return True
        except OSError as e:
            logger.error("Report export error for %s: %s", path, e)
            return False

    @staticmethod
    def dumps_json(data: Any, indent: int = 2) -> str:
        return json.dumps(data, indent=indent, sort_keys=True, ensure_ascii=False,
                          default=to_jsonable, allow_nan=False) + '\n'

    @staticmethod
    def save_to_json(data: Dict[str, Any], path: Union[str, Path], indent: int = 2) -> bool:
        """Save a report as JSON"""
        return ReportExporter._write_atomic(Path(path), ReportExporter.dumps_json(data, indent))

    @staticmethod
    def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], delimiter: str = ',') -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, delimiter=delimiter, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow(['' if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                             for v in row])
        return buffer.getvalue()

    @staticmethod
    def save_to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: Union[str, Path],
                    delimiter: str = ',') -> bool:
        """Save a sweep table as CSV with a mandatory header row"""
        return ReportExporter._write_atomic(Path(path), ReportExporter.dumps_csv(header, rows, delimiter))

    @staticmethod
    def save_text(text: str, path: Union[str, Path]) -> bool:
        """Save pre-rendered report text"""
        return ReportExporter._write_atomic(Path(path), text)


def save_model(h0: ComplexMatrix, v: ComplexMatrix, path: Union[str, Path]) -> bool:
    """Write an {"h0", "v"} model file"""
    return ReportExporter.save_to_json(model_to_json(h0, v), path)


def failure_list(errors: Iterable[Any]) -> List[Dict[str, str]]:
    """Machine-readable failure entries {module, invariant, message}"""
    entries: List[Dict[str, str]] = []
    for error in errors:
        if hasattr(error, 'to_dict'):
            entries.append(error.to_dict())
        elif isinstance(error, dict):
            entries.append({k: str(error.get(k, '')) for k in ('module', 'invariant', 'message')})
    return entries


def default_report_path(reports_dir: Union[str, Path], command: str, suffix: str,
                        seed: Optional[int] = None) -> Path:
    """reports/<command>[_seed<seed>].<suffix>"""
    name = command.replace('-', '_')
    if seed is not None:
        name += f"_seed{seed}"
    return Path(reports_dir) / f"{name}.{suffix}"
