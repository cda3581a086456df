# rate_lab/utils.py
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

from splitflow.conf import _cfg
from .domain import ErrorTable, RateFit

ERROR_COLUMNS = ("n", "error", "ci_low", "ci_high", "bound_theta1", "bound_theta2")
# columnas que el subcomando `fit` acepta como error, en orden de preferencia
FIT_COLUMNS = ("error", "mc_estimate")


def _fmt(value) -> str:
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def write_csv(target: Union[str, Path], columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """CSV determinista con la línea de versión `# splitflow-v1` como cabecera."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {_cfg('CSV_SCHEMA')}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return target


def write_error_table(table: ErrorTable, target: Union[str, Path]) -> Path:
    return write_csv(
        target,
        ERROR_COLUMNS,
        ([r.n, r.error, r.ci_low, r.ci_high, r.bound_theta1, r.bound_theta2] for r in table.rows),
    )


def read_fit_points(source: Union[str, Path]) -> List[Tuple[float, float]]:
    """Lee (n, error) de cualquier CSV emitido (ignora comentarios `#`)."""
    with Path(source).open(encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    column = next((c for c in FIT_COLUMNS if c in (reader.fieldnames or ())), None)
    if column is None or "n" not in (reader.fieldnames or ()):
        raise ValueError(f"El CSV necesita las columnas 'n' y una de {FIT_COLUMNS}.")
    return [(float(row["n"]), float(row[column])) for row in reader]


def fit_summary(fit: RateFit) -> dict:
    return {"slope": fit.slope, "r2": fit.r2, "intercept": fit.intercept, "stderr": fit.stderr}


def write_json(target: Union[str, Path], payload: dict) -> Path:
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return target
