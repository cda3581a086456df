# counterexample/utils.py
from __future__ import annotations

from pathlib import Path
from typing import Union

from rate_lab.utils import write_csv
from .constants import COLUMNS
from .domain import DivergenceTable


def write_divergence_table(table: DivergenceTable, target: Union[str, Path]) -> Path:
    return write_csv(
        target,
        COLUMNS,
        (
            [r.n, r.mc_estimate, r.ci_low, r.ci_high, r.subwindow_quantity,
             r.lower_bound, r.exact_moment, r.subwindow_exact]
            for r in table.rows
        ),
    )
