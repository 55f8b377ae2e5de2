"""Simulated-versus-analytic comparison at matched outage, by linear interpolation in p."""

import logging
from collections import OrderedDict
from dataclasses import asdict, dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..utils.csv_io import CurveRecord, pick_source

logger = logging.getLogger(__name__)

FIRST_PREFERENCE = ('simulated', 'achievable')
SECOND_PREFERENCE = ('achievable', 'simulated')

# gamma_r values round-trip through 12-digit text
GROUP_DIGITS = 12
P_SLACK = 1e-12


@dataclass(frozen=True)
class ComparisonRow:
    gamma_r: float
    p: float
    t_sim: float
    t_theory: float
    rel_error: float

    def as_row(self) -> dict:
        return asdict(self)


def _grouped(records: Sequence[CurveRecord], source: str) -> Dict[float, List[Tuple[float, float]]]:
    groups: Dict[float, List[Tuple[float, float]]] = OrderedDict()
    for record in records:
        if record.source_tag != source:
            continue
        key = round(record.gamma_r, GROUP_DIGITS)
        groups.setdefault(key, []).append((record.p, record.t_normalized))
    for points in groups.values():
        points.sort()
    return groups


def compare_records(first: Sequence[CurveRecord], second: Sequence[CurveRecord]) -> List[ComparisonRow]:
    """|t_first - t_second| / t_second at every first-curve point inside the second curve's p-range.

    The first input contributes its simulated points (else achievable, else its
    first source); the second its achievable points (else simulated, else its
    first source). Raises ValueError when no point can be matched.
    """
    first_groups = _grouped(first, pick_source(first, FIRST_PREFERENCE))
    second_groups = _grouped(second, pick_source(second, SECOND_PREFERENCE))

    rows: List[ComparisonRow] = []
    for gamma_r, points in first_groups.items():
        reference = second_groups.get(gamma_r)
        if not reference:
            logger.warning(f"gamma_r={gamma_r:g} appears only in the first input; not compared")
            continue

        xs = np.array([p for p, _ in reference])
        ys = np.array([t for _, t in reference])
        for p, t in points:
            if p < xs[0] - P_SLACK or p > xs[-1] + P_SLACK:
                continue
            t_theory = float(np.interp(p, xs, ys))
            if t_theory <= 0:
                logger.warning(f"Reference throughput is zero at p={p:g}, gamma_r={gamma_r:g}; not compared")
                continue
            rows.append(ComparisonRow(gamma_r=gamma_r, p=p, t_sim=t, t_theory=t_theory,
                                      rel_error=abs(t - t_theory) / t_theory))

    if not rows:
        raise ValueError("the two inputs share no gamma_r with overlapping p-ranges")
    return rows


def plot_series(first: Sequence[CurveRecord], second: Sequence[CurveRecord]) -> Dict[str, Tuple[list, list]]:
    """Every (source, gamma_r) curve of both inputs, labelled for the legend"""
    series: Dict[str, Tuple[list, list]] = OrderedDict()
    for records in (first, second):
        sources = list(OrderedDict.fromkeys(r.source_tag for r in records))
        for source in sources:
            for gamma_r, points in _grouped(records, source).items():
                label = f'{source} gamma_r={gamma_r:g}'
                while label in series:
                    label += "'"
                series[label] = ([p for p, _ in points], [t for _, t in points])
    return series
