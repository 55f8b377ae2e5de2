"""
CSV serialization of estimates, curves, comparison summaries and oracle
results. Column order is fixed per file kind; floats carry 12 significant
digits so identical runs produce byte-identical files.
"""

import csv
import io
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, TextIO

from marshmallow import Schema, ValidationError

from ..exceptions import CsvFormatError
from ..schemas import OracleRowSchema, SimulateRowSchema, SummaryRowSchema, TheoryRowSchema

logger = logging.getLogger(__name__)

SIMULATE_COLUMNS = (
    'n', 'm', 'gamma_r', 'g_c', 'Delta', 'K', 'K_overridden', 'caching_kind', 'trials', 'seed', 'C',
    'p_hat', 'p_ci95', 'tmin_hat', 'tmin_ci95', 'tmin_diag_minuser', 'analytic_outage', 'status',
)
THEORY_COLUMNS = ('source_tag', 'case_tag', 'p', 't_normalized', 'gamma_r', 'm', 'n', 'K', 'C', 'Delta')
SUMMARY_COLUMNS = ('gamma_r', 'p', 't_sim', 't_theory', 'rel_error')
ORACLE_COLUMNS = ('suite', 'cases', 'max_gap', 'passed')

SCHEMAS = {
    SIMULATE_COLUMNS: SimulateRowSchema,
    THEORY_COLUMNS: TheoryRowSchema,
    SUMMARY_COLUMNS: SummaryRowSchema,
    ORACLE_COLUMNS: OracleRowSchema,
}


@dataclass(frozen=True)
class CurveRecord:
    """One (p, t/C) point read back from a simulate or theory CSV"""
    gamma_r: float
    source_tag: str
    p: float
    t_normalized: float


def _schema_for(columns: Sequence[str], digits: int) -> Schema:
    schema = SCHEMAS[tuple(columns)]()
    if digits != 12:
        for schema_field in schema.fields.values():
            if hasattr(schema_field, 'digits'):
                schema_field.digits = digits
    return schema


def format_rows(columns: Sequence[str], rows: Iterable[Mapping], digits: int = 12) -> str:
    """Render rows as CSV text with a header; columns pick the row schema."""
    schema = _schema_for(columns, digits)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow(schema.dump(row))
    return buffer.getvalue()


def write_rows(path: str, columns: Sequence[str], rows: Iterable[Mapping], digits: int = 12) -> str:
    text = format_rows(columns, rows, digits)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        handle.write(text)
    logger.info(f"Wrote {text.count(chr(10)) - 1} rows to {path}")
    return text


def read_rows(source: TextIO, columns: Sequence[str]) -> List[Dict]:
    """Parse and validate every data row; the error names the 1-based data row."""
    reader = csv.DictReader(source)
    missing = [c for c in columns if c not in (reader.fieldnames or [])]
    if missing:
        raise CsvFormatError(f"header is missing columns: {', '.join(missing)}")

    schema = _schema_for(columns, 12)
    rows = []
    for index, raw in enumerate(reader, start=1):
        if None in raw:
            raise CsvFormatError("more cells than header columns", row=index)
        try:
            rows.append(schema.load({c: raw[c] for c in columns}))
        except ValidationError as e:
            raise CsvFormatError(_first_message(e.messages), row=index)
    return rows


def _first_message(messages) -> str:
    if isinstance(messages, dict):
        for key, value in messages.items():
            return f"{key}: {_first_message(value)}"
    if isinstance(messages, list) and messages:
        return _first_message(messages[0])
    return str(messages)


def estimate_row(estimate) -> Dict:
    config = estimate.config
    return {
        'n': config.n,
        'm': config.m,
        'gamma_r': config.gamma_r,
        'g_c': estimate.g_c,
        'Delta': config.delta,
        'K': estimate.K,
        'K_overridden': estimate.K_overridden,
        'caching_kind': estimate.caching_label,
        'trials': estimate.trials,
        'seed': config.seed,
        'C': config.link_rate,
        'p_hat': estimate.p_hat,
        'p_ci95': estimate.p_ci,
        'tmin_hat': estimate.t_min_hat,
        'tmin_ci95': estimate.t_ci,
        'tmin_diag_minuser': estimate.t_min_diag,
        'analytic_outage': estimate.analytic_outage,
        'status': estimate.status,
    }


def skipped_row(skipped) -> Dict:
    config = skipped.config
    return {
        'n': config.n,
        'm': config.m,
        'gamma_r': config.gamma_r,
        'g_c': config.g_c,
        'Delta': config.delta,
        'K': config.K,
        'K_overridden': config.K_overridden,
        'caching_kind': config.caching,
        'trials': config.trials,
        'seed': config.seed,
        'C': config.link_rate,
        'p_hat': None,
        'p_ci95': None,
        'tmin_hat': None,
        'tmin_ci95': None,
        'tmin_diag_minuser': None,
        'analytic_outage': None,
        'status': skipped.status,
    }


def sweep_rows(sweep) -> List[Dict]:
    """Estimates in p_hat order, then the skipped cluster sizes"""
    return [estimate_row(e) for e in sweep.estimates] + [skipped_row(s) for s in sweep.skipped]


def curve_rows(curve, params) -> List[Dict]:
    return [{
        'source_tag': point.source_tag,
        'case_tag': point.case_tag,
        'p': point.p,
        't_normalized': point.t / params.C,
        'gamma_r': params.gamma_r,
        'm': params.m,
        'n': params.n,
        'K': params.K,
        'C': params.C,
        'Delta': params.Delta,
    } for point in curve]


def read_curve_records(path: str) -> List[CurveRecord]:
    """Read (p, t/C) points from either a simulate CSV or a theory CSV.

    Simulate rows with a non-ok status are left out.
    """
    with open(path, newline='', encoding='utf-8') as handle:
        header = handle.readline()
        handle.seek(0)
        names = next(csv.reader([header]), [])

        if 'p_hat' in names:
            records = []
            for row in read_rows(handle, SIMULATE_COLUMNS):
                if row['status'] != 'ok':
                    continue
                records.append(CurveRecord(row['gamma_r'], 'simulated', row['p_hat'],
                                           row['tmin_hat'] / row['C']))
            return records

        if 'source_tag' in names:
            return [CurveRecord(row['gamma_r'], row['source_tag'], row['p'], row['t_normalized'])
                    for row in read_rows(handle, THEORY_COLUMNS)]

    raise CsvFormatError(f"{path}: header matches neither the simulate nor the theory layout")


def pick_source(records: Sequence[CurveRecord], preferred: Sequence[str]) -> Optional[str]:
    """First preferred source present, else the first source in file order."""
    present = [r.source_tag for r in records]
    for tag in preferred:
        if tag in present:
            return tag
    return present[0] if present else None
