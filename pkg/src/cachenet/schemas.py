from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

from marshmallow import EXCLUDE, Schema, ValidationError, fields, post_load, pre_load, validate, validates

from .network_logic.sim_config import parse_caching
from .network_logic.theory import SourceTag

# Flag spellings that differ from the field they fill
KEY_ALIASES = {
    'K': 'k_override',
    'k': 'k_override',
    'C': 'link_rate',
    'c': 'link_rate',
}


def normalize_keys(data: Dict[str, Any]) -> Dict[str, Any]:
    """Accept flag names with dashes or underscores; drop unset values."""
    normalized = {}
    for key, value in data.items():
        if value is None or value == ():
            continue
        key = str(key).strip()
        key = KEY_ALIASES.get(key, key.replace('-', '_').lower())
        normalized[key] = list(value) if isinstance(value, tuple) else value
    return normalized


class CommaSeparated(fields.List):
    """List field that also accepts a comma-separated string (config files)"""

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, str):
            value = [item.strip() for item in value.split(',') if item.strip()]
        elif not isinstance(value, (list, tuple)):
            value = [value]
        return super()._deserialize(value, attr, data, **kwargs)


class SigFloat(fields.Float):
    """Float written with a fixed number of significant digits; empty cell means missing"""

    def __init__(self, digits: int = 12, **kwargs):
        super().__init__(**kwargs)
        self.digits = digits

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return ''
        return f'{float(value):.{self.digits}g}'

    def _deserialize(self, value, attr, data, **kwargs):
        if value == '' and self.allow_none:
            return None
        return super()._deserialize(value, attr, data, **kwargs)


class CsvBool(fields.Boolean):
    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return ''
        return 'true' if value else 'false'


# Request schemas

class SimulationRequestSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    n = fields.Int(required=True, validate=validate.Range(min=1))
    m = fields.Int(required=True, validate=validate.Range(min=1))
    gamma_r = CommaSeparated(fields.Float(), required=True, validate=validate.Length(min=1))
    g_c = CommaSeparated(fields.Int(), required=True)
    seed = fields.Int(required=True, validate=validate.Range(min=0))
    delta = fields.Float(validate=validate.Range(min=0, min_inclusive=False))
    link_rate = fields.Float(validate=validate.Range(min=0, min_inclusive=False))
    k_override = fields.Int(allow_none=True, validate=validate.Range(min=1))
    caching = fields.Str(load_default='optimal')
    trials = fields.Int(load_default=100, validate=validate.Range(min=1))
    allow_self_hit = fields.Boolean(load_default=False)
    workers = fields.Int(validate=validate.Range(min=1))
    chunk_size = fields.Int(validate=validate.Range(min=1))

    @pre_load
    def normalize(self, data, **kwargs):
        return normalize_keys(data)

    @validates('caching')
    def validate_caching(self, value):
        try:
            parse_caching(value)
        except ValueError as e:
            raise ValidationError(str(e))


class TheoryRequestSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    n = fields.Int(required=True, validate=validate.Range(min=1))
    m = fields.Int(required=True, validate=validate.Range(min=1))
    gamma_r = CommaSeparated(fields.Float(validate=validate.Range(min=0, max=1, min_inclusive=False,
                                                                  max_inclusive=False)),
                             required=True, validate=validate.Length(min=1))
    k_override = fields.Int(allow_none=True, validate=validate.Range(min=1))
    link_rate = fields.Float(validate=validate.Range(min=0, min_inclusive=False))
    delta = fields.Float(validate=validate.Range(min=0, min_inclusive=False))
    g_c = CommaSeparated(fields.Float(validate=validate.Range(min=0, min_inclusive=False)), load_default=list)
    g_r = CommaSeparated(fields.Float(validate=validate.Range(min=0, min_inclusive=False)), load_default=list)
    p_grid = CommaSeparated(fields.Float(validate=validate.Range(min=0, max=1)), allow_none=True)
    rho1 = fields.Float(allow_none=True)
    rho2 = fields.Float(allow_none=True)
    rho3 = fields.Float(allow_none=True)
    sources = CommaSeparated(fields.Str(validate=validate.OneOf(['achievable', 'outer', 'baselines'])),
                             load_default=lambda: ['achievable', 'outer', 'baselines'])
    eps_small = fields.Float(validate=validate.Range(min=0, min_inclusive=False))

    @pre_load
    def normalize(self, data, **kwargs):
        # an explicitly empty p_grid ('') loads as [] and is kept apart from an absent one
        return normalize_keys(data)


# CSV row schemas

class SimulateRowSchema(Schema):
    n = fields.Int(required=True)
    m = fields.Int(required=True)
    gamma_r = SigFloat(required=True)
    g_c = fields.Int(required=True)
    Delta = SigFloat(required=True)
    K = fields.Int(required=True)
    K_overridden = CsvBool(required=True)
    caching_kind = fields.Str(required=True)
    trials = fields.Int(required=True)
    seed = fields.Int(required=True)
    C = SigFloat(required=True)
    p_hat = SigFloat(allow_none=True)
    p_ci95 = SigFloat(allow_none=True)
    tmin_hat = SigFloat(allow_none=True)
    tmin_ci95 = SigFloat(allow_none=True)
    tmin_diag_minuser = SigFloat(allow_none=True)
    analytic_outage = SigFloat(allow_none=True)
    status = fields.Str(required=True)


class TheoryRowSchema(Schema):
    source_tag = fields.Str(required=True, validate=validate.OneOf([tag.value for tag in SourceTag]))
    case_tag = fields.Str(required=True)
    p = SigFloat(required=True, validate=validate.Range(min=0, max=1))
    t_normalized = SigFloat(required=True, validate=validate.Range(min=0))
    gamma_r = SigFloat(required=True)
    m = fields.Int(required=True)
    n = fields.Int(required=True)
    K = fields.Int(required=True)
    C = SigFloat(required=True)
    Delta = SigFloat(required=True)


class SummaryRowSchema(Schema):
    gamma_r = SigFloat(required=True)
    p = SigFloat(required=True)
    t_sim = SigFloat(required=True)
    t_theory = SigFloat(required=True)
    rel_error = SigFloat(required=True)


class OracleRowSchema(Schema):
    suite = fields.Str(required=True)
    cases = fields.Int(required=True)
    max_gap = SigFloat(required=True)
    passed = CsvBool(required=True)


# Run manifest

@dataclass
class RunManifest:
    """What produced an output file: command, tool version, config echo and timing"""
    command: str
    tool_version: str
    config: Dict[str, Any]
    started_at: datetime
    finished_at: datetime
    seed: Optional[int] = None
    outputs: List[str] = field(default_factory=list)


class RunManifestSchema(Schema):
    command = fields.Str(required=True, validate=validate.OneOf(['simulate', 'theory', 'compare', 'oracle']))
    tool_version = fields.Str(required=True)
    config = fields.Dict(keys=fields.Str(), required=True)
    started_at = fields.AwareDateTime(required=True)
    finished_at = fields.AwareDateTime(required=True)
    seed = fields.Int(allow_none=True, load_default=None)
    outputs = fields.List(fields.Str(), load_default=list)

    @post_load
    def make_manifest(self, data, **kwargs):
        return RunManifest(**data)
