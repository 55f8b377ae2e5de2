import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

from dotenv import dotenv_values

from ..network_logic.sim_config import SimConfig
from ..network_logic.theory import TheoryParams
from ..network_logic.topology import reuse_factor
from ..schemas import SimulationRequestSchema, TheoryRequestSchema

logger = logging.getLogger(__name__)


@dataclass
class SimulationPlan:
    """One base config per request exponent, swept over the same cluster sizes"""
    bases: List[SimConfig]
    g_c_list: List[int]

    def validate(self) -> List[str]:
        """Problems that are not tied to a single cluster size"""
        errors = []
        for base in self.bases:
            errors.extend(e for e in base.shared_errors() if e not in errors)
        return errors


@dataclass
class TheoryRequest:
    params: List[TheoryParams]
    p_grid: Optional[List[float]]
    g_c_grid: List[float] = field(default_factory=list)
    g_r_grid: List[float] = field(default_factory=list)
    sources: List[str] = field(default_factory=list)


def read_config_file(path: Optional[str]) -> Dict[str, str]:
    """Flat key=value file; lines without a value are ignored."""
    if not path:
        return {}
    values = dotenv_values(path)
    ignored = [key for key, value in values.items() if value is None]
    if ignored:
        logger.warning(f"Ignoring keys without a value in {path}: {', '.join(ignored)}")
    return {key: value for key, value in values.items() if value is not None}


def merge_settings(file_values: Mapping[str, Any], flag_values: Mapping[str, Any]) -> Dict[str, Any]:
    """Flags override file values; unset flags (None or empty repeatables) leave them alone."""
    merged = dict(file_values)
    for key, value in flag_values.items():
        if value is None or value == ():
            continue
        # a flag wins over every spelling of the same key in the file
        for spelling in (key, key.replace('_', '-'), key.replace('-', '_')):
            merged.pop(spelling, None)
        merged[key] = value
    return merged


def load_simulation_plan(config_file: Optional[str], flags: Mapping[str, Any], settings) -> SimulationPlan:
    """Build the sweep plan from a config file plus flag overrides.

    Raises marshmallow ValidationError for malformed values and ValueError for
    values that parse but violate a model constraint.
    """
    data = SimulationRequestSchema().load(merge_settings(read_config_file(config_file), flags))

    g_c_list = [int(g) for g in data['g_c']]
    bases = [
        SimConfig(
            n=data['n'],
            m=data['m'],
            gamma_r=gamma_r,
            g_c=g_c_list[0] if g_c_list else data['n'],
            seed=data['seed'],
            delta=data.get('delta', settings.DEFAULT_DELTA),
            link_rate=data.get('link_rate', settings.DEFAULT_LINK_RATE),
            k_override=data.get('k_override'),
            caching=data['caching'],
            trials=data['trials'],
            allow_self_hit=data['allow_self_hit'],
            workers=data.get('workers', settings.WORKERS),
            chunk_size=data.get('chunk_size', settings.TRIAL_CHUNK_SIZE),
        )
        for gamma_r in data['gamma_r']
    ]

    plan = SimulationPlan(bases=bases, g_c_list=g_c_list)
    errors = plan.validate()
    if errors:
        raise ValueError('; '.join(errors))
    return plan


def load_theory_request(config_file: Optional[str], flags: Mapping[str, Any], settings) -> TheoryRequest:
    data = TheoryRequestSchema().load(merge_settings(read_config_file(config_file), flags))

    delta = data.get('delta', settings.DEFAULT_DELTA)
    K = data.get('k_override') or reuse_factor(delta)
    params = [
        TheoryParams(
            gamma_r=gamma_r,
            m=data['m'],
            n=data['n'],
            K=K,
            C=data.get('link_rate', settings.DEFAULT_LINK_RATE),
            Delta=delta,
            rho1=data.get('rho1'),
            rho2=data.get('rho2'),
            rho3=data.get('rho3'),
            eps_small=data.get('eps_small', settings.SMALL_LIBRARY_EPS),
        )
        for gamma_r in data['gamma_r']
    ]
    return TheoryRequest(
        params=params,
        p_grid=data.get('p_grid'),
        g_c_grid=data['g_c'],
        g_r_grid=data['g_r'],
        sources=data['sources'],
    )
