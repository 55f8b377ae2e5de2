from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, List, Optional, Tuple

from .topology import _is_square, admissible_cluster_sizes, reuse_factor

CACHING_KINDS = ('optimal', 'uniform', 'zipf')


def parse_caching(text: str) -> Tuple[str, Optional[float]]:
    """'optimal' | 'uniform' | 'zipf:<gamma_c>' -> (kind, gamma_c)"""
    kind, _, arg = str(text).strip().partition(':')
    kind = kind.lower()
    if kind not in CACHING_KINDS:
        raise ValueError(f"unknown caching kind '{text}', expected one of optimal, uniform, zipf:<gamma_c>")
    if kind == 'zipf':
        try:
            gamma_c = float(arg)
        except ValueError:
            raise ValueError(f"zipf caching needs a numeric exponent, got '{text}'")
        if gamma_c < 0:
            raise ValueError(f"zipf caching exponent must be >= 0, got {gamma_c}")
        return kind, gamma_c
    if arg:
        raise ValueError(f"caching kind '{kind}' takes no argument, got '{text}'")
    return kind, None


@dataclass
class SimConfig:
    """One simulated operating point of the clustering scheme"""

    n: int
    m: int
    gamma_r: float
    g_c: int
    seed: int
    delta: float = 0.4
    link_rate: float = 1.0
    k_override: Optional[int] = None
    caching: str = 'optimal'
    trials: int = 100
    allow_self_hit: bool = False

    # Execution only; results do not depend on these
    workers: int = 1
    chunk_size: int = 16

    @property
    def K(self) -> int:
        return self.k_override if self.k_override is not None else reuse_factor(self.delta)

    @property
    def K_overridden(self) -> bool:
        return self.k_override is not None

    def validate(self) -> List[str]:
        """Validate configuration values"""
        return self.shared_errors() + self.cluster_size_errors()

    def cluster_size_errors(self) -> List[str]:
        """Problems specific to g_c; a sweep skips such points instead of failing"""
        errors = []
        if self.n >= 1 and _is_square(self.n):
            if self.g_c < 1 or self.g_c not in admissible_cluster_sizes(self.n):
                errors.append(f"g_c={self.g_c} does not tile n={self.n} into square clusters")
        if self.g_c == 1 and not self.allow_self_hit:
            errors.append("g_c=1 leaves no other user to serve a request without self hits")

        try:
            kind, _ = parse_caching(self.caching)
            if kind == 'optimal' and self.g_c <= 2 and self.m > 1:
                errors.append(f"optimal caching needs g_c >= 3, got g_c={self.g_c}")
        except ValueError:
            pass  # reported by shared_errors

        return errors

    def shared_errors(self) -> List[str]:
        errors = []

        if self.n < 1 or not _is_square(self.n):
            errors.append(f"n must be a positive perfect square, got {self.n}")

        if self.m < 1:
            errors.append(f"m must be >= 1, got {self.m}")

        if not (0.0 <= self.gamma_r < 1.0):
            errors.append(f"gamma_r must lie in [0, 1), got {self.gamma_r}")

        if self.delta <= 0:
            errors.append(f"delta must be > 0, got {self.delta}")

        if self.link_rate <= 0:
            errors.append(f"link_rate must be > 0, got {self.link_rate}")

        if self.k_override is not None and self.k_override < 1:
            errors.append(f"K override must be >= 1, got {self.k_override}")

        if self.trials < 1:
            errors.append(f"trials must be >= 1, got {self.trials}")

        if self.seed < 0:
            errors.append(f"seed must be >= 0, got {self.seed}")

        if self.workers < 1:
            errors.append(f"workers must be >= 1, got {self.workers}")

        if self.chunk_size < 1:
            errors.append(f"chunk_size must be >= 1, got {self.chunk_size}")

        try:
            parse_caching(self.caching)
        except ValueError as e:
            errors.append(str(e))

        return errors

    def with_cluster_size(self, g_c: int) -> 'SimConfig':
        return replace(self, g_c=g_c)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'SimConfig':
        """Create configuration from dictionary, ignoring unknown keys"""
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in config_dict.items() if k in known})
