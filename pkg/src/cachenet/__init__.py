import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

# Settings classes read the environment at import time, so .env goes first
load_dotenv(os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', '..', '.env'))

from .config import Config  # noqa: E402
from .utils.sim_logger import SimulationLogger, get_sim_logger  # noqa: E402

__version__ = '0.1.0'


@dataclass
class App:
    """Settings plus the configured event logger shared by every command"""
    config: type
    sim_logger: Optional[SimulationLogger] = None

    @property
    def testing(self) -> bool:
        return bool(getattr(self.config, 'TESTING', False))


def create_app(config_class=Config) -> App:
    """Create and configure an application instance."""
    app = App(config=config_class)
    get_sim_logger(app)
    return app
