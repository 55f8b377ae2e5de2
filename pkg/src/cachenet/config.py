import os


def _env_bool(name: str, default: str) -> bool:
    return os.environ.get(name, default).lower() in ('1', 'true', 'yes')


class Config:
    """Tooling settings, read from the environment (.env is loaded on package import)"""

    LOG_LEVEL = os.environ.get('CACHENET_LOG_LEVEL', 'INFO')
    LOG_DIR = os.environ.get('CACHENET_LOG_DIR', 'logs')
    LOG_TO_FILE = _env_bool('CACHENET_LOG_TO_FILE', 'false')

    # Parallelism never changes results, only wall time
    WORKERS = int(os.environ.get('CACHENET_WORKERS', '1'))
    TRIAL_CHUNK_SIZE = int(os.environ.get('CACHENET_TRIAL_CHUNK_SIZE', '16'))

    FLOAT_DIGITS = int(os.environ.get('CACHENET_FLOAT_DIGITS', '12'))
    SMALL_LIBRARY_EPS = float(os.environ.get('CACHENET_SMALL_LIBRARY_EPS', '0.1'))
    DEFAULT_DELTA = float(os.environ.get('CACHENET_DEFAULT_DELTA', '0.4'))
    DEFAULT_LINK_RATE = float(os.environ.get('CACHENET_DEFAULT_LINK_RATE', '1.0'))
    ORACLE_RESOLUTION = float(os.environ.get('CACHENET_ORACLE_RESOLUTION', '0.01'))

    TESTING = False


class TestingConfig(Config):
    TESTING = True
    LOG_TO_FILE = False
    LOG_LEVEL = 'WARNING'
    WORKERS = 1
