import logging
import os
import time
import traceback
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Dict, Optional

import structlog


def _configure_structlog():
    # Route through stdlib logging so channels share handlers and levels
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt='iso', utc=True),
            structlog.processors.JSONRenderer(sort_keys=True),
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )


class SimulationLogger:
    """Structured logging for simulation runs, sweeps and oracle suites"""

    CHANNELS = ('sim_operations', 'sim_performance', 'sim_errors')

    def __init__(self, app=None):
        self.app = app
        self.logger = None
        self.performance_logger = None
        self.error_logger = None
        self.run_id = None

        if app is not None:
            self.init_app(app)
        else:
            _configure_structlog()
            self._bind_channels()

    def init_app(self, app):
        """Configure handlers from the app settings"""
        self.app = app
        settings = app.config
        level = getattr(logging, str(settings.LOG_LEVEL).upper(), logging.INFO)
        _configure_structlog()

        formatter = logging.Formatter('%(message)s')
        for name in self.CHANNELS:
            channel = logging.getLogger(name)
            channel.setLevel(logging.ERROR if name == 'sim_errors' else level)
            channel.propagate = False
            channel.handlers.clear()

            # stderr belongs to the one-line CLI error report, so errors only reach files
            if name == 'sim_errors':
                channel.addHandler(logging.NullHandler())
            else:
                stream_handler = logging.StreamHandler()
                stream_handler.setFormatter(formatter)
                channel.addHandler(stream_handler)

            if settings.LOG_TO_FILE:
                os.makedirs(settings.LOG_DIR, exist_ok=True)
                file_handler = logging.FileHandler(os.path.join(settings.LOG_DIR, f'{name}.log'))
                file_handler.setFormatter(formatter)
                channel.addHandler(file_handler)

        self._bind_channels()
        app.sim_logger = self

    def _bind_channels(self):
        self.logger = structlog.get_logger('sim_operations')
        self.performance_logger = structlog.get_logger('sim_performance')
        self.error_logger = structlog.get_logger('sim_errors')

    def log_event(self, event_type: str, data: Dict[str, Any], level: str = 'info'):
        """Log a simulation event"""
        if level == 'error':
            self.error_logger.error(event_type, data=data, run_id=self.run_id)
        elif level == 'warning':
            self.logger.warning(event_type, data=data, run_id=self.run_id)
        else:
            self.logger.info(event_type, data=data, run_id=self.run_id)

    def log_performance_metric(self, operation: str, duration: float,
                               additional_data: Optional[Dict[str, Any]] = None):
        self.performance_logger.info(
            'performance_metric',
            operation=operation,
            duration_ms=round(duration * 1000, 2),
            run_id=self.run_id,
            additional_data=additional_data or {},
        )

    def log_error(self, error: Exception, context: Dict[str, Any] = None):
        """Log errors with context"""
        self.error_logger.error(
            'error',
            error_type=type(error).__name__,
            error_message=str(error),
            traceback=traceback.format_exc(),
            context=context or {},
            run_id=self.run_id,
        )

    def start_run(self, command: str) -> str:
        self.run_id = f"{command}-{datetime.now(timezone.utc).strftime('%Y%m%dT%H%M%S%f')}"
        return self.run_id


def performance_monitor(operation_name: str):
    """Decorator timing a simulation operation"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            sim_logger = get_sim_logger()

            try:
                result = func(*args, **kwargs)
                sim_logger.log_performance_metric(
                    operation_name,
                    time.perf_counter() - start_time,
                    {'success': True},
                )
                return result

            except Exception as e:
                sim_logger.log_performance_metric(
                    operation_name,
                    time.perf_counter() - start_time,
                    {'success': False, 'error': str(e)},
                )
                sim_logger.log_error(e, {
                    'operation': operation_name,
                    'args': str(args)[:200],
                    'kwargs': str(kwargs)[:200],
                })
                raise

        return wrapper
    return decorator


def sim_operation_logger(operation_type: str):
    """Decorator logging start, completion and failure of an operation"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            sim_logger = get_sim_logger()
            sim_logger.log_event(f'{operation_type}_started', {'function': func.__name__})

            try:
                result = func(*args, **kwargs)
                sim_logger.log_event(f'{operation_type}_completed', {'function': func.__name__})
                return result

            except Exception as e:
                sim_logger.log_event(f'{operation_type}_failed', {
                    'function': func.__name__,
                    'error': str(e),
                }, level='error')
                raise

        return wrapper
    return decorator


# Global logger instance
_sim_logger = None

def get_sim_logger(app=None) -> SimulationLogger:
    """Get or create the simulation logger"""
    global _sim_logger

    if _sim_logger is None:
        _sim_logger = SimulationLogger(app)
    elif app is not None and _sim_logger.app is not app:
        _sim_logger.init_app(app)

    return _sim_logger
