from .run_logger import log_run_event

__all__ = ['log_run_event']
