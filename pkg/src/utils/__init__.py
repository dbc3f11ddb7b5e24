"""Utility modules for logging, progress tracking, settings, errors and parallel work."""

from .logger import setup_logger, get_logger
from .progress import create_progress_bar, set_progress_enabled
from .settings import SettingsLoader

__all__ = ['setup_logger', 'get_logger', 'create_progress_bar', 'set_progress_enabled', 'SettingsLoader']
