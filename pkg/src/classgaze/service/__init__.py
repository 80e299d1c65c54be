"""Networked session service: ingestion, windowing, publication."""

from .app import create_app
from .config import ServiceConfig, SessionConfig, load_service_config, session_config_from_dict
from .engine import SessionEngine, WindowEvent, compute_window, replay_session
from .records import RecordWriter, read_record, recorded_events

__all__ = [
    "RecordWriter",
    "ServiceConfig",
    "SessionConfig",
    "SessionEngine",
    "WindowEvent",
    "compute_window",
    "create_app",
    "load_service_config",
    "read_record",
    "recorded_events",
    "replay_session",
    "session_config_from_dict",
]
