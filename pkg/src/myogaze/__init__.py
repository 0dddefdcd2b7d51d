"""Deterministic simulator and experiment harness for a hybrid prosthetic
hand control loop: gaze-dwell grasp-type switching plus two-site
proportional EMG open/close control, with a trial protocol, metrics, and
nonparametric statistics, and a live gateway for human operation."""

__version__ = "0.1.0"

from .hand import GraspType, HandState, Phase, make_hand
from .panel import DwellState, GazeSample, PanelLayout, default_layout
from .runner import (
    AgentConfig,
    Mode,
    ProtocolConfig,
    ScriptedAgent,
    SessionCore,
    run_session,
)
from .signals import EmgFrame, EnvelopeState, MotionCommand, MyoConfig
from .world import CompatibilityMatrix, ObjectSpec, default_catalog

__all__ = [
    "AgentConfig",
    "CompatibilityMatrix",
    "DwellState",
    "EmgFrame",
    "EnvelopeState",
    "GazeSample",
    "GraspType",
    "HandState",
    "Mode",
    "MotionCommand",
    "MyoConfig",
    "ObjectSpec",
    "PanelLayout",
    "Phase",
    "ProtocolConfig",
    "ScriptedAgent",
    "SessionCore",
    "default_catalog",
    "default_layout",
    "make_hand",
    "run_session",
    "__version__",
]
