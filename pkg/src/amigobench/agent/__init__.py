"""Measurement-endpoint agent: sensing, scheduling, probing, spooling."""

from amigobench.agent.config import (
    AgentConfig,
    agent_config_from_dict,
    agent_config_to_dict,
    load_agent_config,
    validate_agent_config,
)
from amigobench.agent.client import ServerClient
from amigobench.agent.runners import (
    LiveProbeRunner,
    ModelProbeRunner,
    ProbeRunner,
    StubProbeRunner,
)
from amigobench.agent.runtime import Agent, AgentState
from amigobench.agent.scheduler import (
    Decision,
    GateCheck,
    decide,
    evaluate_gates,
    replay_violations,
    should_run,
)
from amigobench.agent.sensors import (
    HostSensors,
    ScriptedSensors,
    SensorReading,
    load_sensor_timeline,
    SensorSource,
)
from amigobench.agent.spool import Spool

__all__ = [
    "Agent",
    "AgentConfig",
    "AgentState",
    "Decision",
    "GateCheck",
    "HostSensors",
    "LiveProbeRunner",
    "ModelProbeRunner",
    "ProbeRunner",
    "ScriptedSensors",
    "SensorReading",
    "SensorSource",
    "ServerClient",
    "Spool",
    "StubProbeRunner",
    "agent_config_from_dict",
    "agent_config_to_dict",
    "decide",
    "evaluate_gates",
    "load_agent_config",
    "load_sensor_timeline",
    "replay_violations",
    "should_run",
    "validate_agent_config",
]
