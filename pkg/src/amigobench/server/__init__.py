"""Control server: durable store, fleet operations, HTTP API."""

from amigobench.server.store import Store
from amigobench.server.core import ControlServer, DeviceSummary, device_summary_to_dict
from amigobench.server.api import make_http_server

__all__ = [name for name in dir() if not name.startswith("_")]
