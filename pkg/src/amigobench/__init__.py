"""amigobench: a desk-scale fleet test bed for mobile network measurement.

Subpackages:
    domain    record types, classifiers, wire codecs
    server    control server: durable store, operations, HTTP API
    agent     endpoint agent: scheduler, spool, uplink client, runtime
    probes    active measurement probes and their parsers
    simnet    deterministic simulated network and live loopback services
    analysis  dataset loading, fleet statistics, report emission
"""

__version__ = "0.1.0"
