"""Core module: configuration, errors, ensembles and orchestration.

The orchestrator is imported from ``src.core.orchestrator`` directly; importing
it here would create a cycle with the ``src.wave`` modules, which depend on
``src.core.config`` and ``src.core.exceptions``.
"""
