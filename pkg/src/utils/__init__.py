"""Utility modules for the nodal domain toolkit."""

from src.utils.exporter import RunExporter

__all__ = ['RunExporter']
