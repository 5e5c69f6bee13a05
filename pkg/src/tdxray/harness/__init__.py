"""CLI, configuration, experiment orchestration, and the acceptance suite."""
