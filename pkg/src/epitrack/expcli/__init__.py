"""Experiment harness: configs, file formats, the memory-capacity study and the CLI."""
from .config import ExperimentConfig
from .experiment import RANDOM_BASELINE, generate_examples, run_experiment
from .formats import export_concentration_maps, export_voxels, read_voxels

__all__ = ["ExperimentConfig", "RANDOM_BASELINE", "generate_examples", "run_experiment",
           "export_concentration_maps", "export_voxels", "read_voxels"]
