from .experiment import ExperimentSpec, add_noise, generate_data, run_experiment
from .presets import PRESETS, get_preset
from .shapes import Disk, Rect, Region

__all__ = [
    "Disk",
    "ExperimentSpec",
    "PRESETS",
    "Rect",
    "Region",
    "add_noise",
    "generate_data",
    "get_preset",
    "run_experiment",
]
