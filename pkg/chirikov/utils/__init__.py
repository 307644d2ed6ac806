from .rng import RngStreamSpec, sample_phases, uniform_angles
from .parallel import fan_out, default_workers, reduce_moments
