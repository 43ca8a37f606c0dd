"""Learning a compliant alignment skill from one demonstration."""

from .axes import bic_scores, bic_select, noise_floor_estimate, pca_axes, residual_increments
from .demolog import LOG_SCHEMA_VERSION, DemoLog, LogError, NoiseFloor
from .params import PARAMS_SCHEMA_VERSION, LearnedParams, build_params
from .pipeline import LearnConfig, learn, sample_sectors
from .sectors import (
    DirectionSector,
    EmptyIntersection,
    direction_angle,
    free_space_sector,
    intersect_sectors,
    intersection_arcs,
    sector_from_sample,
)
from .wrench import (
    NoSurface,
    compose_friction,
    contact_lever,
    contact_torque,
    decompose_friction,
    estimate_environment_wrench,
)
