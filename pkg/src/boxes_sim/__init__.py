"""Two-box splitter: collapse versus time-symmetric transition probabilities."""
from .core import ComplexField, GaussianPacket, GridSpec, PhysicalParams, density_moments, field_norm, packet_to_field
from .experiment import Outcome, RunRecord, Scenario, build_scenario, run_ensemble, sample_outcome, snapshot_sequence
from .optics import Box, Branch, PathNetwork, SplitterSpec, default_geometry, route_tsf, split_cf
from .propagators import Direction, centroid_trajectory, propagate_field_spectral, propagate_packet_analytic
from .transitions import (
    Formulation,
    TransitionResult,
    collapse_probability_cf,
    overlap,
    transition_density,
    transition_probability_tsf,
)

__version__ = "0.1.0"
