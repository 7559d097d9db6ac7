"""Spin^C spinor description of immersions into spheres, with numerical verification.

A submanifold of S^n is encoded by a Spin^C_{n+1}-valued spinor field [phi]
built from its adapted frame; the immersion is recovered pointwise as
F = <<nu phi, phi>>, and the spinor satisfies a generalized Killing equation
that is checked here with second-order finite differences.
"""
from .clifford import (
    DimensionMismatch,
    Multivector,
    NotARealVector,
    cl_inner,
    embed_vector,
    extract_real_vector,
    geometric_product,
    grade_project,
    promote,
    tau,
)
from .config import ConfigError, DebugFlags, RunConfig, config_from_mapping, load_config
from .geometry import (
    Scenario,
    ScenarioError,
    build_adapted_frames,
    connection_forms,
    sample_scenario,
    sphere_second_fundamental_form,
)
from .immersion import procrustes_align, reconstruct_F, verify_differential, verify_isometry, xi
from .killing import covariant_derivative, forward_spinor, gauge_transform, killing_rhs, residual
from .pipeline import RunReport, run_levels
from .spin import SpinCElement, adjoint, include_pair, is_spinc, lift_rotation, phase, rotor

__version__ = "0.1.0"
