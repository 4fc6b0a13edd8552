"""Numerical toolkit for comparing the causal structure of Lorentzian metrics.

The package decides, by algebra where possible and by verified sampling
where not, whether one spacetime's cone structure fits inside another's:
pointwise classification of stress tensors against the dominant energy
condition, diffeomorphism checks between metric fields, conformal-time
taxonomy of warped products, plane-fronted wave comparisons, and a
discrete reachability oracle on 2-d grids that corroborates continuum
verdicts.  ``python3 -m isocausal.cli --help`` lists the command line.

Environment flags: ISOCAUSAL_NUMBA=0 forces the pure-numpy kernels;
ISOCAUSAL_THREADS caps the compiled backend's thread pool.
"""

from .algebra import (
    DPReport,
    NullDirections,
    OracleReport,
    canonical_null_directions,
    classify_dp,
    null_oracle,
    stability_constant,
)
from .grid import (
    CausalGrid,
    build_grid,
    chain_obstruction,
    closedness_probe,
    coverage_criterion,
    coverage_verdict,
    future_set,
    helix_curve,
    hypersurface_tests,
    imprisonment_probe,
    node_index,
    past_set,
)
from .lorentz import causal_character, check_lorentzian, cone_angles, minkowski
from .mapping import (
    Chart,
    ComposedMap,
    ExprMap,
    IdentityMap,
    LinearMap,
    MappingVerdict,
    MetricField,
    check_causal_mapping,
    check_conformal,
    minkowski_stability,
)
from .products import (
    FiberSpec,
    GRWSpec,
    TimeProductSpec,
    arrival_time,
    circle_fiber,
    conformal_interval,
    desitter_instability_probe,
    grw_classify,
    grw_obstruction,
    grw_order,
    horizon_check,
    line_fiber,
    sphere_fiber,
)
from .waves import (
    MpWaveSpec,
    PlaneWaveSpec,
    boundary_report,
    mp_causal_check,
    planewave_profile,
    planewave_to_mp,
    pol_check,
    weyl_flatness,
)

__version__ = "0.1.0"

__all__ = [
    "DPReport",
    "NullDirections",
    "OracleReport",
    "canonical_null_directions",
    "classify_dp",
    "null_oracle",
    "stability_constant",
    "CausalGrid",
    "build_grid",
    "chain_obstruction",
    "closedness_probe",
    "coverage_criterion",
    "coverage_verdict",
    "future_set",
    "helix_curve",
    "hypersurface_tests",
    "imprisonment_probe",
    "node_index",
    "past_set",
    "causal_character",
    "check_lorentzian",
    "cone_angles",
    "minkowski",
    "Chart",
    "ComposedMap",
    "ExprMap",
    "IdentityMap",
    "LinearMap",
    "MappingVerdict",
    "MetricField",
    "check_causal_mapping",
    "check_conformal",
    "minkowski_stability",
    "FiberSpec",
    "GRWSpec",
    "TimeProductSpec",
    "arrival_time",
    "circle_fiber",
    "conformal_interval",
    "desitter_instability_probe",
    "grw_classify",
    "grw_obstruction",
    "grw_order",
    "horizon_check",
    "line_fiber",
    "sphere_fiber",
    "MpWaveSpec",
    "PlaneWaveSpec",
    "boundary_report",
    "mp_causal_check",
    "planewave_profile",
    "planewave_to_mp",
    "pol_check",
    "weyl_flatness",
    "__version__",
]
