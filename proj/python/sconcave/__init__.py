"""Geometry bounds, samplers, and learning experiments for s-concave distributions.

Everything is implemented in the C++ core; this package re-exports it.
"""

from ._core import (  # noqa: F401
    ALRunResult,
    ALSchedule,
    BandBounds,
    BaumHypothesis,
    BaumResult,
    BaumSizes,
    CapacityRow,
    CoefficientEstimate,
    ConfigResult,
    Direction,
    ExperimentConfig,
    FlipStrategy,
    GeometryBounds,
    Knobs,
    LabelOracle,
    McReport,
    Model,
    Pareto1D,
    RadialND,
    RngStream,
    RunOutcome,
    SConcaveParams,
    Symmetric1D,
    Verdict,
    al_schedule,
    band_bounds,
    baum_learn,
    baum_sizes,
    derive_stream,
    disagreement_coefficient_bound,
    disagreement_lower_f1,
    estimate_disagreement_coefficient,
    geometry_bounds,
    halfspace_mass_lower,
    load_config,
    make_pareto1d,
    make_radial_nd,
    make_symmetric1d,
    margin_al_adversarial,
    margin_al_realizable,
    marginal_gamma,
    packing_lower_bound,
    passive_baseline,
    reports_csv,
    run,
    sample,
    tail_bound,
    unit_vector,
    vc_sample_size,
    verify_band,
    verify_density_envelope,
    verify_disagreement,
    verify_halfspace,
    verify_tail,
    verify_univariate_bounds,
    worker_count,
)

__all__ = [name for name in dir() if not name.startswith("_")]
