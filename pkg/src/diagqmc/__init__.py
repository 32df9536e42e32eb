"""Quadrature on the unit square for integrands singular along the diagonal.

Three specialized estimators (strip-avoiding triangle QMC, a band-bridged
extension, and a square-root transform to corner singularities) plus a plain
Monte Carlo baseline, with oracle integrals, convergence sweeps, rate fits,
and numerical verifiers for the envelope definitions they rely on.
"""

from diagqmc._backend import kernel_backend
from diagqmc.analysis import (
    DegenerateFitError,
    OracleConvergenceError,
    RateFit,
    SweepRecord,
    VariationReport,
    extension_gap,
    fit_rate,
    oracle_integral,
    oracle_strip_integral,
    oracle_triangle_integral,
    run_sweep,
    sweep_csv,
    variation_terms,
)
from diagqmc.integrands import (
    DiagonalSingularIntegrand,
    Modulator,
    SingularEvaluationError,
    TransformedIntegrand,
    UnsupportedIntegrandError,
    constant,
    def1_check,
    def2_check,
    diag_ripple,
    extension_pair,
    modulated,
    prototype,
    transform_tau,
    transformed,
)
from diagqmc.lowdisc import (
    SequenceSpec,
    cranley_patterson_shift,
    generate,
    halton_points,
    radical_inverse,
    uniform_points,
)
from diagqmc.quad import (
    Estimate,
    StripGeometry,
    bridge_psi,
    epsilon_schedule,
    estimate_extension,
    estimate_mc,
    estimate_strip,
    estimate_transform,
    strip_components,
    strip_triangles,
    truncation_bound,
)
from diagqmc.trianglepts import (
    REFERENCE,
    BarycentricCoord,
    Triangle,
    approx_star_discrepancy,
    barycentric,
    cell_indices,
    from_barycentric,
    map_points,
    medial_subtriangles,
    triangle_dict,
    tvdc_point,
    tvdc_points,
)

__version__ = "0.1.0"
