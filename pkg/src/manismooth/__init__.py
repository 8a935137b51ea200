"""Stochastic smoothing optimization on compact embedded submanifolds.

Library layout:

- ``manifolds``: sphere / Stiefel / oblique primitives (projection,
  retraction, transport, retraction constants),
- ``smoothing``: proximal operators, Moreau envelopes, the smoothed
  objective and its Riemannian gradient,
- ``problems``: stochastic problem container plus two seeded synthetic
  families and empirical constant estimation,
- ``solver_lipschitz``: recursive-momentum solver with adaptive
  stepsize for Lipschitz nonsmooth terms,
- ``solver_indicator``: truncated-momentum quadratic-penalty solver for
  indicator constraints under an error bound condition,
- ``harness``: traces, certificates, rate fits, inequality checks, and
  CSV/JSON serialization,
- ``cli``: the ``manismooth`` command (run / check / report).
"""

from .harness import Certificate, RateFit, StepReport, TraceRecord
from .manifolds import (
    ManifoldDescriptor,
    ManifoldPoint,
    RetractionConstants,
    TangentVector,
    estimate_retraction_constants,
    oblique,
    random_point,
    random_tangent,
    retract,
    riemannian_gradient,
    sphere,
    stiefel,
    tangent_project,
    vector_transport,
)
from .problems import (
    ProblemConstants,
    StochasticProblem,
    estimate_constants,
    make_constrained_sphere,
    make_sparse_pca,
    sample_riemannian_grad,
)
from .smoothing import (
    IndicatorBall,
    IndicatorBox,
    IndicatorSingleton,
    MoreauEval,
    NonsmoothTerm,
    ScaledL1,
    ScaledL2,
    moreau_envelope_inequality_check,
    moreau_eval,
    prox,
    smoothed_objective_grad,
)

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "IndicatorBall",
    "IndicatorBox",
    "IndicatorSingleton",
    "ManifoldDescriptor",
    "ManifoldPoint",
    "MoreauEval",
    "NonsmoothTerm",
    "ProblemConstants",
    "RateFit",
    "RetractionConstants",
    "ScaledL1",
    "ScaledL2",
    "StepReport",
    "StochasticProblem",
    "TangentVector",
    "TraceRecord",
    "estimate_constants",
    "estimate_retraction_constants",
    "make_constrained_sphere",
    "make_sparse_pca",
    "moreau_envelope_inequality_check",
    "moreau_eval",
    "oblique",
    "prox",
    "random_point",
    "random_tangent",
    "retract",
    "riemannian_gradient",
    "sample_riemannian_grad",
    "smoothed_objective_grad",
    "sphere",
    "stiefel",
    "tangent_project",
    "vector_transport",
]
