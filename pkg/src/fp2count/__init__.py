"""Point counting for elliptic curves over F_{p^2}.

Implements the classical SEA point-counting loop and a specialized variant
for curves carrying a low-degree isogeny to their Galois conjugate, plus
the supporting field, polynomial, torsion, modular-polynomial and isogeny
machinery, exhaustive and BSGS order oracles, a curve-family generator, a
secure-curve search, and a benchmark harness.
"""

from .errors import (
    AmbiguousOrderError,
    CapExceededError,
    ClassificationError,
    DegenerateElkiesDataError,
    DegenerateQError,
    EllNotInTableError,
    ExcludedJError,
    FieldTooLargeError,
    Fp2CountError,
    InternalInconsistencyError,
    NoRepresentativeError,
    NoRootError,
    NoSolutionError,
    NotAdmissibleError,
    NotFoundError,
    NotPrimeError,
    RConsistencyError,
    SingularParameterError,
    SupersingularInputError,
    TableExhaustedError,
    TooSmallError,
    UnexpectedDegreeError,
    ZeroDivisorError,
)
from .curve import (
    AffinePoint,
    Curve,
    TraceResult,
    curve_order_bsgs,
    curve_order_naive,
    quadratic_twist,
)
from .engine import (
    EngineConfig,
    admissible_trace,
    atkin_fallback_residue,
    bsgs_finish,
    crt_signed,
    sea_trace,
    supersingular_screen,
)
from .field import FieldCtx, Fp2, field_ctx, is_probable_prime, legendre
from .isogeny import (
    AdmissiblePair,
    IsogenyMap,
    admissibility_by_modpoly,
    conjugate_curve,
    d_isogenies_to_conjugate,
    dual_isogeny,
    hasegawa_curve,
    kernel_polynomial,
    make_admissible,
)
from .modpoly import ModPolyTable, classify_prime, default_table
from .poly import ModulusCtx, Poly
from .torsion import DivisionPolyCache, SymbolicPoint, division_polynomial

__version__ = "0.1.0"

__all__ = [
    "FieldCtx", "Fp2", "field_ctx", "is_probable_prime", "legendre",
    "Poly", "ModulusCtx", "Curve", "AffinePoint", "TraceResult",
    "curve_order_naive", "curve_order_bsgs", "quadratic_twist",
    "DivisionPolyCache", "SymbolicPoint", "division_polynomial",
    "ModPolyTable", "classify_prime", "default_table",
    "IsogenyMap", "AdmissiblePair", "hasegawa_curve", "make_admissible",
    "dual_isogeny", "conjugate_curve", "kernel_polynomial",
    "d_isogenies_to_conjugate", "admissibility_by_modpoly",
    "EngineConfig", "sea_trace", "admissible_trace", "supersingular_screen",
    "atkin_fallback_residue", "bsgs_finish", "crt_signed",
    "Fp2CountError", "NotPrimeError", "TooSmallError",
    "NoRootError", "FieldTooLargeError", "AmbiguousOrderError",
    "EllNotInTableError", "TableExhaustedError", "UnexpectedDegreeError",
    "ZeroDivisorError", "NotFoundError", "DegenerateElkiesDataError",
    "ExcludedJError", "NotAdmissibleError", "SingularParameterError",
    "InternalInconsistencyError", "SupersingularInputError",
    "ClassificationError", "RConsistencyError", "CapExceededError",
    "DegenerateQError", "NoSolutionError", "NoRepresentativeError",
]
