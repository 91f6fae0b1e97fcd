"""Exact computations for deformation quantization over truncated power series.

Everything is over the rationals with series truncated at a fixed order
``N``; no floating point is involved.
"""

__version__ = "0.1.0"

from .errors import (ArityError, ContextMismatchError, DefQuantError, DegreeError,
                     InsufficientTestDegreeError, KindMismatchError, MorphismInvalidError,
                     NotInvertibleError, NotLocalError, NotMaurerCartanError,
                     OrderMismatchError, ParseError, PreconditionError, RecognitionError)
from .series import ParameterAlgebra, Series, multilinear
from .polyring import LocPoly, Poly, loc_restrict, monomials
from .tpoly import PolyVec, poisson_bracket, schouten_bracket, wedge
from .dpoly import (OpTable, PolyDiffOp, apply_op, extract_gauge, gerstenhaber_bracket,
                    hochschild_d, moyal_mc, op_order, recognize_diffop)
from .grammar import GRAMMAR_VERSION, format_value, parse_expr
from .mc import (DPoly, DPolyNor, GaugeElement, MCElement, TPoly, TwoMorphism, bch,
                 gauge_apply, host_for, mc_defect, twisted_bracket, twisted_d)
from .report import Report
from .deligne import (CrossedGroupoid, DeligneInstance, check_morphism, deligne_build,
                      verify_crossed_axioms)
from .deform import (DeformedAlgebra, cover_compat, gauge_transport, geo_verify,
                     inner_gauge, localize_deformation, star_inverse)
