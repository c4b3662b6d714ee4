"""Exact computation of F-pure thresholds, test ideals and related invariants over F_p."""

__version__ = "0.1.0"

from .config import DEFAULT_BUDGET, Budget
from .kernels import get_backend, set_backend, use_backend
from .errors import BudgetExceeded, FthreshError, InputError, PairNotFPure, ParseError, PreconditionError, UnstableError
from .poly import Poly, PolyRing
from .groebner import IdealHandle, contains, ideal_equal, reduced_basis
from .frobenius import bracket_power, ci_check, fedder_pair_check, frobenius_root, mu_invariant, nu_invariant
from .testideal import DivisorSpec, MixedExponent, jumping_numbers, ntau, orbit_discreteness, test_ideal
from .fpt import FptBounds, fpt_bounds, fpt_pair_bounds, fpt_via_first_jump, reduce_pair_to_ideal, strongly_fregular
from .chains import ChainReport, FamilySpec, estimate_limit, scan_family

import types as _types

__all__ = [n for n, v in dict(globals()).items() if not n.startswith("_") and not isinstance(v, _types.ModuleType)]
