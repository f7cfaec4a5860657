"""Entrywise (Schur) matrix functions under the positive semidefinite order."""

__version__ = "0.1.0"

from .errors import (DomainError, FnSpecError, NotAnalyticError, NotDifferentiableError,
                     PreconditionError, SchurOrderError, SearchFailure)
from .verdicts import ClassVerdict, SClass
from .scalarfn import (AbsPower, Derivative, Exp, NegLog1m, NegPower, PowerSeries, Reflected,
                       ScalarFunction, Scaled, Shifted, SignedPower, Sum, certify_class_by_coeffs,
                       check_phi_class, check_spos2, div_diff1, div_diff2, even_odd_split)
from .dsl import parse_fn_spec
from .entrywise import apply_entrywise, functional_calculus, schur_power, schur_product, series_entrywise
from .order_testing import PsdPair, TrialConfig, chain_decompose, sample_psd, sample_psd_pair, test_class
from .majorization import (MajorizationVerdict, dec_rearrange, majorize, weak_majorize,
                           verify_diagonal_lipschitz_bound, verify_diagonal_second_order_bound,
                           verify_divided_difference_bound, verify_second_order_bound,
                           verify_spectral_domination)
from .counterexamples import (Witness, affinity_witness, fixed_counterexamples,
                              midpoint_convexity_witness, power_sharpness_witness)
