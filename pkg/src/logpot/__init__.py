"""Equilibrium points of planar logarithmic potentials and their majorization certificates."""
from .dbs import (DbsCertificate, SymmetricVectors, check_newton_identities, construct_first_order,
                  construct_hierarchy, m_matrix_identity, moment_inequalities, symmetric_vectors,
                  uniqueness_probe)
from .errors import (CapacityError, ConfigSyntaxError, ConfigurationError, ConvergenceError,
                     LogpotError, LPCyclingError, VerificationError)
from .hausdorff import (directed_hausdorff, extended_equilibria, symmetric_hausdorff, verify_t5,
                        verify_t6)
from .infinite import (SequenceFamily, TruncationLadder, builtin_family, interlacing_check,
                       t7_certificate, t8_battery, truncate, zero_count_explorer)
from .linalg import (SchurForm, additive_compound, compound, hadamard, hermitian_eigen,
                     orthonormal_complement, schur_decompose)
from .majorization import (StochasticCertificate, Verdict, WeightedTuple, check_weighted_majorization,
                           choquet_compare, convex_battery, verify_certificate)
from .potential import (ChargeConfiguration, EquilibriumSet, barycenter, compression_matrix,
                        equilibrium_polynomial, field_eval, normalize, potential_eval,
                        solve_equilibria, weighted_variance)

__version__ = "0.1.0"
