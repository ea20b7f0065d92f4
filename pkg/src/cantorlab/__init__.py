"""cantorlab: exact-arithmetic experiments on dyadic approximation in the
middle-third Cantor set.

The library computes, exactly or with certified interval enclosures, the
finite quantities behind the convergence theory of dyadic shrinking
targets on the Cantor set: the devil's-staircase CDF and the measure it
assigns to interval unions, digit-DP counts of construction endpoints,
Fourier coefficient magnitudes of the Cantor measure at factored
frequencies t * 2**n, good/bad frequency partitions, block sums over
dyadic ranges, and Monte Carlo hit statistics.
"""

__version__ = "0.1.0"

from .cantor import (Interval, IntervalUnion, cantor_cdf,
                     count_endpoints_in_union, count_restricted,
                     left_endpoints, level_endpoints, measure_union)
from .certified import (CReal, Enclosure, GAMMA, PrecisionCapExceeded,
                        as_creal, certified_floor, certify_gt, cr_exp,
                        cr_log, cr_max, cr_pow, power_enclosure,
                        rational_pow)
from .experiments import (BlockReport, ConstraintCheck, DyadicBlock,
                          ExperimentParams, InequalityReport,
                          bc_partial_sums, block_sum, constraint_check,
                          critical_tau, inequality_report)
from .fourier import (FourierMagnitude, FourierQuery, GoodBadPartition,
                      classify_good_bad, mu_hat_magnitude, mu_hat_scaled)
from .sampler import (HIT, MISS, UNDECIDED, MuSample, PowerLaw, PsiTable,
                      SurvivalReport, decide_hit, hit_test, sample_mu,
                      survival_curve)
from .targets import (ApproxTarget, LemmaRatio, ScaleChain, ScaleChainError,
                      Schedule, TargetTooFine, build_target_union,
                      count_endpoints_in_target, lemma_ratio,
                      make_scale_chain, measure_target, schedule_eval)

__all__ = [name for name in dir() if not name.startswith("_")]
