"""Point configurations on projective spaces: sampling, number variance and discrepancy."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .spaces import (Field, PointSet, ProjPoint, SpaceParams, cos2theta, geodesic_distance,  # noqa: E402
                     make_space, normalize_representative, parse_space)
from .jacobi import (JacobiParams, SpectralDatum, coeff_a, eigenvalue, jacobi_at_one,  # noqa: E402
                     jacobi_eval, multiplicity)
from .measure import (ZonalWeight, ball_intersection_mc, ball_measure, mean_distance,  # noqa: E402
                      surface_area, zonal_integral)
from .spectral import (VarianceEstimate, WeylProfile, gr_value, invariance_check,  # noqa: E402
                       l2_discrepancy, sum_of_distances, variance_direct, variance_spectral,
                       weyl_sums)
from .regimes import RegimeReport, classify_regimes  # noqa: E402
from .samplers import (KernelSpec, Partition, fit_partition, harmonic_kernel, sample_harmonic,  # noqa: E402
                       sample_iid, sample_jittered)
from .maximize import OptimizerConfig, OptTrace, maximize_sum_distances, objective_and_grad  # noqa: E402
