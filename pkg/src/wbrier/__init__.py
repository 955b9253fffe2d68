"""Decision-theoretic evaluation of binary risk prediction models.

Weighted Brier scores with Beta (or other) weights over risk cutoffs,
their calibration/discrimination decomposition, net benefit, the H
measure, weighted Spiegelhalter tests, and inference.
"""

from .errors import (AlignmentError, DegenerateDataError, EmptyBinError, InvalidCostError,
                     WeightSpecError)
from .metrics import (ValidationSet, cutoff_from_costs, loss_at, loss_cw, loss_w,
                      net_benefit_opt_in, net_benefit_opt_out, spiegelhalter_z,
                      spiegelhalter_z_weighted, weighted_brier, weighted_brier_calibrated)
from .weightfn import Beta, Mixture, PointMass, Uniform, parse_weight

__version__ = "0.1.0"
