"""Simulation laboratory for a planar random polymer with inverse-gamma
vertex weights: exact log-domain partition functions on the lattice
(point-to-point, line-to-point, and region-restricted) plus the Monte
Carlo experiments and estimators built on top of them.
"""

__version__ = "0.1.0"

from .backends import backend_name
from .disorder import BandedField, ConstantField, FuncField, GammaField, ShiftedField, derive_seed, replica_field
from .dp import (NEG_INF, Profile, Query, Restriction, classify_event,
                 event_window_halfwidth, flat_diagonal_logz, line_profile,
                 log_partition, point_diagonal_logz, touch_out_split)
from .errors import (ConfigInvalid, DegenerateRegion, InfeasibleQuery,
                     InsufficientData, ManifestMismatch, NonpositiveData,
                     PolymerError)
from .geometry import Line, Parallelogram, Point, antidiagonal, as_line, cone_slice, diagonal
from .oracle import OracleReport, enumerate_log_partitions, verify_oracle
from .stats import (CovarianceEstimate, ExponentFit, MomentEstimate,
                    NestedCovarianceEstimate, TailPoint, diagonal_shape_rate,
                    digamma, estimate_covariance, estimate_moments,
                    fit_exponent, nested_conditional_covariance,
                    shape_minimizer, shape_value, tail_curve, trigamma,
                    wilson_interval)
from .experiments import build_summary, compute_record, validate_config
from .runner import RunResult, resume_experiment, run_experiment
