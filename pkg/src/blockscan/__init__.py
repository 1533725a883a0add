"""Blocked rectangle scan for cluster detection in Bernoulli-labeled 2D points.

The scan enumerates an economical family of axis-parallel rectangles
organized into size blocks, evaluates the Bernoulli log-likelihood ratio on
each, calibrates block-specific critical values by joint permutation Monte
Carlo, and reports the minimal significant rectangles with simultaneous
finite-sample confidence.
"""

__version__ = "0.1.0"

from .blocks import BlockSpec, block_range
from .calibration import (CalibrationResult, PermutationTable, block_quantile,
                          conventional_threshold, simulate_null,
                          solve_alpha_tilde)
from .detection import (Detection, blocked_scan, conventional_scan,
                        minimal_rects)
from .enumeration import (ApproxRect, RectangleIndex, count_all, count_block,
                          enumerate_block, iter_block_rects)
from .errors import (BlockMismatch, BlockscanError, DegenerateLabels,
                     EmptyBlockRange, EmptyInput, InvalidAlternative,
                     InvalidSide, NoContainedRect, ParseError, TooLarge)
from .model import Dataset, LabeledPoint, ingest_csv, order_stat, order_stat_x
from .oracle import (BruteRect, approx_quality, brute_force_max,
                     containment_witness, exact_tail)
from .pipeline import ScanOutcome, run_scan
from .statistic import (Counts, HypergeomParams, detection_boundary,
                        l_function, llr, llr_from_arrays, llr_two_sided,
                        tail_bound, tail_bound_constant)
from .synth import MixtureComponent, SynthConfig, sample_dataset

__all__ = [name for name in dir() if not name.startswith("_")]
