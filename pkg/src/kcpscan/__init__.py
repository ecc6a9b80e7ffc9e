"""Kernel-based change-point scan statistics.

Workflow: wrap observations in a :class:`Sequence`, build a
:class:`GramSummary` (Gaussian kernel, median-heuristic bandwidth), then
either scan and test analytically (:func:`fgkcp1`, :func:`fgkcp2`,
:func:`pval_single_zd`, ...), by permutation (:func:`perm_pvalue`), or
recursively (:func:`binary_segment`).
"""

from .bench import (ExperimentResult, critical_value_study, power_study,
                    runtime_study, size_study)
from .errors import (AllPointsIdentical, AllSkewInvalid, ConfigError,
                     DataFormatError, DegenerateSplit, InvalidSpec,
                     KcpScanError, NonFiniteKernel, SingularCovariance,
                     ZeroVariance)
from .fast_tests import FastTestReport, fgkcp1, fgkcp2, simes_combine
from .generators import FAMILIES, GeneratorSpec, generate
from .gram import (GramSummary, Sequence, build_gram, gram_from_kernel,
                   median_heuristic)
from .moments import (NullMoments, SplitWeights, cross_correlation, dw_moments,
                      alpha_beta_moments, split_weights, third_moments)
from .permutation import PermConfig, PermResult, perm_pvalue
from .pvalues import (PValueReport, TailApproxConfig, c_derivative,
                      critical_value, nu, pval_interval_zd, pval_interval_zw,
                      pval_single_zd, pval_single_zw, skewness_correct)
from .scan import (IntervalScanProfile, ScanProfile, default_bounds,
                   mmd_u_scan, scan_interval, scan_single)
from .segmentation import ChangeNode, ChangeTree, binary_segment

__version__ = "0.1.0"

__all__ = [
    "Sequence", "GramSummary", "median_heuristic", "build_gram",
    "gram_from_kernel", "SplitWeights", "NullMoments", "split_weights",
    "alpha_beta_moments", "dw_moments", "third_moments", "cross_correlation",
    "ScanProfile", "IntervalScanProfile", "scan_single", "scan_interval",
    "mmd_u_scan", "default_bounds", "TailApproxConfig", "PValueReport", "nu",
    "c_derivative", "pval_single_zd", "pval_single_zw", "pval_interval_zd",
    "pval_interval_zw", "skewness_correct", "critical_value", "PermConfig",
    "PermResult", "perm_pvalue", "FastTestReport", "fgkcp1", "fgkcp2",
    "simes_combine", "ChangeTree", "ChangeNode", "binary_segment",
    "GeneratorSpec", "FAMILIES", "generate", "ExperimentResult", "power_study",
    "size_study", "critical_value_study", "runtime_study",
    "KcpScanError", "AllPointsIdentical", "NonFiniteKernel", "DegenerateSplit",
    "ZeroVariance", "SingularCovariance", "AllSkewInvalid", "InvalidSpec",
    "DataFormatError", "ConfigError",
]
