"""
Error bounds for IJ predictions: sampled constants, δ, the certificate,
the supporting matrix inequalities and the empirical rate check.
"""

from .certificate import (
    CertificateMetadata,
    ConstantEstimates,
    IJCertificate,
    auto_radius,
    certify,
    compute_delta,
    estimate_constants,
    measured_error,
    weight_constant,
)
from .domain import MIN_RADIUS, DomainConfig, DomainSpec
from .inequalities import check_holder, check_opnorm_continuity
from .rate import RateReport, corollary_rate_check, measure_rate

__all__ = [
    "CertificateMetadata",
    "ConstantEstimates",
    "DomainConfig",
    "DomainSpec",
    "IJCertificate",
    "MIN_RADIUS",
    "RateReport",
    "auto_radius",
    "certify",
    "check_holder",
    "check_opnorm_continuity",
    "compute_delta",
    "corollary_rate_check",
    "estimate_constants",
    "measure_rate",
    "measured_error",
    "weight_constant",
]

# keep this list sorted
assert __all__ == sorted(__all__)
