from .diameters import (
    WindowDiameters,
    diameter_at,
    diameter_series,
    window_times,
    complete_windows,
    window_diameters,
    compute_M0
)
from .checks import (
    check_record,
    skipped_record,
    verify_hull_confinement,
    verify_lemma_chain,
    verify_projection_contraction,
    fit_decay_rate,
    verify_rate_dominance
)
from .certificate import ProofConstants, certificate_constants, build_certificate

__all__ = (
    'WindowDiameters',
    'diameter_at',
    'diameter_series',
    'window_times',
    'complete_windows',
    'window_diameters',
    'compute_M0',
    'check_record',
    'skipped_record',
    'verify_hull_confinement',
    'verify_lemma_chain',
    'verify_projection_contraction',
    'fit_decay_rate',
    'verify_rate_dominance',
    'ProofConstants',
    'certificate_constants',
    'build_certificate'
)
