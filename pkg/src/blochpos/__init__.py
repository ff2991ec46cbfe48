"""Band structure and momentum positivity of Bloch wave packets in 1D
periodic potentials with finitely many Fourier harmonics.
"""

from ._version import __version__
from .bands import (
    BandTable,
    BrillouinGrid,
    ConvergenceReport,
    check_convergence,
    compute_bands,
    gauge_fix,
    load_band_table,
    save_band_table,
)
from .central_eq import CentralMatrix, EigenPairSet, build, eigen_lowest
from .errors import (
    BandOverlapError,
    BlochPosError,
    ConfigError,
    DegenerateBandsError,
    FoldingSeamError,
    InvalidArgumentError,
    NumericalFailureError,
    NyquistError,
    SelfCheckError,
    SupportViolationError,
    TruncationError,
    WindowDeficitError,
    WrongOperationError,
    ZoneBoundaryError,
)
from .oracle import OracleConfig, OracleReport, direct_p_plus
from .positivity import (
    CosineSupremum,
    PositivityReport,
    asympt_strong,
    asympt_weak,
    cosine_sup_report,
    harmonic_f00,
    lambda_cross,
    lambda_single,
    lambda_table,
    p_plus_multiband,
    p_plus_single,
    perturbative_f00,
    perturbative_g1,
    sup_p_plus_cosine,
)
from .potential import (
    FourierPotential,
    cosine_for_strength,
    dimensionless_strength,
    evaluate,
    free_potential,
    make_cosine,
    potential_from_config,
)
from .wavepacket import (
    MomentumDistribution,
    QuasiMomentumAmplitude,
    amplitude_from_config,
    amplitude_from_csv,
    make_bump,
    momentum_distribution,
    momentum_wavefunction,
    position_wavefunction,
    position_wavefunction_grid,
)

__all__ = [name for name in dir() if not name.startswith("_")]
