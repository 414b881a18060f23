"""Low-precision plus low-rank weight decomposition, W ~ Q + L R."""

from ._core import (
    CalderaError,
    CalderaResult,
    DecompositionConfig,
    DomainError,
    FactorizationError,
    FormatError,
    HessianContext,
    IoError,
    LdlqResult,
    QuantizerSpec,
    RcrSolution,
    RegimeError,
    ShapeError,
    UpdateOrder,
    analysis,
    caldera_decompose,
    compute_hessian,
    decode_cmat,
    default_regularization,
    encode_cmat,
    hessian_context,
    ldl_upper,
    ldlq_quantize,
    make_rht,
    proxy_error,
    quantize_matrix,
    rcr_objective,
    read_cmat,
    rht_forward,
    rht_inverse,
    solve_rcr,
    synthesize,
    verify_error_identity,
    write_cmat,
)

__version__ = "0.1.0"


def decompose(W, X, rank, bits_q=2, bits_l=8, bits_r=8, delta=None, **options):
    """Decompose W against calibration inputs X (rows are samples)."""
    import numpy as np

    X = np.asarray(X, dtype=float)
    H = X.T @ X / X.shape[0]
    if delta is None:
        delta = default_regularization(H)
    ctx = hessian_context(H, X.shape[0], delta)
    cfg = DecompositionConfig()
    cfg.rank = rank
    cfg.bits_q = bits_q
    cfg.bits_l = bits_l
    cfg.bits_r = bits_r
    for key, value in options.items():
        if not hasattr(cfg, key):
            raise TypeError(f"unknown option {key!r}")
        setattr(cfg, key, value)
    return caldera_decompose(np.asarray(W, dtype=float), ctx, cfg)
