"""Real-time radial MRI reconstruction with aggregated motion estimation."""

from ._rtmri import (
    ConfigError,
    Dataset,
    DivergenceError,
    InvalidArgument,
    IoError,
    default_config,
    estimate_motion,
    metrics,
    nufft_adjoint,
    nufft_forward,
    pca_energies,
    read_dataset,
    reconstruct,
    simulate,
    temporal_median,
    warp,
    write_dataset,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "DivergenceError",
    "InvalidArgument",
    "IoError",
    "default_config",
    "estimate_motion",
    "metrics",
    "nufft_adjoint",
    "nufft_forward",
    "pca_energies",
    "read_dataset",
    "reconstruct",
    "simulate",
    "temporal_median",
    "warp",
    "write_dataset",
]
