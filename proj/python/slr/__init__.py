"""Two-component structured low-rank recovery from undersampled k-space."""

from ._core import (
    DimensionError,
    IoError,
    NumericalError,
    ParameterError,
    ParseError,
    SolverConfig,
    component_leakage,
    derivative,
    fft2c,
    gram_matrix,
    ifft2c,
    lifted_matrix,
    make_mask,
    mixed_phantom,
    random_phantom,
    read_array,
    recover,
    snr_db,
    sos_mask,
    weight_sqrt,
    write_array,
)

__all__ = [
    "DimensionError",
    "IoError",
    "NumericalError",
    "ParameterError",
    "ParseError",
    "SolverConfig",
    "component_leakage",
    "derivative",
    "fft2c",
    "gram_matrix",
    "ifft2c",
    "lifted_matrix",
    "make_mask",
    "mixed_phantom",
    "random_phantom",
    "read_array",
    "recover",
    "snr_db",
    "sos_mask",
    "weight_sqrt",
    "write_array",
]
