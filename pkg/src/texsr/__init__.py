"""Provably exact stochastic super-resolution of Gaussian microtextures.

The package turns a single reference texture into a stationary Gaussian
model, degrades it with periodic blur-plus-subsampling operators, and
draws high-resolution samples exactly conditioned on a low-resolution
observation — the kriging system solves in closed form in the Fourier
domain.  A conjugate-gradient reference solver, variance analysis tools,
lossless float image I/O and a CLI round out the toolkit.

Typical use::

    import texsr

    model = texsr.build_model(reference)           # texture model
    op = texsr.bicubic_operator(*model.grid_shape, r)
    u_lr = texsr.apply(op, reference)              # observe
    s = texsr.sr_sample(model, u_lr, op, seed=0)   # super-resolve
    s.sample, s.kriging_component, s.innovation_component
"""

from .adsn import AdsnModel, adsn_sample, build_model, periodic_component, white_noise
from .analysis import (
    MetricsReport,
    VarianceMap,
    empirical_variance_map,
    lr_psnr,
    metrics_report,
    mse,
    mse_decomposition,
    psnr,
    ssim,
    theoretical_variance_map,
)
from .cgd import (
    CgdConfig,
    CgdResult,
    cgd_kriging_apply,
    cgd_solve,
    cgd_sr_sample,
    full_rgb_covariance_apply,
    residual,
)
from .errors import (
    AllFrequenciesZeroed,
    CorruptHeader,
    DegenerateModel,
    DimensionMismatch,
    InsufficientSamples,
    KernelTooLarge,
    NonHermitianSpectrum,
    NumericalBreakdown,
    StrideDoesNotDivide,
    TexsrError,
    UnsupportedFormat,
)
from .fileio import (
    read_image,
    read_kernel_file,
    read_pfm,
    read_png,
    write_image,
    write_kernel_file,
    write_pfm,
    write_png,
    write_spectrum_png,
)
from .grid import circular_convolve, dft2, flip, idft2, subsample, upsample_adjoint
from .kriging import (
    DEFAULT_EPSILON,
    KrigingKernel,
    SrSample,
    StabilityReport,
    apply_kriging,
    kriging_kernel,
    lr_covariance_kernel,
    pseudo_inverse_kernel,
    sr_sample,
    stability_check,
)
from .operators import (
    DegradationOperator,
    apply,
    apply_adjoint,
    bicubic_operator,
    custom_operator,
    keys_taps,
)

__version__ = "0.1.0"
