//! The kernel k(x, z) of the localized normal operator, its splitting into a
//! homogeneous singular part and a bounded remainder, and the numerical
//! symbol a(x, ξ) with empirical symbol-class checks.

pub mod error;
pub mod fit;
pub mod fourier;
pub mod kernel;
pub mod seminorm;
pub mod symbol;

pub use error::{Result, SymbolError};
pub use fit::{envelope_fit, power_fit, PowerFit};
pub use fourier::{
    b_symbol, calibrate_constant, default_calibration, ft_chi_over_norm, ft_inverse_norm, hankel_chi,
    principal_symbol, principal_weight, Calibration, CALIBRATION_BAND,
};
pub use kernel::{default_chi, h_eval, h_limit, kernel_eval, split_kernel, KernelCenter, KernelSlice};
pub use seminorm::{seminorm_check, seminorm_check_band, SeminormReport, SeminormRow, DEFAULT_BAND};
pub use symbol::{
    symbol_fft, FftSettings, FrequencyGrid, SymbolClass, SymbolDecomposition, SymbolGrid,
};
