//! The leading-order parametrix P = Op(p), p(x, ξ) = C⁻¹ζ(ξ)|ξ|_{g(x)}, of the
//! localized normal operator, grid application of pseudodifferential
//! operators, and measurements of the remainder R in PN = Id + R.

pub mod error;
pub mod fourier;
pub mod operator;
pub mod products;
pub mod residual;
pub mod sobolev;
pub mod symbol;

pub use error::{ParametrixError, Result};
pub use fourier::{FourierGrid, DEFAULT_PAD};
pub use operator::{apply_op, parametrix_op, parametrix_op_with, ApplyMode, PseudoOp};
pub use products::{apply_principal_product, apply_products, spectral_refine, ProductActions, ProductSettings};
pub use residual::{
    residual, residual_many, smoothing_order, LevelRow, Residual, ResidualSettings, SmoothingReport,
    SmoothingSettings, WavePacket,
};
pub use sobolev::{band_energies, dyadic_bands, sobolev_from_spectrum, sobolev_norm, sobolev_norm_on};
pub use symbol::{
    parametrix_symbol, FnSymbol, Multiplier, ParametrixSymbol, PrincipalProduct, SeparableTerm, Symbol, ZetaCutoff, ZetaShells,
};
