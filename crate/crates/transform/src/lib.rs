//! Geodesic X-ray transform I, backprojection I*, and the normal operator
//! N = I*I on the unit disk, with N also built directly from its weakly
//! singular kernel 2a(x, y) d_g(x, y)^{-1}.

pub mod backproject;
pub mod cutoff;
pub mod error;
pub mod grid;
pub mod io;
pub mod normal;
pub mod probes;
pub mod rays;
pub mod sinogram;
pub mod xray;

pub use backproject::{backproject, ray_coordinates};
pub use cutoff::{CutoffSpec, RadialCutoff, Smoothstep};
pub use error::{Result, TransformError};
pub use grid::{disk_mask, Field, FnField, GridSpec, ScalarGrid, Weighted};
pub use normal::{
    assemble, normal_compose, normal_kernel, normal_many, normal_via_sinogram, verify_normal_identity,
    ComposeSettings, DenseOperator, KernelSettings, NormalIdentityReport, NormalRoute, NormalSettings,
    SinogramSettings,
};
pub use rays::RayRule;
pub use sinogram::{santalo_weights, SinogramGrid};
pub use xray::{xray, RaySettings};
pub use probes::{BandLimited, DiskIndicator, Gaussian};
