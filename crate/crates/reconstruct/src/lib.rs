//! Parametrix-preconditioned reconstruction from normal-operator or sinogram
//! data, and probes of injectivity and regularity gain on the discretisation.

pub mod error;
pub mod probe;
pub mod regularity;
pub mod solver;
pub mod trace;

pub use error::{ReconstructError, Result};
pub use probe::{injectivity_probe, injectivity_probe_with, InjectivityReport, MAX_PROBE_DIM};
pub use regularity::{regularity_gain_demo, RegularityOptions, RegularityReport, RoughSeries};
pub use solver::{invert_normal, Inversion, NormalModel, Reconstructor, SolverSettings};
pub use trace::{IterationTrace, StopReason};
