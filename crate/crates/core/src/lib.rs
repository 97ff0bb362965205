//! Fast multi-kernel encoder classifier.
//!
//! Samples are embedded into `K` dimensions by evaluating a kernel between
//! each sample and the `K` class-mean representatives, then classified with
//! linear discriminant analysis. Several kernels can be tried at once; the
//! one with the lowest training cross-entropy wins, subject to a switching
//! threshold relative to the inner-product baseline.
//!
//! The quadratic-time variant that builds the full Gram matrix is kept in
//! [`reference`] as an oracle and timing baseline.

pub mod cli;
pub mod data;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod io;
pub mod kernels;
pub mod lda;
pub mod par;
pub mod reference;
pub mod selection;
pub mod simgen;

pub use data::{validate, ClassStats, Dataset};
pub use encoder::{build_u, build_weights, embed, Embedding, EncoderWeights};
pub use error::{Error, Result};
pub use kernels::{CustomKernel, KernelId};
pub use lda::{fit_lda, LdaModel};
pub use selection::{fit, EncoderModel, FitOptions};
pub use simgen::{SimParams, SimSetting};
