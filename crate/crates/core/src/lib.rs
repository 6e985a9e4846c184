//! Weighted (adaptive) lasso with simple and nested K-fold cross-validation
//! calibration, and a seeded simulation harness comparing the two schemes.

pub mod calibration;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod experiments;
pub mod folds;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod solvers;
pub mod types;

pub use error::{Error, Result};
pub use rng::SeededRng;
pub use types::{CoefficientVector, CvCurve, Dataset, FoldAssignment, LambdaPath, WeightVector};
