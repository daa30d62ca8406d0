//! Periodic, anti-periodic and Dirichlet spectra of the Zakharov-Shabat operator
//!
//! `L(φ) = i·diag(1,−1)∂ₓ + [[0, φ₁], [φ₂, 0]]` on the circle `[0, 1]`.
//!
//! The pipeline is: [`potential`] → [`transfer`] (fundamental matrix) →
//! [`characteristic`] (Δ, χ_p, χ_D) → [`rootfinder`] (argument principle) →
//! [`classify`] (multiplicities, verdicts). [`gradients`], [`discriminant`],
//! [`oracle`] and [`pathfinder`] build on top.

pub mod characteristic;
pub mod classify;
pub mod cli;
pub mod discriminant;
pub mod error;
mod extended;
pub mod gradients;
pub mod linalg;
pub mod oracle;
pub mod pathfinder;
pub mod potential;
pub mod rootfinder;
pub mod serial;
pub mod tolerances;
pub mod transfer;

pub use characteristic::CharKind;
pub use classify::{EigenvalueRecord, Parity, SpectrumReport, Verdicts};
pub use error::{Error, Result};
pub use potential::{Potential, Symmetry};
pub use rootfinder::{Disk, RootCluster};
pub use tolerances::Tolerances;
pub use transfer::{Mat2, TransferResult};

pub use num_complex::Complex64;
