//! Topological pressure of hom tree-shifts on the `d`-tree.
//!
//! [`pressure`] runs the optimal-transition recursion and produces rigorous
//! enclosures, [`oracle`] enumerates finite blocks as ground truth, and
//! [`analysis`] sweeps the branching factor and renders datasets.

pub mod algebra;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod pressure;

pub use algebra::{Alphabet, InteractionSystem, ProbVector, StochMatrix};
pub use error::{Error, Result};
pub use pressure::{pressure_certificate, PressureCertificate};
