//! Classical and double Zarankiewicz numbers, generalized C4 admissibility,
//! and Gram certificates for doubly simple biquadratic forms.
//!
//! The algebraic layer is generic over the entry type; the aliases below fix
//! the usual choices.

pub mod admissibility;
pub mod cli;
pub mod forms;
pub mod gram;
pub mod grid;
pub mod scalar;
pub mod search;

pub use admissibility::{is_admissible, Verdict, Witness, WitnessKind};
pub use grid::{BiGraph, CanonicalKey, Cell, GridError, TwoEdge};
pub use scalar::{Coefficient, Rational, Real};
pub use search::{SearchOptions, SearchResult};

/// Integer coefficients.
pub type Form = forms::BiquadraticForm<i64>;
/// Rational coefficients.
pub type ExactForm = forms::BiquadraticForm<Rational>;
pub type Gram = gram::GramMatrix<f64>;
pub type Gram32 = gram::GramMatrix<f32>;
pub type ExactGram = gram::GramMatrix<Rational>;
pub type Point = forms::Point<f64>;
