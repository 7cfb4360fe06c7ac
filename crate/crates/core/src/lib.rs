//! Sidorenko and common linear equations over finite fields.
//!
//! Field and vector-space arithmetic, equation normal forms and the
//! classification rule, exact counting, Fourier analysis on GF(q)^n,
//! construction of certificates, exhaustive refutation search and
//! cube embeddings.

pub mod budget;
pub mod counting;
pub mod error;
pub mod field;
pub mod forge;
pub mod formats;
pub mod fourier;
pub mod hilbert;
pub mod linear;
pub mod notation;
pub mod refuter;

pub use budget::Budget;
pub use counting::{PointSet, TwoColoring};
pub use error::{Error, Result};
pub use field::{Field, FieldElement, GroupVector, Space};
pub use forge::{Certificate, FunctionalKind};
pub use fourier::{GroupFunction, Spectrum};
pub use hilbert::{CubeEmbedding, CubeSystem};
pub use linear::{Basis, LinearEquation, RhsMode, Verdict};
pub use notation::{parse_equation_spec, parse_field_spec};
pub use refuter::{SearchKind, SearchOptions, SearchReport};
