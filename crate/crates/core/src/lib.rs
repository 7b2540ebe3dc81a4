//! Toolkit for small cancellation theory over labelled graphs.
//!
//! The crate provides:
//!
//! * free-monoid words with free/cyclic reduction and presentation
//!   simplification ([`words`]),
//! * oriented labelled graphs, label-preserving morphisms and simple-cycle
//!   enumeration ([`graph`]),
//! * piece machinery (maximal pieces, minimal decompositions, piece
//!   distance, supports) ([`pieces`]),
//! * checkers for the C(n) / C'(λ) / Gr(n) / Gr'(λ) conditions with
//!   re-validatable witnesses ([`conditions`]),
//! * free-product completions and the starred condition variants
//!   ([`completion`]),
//! * witness-package construction for the free-subgroup embedding data
//!   ([`witness`]),
//! * combinatorial planar/spherical diagrams with curvature audits and
//!   reduction moves ([`diagram`]),
//! * cyclic-subgroup distortion certificates with exact constants
//!   ([`distortion`]).

pub mod completion;
pub mod conditions;
pub mod diagram;
pub mod distortion;
pub mod graph;
pub mod pieces;
pub mod witness;
pub mod words;

pub use words::{Alphabet, CyclicWord, Letter, Presentation, Word};
