//! Combinatorics of random groups in the density model: words, random
//! subsets, Stallings graphs, van Kampen diagrams, abstract diagrams and
//! the phase-transition experiments built on them.

pub mod abstract_diagrams;
pub mod density;
pub mod diagrams;
pub mod error;
pub mod experiments;
pub mod planar;
pub mod seed;
pub mod stallings;
pub mod words;

pub use error::{Error, Result};
pub use words::{Alphabet, Letter, Word};
