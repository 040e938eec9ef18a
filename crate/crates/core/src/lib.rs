//! Conley-Morse persistence barcodes for parameterized combinatorial
//! multivector fields on finite simplicial complexes.
//!
//! Pipeline: [`complex`] and [`mvf`] hold the input; [`dynamics`] extracts
//! block and Morse decompositions and index pairs; [`transition`] assembles
//! the transition diagram; [`zigzag`] decomposes its homology into bars.
//! All homology is over Z/2.

pub mod complex;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod homology;
pub mod io;
pub mod linalg;
pub mod mvf;
pub mod transition;
pub mod zigzag;

pub use complex::{CellIdx, CellSet, Complex};
pub use error::{Error, Result};
pub use mvf::MultivectorField;
