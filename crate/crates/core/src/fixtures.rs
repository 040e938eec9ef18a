//! Bundled example inputs.

use std::sync::Arc;

use crate::complex::{CellSpec, Complex};
use crate::io::{parse_bundle, Bundle};
use crate::mvf::MultivectorField;

pub const FIRST_EXAMPLE: &str = include_str!("../../../fixtures/first_example.json");
pub const OCTAHEDRON: &str = include_str!("../../../fixtures/octahedron.json");
pub const MAIN_EXAMPLE: &str = include_str!("../../../fixtures/main_example.json");
pub const PITCHFORK: &str = include_str!("../../../fixtures/pitchfork.json");

fn load(text: &str) -> (Arc<Complex>, Vec<MultivectorField>) {
    let b = parse_bundle(text).expect("bundled fixture is valid");
    (b.complex, b.fields)
}

/// Six vertices, nine edges, four triangles; one field of ten multivectors.
pub fn first_example() -> (Arc<Complex>, Vec<MultivectorField>) {
    load(FIRST_EXAMPLE)
}

/// The first example with its coarse four-block decomposition at index 0.
pub fn first_example_bundle() -> Bundle {
    parse_bundle(FIRST_EXAMPLE).expect("bundled fixture is valid")
}

/// Hollow octahedron with six fields.
pub fn octahedron() -> (Arc<Complex>, Vec<MultivectorField>) {
    load(OCTAHEDRON)
}

pub fn octahedron_complex() -> Complex {
    (*octahedron().0).clone()
}

/// Square with a diagonal and a whisker; five fields.
pub fn main_example() -> (Arc<Complex>, Vec<MultivectorField>) {
    load(MAIN_EXAMPLE)
}

/// A single edge: one critical multivector splitting into three cells.
pub fn pitchfork() -> (Arc<Complex>, Vec<MultivectorField>) {
    load(PITCHFORK)
}

/// The full 2-simplex on `a, b, c`.
pub fn triangle() -> Complex {
    let s = |id: &str, dim: usize, f: &[&str]| CellSpec {
        id: id.into(),
        dim,
        facets: f.iter().map(|x| x.to_string()).collect(),
    };
    Complex::build(&[
        s("a", 0, &[]),
        s("b", 0, &[]),
        s("c", 0, &[]),
        s("ab", 1, &["a", "b"]),
        s("ac", 1, &["a", "c"]),
        s("bc", 1, &["b", "c"]),
        s("abc", 2, &["ab", "ac", "bc"]),
    ])
    .expect("triangle is valid")
}
