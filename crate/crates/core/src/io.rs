//! Input schema shared with the command-line tool.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complex::{CellSet, Complex, ComplexSpec};
use crate::error::{Error, Result};
use crate::mvf::{FieldSpec, MultivectorField};

/// One input file: a complex and a sequence of fields on it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub complex: ComplexSpec,
    pub fields: Vec<FieldSpec>,
    /// Optional block decompositions keyed by field index, as lists of cell ids.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub decompositions: BTreeMap<usize, Vec<Vec<String>>>,
}

/// Validated bundle. Fence conditions and decompositions are checked by their consumers.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub complex: Arc<Complex>,
    pub fields: Vec<MultivectorField>,
    pub decompositions: BTreeMap<usize, Vec<CellSet>>,
}

/// Parses and validates a bundle; schema errors carry line and column.
pub fn parse_bundle(text: &str) -> Result<Bundle> {
    let spec: BundleSpec = serde_json::from_str(text)
        .map_err(|e| Error::Schema(format!("line {} column {}: {}", e.line(), e.column(), e)))?;
    bundle_from_spec(&spec)
}

pub fn bundle_from_spec(spec: &BundleSpec) -> Result<Bundle> {
    let complex = Arc::new(Complex::from_spec(&spec.complex)?);
    let fields = spec
        .fields
        .iter()
        .enumerate()
        .map(|(i, f)| {
            MultivectorField::from_spec(complex.clone(), f).map_err(|e| match e {
                Error::NotPartition(m) => Error::NotPartition(format!("field {i}: {m}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut decompositions = BTreeMap::new();
    for (&l, blocks) in &spec.decompositions {
        if l >= fields.len() {
            return Err(Error::Schema(format!("decomposition for field {l}, but only {} fields", fields.len())));
        }
        let sets = blocks.iter().map(|b| complex.set_from_ids(b)).collect::<Result<Vec<_>>>()?;
        decompositions.insert(l, sets);
    }
    Ok(Bundle { complex, fields, decompositions })
}
