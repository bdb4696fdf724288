//! Template vectors: a deterministic sign-hashed bag of tokens, and the
//! line-oriented vector file shared with external embedding exporters.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::parser::{LogTemplate, TemplateId};

pub const DEFAULT_BUILTIN_DIM: usize = 64;
pub const MIN_BUILTIN_DIM: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error("vector file line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("no vector for template {0}")]
    MissingVector(TemplateId),
    #[error("builtin encoder needs dimension >= {MIN_BUILTIN_DIM}, got {0}")]
    DimensionTooSmall(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    BuiltinHash,
    ExternalImport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateVector {
    pub template_id: TemplateId,
    pub values: Vec<f64>,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(salt: u8, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in std::iter::once(&salt).chain(bytes) {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Bucket in `1..dim` for a constant token; slot 0 is the wildcard counter.
pub fn token_bucket(token: &str, dim: usize) -> usize {
    1 + (fnv1a(0, token.as_bytes()) % (dim as u64 - 1)) as usize
}

pub fn token_sign(token: &str) -> f64 {
    if fnv1a(1, token.as_bytes()) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Feature-hash a template's constant tokens into `dim` slots, add the
/// wildcard count at slot 0, and scale to unit length.
pub fn encode_builtin(template: &LogTemplate, dim: usize) -> Result<TemplateVector, EncodeError> {
    if dim < MIN_BUILTIN_DIM {
        return Err(EncodeError::DimensionTooSmall(dim));
    }
    let mut values = vec![0.0; dim];
    values[0] = template.wildcard_count() as f64;
    for token in template.constants() {
        values[token_bucket(token, dim)] += token_sign(token);
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(TemplateVector {
        template_id: template.template_id,
        values,
    })
}

/// Vectors for every template of a run, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    dim: usize,
    vectors: BTreeMap<TemplateId, Vec<f64>>,
    provenance: Provenance,
}

impl VectorTable {
    pub fn builtin(templates: &[LogTemplate], dim: usize) -> Result<Self, EncodeError> {
        let mut vectors = BTreeMap::new();
        for t in templates {
            let v = encode_builtin(t, dim)?;
            vectors.insert(v.template_id, v.values);
        }
        Ok(Self {
            dim,
            vectors,
            provenance: Provenance::BuiltinHash,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: TemplateId) -> Result<&[f64], EncodeError> {
        self.vectors
            .get(&id)
            .map(Vec::as_slice)
            .ok_or(EncodeError::MissingVector(id))
    }

    pub fn ids(&self) -> impl Iterator<Item = TemplateId> + '_ {
        self.vectors.keys().copied()
    }

    /// Fails with the first template id that has no vector.
    pub fn check_coverage<I: IntoIterator<Item = TemplateId>>(
        &self,
        ids: I,
    ) -> Result<(), EncodeError> {
        for id in ids {
            self.get(id)?;
        }
        Ok(())
    }

    /// Load a vector file. Imported vectors are kept as-is (no renormalisation).
    pub fn import<R: BufRead>(input: R) -> Result<Self, EncodeError> {
        let mut lines = input.lines().enumerate();
        let fmt_err = |line: usize, reason: String| EncodeError::Format { line, reason };
        let (_, header) = lines
            .next()
            .ok_or_else(|| fmt_err(1, "empty vector file".into()))?;
        let header = header.map_err(|e| fmt_err(1, e.to_string()))?;
        let dim: usize = header
            .strip_prefix("#dim ")
            .and_then(|d| d.trim().parse().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| fmt_err(1, format!("expected `#dim D`, found `{header}`")))?;
        let mut vectors = BTreeMap::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.map_err(|e| fmt_err(line_no, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let id: TemplateId = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| fmt_err(line_no, "bad template_id".into()))?;
            let values = fields
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| fmt_err(line_no, e.to_string()))?;
            if values.len() != dim {
                return Err(fmt_err(
                    line_no,
                    format!("row has {} values, header says {dim}", values.len()),
                ));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(fmt_err(line_no, "non-finite value".into()));
            }
            if vectors.insert(id, values).is_some() {
                return Err(fmt_err(line_no, format!("duplicate template_id {id}")));
            }
        }
        Ok(Self {
            dim,
            vectors,
            provenance: Provenance::ExternalImport,
        })
    }

    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "#dim {}", self.dim)?;
        for (id, values) in &self.vectors {
            write!(out, "{id}")?;
            for v in values {
                write!(out, " {v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
