//! JSON and CSV formats, atomic writes and input hashing.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contact_fields::{ComplexContactField, ContactField};
use crate::error::{Error, Result};
use crate::harmonic_basis::{SpectralScalar, SpectralSpace};
use crate::C64;

pub fn coeffs_to_pairs(c: &[C64]) -> Vec<[f64; 2]> {
    c.iter().map(|z| [z.re, z.im]).collect()
}

pub fn pairs_to_coeffs(p: &[[f64; 2]]) -> Vec<C64> {
    p.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

fn check_basis(space: &SpectralSpace, degree: usize, basis_id: &str, len: usize) -> Result<()> {
    if degree != space.degree() || basis_id != space.basis.id() {
        return Err(Error::BasisMismatch { expected: space.basis.id().to_string(), found: basis_id.to_string() });
    }
    if len != space.dim() {
        return Err(Error::Invalid(format!("expected {} coefficients, found {len}", space.dim())));
    }
    Ok(())
}

/// {degree, basis_id, coeffs}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarJson {
    pub degree: usize,
    pub basis_id: String,
    pub coeffs: Vec<[f64; 2]>,
}

impl ScalarJson {
    pub fn new(space: &SpectralSpace, f: &SpectralScalar) -> Self {
        ScalarJson { degree: space.degree(), basis_id: space.basis.id().to_string(), coeffs: coeffs_to_pairs(&f.coeffs) }
    }

    pub fn to_scalar(&self, space: &SpectralSpace) -> Result<SpectralScalar> {
        check_basis(space, self.degree, &self.basis_id, self.coeffs.len())?;
        Ok(space.from_coeffs(pairs_to_coeffs(&self.coeffs)))
    }
}

/// {kind, coefficients, basis_id}: the generating function g of a real
/// contact field or the parameter f of a complex one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    pub kind: String,
    pub degree: usize,
    pub basis_id: String,
    pub coefficients: Vec<[f64; 2]>,
}

pub const KIND_CONTACT: &str = "contact";
pub const KIND_COMPLEX_CONTACT: &str = "complex_contact";

impl FieldJson {
    pub fn contact(space: &SpectralSpace, x: &ContactField) -> Self {
        FieldJson {
            kind: KIND_CONTACT.into(),
            degree: space.degree(),
            basis_id: space.basis.id().to_string(),
            coefficients: coeffs_to_pairs(&x.g.coeffs),
        }
    }

    pub fn complex(space: &SpectralSpace, z: &ComplexContactField) -> Self {
        FieldJson {
            kind: KIND_COMPLEX_CONTACT.into(),
            degree: space.degree(),
            basis_id: space.basis.id().to_string(),
            coefficients: coeffs_to_pairs(&z.f.coeffs),
        }
    }

    pub fn parameter(&self, space: &SpectralSpace) -> Result<SpectralScalar> {
        check_basis(space, self.degree, &self.basis_id, self.coefficients.len())?;
        Ok(space.from_coeffs(pairs_to_coeffs(&self.coefficients)))
    }
}

/// {g, steps, basis_id}; mapped nodes are recomputed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffeoJson {
    pub degree: usize,
    pub basis_id: String,
    pub g: Vec<[f64; 2]>,
    pub steps: usize,
}

impl DiffeoJson {
    pub fn generator(&self, space: &SpectralSpace) -> Result<SpectralScalar> {
        check_basis(space, self.degree, &self.basis_id, self.g.len())?;
        Ok(space.from_coeffs(pairs_to_coeffs(&self.g)))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Reads a JSON file and returns it with the SHA-256 of its bytes.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(T, String)> {
    let bytes = fs::read(path)?;
    let value = serde_json::from_slice(&bytes)?;
    Ok((value, sha256_hex(&bytes)))
}

/// CSV with `# key: value` preamble lines followed by a header row.
pub fn csv_bytes<T: Serialize>(preamble: &[(&str, String)], rows: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for (k, v) in preamble {
        writeln!(out, "# {k}: {v}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(out)
}

pub fn write_csv<T: Serialize>(path: &Path, preamble: &[(&str, String)], rows: &[T]) -> Result<()> {
    write_atomic(path, &csv_bytes(preamble, rows)?)
}

/// Rows of a CSV written by [`write_csv`].
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}
