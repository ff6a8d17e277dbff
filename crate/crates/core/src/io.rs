//! State files and canonical serialization.
//!
//! The state format is JSON: {"dims": [..], "matrix": [[[re, im], ..], ..]}
//! row-major. Writing is canonical (fixed field order, 17-significant-digit
//! floats) so any state emitted by the library round-trips byte for byte.
//! All writes go through a temp file plus rename.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::state::{CMatrix, DensityMatrix, ProductBasis};

/// Canonical float rendering: 17 significant digits, enough to round-trip
/// any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render a state in the canonical JSON form.
pub fn state_to_json(rho: &DensityMatrix) -> String {
    let mut s = String::new();
    s.push_str("{\"dims\": [");
    for (i, d) in rho.dims().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{d}");
    }
    s.push_str("], \"matrix\": [");
    let n = rho.dim();
    for r in 0..n {
        if r > 0 {
            s.push_str(", ");
        }
        s.push('[');
        for c in 0..n {
            if c > 0 {
                s.push_str(", ");
            }
            let z = rho.data()[(r, c)];
            let _ = write!(s, "[{}, {}]", fmt_f64(z.re), fmt_f64(z.im));
        }
        s.push(']');
    }
    s.push_str("]}\n");
    s
}

/// Parse and fully validate a state from its JSON form, reporting the first
/// violated invariant.
pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    let v: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::BadStateFile(format!("invalid JSON: {e}")))?;
    let dims = v
        .get("dims")
        .and_then(|d| d.as_array())
        .ok_or_else(|| Error::BadStateFile("missing \"dims\" array".into()))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| Error::BadStateFile("dims entries must be integers".into()))
        })
        .collect::<Result<Vec<usize>>>()?;
    let rows = v
        .get("matrix")
        .and_then(|m| m.as_array())
        .ok_or_else(|| Error::BadStateFile("missing \"matrix\" array".into()))?;
    let n = rows.len();
    let mut data = CMatrix::zeros(n, n);
    for (r, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::BadStateFile("matrix rows must be arrays".into()))?;
        if row.len() != n {
            return Err(Error::BadStateFile(format!(
                "row {r} has {} entries, expected {n}",
                row.len()
            )));
        }
        for (c, cell) in row.iter().enumerate() {
            let pair = cell
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::BadStateFile("matrix entries must be [re, im]".into()))?;
            let re = pair[0]
                .as_f64()
                .ok_or_else(|| Error::BadStateFile("non-numeric matrix entry".into()))?;
            let im = pair[1]
                .as_f64()
                .ok_or_else(|| Error::BadStateFile("non-numeric matrix entry".into()))?;
            data[(r, c)] = Complex64::new(re, im);
        }
    }
    DensityMatrix::new(data, dims)
}

/// Write `contents` atomically: temp file in the same directory, then
/// rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|f| f.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::BadStateFile(format!("{}: {e}", path.display())))?;
    state_from_json(&text)
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_atomic(path, &state_to_json(rho))
        .map_err(|e| Error::BadStateFile(format!("{}: {e}", path.display())))
}

fn matrix_to_json(m: &CMatrix) -> String {
    let mut s = String::from("[");
    for r in 0..m.nrows() {
        if r > 0 {
            s.push_str(", ");
        }
        s.push('[');
        for c in 0..m.ncols() {
            if c > 0 {
                s.push_str(", ");
            }
            let z = m[(r, c)];
            let _ = write!(s, "[{}, {}]", fmt_f64(z.re), fmt_f64(z.im));
        }
        s.push(']');
    }
    s.push(']');
    s
}

/// Render a product basis as canonical JSON: each local unitary row k is
/// the bra of basis vector k.
pub fn basis_to_json(basis: &ProductBasis) -> String {
    let mut s = String::from("{\"locals\": [");
    for (i, u) in basis.locals().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&matrix_to_json(u));
    }
    s.push_str("]}\n");
    s
}

fn matrix_from_json(v: &serde_json::Value) -> Result<CMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::BadStateFile("matrix must be an array of rows".into()))?;
    let n = rows.len();
    let mut m = CMatrix::zeros(n, n);
    for (r, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|x| x.len() == n)
            .ok_or_else(|| Error::BadStateFile(format!("row {r} must have {n} entries")))?;
        for (c, cell) in row.iter().enumerate() {
            let pair = cell
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::BadStateFile("matrix entries must be [re, im]".into()))?;
            let (re, im) = (pair[0].as_f64(), pair[1].as_f64());
            match (re, im) {
                (Some(re), Some(im)) => m[(r, c)] = Complex64::new(re, im),
                _ => return Err(Error::BadStateFile("non-numeric matrix entry".into())),
            }
        }
    }
    Ok(m)
}

/// Parse a product basis, validating unitarity of every local.
pub fn basis_from_json(text: &str) -> Result<ProductBasis> {
    let v: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::BadStateFile(format!("invalid JSON: {e}")))?;
    let locals = v
        .get("locals")
        .and_then(|l| l.as_array())
        .ok_or_else(|| Error::BadStateFile("missing \"locals\" array".into()))?
        .iter()
        .map(matrix_from_json)
        .collect::<Result<Vec<CMatrix>>>()?;
    ProductBasis::new(locals)
}

pub fn read_basis(path: &Path) -> Result<ProductBasis> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::BadStateFile(format!("{}: {e}", path.display())))?;
    basis_from_json(&text)
}

/// Hex SHA-256 digest of a file, as recorded in run manifests.
pub fn file_digest(path: &Path) -> std::io::Result<String> {
    let bytes = fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_lowrank_thm3, RngStream};

    #[test]
    fn round_trip_is_byte_exact() {
        let mut rng = RngStream::new(50, 0).rng();
        let rho = random_lowrank_thm3(2, 2, &mut rng).unwrap();
        let json = state_to_json(&rho);
        let back = state_from_json(&json).unwrap();
        assert_eq!(state_to_json(&back), json);
        assert_eq!(back.dims(), rho.dims());
    }

    #[test]
    fn reader_names_violated_invariant() {
        let bad = r#"{"dims": [2], "matrix": [[[0.45, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.45, 0.0]]]}"#;
        assert!(matches!(
            state_from_json(bad),
            Err(Error::TraceNotOne { .. })
        ));
        let garbage = "{\"dims\": [2]}";
        assert!(matches!(
            state_from_json(garbage),
            Err(Error::BadStateFile(_))
        ));
    }
}
