//! Tensor files and transform JSON.
//!
//! Text tensors: first line `m n p`, then `m·n·p` whitespace-separated values
//! in `i`-outer, `j`-middle, `k`-inner order (written one tube per line).
//! Binary tensors: `TUBL`, then `m`, `n`, `p` as little-endian `u32`, then
//! the same values as little-endian `f64`.
//!
//! Transforms: `{"p": int, "re": [[...]], "im": [[...]]}`, row-major.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TubalError};
use crate::linalg::{CMat, TubalMatrix};
use crate::transform::Transform;

pub const MAGIC: &[u8; 4] = b"TUBL";
const HEADER_LEN: usize = 16;

pub fn to_text(a: &TubalMatrix) -> String {
    let (m, n, p) = a.shape();
    let mut out = format!("{m} {n} {p}\n");
    for i in 0..m {
        for j in 0..n {
            let line: Vec<String> = a.tube(i, j).iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

pub fn parse_text(s: &str) -> Result<TubalMatrix> {
    let mut lines = s.lines();
    let header = lines.next().ok_or_else(|| TubalError::Parse("empty tensor file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| TubalError::Parse(format!("bad dimension {t:?}"))))
        .collect::<Result<_>>()?;
    let [m, n, p] = dims[..] else {
        return Err(TubalError::Parse(format!("header needs 3 dimensions, got {}", dims.len())));
    };
    let data: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse().map_err(|_| TubalError::Parse(format!("bad value {t:?}"))))
        .collect::<Result<_>>()?;
    let expected = m.checked_mul(n).and_then(|x| x.checked_mul(p)).ok_or_else(|| TubalError::Parse("dimensions overflow".into()))?;
    if data.len() != expected {
        return Err(TubalError::Parse(format!("expected {expected} values, found {}", data.len())));
    }
    TubalMatrix::from_data(m, n, p, data).map_err(|e| TubalError::Parse(e.to_string()))
}

pub fn to_binary(a: &TubalMatrix) -> Vec<u8> {
    let (m, n, p) = a.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * a.data().len());
    out.extend_from_slice(MAGIC);
    for d in [m, n, p] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for x in a.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn parse_binary(bytes: &[u8]) -> Result<TubalMatrix> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(TubalError::Parse("missing TUBL header".into()));
    }
    let dim = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let (m, n, p) = (dim(4), dim(8), dim(12));
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 8 * m * n * p {
        return Err(TubalError::Parse(format!("expected {} payload bytes, found {}", 8 * m * n * p, payload.len())));
    }
    let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    TubalMatrix::from_data(m, n, p, data).map_err(|e| TubalError::Parse(e.to_string()))
}

/// Reads either format, detected by the magic bytes.
pub fn read_tensor(path: impl AsRef<Path>) -> Result<TubalMatrix> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        parse_binary(&bytes)
    } else {
        let s = String::from_utf8(bytes).map_err(|_| TubalError::Parse("tensor file is not UTF-8".into()))?;
        parse_text(&s)
    }
}

/// Writes binary for a `.tubl` extension, text otherwise.
pub fn write_tensor(path: impl AsRef<Path>, a: &TubalMatrix) -> Result<()> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "tubl") {
        std::fs::write(path, to_binary(a))?;
    } else {
        std::fs::write(path, to_text(a))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformFile {
    pub p: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TransformFile {
    pub fn from_transform(l: &Transform) -> Self {
        let mat = l.matrix();
        let p = l.p();
        TransformFile {
            p,
            re: (0..p).map(|i| (0..p).map(|j| mat[(i, j)].re).collect()).collect(),
            im: (0..p).map(|i| (0..p).map(|j| mat[(i, j)].im).collect()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let p = self.p;
        let rows_ok = |rows: &[Vec<f64>]| rows.len() == p && rows.iter().all(|r| r.len() == p);
        if p == 0 || !rows_ok(&self.re) || !rows_ok(&self.im) {
            return Err(TubalError::Parse(format!("transform arrays must be {p}×{p}")));
        }
        Ok(CMat::from_fn(p, p, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }

    pub fn into_transform(self, name: impl Into<String>) -> Result<Transform> {
        Transform::from_matrix(name, self.to_matrix()?)
    }
}

pub fn transform_to_json(l: &Transform) -> String {
    serde_json::to_string_pretty(&TransformFile::from_transform(l)).expect("plain data serializes")
}

pub fn transform_from_json(s: &str, name: impl Into<String>) -> Result<Transform> {
    let file: TransformFile = serde_json::from_str(s)?;
    file.into_transform(name)
}

pub fn read_transform(path: impl AsRef<Path>) -> Result<Transform> {
    let path = path.as_ref();
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "file".into());
    transform_from_json(&std::fs::read_to_string(path)?, name)
}

pub fn write_transform(path: impl AsRef<Path>, l: &Transform) -> Result<()> {
    std::fs::write(path, transform_to_json(l) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> TubalMatrix {
        TubalMatrix::random(3, 2, 4, &mut ChaCha8Rng::seed_from_u64(3))
    }

    #[test]
    fn text_round_trip_is_exact() {
        let a = sample();
        assert_eq!(parse_text(&to_text(&a)).unwrap(), a);
    }

    #[test]
    fn text_layout() {
        let a = TubalMatrix::from_fn(1, 2, 2, |_, j, k| (10 * j + k) as f64);
        assert_eq!(to_text(&a), "1 2 2\n0.0 1.0\n10.0 11.0\n");
        // Any whitespace layout parses.
        assert_eq!(parse_text("1 2 2\n0 1 10\n11").unwrap(), a);
    }

    #[test]
    fn binary_format() {
        let a = TubalMatrix::from_fn(1, 1, 2, |_, _, k| k as f64 + 0.5);
        let bytes = to_binary(&a);
        assert_eq!(&bytes[..4], b"TUBL");
        assert_eq!(&bytes[4..16], &[1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&bytes[16..24], &0.5f64.to_le_bytes());
        assert_eq!(bytes.len(), 32);
        assert_eq!(parse_binary(&bytes).unwrap(), a);
    }

    #[test]
    fn binary_and_text_agree() {
        let a = sample();
        assert_eq!(parse_binary(&to_binary(&a)).unwrap(), parse_text(&to_text(&a)).unwrap());
    }

    #[test]
    fn file_dispatch() {
        let dir = tempfile::tempdir().unwrap();
        let a = sample();
        let text = dir.path().join("a.txt");
        let bin = dir.path().join("a.tubl");
        write_tensor(&text, &a).unwrap();
        write_tensor(&bin, &a).unwrap();
        assert!(std::fs::read(&bin).unwrap().starts_with(MAGIC));
        assert_eq!(read_tensor(&text).unwrap(), a);
        assert_eq!(read_tensor(&bin).unwrap(), a);
    }

    #[test]
    fn malformed_inputs() {
        for bad in ["", "2 2", "1 1 2\n1.0", "1 1 1\nx", "1 1 1\n1 2", "1 1 1\nNaN"] {
            assert!(matches!(parse_text(bad), Err(TubalError::Parse(_))), "{bad:?}");
        }
        assert!(parse_binary(b"TUBL").is_err());
        let mut bytes = to_binary(&sample());
        bytes.pop();
        assert!(parse_binary(&bytes).is_err());
    }

    #[test]
    fn transform_json_round_trip() {
        let l = Transform::unitary_dft(4).unwrap();
        let back = transform_from_json(&transform_to_json(&l), "x").unwrap();
        assert_eq!(back.matrix(), l.matrix());
        assert!(back.is_unitary() && back.is_doubly_real_preserving());
        let v: serde_json::Value = serde_json::from_str(&transform_to_json(&l)).unwrap();
        assert_eq!(v["p"], 4);
        assert_eq!(v["im"][1][0], 0.0);
    }

    #[test]
    fn transform_json_errors() {
        assert!(matches!(transform_from_json("{\"p\":2,\"re\":[[1]],\"im\":[[0]]}", "x"), Err(TubalError::Parse(_))));
        assert!(matches!(transform_from_json("nope", "x"), Err(TubalError::Parse(_))));
        let singular = "{\"p\":2,\"re\":[[1,1],[1,1]],\"im\":[[0,0],[0,0]]}";
        assert!(matches!(transform_from_json(singular, "x"), Err(TubalError::SingularTransform { .. })));
    }
}
