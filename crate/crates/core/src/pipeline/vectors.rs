//! Embedding sources: word-vector files and seeded hashed substitutes.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::PipelineError;

/// Dimension of the hashed pseudo-embeddings.
pub const HASHED_DIM: usize = 64;

/// Frozen token-to-vector table.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
    warnings: Vec<String>,
}

impl VectorTable {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    /// Non-fatal observations from loading: duplicate tokens, header count
    /// disagreeing with the actual row count.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Loads a word-vector text file: a `count dim` header line, then one
/// `token v1 .. vdim` line per entry. Duplicate tokens keep the last
/// occurrence and record a warning.
pub fn load_vectors(path: &Path) -> Result<VectorTable, PipelineError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(PipelineError::Parse {
        line: 1,
        message: "empty file, expected 'count dim' header".into(),
    })?;
    let mut parts = header.split_whitespace();
    let (count, dimension) = match (parts.next(), parts.next(), parts.next()) {
        (Some(c), Some(d), None) => {
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| PipelineError::Parse {
                    line: 1,
                    message: format!("bad header field '{s}', expected 'count dim'"),
                })
            };
            (parse(c)?, parse(d)?)
        }
        _ => {
            return Err(PipelineError::Parse {
                line: 1,
                message: format!("bad header '{header}', expected 'count dim'"),
            })
        }
    };
    if dimension == 0 {
        return Err(PipelineError::Parse {
            line: 1,
            message: "vector dimension must be positive".into(),
        });
    }

    let mut entries: HashMap<String, Vec<f64>> = HashMap::new();
    let mut warnings = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let mut fields = line.split_whitespace();
        let token = fields.next().ok_or(PipelineError::Parse {
            line: line_no,
            message: "empty vector line".into(),
        })?;
        let mut values = Vec::with_capacity(dimension);
        for field in fields {
            values.push(field.parse::<f64>().map_err(|_| PipelineError::Parse {
                line: line_no,
                message: format!("bad vector value '{field}'"),
            })?);
        }
        if values.len() != dimension {
            return Err(PipelineError::DimensionMismatch {
                line: line_no,
                expected: dimension,
                got: values.len(),
            });
        }
        if entries.insert(token.to_string(), values).is_some() {
            warnings.push(format!(
                "line {line_no}: duplicate token '{token}' replaces the earlier entry"
            ));
        }
    }
    if entries.len() != count {
        warnings.push(format!(
            "header declares {count} entries but the file holds {}",
            entries.len()
        ));
    }
    Ok(VectorTable {
        dimension,
        entries,
        warnings,
    })
}

/// Where token vectors come from: a loaded table (out-of-vocabulary tokens
/// miss) or seeded hashed pseudo-embeddings (every token resolves).
#[derive(Debug, Clone)]
pub enum Embeddings {
    Table(VectorTable),
    Hashed { seed: u64, dim: usize },
}

impl Embeddings {
    pub fn hashed(seed: u64) -> Self {
        Embeddings::Hashed {
            seed,
            dim: HASHED_DIM,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Embeddings::Table(t) => t.dimension(),
            Embeddings::Hashed { dim, .. } => *dim,
        }
    }

    pub fn lookup(&self, token: &str) -> Option<Vec<f64>> {
        match self {
            Embeddings::Table(t) => t.get(token).map(<[f64]>::to_vec),
            Embeddings::Hashed { seed, dim } => Some(hashed_vector(token, *seed, *dim)),
        }
    }
}

fn fnv1a(token: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in token.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn hashed_vector(token: &str, seed: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(fnv1a(token) ^ seed);
    let scale = 1.0 / (dim as f64).sqrt();
    (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_a_small_table() {
        let f = write_file("2 3\ngood 0.1 0.2 0.3\nbad -0.1 -0.2 -0.3\n");
        let table = load_vectors(f.path()).unwrap();
        assert_eq!(table.dimension(), 3);
        assert_eq!(table.len(), 2);
        assert_eq!(table.get("good"), Some(&[0.1, 0.2, 0.3][..]));
        assert!(table.get("missing").is_none());
        assert!(table.warnings().is_empty());
    }

    #[test]
    fn short_row_is_a_dimension_mismatch_with_its_line() {
        let f = write_file("2 3\ngood 0.1 0.2 0.3\nbad -0.1 -0.2\n");
        match load_vectors(f.path()) {
            Err(PipelineError::DimensionMismatch {
                line,
                expected,
                got,
            }) => {
                assert_eq!((line, expected, got), (3, 3, 2));
            }
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_token_keeps_the_last_entry_and_warns() {
        let f = write_file("2 2\nthe 1.0 2.0\nthe 3.0 4.0\n");
        let table = load_vectors(f.path()).unwrap();
        assert_eq!(table.get("the"), Some(&[3.0, 4.0][..]));
        assert_eq!(table.warnings().len(), 2);
        assert!(table.warnings()[0].contains("duplicate token 'the'"));
    }

    #[test]
    fn malformed_header_and_values_report_line_numbers() {
        let f = write_file("not a header\n");
        match load_vectors(f.path()) {
            Err(PipelineError::Parse { line: 1, .. }) => {}
            other => panic!("expected header parse error, got {other:?}"),
        }
        let f = write_file("1 2\ntok 0.5 oops\n");
        match load_vectors(f.path()) {
            Err(PipelineError::Parse { line: 2, .. }) => {}
            other => panic!("expected value parse error, got {other:?}"),
        }
    }

    #[test]
    fn hashed_embeddings_are_deterministic_and_unit_scaled() {
        let emb = Embeddings::hashed(7);
        let a = emb.lookup("movie").unwrap();
        let b = emb.lookup("movie").unwrap();
        let c = emb.lookup("film").unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), HASHED_DIM);
        let norm2: f64 = a.iter().map(|v| v * v).sum();
        assert!(norm2 > 0.2 && norm2 < 5.0, "norm^2 = {norm2}");

        let other_seed = Embeddings::hashed(8).lookup("movie").unwrap();
        assert_ne!(a, other_seed);
    }
}
