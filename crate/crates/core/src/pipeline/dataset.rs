//! Labeled text splits: TSV ingestion and the synthetic two-pool generator.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::PipelineError;

pub const SYNTHETIC_TRAIN: usize = 200;
pub const SYNTHETIC_VAL: usize = 200;

/// One labeled split: binary labels with their raw texts.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub name: String,
    pub rows: Vec<(u8, String)>,
}

/// Loads a TSV split: one `label<TAB>text` row per line, labels 0 or 1, no
/// header. Blank lines are skipped.
pub fn load_dataset(path: &Path) -> Result<DatasetSplit, PipelineError> {
    let text = fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let (label, body) = line.split_once('\t').ok_or(PipelineError::Parse {
            line: line_no,
            message: "expected 'label<TAB>text'".into(),
        })?;
        let label = match label {
            "0" => 0u8,
            "1" => 1u8,
            other => {
                return Err(PipelineError::Parse {
                    line: line_no,
                    message: format!("label must be 0 or 1, got '{other}'"),
                })
            }
        };
        rows.push((label, body.to_string()));
    }
    if rows.is_empty() {
        return Err(PipelineError::Parse {
            line: 0,
            message: "dataset holds no rows".into(),
        });
    }
    Ok(DatasetSplit { name, rows })
}

fn synthetic_rows(rng: &mut ChaCha20Rng, count: usize) -> Vec<(u8, String)> {
    (0..count)
        .map(|i| {
            let label = (i % 2) as u8;
            let len = rng.random_range(8..=24);
            let tokens: Vec<String> = (0..len)
                .map(|_| {
                    let own_pool = rng.random::<f64>() < 0.85;
                    let positive = (label == 1) == own_pool;
                    let idx = rng.random_range(0..50);
                    if positive {
                        format!("pos{idx:02}")
                    } else {
                        format!("neg{idx:02}")
                    }
                })
                .collect();
            (label, tokens.join(" "))
        })
        .collect()
}

/// Seeded linearly separable corpus: two disjoint 50-token pools, each text
/// drawing 8 to 24 tokens with an 85/15 mix favoring its label's pool.
/// Returns (train, validation) splits of 200 rows each.
pub fn synthetic_dataset(seed: u64) -> (DatasetSplit, DatasetSplit) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let train = DatasetSplit {
        name: "synthetic-train".into(),
        rows: synthetic_rows(&mut rng, SYNTHETIC_TRAIN),
    };
    let val = DatasetSplit {
        name: "synthetic-val".into(),
        rows: synthetic_rows(&mut rng, SYNTHETIC_VAL),
    };
    (train, val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn loads_a_tsv_split() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"1\tgreat stuff\n0\tawful stuff\n\n1\tfine\n")
            .unwrap();
        let split = load_dataset(f.path()).unwrap();
        assert_eq!(split.rows.len(), 3);
        assert_eq!(split.rows[0], (1, "great stuff".to_string()));
        assert_eq!(split.rows[1].0, 0);
    }

    #[test]
    fn bad_labels_and_missing_tabs_name_their_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"1\tok\n2\tbad label\n").unwrap();
        match load_dataset(f.path()) {
            Err(PipelineError::Parse { line: 2, .. }) => {}
            other => panic!("expected line-2 parse error, got {other:?}"),
        }
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"1 no tab here\n").unwrap();
        match load_dataset(f.path()) {
            Err(PipelineError::Parse { line: 1, .. }) => {}
            other => panic!("expected line-1 parse error, got {other:?}"),
        }
    }

    #[test]
    fn synthetic_splits_are_sized_seeded_and_pool_pure() {
        let (train, val) = synthetic_dataset(7);
        assert_eq!(train.rows.len(), SYNTHETIC_TRAIN);
        assert_eq!(val.rows.len(), SYNTHETIC_VAL);
        let (train2, _) = synthetic_dataset(7);
        assert_eq!(train.rows, train2.rows);
        let (other, _) = synthetic_dataset(8);
        assert_ne!(train.rows, other.rows);

        let mut own_tokens = 0usize;
        let mut all_tokens = 0usize;
        for (label, text) in train.rows.iter().chain(&val.rows) {
            assert!(*label == 0 || *label == 1);
            let tokens: Vec<&str> = text.split(' ').collect();
            assert!((8..=24).contains(&tokens.len()));
            assert!(tokens.iter().all(|t| {
                (t.starts_with("pos") || t.starts_with("neg")) && t.len() == 5
            }));
            let own = if *label == 1 { "pos" } else { "neg" };
            own_tokens += tokens.iter().filter(|t| t.starts_with(own)).count();
            all_tokens += tokens.len();
        }
        let own_fraction = own_tokens as f64 / all_tokens as f64;
        assert!(
            (0.8..0.9).contains(&own_fraction),
            "own-pool fraction {own_fraction} strays from the 85/15 mix"
        );
    }
}
