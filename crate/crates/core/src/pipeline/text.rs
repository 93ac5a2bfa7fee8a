//! Tokenization and chunked featurization.

use super::vectors::Embeddings;

/// Number of chunk features per example, matching the sequence length the
/// encrypted circuits run at.
pub const CHUNK_COUNT: usize = 4;

/// Lowercases and splits on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Contiguous near-even partition of `n` items into `chunks` spans; earlier
/// spans take the remainder.
fn chunk_spans(n: usize, chunks: usize) -> Vec<(usize, usize)> {
    let base = n / chunks;
    let rem = n % chunks;
    let mut spans = Vec::with_capacity(chunks);
    let mut start = 0;
    for i in 0..chunks {
        let len = base + usize::from(i < rem);
        spans.push((start, start + len));
        start += len;
    }
    spans
}

/// Turns a text into `chunks` feature vectors: tokens are split into
/// contiguous groups and each group's feature is the mean of its known
/// token embeddings. Unknown tokens are skipped; a chunk with no known
/// tokens is the zero vector.
pub fn featurize(text: &str, emb: &Embeddings, chunks: usize) -> Vec<Vec<f64>> {
    let tokens = tokenize(text);
    let dim = emb.dimension();
    chunk_spans(tokens.len(), chunks)
        .into_iter()
        .map(|(start, end)| {
            let mut acc = vec![0.0; dim];
            let mut found = 0usize;
            for token in &tokens[start..end] {
                if let Some(v) = emb.lookup(token) {
                    for (a, x) in acc.iter_mut().zip(&v) {
                        *a += x;
                    }
                    found += 1;
                }
            }
            if found > 0 {
                let inv = 1.0 / found as f64;
                for a in &mut acc {
                    *a *= inv;
                }
            }
            acc
        })
        .collect()
}
