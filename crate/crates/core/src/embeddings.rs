//! Word vectors in word2vec text format, queried for cosine similarity.
//!
//! The store is a flat token-to-vector map. Lookups that miss report an
//! out-of-vocabulary error instead of inventing a similarity; what to do
//! about a missing word is a pipeline policy, not something to decide here.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Immutable token → vector map with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    declared_vocab: usize,
}

impl EmbeddingStore {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored words.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Vocabulary size claimed by the file header. May disagree with
    /// [`EmbeddingStore::len`]; loading tolerates the mismatch and callers
    /// that care can warn.
    pub fn declared_vocab(&self) -> usize {
        self.declared_vocab
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Stored words and their vectors, in no particular order.
    pub fn words(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(w, v)| (w.as_str(), v.as_slice()))
    }

    /// Build a store from in-memory vectors, checking every vector against
    /// the declared dimension.
    pub fn from_vectors<I, S>(dim: usize, entries: I) -> Result<EmbeddingStore>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(Error::InvalidParameter("embedding dimension must be positive".into()));
        }
        let mut vectors = HashMap::new();
        for (word, vec) in entries {
            let word = word.into();
            if vec.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "vector for {:?} has {} components, expected {}",
                    word,
                    vec.len(),
                    dim
                )));
            }
            vectors.entry(word).or_insert(vec);
        }
        let declared_vocab = vectors.len();
        Ok(EmbeddingStore {
            dim,
            vectors,
            declared_vocab,
        })
    }

    /// Cosine similarity between two stored words.
    ///
    /// Either word missing is an out-of-vocabulary error naming the first
    /// missing word; a zero-length vector is a degenerate-vector error.
    pub fn cosine(&self, w1: &str, w2: &str) -> Result<f64> {
        let v1 = self
            .vectors
            .get(w1)
            .ok_or_else(|| Error::OutOfVocabulary(w1.to_string()))?;
        let v2 = self
            .vectors
            .get(w2)
            .ok_or_else(|| Error::OutOfVocabulary(w2.to_string()))?;
        let dot: f64 = v1.iter().zip(v2).map(|(a, b)| a * b).sum();
        let n1 = v1.iter().map(|a| a * a).sum::<f64>().sqrt();
        let n2 = v2.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n1 == 0.0 {
            return Err(Error::DegenerateVector(w1.to_string()));
        }
        if n2 == 0.0 {
            return Err(Error::DegenerateVector(w2.to_string()));
        }
        Ok(dot / (n1 * n2))
    }

    /// Write as word2vec text: `<vocab> <dim>` header, then one word per
    /// row. Words are sorted; floats use the shortest round-tripping form.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut words: Vec<&String> = self.vectors.keys().collect();
        words.sort_unstable();
        let mut out = format!("{} {}\n", self.vectors.len(), self.dim);
        for word in words {
            out.push_str(word);
            for component in &self.vectors[word] {
                write!(out, " {}", component).expect("string write");
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Load word2vec-format text: header `<vocab_size> <dim>`, then
/// `<word> <v1> ... <v_dim>` rows. Duplicate words keep their first row;
/// a header vocab count that disagrees with the actual row count is
/// preserved for the caller to inspect rather than treated as an error.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = content.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty embeddings file"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let (declared_vocab, dim) = match parts.as_slice() {
        [vocab, dim] => {
            let vocab: usize = vocab
                .parse()
                .map_err(|_| Error::parse(path, 1, format!("bad vocab size {:?}", vocab)))?;
            let dim: usize = dim
                .parse()
                .map_err(|_| Error::parse(path, 1, format!("bad dimension {:?}", dim)))?;
            (vocab, dim)
        }
        _ => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header \"<vocab> <dim>\", got {:?}", header),
            ))
        }
    };
    if dim == 0 {
        return Err(Error::parse(path, 1, "dimension must be positive"));
    }

    let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().expect("non-empty line has a first field");
        let components: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(path, line_no, format!("bad component {:?}", f)))
            })
            .collect::<Result<_>>()?;
        if components.len() != dim {
            return Err(Error::parse(
                path,
                line_no,
                format!("{} components, expected {}", components.len(), dim),
            ));
        }
        vectors.entry(word.to_string()).or_insert(components);
    }

    Ok(EmbeddingStore {
        dim,
        vectors,
        declared_vocab,
    })
}
