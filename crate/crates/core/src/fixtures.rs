//! Seeded synthetic test data.
//!
//! Generates a self-contained bundle: a dictionary of three-token
//! entities, documents containing planted spelling variants, lexical
//! collisions, typos, trailing-period artifacts, and exact mentions, a
//! corpus to train the language model on, and an embedding store whose
//! cosine similarities separate variant pairs (high) from collision
//! pairs (low). Labels carry the extractor's own scores, so the bundle
//! exercises the whole pipeline end to end with known ground truth.

use std::collections::HashMap;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dictionary::Dictionary;
use crate::embeddings::EmbeddingStore;
use crate::error::Result;
use crate::eval::{write_labeled_records, Label, LabeledRecord};
use crate::matcher::{extract, ExtractConfig, MatchRecord};
use crate::tokenizer::{tokenize, TokenizerConfig};

/// What a planted pair is testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// The document spells the entity's distinguishing word differently;
    /// both spellings are real. Label Y.
    Variant,
    /// The document contains a different real word one edit away from
    /// the entity's. Label N.
    Collision,
    /// The document garbles the entity's word into a non-word. Label Y.
    Typo,
    /// The document mention ends a sentence, picking up a period. Label Y.
    Period,
    /// The document quotes the entity verbatim. Label Y.
    Exact,
}

/// A generated data bundle. `labels` and `kinds` run in parallel.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub dictionary_lines: Vec<String>,
    pub corpus_lines: Vec<String>,
    pub documents: Vec<String>,
    pub embeddings: EmbeddingStore,
    pub labels: Vec<LabeledRecord>,
    pub kinds: Vec<PairKind>,
    /// (document spelling, entity spelling) per variant family.
    pub variant_word_pairs: Vec<(String, String)>,
    /// (document word, entity word) per collision family.
    pub collision_word_pairs: Vec<(String, String)>,
}

/// Context words; each appears in exactly two entities, so the final
/// word of every entity is its rarest and anchors candidate generation.
const CONTEXT_POOL: [&str; 18] = [
    "ancient", "border", "crystal", "downtown", "evening", "fortress", "garden", "harvest",
    "island", "journal", "kitchen", "lantern", "meadow", "northern", "orchard", "pavilion",
    "pioneer", "ribbon",
];

/// (document spelling, entity spelling): same word, two real spellings,
/// one character edit apart.
const VARIANTS: [(&str, &str); 8] = [
    ("honor", "honour"),
    ("color", "colour"),
    ("flavor", "flavour"),
    ("armor", "armour"),
    ("labor", "labour"),
    ("harbor", "harbour"),
    ("neighbor", "neighbour"),
    ("favorite", "favourite"),
];

/// (document word, entity word): different words, one character edit
/// apart, both in ordinary use.
const COLLISIONS: [(&str, &str); 10] = [
    ("premise", "promise"),
    ("affect", "effect"),
    ("mourning", "morning"),
    ("lesson", "lessen"),
    ("bitter", "better"),
    ("resent", "recent"),
    ("desert", "dessert"),
    ("latter", "letter"),
    ("canvas", "canvass"),
    ("stationary", "stationery"),
];

/// Sentence frames the planted phrase is dropped into.
const TEMPLATES: [(&str, &str); 4] = [
    ("", " was mentioned in the report"),
    ("records describe the ", " at length"),
    ("the committee discussed ", " yesterday"),
    ("notes on ", " appeared twice"),
];

/// Frame for sentence-final mentions; the period attaches to the phrase.
const PERIOD_TEMPLATE: (&str, &str) = ("the report closed with ", ".");

/// Vocabulary for corpus padding lines.
const FILLER_WORDS: [&str; 12] = [
    "archives", "several", "volumes", "printed", "during", "seasons", "readers", "found",
    "copies", "bound", "together", "indexed",
];

const EMBEDDING_DIM: usize = 16;
const VARIANT_COSINE_RANGE: (f64, f64) = (0.80, 0.90);
const COLLISION_COSINE_RANGE: (f64, f64) = (0.10, 0.20);

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// A unit vector whose cosine against unit vector `base` is `cosine`,
/// built by mixing `base` with a random orthogonal direction.
fn paired_vector(rng: &mut ChaCha8Rng, base: &[f64], cosine: f64) -> Vec<f64> {
    loop {
        let raw = random_unit(rng, base.len());
        let dot: f64 = raw.iter().zip(base).map(|(a, b)| a * b).sum();
        let mut ortho: Vec<f64> = raw.iter().zip(base).map(|(a, b)| a - dot * b).collect();
        let norm = ortho.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        for x in &mut ortho {
            *x /= norm;
        }
        let residue = (1.0 - cosine * cosine).sqrt();
        return base
            .iter()
            .zip(&ortho)
            .map(|(b, o)| cosine * b + residue * o)
            .collect();
    }
}

/// Misspell one interior character with a letter no fixture word uses,
/// so the result is a non-word the corpus has never seen.
fn corrupt(word: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    let idx = rng.gen_range(1..chars.len() - 1);
    for candidate in ['q', 'x', 'z', 'j'] {
        if chars[idx] != candidate {
            chars[idx] = candidate;
            break;
        }
    }
    chars.into_iter().collect()
}

/// Generate the bundle for a seed. The same seed always produces
/// byte-identical data.
pub fn generate(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tokenizer = TokenizerConfig::default();

    struct Family {
        c1: &'static str,
        c2: &'static str,
        doc_form: &'static str,
        ent_form: &'static str,
        is_variant: bool,
    }
    let families: Vec<Family> = VARIANTS
        .iter()
        .chain(&COLLISIONS)
        .enumerate()
        .map(|(i, &(doc_form, ent_form))| Family {
            c1: CONTEXT_POOL[i],
            c2: CONTEXT_POOL[(i + 1) % CONTEXT_POOL.len()],
            doc_form,
            ent_form,
            is_variant: i < VARIANTS.len(),
        })
        .collect();

    let dictionary_lines: Vec<String> = families
        .iter()
        .map(|f| format!("{} {} {}", f.c1, f.c2, f.ent_form))
        .collect();

    // The corpus holds both spellings of every family in the entity's
    // context, so variant and collision divergences read as plausible
    // language while typos stay unseen.
    let mut corpus_lines = Vec::new();
    for f in &families {
        corpus_lines.push(format!("{} {} {}", f.c1, f.c2, f.ent_form));
        corpus_lines.push(format!("{} {} {}", f.c1, f.c2, f.doc_form));
    }
    for _ in 0..24 {
        let n = rng.gen_range(3..=8);
        let words: Vec<&str> = (0..n)
            .map(|_| *FILLER_WORDS.choose(&mut rng).unwrap())
            .collect();
        corpus_lines.push(words.join(" "));
    }

    let mut documents = Vec::new();
    // (substring, entity text, label, kind)
    let mut planted: Vec<(String, String, Label, PairKind)> = Vec::new();
    let plant = |documents: &mut Vec<String>,
                     planted: &mut Vec<(String, String, Label, PairKind)>,
                     rng: &mut ChaCha8Rng,
                     phrase: &str,
                     entity_text: &str,
                     label: Label,
                     kind: PairKind| {
        let (pre, post) = if kind == PairKind::Period {
            PERIOD_TEMPLATE
        } else {
            *TEMPLATES.choose(rng).unwrap()
        };
        documents.push(format!("{}{}{}", pre, phrase, post));
        let substring = if kind == PairKind::Period {
            format!("{}.", phrase)
        } else {
            phrase.to_string()
        };
        planted.push((substring, entity_text.to_string(), label, kind));
    };

    for (f, entity_text) in families.iter().zip(&dictionary_lines) {
        let context = format!("{} {}", f.c1, f.c2);
        if f.is_variant {
            let variant = format!("{} {}", context, f.doc_form);
            plant(
                &mut documents,
                &mut planted,
                &mut rng,
                &variant,
                entity_text,
                Label::Y,
                PairKind::Variant,
            );
            let typo = format!("{} {}", context, corrupt(f.ent_form, &mut rng));
            plant(
                &mut documents,
                &mut planted,
                &mut rng,
                &typo,
                entity_text,
                Label::Y,
                PairKind::Typo,
            );
            plant(
                &mut documents,
                &mut planted,
                &mut rng,
                entity_text,
                entity_text,
                Label::Y,
                PairKind::Period,
            );
            plant(
                &mut documents,
                &mut planted,
                &mut rng,
                entity_text,
                entity_text,
                Label::Y,
                PairKind::Exact,
            );
        } else {
            let collision = format!("{} {}", context, f.doc_form);
            plant(
                &mut documents,
                &mut planted,
                &mut rng,
                &collision,
                entity_text,
                Label::N,
                PairKind::Collision,
            );
        }
    }

    // Embeddings: each family's two words get an engineered cosine;
    // every other fixture word gets an arbitrary direction.
    let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
    let mut variant_word_pairs = Vec::new();
    let mut collision_word_pairs = Vec::new();
    for f in &families {
        let (lo, hi) = if f.is_variant {
            VARIANT_COSINE_RANGE
        } else {
            COLLISION_COSINE_RANGE
        };
        let target = rng.gen_range(lo..hi);
        let base = random_unit(&mut rng, EMBEDDING_DIM);
        let paired = paired_vector(&mut rng, &base, target);
        entries.push((f.ent_form.to_string(), base));
        entries.push((f.doc_form.to_string(), paired));
        let pair = (f.doc_form.to_string(), f.ent_form.to_string());
        if f.is_variant {
            variant_word_pairs.push(pair);
        } else {
            collision_word_pairs.push(pair);
        }
    }
    for word in CONTEXT_POOL.iter().chain(&FILLER_WORDS) {
        let v = random_unit(&mut rng, EMBEDDING_DIM);
        entries.push((word.to_string(), v));
    }
    let embeddings = EmbeddingStore::from_vectors(EMBEDDING_DIM, entries)
        .expect("fixture embeddings are well formed");

    // Score the planted pairs with the extractor itself so labels carry
    // the scores the pipeline will actually produce.
    let dictionary = Dictionary::from_lines(dictionary_lines.iter().map(String::as_str), &tokenizer)
        .expect("fixture dictionary is nonempty");
    let extract_config = ExtractConfig::default();
    let mut scores: HashMap<(String, String), f64> = HashMap::new();
    for (i, doc) in documents.iter().enumerate() {
        let seq = tokenize(doc, &tokenizer);
        for pair in extract(&(i + 1).to_string(), &seq, &dictionary, &extract_config) {
            let entity_text = &dictionary.entities[pair.entity_id].text;
            let record = MatchRecord::from_pair(&pair, entity_text);
            scores.insert((record.substring, record.entity_text), record.score_2ed);
        }
    }

    let mut labels = Vec::new();
    let mut kinds = Vec::new();
    for (substring, entity_text, label, kind) in planted {
        let key = (substring.clone(), entity_text.clone());
        let score = *scores
            .get(&key)
            .expect("every planted pair is extracted from its document");
        labels.push(LabeledRecord {
            substring,
            entity_text,
            score,
            label,
        });
        kinds.push(kind);
    }

    Fixture {
        dictionary_lines,
        corpus_lines,
        documents,
        embeddings,
        labels,
        kinds,
        variant_word_pairs,
        collision_word_pairs,
    }
}

impl Fixture {
    /// Write the bundle under `dir` as the pipeline's file formats:
    /// dictionary.txt, corpus.txt, documents.txt, embeddings.txt,
    /// labels.tsv.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        let write_lines = |name: &str, lines: &[String]| -> Result<()> {
            let mut out = String::new();
            for line in lines {
                out.push_str(line);
                out.push('\n');
            }
            let path = dir.join(name);
            std::fs::write(&path, out).map_err(|e| crate::error::Error::io(&path, e))
        };
        write_lines("dictionary.txt", &self.dictionary_lines)?;
        write_lines("corpus.txt", &self.corpus_lines)?;
        write_lines("documents.txt", &self.documents)?;
        self.embeddings.save(&dir.join("embeddings.txt"))?;
        write_labeled_records(&dir.join("labels.tsv"), &self.labels)
    }
}
