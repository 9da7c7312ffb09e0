//! Synthetic verification corpora.
//!
//! Every author is a first-order Markov source over a small alphabet of
//! function tokens and placeholders. A shared base transition table is
//! mixed with an author-specific table, `divergence` being the weight of the
//! author's own part. Candidate authors get Y problems (unknown text by the
//! same source) and N problems (unknown text by a dedicated foil source);
//! reference documents come from further, held-out sources.

use std::ops::RangeInclusive;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::corpus::{Corpus, Document, DocumentSource, Label, Partition, Sentence, VerificationProblem};
use crate::error::{Error, Result};

/// The 29 non-terminal symbols; `.` closes every sentence.
const ALPHABET: [&str; 29] = [
    "the", "of", "and", "to", "a", "in", "that", "it", "is", "was", "he", "she", "for", "on",
    "with", "as", "but", "not", "they", "this", "N", "V", "J", "B", "P", "#", ",", "which", "be",
];
const STOP: &str = ".";
const STOP_WEIGHT: f64 = 0.08;
const MAX_SENTENCE: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthOptions {
    pub seed: u64,
    pub authors: usize,
    pub problems_per_author: usize,
    pub divergence: f64,
    pub known_docs: usize,
    pub sentences_per_doc: RangeInclusive<usize>,
    pub reference_authors: usize,
    pub reference_docs_per_author: usize,
    /// Prefix for every symbol, e.g. `"x:"`; distinct prefixes give corpora
    /// with disjoint alphabets.
    pub alphabet_tag: String,
}

impl SynthOptions {
    pub fn new(seed: u64, authors: usize, problems_per_author: usize, divergence: f64) -> Self {
        Self {
            seed,
            authors,
            problems_per_author,
            divergence,
            known_docs: 3,
            sentences_per_doc: 6..=12,
            reference_authors: 40,
            reference_docs_per_author: 3,
            alphabet_tag: String::new(),
        }
    }

    pub fn with_alphabet_tag(mut self, tag: impl Into<String>) -> Self {
        self.alphabet_tag = tag.into();
        self
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.divergence) {
            return Err(Error::Argument(format!(
                "divergence must lie in [0, 1], got {}",
                self.divergence
            )));
        }
        if self.authors == 0 || self.problems_per_author == 0 {
            return Err(Error::Argument("authors and problems per author must be at least 1".into()));
        }
        if self.known_docs == 0 || self.reference_authors == 0 || self.reference_docs_per_author == 0 {
            return Err(Error::Argument("document counts must be at least 1".into()));
        }
        if self.sentences_per_doc.is_empty() || *self.sentences_per_doc.start() == 0 {
            return Err(Error::Argument("sentences per document must be a non-empty range above 0".into()));
        }
        Ok(())
    }
}

/// Row-stochastic table: row 0 is the sentence start, row `i + 1` follows
/// symbol `i`; columns are the symbols then the stop symbol.
type Table = Vec<Vec<f64>>;

fn random_table(rng: &mut ChaCha8Rng) -> Table {
    let gamma = Gamma::new(0.3, 1.0).expect("valid shape");
    (0..=ALPHABET.len())
        .map(|_| {
            let mut row: Vec<f64> = (0..ALPHABET.len()).map(|_| gamma.sample(rng) + 1e-6).collect();
            let sum: f64 = row.iter().sum();
            for w in &mut row {
                *w *= (1.0 - STOP_WEIGHT) / sum;
            }
            row.push(STOP_WEIGHT);
            row
        })
        .collect()
}

struct Source {
    rows: Vec<WeightedIndex<f64>>,
}

impl Source {
    fn mixed(base: &Table, own: &Table, divergence: f64) -> Self {
        let rows = base
            .iter()
            .zip(own)
            .map(|(b, o)| {
                let row: Vec<f64> = b
                    .iter()
                    .zip(o)
                    .map(|(x, y)| (1.0 - divergence) * x + divergence * y)
                    .collect();
                WeightedIndex::new(row).expect("positive weights")
            })
            .collect();
        Self { rows }
    }

    fn sentence(&self, rng: &mut ChaCha8Rng, symbols: &[String]) -> Sentence {
        let mut out = Vec::new();
        let mut state = 0;
        // Start row never emits the stop symbol directly.
        loop {
            let next = self.rows[state].sample(rng);
            if next == ALPHABET.len() {
                if out.is_empty() {
                    continue;
                }
                break;
            }
            out.push(symbols[next].clone());
            if out.len() >= MAX_SENTENCE {
                break;
            }
            state = next + 1;
        }
        out.push(symbols[ALPHABET.len()].clone());
        Sentence::new(out).expect("non-empty sentence")
    }

    fn document(
        &self,
        rng: &mut ChaCha8Rng,
        id: String,
        symbols: &[String],
        sentences: &RangeInclusive<usize>,
    ) -> DocumentSource {
        let n = rng.random_range(sentences.clone());
        let sents = (0..n).map(|_| self.sentence(rng, symbols)).collect();
        DocumentSource::Masked(Document::new(id, sents).expect("non-empty document"))
    }
}

pub fn synth_corpus(seed: u64, authors: usize, problems_per_author: usize, divergence: f64) -> Result<Corpus> {
    synth_corpus_with(&SynthOptions::new(seed, authors, problems_per_author, divergence))
}

pub fn synth_corpus_with(opts: &SynthOptions) -> Result<Corpus> {
    opts.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let symbols: Vec<String> = ALPHABET
        .iter()
        .chain(std::iter::once(&STOP))
        .map(|s| format!("{}{s}", opts.alphabet_tag))
        .collect();
    let base = random_table(&mut rng);
    let source = |rng: &mut ChaCha8Rng| Source::mixed(&base, &random_table(rng), opts.divergence);
    let candidates: Vec<(Source, Source)> = (0..opts.authors)
        .map(|_| (source(&mut rng), source(&mut rng)))
        .collect();
    let population: Vec<Source> = (0..opts.reference_authors).map(|_| source(&mut rng)).collect();
    let tag = &opts.alphabet_tag;
    let range = &opts.sentences_per_doc;

    let mut problems = Vec::with_capacity(opts.authors * opts.problems_per_author);
    for (k, (author, foil)) in candidates.iter().enumerate() {
        for j in 0..opts.problems_per_author {
            let g = problems.len();
            let label = if g % 2 == 0 { Label::Y } else { Label::N };
            let known = (0..opts.known_docs)
                .map(|d| author.document(&mut rng, format!("{tag}a{k}-p{j}-k{d}"), &symbols, range))
                .collect();
            let writer = if label == Label::Y { author } else { foil };
            let unknown = writer.document(&mut rng, format!("{tag}a{k}-p{j}-u"), &symbols, range);
            problems.push(VerificationProblem {
                id: format!("{tag}p{g:04}"),
                author: Some(format!("{tag}a{k}")),
                unknown: vec![unknown],
                known,
                label: Some(label),
            });
        }
    }
    let mut reference = Vec::new();
    for (m, src) in population.iter().enumerate() {
        for d in 0..opts.reference_docs_per_author {
            reference.push(src.document(&mut rng, format!("{tag}r{m}-d{d}"), &symbols, range));
        }
    }
    Corpus::new(problems, reference, Partition::Test)
}

/// Split problems into author-disjoint train and test corpora. The first
/// `round(fraction × authors)` authors, in order of first appearance, go to
/// train. Both halves keep the full reference population.
pub fn split_by_author(corpus: &Corpus, train_fraction: f64) -> Result<(Corpus, Corpus)> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::Argument(format!("train fraction {train_fraction} outside [0, 1]")));
    }
    let mut authors: Vec<&str> = Vec::new();
    for p in &corpus.problems {
        let a = p.author.as_deref().unwrap_or(&p.id);
        if !authors.contains(&a) {
            authors.push(a);
        }
    }
    let cut = (train_fraction * authors.len() as f64).round() as usize;
    let train_authors = &authors[..cut];
    let (train, test): (Vec<_>, Vec<_>) = corpus
        .problems
        .iter()
        .cloned()
        .partition(|p| train_authors.contains(&p.author.as_deref().unwrap_or(&p.id)));
    Ok((
        Corpus::new(train, corpus.reference_docs.clone(), Partition::Train)?,
        Corpus::new(test, corpus.reference_docs.clone(), Partition::Test)?,
    ))
}
