//! Likelihood ratio of grammar models.
//!
//! For a questioned sentence set, every token position `t` in context `c`
//! (the `</s>` event of each sentence included) receives
//!
//! ```text
//! λ(t | c) = (1/r) Σ_i [ log p(t | c; G_A) − log p(t | c; G_i) ]
//! ```
//!
//! where `G_A` is trained on the candidate author's sentences and `G_1..G_r`
//! on random reference samples of the same size. The first term measures how
//! entrenched the token is for the author (similarity); the second how
//! typical it is of the reference population (typicality). Sentence scores
//! are sums over tokens and the document score is the sum over sentences.

use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{DocumentSource, Sentence, VerificationProblem};
use crate::error::{Error, Result};
use crate::masking::{masked, MaskingLexicon};
use crate::ngram::{DiscountSetting, GrammarModel, TokenId, Vocabulary, EOS_SURFACE};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Without replacement inside each set whenever the pool is large
    /// enough, with replacement otherwise.
    #[default]
    WithoutReplacement,
    WithReplacement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaConfig {
    pub order: usize,
    pub refs: usize,
    pub seed: u64,
    pub discounts: DiscountSetting,
    pub sampling: Sampling,
}

impl Default for LambdaConfig {
    fn default() -> Self {
        Self {
            order: 10,
            refs: 100,
            seed: 0,
            discounts: DiscountSetting::default(),
            sampling: Sampling::default(),
        }
    }
}

impl LambdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.order > crate::ngram::MAX_ORDER {
            return Err(Error::Argument(format!("invalid order {}", self.order)));
        }
        if self.refs == 0 {
            return Err(Error::Argument("number of reference models must be at least 1".into()));
        }
        if let DiscountSetting::Fixed(d) = self.discounts {
            d.validate()?;
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenScore {
    pub token: String,
    pub sentence: usize,
    pub position: usize,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaTrace {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    pub token_scores: Vec<TokenScore>,
    pub sentence_scores: Vec<f64>,
    pub total: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<LambdaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl LambdaTrace {
    /// Token scores of one sentence, in order.
    pub fn sentence_tokens(&self, sentence: usize) -> impl Iterator<Item = &TokenScore> {
        self.token_scores
            .iter()
            .filter(move |t| t.sentence == sentence)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable trace")
    }
}

/// Draw `r` sets of `k` items from `pool`, reproducibly from `seed`.
pub fn sample_reference_sets<T>(
    pool: &[T],
    k: usize,
    r: usize,
    seed: u64,
    sampling: Sampling,
) -> Result<Vec<Vec<&T>>> {
    if k == 0 {
        return Err(Error::Argument("sample size must be at least 1".into()));
    }
    if pool.is_empty() {
        return Err(Error::Data("reference pool is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets = (0..r)
        .map(|_| {
            if sampling == Sampling::WithoutReplacement && pool.len() >= k {
                index::sample(&mut rng, pool.len(), k)
                    .into_iter()
                    .map(|i| &pool[i])
                    .collect()
            } else {
                (0..k).map(|_| &pool[rng.random_range(0..pool.len())]).collect()
            }
        })
        .collect();
    Ok(sets)
}

fn same_vocab(a: &Arc<Vocabulary>, b: &Arc<Vocabulary>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Score `unknown` against the author model and the reference models.
pub fn lambda_document(
    unknown: &[Sentence],
    author: &GrammarModel,
    refs: &[GrammarModel],
) -> Result<LambdaTrace> {
    if refs.is_empty() {
        return Err(Error::Contract("at least one reference model is required".into()));
    }
    for m in refs {
        if m.order() != author.order() {
            return Err(Error::Contract(format!(
                "model order mismatch: author {} vs reference {}",
                author.order(),
                m.order()
            )));
        }
        if !same_vocab(m.vocab(), author.vocab()) {
            return Err(Error::Contract("reference model vocabulary differs".into()));
        }
    }
    let vocab = author.vocab();
    let encoded: Vec<Vec<TokenId>> = unknown.iter().map(|s| vocab.encode(s)).collect();
    let own: Vec<Vec<f64>> = encoded.iter().map(|ids| author.position_logprobs(ids)).collect();
    let reference: Vec<Vec<Vec<f64>>> = refs
        .par_iter()
        .map(|m| encoded.iter().map(|ids| m.position_logprobs(ids)).collect())
        .collect();

    let r = refs.len() as f64;
    let mut token_scores = Vec::new();
    let mut sentence_scores = Vec::with_capacity(unknown.len());
    for (si, sentence) in unknown.iter().enumerate() {
        let mut sentence_total = 0.0;
        for (j, &lp_author) in own[si].iter().enumerate() {
            // Fixed summation order over models keeps results independent
            // of thread scheduling.
            let mut acc = 0.0;
            for per_model in &reference {
                acc += lp_author - per_model[si][j];
            }
            let lambda = acc / r;
            sentence_total += lambda;
            let token = sentence
                .tokens()
                .get(j)
                .map_or(EOS_SURFACE, String::as_str)
                .to_string();
            token_scores.push(TokenScore {
                token,
                sentence: si,
                position: j,
                lambda,
            });
        }
        sentence_scores.push(sentence_total);
    }
    let total = sentence_scores.iter().sum();
    Ok(LambdaTrace {
        problem: None,
        token_scores,
        sentence_scores,
        total,
        config: None,
        seed: None,
    })
}

/// Train the author model and `cfg.refs` reference models and score
/// `unknown`. The vocabulary is shared and built from the author and
/// reference sentences.
pub fn verify_sentences(
    unknown: &[Sentence],
    known: &[Sentence],
    reference: &[Sentence],
    cfg: &LambdaConfig,
) -> Result<LambdaTrace> {
    cfg.validate()?;
    if unknown.is_empty() {
        return Err(Error::Data("questioned document set has no sentences".into()));
    }
    if known.is_empty() {
        return Err(Error::Data("known document set has no sentences".into()));
    }
    if reference.is_empty() {
        return Err(Error::Data("reference population has no sentences".into()));
    }
    let vocab = Arc::new(Vocabulary::from_sentences(known.iter().chain(reference)));
    let author = GrammarModel::train(known, cfg.order, cfg.discounts, vocab.clone())?;
    let samples = sample_reference_sets(reference, known.len(), cfg.refs, cfg.seed, cfg.sampling)?;
    let refs = samples
        .into_par_iter()
        .map(|set| GrammarModel::train(set, cfg.order, cfg.discounts, vocab.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut trace = lambda_document(unknown, &author, &refs)?;
    trace.config = Some(cfg.clone());
    trace.seed = Some(cfg.seed);
    Ok(trace)
}

/// Masked sentences of all `docs`, concatenated in order.
pub fn pooled_sentences(
    docs: &[DocumentSource],
    lex: &MaskingLexicon,
) -> Result<Vec<Sentence>> {
    let mut out = Vec::new();
    for d in docs {
        out.extend(masked(d, lex)?.sentences);
    }
    Ok(out)
}

/// End-to-end scoring of one problem: mask, segment, train, score.
pub fn verify_problem(
    problem: &VerificationProblem,
    reference: &[DocumentSource],
    cfg: &LambdaConfig,
    lex: &MaskingLexicon,
) -> Result<LambdaTrace> {
    let unknown = pooled_sentences(&problem.unknown, lex)?;
    let known = pooled_sentences(&problem.known, lex)?;
    let pool = pooled_sentences(reference, lex)?;
    let mut trace = verify_sentences(&unknown, &known, &pool, cfg)?;
    trace.problem = Some(problem.id.clone());
    Ok(trace)
}
