//! Slow, definition-level reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::HashMap;

use grammarlr::lambdag::{sample_reference_sets, LambdaConfig};
use grammarlr::ngram::{DiscountSchedule, TokenId, Vocabulary};
use grammarlr::Sentence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Counts = HashMap<Vec<TokenId>, u64>;

/// Every window of every length `n ≤ order` over sentences padded with `n`
/// start symbols and one end symbol.
pub fn naive_counts(sentences: &[Vec<TokenId>], order: usize) -> Counts {
    let mut counts = Counts::new();
    for n in 1..=order {
        for s in sentences {
            let mut padded = vec![TokenId::BOS; n];
            padded.extend_from_slice(s);
            padded.push(TokenId::EOS);
            for w in padded.windows(n) {
                *counts.entry(w.to_vec()).or_insert(0) += 1;
            }
        }
    }
    counts
}

pub struct NaiveKn {
    pub order: usize,
    /// Vocabulary size, `UNK` included; ids are `0..vocab`.
    pub vocab: u32,
    pub counts: Counts,
    pub schedule: DiscountSchedule,
}

impl NaiveKn {
    pub fn new(sentences: &[Vec<TokenId>], order: usize, vocab: u32, schedule: DiscountSchedule) -> Self {
        Self {
            order,
            vocab,
            counts: naive_counts(sentences, order),
            schedule,
        }
    }

    pub fn c(&self, g: &[TokenId]) -> u64 {
        self.counts.get(g).copied().unwrap_or(0)
    }

    /// Everything that may precede a token.
    pub fn left_symbols(&self) -> Vec<TokenId> {
        let mut v: Vec<TokenId> = (0..self.vocab).map(TokenId).collect();
        v.push(TokenId::BOS);
        v
    }

    /// Everything that may be predicted.
    pub fn right_symbols(&self) -> Vec<TokenId> {
        let mut v: Vec<TokenId> = (0..self.vocab).map(TokenId).collect();
        v.push(TokenId::EOS);
        v
    }

    pub fn kn(&self, g: &[TokenId]) -> u64 {
        if g.len() == self.order {
            return self.c(g);
        }
        self.left_symbols()
            .into_iter()
            .filter(|&x| {
                let mut e = vec![x];
                e.extend_from_slice(g);
                self.c(&e) > 0
            })
            .count() as u64
    }

    fn ext(g: &[TokenId], t: TokenId) -> Vec<TokenId> {
        let mut e = g.to_vec();
        e.push(t);
        e
    }

    /// `(N_1, N_2, N_{3+})` of the given values.
    pub fn count_of_counts(values: impl IntoIterator<Item = u64>) -> (u64, u64, u64) {
        let mut r = (0, 0, 0);
        for v in values {
            match v {
                0 => {}
                1 => r.0 += 1,
                2 => r.1 += 1,
                _ => r.2 += 1,
            }
        }
        r
    }

    pub fn prefix_coc(&self, g: &[TokenId]) -> (u64, u64, u64) {
        Self::count_of_counts(self.left_symbols().into_iter().map(|x| {
            let mut e = vec![x];
            e.extend_from_slice(g);
            self.c(&e)
        }))
    }

    pub fn suffix_coc(&self, g: &[TokenId]) -> (u64, u64, u64) {
        Self::count_of_counts(self.right_symbols().into_iter().map(|t| self.c(&Self::ext(g, t))))
    }

    pub fn kn_suffix_coc(&self, g: &[TokenId]) -> ((u64, u64, u64), u64) {
        let kns: Vec<u64> = self
            .right_symbols()
            .into_iter()
            .map(|t| self.kn(&Self::ext(g, t)))
            .collect();
        (Self::count_of_counts(kns.iter().copied()), kns.iter().sum())
    }

    fn d(&self, c: u64) -> f64 {
        match self.schedule {
            DiscountSchedule::Constant { d } => d,
            DiscountSchedule::Modified { d1, d2, d3 } => match c {
                1 => d1,
                2 => d2,
                _ => d3,
            },
        }
    }

    pub fn prob(&self, t: TokenId, context: &[TokenId]) -> f64 {
        let keep = context.len().min(self.order - 1);
        self.prob_rec(t, &context[context.len() - keep..])
    }

    fn prob_rec(&self, t: TokenId, g: &[TokenId]) -> f64 {
        let lower = if g.is_empty() {
            1.0 / f64::from(self.vocab + 1)
        } else {
            self.prob_rec(t, &g[1..])
        };
        let kns: Vec<u64> = self
            .right_symbols()
            .into_iter()
            .map(|u| self.kn(&Self::ext(g, u)))
            .collect();
        let denom: u64 = kns.iter().sum();
        if denom == 0 {
            return lower;
        }
        let mass: f64 = kns.iter().filter(|&&k| k > 0).map(|&k| self.d(k)).sum();
        let k = self.kn(&Self::ext(g, t));
        let alpha = if k == 0 {
            0.0
        } else {
            (k as f64 - self.d(k)).max(0.0) / denom as f64
        };
        alpha + mass / denom as f64 * lower
    }

    /// Natural-log probability of every position, end of sentence included.
    pub fn position_logprobs(&self, s: &[TokenId]) -> Vec<f64> {
        let mut history = vec![TokenId::BOS; self.order - 1];
        let mut out = Vec::new();
        for &t in s.iter().chain(std::iter::once(&TokenId::EOS)) {
            out.push(self.prob(t, &history).ln());
            history.push(t);
        }
        out
    }
}

pub fn encode(vocab: &Vocabulary, sentences: &[Sentence]) -> Vec<Vec<TokenId>> {
    sentences.iter().map(|s| vocab.encode(s)).collect()
}

/// Per-token λ computed position by position from freshly trained naive
/// models. Only the sampling of reference sets is shared with the library.
pub fn naive_lambda(
    unknown: &[Sentence],
    known: &[Sentence],
    reference: &[Sentence],
    cfg: &LambdaConfig,
    schedule: DiscountSchedule,
) -> Vec<Vec<f64>> {
    let vocab = Vocabulary::from_sentences(known.iter().chain(reference));
    let v = vocab.len() as u32;
    let author = NaiveKn::new(&encode(&vocab, known), cfg.order, v, schedule);
    let refs: Vec<NaiveKn> = sample_reference_sets(reference, known.len(), cfg.refs, cfg.seed, cfg.sampling)
        .unwrap()
        .into_iter()
        .map(|set| {
            let owned: Vec<Sentence> = set.into_iter().cloned().collect();
            NaiveKn::new(&encode(&vocab, &owned), cfg.order, v, schedule)
        })
        .collect();
    encode(&vocab, unknown)
        .iter()
        .map(|s| {
            let a = author.position_logprobs(s);
            let per_ref: Vec<Vec<f64>> = refs.iter().map(|m| m.position_logprobs(s)).collect();
            (0..a.len())
                .map(|j| per_ref.iter().map(|r| a[j] - r[j]).sum::<f64>() / refs.len() as f64)
                .collect()
        })
        .collect()
}

/// Isotonic regression by exhaustive search over contiguous partitions of
/// the tie groups, keeping the least-squares partition with monotone means.
pub fn brute_isotonic(scores: &[f64], targets: &[f64]) -> Vec<f64> {
    let mut levels: Vec<f64> = scores.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let groups: Vec<Vec<usize>> = levels
        .iter()
        .map(|&l| (0..scores.len()).filter(|&i| scores[i] == l).collect())
        .collect();
    let k = groups.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (k - 1)) {
        let mut segments: Vec<Vec<usize>> = vec![Vec::new()];
        for (g, members) in groups.iter().enumerate() {
            if g > 0 && mask & (1 << (g - 1)) != 0 {
                segments.push(Vec::new());
            }
            segments.last_mut().unwrap().extend(members);
        }
        let means: Vec<f64> = segments
            .iter()
            .map(|s| s.iter().map(|&i| targets[i]).sum::<f64>() / s.len() as f64)
            .collect();
        if means.windows(2).any(|w| w[0] > w[1]) {
            continue;
        }
        let mut fit = vec![0.0; scores.len()];
        let mut sse = 0.0;
        for (s, &m) in segments.iter().zip(&means) {
            for &i in s {
                fit[i] = m;
                sse += (targets[i] - m).powi(2);
            }
        }
        if best.as_ref().is_none_or(|(b, _)| sse < *b - 1e-12) {
            best = Some((sse, fit));
        }
    }
    best.unwrap().1
}

/// Random corpus of `1..=max_sentences` sentences over `vocab` symbols.
pub fn random_corpus(rng: &mut ChaCha8Rng, vocab: usize, max_sentences: usize, max_len: usize) -> Vec<Sentence> {
    let n = rng.random_range(1..=max_sentences);
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            let words = (0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect();
            Sentence::new(words).unwrap()
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
