//! Interpolated (modified) Kneser-Ney grammar models.
//!
//! Counting convention: an n-gram's count `c` is taken over sentences padded
//! with exactly `n` `<s>` tokens on the left and one `</s>` on the right, so
//! `c(<s> … <s>) = c(</s>)` = number of sentences for any run of `<s>`.
//!
//! The smoothed conditional is the usual recursion
//!
//! ```text
//! p(t | g) = α(t | g) + γ(g) · p(t | L(g))
//! p(t | ∅) = α(t | ∅) + γ(∅) / (|V| + 1)
//! ```
//!
//! with `L` dropping the leftmost context token. Both α and γ divide by
//! `Σ_{t' ∈ V ∪ {</s>}} c_KN(g t')`, where `c_KN` is the raw count at the top
//! order and the number of distinct left extensions `N1+(• g t)` below it.
//! The discount mass in γ is computed over the same `c_KN` values, which is
//! what makes every conditional sum to one. Unseen contexts (`c(g) = 0`)
//! back off with `α = 0, γ = 1`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::vocab::{TokenId, Vocabulary};
use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// Largest supported model order.
pub const MAX_ORDER: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum DiscountSchedule {
    /// One discount for every count.
    Constant { d: f64 },
    /// Count-dependent discounts `D(1)`, `D(2)` and `D(3+)`.
    Modified { d1: f64, d2: f64, d3: f64 },
}

impl Default for DiscountSchedule {
    fn default() -> Self {
        DiscountSchedule::Constant { d: 0.75 }
    }
}

impl DiscountSchedule {
    pub fn constant(d: f64) -> Result<Self> {
        let s = DiscountSchedule::Constant { d };
        s.validate()?;
        Ok(s)
    }

    pub fn modified(d1: f64, d2: f64, d3: f64) -> Result<Self> {
        let s = DiscountSchedule::Modified { d1, d2, d3 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |d: f64| d > 0.0 && d < 1.0;
        let valid = match *self {
            DiscountSchedule::Constant { d } => ok(d),
            DiscountSchedule::Modified { d1, d2, d3 } => ok(d1) && ok(d2) && ok(d3),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "discounts must lie strictly between 0 and 1: {self:?}"
            )))
        }
    }

    pub fn discount(&self, count: u64) -> f64 {
        match *self {
            DiscountSchedule::Constant { d } => d,
            DiscountSchedule::Modified { d1, d2, d3 } => match count {
                0 => 0.0,
                1 => d1,
                2 => d2,
                _ => d3,
            },
        }
    }

    /// `Σ_k D(k) N_k(g•)` over the given count-of-counts.
    fn mass(&self, stats: &ExtStats) -> f64 {
        match *self {
            DiscountSchedule::Constant { d } => d * stats.types() as f64,
            DiscountSchedule::Modified { d1, d2, d3 } => {
                d1 * stats.n1 as f64 + d2 * stats.n2 as f64 + d3 * stats.n3_plus as f64
            }
        }
    }

    /// Chen–Goodman estimates from the number of n-grams seen exactly 1..4
    /// times, clamped into `[0.05, 0.95]`; undefined estimates fall back to
    /// 0.75.
    pub fn chen_goodman(n: [u64; 4]) -> Self {
        let [n1, n2, n3, n4] = n.map(|x| x as f64);
        let fallback = 0.75;
        let clamp = |d: f64| {
            if d.is_finite() {
                d.clamp(0.05, 0.95)
            } else {
                fallback
            }
        };
        if n1 == 0.0 || n2 == 0.0 {
            return DiscountSchedule::Modified {
                d1: fallback,
                d2: fallback,
                d3: fallback,
            };
        }
        let y = n1 / (n1 + 2.0 * n2);
        let d1 = clamp(1.0 - 2.0 * y * n2 / n1);
        let d2 = if n2 > 0.0 { clamp(2.0 - 3.0 * y * n3 / n2) } else { fallback };
        let d3 = if n3 > 0.0 { clamp(3.0 - 4.0 * y * n4 / n3) } else { fallback };
        DiscountSchedule::Modified { d1, d2, d3 }
    }
}

/// How a model's discounts are chosen at training time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscountSetting {
    Fixed(DiscountSchedule),
    /// Modified schedule estimated from the model's own top-order counts.
    EstimatedModified,
}

impl Default for DiscountSetting {
    fn default() -> Self {
        DiscountSetting::Fixed(DiscountSchedule::default())
    }
}

/// Count-of-counts over a set of extensions: how many extensions were seen
/// exactly once, exactly twice, and three or more times.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtStats {
    pub n1: u64,
    pub n2: u64,
    pub n3_plus: u64,
}

impl ExtStats {
    fn add(&mut self, count: u64) {
        match count {
            0 => {}
            1 => self.n1 += 1,
            2 => self.n2 += 1,
            _ => self.n3_plus += 1,
        }
    }

    /// `N_{1+}`: number of distinct extensions.
    pub fn types(&self) -> u64 {
        self.n1 + self.n2 + self.n3_plus
    }

    /// `N_r` for `r ∈ {1, 2}`; larger `r` are not tracked individually.
    pub fn exactly(&self, r: u64) -> Option<u64> {
        match r {
            1 => Some(self.n1),
            2 => Some(self.n2),
            _ => None,
        }
    }

    /// `N_{r+}` for `r ∈ {1, 2, 3}`.
    pub fn at_least(&self, r: u64) -> Option<u64> {
        match r {
            0 | 1 => Some(self.types()),
            2 => Some(self.n2 + self.n3_plus),
            3 => Some(self.n3_plus),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Entry {
    count: u64,
    kn: u64,
    /// `N_r(• g)` over raw counts.
    left: ExtStats,
    /// `N_r(g •)` over raw counts.
    right: ExtStats,
    /// `N_r(g •)` over `c_KN` of the extensions.
    kn_right: ExtStats,
    /// `Σ_{t ∈ V ∪ {</s>}} c_KN(g t)`.
    kn_denom: u64,
}

type Table = HashMap<Box<[TokenId]>, Entry>;

#[derive(Clone, Debug)]
pub struct GrammarModel {
    order: usize,
    vocab: Arc<Vocabulary>,
    discounts: DiscountSchedule,
    sentences: u64,
    root: Entry,
    /// `levels[k]` holds the (k+1)-grams.
    levels: Vec<Table>,
}

impl GrammarModel {
    /// Train on `sentences`. Tokens outside `vocab` count as `UNK`.
    pub fn train<'a, I>(
        sentences: I,
        order: usize,
        discounts: DiscountSetting,
        vocab: Arc<Vocabulary>,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        let encoded: Vec<Vec<TokenId>> = sentences.into_iter().map(|s| vocab.encode(s)).collect();
        Self::train_encoded(&encoded, order, discounts, vocab)
    }

    /// Train on sentences already mapped through `vocab`.
    pub fn train_encoded<S>(
        sentences: &[S],
        order: usize,
        discounts: DiscountSetting,
        vocab: Arc<Vocabulary>,
    ) -> Result<Self>
    where
        S: AsRef<[TokenId]>,
    {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::Argument(format!(
                "model order must be in 1..={MAX_ORDER}, got {order}"
            )));
        }
        if sentences.is_empty() {
            return Err(Error::Argument("cannot train on an empty sentence set".into()));
        }
        let mut raw: Vec<HashMap<Box<[TokenId]>, u64>> = vec![HashMap::new(); order];
        let mut padded = Vec::new();
        for s in sentences {
            let s = s.as_ref();
            if s.is_empty() {
                return Err(Error::Argument("training sentences must be non-empty".into()));
            }
            padded.clear();
            padded.resize(order, TokenId::BOS);
            padded.extend(s.iter().map(|&t| {
                if t.is_pseudo() || t.0 as usize >= vocab.len() {
                    TokenId::UNK
                } else {
                    t
                }
            }));
            padded.push(TokenId::EOS);
            // With `n` padding tokens an n-gram window may start at
            // `order - n` at the earliest, i.e. every window ending at or
            // after the last padding position.
            for end in order - 1..padded.len() {
                for n in 1..=order {
                    let window = &padded[end + 1 - n..=end];
                    *raw[n - 1].entry(window.into()).or_insert(0) += 1;
                }
            }
        }
        let discounts = match discounts {
            DiscountSetting::Fixed(d) => {
                d.validate()?;
                d
            }
            DiscountSetting::EstimatedModified => {
                let mut coc = [0u64; 4];
                for &c in raw[order - 1].values() {
                    if (1..=4).contains(&c) {
                        coc[c as usize - 1] += 1;
                    }
                }
                DiscountSchedule::chen_goodman(coc)
            }
        };
        Ok(Self::from_raw_counts(
            order,
            vocab,
            discounts,
            sentences.len() as u64,
            raw,
        ))
    }

    pub(crate) fn from_raw_counts(
        order: usize,
        vocab: Arc<Vocabulary>,
        discounts: DiscountSchedule,
        sentences: u64,
        raw: Vec<HashMap<Box<[TokenId]>, u64>>,
    ) -> Self {
        let mut levels: Vec<Table> = raw
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .map(|(k, count)| {
                        (
                            k,
                            Entry {
                                count,
                                ..Entry::default()
                            },
                        )
                    })
                    .collect()
            })
            .collect();
        let mut root = Entry {
            count: sentences,
            ..Entry::default()
        };

        // Prefix and suffix statistics over raw counts.
        for n in 1..=order {
            let (lower, upper) = levels.split_at_mut(n - 1);
            for (g, e) in upper[0].iter() {
                let last = g[n - 1];
                if n == 1 {
                    if last != TokenId::EOS {
                        root.left.add(e.count);
                    }
                    if last != TokenId::BOS {
                        root.right.add(e.count);
                    }
                    continue;
                }
                let parent = &mut lower[n - 2];
                if let Some(p) = parent.get_mut(&g[1..]) {
                    p.left.add(e.count);
                }
                if last != TokenId::BOS {
                    if let Some(p) = parent.get_mut(&g[..n - 1]) {
                        p.right.add(e.count);
                    }
                }
            }
        }

        for (k, level) in levels.iter_mut().enumerate() {
            let top = k + 1 == order;
            for e in level.values_mut() {
                e.kn = if top { e.count } else { e.left.types() };
            }
        }

        // Per-context statistics over modified counts.
        for n in 1..=order {
            let (lower, upper) = levels.split_at_mut(n - 1);
            for (g, e) in upper[0].iter() {
                if g[n - 1] == TokenId::BOS || e.kn == 0 {
                    continue;
                }
                let parent = if n == 1 {
                    &mut root
                } else {
                    match lower[n - 2].get_mut(&g[..n - 1]) {
                        Some(p) => p,
                        None => continue,
                    }
                };
                parent.kn_right.add(e.kn);
                parent.kn_denom += e.kn;
            }
        }

        Self {
            order,
            vocab,
            discounts,
            sentences,
            root,
            levels,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn discounts(&self) -> DiscountSchedule {
        self.discounts
    }

    /// Number of training sentences.
    pub fn sentence_count(&self) -> u64 {
        self.sentences
    }

    fn entry(&self, ngram: &[TokenId]) -> Option<&Entry> {
        if ngram.is_empty() {
            return Some(&self.root);
        }
        self.levels.get(ngram.len() - 1)?.get(ngram)
    }

    /// Raw count `c(g)` for `1 ≤ |g| ≤ order`.
    pub fn count(&self, ngram: &[TokenId]) -> u64 {
        if ngram.is_empty() {
            return 0;
        }
        self.entry(ngram).map_or(0, |e| e.count)
    }

    /// Modified count `c_KN(g)`.
    pub fn kn_count(&self, ngram: &[TokenId]) -> u64 {
        if ngram.is_empty() {
            return 0;
        }
        self.entry(ngram).map_or(0, |e| e.kn)
    }

    /// `N_r(• g)` statistics; defined for `|g| < order`.
    pub fn prefix_stats(&self, g: &[TokenId]) -> ExtStats {
        if g.len() >= self.order {
            return ExtStats::default();
        }
        self.entry(g).map_or_else(ExtStats::default, |e| e.left)
    }

    /// `N_r(g •)` statistics over raw counts; defined for `|g| < order`.
    pub fn suffix_stats(&self, g: &[TokenId]) -> ExtStats {
        if g.len() >= self.order {
            return ExtStats::default();
        }
        self.entry(g).map_or_else(ExtStats::default, |e| e.right)
    }

    /// `N_r(g •)` over modified counts together with `Σ_t c_KN(g t)`.
    pub fn kn_context_stats(&self, g: &[TokenId]) -> (ExtStats, u64) {
        if g.len() >= self.order {
            return (ExtStats::default(), 0);
        }
        self.entry(g)
            .map_or((ExtStats::default(), 0), |e| (e.kn_right, e.kn_denom))
    }

    /// All stored n-grams of length `n` with their raw counts.
    pub fn ngrams(&self, n: usize) -> impl Iterator<Item = (&[TokenId], u64)> {
        self.levels
            .get(n.wrapping_sub(1))
            .into_iter()
            .flat_map(|m| m.iter().map(|(k, e)| (&**k, e.count)))
    }

    /// Number of stored n-grams of every length.
    pub fn ngram_total(&self) -> usize {
        self.levels.iter().map(HashMap::len).sum()
    }

    /// Backoff weight γ(g); 1 for unseen contexts.
    pub fn gamma(&self, g: &[TokenId]) -> f64 {
        match self.observed_context(g) {
            Some(e) => self.discounts.mass(&e.kn_right) / e.kn_denom as f64,
            None => 1.0,
        }
    }

    /// Discounted weight α(t | g); 0 for unseen contexts.
    pub fn alpha(&self, t: TokenId, g: &[TokenId]) -> f64 {
        match self.observed_context(g) {
            Some(e) => self.alpha_in(e, t, g),
            None => 0.0,
        }
    }

    fn observed_context(&self, g: &[TokenId]) -> Option<&Entry> {
        if g.len() >= self.order {
            return None;
        }
        self.entry(g).filter(|e| e.kn_denom > 0)
    }

    fn alpha_in(&self, ctx: &Entry, t: TokenId, g: &[TokenId]) -> f64 {
        let mut key = [TokenId::BOS; MAX_ORDER];
        key[..g.len()].copy_from_slice(g);
        key[g.len()] = t;
        let kn = self.levels[g.len()]
            .get(&key[..=g.len()])
            .map_or(0, |e| e.kn);
        if kn == 0 {
            return 0.0;
        }
        (kn as f64 - self.discounts.discount(kn)).max(0.0) / ctx.kn_denom as f64
    }

    /// Smoothed `p(t | context)` on ids. Contexts longer than `order - 1`
    /// keep their most recent tokens. `t` must not be `<s>`.
    pub fn prob_id(&self, t: TokenId, context: &[TokenId]) -> Result<f64> {
        if t == TokenId::BOS {
            return Err(Error::Argument("p(<s> | g) is not defined".into()));
        }
        Ok(self.prob_unchecked(t, context))
    }

    fn prob_unchecked(&self, t: TokenId, context: &[TokenId]) -> f64 {
        let max_ctx = self.order - 1;
        let ctx = &context[context.len().saturating_sub(max_ctx)..];
        let mut p = 1.0 / (self.vocab.len() + 1) as f64;
        for k in 0..=ctx.len() {
            let g = &ctx[ctx.len() - k..];
            let Some(e) = self.observed_context(g) else {
                // No longer context can have been observed either.
                break;
            };
            let gamma = self.discounts.mass(&e.kn_right) / e.kn_denom as f64;
            p = self.alpha_in(e, t, g) + gamma * p;
        }
        p
    }

    /// Smoothed conditional on surfaces; `</s>` and `<s>` name the pseudo
    /// tokens, anything outside the vocabulary is `UNK`.
    pub fn kn_prob(&self, t: &str, context: &[&str]) -> Result<f64> {
        let ctx: Vec<TokenId> = context.iter().map(|s| self.surface_id(s)).collect();
        self.prob_id(self.surface_id(t), &ctx)
    }

    fn surface_id(&self, s: &str) -> TokenId {
        match s {
            super::vocab::BOS_SURFACE => TokenId::BOS,
            super::vocab::EOS_SURFACE => TokenId::EOS,
            _ => self.vocab.id(s),
        }
    }

    /// Natural-log probabilities of every position of a sentence, the final
    /// `</s>` included, with `<s>` padding as left context.
    pub fn position_logprobs(&self, ids: &[TokenId]) -> Vec<f64> {
        let pad = self.order - 1;
        let mut padded = Vec::with_capacity(pad + ids.len() + 1);
        padded.resize(pad, TokenId::BOS);
        padded.extend_from_slice(ids);
        padded.push(TokenId::EOS);
        (0..=ids.len())
            .map(|j| self.prob_unchecked(padded[j + pad], &padded[j..j + pad]).ln())
            .collect()
    }

    /// `log P(s)` including the end-of-sentence event.
    pub fn sentence_logprob(&self, sentence: &Sentence) -> f64 {
        self.position_logprobs(&self.vocab.encode(sentence))
            .into_iter()
            .sum()
    }

    pub(crate) fn raw_tables(&self) -> impl Iterator<Item = Vec<(&[TokenId], u64)>> {
        self.levels.iter().map(|m| {
            let mut v: Vec<(&[TokenId], u64)> = m.iter().map(|(k, e)| (&**k, e.count)).collect();
            v.sort_unstable();
            v
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(lines: &[&str]) -> Vec<Sentence> {
        lines.iter().map(|l| Sentence::from_words(l)).collect()
    }

    fn model(lines: &[&str], order: usize) -> GrammarModel {
        let sents = corpus(lines);
        let vocab = Arc::new(Vocabulary::from_sentences(&sents));
        GrammarModel::train(&sents, order, DiscountSetting::default(), vocab).unwrap()
    }

    fn ids(m: &GrammarModel, toks: &[&str]) -> Vec<TokenId> {
        toks.iter().map(|s| m.surface_id(s)).collect()
    }

    #[test]
    fn eos_and_bos_runs_count_sentences() {
        let m = model(&["a b", "a c"], 2);
        assert_eq!(m.count(&ids(&m, &["</s>"])), 2);
        assert_eq!(m.count(&ids(&m, &["<s>"])), 2);
        assert_eq!(m.count(&ids(&m, &["<s>", "<s>"])), 2);
        assert_eq!(m.count(&ids(&m, &["<s>", "a"])), 2);
    }

    #[test]
    fn continuation_count_of_b() {
        let m = model(&["a b", "a c"], 2);
        // Only "a" precedes "b".
        assert_eq!(m.kn_count(&ids(&m, &["b"])), 1);
        // "a" is preceded only by <s>.
        assert_eq!(m.kn_count(&ids(&m, &["a"])), 1);
        // Top order keeps raw counts.
        assert_eq!(m.kn_count(&ids(&m, &["<s>", "a"])), 2);
    }

    #[test]
    fn hand_computed_bigram_probability() {
        // Unigram level: c_KN(a)=c_KN(b)=c_KN(c)=1 and c_KN(</s>)=2 (preceded
        // by b and c), denominator 5, four types; |V| = 4 with UNK.
        let m = model(&["a b", "a c"], 2);
        let unigram_b = 0.25 / 5.0 + (0.75 * 4.0 / 5.0) * (1.0 / 5.0);
        assert!((m.kn_prob("b", &[]).unwrap() - unigram_b).abs() < 1e-15);
        // α(b|a) = (1 - 0.75)/2, γ(a) = 0.75·2/2.
        let expected = 0.125 + 0.75 * unigram_b;
        let got = m.kn_prob("b", &["a"]).unwrap();
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
        assert_eq!(got, m.kn_prob("c", &["a"]).unwrap());
    }

    #[test]
    fn bos_target_is_rejected() {
        let m = model(&["a b"], 2);
        assert!(m.kn_prob("<s>", &["a"]).is_err());
    }

    #[test]
    fn zero_order_rejected() {
        let sents = corpus(&["a"]);
        let vocab = Arc::new(Vocabulary::from_sentences(&sents));
        assert!(GrammarModel::train(&sents, 0, DiscountSetting::default(), vocab.clone()).is_err());
        assert!(GrammarModel::train(&[], 2, DiscountSetting::default(), vocab).is_err());
    }

    #[test]
    fn single_token_sentence_unrolls() {
        let m = model(&["a"], 3);
        let lp = m.sentence_logprob(&Sentence::from_words("a"));
        let direct = m.kn_prob("a", &["<s>", "<s>"]).unwrap().ln()
            + m.kn_prob("</s>", &["<s>", "a"]).unwrap().ln();
        assert_eq!(lp, direct);
    }

    #[test]
    fn symmetric_sentences_score_equally() {
        let m = model(&["a b", "a c"], 3);
        assert_eq!(
            m.sentence_logprob(&Sentence::from_words("a b")),
            m.sentence_logprob(&Sentence::from_words("a c"))
        );
    }

    #[test]
    fn unseen_context_backs_off_exactly() {
        let m = model(&["a b c", "b c a"], 3);
        for t in ["a", "b", "c", "</s>"] {
            let long = m.kn_prob(t, &["c", "c"]).unwrap();
            let short = m.kn_prob(t, &["c"]).unwrap();
            assert_eq!(long, short);
        }
    }

    #[test]
    fn long_contexts_are_truncated() {
        let m = model(&["a b c", "b c a"], 2);
        assert_eq!(
            m.kn_prob("c", &["a", "a", "b"]).unwrap(),
            m.kn_prob("c", &["b"]).unwrap()
        );
    }

    #[test]
    fn larger_discount_raises_gamma() {
        let sents = corpus(&["a b c a", "b c a b", "a a b"]);
        let vocab = Arc::new(Vocabulary::from_sentences(&sents));
        let train = |d| {
            GrammarModel::train(
                &sents,
                3,
                DiscountSetting::Fixed(DiscountSchedule::constant(d).unwrap()),
                vocab.clone(),
            )
            .unwrap()
        };
        let (lo, hi) = (train(0.3), train(0.8));
        for g in [vec![], vec!["a"], vec!["b", "c"], vec!["<s>", "a"]] {
            let g = ids(&lo, &g);
            assert!(hi.gamma(&g) > lo.gamma(&g));
        }
    }

    #[test]
    fn chen_goodman_clamps_into_unit_interval() {
        match DiscountSchedule::chen_goodman([100, 40, 20, 10]) {
            DiscountSchedule::Modified { d1, d2, d3 } => {
                for d in [d1, d2, d3] {
                    assert!(d > 0.0 && d < 1.0);
                }
            }
            other => panic!("{other:?}"),
        }
        assert!(DiscountSchedule::constant(1.0).is_err());
        assert!(DiscountSchedule::modified(0.5, 0.0, 0.5).is_err());
    }

    #[test]
    fn modified_schedule_normalises() {
        let sents = corpus(&["a b a b a", "b b a", "a a a b", "c a b"]);
        let vocab = Arc::new(Vocabulary::from_sentences(&sents));
        let m = GrammarModel::train(&sents, 3, DiscountSetting::EstimatedModified, vocab).unwrap();
        for ctx in [vec![], vec!["a"], vec!["a", "b"], vec!["<s>", "<s>"], vec!["c", "c"]] {
            let total: f64 = ["<unk>", "a", "b", "c", "</s>"]
                .iter()
                .map(|t| m.kn_prob(t, &ctx).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "{ctx:?}: {total}");
        }
    }
}
