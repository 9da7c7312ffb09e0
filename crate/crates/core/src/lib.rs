//! Authorship verification with likelihood ratios of n-gram grammar models.
//!
//! Documents are reduced to their grammatical skeleton by masking content
//! words, Kneser-Ney smoothed n-gram models are trained on a candidate
//! author's texts and on samples of a reference population, and the
//! questioned text is scored token by token with the averaged log ratio of
//! the two. Scores are calibrated into log-likelihood ratios by logistic
//! regression and evaluated with Cllr, ROC AUC and the usual rates.
//!
//! ```
//! use grammarlr::{verify_sentences, LambdaConfig, Sentence};
//!
//! let s = |t: &str| Sentence::from_words(t);
//! let known = vec![s("the N V the N ."), s("N V of the N .")];
//! let reference = vec![s("a N V a N ."), s("N , N and N ."), s("the N is J .")];
//! let cfg = LambdaConfig { order: 3, refs: 5, seed: 7, ..Default::default() };
//! let trace = verify_sentences(&[s("the N V the N .")], &known, &reference, &cfg).unwrap();
//! assert_eq!(trace.token_scores.len(), 7);
//! ```

pub mod calibration;
pub mod corpus;
pub mod error;
pub mod experiment;
pub mod lambdag;
pub mod masking;
pub mod metrics;
pub mod ngram;
pub mod report;
pub mod synth;

pub use calibration::{apply_calibration, decide, fit_calibration, CalibrationModel};
pub use corpus::{
    load_corpus, parse_tagged_document, segment_sentences, write_corpus, Corpus, Document,
    DocumentSource, Label, Partition, Pos, Sentence, TaggedToken, VerificationProblem,
};
pub use error::{Error, Result};
pub use experiment::{crossgenre, evaluate, score_corpus, sweep, Evaluation, GenreCorpus, Harness};
pub use lambdag::{lambda_document, verify_problem, verify_sentences, LambdaConfig, LambdaTrace, Sampling};
pub use masking::{mask_document, mask_sentence, MaskingLexicon};
pub use metrics::{cllr, cllr_min, classification_metrics, roc_auc, LrSet, MetricsReport};
pub use ngram::{DiscountSchedule, DiscountSetting, GrammarModel, Vocabulary};
pub use report::{rank_sentences, render, zscore_bins, Format, HighlightDoc};
pub use synth::{split_by_author, synth_corpus, synth_corpus_with, SynthOptions};
