//! Experiment protocols: scoring whole corpora, train/test evaluation,
//! hyperparameter sweeps and the cross-genre reference matrix.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{fit_calibration, CalibrationModel};
use crate::corpus::{Corpus, DocumentSource, Label};
use crate::error::{Error, Result};
use crate::lambdag::{pooled_sentences, verify_sentences, LambdaConfig, LambdaTrace};
use crate::masking::MaskingLexicon;
use crate::metrics::{MetricsReport, cllr, LrSet};

/// Settings shared by every protocol.
#[derive(Clone, Debug)]
pub struct Harness {
    pub lambda: LambdaConfig,
    /// Worker threads; bounds how many models are trained at once.
    pub parallel: usize,
    pub lexicon: MaskingLexicon,
}

impl Harness {
    pub fn new(lambda: LambdaConfig) -> Self {
        Self {
            lambda,
            parallel: std::thread::available_parallelism().map_or(1, |n| n.get()),
            lexicon: MaskingLexicon::builtin(),
        }
    }

    pub fn with_parallel(mut self, parallel: usize) -> Self {
        self.parallel = parallel;
        self
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        if self.parallel == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallel)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }
}

/// Seed for one problem: the run seed mixed with a hash of the problem id,
/// so results do not depend on the problem's position in the corpus.
pub fn problem_seed(seed: u64, problem_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in problem_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// λ traces for every problem of `corpus`. `reference` overrides the
/// corpus' own reference population.
pub fn score_corpus(
    corpus: &Corpus,
    reference: Option<&[DocumentSource]>,
    harness: &Harness,
) -> Result<Vec<LambdaTrace>> {
    harness.lambda.validate()?;
    let reference = reference.unwrap_or(&corpus.reference_docs);
    if reference.is_empty() {
        return Err(Error::Data("no reference documents available".into()));
    }
    let pool = pooled_sentences(reference, &harness.lexicon)?;
    harness.pool()?.install(|| {
        corpus
            .problems
            .par_iter()
            .map(|p| {
                let unknown = pooled_sentences(&p.unknown, &harness.lexicon)?;
                let known = pooled_sentences(&p.known, &harness.lexicon)?;
                let cfg = harness.lambda.with_seed(problem_seed(harness.lambda.seed, &p.id));
                let mut trace = verify_sentences(&unknown, &known, &pool, &cfg)?;
                trace.problem = Some(p.id.clone());
                log::debug!("{}: λ = {:.4}", p.id, trace.total);
                Ok(trace)
            })
            .collect()
    })
}

fn require_labels(corpus: &Corpus, what: &str) -> Result<Vec<Label>> {
    corpus
        .problems
        .iter()
        .map(|p| {
            p.label
                .ok_or_else(|| Error::Data(format!("{what} problem {} has no label", p.id)))
        })
        .collect()
}

/// Fails when any candidate author appears in both corpora.
pub fn check_author_disjoint(train: &Corpus, test: &Corpus) -> Result<()> {
    let seen: HashSet<&str> = train.problems.iter().filter_map(|p| p.author.as_deref()).collect();
    if let Some(p) = test
        .problems
        .iter()
        .find(|p| p.author.as_deref().is_some_and(|a| seen.contains(a)))
    {
        return Err(Error::Data(format!(
            "author {} appears in both train and test splits",
            p.author.as_deref().unwrap_or_default()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub calibration: CalibrationModel,
    pub metrics: MetricsReport,
    pub train_scores: Vec<f64>,
    pub test_scores: Vec<f64>,
    pub test_log_lrs: Vec<f64>,
}

impl Evaluation {
    pub fn metrics_json(&self) -> String {
        serde_json::to_string_pretty(&self.metrics).expect("serialisable metrics")
    }
}

/// Score both splits, fit calibration on train only and report on test.
pub fn evaluate(
    train: &Corpus,
    test: &Corpus,
    reference: Option<&[DocumentSource]>,
    harness: &Harness,
) -> Result<Evaluation> {
    check_author_disjoint(train, test)?;
    let train_labels = require_labels(train, "train")?;
    let test_labels = require_labels(test, "test")?;
    let train_scores: Vec<f64> = score_corpus(train, reference, harness)?
        .iter()
        .map(|t| t.total)
        .collect();
    let test_scores: Vec<f64> = score_corpus(test, reference, harness)?
        .iter()
        .map(|t| t.total)
        .collect();
    evaluate_scores(&train_scores, &train_labels, &test_scores, &test_labels)
}

/// The calibration and metrics part of [`evaluate`] on precomputed scores.
pub fn evaluate_scores(
    train_scores: &[f64],
    train_labels: &[Label],
    test_scores: &[f64],
    test_labels: &[Label],
) -> Result<Evaluation> {
    let calibration = fit_calibration(train_scores, train_labels)?;
    if calibration.separated {
        log::warn!("training scores separate the classes; slope capped");
    }
    let test_log_lrs: Vec<f64> = test_scores.iter().map(|&s| calibration.apply(s)).collect();
    let metrics = MetricsReport::from_scores(&test_log_lrs, Some(test_scores), test_labels)?;
    Ok(Evaluation {
        calibration,
        metrics,
        train_scores: train_scores.to_vec(),
        test_scores: test_scores.to_vec(),
        test_log_lrs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub order: usize,
    pub refs: usize,
    pub accuracy: f64,
    pub auc: f64,
    pub cllr: f64,
}

/// Evaluate every `(order, refs)` pair.
pub fn sweep(
    train: &Corpus,
    test: &Corpus,
    orders: &[usize],
    refs: &[usize],
    harness: &Harness,
) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::with_capacity(orders.len() * refs.len());
    for &order in orders {
        for &r in refs {
            let mut h = harness.clone();
            h.lambda.order = order;
            h.lambda.refs = r;
            let ev = evaluate(train, test, None, &h)?;
            log::info!("order {order}, refs {r}: accuracy {:.3}", ev.metrics.accuracy);
            cells.push(SweepCell {
                order,
                refs: r,
                accuracy: ev.metrics.accuracy,
                auc: ev.metrics.auc,
                cllr: ev.metrics.cllr,
            });
        }
    }
    Ok(cells)
}

pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("order,refs,accuracy,auc,cllr\n");
    for c in cells {
        let _ = writeln!(out, "{},{},{:.6},{:.6},{:.6}", c.order, c.refs, c.accuracy, c.auc, c.cllr);
    }
    out
}

/// One corpus taking part in a cross-genre comparison.
#[derive(Clone, Debug)]
pub struct GenreCorpus {
    pub name: String,
    pub train: Corpus,
    pub test: Corpus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossGenre {
    pub names: Vec<String>,
    /// `[i][j]`: corpus `i` evaluated with references from corpus `j`.
    pub accuracy: Vec<Vec<f64>>,
    pub cllr: Vec<Vec<f64>>,
    /// Diagonal minus cell; positive means references from `j` hurt.
    pub accuracy_loss: Vec<Vec<f64>>,
    /// Cell minus diagonal, so that positive again means worse.
    pub cllr_loss: Vec<Vec<f64>>,
}

pub fn crossgenre(corpora: &[GenreCorpus], harness: &Harness) -> Result<CrossGenre> {
    let k = corpora.len();
    if k == 0 {
        return Err(Error::Argument("no corpora given".into()));
    }
    let mut accuracy = vec![vec![0.0; k]; k];
    let mut cllr_m = vec![vec![0.0; k]; k];
    for (i, ci) in corpora.iter().enumerate() {
        for (j, cj) in corpora.iter().enumerate() {
            let ev = evaluate(&ci.train, &ci.test, Some(&cj.test.reference_docs), harness)?;
            log::info!("{} with {} references: accuracy {:.3}", ci.name, cj.name, ev.metrics.accuracy);
            accuracy[i][j] = ev.metrics.accuracy;
            cllr_m[i][j] = ev.metrics.cllr;
        }
    }
    // Positive entries mean the off-diagonal reference did worse.
    let loss = |m: &Vec<Vec<f64>>, higher_is_better: bool| -> Vec<Vec<f64>> {
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if higher_is_better { m[i][i] - m[i][j] } else { m[i][j] - m[i][i] })
                    .collect()
            })
            .collect()
    };
    Ok(CrossGenre {
        names: corpora.iter().map(|c| c.name.clone()).collect(),
        accuracy_loss: loss(&accuracy, true),
        cllr_loss: loss(&cllr_m, false),
        accuracy,
        cllr: cllr_m,
    })
}

impl CrossGenre {
    /// Long-format CSV with one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("corpus,reference,accuracy,cllr,accuracy_loss,cllr_loss\n");
        for (i, a) in self.names.iter().enumerate() {
            for (j, b) in self.names.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{a},{b},{:.6},{:.6},{:.6},{:.6}",
                    self.accuracy[i][j], self.cllr[i][j], self.accuracy_loss[i][j], self.cllr_loss[i][j]
                );
            }
        }
        out
    }
}

/// Cllr of raw λ scores read directly as natural-log likelihood ratios.
pub fn raw_cllr(scores: &[f64], labels: &[Label]) -> Result<f64> {
    Ok(cllr(&LrSet::from_labelled(scores, labels)?))
}
