//! Evaluation: log-likelihood-ratio cost and its decomposition, ROC AUC and
//! the usual classification rates.

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::calibration::softplus;
use crate::corpus::Label;
use crate::error::{Error, Result};

/// Likelihood ratios split by ground truth, held as natural logs.
#[derive(Clone, Debug, PartialEq)]
pub struct LrSet {
    same_source: Vec<f64>,
    different_source: Vec<f64>,
}

impl LrSet {
    /// From linear-scale ratios; all must be strictly positive.
    pub fn from_lrs(same_source: &[f64], different_source: &[f64]) -> Result<Self> {
        let to_log = |v: &[f64]| -> Result<Vec<f64>> {
            v.iter()
                .map(|&lr| {
                    if lr > 0.0 {
                        Ok(lr.ln())
                    } else {
                        Err(Error::Argument(format!("likelihood ratio {lr} is not positive")))
                    }
                })
                .collect()
        };
        Self::from_log_lrs(to_log(same_source)?, to_log(different_source)?)
    }

    /// From natural-log ratios.
    pub fn from_log_lrs(same_source: Vec<f64>, different_source: Vec<f64>) -> Result<Self> {
        if same_source.is_empty() || different_source.is_empty() {
            return Err(Error::Argument(
                "Cllr needs at least one same-source and one different-source ratio".into(),
            ));
        }
        if same_source
            .iter()
            .chain(&different_source)
            .any(|x| x.is_nan() || *x == f64::NEG_INFINITY)
        {
            return Err(Error::Argument("likelihood ratios must be positive numbers".into()));
        }
        Ok(Self {
            same_source,
            different_source,
        })
    }

    /// Split labelled log-LRs by class.
    pub fn from_labelled(log_lrs: &[f64], labels: &[Label]) -> Result<Self> {
        check_lengths(log_lrs.len(), labels.len())?;
        let mut same = Vec::new();
        let mut diff = Vec::new();
        for (&x, l) in log_lrs.iter().zip(labels) {
            if l.is_same_author() {
                same.push(x);
            } else {
                diff.push(x);
            }
        }
        Self::from_log_lrs(same, diff)
    }

    pub fn same_source(&self) -> &[f64] {
        &self.same_source
    }

    pub fn different_source(&self) -> &[f64] {
        &self.different_source
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Argument(format!("{a} scores but {b} labels")));
    }
    Ok(())
}

/// `½ [ mean_Y log2(1 + 1/LR) + mean_N log2(1 + LR) ]` on natural-log
/// inputs; `±∞` are accepted and handled in the limit.
fn cllr_of_logs(same: &[f64], diff: &[f64]) -> f64 {
    let y: f64 = same.iter().map(|&l| softplus(-l)).sum::<f64>() / same.len() as f64;
    let n: f64 = diff.iter().map(|&l| softplus(l)).sum::<f64>() / diff.len() as f64;
    0.5 * (y + n) / LN_2
}

pub fn cllr(lrs: &LrSet) -> f64 {
    cllr_of_logs(&lrs.same_source, &lrs.different_source)
}

/// Isotonic (non-decreasing) least-squares fit of `targets` against the
/// order of `scores`, by pool-adjacent-violators. Tied scores always share
/// one fitted value. Returns fitted values aligned with the input.
pub fn isotonic_fit(scores: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    check_lengths(scores.len(), targets.len())?;
    Ok(pav_blocks(scores, targets)
        .into_iter()
        .fold(vec![0.0; scores.len()], |mut out, block| {
            let value = block.sum / block.members.len() as f64;
            for i in block.members {
                out[i] = value;
            }
            out
        }))
}

struct Block {
    sum: f64,
    members: Vec<usize>,
}

fn pav_blocks(scores: &[f64], targets: &[f64]) -> Vec<Block> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));
    // One initial block per group of tied scores.
    let mut groups: Vec<Block> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        match groups.last_mut() {
            Some(last) if pos > 0 && scores[order[pos - 1]] == scores[i] => {
                last.sum += targets[i];
                last.members.push(i);
            }
            _ => groups.push(Block {
                sum: targets[i],
                members: vec![i],
            }),
        }
    }
    let mut blocks: Vec<Block> = Vec::with_capacity(groups.len());
    for group in groups {
        blocks.push(group);
        // Merge backwards while the means decrease. Compare means by
        // cross-multiplication to stay exact on integer sums.
        while blocks.len() > 1 {
            let b = &blocks[blocks.len() - 1];
            let a = &blocks[blocks.len() - 2];
            if a.sum * b.members.len() as f64 > b.sum * a.members.len() as f64 {
                let b = blocks.pop().unwrap();
                let a = blocks.last_mut().unwrap();
                a.sum += b.sum;
                a.members.extend(b.members);
            } else {
                break;
            }
        }
    }
    blocks
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CllrDecomposition {
    pub cllr: f64,
    /// Discrimination loss: Cllr after optimal monotone recalibration.
    pub cllr_min: f64,
    /// Calibration loss, `cllr - cllr_min`.
    pub cllr_cal: f64,
}

/// Optimally recalibrated log-LRs for labelled scores: the PAV posterior of
/// each score's block divided by the empirical prior odds. Pure blocks give
/// `±∞`.
pub fn pav_log_lrs(log_lrs: &[f64], labels: &[Label]) -> Result<Vec<f64>> {
    check_lengths(log_lrs.len(), labels.len())?;
    let n_y = labels.iter().filter(|l| l.is_same_author()).count();
    let n_n = labels.len() - n_y;
    if n_y == 0 || n_n == 0 {
        return Err(Error::Argument("both classes are required".into()));
    }
    let targets: Vec<f64> = labels
        .iter()
        .map(|l| if l.is_same_author() { 1.0 } else { 0.0 })
        .collect();
    let prior = (n_y as f64).ln() - (n_n as f64).ln();
    let mut out = vec![0.0; log_lrs.len()];
    for block in pav_blocks(log_lrs, &targets) {
        let ys = block.sum;
        let ns = block.members.len() as f64 - ys;
        let value = ys.ln() - ns.ln() - prior;
        for i in block.members {
            out[i] = value;
        }
    }
    Ok(out)
}

/// Cllr of `log_lrs` together with its discrimination/calibration split.
pub fn cllr_min(log_lrs: &[f64], labels: &[Label]) -> Result<CllrDecomposition> {
    let actual = cllr(&LrSet::from_labelled(log_lrs, labels)?);
    let optimal = pav_log_lrs(log_lrs, labels)?;
    let (mut same, mut diff) = (Vec::new(), Vec::new());
    for (&x, l) in optimal.iter().zip(labels) {
        if l.is_same_author() {
            same.push(x);
        } else {
            diff.push(x);
        }
    }
    let min = cllr_of_logs(&same, &diff);
    Ok(CllrDecomposition {
        cllr: actual,
        cllr_min: min,
        cllr_cal: actual - min,
    })
}

/// Area under the ROC curve by the rank statistic; ties count one half.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<f64> {
    check_lengths(scores.len(), labels.len())?;
    let n_y = labels.iter().filter(|l| l.is_same_author()).count();
    let n_n = labels.len() - n_y;
    if n_y == 0 || n_n == 0 {
        return Err(Error::Argument("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));
    // Midranks over tie groups.
    let mut rank_sum_y = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if labels[k].is_same_author() {
                rank_sum_y += mid;
            }
        }
        i = j + 1;
    }
    let (ny, nn) = (n_y as f64, n_n as f64);
    Ok((rank_sum_y - ny * (ny + 1.0) / 2.0) / (ny * nn))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
}

/// Rates with Y as the positive class. Undefined precision or recall
/// (no positive predictions / no positive labels) is reported as 0.
pub fn classification_metrics(decisions: &[Label], labels: &[Label]) -> Result<ClassificationReport> {
    check_lengths(decisions.len(), labels.len())?;
    if labels.is_empty() {
        return Err(Error::Argument("no cases to evaluate".into()));
    }
    let mut c = Confusion::default();
    for (d, l) in decisions.iter().zip(labels) {
        match (d, l) {
            (Label::Y, Label::Y) => c.tp += 1,
            (Label::N, Label::Y) => c.fn_ += 1,
            (Label::Y, Label::N) => c.fp += 1,
            (Label::N, Label::N) => c.tn += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(ClassificationReport {
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision,
        recall,
        f1,
        confusion: c,
    })
}

/// Natural-log LR to the log10 scale used in forensic reporting.
pub fn to_log10(log_lr: f64) -> f64 {
    log_lr / std::f64::consts::LN_10
}

/// Everything reported for one evaluated test set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub accuracy: f64,
    pub auc: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub confusion: Confusion,
    /// Cllr of the raw scores read directly as natural-log LRs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cllr_raw: Option<f64>,
    pub cllr: f64,
    pub cllr_min: f64,
    pub cllr_cal: f64,
}

impl MetricsReport {
    /// Build the report from calibrated log-LRs (decisions at `Λ > 0`) and,
    /// optionally, the raw scores they came from.
    pub fn from_scores(log_lrs: &[f64], raw: Option<&[f64]>, labels: &[Label]) -> Result<Self> {
        let decisions: Vec<Label> = log_lrs.iter().map(|&x| crate::calibration::decide(x)).collect();
        let cls = classification_metrics(&decisions, labels)?;
        let auc = roc_auc(log_lrs, labels)?;
        let dec = cllr_min(log_lrs, labels)?;
        let cllr_raw = match raw {
            Some(r) => Some(cllr(&LrSet::from_labelled(r, labels)?)),
            None => None,
        };
        Ok(Self {
            n: labels.len(),
            accuracy: cls.accuracy,
            auc,
            f1: cls.f1,
            precision: cls.precision,
            recall: cls.recall,
            confusion: cls.confusion,
            cllr_raw,
            cllr: dec.cllr,
            cllr_min: dec.cllr_min,
            cllr_cal: dec.cllr_cal,
        })
    }
}
