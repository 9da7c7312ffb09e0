//! Logistic-regression calibration of raw scores into log-likelihood ratios.
//!
//! A model `P(Y | λ) = σ(a + bλ)` is fit by maximum likelihood. Its log-odds
//! include the training prior `log(n_Y / n_N)`, which is subtracted so that
//! the calibrated value `Λ = a + bλ − prior` is a log-LR. Everything here
//! is in natural logs.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Bound on `|b|` when the training scores separate the classes and the
/// likelihood has no finite maximiser.
pub const SLOPE_CAP: f64 = 1e3;

const GRAD_TOL: f64 = 1e-8;
const MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub intercept: f64,
    pub slope: f64,
    #[serde(default)]
    pub prior_log_odds: f64,
    /// Set when the slope was capped because the classes were separable.
    #[serde(default)]
    pub separated: bool,
}

impl CalibrationModel {
    pub fn identity() -> Self {
        Self {
            intercept: 0.0,
            slope: 1.0,
            prior_log_odds: 0.0,
            separated: false,
        }
    }

    /// Calibrated natural-log likelihood ratio.
    pub fn apply(&self, lambda: f64) -> f64 {
        self.intercept + self.slope * lambda - self.prior_log_odds
    }

    /// `P(Y | λ)` under the training prior.
    pub fn probability(&self, lambda: f64) -> f64 {
        sigmoid(self.intercept + self.slope * lambda)
    }
}

pub fn apply_calibration(m: &CalibrationModel, lambda: f64) -> f64 {
    m.apply(lambda)
}

/// Y exactly when the log-LR is strictly positive.
pub fn decide(log_lr: f64) -> Label {
    if log_lr > 0.0 {
        Label::Y
    } else {
        Label::N
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x == f64::INFINITY {
        f64::INFINITY
    } else if x == f64::NEG_INFINITY {
        0.0
    } else if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn log_likelihood(z: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    z.iter()
        .zip(y)
        .map(|(&zi, &yi)| {
            let eta = a + b * zi;
            yi * eta - softplus(eta)
        })
        .sum()
}

/// Fit the intercept for a fixed slope by one-dimensional Newton steps.
fn fit_intercept(z: &[f64], y: &[f64], b: f64, start: f64) -> f64 {
    let mut a = start;
    for _ in 0..MAX_ITER {
        let (mut g, mut h) = (0.0, 0.0);
        for (&zi, &yi) in z.iter().zip(y) {
            let p = sigmoid(a + b * zi);
            g += yi - p;
            h += p * (1.0 - p);
        }
        if g.abs() <= GRAD_TOL || h <= 0.0 {
            break;
        }
        let mut step = g / h;
        let base = log_likelihood(z, y, a, b);
        while log_likelihood(z, y, a + step, b) < base && step.abs() > 1e-15 {
            step *= 0.5;
        }
        a += step;
    }
    a
}

pub fn fit_calibration(scores: &[f64], labels: &[Label]) -> Result<CalibrationModel> {
    if scores.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::Fit(format!("non-finite score {bad}")));
    }
    let n_y = labels.iter().filter(|l| l.is_same_author()).count();
    let n_n = labels.len() - n_y;
    if n_y == 0 || n_n == 0 {
        return Err(Error::Fit("both Y and N examples are required".into()));
    }
    let prior_log_odds = (n_y as f64 / n_n as f64).ln();
    let y: Vec<f64> = labels
        .iter()
        .map(|l| if l.is_same_author() { 1.0 } else { 0.0 })
        .collect();

    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let sd = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return Ok(CalibrationModel {
            intercept: prior_log_odds,
            slope: 0.0,
            prior_log_odds,
            separated: false,
        });
    }
    // Work on standardised scores; map back at the end.
    let z: Vec<f64> = scores.iter().map(|s| (s - mean) / sd).collect();
    let to_original = |a: f64, b: f64| (a - b * mean / sd, b / sd);

    let (mut min_y, mut max_y, mut min_n, mut max_n) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (&s, l) in scores.iter().zip(labels) {
        if l.is_same_author() {
            min_y = min_y.min(s);
            max_y = max_y.max(s);
        } else {
            min_n = min_n.min(s);
            max_n = max_n.max(s);
        }
    }
    let capped = |sign: f64| {
        let b_std = sign * SLOPE_CAP * sd;
        let a_std = fit_intercept(&z, &y, b_std, 0.0);
        let (intercept, slope) = to_original(a_std, b_std);
        CalibrationModel {
            intercept,
            slope,
            prior_log_odds,
            separated: true,
        }
    };
    if max_n <= min_y {
        return Ok(capped(1.0));
    }
    if max_y <= min_n {
        return Ok(capped(-1.0));
    }

    let (mut a, mut b) = (0.0_f64, 0.0_f64);
    for _ in 0..MAX_ITER {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&zi, &yi) in z.iter().zip(&y) {
            let p = sigmoid(a + b * zi);
            let w = p * (1.0 - p);
            ga += yi - p;
            gb += (yi - p) * zi;
            haa += w;
            hab += w * zi;
            hbb += w * zi * zi;
        }
        if ga.hypot(gb) <= GRAD_TOL {
            break;
        }
        let det = haa * hbb - hab * hab;
        if det <= 0.0 || !det.is_finite() {
            break;
        }
        let mut da = (hbb * ga - hab * gb) / det;
        let mut db = (haa * gb - hab * ga) / det;
        let base = log_likelihood(&z, &y, a, b);
        while log_likelihood(&z, &y, a + da, b + db) < base && da.hypot(db) > 1e-15 {
            da *= 0.5;
            db *= 0.5;
        }
        a += da;
        b += db;
        if b.abs() > SLOPE_CAP * sd {
            return Ok(capped(b.signum()));
        }
    }
    let (intercept, slope) = to_original(a, b);
    Ok(CalibrationModel {
        intercept,
        slope,
        prior_log_odds,
        separated: false,
    })
}
