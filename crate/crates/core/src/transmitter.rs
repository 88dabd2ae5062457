//! Transmitter lifecycle: collect labeled sensing windows, predict
//! idle/busy and transmit, retrain, and apply the score-gated defense.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::DefenseSpec;
use crate::neural::{
    classify_score, train, Classifier, Dataset, Hyperparams, NeuralError, Sample,
};

#[derive(Debug, Error, PartialEq)]
pub enum TransmitterError {
    #[error("trace of length {len} is too short for window length {n_new}")]
    TraceTooShort { len: usize, n_new: usize },
    #[error("prediction and truth traces differ in length")]
    LengthMismatch,
    #[error("empty trace")]
    EmptyTrace,
    #[error(transparent)]
    Training(#[from] NeuralError),
}

/// Ring of the most recent `n_new` sensing results, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseWindow {
    buf: Vec<f64>,
    cap: usize,
}

impl SenseWindow {
    pub fn new(cap: usize) -> Self {
        Self {
            buf: Vec::with_capacity(cap),
            cap,
        }
    }

    pub fn push(&mut self, p: f64) {
        if self.buf.len() == self.cap {
            self.buf.remove(0);
        }
        self.buf.push(p);
    }

    pub fn is_full(&self) -> bool {
        self.buf.len() == self.cap
    }

    pub fn features(&self) -> &[f64] {
        &self.buf
    }
}

/// Error counts and ratios of a classifier against ground truth, with the
/// positive class (busy/ACK) as the detection target.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassifierMetrics {
    pub n_md: u64,
    pub n_fa: u64,
    pub n_busy: u64,
    pub n_idle: u64,
}

impl ClassifierMetrics {
    /// Misdetection ratio; undefined when no positive samples exist.
    pub fn e_md(&self) -> Option<f64> {
        (self.n_busy > 0).then(|| self.n_md as f64 / self.n_busy as f64)
    }

    /// False-alarm ratio; undefined when no negative samples exist.
    pub fn e_fa(&self) -> Option<f64> {
        (self.n_idle > 0).then(|| self.n_fa as f64 / self.n_idle as f64)
    }

    /// max(e_MD, e_FA) over the defined ratios.
    pub fn e(&self) -> Option<f64> {
        match (self.e_md(), self.e_fa()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        }
    }
}

/// Build one labeled sample per slot `t >= n_new`: the window of the most
/// recent `n_new` powers as features, the slot's label as target.
pub fn collect_training_data(
    powers: &[f64],
    labels: &[bool],
    n_new: usize,
) -> Result<Dataset, TransmitterError> {
    if powers.len() != labels.len() {
        return Err(TransmitterError::LengthMismatch);
    }
    if powers.len() <= n_new {
        return Err(TransmitterError::TraceTooShort {
            len: powers.len(),
            n_new,
        });
    }
    let samples = (n_new..powers.len())
        .map(|t| Sample {
            features: powers[t + 1 - n_new..=t].to_vec(),
            label: labels[t],
        })
        .collect();
    Ok(Dataset::new(samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Transmit,
    Hold,
}

/// The transmitter's operating state: a trained classifier plus its
/// sliding sensing window.
#[derive(Debug, Clone)]
pub struct TransmitterState {
    pub classifier: Classifier,
    pub window: SenseWindow,
}

impl TransmitterState {
    pub fn new(classifier: Classifier, n_new: usize) -> Self {
        Self {
            classifier,
            window: SenseWindow::new(n_new),
        }
    }

    /// Push the latest sensing result and decide. Predictions are issued
    /// only once the window is full; transmit iff the window classifies
    /// as idle.
    pub fn predict(&mut self, p_t: f64) -> Option<Decision> {
        self.window.push(p_t);
        if !self.window.is_full() {
            return None;
        }
        let busy = self.classifier.classify(self.window.features());
        Some(if busy { Decision::Hold } else { Decision::Transmit })
    }
}

/// Compare per-slot busy predictions against ground truth.
pub fn evaluate(
    predicted_busy: &[bool],
    truth_busy: &[bool],
) -> Result<ClassifierMetrics, TransmitterError> {
    if predicted_busy.len() != truth_busy.len() {
        return Err(TransmitterError::LengthMismatch);
    }
    if truth_busy.is_empty() {
        return Err(TransmitterError::EmptyTrace);
    }
    let mut m = ClassifierMetrics::default();
    for (&p, &t) in predicted_busy.iter().zip(truth_busy) {
        if t {
            m.n_busy += 1;
            if !p {
                m.n_md += 1;
            }
        } else {
            m.n_idle += 1;
            if p {
                m.n_fa += 1;
            }
        }
    }
    Ok(m)
}

/// Fitted defense: flip eligibility thresholds around the decision
/// boundary plus the configured flip probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefenseConfig {
    pub pd: f64,
    pub flip_probability: f64,
    pub tau0: f64,
    pub tau1: f64,
}

impl DefenseConfig {
    /// Fit thresholds from a reference score trace (held-out test-phase
    /// scores) so that at most `pd` of each side of the boundary is
    /// eligible for flipping.
    pub fn fit(scores: &[f64], tau: f64, spec: DefenseSpec) -> Self {
        let (tau0, tau1) = select_defense_thresholds(scores, tau, spec.pd);
        Self {
            pd: spec.pd,
            flip_probability: spec.flip_probability,
            tau0,
            tau1,
        }
    }

    pub fn eligible(&self, score: f64) -> bool {
        score < self.tau0 || score > self.tau1
    }
}

/// Empirical-quantile thresholds: tau0 is the largest value whose
/// below-count equals floor(pd * |{p < tau}|), symmetrically for tau1.
/// pd = 0 yields sentinels that select no slot.
pub fn select_defense_thresholds(scores: &[f64], tau: f64, pd: f64) -> (f64, f64) {
    let mut below: Vec<f64> = scores.iter().copied().filter(|&s| s < tau).collect();
    let mut above: Vec<f64> = scores.iter().copied().filter(|&s| s > tau).collect();
    below.sort_by(f64::total_cmp);
    above.sort_by(f64::total_cmp);

    let k0 = (pd * below.len() as f64).floor() as usize;
    let tau0 = if k0 == 0 {
        f64::NEG_INFINITY
    } else if k0 >= below.len() {
        tau
    } else {
        below[k0]
    };

    let k1 = (pd * above.len() as f64).floor() as usize;
    let tau1 = if k1 == 0 {
        f64::INFINITY
    } else if k1 >= above.len() {
        tau
    } else {
        above[above.len() - k1 - 1]
    };

    (tau0, tau1)
}

/// Outcome of one defended decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefendedDecision {
    pub decision: Decision,
    pub score: f64,
    /// Classifier label before any flip (true = busy).
    pub classified_busy: bool,
    pub flipped: bool,
}

/// Classify the window, then invert the label with the configured
/// probability when the score falls outside [tau0, tau1].
pub fn decide_with_defense<R: Rng>(
    classifier: &Classifier,
    window: &[f64],
    defense: &DefenseConfig,
    rng: &mut R,
) -> DefendedDecision {
    let score = classifier.score(window);
    let classified_busy = classify_score(score, classifier.boundary);
    let mut label = classified_busy;
    let mut flipped = false;
    if defense.eligible(score) && rng.gen_bool(defense.flip_probability) {
        label = !label;
        flipped = true;
    }
    DefendedDecision {
        decision: if label { Decision::Hold } else { Decision::Transmit },
        score,
        classified_busy,
        flipped,
    }
}

/// Retrain from scratch on a new (possibly poisoned) trace with the
/// incumbent hyperparameters. The caller supplies the labels, which lets
/// it choose between ground-truth and self-labeled retraining.
pub fn retrain(
    hyperparams: &Hyperparams,
    powers: &[f64],
    labels: &[bool],
    n_new: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Classifier, TransmitterError> {
    let data = collect_training_data(powers, labels, n_new)?;
    Ok(train(&data, hyperparams, rng)?)
}
