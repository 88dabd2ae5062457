//! Adversary pipeline: slot-structure inference, exploratory-attack
//! surrogate training, retraining-phase detection, and attack planning
//! (evasion, causative, budget-equalized jamming).

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SlotStructure;
use crate::neural::{classify_score, Classifier, Dataset, NeuralError};
use crate::transmitter::{self, SenseWindow, TransmitterError};

#[derive(Debug, Error, PartialEq)]
pub enum AdversaryError {
    #[error("ACK timeline is empty")]
    EmptyTimeline,
    #[error("ACK inter-arrival times must be positive")]
    NonPositiveInterval,
    #[error("slot-length reduction did not converge")]
    NoConvergence,
    #[error("no ACK-bearing slot with a power step observed")]
    NoAckSlots,
    #[error("at least two accuracy-change instants required")]
    TooFewInstants,
    #[error("trace of length {len} is too short for window length {n_new}")]
    TraceTooShort { len: usize, n_new: usize },
    #[error(transparent)]
    Training(#[from] NeuralError),
}

/// Observed ACK inter-arrival times plus the jitter tolerance used when a
/// residue counts as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AckTimeline {
    pub intervals: Vec<f64>,
    pub epsilon: f64,
}

impl AckTimeline {
    pub fn new(intervals: Vec<f64>, epsilon: f64) -> Self {
        Self { intervals, epsilon }
    }
}

/// Iteratively reduce the interval list by replacing each entry with its
/// residue modulo the current minimum, dropping residues below epsilon,
/// until one element remains. On exact integer multiples this is the GCD.
///
/// If every interval shares a common multiple k of the true slot length,
/// the reduction returns k times the slot length.
pub fn infer_slot_length(timeline: &AckTimeline) -> Result<f64, AdversaryError> {
    if timeline.intervals.is_empty() {
        return Err(AdversaryError::EmptyTimeline);
    }
    if timeline.intervals.iter().any(|&t| !(t > 0.0)) {
        return Err(AdversaryError::NonPositiveInterval);
    }
    let zero_tol = timeline.epsilon * (1.0 + 1e-9) + 1e-12;
    let mut list = timeline.intervals.clone();
    for _round in 0..10_000 {
        if list.len() == 1 {
            return Ok(list[0]);
        }
        let t_min = list.iter().copied().fold(f64::INFINITY, f64::min);
        let mut next = vec![t_min];
        let mut min_seen = false;
        for &t in &list {
            if !min_seen && t == t_min {
                min_seen = true;
                continue;
            }
            let k = (t / t_min).floor();
            let residue = t - k * t_min;
            if residue > zero_tol {
                next.push(residue);
            }
        }
        list = next;
    }
    Err(AdversaryError::NoConvergence)
}

/// Estimated split of a slot into sensing and data periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotPhaseEstimate {
    pub sensing_fraction: f64,
    pub data_fraction: f64,
}

impl SlotPhaseEstimate {
    pub fn as_slot_structure(&self) -> SlotStructure {
        SlotStructure {
            sensing_fraction: self.sensing_fraction,
            data_fraction: self.data_fraction,
            feedback_fraction: 0.0,
        }
    }
}

/// Locate the power step-up inside each ACK-bearing slot trace (per-tick
/// powers); the median split point over usable slots estimates the
/// sensing period. Slots without a clear step are excluded.
pub fn identify_slot_phases(slot_traces: &[Vec<f64>]) -> Result<SlotPhaseEstimate, AdversaryError> {
    let mut splits = Vec::new();
    for ticks in slot_traces {
        if ticks.is_empty() {
            continue;
        }
        let min = ticks.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ticks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // No step: the slot never rises meaningfully above its floor.
        if max - min < 0.25 * max.abs().max(1e-12) {
            continue;
        }
        let threshold = (min + max) / 2.0;
        if let Some(idx) = ticks.iter().position(|&p| p > threshold) {
            splits.push(idx as f64 / ticks.len() as f64);
        }
    }
    if splits.is_empty() {
        return Err(AdversaryError::NoAckSlots);
    }
    splits.sort_by(f64::total_cmp);
    let sensing = splits[splits.len() / 2];
    Ok(SlotPhaseEstimate {
        sensing_fraction: sensing,
        data_fraction: 1.0 - sensing,
    })
}

/// Build the surrogate training set: the adversary's own sensing windows
/// as features, ACK presence as labels.
pub fn collect_training_data(
    powers: &[f64],
    acks: &[bool],
    n_new: usize,
) -> Result<Dataset, AdversaryError> {
    transmitter::collect_training_data(powers, acks, n_new).map_err(|e| match e {
        TransmitterError::TraceTooShort { len, n_new } => {
            AdversaryError::TraceTooShort { len, n_new }
        }
        TransmitterError::LengthMismatch => AdversaryError::TraceTooShort {
            len: powers.len().min(acks.len()),
            n_new,
        },
        TransmitterError::EmptyTrace => AdversaryError::TraceTooShort { len: 0, n_new },
        TransmitterError::Training(err) => AdversaryError::Training(err),
    })
}

/// The adversary's operating state: surrogate classifier, sliding window
/// of its own sensing results, and its transmit power.
#[derive(Debug, Clone)]
pub struct AdversaryState {
    pub classifier: Classifier,
    pub window: SenseWindow,
    pub transmit_power: f64,
}

impl AdversaryState {
    pub fn new(classifier: Classifier, n_new: usize, transmit_power: f64) -> Self {
        Self {
            classifier,
            window: SenseWindow::new(n_new),
            transmit_power,
        }
    }

    /// Push the adversary's own sensing result and predict whether the
    /// slot would carry an ACK absent any attack. None until the window
    /// fills.
    pub fn predict_ack(&mut self, p_t: f64) -> Option<bool> {
        self.window.push(p_t);
        if !self.window.is_full() {
            return None;
        }
        Some(self.classifier.classify(self.window.features()))
    }
}

/// Instants where a windowed accuracy series shifts by more than the
/// threshold between consecutive windows.
pub fn detect_accuracy_changes(accuracy: &[f64], threshold: f64) -> Vec<f64> {
    accuracy
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[1] - w[0]).abs() > threshold)
        .map(|(i, _)| (i + 1) as f64)
        .collect()
}

/// Closed-form least squares for the retraining period: the argmin of
/// sum_i [t_i - (t_1 + (i-1) delta)]^2 over delta.
pub fn estimate_retrain_period(instants: &[f64]) -> Result<f64, AdversaryError> {
    if instants.len() < 2 {
        return Err(AdversaryError::TooFewInstants);
    }
    let t1 = instants[0];
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &t) in instants.iter().enumerate() {
        let k = i as f64;
        num += k * (t - t1);
        den += k * k;
    }
    Ok(num / den)
}

/// Bisect the retraining-phase length: probe the causative impact at l
/// and l + delta; equal impact means the phase ends at or before l.
/// Stops when the bracket shrinks to delta and returns the lower bound.
pub fn resolve_retrain_length<F>(
    mut lower: f64,
    mut upper: f64,
    delta: f64,
    equal_tolerance: f64,
    mut probe: F,
) -> Result<f64, AdversaryError>
where
    F: FnMut(f64) -> Result<f64, AdversaryError>,
{
    debug_assert!(lower < upper && delta > 0.0);
    loop {
        let l = (lower + upper) / 2.0;
        let at_l = probe(l)?;
        let at_l_plus = probe(l + delta)?;
        if (at_l_plus - at_l).abs() <= equal_tolerance {
            upper = l;
        } else {
            lower = l;
        }
        if upper - lower <= delta {
            return Ok(lower);
        }
    }
}

/// Resolved retraining schedule parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrainEstimate {
    pub period: f64,
    pub lower: f64,
    pub upper: f64,
    pub probe_step: f64,
    pub resolved_length: Option<f64>,
}

/// Per-slot adversary action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotAction {
    None,
    /// Transmit during the sensing period to falsify the victim's input.
    PoisonSensing,
    /// Transmit during the data period to break the receiver's SINR.
    JamData,
}

/// Which slots the adversary transmits in and during which slot phase.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackPlan {
    pub actions: Vec<SlotAction>,
}

impl AttackPlan {
    pub fn idle(n: usize) -> Self {
        Self {
            actions: vec![SlotAction::None; n],
        }
    }

    /// Reference plan that poisons the sensing period of every slot; the
    /// energy baseline for budget equalization.
    pub fn all_poison(n: usize) -> Self {
        Self {
            actions: vec![SlotAction::PoisonSensing; n],
        }
    }

    pub fn poison_count(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| **a == SlotAction::PoisonSensing)
            .count()
    }

    pub fn jam_count(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| **a == SlotAction::JamData)
            .count()
    }

    /// Transmit-time ledger in slot-length units.
    pub fn energy(&self, s: &SlotStructure) -> f64 {
        self.poison_count() as f64 * s.sensing_fraction
            + self.jam_count() as f64 * s.data_fraction
    }
}

/// Poison the sensing period of every slot the surrogate predicts an ACK
/// for.
pub fn plan_evasion(ack_scores: &[f64], tau: f64) -> AttackPlan {
    AttackPlan {
        actions: ack_scores
            .iter()
            .map(|&s| {
                if classify_score(s, tau) {
                    SlotAction::PoisonSensing
                } else {
                    SlotAction::None
                }
            })
            .collect(),
    }
}

/// Poison predicted-ACK slots, but only inside detected retraining
/// collection windows.
pub fn plan_causative(
    ack_scores: &[f64],
    tau: f64,
    collection_windows: &[Range<usize>],
) -> AttackPlan {
    let mut plan = AttackPlan::idle(ack_scores.len());
    for w in collection_windows {
        for i in w.clone() {
            if i < ack_scores.len() && classify_score(ack_scores[i], tau) {
                plan.actions[i] = SlotAction::PoisonSensing;
            }
        }
    }
    plan
}

/// Jam-slot quota under the same transmit-time energy as a reference
/// sensing-poisoning plan: poisoned slots spend a sensing period each,
/// jammed slots a data period each.
pub fn energy_budget(reference: &AttackPlan, s: &SlotStructure) -> f64 {
    debug_assert!(s.data_fraction > 0.0);
    reference.poison_count() as f64 * s.sensing_fraction / s.data_fraction
}

/// Jam the data period of the highest-scoring predicted-ACK slots, up to
/// the quota. Ties at the boundary keep the earlier slot.
pub fn plan_jamming(ack_scores: &[f64], tau: f64, quota: f64) -> AttackPlan {
    let mut plan = AttackPlan::idle(ack_scores.len());
    let budget = quota.floor().max(0.0) as usize;
    let mut ranked: Vec<(usize, f64)> = ack_scores
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, s)| classify_score(s, tau))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (idx, _) in ranked.into_iter().take(budget) {
        plan.actions[idx] = SlotAction::JamData;
    }
    plan
}
