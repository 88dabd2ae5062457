//! Hyperparameter search minimizing e(C) = max(e_MD, e_FA): greedy
//! sequential fixing and a single successive-halving bracket.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::neural::{Classifier, Dataset, Hyperparams, NeuralError};

/// Candidate lists per hyperparameter. Defaults are always present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpace {
    pub hidden_layers: Vec<usize>,
    pub neurons: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    pub training_steps: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub boundaries: Vec<f64>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            hidden_layers: vec![1, 2, 3, 5, 10],
            neurons: vec![20, 50, 89, 100, 109, 119, 200],
            batch_sizes: vec![50, 100, 200],
            training_steps: vec![250, 500, 1000, 2000],
            learning_rates: vec![0.01, 0.05, 0.1],
            boundaries: vec![0.3, 0.4, 0.5, 0.6, 0.7],
        }
    }
}

impl SearchSpace {
    /// Random setting with per-layer neuron counts drawn independently.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Hyperparams {
        let hidden_layers = self.hidden_layers[rng.gen_range(0..self.hidden_layers.len())];
        let neurons_per_layer = (0..hidden_layers)
            .map(|_| self.neurons[rng.gen_range(0..self.neurons.len())])
            .collect();
        Hyperparams {
            hidden_layers,
            neurons_per_layer,
            batch_size: self.batch_sizes[rng.gen_range(0..self.batch_sizes.len())],
            training_steps: self.training_steps[rng.gen_range(0..self.training_steps.len())],
            learning_rate: self.learning_rates[rng.gen_range(0..self.learning_rates.len())],
            decision_boundary: self.boundaries[rng.gen_range(0..self.boundaries.len())],
        }
    }
}

/// A search outcome: the setting and its validation objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub hyperparams: Hyperparams,
    pub objective: f64,
}

/// Validation objective e = max(e_MD, e_FA) for a trained classifier,
/// with the positive class (busy/ACK) as the detection target.
pub fn objective(clf: &Classifier, validation: &Dataset) -> Result<f64, NeuralError> {
    if validation.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    if !validation.has_both_classes() {
        return Err(NeuralError::SingleClass);
    }
    let mut n_pos = 0u64;
    let mut n_neg = 0u64;
    let mut miss = 0u64;
    let mut false_alarm = 0u64;
    for s in &validation.samples {
        let predicted = clf.classify(&s.features);
        if s.label {
            n_pos += 1;
            if !predicted {
                miss += 1;
            }
        } else {
            n_neg += 1;
            if predicted {
                false_alarm += 1;
            }
        }
    }
    let e_md = miss as f64 / n_pos as f64;
    let e_fa = false_alarm as f64 / n_neg as f64;
    Ok(e_md.max(e_fa))
}

/// Greedy sequential fixing: starting from the defaults, sweep one
/// hyperparameter at a time holding the others fixed, keeping the argmin
/// after each sweep. Ties keep the incumbent. One full pass.
pub fn sequential_fixing<F>(space: &SearchSpace, mut eval: F) -> CandidateResult
where
    F: FnMut(&Hyperparams) -> f64,
{
    let mut incumbent = Hyperparams::default();
    let mut best = eval(&incumbent);

    let sweep = |incumbent: &mut Hyperparams,
                 best: &mut f64,
                 eval: &mut F,
                 apply: &dyn Fn(&Hyperparams, usize) -> Hyperparams,
                 count: usize| {
        for idx in 0..count {
            let candidate = apply(incumbent, idx);
            if candidate == *incumbent {
                continue;
            }
            let e = eval(&candidate);
            if e < *best {
                *best = e;
                *incumbent = candidate;
            }
        }
    };

    sweep(
        &mut incumbent,
        &mut best,
        &mut eval,
        &|h, i| {
            let mut c = h.clone();
            c.hidden_layers = space.hidden_layers[i];
            c
        },
        space.hidden_layers.len(),
    );
    sweep(
        &mut incumbent,
        &mut best,
        &mut eval,
        &|h, i| {
            let mut c = h.clone();
            c.neurons_per_layer = vec![space.neurons[i]];
            c
        },
        space.neurons.len(),
    );
    sweep(
        &mut incumbent,
        &mut best,
        &mut eval,
        &|h, i| {
            let mut c = h.clone();
            c.batch_size = space.batch_sizes[i];
            c
        },
        space.batch_sizes.len(),
    );
    sweep(
        &mut incumbent,
        &mut best,
        &mut eval,
        &|h, i| {
            let mut c = h.clone();
            c.training_steps = space.training_steps[i];
            c
        },
        space.training_steps.len(),
    );
    sweep(
        &mut incumbent,
        &mut best,
        &mut eval,
        &|h, i| {
            let mut c = h.clone();
            c.learning_rate = space.learning_rates[i];
            c
        },
        space.learning_rates.len(),
    );
    sweep(
        &mut incumbent,
        &mut best,
        &mut eval,
        &|h, i| {
            let mut c = h.clone();
            c.decision_boundary = space.boundaries[i];
            c
        },
        space.boundaries.len(),
    );

    CandidateResult {
        hyperparams: incumbent,
        objective: best,
    }
}

/// One round of the halving trace: pool size and per-candidate budget.
#[derive(Debug, Clone, PartialEq)]
pub struct HalvingRound {
    pub pool: usize,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperbandTrace {
    pub rounds: Vec<HalvingRound>,
    /// Total training steps spent, counting full-budget evaluations.
    pub budget_spent: usize,
}

/// Successive halving (eta = 3): evaluate the pool at a small step
/// budget, keep the best third, triple the budget, repeat; the survivor
/// and the injected default are both trained at full budget and the
/// better one wins. `eval(h, Some(b))` trains with `b` steps in place of
/// `h.training_steps`; `eval(h, None)` trains at the setting's own budget.
pub fn hyperband<F>(
    space: &SearchSpace,
    initial_pool: usize,
    mut eval: F,
    rng: &mut ChaCha8Rng,
) -> (CandidateResult, HyperbandTrace)
where
    F: FnMut(&Hyperparams, Option<usize>) -> f64,
{
    let default = Hyperparams::default();
    let full_budget = default.training_steps;
    let n0 = initial_pool.max(1);
    let mut pool: Vec<Hyperparams> = if n0 == 1 {
        vec![space.sample(rng)]
    } else {
        let mut p = vec![default.clone()];
        p.extend((1..n0).map(|_| space.sample(rng)));
        p
    };

    let rounds_needed = {
        let mut r = 0u32;
        let mut n = pool.len();
        while n > 1 {
            n = n.div_ceil(3);
            r += 1;
        }
        r
    };

    let mut trace = HyperbandTrace {
        rounds: Vec::new(),
        budget_spent: 0,
    };
    let mut round = 0u32;
    while pool.len() > 1 {
        let budget = (full_budget / 3usize.pow(rounds_needed - round)).max(1);
        trace.rounds.push(HalvingRound {
            pool: pool.len(),
            budget,
        });
        let mut scored: Vec<(f64, Hyperparams)> = pool
            .drain(..)
            .map(|h| {
                trace.budget_spent += budget;
                (eval(&h, Some(budget)), h)
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let keep = scored.len().div_ceil(3);
        pool = scored.into_iter().take(keep).map(|(_, h)| h).collect();
        round += 1;
    }

    let winner = pool.pop().expect("pool never empties");
    trace.budget_spent += winner.training_steps;
    let winner_obj = eval(&winner, None);
    let mut best = CandidateResult {
        hyperparams: winner,
        objective: winner_obj,
    };
    if best.hyperparams != default && n0 > 1 {
        trace.budget_spent += default.training_steps;
        let default_obj = eval(&default, None);
        if default_obj < best.objective {
            best = CandidateResult {
                hyperparams: default,
                objective: default_obj,
            };
        }
    }
    (best, trace)
}
