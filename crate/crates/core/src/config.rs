//! Scenario definition and validation: node placement, powers, traffic,
//! slot structure, model choices, and deterministic seeding.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelModel;
use crate::harness::AttackKind;
use crate::neural::Hyperparams;

/// A node on the unitless 2-D grid. Powers are linear, normalized against
/// unit noise power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub position: [f64; 2],
    pub transmit_power: f64,
}

impl NodeSpec {
    pub fn new(id: &str, position: [f64; 2], transmit_power: f64) -> Self {
        Self {
            id: id.to_string(),
            position,
            transmit_power,
        }
    }
}

/// The fixed roles in the scenario plus any number of background sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nodes {
    pub transmitter: NodeSpec,
    pub receiver: NodeSpec,
    pub adversary: NodeSpec,
    pub sources: Vec<NodeSpec>,
}

/// Fractions of a slot spent sensing, transmitting data, and on feedback.
/// Feedback defaults to 0 and is folded into the data period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlotStructure {
    pub sensing_fraction: f64,
    pub data_fraction: f64,
    pub feedback_fraction: f64,
}

impl Default for SlotStructure {
    fn default() -> Self {
        Self {
            sensing_fraction: 0.1,
            data_fraction: 0.9,
            feedback_fraction: 0.0,
        }
    }
}

impl SlotStructure {
    pub fn fractions_sum(&self) -> f64 {
        self.sensing_fraction + self.data_fraction + self.feedback_fraction
    }
}

/// Defense parameters carried by the scenario. Thresholds are fitted at
/// run time from reference scores; see `transmitter::DefenseConfig`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefenseSpec {
    /// Maximum ratio of defense-eligible slots per side of the boundary.
    pub pd: f64,
    /// Probability an eligible decision is inverted.
    #[serde(default = "default_flip_probability")]
    pub flip_probability: f64,
}

fn default_flip_probability() -> f64 {
    0.5
}

impl DefenseSpec {
    pub fn new(pd: f64) -> Self {
        Self {
            pd,
            flip_probability: default_flip_probability(),
        }
    }
}

/// How the transmitter labels samples collected for retraining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RetrainLabeling {
    /// Labels come from the incumbent classifier's own decisions on the
    /// (possibly poisoned) windows.
    SelfLabel,
    /// Labels are the true channel states.
    GroundTruth,
}

/// Periodic retraining schedule of the transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrainSpec {
    /// Slots between the starts of consecutive retraining phases.
    pub period_slots: u64,
    /// Length of the data-collection window inside a retraining phase.
    pub collection_slots: u64,
    pub labeling: RetrainLabeling,
}

impl Default for RetrainSpec {
    fn default() -> Self {
        Self {
            period_slots: 2000,
            collection_slots: 500,
            labeling: RetrainLabeling::SelfLabel,
        }
    }
}

/// Full experiment parameterization. Immutable after validation; safe to
/// share read-only across parallel replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub nodes: Nodes,
    /// Linear noise power, normalized to 1.0.
    pub noise_power: f64,
    /// SINR threshold for a successful transmission.
    pub sinr_threshold: f64,
    pub channel_model: ChannelModel,
    /// Bernoulli packet arrival probability per source per slot.
    pub arrival_rate: f64,
    /// Probability an idle source with a nonempty queue starts transmitting.
    pub activation_probability: f64,
    /// Feature window length (most recent sensing results per sample).
    pub n_new: usize,
    pub slot_structure: SlotStructure,
    pub num_train_slots: u64,
    pub num_test_slots: u64,
    pub seed: u64,
    pub training: Hyperparams,
    pub retraining: RetrainSpec,
    pub defense: Option<DefenseSpec>,
    pub attack: Option<AttackKind>,
}

impl Default for ScenarioConfig {
    /// The reference topology: T(0,0), R(10,0), A(10,10), one background
    /// source at (0,10), all transmit powers 1000, unit noise.
    fn default() -> Self {
        Self {
            nodes: Nodes {
                transmitter: NodeSpec::new("T", [0.0, 0.0], 1000.0),
                receiver: NodeSpec::new("R", [10.0, 0.0], 1000.0),
                adversary: NodeSpec::new("A", [10.0, 10.0], 1000.0),
                sources: vec![NodeSpec::new("B", [0.0, 10.0], 1000.0)],
            },
            noise_power: 1.0,
            sinr_threshold: 3.0,
            channel_model: ChannelModel::default(),
            arrival_rate: 0.8,
            activation_probability: 0.2,
            n_new: 10,
            slot_structure: SlotStructure::default(),
            num_train_slots: 500,
            num_test_slots: 500,
            seed: 1,
            training: Hyperparams::default(),
            retraining: RetrainSpec::default(),
            defense: None,
            attack: None,
        }
    }
}

/// A single violated constraint, with the field path that caused it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {constraint}")]
pub struct ConfigViolation {
    pub field: String,
    pub constraint: String,
}

fn violation(field: &str, constraint: impl Into<String>) -> ConfigViolation {
    ConfigViolation {
        field: field.to_string(),
        constraint: constraint.into(),
    }
}

impl ScenarioConfig {
    /// Returns the config unchanged iff all invariants hold; otherwise
    /// every violated constraint.
    pub fn validate(self) -> Result<Self, Vec<ConfigViolation>> {
        let mut errors = Vec::new();
        let mut check_node = |path: &str, node: &NodeSpec| {
            if !(node.transmit_power >= 0.0) {
                errors.push(violation(
                    &format!("{path}.transmit_power"),
                    "must be >= 0",
                ));
            }
            if !node.position.iter().all(|c| c.is_finite()) {
                errors.push(violation(&format!("{path}.position"), "must be finite"));
            }
        };
        check_node("nodes.transmitter", &self.nodes.transmitter);
        check_node("nodes.receiver", &self.nodes.receiver);
        check_node("nodes.adversary", &self.nodes.adversary);
        for (i, src) in self.nodes.sources.iter().enumerate() {
            check_node(&format!("nodes.sources[{i}]"), src);
        }
        if self.nodes.sources.is_empty() {
            errors.push(violation("nodes.sources", "at least one source required"));
        }
        if !(self.noise_power > 0.0) {
            errors.push(violation("noise_power", "must be > 0"));
        }
        if !(self.sinr_threshold > 0.0) {
            errors.push(violation("sinr_threshold", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.arrival_rate) {
            errors.push(violation(
                "arrival_rate",
                format!("out of [0,1]: {}", self.arrival_rate),
            ));
        }
        if !(0.0..=1.0).contains(&self.activation_probability) {
            errors.push(violation("activation_probability", "out of [0,1]"));
        }
        if self.n_new < 1 {
            errors.push(violation("n_new", "must be >= 1"));
        }
        if self.num_train_slots <= self.n_new as u64 {
            errors.push(violation(
                "num_train_slots",
                format!("must exceed n_new = {}", self.n_new),
            ));
        }
        let s = &self.slot_structure;
        for (name, v) in [
            ("sensing_fraction", s.sensing_fraction),
            ("data_fraction", s.data_fraction),
            ("feedback_fraction", s.feedback_fraction),
        ] {
            if !(v >= 0.0) {
                errors.push(violation(&format!("slot_structure.{name}"), "must be >= 0"));
            }
        }
        let sum = s.fractions_sum();
        if (sum - 1.0).abs() > 1e-12 {
            errors.push(violation(
                "slot_structure",
                format!("fractions sum to {sum}"),
            ));
        }
        if let Err(e) = self.channel_model.validate() {
            errors.push(violation("channel_model", e));
        }
        if let Some(d) = &self.defense {
            if !(0.0..=1.0).contains(&d.pd) {
                errors.push(violation("defense.pd", "out of [0,1]"));
            }
            if !(d.flip_probability > 0.0 && d.flip_probability <= 1.0) {
                errors.push(violation("defense.flip_probability", "out of (0,1]"));
            }
        }
        if let Err(e) = self.training.validate() {
            errors.push(violation("training", e));
        }
        if errors.is_empty() {
            Ok(self)
        } else {
            Err(errors)
        }
    }

    /// Master RNG stream for a named module, independent across labels so
    /// that enabling an attack does not perturb the traffic realization.
    pub fn substream(&self, label: &str) -> ChaCha8Rng {
        substream(self.seed, label)
    }

    /// Stateless per-slot RNG for one channel link or noise process.
    /// Random access keeps replays and paired runs aligned.
    pub fn slot_rng(&self, label: &str, slot: u64) -> ChaCha8Rng {
        slot_rng(self.seed, label, slot)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Euclidean distance between two grid positions. Zero distance is
/// rejected because inverse-square path loss is undefined there.
pub fn distance(a: [f64; 2], b: [f64; 2]) -> Result<f64, ConfigViolation> {
    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    if !d.is_finite() {
        return Err(violation("position", "coordinates must be finite"));
    }
    if d == 0.0 {
        return Err(violation(
            "position",
            "co-located nodes: path loss undefined at zero distance",
        ));
    }
    Ok(d)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xCBF29CE484222325;
    for b in label.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001B3);
    }
    h
}

/// Derive an independent child stream from a master seed and a label.
pub fn substream(master: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master ^ fnv1a(label)))
}

/// Derive a per-(label, slot) stream; used for per-slot channel gains and
/// noise so every run samples an identical realization for a given seed.
pub fn slot_rng(master: u64, label: &str, slot: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(
        splitmix64(master ^ fnv1a(label)).wrapping_add(slot),
    ))
}
