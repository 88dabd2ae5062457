//! Per-slot channel gains under four fading models over inverse-square
//! mean path loss, sensed-power composition, and the SNR/SINR success test.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

/// Relative standard deviation used for Gaussian gain and noise sampling
/// when a model does not define its own.
pub const DEFAULT_RELATIVE_STD: f64 = 0.2;

/// Fading model for a link. Every variant is parameterized so the mean
/// linear gain equals the path-loss mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelModel {
    /// Gaussian around the mean, truncated at zero.
    Gaussian { relative_std: f64 },
    /// Exponential power gain (Rayleigh amplitude).
    Rayleigh,
    /// Line-of-sight plus scatter; `k_factor` is the linear power ratio.
    Rician { k_factor: f64 },
    /// Log-normal with the median adjusted so the linear mean matches.
    LogNormal { sigma_db: f64 },
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel::Gaussian {
            relative_std: DEFAULT_RELATIVE_STD,
        }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            ChannelModel::Gaussian { relative_std } if relative_std < 0.0 => {
                Err("relative_std must be >= 0".into())
            }
            ChannelModel::Rician { k_factor } if k_factor < 0.0 => {
                Err("k_factor must be >= 0".into())
            }
            ChannelModel::LogNormal { sigma_db } if sigma_db < 0.0 => {
                Err("sigma_db must be >= 0".into())
            }
            _ => Ok(()),
        }
    }

    /// Relative std used for per-slot noise sampling around N0.
    pub fn noise_relative_std(&self) -> f64 {
        match *self {
            ChannelModel::Gaussian { relative_std } => relative_std,
            _ => DEFAULT_RELATIVE_STD,
        }
    }
}

/// Linear power gain of one link for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGain(pub f64);

/// Free-space mean gain: inverse-square path loss.
pub fn mean_gain(d: f64) -> f64 {
    debug_assert!(d > 0.0, "mean_gain requires d > 0");
    d.powi(-2)
}

/// Draw one slot's gain. Nonnegative for every variant; the sample mean
/// converges to `mean` for each of them.
pub fn sample_gain<R: Rng>(model: &ChannelModel, mean: f64, rng: &mut R) -> LinkGain {
    debug_assert!(mean > 0.0);
    let g = match *model {
        ChannelModel::Gaussian { relative_std } => {
            if relative_std == 0.0 {
                mean
            } else {
                let n = Normal::new(mean, relative_std * mean).unwrap();
                n.sample(rng).max(0.0)
            }
        }
        ChannelModel::Rayleigh => {
            let e = Exp::new(1.0 / mean).unwrap();
            e.sample(rng)
        }
        ChannelModel::Rician { k_factor } => {
            // Power of a complex Gaussian with LOS component: mean splits
            // into nu^2 = mean*K/(K+1) and scatter 2*sigma^2 = mean/(K+1).
            let nu = (mean * k_factor / (k_factor + 1.0)).sqrt();
            let sigma = (mean / (2.0 * (k_factor + 1.0))).sqrt();
            let std = Normal::new(0.0, 1.0).unwrap();
            let re = nu + sigma * std.sample(rng);
            let im = sigma * std.sample(rng);
            re * re + im * im
        }
        ChannelModel::LogNormal { sigma_db } => {
            let sigma_ln = sigma_db * std::f64::consts::LN_10 / 10.0;
            if sigma_ln == 0.0 {
                mean
            } else {
                let mu = mean.ln() - sigma_ln * sigma_ln / 2.0;
                let n = Normal::new(mu, sigma_ln).unwrap();
                n.sample(rng).exp()
            }
        }
    };
    LinkGain(g)
}

/// Per-slot noise sample around `n0`, truncated at a small positive floor.
pub fn sample_noise<R: Rng>(n0: f64, relative_std: f64, rng: &mut R) -> f64 {
    if relative_std == 0.0 {
        return n0;
    }
    let n = Normal::new(n0, relative_std * n0).unwrap();
    n.sample(rng).max(1e-9)
}

/// Compose one sensing result: sampled noise plus the aggregated received
/// power from every transmitting contributor. Empty contributions model
/// an idle slot.
pub fn sensed_power<R: Rng>(
    n0: f64,
    noise_relative_std: f64,
    contributions: &[(LinkGain, f64)],
    rng: &mut R,
) -> f64 {
    let noise = sample_noise(n0, noise_relative_std, rng);
    noise
        + contributions
            .iter()
            .map(|(g, p)| g.0 * p)
            .sum::<f64>()
}

/// SINR test at the receiver. Success iff the ratio is not less than
/// `gamma_min`. Jamming enters as one more interferer term.
pub fn transmission_success(
    signal_gain: LinkGain,
    tx_power: f64,
    interferers: &[(LinkGain, f64)],
    n0: f64,
    gamma_min: f64,
) -> (bool, f64) {
    debug_assert!(n0 > 0.0);
    let interference: f64 = interferers.iter().map(|(g, p)| g.0 * p).sum();
    let gamma = signal_gain.0 * tx_power / (n0 + interference);
    (gamma >= gamma_min, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::substream;

    #[test]
    fn mean_gain_examples() {
        assert_eq!(mean_gain(10.0), 0.01);
        assert_eq!(mean_gain(1.0), 1.0);
        let d = 200f64.sqrt();
        assert!((mean_gain(d) - 0.005).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_gaussian_is_exact() {
        let mut rng = substream(1, "t");
        let m = ChannelModel::Gaussian { relative_std: 0.0 };
        for _ in 0..100 {
            assert_eq!(sample_gain(&m, 0.01, &mut rng).0, 0.01);
        }
    }

    #[test]
    fn degenerate_log_normal_is_exact() {
        let mut rng = substream(1, "t");
        let m = ChannelModel::LogNormal { sigma_db: 0.0 };
        assert_eq!(sample_gain(&m, 0.01, &mut rng).0, 0.01);
    }

    #[test]
    fn rayleigh_mean_matches_exponential_oracle() {
        // Law of large numbers against the exponential-power oracle:
        // mean 0.01, sigma = mean, 10^6 draws, 3-sigma/sqrt(n) band.
        let mut rng = substream(7, "rayleigh");
        let m = ChannelModel::Rayleigh;
        let n = 1_000_000usize;
        let sum: f64 = (0..n).map(|_| sample_gain(&m, 0.01, &mut rng).0).sum();
        let mean = sum / n as f64;
        let tol = 3.0 * 0.01 / (n as f64).sqrt();
        assert!((mean - 0.01).abs() < tol, "mean {mean}");
    }

    #[test]
    fn every_variant_mean_within_two_percent() {
        let models = [
            ChannelModel::Gaussian { relative_std: 0.2 },
            ChannelModel::Rayleigh,
            ChannelModel::Rician { k_factor: 3.0 },
            ChannelModel::LogNormal { sigma_db: 3.0 },
        ];
        for (i, m) in models.iter().enumerate() {
            let mut rng = substream(100 + i as u64, "mc");
            let n = 100_000usize;
            let target = mean_gain(10.0);
            let sum: f64 = (0..n).map(|_| sample_gain(m, target, &mut rng).0).sum();
            let mean = sum / n as f64;
            assert!(
                (mean - target).abs() / target < 0.02,
                "{m:?}: mean {mean} vs {target}"
            );
            // All samples nonnegative by construction.
            assert!(sample_gain(m, target, &mut rng).0 >= 0.0);
        }
    }

    #[test]
    fn sensed_power_idle_slot_is_noise_only() {
        let mut rng = substream(1, "n");
        assert_eq!(sensed_power(1.0, 0.0, &[], &mut rng), 1.0);
    }

    #[test]
    fn sensed_power_aggregates_contributions() {
        let mut rng = substream(1, "n");
        let one = sensed_power(1.0, 0.0, &[(LinkGain(0.01), 1000.0)], &mut rng);
        assert!((one - 11.0).abs() < 1e-12);
        let two = sensed_power(
            1.0,
            0.0,
            &[(LinkGain(0.01), 1000.0), (LinkGain(0.008), 1000.0)],
            &mut rng,
        );
        assert!((two - 19.0).abs() < 1e-12);
    }

    #[test]
    fn success_on_clean_channel() {
        let (ok, gamma) = transmission_success(LinkGain(0.01), 1000.0, &[], 1.0, 3.0);
        assert!(ok);
        assert!((gamma - 10.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_sinr_counts_as_success() {
        let (ok, gamma) = transmission_success(LinkGain(0.003), 1000.0, &[], 1.0, 3.0);
        assert!((gamma - 3.0).abs() < 1e-12);
        assert!(ok);
    }

    #[test]
    fn interference_can_break_the_link() {
        let (ok, gamma) =
            transmission_success(LinkGain(0.01), 1000.0, &[(LinkGain(0.009), 1000.0)], 1.0, 3.0);
        assert!(!ok);
        assert!((gamma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adding_interference_never_flips_failure_to_success() {
        let mut rng = substream(3, "mono");
        for _ in 0..200 {
            let sig = LinkGain(rng.gen_range(0.0001..0.02));
            let base: Vec<(LinkGain, f64)> = (0..rng.gen_range(0..4))
                .map(|_| (LinkGain(rng.gen_range(0.0..0.01)), 1000.0))
                .collect();
            let (ok_before, _) = transmission_success(sig, 1000.0, &base, 1.0, 3.0);
            let mut more = base.clone();
            more.push((LinkGain(rng.gen_range(0.0..0.01)), 1000.0));
            let (ok_after, _) = transmission_success(sig, 1000.0, &more, 1.0, 3.0);
            assert!(!(ok_after && !ok_before));
        }
    }
}
