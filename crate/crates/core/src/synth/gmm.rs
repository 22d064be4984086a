//! Per-column Gaussian mixture mode models.
//!
//! Continuous columns are modeled as a mixture of up to ten Gaussian modes
//! fitted with EM. The number of modes is selected by BIC over all
//! candidate counts. A fitted model turns raw values into (mode, alpha)
//! pairs: the mode is sampled from the posterior over components and alpha
//! is the value's offset inside that mode, scaled by four standard
//! deviations and clamped to [-1, 1].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Most mode components ever considered for one column.
pub const MAX_MODES: usize = 10;

const EM_MAX_ITERS: usize = 200;
const EM_MIN_GAIN: f64 = 1e-6;
const LOG_2PI: f64 = 1.8378770664093453;

/// Gaussian mixture fitted to one continuous column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeModel {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub log_likelihood: f64,
    pub min: f64,
    pub max: f64,
}

impl ModeModel {
    pub fn n_modes(&self) -> usize {
        self.weights.len()
    }

    /// Log responsibilities of every mode for one value.
    fn log_posterior(&self, x: f64) -> Vec<f64> {
        let logs: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((&w, &mu), &sigma)| {
                if w <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    w.ln() + log_normal_pdf(x, mu, sigma)
                }
            })
            .collect();
        let lse = log_sum_exp(&logs);
        logs.iter().map(|l| l - lse).collect()
    }
}

/// One value in mode-normalized form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedCell {
    pub mode: usize,
    pub alpha: f64,
}

/// Per-candidate EM diagnostics from a traced fit.
#[derive(Debug, Clone)]
pub struct GmmCandidate {
    pub components: usize,
    pub bic: f64,
    pub log_likelihoods: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct GmmTrace {
    pub candidates: Vec<GmmCandidate>,
}

/// Fits a mode model, selecting the component count by BIC.
pub fn fit_gmm(values: &[f64], rng: &mut RngStream) -> Result<ModeModel> {
    fit_gmm_traced(values, rng).map(|(model, _)| model)
}

/// Same as [`fit_gmm`] but also returns the EM log-likelihood trajectory of
/// every candidate component count. Each trajectory is non-decreasing: an
/// iteration that would lower the likelihood is rolled back instead.
pub fn fit_gmm_traced(values: &[f64], rng: &mut RngStream) -> Result<(ModeModel, GmmTrace)> {
    if values.is_empty() {
        return Err(Error::invalid("fit_gmm: empty column"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("fit_gmm: non-finite value"));
    }
    let n = values.len();
    let mut distinct = values.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let k_max = MAX_MODES.min(distinct.len());

    let (_, global_std) = crate::dataset::mean_std(values);
    let sigma_floor = if global_std > 0.0 { 1e-6 * global_std } else { 1e-6 };

    let mut best: Option<(f64, ModeModel)> = None;
    let mut trace = GmmTrace::default();
    for k in 1..=k_max {
        let (model, lls) = run_em(values, k, sigma_floor, rng);
        let params = (3 * k - 1) as f64;
        let bic = -2.0 * model.log_likelihood + params * (n as f64).ln();
        trace.candidates.push(GmmCandidate {
            components: k,
            bic,
            log_likelihoods: lls,
        });
        // Strict comparison keeps the smaller k on ties.
        if best.as_ref().map_or(true, |(b, _)| bic < *b) {
            best = Some((bic, model));
        }
    }
    Ok((best.unwrap().1, trace))
}

/// EM for a fixed component count. Initial centers come from a distance-
/// weighted draw over the data (k-means++ style), so every center is a
/// distinct observed value.
fn run_em(values: &[f64], k: usize, sigma_floor: f64, rng: &mut RngStream) -> (ModeModel, Vec<f64>) {
    let n = values.len();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let centers = pick_centers(values, k, rng);
    let mut weights = vec![0.0; k];
    let mut means = centers.clone();
    let mut stds = vec![0.0; k];
    {
        // Hard-assign to the nearest center for initial weights and spreads.
        let mut sums = vec![0.0; k];
        let mut sq_sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for &x in values {
            let j = nearest(&centers, x);
            counts[j] += 1;
            sums[j] += x;
            sq_sums[j] += x * x;
        }
        for j in 0..k {
            weights[j] = counts[j] as f64 / n as f64;
            if counts[j] > 0 {
                means[j] = sums[j] / counts[j] as f64;
                let var = (sq_sums[j] / counts[j] as f64 - means[j] * means[j]).max(0.0);
                stds[j] = var.sqrt().max(sigma_floor);
            } else {
                stds[j] = sigma_floor;
            }
        }
    }

    let mut lls = Vec::new();
    let mut ll = log_likelihood(values, &weights, &means, &stds);
    lls.push(ll);
    for _ in 0..EM_MAX_ITERS {
        // E-step in log space, M-step with dead components frozen.
        let mut resp_sum = vec![0.0; k];
        let mut resp_x = vec![0.0; k];
        let mut resp_xx = vec![0.0; k];
        for &x in values {
            let logs: Vec<f64> = (0..k)
                .map(|j| {
                    if weights[j] <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        weights[j].ln() + log_normal_pdf(x, means[j], stds[j])
                    }
                })
                .collect();
            let lse = log_sum_exp(&logs);
            for j in 0..k {
                let r = (logs[j] - lse).exp();
                resp_sum[j] += r;
                resp_x[j] += r * x;
                resp_xx[j] += r * x * x;
            }
        }
        let mut next_weights = weights.clone();
        let mut next_means = means.clone();
        let mut next_stds = stds.clone();
        for j in 0..k {
            if resp_sum[j] > 0.0 {
                next_weights[j] = resp_sum[j] / n as f64;
                next_means[j] = resp_x[j] / resp_sum[j];
                let var = (resp_xx[j] / resp_sum[j] - next_means[j] * next_means[j]).max(0.0);
                next_stds[j] = var.sqrt().max(sigma_floor);
            } else {
                next_weights[j] = 0.0;
            }
        }
        let total: f64 = next_weights.iter().sum();
        for w in &mut next_weights {
            *w /= total;
        }
        let next_ll = log_likelihood(values, &next_weights, &next_means, &next_stds);
        if next_ll < ll {
            // Numerical wobble; keep the better parameters.
            break;
        }
        weights = next_weights;
        means = next_means;
        stds = next_stds;
        let gain = next_ll - ll;
        ll = next_ll;
        lls.push(ll);
        if gain < EM_MIN_GAIN {
            break;
        }
    }

    (
        ModeModel {
            weights,
            means,
            stds,
            log_likelihood: ll,
            min,
            max,
        },
        lls,
    )
}

fn pick_centers(values: &[f64], k: usize, rng: &mut RngStream) -> Vec<f64> {
    let mut centers = Vec::with_capacity(k);
    centers.push(values[rng.random_range(0..values.len())]);
    while centers.len() < k {
        let dists: Vec<f64> = values
            .iter()
            .map(|&x| {
                let d = x - centers[nearest(&centers, x)];
                d * d
            })
            .collect();
        let total: f64 = dists.iter().sum();
        // Distinct count >= k guarantees positive total here.
        let mut target = rng.random::<f64>() * total;
        let mut chosen = values.len() - 1;
        for (i, &d) in dists.iter().enumerate() {
            target -= d;
            if target <= 0.0 {
                chosen = i;
                break;
            }
        }
        centers.push(values[chosen]);
    }
    centers
}

fn nearest(centers: &[f64], x: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, &c) in centers.iter().enumerate() {
        let d = (x - c).abs();
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

fn log_likelihood(values: &[f64], weights: &[f64], means: &[f64], stds: &[f64]) -> f64 {
    values
        .iter()
        .map(|&x| {
            let logs: Vec<f64> = weights
                .iter()
                .zip(means)
                .zip(stds)
                .map(|((&w, &mu), &sigma)| {
                    if w <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        w.ln() + log_normal_pdf(x, mu, sigma)
                    }
                })
                .collect();
            log_sum_exp(&logs)
        })
        .sum()
}

fn log_normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * (LOG_2PI + z * z) - sigma.ln()
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// Turns raw values into (mode, alpha) pairs. The mode is drawn from the
/// posterior over components, so repeated calls with different streams give
/// different assignments in overlap regions.
pub fn mode_normalize(
    values: &[f64],
    model: &ModeModel,
    rng: &mut RngStream,
) -> Vec<NormalizedCell> {
    values
        .iter()
        .map(|&x| {
            let log_post = model.log_posterior(x);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut mode = model.n_modes() - 1;
            for (j, lp) in log_post.iter().enumerate() {
                acc += lp.exp();
                if u <= acc {
                    mode = j;
                    break;
                }
            }
            let alpha = ((x - model.means[mode]) / (4.0 * model.stds[mode])).clamp(-1.0, 1.0);
            NormalizedCell { mode, alpha }
        })
        .collect()
}

/// Inverse of [`mode_normalize`] for cells whose alpha was not clamped.
pub fn mode_denormalize(cells: &[NormalizedCell], model: &ModeModel) -> Vec<f64> {
    cells
        .iter()
        .map(|cell| model.means[cell.mode] + cell.alpha * 4.0 * model.stds[cell.mode])
        .collect()
}
