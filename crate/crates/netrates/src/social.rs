//! Belief-space social learning and its large-deviations rate functions.
//!
//! Each node keeps private and public belief vectors over `M` hypotheses.
//! A step applies a local Bayesian update to the public beliefs and a
//! geometric (log-linear) merge of neighbor beliefs into the private ones:
//!
//! ```text
//! log b_{i,t}^m = log f_m(Y_{i,t}) + log q_{i,t-1}^m - logsumexp
//! log q_{i,t}^m = sum_j W_ij log b_{j,t}^m       - logsumexp
//! ```
//!
//! Taking log-ratios against the true hypothesis `M` and dividing by `t`
//! turns this exactly into the consensus+innovations recursion driven by the
//! log-likelihood-ratio innovations `L_{i,t}`; the equivalence is algebraic,
//! so the two implementations must agree to floating-point accuracy, which
//! the tests enforce.
//!
//! All belief arithmetic stays in the log domain: beliefs in wrong
//! hypotheses decay like `exp(-t D_KL)` and would underflow linear-domain
//! floats within a few dozen steps.
//!
//! The scalar Gaussian hypothesis family (means `mu_1..mu_M`, shared
//! `sigma`, true mean last) admits closed forms: the innovation vector is
//! Gaussian on the line `x = (zeta / sigma^2) d - D_KL`, so the rate
//! function `I_M` is the scalar Gaussian rate in the line parameter `zeta`,
//! and the belief map `g_m(x) = x_m - max{0, x_1..x_{M-1}}` restricted to
//! the line is piecewise affine with breakpoints at the midpoints of
//! consecutive sorted `d` values.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::GraphDistribution;
use crate::rates::{EnvelopeRate, GaussianSource, RateFunction, RateFunctionGaussian};
use crate::sim::{apply_rule_in_place, metropolis_into, sample_edges, step_states, WeightRule};

fn std_normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `M` scalar Gaussian hypotheses with shared variance; the last mean is the
/// true one.
#[derive(Debug, Clone)]
pub struct HypothesisModel {
    means: Vec<f64>,
    sigma: f64,
    /// `d_m = mu_m - mu_M` for the `M - 1` alternatives, in user order.
    d: Vec<f64>,
    /// `D_KL,m = d_m^2 / (2 sigma^2)`.
    dkl: Vec<f64>,
    /// Sorted distinct slopes of the lines in `f`, including the zero line.
    slopes: Vec<f64>,
}

impl HypothesisModel {
    pub fn new(means: Vec<f64>, sigma: f64) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::TooFewHypotheses);
        }
        if !means.iter().all(|m| m.is_finite()) {
            return Err(Error::Config("hypothesis means must be finite".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::NonPositiveSigma(sigma));
        }
        let true_mean = *means.last().unwrap();
        let d: Vec<f64> = means[..means.len() - 1]
            .iter()
            .map(|mu| mu - true_mean)
            .collect();
        let dkl: Vec<f64> = d.iter().map(|dm| dm * dm / (2.0 * sigma * sigma)).collect();
        let mut slopes: Vec<f64> = d.clone();
        slopes.push(0.0);
        slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        slopes.dedup();
        Ok(Self { means, sigma, d, dkl, slopes })
    }

    /// Total number of hypotheses `M`.
    pub fn hypothesis_count(&self) -> usize {
        self.means.len()
    }

    /// Number of alternatives `M - 1` (the dimension of the log-ratio state).
    pub fn alternatives(&self) -> usize {
        self.means.len() - 1
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn true_mean(&self) -> f64 {
        *self.means.last().unwrap()
    }

    pub fn mean_differences(&self) -> &[f64] {
        &self.d
    }

    pub fn kl_divergences(&self) -> &[f64] {
        &self.dkl
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m < 1 || m > self.alternatives() {
            return Err(Error::HypothesisOutOfRange { m, max: self.alternatives() });
        }
        Ok(())
    }

    fn log_density(&self, m: usize, y: f64) -> f64 {
        let z = (y - self.means[m]) / self.sigma;
        -0.5 * z * z
    }

    /// The innovation source of the log-likelihood ratios along their line:
    /// scalar Gaussian with mean 0 and variance `sigma^2` in the `zeta`
    /// parameter.
    pub fn zeta_source(&self) -> GaussianSource {
        GaussianSource::scalar(0.0, self.sigma * self.sigma)
            .expect("positive sigma was validated")
    }

    /// Point of the innovation line at parameter `zeta`:
    /// `x = (zeta / sigma^2) d - D_KL`.
    pub fn line_state(&self, zeta: f64) -> DVector<f64> {
        let s2 = self.sigma * self.sigma;
        DVector::from_iterator(
            self.alternatives(),
            self.d.iter().zip(&self.dkl).map(|(dm, dk)| zeta * dm / s2 - dk),
        )
    }
}

/// Log-moment generating function of the log-likelihood-ratio vector under
/// the true hypothesis: `-lambda' D_KL + (lambda' d)^2 / (2 sigma^2)`.
pub fn lambda_m(model: &HypothesisModel, lambda: &DVector<f64>) -> Result<f64> {
    if lambda.len() != model.alternatives() {
        return Err(Error::DimensionMismatch {
            expected: model.alternatives(),
            got: lambda.len(),
        });
    }
    let dot_dkl: f64 = lambda.iter().zip(&model.dkl).map(|(l, dk)| l * dk).sum();
    let dot_d: f64 = lambda.iter().zip(&model.d).map(|(l, dm)| l * dm).sum();
    Ok(-dot_dkl + dot_d * dot_d / (2.0 * model.sigma * model.sigma))
}

/// Rate function of the log-likelihood-ratio vector: `zeta^2 / (2 sigma^2)`
/// on the line `x = (zeta / sigma^2) d - D_KL`, `+inf` off the line.
pub fn rate_im(model: &HypothesisModel, x: &DVector<f64>) -> Result<f64> {
    if x.len() != model.alternatives() {
        return Err(Error::DimensionMismatch { expected: model.alternatives(), got: x.len() });
    }
    let s2 = model.sigma * model.sigma;
    let shifted: Vec<f64> = x.iter().zip(&model.dkl).map(|(xi, dk)| xi + dk).collect();
    let dd: f64 = model.d.iter().map(|dm| dm * dm).sum();
    let zeta = if dd > 0.0 {
        let proj: f64 = shifted.iter().zip(&model.d).map(|(s, dm)| s * dm).sum();
        s2 * proj / dd
    } else {
        0.0
    };
    let residual: f64 = shifted
        .iter()
        .zip(&model.d)
        .map(|(s, dm)| {
            let diff = s - zeta * dm / s2;
            diff * diff
        })
        .sum::<f64>()
        .sqrt();
    if residual >= 1e-9 {
        return Ok(f64::INFINITY);
    }
    Ok(zeta * zeta / (2.0 * s2))
}

/// Upper envelope `f(zeta) = max { 0, zeta d_m / sigma^2 - D_KL,m }`
/// evaluated by closed-form branch selection over the sorted slopes.
pub fn piecewise_f(model: &HypothesisModel, zeta: f64) -> f64 {
    let s2 = model.sigma * model.sigma;
    let slopes = &model.slopes;
    // branch k is active on [ (s_{k-1}+s_k)/2, (s_k+s_{k+1})/2 )
    let k = slopes
        .windows(2)
        .take_while(|w| zeta >= 0.5 * (w[0] + w[1]))
        .count();
    let s = slopes[k];
    zeta * s / s2 - s * s / (2.0 * s2)
}

/// Direct max-form evaluation of `f`; the oracle for [`piecewise_f`].
pub fn piecewise_f_direct(model: &HypothesisModel, zeta: f64) -> f64 {
    let s2 = model.sigma * model.sigma;
    model
        .d
        .iter()
        .zip(&model.dkl)
        .map(|(dm, dk)| zeta * dm / s2 - dk)
        .fold(0.0f64, f64::max)
}

/// Belief contraction map in state space:
/// `g_m(x) = x_m - max { 0, x_1, ..., x_{M-1} }` (1-based `m`).
pub fn g_m_state(x: &DVector<f64>, m: usize) -> f64 {
    let top = x.iter().copied().fold(0.0f64, f64::max);
    x[m - 1] - top
}

/// `g_m` along the innovation line, by closed-form branch selection.
pub fn g_m(model: &HypothesisModel, m: usize, zeta: f64) -> Result<f64> {
    model.check_m(m)?;
    let s2 = model.sigma * model.sigma;
    let dm = model.d[m - 1];
    Ok(zeta * dm / s2 - model.dkl[m - 1] - piecewise_f(model, zeta))
}

/// Large-deviations rate of the log-beliefs `(1/t) log b^m`:
/// `R_{i,m}(z) = inf { I_i(x) : g_m(x) = z }`, with `I_i` given through an
/// envelope over the scalar line parameter.
///
/// Each branch of `g_m` is affine in `zeta`, so the level set is a finite
/// union of points and (for the branch where hypothesis `m` dominates)
/// intervals; the envelope is convex with its zero at `zeta = 0`, so
/// interval minima sit at the point closest to zero.
pub fn belief_rate(
    model: &HypothesisModel,
    envelope: &EnvelopeRate,
    m: usize,
    z: f64,
) -> Result<f64> {
    model.check_m(m)?;
    if z > 0.0 {
        // g_m <= 0 everywhere: the max in g_m includes 0 and x_m
        return Ok(f64::INFINITY);
    }
    let s2 = model.sigma * model.sigma;
    let dm = model.d[m - 1];
    let dkm = model.dkl[m - 1];
    let slopes = &model.slopes;
    let eval = |zeta: f64| -> Result<f64> {
        envelope.eval(&DVector::from_element(1, zeta))
    };

    let mut best = f64::INFINITY;
    for (k, &s) in slopes.iter().enumerate() {
        let lo = if k == 0 {
            f64::NEG_INFINITY
        } else {
            0.5 * (slopes[k - 1] + s)
        };
        let hi = if k + 1 == slopes.len() {
            f64::INFINITY
        } else {
            0.5 * (s + slopes[k + 1])
        };
        // on this branch: g(zeta) = alpha zeta + beta
        let alpha = (dm - s) / s2;
        let beta = s * s / (2.0 * s2) - dkm;
        if alpha == 0.0 {
            if z == beta {
                let zeta = zeta_clamp(0.0, lo, hi);
                best = best.min(eval(zeta)?);
            }
            continue;
        }
        let zeta = (z - beta) / alpha;
        let tol = 1e-12 * (1.0 + zeta.abs());
        if zeta >= lo - tol && zeta <= hi + tol {
            best = best.min(eval(zeta_clamp(zeta, lo, hi))?);
        }
    }
    Ok(best)
}

fn zeta_clamp(zeta: f64, lo: f64, hi: f64) -> f64 {
    zeta.max(lo).min(hi)
}

/// Grid-search oracle for [`belief_rate`], kept independent of the
/// closed-form branch machinery: scans the direct max-form `g_m` on a dense
/// `zeta` grid and polishes every bracketing segment by bisection before
/// minimizing the envelope over the located level-set points.
pub fn belief_rate_oracle(
    model: &HypothesisModel,
    envelope: &EnvelopeRate,
    m: usize,
    z: f64,
    span: f64,
    grid_len: usize,
) -> Result<f64> {
    model.check_m(m)?;
    let g = |zeta: f64| g_m_state(&model.line_state(zeta), m);
    let eval = |zeta: f64| envelope.eval(&DVector::from_element(1, zeta));
    let step = 2.0 * span / (grid_len - 1) as f64;
    let mut best = f64::INFINITY;
    let mut prev_zeta = -span;
    let mut prev_g = g(prev_zeta);
    for k in 1..grid_len {
        let zeta = -span + k as f64 * step;
        let gv = g(zeta);
        let (lo_g, hi_g) = (prev_g.min(gv), prev_g.max(gv));
        if lo_g <= z && z <= hi_g {
            if prev_g == gv {
                // flat segment sitting on the level
                best = best.min(eval(prev_zeta)?).min(eval(zeta)?);
            } else {
                // bisect for the boundary of { g <= z } (handles both
                // transversal crossings and plateau edges)
                let (mut a, mut b) = (prev_zeta, zeta);
                let increasing = gv > prev_g;
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    let below = g(mid) < z;
                    if below == increasing {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                best = best.min(eval(0.5 * (a + b))?);
            }
        }
        prev_zeta = zeta;
        prev_g = gv;
    }
    Ok(best)
}

/// Builds the envelope over the scalar line parameter for [`belief_rate`]:
/// base rate `zeta^2 / (2 sigma^2)`.
pub fn zeta_envelope(
    model: &HypothesisModel,
    n: usize,
    comp_size: usize,
    lift: f64,
) -> Result<EnvelopeRate> {
    EnvelopeRate::new(RateFunctionGaussian::new(model.zeta_source()), n, comp_size, lift)
}

/// Log-domain private and public beliefs of all nodes (rows) over all
/// hypotheses (columns).
#[derive(Debug, Clone)]
pub struct BeliefState {
    pub log_private: DMatrix<f64>,
    pub log_public: DMatrix<f64>,
}

impl BeliefState {
    /// Uniform prior on every node.
    pub fn uniform(nodes: usize, model: &HypothesisModel) -> Self {
        let v = -(model.hypothesis_count() as f64).ln();
        let m = DMatrix::from_element(nodes, model.hypothesis_count(), v);
        Self { log_private: m.clone(), log_public: m }
    }

    pub fn nodes(&self) -> usize {
        self.log_private.nrows()
    }

    /// Largest deviation of any belief row from exact normalization.
    pub fn normalization_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for mat in [&self.log_private, &self.log_public] {
            for i in 0..mat.nrows() {
                let row: Vec<f64> = (0..mat.ncols()).map(|m| mat[(i, m)]).collect();
                worst = worst.max(log_sum_exp(&row).abs());
            }
        }
        worst
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    top + values.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Bayesian refresh of the public beliefs from one observation per node.
pub fn bayes_update(state: &mut BeliefState, y: &DVector<f64>, model: &HypothesisModel) {
    let hypotheses = model.hypothesis_count();
    for i in 0..state.nodes() {
        let mut row: Vec<f64> = (0..hypotheses)
            .map(|m| model.log_density(m, y[i]) + state.log_private[(i, m)])
            .collect();
        let norm = log_sum_exp(&row);
        for v in &mut row {
            *v -= norm;
        }
        for (m, v) in row.iter().enumerate() {
            state.log_public[(i, m)] = *v;
        }
    }
}

/// Geometric merge of neighbor public beliefs into the private ones.
pub fn geometric_merge(state: &mut BeliefState, w: &DMatrix<f64>) {
    let merged = w * &state.log_public;
    let hypotheses = state.log_private.ncols();
    for i in 0..state.nodes() {
        let row: Vec<f64> = (0..hypotheses).map(|m| merged[(i, m)]).collect();
        let norm = log_sum_exp(&row);
        for m in 0..hypotheses {
            state.log_private[(i, m)] = row[m] - norm;
        }
    }
}

/// Log-likelihood ratios `L_{i}^m = (Y_i - mu_M) d_m / sigma^2 - D_KL,m`.
pub fn log_likelihood_ratios(y: &DVector<f64>, model: &HypothesisModel) -> DMatrix<f64> {
    let s2 = model.sigma * model.sigma;
    DMatrix::from_fn(y.len(), model.alternatives(), |i, m| {
        (y[i] - model.true_mean()) * model.d[m] / s2 - model.dkl[m]
    })
}

/// Per-node log-ratio state `(1/t) log(q^m / q^M)`, the exact
/// consensus+innovations iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRatioState {
    pub x: DMatrix<f64>,
}

/// One social-learning step: Bayes update, then geometric merge. Returns the
/// private-belief log-ratio state, which matches [`step_states`] driven by
/// the log-likelihood ratios.
pub fn sl_step(
    state: &mut BeliefState,
    y: &DVector<f64>,
    w: &DMatrix<f64>,
    model: &HypothesisModel,
    t: usize,
) -> Result<LogRatioState> {
    if t < 1 {
        return Err(Error::InvalidSimulationConfig("time must be >= 1".into()));
    }
    bayes_update(state, y, model);
    geometric_merge(state, w);
    Ok(LogRatioState { x: log_ratios(&state.log_private, t) })
}

fn log_ratios(log_beliefs: &DMatrix<f64>, t: usize) -> DMatrix<f64> {
    let nodes = log_beliefs.nrows();
    let m = log_beliefs.ncols();
    DMatrix::from_fn(nodes, m - 1, |i, k| {
        (log_beliefs[(i, k)] - log_beliefs[(i, m - 1)]) / t as f64
    })
}

/// Public-belief log-ratios `(1/t) log(b^m / b^M)`.
pub fn public_log_ratios(state: &BeliefState, t: usize) -> DMatrix<f64> {
    log_ratios(&state.log_public, t)
}

/// Maximum entrywise deviation over `horizon` steps between a social-learning
/// run and a consensus+innovations run driven by the same weight draws and
/// log-likelihood innovations. The transform is algebraically exact; only
/// floating-point noise remains.
pub fn sl_ci_equivalence_dev(
    network: &GraphDistribution,
    weights: WeightRule,
    model: &HypothesisModel,
    horizon: usize,
    seed: u64,
) -> Result<f64> {
    let n = network.vertex_count();
    let mut wrng = ChaCha8Rng::seed_from_u64(seed);
    let mut yrng = ChaCha8Rng::seed_from_u64(seed);
    yrng.set_stream(1);

    let mut state = BeliefState::uniform(n, model);
    let mut x = DMatrix::zeros(n, model.alternatives());
    let mut edges = Vec::new();
    let mut w = DMatrix::zeros(n, n);
    let mut worst = 0.0f64;

    for t in 1..=horizon {
        sample_edges(network, &mut wrng, &mut edges);
        metropolis_into(&mut w, n, &edges);
        apply_rule_in_place(&mut w, weights);
        let y = DVector::from_fn(n, |_, _| {
            model.true_mean() + model.sigma * std_normal(&mut yrng)
        });

        let ratio = sl_step(&mut state, &y, &w, model, t)?;
        let innovations = log_likelihood_ratios(&y, model);
        x = step_states(&x, &innovations, &w, t)?;
        worst = worst.max((&ratio.x - &x).abs().max());
    }
    Ok(worst)
}

/// Monte Carlo description of a social-learning experiment.
#[derive(Debug, Clone)]
pub struct SlConfig {
    pub network: GraphDistribution,
    pub weights: WeightRule,
    pub model: HypothesisModel,
    pub horizon: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub record_times: Vec<usize>,
}

impl SlConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.trajectories < 1 || self.horizon < 1 {
            return Err(Error::InvalidSimulationConfig(
                "trajectories and horizon must be >= 1".into(),
            ));
        }
        if self.record_times.is_empty()
            || self.record_times.windows(2).any(|w| w[0] >= w[1])
            || *self.record_times.last().unwrap() > self.horizon
        {
            return Err(Error::InvalidSimulationConfig(
                "record_times must be nonempty, increasing, and within the horizon".into(),
            ));
        }
        Ok(())
    }
}

/// Recorded social-learning ensemble: per record time and trajectory, the
/// public true-hypothesis beliefs and public log-ratios of every node.
#[derive(Debug, Clone)]
pub struct SlEnsemble {
    pub record_times: Vec<usize>,
    /// `true_belief[time_idx][trajectory][node]` = `b^M` (public).
    pub true_belief: Vec<Vec<Vec<f64>>>,
    /// `public_ratio[time_idx][trajectory]` = N x (M-1) matrix of
    /// `(1/t) log(b^m / b^M)`.
    pub public_ratio: Vec<Vec<DMatrix<f64>>>,
    /// Worst deviation of `b^M` from `1 / (1 + sum_m exp(t X^m))`.
    pub reconstruction_dev: f64,
}

/// Runs independent social-learning trajectories under the true hypothesis.
pub fn run_sl_ensemble(cfg: &SlConfig) -> Result<SlEnsemble> {
    cfg.validate()?;
    let n = cfg.network.vertex_count();
    let times = &cfg.record_times;

    struct TrajectoryOutput {
        true_belief: Vec<Vec<f64>>,
        public_ratio: Vec<DMatrix<f64>>,
        reconstruction_dev: f64,
    }

    let run_one = |traj: usize| -> Result<TrajectoryOutput> {
        let mut wrng = ChaCha8Rng::seed_from_u64(cfg.seed);
        wrng.set_stream(2 * traj as u64);
        let mut yrng = ChaCha8Rng::seed_from_u64(cfg.seed);
        yrng.set_stream(2 * traj as u64 + 1);

        let mut state = BeliefState::uniform(n, &cfg.model);
        let mut edges = Vec::new();
        let mut w = DMatrix::zeros(n, n);
        let mut out = TrajectoryOutput {
            true_belief: Vec::with_capacity(times.len()),
            public_ratio: Vec::with_capacity(times.len()),
            reconstruction_dev: 0.0,
        };
        let mut next_record = 0usize;
        let m_true = cfg.model.hypothesis_count() - 1;

        for t in 1..=cfg.horizon {
            sample_edges(&cfg.network, &mut wrng, &mut edges);
            metropolis_into(&mut w, n, &edges);
            apply_rule_in_place(&mut w, cfg.weights);
            let y = DVector::from_fn(n, |_, _| {
                cfg.model.true_mean() + cfg.model.sigma * std_normal(&mut yrng)
            });
            sl_step(&mut state, &y, &w, &cfg.model, t)?;

            if next_record < times.len() && times[next_record] == t {
                let ratios = public_log_ratios(&state, t);
                let beliefs: Vec<f64> = (0..n)
                    .map(|i| state.log_public[(i, m_true)].exp())
                    .collect();
                for (i, b) in beliefs.iter().enumerate() {
                    let exponents: Vec<f64> = (0..cfg.model.alternatives())
                        .map(|k| t as f64 * ratios[(i, k)])
                        .collect();
                    let reconstructed = 1.0 / (1.0 + exponents.iter().map(|e| e.exp()).sum::<f64>());
                    out.reconstruction_dev = out.reconstruction_dev.max((b - reconstructed).abs());
                }
                out.true_belief.push(beliefs);
                out.public_ratio.push(ratios);
                next_record += 1;
            }
        }
        Ok(out)
    };

    let outputs: Vec<TrajectoryOutput> = (0..cfg.trajectories)
        .into_par_iter()
        .map(run_one)
        .collect::<Result<Vec<_>>>()?;

    let mut ensemble = SlEnsemble {
        record_times: times.clone(),
        true_belief: vec![Vec::new(); times.len()],
        public_ratio: vec![Vec::new(); times.len()],
        reconstruction_dev: 0.0,
    };
    for out in outputs {
        ensemble.reconstruction_dev = ensemble.reconstruction_dev.max(out.reconstruction_dev);
        for (k, (b, r)) in out.true_belief.into_iter().zip(out.public_ratio).enumerate() {
            ensemble.true_belief[k].push(b);
            ensemble.public_ratio[k].push(r);
        }
    }
    Ok(ensemble)
}

/// Median of a slice (empty slices yield NaN).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Convergence summary of the true-hypothesis beliefs.
#[derive(Debug, Clone)]
pub struct SlConvergenceReport {
    /// Median of `b^M` per node at the final recorded time.
    pub final_median_true_belief: Vec<f64>,
    /// Fraction of (trajectory, node) samples with `b^M > 1 - 1e-3` at the
    /// final recorded time.
    pub fraction_confident: f64,
    /// Worst deviation of the reconstruction identity
    /// `b^M = 1 / (1 + sum exp(t X^m))`.
    pub reconstruction_dev: f64,
}

/// Summarizes how strongly the ensemble's final beliefs concentrate on the truth.
pub fn true_belief_convergence_check(ensemble: &SlEnsemble) -> Result<SlConvergenceReport> {
    let last = ensemble.true_belief.last().ok_or(Error::EmptyCurve)?;
    if last.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let nodes = last[0].len();
    let mut per_node: Vec<Vec<f64>> = vec![Vec::with_capacity(last.len()); nodes];
    let mut confident = 0usize;
    let mut total = 0usize;
    for traj in last {
        for (i, b) in traj.iter().enumerate() {
            per_node[i].push(*b);
            if *b > 1.0 - 1e-3 {
                confident += 1;
            }
            total += 1;
        }
    }
    Ok(SlConvergenceReport {
        final_median_true_belief: per_node.iter().map(|v| median(v)).collect(),
        fraction_confident: confident as f64 / total as f64,
        reconstruction_dev: ensemble.reconstruction_dev,
    })
}
