//! Monte Carlo engine for the consensus+innovations recursion.
//!
//! Each trajectory iterates
//!
//! ```text
//! X_t = W_t ( (t-1)/t * X_{t-1} + 1/t * Z_t )
//! ```
//!
//! with `W_t` drawn from the network model and `Z_t` rows drawn from the
//! innovation source, recording per-node target hits at the configured
//! times. Trajectories are independent work units on a rayon pool; each one
//! derives two counter-based ChaCha streams from `(seed, trajectory index)`
//! (one for weight draws, one for innovations), so results are bit-identical
//! regardless of thread schedule and the two draw sequences stay independent.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::graph::GraphDistribution;
use crate::rates::{GaussianSource, TargetSet};

/// How a realized topology maps to a weight matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    /// `W_ij = 1 / (1 + max(deg_i, deg_j))` on realized edges, diagonal
    /// takes the residual. Stochastic, symmetric, positive diagonal for
    /// every realization.
    Metropolis,
    /// `(1 - tau) I + tau M` with `M` the Metropolis matrix; `tau` in (0, 1].
    LazyUniform { tau: f64 },
}

impl WeightRule {
    pub fn validate(&self) -> Result<()> {
        if let WeightRule::LazyUniform { tau } = self {
            if !(*tau > 0.0 && *tau <= 1.0) {
                return Err(Error::InvalidSimulationConfig(format!(
                    "lazy-uniform tau must lie in (0, 1], got {tau}"
                )));
            }
        }
        Ok(())
    }
}

/// Metropolis weight matrix for an explicit edge list on `n` vertices.
pub(crate) fn metropolis_into(w: &mut DMatrix<f64>, n: usize, edges: &[(usize, usize)]) {
    w.fill(0.0);
    let mut deg = vec![0usize; n + 1];
    for &(a, b) in edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    for &(a, b) in edges {
        let val = 1.0 / (1.0 + deg[a].max(deg[b]) as f64);
        w[(a - 1, b - 1)] = val;
        w[(b - 1, a - 1)] = val;
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        w[(i, i)] = 1.0 - off;
    }
}

pub(crate) fn apply_rule_in_place(w: &mut DMatrix<f64>, rule: WeightRule) {
    if let WeightRule::LazyUniform { tau } = rule {
        let n = w.nrows();
        for i in 0..n {
            for j in 0..n {
                let base = if i == j { 1.0 } else { 0.0 };
                w[(i, j)] = (1.0 - tau) * base + tau * w[(i, j)];
            }
        }
    }
}

/// Draws one realized topology and builds its weight matrix.
pub fn sample_weight_matrix(
    d: &GraphDistribution,
    rule: WeightRule,
    rng: &mut impl Rng,
) -> DMatrix<f64> {
    let n = d.vertex_count();
    let mut w = DMatrix::zeros(n, n);
    let mut edges = Vec::new();
    sample_edges(d, rng, &mut edges);
    metropolis_into(&mut w, n, &edges);
    apply_rule_in_place(&mut w, rule);
    w
}

pub(crate) fn sample_edges(d: &GraphDistribution, rng: &mut impl Rng, edges: &mut Vec<(usize, usize)>) {
    edges.clear();
    match d {
        GraphDistribution::Explicit(support) => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = &support[support.len() - 1].0;
            for (g, p) in support {
                acc += p;
                if u < acc {
                    chosen = g;
                    break;
                }
            }
            edges.extend(chosen.edges());
        }
        GraphDistribution::IidFailures { base, fail_prob } => {
            let present = 1.0 - fail_prob;
            for e in base.edges() {
                if rng.gen::<f64>() < present {
                    edges.push(e);
                }
            }
        }
    }
}

/// One consensus+innovations step: `W ((t-1)/t X_prev + 1/t Z)`.
///
/// At `t = 1` the previous state is multiplied by zero, so `X_1 = W_1 Z_1`.
pub fn step_states(
    x_prev: &DMatrix<f64>,
    z: &DMatrix<f64>,
    w: &DMatrix<f64>,
    t: usize,
) -> Result<DMatrix<f64>> {
    if t < 1 {
        return Err(Error::InvalidSimulationConfig("time must be >= 1".into()));
    }
    let (n, dim) = (x_prev.nrows(), x_prev.ncols());
    if z.nrows() != n || z.ncols() != dim || w.nrows() != n || w.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.nrows() });
    }
    let tf = t as f64;
    let mix = x_prev * ((tf - 1.0) / tf) + z * (1.0 / tf);
    Ok(w * mix)
}

/// Monte Carlo experiment description.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub network: GraphDistribution,
    pub weights: WeightRule,
    pub source: GaussianSource,
    /// Number of recursion steps per trajectory.
    pub horizon: usize,
    /// Number of independent trajectories.
    pub trajectories: usize,
    pub seed: u64,
    /// `(node, target set)` pairs whose hit counts are recorded.
    pub targets: Vec<(usize, TargetSet)>,
    /// Strictly increasing times at which hits are counted.
    pub record_times: Vec<usize>,
    /// Keep full state snapshots at record times (memory scales with
    /// `trajectories * record_times`).
    pub store_states: bool,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.trajectories < 1 {
            return Err(Error::InvalidSimulationConfig("trajectories must be >= 1".into()));
        }
        if self.horizon < 1 {
            return Err(Error::InvalidSimulationConfig("horizon must be >= 1".into()));
        }
        if self.record_times.is_empty() {
            return Err(Error::InvalidSimulationConfig("record_times must be nonempty".into()));
        }
        if self.record_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSimulationConfig(
                "record_times must be strictly increasing".into(),
            ));
        }
        if *self.record_times.last().unwrap() > self.horizon {
            return Err(Error::InvalidSimulationConfig(
                "record_times must not exceed the horizon".into(),
            ));
        }
        let n = self.network.vertex_count();
        for (node, target) in &self.targets {
            if *node < 1 || *node > n {
                return Err(Error::VertexOutOfRange { vertex: *node, n });
            }
            if target.dim() != self.source.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.source.dim(),
                    got: target.dim(),
                });
            }
        }
        Ok(())
    }
}

/// Hit counts (and optional state snapshots) of a Monte Carlo run.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub record_times: Vec<usize>,
    pub targets: Vec<(usize, TargetSet)>,
    /// `hits[time_idx][target_idx]`, out of `total` trajectories.
    pub hits: Vec<Vec<u64>>,
    pub total: u64,
    /// `snapshots[trajectory][time_idx]` N x d states, when requested.
    pub snapshots: Option<Vec<Vec<DMatrix<f64>>>>,
}

/// One point of an empirical decay curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: usize,
    pub hits: u64,
    pub total: u64,
}

impl CurvePoint {
    /// `-(1/t) log(hits/total)`; `None` when no trajectory hit the target.
    pub fn rate(&self) -> Option<f64> {
        if self.hits == 0 {
            None
        } else {
            Some(-((self.hits as f64 / self.total as f64).ln()) / self.t as f64)
        }
    }
}

impl TrajectoryEnsemble {
    fn target_index(&self, node: usize, target_id: usize) -> Result<usize> {
        match self.targets.get(target_id) {
            Some((n, _)) if *n == node => Ok(target_id),
            _ => Err(Error::UnknownTarget { node, target: target_id }),
        }
    }

    /// Raw hit-count curve for a `(node, target_id)` pair.
    pub fn curve(&self, node: usize, target_id: usize) -> Result<Vec<CurvePoint>> {
        let idx = self.target_index(node, target_id)?;
        Ok(self
            .record_times
            .iter()
            .enumerate()
            .map(|(k, &t)| CurvePoint { t, hits: self.hits[k][idx], total: self.total })
            .collect())
    }

    /// Empirical decay-rate curve `(t, -(1/t) log(hits/total))`; zero-hit
    /// times carry a missing marker instead of an infinity.
    pub fn empirical_rate_curve(
        &self,
        node: usize,
        target_id: usize,
    ) -> Result<Vec<(usize, Option<f64>)>> {
        Ok(self
            .curve(node, target_id)?
            .into_iter()
            .map(|p| (p.t, p.rate()))
            .collect())
    }
}

/// Runs the Monte Carlo ensemble described by the config.
pub fn run_ensemble(cfg: &SimulationConfig) -> Result<TrajectoryEnsemble> {
    cfg.validate()?;
    let n = cfg.network.vertex_count();
    let dim = cfg.source.dim();
    let times = &cfg.record_times;

    struct TrajectoryOutput {
        hits: Vec<Vec<u64>>,
        snapshots: Option<Vec<DMatrix<f64>>>,
    }

    let run_one = |traj: usize| -> Result<TrajectoryOutput> {
        let mut wrng = ChaCha8Rng::seed_from_u64(cfg.seed);
        wrng.set_stream(2 * traj as u64);
        let mut zrng = ChaCha8Rng::seed_from_u64(cfg.seed);
        zrng.set_stream(2 * traj as u64 + 1);

        let mut x = DMatrix::zeros(n, dim);
        let mut mix = DMatrix::zeros(n, dim);
        let mut xnext = DMatrix::zeros(n, dim);
        let mut w = DMatrix::zeros(n, n);
        let mut z = DMatrix::zeros(n, dim);
        let mut edges = Vec::with_capacity(16);

        let mut hits = vec![vec![0u64; cfg.targets.len()]; times.len()];
        let mut snapshots = cfg.store_states.then(Vec::new);
        let mut next_record = 0usize;

        for t in 1..=cfg.horizon {
            sample_edges(&cfg.network, &mut wrng, &mut edges);
            metropolis_into(&mut w, n, &edges);
            apply_rule_in_place(&mut w, cfg.weights);

            for i in 0..n {
                let draw = cfg.source.sample(&mut zrng);
                for j in 0..dim {
                    z[(i, j)] = draw[j];
                }
            }

            let tf = t as f64;
            let keep = (tf - 1.0) / tf;
            let fresh = 1.0 / tf;
            for i in 0..n {
                for j in 0..dim {
                    mix[(i, j)] = keep * x[(i, j)] + fresh * z[(i, j)];
                }
            }
            w.mul_to(&mix, &mut xnext);
            std::mem::swap(&mut x, &mut xnext);

            if next_record < times.len() && times[next_record] == t {
                for (k, (node, target)) in cfg.targets.iter().enumerate() {
                    let row = DVector::from_iterator(dim, (0..dim).map(|j| x[(node - 1, j)]));
                    if target.contains(&row, &cfg.source)? {
                        hits[next_record][k] += 1;
                    }
                }
                if let Some(s) = snapshots.as_mut() {
                    s.push(x.clone());
                }
                next_record += 1;
            }
        }
        Ok(TrajectoryOutput { hits, snapshots })
    };

    let outputs: Vec<TrajectoryOutput> = (0..cfg.trajectories)
        .into_par_iter()
        .map(run_one)
        .collect::<Result<Vec<_>>>()?;

    let mut hits = vec![vec![0u64; cfg.targets.len()]; times.len()];
    let mut snapshots = cfg.store_states.then(Vec::new);
    for out in outputs {
        for (k, row) in out.hits.iter().enumerate() {
            for (j, h) in row.iter().enumerate() {
                hits[k][j] += h;
            }
        }
        if let (Some(all), Some(one)) = (snapshots.as_mut(), out.snapshots) {
            all.push(one);
        }
    }
    Ok(TrajectoryEnsemble {
        record_times: times.clone(),
        targets: cfg.targets.clone(),
        hits,
        total: cfg.trajectories as u64,
        snapshots,
    })
}

/// Exact two-sided Clopper-Pearson interval for a binomial proportion.
pub fn clopper_pearson(hits: u64, total: u64, confidence: f64) -> (f64, f64) {
    assert!(total > 0 && hits <= total);
    let alpha = 1.0 - confidence;
    let (k, n) = (hits as f64, total as f64);
    let lo = if hits == 0 {
        0.0
    } else {
        beta_quantile(k, n - k + 1.0, alpha / 2.0)
    };
    let hi = if hits == total {
        1.0
    } else {
        beta_quantile(k + 1.0, n - k, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Beta quantile by bisecting the (accurate) regularized incomplete beta
/// CDF; the library's own inverse only resolves to about 1e-5.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let dist = Beta::new(a, b).unwrap();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if dist.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Tail-rate estimate versus theoretical bounds.
#[derive(Debug, Clone)]
pub struct BoundComparison {
    /// Average of `-(1/t) log p_hat` over the last quartile of usable
    /// (nonzero-hit) recorded times.
    pub tail_rate: f64,
    /// Average 95% Clopper-Pearson half-width of the same points.
    pub ci_halfwidth: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Times entering the tail average.
    pub tail_times: Vec<usize>,
    pub usable_points: usize,
    pub within_bounds: bool,
}

/// Compares an empirical hit curve against `[lower, upper]` theoretical
/// inaccuracy rates, with a 95% binomial confidence half-width.
pub fn bound_comparison(
    curve: &[CurvePoint],
    lower_bound: f64,
    upper_bound: f64,
) -> Result<BoundComparison> {
    if lower_bound > upper_bound {
        return Err(Error::InvalidBounds { lower: lower_bound, upper: upper_bound });
    }
    let usable: Vec<&CurvePoint> = curve.iter().filter(|p| p.hits > 0).collect();
    if usable.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let quartile = usable.len().div_ceil(4);
    let tail = &usable[usable.len() - quartile..];

    let mut rate_sum = 0.0;
    let mut hw_sum = 0.0;
    let mut tail_times = Vec::with_capacity(tail.len());
    for p in tail {
        rate_sum += p.rate().expect("tail points have hits > 0");
        let (p_lo, p_hi) = clopper_pearson(p.hits, p.total, 0.95);
        // rate interval endpoints come from the probability interval
        let hw = if p_lo > 0.0 {
            (p_hi.ln() - p_lo.ln()) / (2.0 * p.t as f64)
        } else {
            f64::INFINITY
        };
        hw_sum += hw;
        tail_times.push(p.t);
    }
    let tail_rate = rate_sum / tail.len() as f64;
    let ci_halfwidth = hw_sum / tail.len() as f64;
    let within_bounds =
        tail_rate >= lower_bound - ci_halfwidth && tail_rate <= upper_bound + ci_halfwidth;
    Ok(BoundComparison {
        tail_rate,
        ci_halfwidth,
        lower_bound,
        upper_bound,
        tail_times,
        usable_points: usable.len(),
        within_bounds,
    })
}

/// Empirical decay curve of `P(|W_t ... W_1 - J| > 1/t)` (spectral norm),
/// the quantity whose limit is the rate of consensus.
pub fn consensus_rate_estimate(
    d: &GraphDistribution,
    rule: WeightRule,
    horizon: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<(usize, Option<f64>)>> {
    rule.validate()?;
    if horizon < 1 || reps < 1 {
        return Err(Error::InvalidSimulationConfig("horizon and reps must be >= 1".into()));
    }
    let n = d.vertex_count();
    let j_n = DMatrix::from_element(n, n, 1.0 / n as f64);

    let counts: Vec<u64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let mut phi = DMatrix::<f64>::identity(n, n);
            let mut edges = Vec::new();
            let mut w = DMatrix::zeros(n, n);
            let mut next = DMatrix::zeros(n, n);
            let mut far = vec![0u64; horizon];
            for t in 1..=horizon {
                sample_edges(d, &mut rng, &mut edges);
                metropolis_into(&mut w, n, &edges);
                apply_rule_in_place(&mut w, rule);
                w.mul_to(&phi, &mut next);
                std::mem::swap(&mut phi, &mut next);
                let dev = (&phi - &j_n).singular_values().max();
                if dev > 1.0 / t as f64 {
                    far[t - 1] = 1;
                }
            }
            far
        })
        .reduce(
            || vec![0u64; horizon],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    Ok((1..=horizon)
        .map(|t| {
            let c = counts[t - 1];
            let rate = if c > 0 {
                Some(-((c as f64 / reps as f64).ln()) / t as f64)
            } else {
                None
            };
            (t, rate)
        })
        .collect())
}
