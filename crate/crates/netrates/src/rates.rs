//! Gaussian rate functions and their convex-envelope bounds.
//!
//! For a Gaussian source with mean `m` and covariance `S`, the rate function
//! is the Legendre-Fenchel conjugate of the log-moment generating function:
//!
//! ```text
//! Lambda(l) = l' m + l' S l / 2
//! I(x)      = (x - m)' S^-1 (x - m) / 2
//! ```
//!
//! The distributed-inference bounds are closed convex hulls of
//! `inf { N I(x), a I(x) + r }` where `a` is a component size and `r` a
//! nonnegative lift (`a = 1`, `r = J` gives the uniform lower bound; `a =
//! |C_{i,H}|`, `r = |log p_H|` gives the per-collection upper bound). With
//! `c = a r / (N (N - a))` the hull is, in terms of `I = I(x)` and
//! `H = sqrt(2 I)`:
//!
//! ```text
//! N I                          for I <= c
//! N sqrt(2 c) H - N c          for c < I <= (N/a)^2 c
//! a I + r                      for I > (N/a)^2 c
//! ```
//!
//! The middle piece is the common tangent of the two parabolas in `H`; the
//! touch points sit at `I = c` and `I = (N/a)^2 c`, which makes the three
//! pieces continuous. The numerical biconjugate in [`crate::conjugate`]
//! arbitrates this construction in the tests.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{
    collection_probability, node_component, GraphCollection, GraphDistribution,
};

const SYMMETRY_TOL: f64 = 1e-12;

/// Gaussian innovation source: mean vector and covariance matrix.
///
/// The eigendecomposition is cached for rate evaluation and sampling.
#[derive(Debug, Clone)]
pub struct GaussianSource {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    eigvecs: DMatrix<f64>,
    eigvals: DVector<f64>,
    /// `eigvecs * diag(sqrt(eigvals))`, maps standard normals to samples.
    sampler: DMatrix<f64>,
    spd: bool,
}

impl GaussianSource {
    /// Strictly positive-definite covariance required.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let s = Self::build(mean, cov)?;
        if !s.spd {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(s)
    }

    /// Accepts positive-semidefinite covariance (degenerate sources draw
    /// deterministically along null directions; the rate is `+inf` off the
    /// covariance range).
    pub fn new_psd(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        Self::build(mean, cov)
    }

    fn build(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: cov.nrows() });
        }
        let max_asym = (&cov - cov.transpose()).abs().max();
        if d > 0 && max_asym > SYMMETRY_TOL {
            return Err(Error::AsymmetricCovariance);
        }
        let sym = (&cov + cov.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        let scale = eig.eigenvalues.amax().max(1.0);
        if eig.eigenvalues.iter().any(|&l| l < -1e-12 * scale) {
            return Err(Error::NotPositiveSemidefinite);
        }
        let eigvals: DVector<f64> = eig.eigenvalues.map(|l| l.max(0.0));
        let spd = eigvals.iter().all(|&l| l > 1e-12 * scale);
        let mut sampler = eig.eigenvectors.clone();
        for (j, &l) in eigvals.iter().enumerate() {
            let root = l.sqrt();
            for i in 0..d {
                sampler[(i, j)] *= root;
            }
        }
        Ok(Self {
            mean,
            cov,
            eigvecs: eig.eigenvectors,
            eigvals,
            sampler,
            spd,
        })
    }

    /// Scalar Gaussian source.
    pub fn scalar(mean: f64, variance: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, variance))
    }

    /// Standard scalar Gaussian (mean 0, variance 1).
    pub fn scalar_standard() -> Self {
        Self::scalar(0.0, 1.0).expect("unit variance is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn is_spd(&self) -> bool {
        self.spd
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigvals.amax()
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(())
    }

    /// Log-moment generating function `Lambda(l) = l' m + l' S l / 2`.
    pub fn log_mgf(&self, lambda: &DVector<f64>) -> Result<f64> {
        self.check_dim(lambda)?;
        Ok(lambda.dot(&self.mean) + 0.5 * lambda.dot(&(&self.cov * lambda)))
    }

    /// Rate function `I(x)`; `+inf` off the covariance range when degenerate.
    pub fn rate(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        let y = x - &self.mean;
        let coords = self.eigvecs.transpose() * &y;
        let scale = self.eigvals.amax().max(1.0);
        let y_norm = y.norm();
        let mut total = 0.0;
        for (i, &l) in self.eigvals.iter().enumerate() {
            if l > 1e-12 * scale {
                total += coords[i] * coords[i] / l;
            } else if coords[i].abs() > 1e-9 * y_norm.max(1.0) {
                return Ok(f64::INFINITY);
            }
        }
        Ok(0.5 * total)
    }

    /// Mahalanobis radius `H(x) = sqrt(2 I(x))`.
    pub fn mahalanobis(&self, x: &DVector<f64>) -> Result<f64> {
        Ok((2.0 * self.rate(x)?).sqrt())
    }

    /// Mahalanobis length of an offset vector (measured from the mean).
    pub fn mahalanobis_of_offset(&self, v: &DVector<f64>) -> Result<f64> {
        self.mahalanobis(&(v + &self.mean))
    }

    /// Draws one innovation vector.
    pub fn sample(&self, rng: &mut impl rand::Rng) -> DVector<f64> {
        use rand_distr::{Distribution, StandardNormal};
        let z = DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|_| StandardNormal.sample(rng)),
        );
        &self.mean + &self.sampler * z
    }

    /// A point at signed Mahalanobis offset `rho` from the mean along the
    /// (normalized) direction `v`.
    pub fn point_at_mahalanobis(&self, v: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
        self.check_dim(v)?;
        let h = self.mahalanobis_of_offset(v)?;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::ZeroNormal);
        }
        Ok(&self.mean + v * (rho / h))
    }
}

/// A rate function that factors through the base Gaussian rate: `x ->
/// phi(I(x))` with `phi` nondecreasing. Both the plain Gaussian rate and the
/// envelope bounds have this shape, which reduces set minimization to a
/// scalar problem.
pub trait RateFunction {
    fn source(&self) -> &GaussianSource;

    /// The profile `phi` applied to the base rate value.
    fn apply_to_base_rate(&self, base_rate: f64) -> f64;

    fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.apply_to_base_rate(self.source().rate(x)?))
    }
}

/// The Gaussian rate function `I` itself.
#[derive(Debug, Clone)]
pub struct RateFunctionGaussian {
    source: GaussianSource,
}

impl RateFunctionGaussian {
    pub fn new(source: GaussianSource) -> Self {
        Self { source }
    }

    pub fn mahalanobis(&self, x: &DVector<f64>) -> Result<f64> {
        self.source.mahalanobis(x)
    }
}

impl RateFunction for RateFunctionGaussian {
    fn source(&self) -> &GaussianSource {
        &self.source
    }

    fn apply_to_base_rate(&self, base_rate: f64) -> f64 {
        base_rate
    }
}

/// Closed convex hull of `inf { N I, a I + lift }` over a Gaussian base rate.
#[derive(Debug, Clone)]
pub struct EnvelopeRate {
    base: RateFunctionGaussian,
    n: usize,
    comp_size: usize,
    lift: f64,
    /// Tangency constant `a lift / (N (N - a))`; `+inf` collapses the
    /// envelope to `N I`.
    c: f64,
}

impl EnvelopeRate {
    pub fn new(base: RateFunctionGaussian, n: usize, comp_size: usize, lift: f64) -> Result<Self> {
        if n == 0 || comp_size == 0 || comp_size > n {
            return Err(Error::InvalidComponentSize { comp_size, n });
        }
        if lift < 0.0 || lift.is_nan() {
            return Err(Error::NegativeLift(lift));
        }
        let c = if comp_size == n {
            // inf { N I, N I + lift } = N I regardless of the lift
            f64::INFINITY
        } else {
            comp_size as f64 * lift / (n as f64 * (n - comp_size) as f64)
        };
        Ok(Self { base, n, comp_size, lift, c })
    }

    /// Uniform lower bound `I*`: component size 1 lifted by the rate of
    /// consensus.
    pub fn i_star(base: RateFunctionGaussian, n: usize, consensus_rate: f64) -> Result<Self> {
        Self::new(base, n, 1, consensus_rate)
    }

    /// Upper bound `I_{i,H}` for a node and a disconnected collection:
    /// component size `|C_{i,H}|` lifted by `|log p_H|`.
    pub fn for_node_collection(
        base: RateFunctionGaussian,
        node: usize,
        collection: &GraphCollection,
        distribution: &GraphDistribution,
    ) -> Result<Self> {
        let comp = node_component(node, collection)?;
        let p = collection_probability(collection, distribution)?;
        let lift = if p > 0.0 { p.ln().abs() } else { f64::INFINITY };
        let n = distribution.vertex_count();
        Self::new(base, n, comp.len(), lift)
    }

    pub fn base(&self) -> &RateFunctionGaussian {
        &self.base
    }

    pub fn network_size(&self) -> usize {
        self.n
    }

    pub fn comp_size(&self) -> usize {
        self.comp_size
    }

    pub fn lift(&self) -> f64 {
        self.lift
    }

    /// Base-rate value where the `N I` piece hands over to the tangent.
    pub fn inner_boundary(&self) -> f64 {
        self.c
    }

    /// Base-rate value where the tangent hands over to `a I + lift`.
    pub fn outer_boundary(&self) -> f64 {
        let ratio = self.n as f64 / self.comp_size as f64;
        ratio * ratio * self.c
    }
}

impl RateFunction for EnvelopeRate {
    fn source(&self) -> &GaussianSource {
        self.base.source()
    }

    fn apply_to_base_rate(&self, i: f64) -> f64 {
        let n = self.n as f64;
        if i <= self.c {
            return n * i;
        }
        if i <= self.outer_boundary() {
            return n * (2.0 * self.c).sqrt() * (2.0 * i).sqrt() - n * self.c;
        }
        self.comp_size as f64 * i + self.lift
    }
}

/// Metric for ball-complement target sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// Mahalanobis distance of the innovation source.
    Mahalanobis,
}

/// Region whose hitting probability decays at the inaccuracy rate.
#[derive(Debug, Clone)]
pub enum TargetSet {
    /// `{ x : dist(x, center) >= radius }`
    BallComplement {
        center: DVector<f64>,
        radius: f64,
        metric: Metric,
    },
    /// `{ x : normal' x >= offset }`
    HalfSpace { normal: DVector<f64>, offset: f64 },
}

impl TargetSet {
    pub fn ball_complement(center: DVector<f64>, radius: f64, metric: Metric) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::NonPositiveRadius(radius));
        }
        Ok(Self::BallComplement { center, radius, metric })
    }

    pub fn half_space(normal: DVector<f64>, offset: f64) -> Result<Self> {
        if normal.norm() == 0.0 {
            return Err(Error::ZeroNormal);
        }
        Ok(Self::HalfSpace { normal, offset })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::BallComplement { center, .. } => center.len(),
            Self::HalfSpace { normal, .. } => normal.len(),
        }
    }

    /// Membership test; the source supplies the Mahalanobis metric.
    pub fn contains(&self, x: &DVector<f64>, source: &GaussianSource) -> Result<bool> {
        match self {
            Self::BallComplement { center, radius, metric } => {
                let dist = match metric {
                    Metric::Euclidean => (x - center).norm(),
                    Metric::Mahalanobis => source.mahalanobis_of_offset(&(x - center))?,
                };
                Ok(dist >= *radius)
            }
            Self::HalfSpace { normal, offset } => Ok(normal.dot(x) >= *offset),
        }
    }
}

/// Infimum of a rate function over a target set.
///
/// The rate functions here are nondecreasing transforms of the base Gaussian
/// rate `I`, so the infimum is the transform applied to `inf I` over the set,
/// and `inf I` has closed or one-dimensional forms per set shape. Returns 0
/// whenever the set contains the source mean.
pub fn inaccuracy_rate<R: RateFunction>(rate_fn: &R, set: &TargetSet) -> Result<f64> {
    let source = rate_fn.source();
    if set.dim() != source.dim() {
        return Err(Error::DimensionMismatch { expected: source.dim(), got: set.dim() });
    }
    if set.contains(source.mean(), source)? {
        return Ok(0.0);
    }
    let base_inf = match set {
        TargetSet::HalfSpace { normal, offset } => {
            let gap = offset - normal.dot(source.mean());
            let quad = normal.dot(&(source.cov() * normal));
            if quad <= 0.0 {
                f64::INFINITY
            } else {
                gap * gap / (2.0 * quad)
            }
        }
        TargetSet::BallComplement { center, radius, metric } => {
            match metric {
                Metric::Mahalanobis => {
                    // both balls are Euclidean after whitening
                    let h_cm = source.mahalanobis(center)?;
                    let slack = radius - h_cm;
                    0.5 * slack * slack
                }
                Metric::Euclidean => {
                    if !source.is_spd() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    min_rate_on_sphere(source, center, *radius)?
                }
            }
        }
    };
    Ok(rate_fn.apply_to_base_rate(base_inf))
}

/// Minimum of `I` over the Euclidean sphere `|x - c| = radius` when the mean
/// lies strictly inside the ball.
///
/// In the covariance eigenbasis the stationarity condition reduces to a
/// scalar secular equation in the Lagrange multiplier, monotone on
/// `(0, 1/lambda_max)`; the hard case (offset orthogonal to the top
/// eigenspace) is split out explicitly.
fn min_rate_on_sphere(
    source: &GaussianSource,
    center: &DVector<f64>,
    radius: f64,
) -> Result<f64> {
    let lambda = &source.eigvals;
    let d = lambda.len();
    let w = source.eigvecs.transpose() * (source.mean() - center);
    let l_max = lambda.amax();
    let top = |i: usize| lambda[i] > l_max * (1.0 - 1e-12);

    if w.norm() <= 1e-12 * radius {
        // centered case: cheapest escape is along the softest direction
        return Ok(radius * radius / (2.0 * l_max));
    }

    let objective = |z: &DVector<f64>| -> f64 {
        (0..d).map(|i| (z[i] - w[i]).powi(2) / lambda[i]).sum::<f64>() * 0.5
    };
    // |z(mu)|^2 with stationarity z_i = w_i / (1 - mu lambda_i)
    let norm2_at = |mu: f64| -> f64 {
        (0..d).map(|i| (w[i] / (1.0 - mu * lambda[i])).powi(2)).sum()
    };

    let r2 = radius * radius;
    let mu_cap = 1.0 / l_max;
    let hi0 = mu_cap * (1.0 - 1e-12);

    if norm2_at(hi0) < r2 {
        // hard case: w has no top-eigenspace component; pin mu at the cap
        // and spend the leftover norm budget inside the top eigenspace.
        let mut z = DVector::zeros(d);
        let mut used = 0.0;
        for i in (0..d).filter(|&i| !top(i)) {
            z[i] = w[i] / (1.0 - mu_cap * lambda[i]);
            used += z[i] * z[i];
        }
        let spare = (r2 - used).max(0.0).sqrt();
        if let Some(i_top) = (0..d).find(|&i| top(i)) {
            z[i_top] = spare;
        }
        return Ok(objective(&z));
    }

    // norm2_at is increasing on (0, 1/lambda_max) and below r^2 at 0
    let (mut lo, mut hi) = (0.0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm2_at(mid) < r2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    let z = DVector::from_iterator(d, (0..d).map(|i| w[i] / (1.0 - mu * lambda[i])));
    Ok(objective(&z))
}

/// Result of a pointwise sandwich verification `I <= I* <= I_{i,H} <= N I`.
#[derive(Debug, Clone)]
pub struct SandwichReport {
    /// Largest observed violation of any inequality in the chain.
    pub max_violation: f64,
    pub checked_points: usize,
    /// `(comp_size, lift)` pairs skipped because they break the
    /// preconditions (`lift >= J`, `comp_size >= 1`).
    pub skipped_pairs: Vec<(usize, f64)>,
}

impl SandwichReport {
    pub fn ok(&self, tol: f64) -> bool {
        self.max_violation <= tol && self.skipped_pairs.is_empty()
    }
}

/// Verifies the inequality chain on the supplied grid for every `(comp_size,
/// lift)` pair.
pub fn sandwich_check(
    source: &GaussianSource,
    n: usize,
    consensus_rate: f64,
    pairs: &[(usize, f64)],
    grid: &[DVector<f64>],
) -> Result<SandwichReport> {
    let base = RateFunctionGaussian::new(source.clone());
    let i_star = EnvelopeRate::i_star(base.clone(), n, consensus_rate)?;
    let mut max_violation: f64 = 0.0;
    let mut skipped = Vec::new();
    let mut envelopes = Vec::new();
    for &(comp_size, lift) in pairs {
        if comp_size < 1 || comp_size > n || lift < consensus_rate {
            skipped.push((comp_size, lift));
            continue;
        }
        envelopes.push(EnvelopeRate::new(base.clone(), n, comp_size, lift)?);
    }
    let mut checked = 0;
    for x in grid {
        let i = source.rate(x)?;
        if !i.is_finite() {
            continue;
        }
        let ni = n as f64 * i;
        let star = i_star.apply_to_base_rate(i);
        max_violation = max_violation.max(i - star).max(star - ni);
        for env in &envelopes {
            let upper = env.apply_to_base_rate(i);
            max_violation = max_violation.max(star - upper).max(upper - ni);
        }
        checked += 1;
    }
    Ok(SandwichReport {
        max_violation,
        checked_points: checked,
        skipped_pairs: skipped,
    })
}
