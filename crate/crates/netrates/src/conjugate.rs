//! Discrete Legendre-Fenchel transforms on uniform scalar grids.
//!
//! [`numeric_conjugate`] computes `g(l) = max_i (l * x_i - f(x_i))` exactly
//! over the sampled points; applying it twice ([`numeric_biconjugate`])
//! approximates the closed convex hull of `f`. The double transform is the
//! numerical oracle against which the closed-form convex envelopes are
//! validated.
//!
//! The max over samples only ever lands on the lower convex hull of the
//! sampled points, and along the hull the argmax is nondecreasing in `l`, so
//! one monotone sweep evaluates an entire sorted dual grid in O(n + m). This
//! keeps million-point dual grids cheap, which is what the back transform
//! needs: its error is bounded by (dual spacing) x (longest linear span of
//! the hull) / 2.

use crate::error::{Error, Result};

/// Uniformly sampled scalar function on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGridFunction {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

impl ScalarGridFunction {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || values.len() < 3 {
            return Err(Error::DegenerateGrid);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateGrid);
        }
        Ok(Self { lo, hi, values })
    }

    /// Samples `f` at `len` uniformly spaced points of `[lo, hi]`.
    pub fn sample(lo: f64, hi: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if len < 3 {
            return Err(Error::DegenerateGrid);
        }
        let step = (hi - lo) / (len - 1) as f64;
        Self::new(lo, hi, (0..len).map(|i| f(lo + i as f64 * step)).collect())
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * i as f64 / (self.values.len() - 1) as f64
    }

    pub fn value_at(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.values.len()).map(|i| (self.x_at(i), self.values[i]))
    }

    /// Indices of the lower convex hull of the sampled points.
    fn lower_hull(&self) -> Vec<usize> {
        let n = self.values.len();
        let mut hull: Vec<usize> = Vec::with_capacity(n);
        for i in 0..n {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                // keep b only if it lies strictly below the chord a -> i
                let (xa, ya) = (self.x_at(a), self.values[a]);
                let (xb, yb) = (self.x_at(b), self.values[b]);
                let (xi, yi) = (self.x_at(i), self.values[i]);
                if (yb - ya) * (xi - xa) - (yi - ya) * (xb - xa) >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        hull
    }

    /// Max absolute difference against another grid function on a shared grid.
    pub fn max_abs_diff(&self, other: &ScalarGridFunction) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "grids must align");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Discrete Legendre-Fenchel transform onto a caller-specified dual grid:
/// `g(l_j) = max_i (l_j * x_i - f(x_i))`.
pub fn numeric_conjugate(
    f: &ScalarGridFunction,
    dual_lo: f64,
    dual_hi: f64,
    dual_len: usize,
) -> Result<ScalarGridFunction> {
    if !(dual_lo.is_finite() && dual_hi.is_finite() && dual_lo < dual_hi) || dual_len < 3 {
        return Err(Error::DegenerateGrid);
    }
    let hull = f.lower_hull();
    let dual_step = (dual_hi - dual_lo) / (dual_len - 1) as f64;
    let mut out = Vec::with_capacity(dual_len);
    let mut k = 0usize;
    for j in 0..dual_len {
        let lambda = dual_lo + j as f64 * dual_step;
        // argmax over hull vertices is nondecreasing in lambda
        while k + 1 < hull.len() {
            let cur = hull[k];
            let next = hull[k + 1];
            let v_cur = lambda * f.x_at(cur) - f.values[cur];
            let v_next = lambda * f.x_at(next) - f.values[next];
            if v_next >= v_cur {
                k += 1;
            } else {
                break;
            }
        }
        let i = hull[k];
        out.push(lambda * f.x_at(i) - f.values[i]);
    }
    ScalarGridFunction::new(dual_lo, dual_hi, out)
}

/// Default dual-grid length used by [`numeric_biconjugate`].
pub fn default_dual_len(primal_len: usize) -> usize {
    (4 * primal_len + 1).max(1_000_001)
}

/// Conjugates twice, returning an approximation of the closed convex hull of
/// `f` on its own grid. The dual grid spans the secant-slope range of the
/// samples.
pub fn numeric_biconjugate(f: &ScalarGridFunction) -> Result<ScalarGridFunction> {
    numeric_biconjugate_with(f, default_dual_len(f.len()))
}

pub fn numeric_biconjugate_with(
    f: &ScalarGridFunction,
    dual_len: usize,
) -> Result<ScalarGridFunction> {
    let n = f.len();
    let step = (f.hi - f.lo) / (n - 1) as f64;
    let mut s_min = f64::INFINITY;
    let mut s_max = f64::NEG_INFINITY;
    for i in 0..n - 1 {
        let s = (f.values[i + 1] - f.values[i]) / step;
        s_min = s_min.min(s);
        s_max = s_max.max(s);
    }
    if s_min == s_max {
        // affine data; widen the dual window around the single slope
        s_min -= 1.0;
        s_max += 1.0;
    }
    let pad = (s_max - s_min) / (dual_len - 1) as f64;
    let g = numeric_conjugate(f, s_min - pad, s_max + pad, dual_len)?;
    numeric_conjugate(&g, f.lo, f.hi, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_conjugate(
        f: &ScalarGridFunction,
        dual_lo: f64,
        dual_hi: f64,
        dual_len: usize,
    ) -> Vec<f64> {
        let dual_step = (dual_hi - dual_lo) / (dual_len - 1) as f64;
        (0..dual_len)
            .map(|j| {
                let lambda = dual_lo + j as f64 * dual_step;
                f.points()
                    .map(|(x, v)| lambda * x - v)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    #[test]
    fn conjugate_of_half_square_is_half_square() {
        let f = ScalarGridFunction::sample(-10.0, 10.0, 4001, |x| 0.5 * x * x).unwrap();
        let g = numeric_conjugate(&f, -5.0, 5.0, 1001).unwrap();
        let worst = g
            .points()
            .map(|(l, v)| (v - 0.5 * l * l).abs())
            .fold(0.0, f64::max);
        // discrete sup over samples undershoots by at most (h/2)^2 / 2
        assert!(worst < 1e-5, "max error {worst}");
    }

    #[test]
    fn conjugate_shift_rule() {
        let f = ScalarGridFunction::sample(-10.0, 10.0, 2001, |x| 0.5 * x * x + 5.0).unwrap();
        let g = numeric_conjugate(&f, -4.0, 4.0, 801).unwrap();
        let worst = g
            .points()
            .map(|(l, v)| (v - (0.5 * l * l - 5.0)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-4, "max error {worst}");
    }

    #[test]
    fn conjugate_of_linear_function() {
        let f = ScalarGridFunction::sample(-10.0, 10.0, 2001, |x| 2.0 * x).unwrap();
        let g = numeric_conjugate(&f, 0.0, 4.0, 5).unwrap();
        // g(l) = max_x (l - 2) x = 10 |l - 2| on [-10, 10]
        let at2 = g.value_at(2);
        assert!(at2.abs() < 1e-12, "g(2) = {at2}");
        assert!((g.value_at(3) - 10.0).abs() < 1e-12);
        assert!((g.value_at(0) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn hull_sweep_matches_naive_max() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let len = rng.gen_range(3..60);
            let values: Vec<f64> = (0..len).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let f = ScalarGridFunction::new(-2.0, 3.0, values).unwrap();
            let g = numeric_conjugate(&f, -7.0, 7.0, 97).unwrap();
            let naive = naive_conjugate(&f, -7.0, 7.0, 97);
            for (j, want) in naive.iter().enumerate() {
                assert!(
                    (g.value_at(j) - want).abs() < 1e-12,
                    "lambda index {j}: {} vs {want}",
                    g.value_at(j)
                );
            }
        }
    }

    #[test]
    fn biconjugate_of_convex_function_is_identity() {
        let f = ScalarGridFunction::sample(-8.0, 8.0, 2001, |x| 0.5 * x * x).unwrap();
        let h = numeric_biconjugate_with(&f, 200_001).unwrap();
        assert!(f.max_abs_diff(&h) < 1e-4);
    }

    #[test]
    fn biconjugate_convexifies_a_double_well() {
        // min over the two shifted parabolas; hull bridges [-1, 1] at height 0
        let f = ScalarGridFunction::sample(-4.0, 4.0, 2001, |x| {
            let a = (x - 1.0) * (x - 1.0);
            let b = (x + 1.0) * (x + 1.0);
            a.min(b)
        })
        .unwrap();
        let h = numeric_biconjugate_with(&f, 200_001).unwrap();
        for (x, v) in h.points() {
            let want = if x.abs() <= 1.0 { 0.0 } else { (x.abs() - 1.0).powi(2) };
            assert!((v - want).abs() < 1e-3, "x = {x}: {v} vs {want}");
        }
    }

    #[test]
    fn biconjugate_is_idempotent() {
        let f = ScalarGridFunction::sample(-4.0, 4.0, 1001, |x| (x * x - 1.0).abs()).unwrap();
        let once = numeric_biconjugate_with(&f, 100_001).unwrap();
        let twice = numeric_biconjugate_with(&once, 100_001).unwrap();
        assert!(once.max_abs_diff(&twice) < 1e-6);
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        assert!(ScalarGridFunction::new(0.0, 1.0, vec![1.0, 2.0]).is_err());
        assert!(ScalarGridFunction::new(1.0, 1.0, vec![1.0, 2.0, 3.0]).is_err());
        assert!(ScalarGridFunction::new(0.0, 1.0, vec![1.0, f64::NAN, 3.0]).is_err());
        let f = ScalarGridFunction::sample(0.0, 1.0, 11, |x| x).unwrap();
        assert!(numeric_conjugate(&f, 2.0, 1.0, 11).is_err());
        assert!(numeric_conjugate(&f, 0.0, 1.0, 2).is_err());
    }
}
