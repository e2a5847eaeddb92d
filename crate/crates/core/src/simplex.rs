//! Probability simplex, square-root-of-probability space and hypersphere
//! charts.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

/// Entries with magnitude below this are treated as exact zeros when reading
/// off orthant signs.
pub const ZERO_CUTOFF: f64 = 1e-15;

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector<T: Real>(Vec<T>);

impl<T: Real> ProbVector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::param("probability vector must be non-empty"));
        }
        let eps = T::tol(1e-12);
        for (i, &p) in entries.iter().enumerate() {
            if !p.is_finite() || p < -eps || p > T::one() + eps {
                return Err(Error::Invariant(format!("entry {i} = {p} outside [0, 1]")));
            }
        }
        let s = pairwise_sum(&entries);
        if (s - T::one()).abs() > eps {
            return Err(Error::Normalization(format!("entries sum to {s}")));
        }
        Ok(Self(entries.into_iter().map(|p| p.max(T::zero()).min(T::one())).collect()))
    }

    /// Normalizes nonnegative weights onto the simplex.
    pub fn from_weights(weights: &[T]) -> Result<Self> {
        let s = pairwise_sum(weights);
        if s <= T::zero() || weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::param("weights must be nonnegative with positive sum"));
        }
        Self::new(weights.iter().map(|&w| w / s).collect())
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![T::one() / T::from_usize(m).unwrap(); m])
    }

    pub fn entries(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every entry is above [`ZERO_CUTOFF`].
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&p| p > T::lit(ZERO_CUTOFF))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

/// A unit vector in square-root-of-probability space.
#[derive(Debug, Clone, PartialEq)]
pub struct QPoint<T: Real>(Vec<T>);

impl<T: Real> QPoint<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::param("Q-point must be non-empty"));
        }
        let norm2 = pairwise_sum(&entries.iter().map(|&x| x * x).collect::<Vec<_>>());
        if (norm2.sqrt() - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::Normalization(format!("|Q| = {}", norm2.sqrt())));
        }
        Ok(Self(entries))
    }

    /// Normalizes an arbitrary nonzero vector onto the unit sphere.
    pub fn normalized(entries: Vec<T>) -> Result<Self> {
        let norm = entries.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
        if norm <= T::zero() {
            return Err(Error::param("cannot normalize the zero vector"));
        }
        Ok(Self(entries.into_iter().map(|x| x / norm).collect()))
    }

    pub fn entries(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sign pattern: `+1`, `-1`, or `0` for entries below [`ZERO_CUTOFF`].
    pub fn orthant(&self) -> Vec<i8> {
        let cut = T::lit(ZERO_CUTOFF);
        self.0
            .iter()
            .map(|&x| if x.abs() < cut { 0 } else if x > T::zero() { 1 } else { -1 })
            .collect()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0.iter().zip(&other.0).fold(T::zero(), |s, (&a, &b)| s + a * b)
    }
}

pub fn prob_to_q<T: Real>(p: &ProbVector<T>) -> QPoint<T> {
    QPoint(p.entries().iter().map(|&x| x.sqrt()).collect())
}

pub fn q_to_prob<T: Real>(q: &QPoint<T>) -> ProbVector<T> {
    let sq: Vec<T> = q.entries().iter().map(|&x| x * x).collect();
    let s = pairwise_sum(&sq);
    ProbVector(sq.into_iter().map(|x| x / s).collect())
}

/// Great-circle distance on the unit sphere, in `[0, π]`.
pub fn arc_distance<T: Real>(q1: &QPoint<T>, q2: &QPoint<T>) -> T {
    q1.dot(q2).max(-T::one()).min(T::one()).acos()
}

/// Fisher-metric length `√(Σ dPᵢ²/Pᵢ)` of a tangent displacement.
pub fn fisher_line_element<T: Real>(p: &ProbVector<T>, dp: &[T]) -> Result<T> {
    Error::check_dim(p.len(), dp.len())?;
    let drift = dp.iter().fold(T::zero(), |s, &x| s + x);
    let scale = dp.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if drift.abs() > T::tol(1e-12) * (T::one() + scale) {
        return Err(Error::param("tangent displacement must sum to zero"));
    }
    let mut acc = T::zero();
    for (i, (&pi, &d)) in p.entries().iter().zip(dp).enumerate() {
        if pi <= T::lit(ZERO_CUTOFF) {
            return Err(Error::Singularity { index: i });
        }
        acc += d * d / pi;
    }
    Ok(acc.sqrt())
}

/// Surface area `2π^{M/2}/Γ(M/2)` of the unit sphere bounding the unit
/// `M`-ball.
pub fn unit_ball_surface_area<T: Real>(m: usize) -> T {
    assert!(m >= 1, "dimension must be positive");
    let half = m as f64 / 2.0;
    let ln = std::f64::consts::LN_2 + half * std::f64::consts::PI.ln()
        - statrs::function::gamma::ln_gamma(half);
    T::lit(ln.exp())
}

pub(crate) fn standard_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Uniform sample on the full sphere `S^{dim-1}`.
pub fn sample_uniform_sphere<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> QPoint<T> {
    assert!(dim >= 1);
    loop {
        let v: Vec<T> = (0..dim).map(|_| standard_normal(rng)).collect();
        if let Ok(q) = QPoint::normalized(v) {
            return q;
        }
    }
}

/// Uniform sample on the positive orthant of `S^{M-1}`.
pub fn sample_uniform_orthant<T: Real, R: Rng + ?Sized>(m: usize, rng: &mut R) -> QPoint<T> {
    assert!(m >= 2, "need at least two outcomes");
    let q = sample_uniform_sphere::<T, R>(m, rng);
    QPoint(q.0.into_iter().map(|x| x.abs()).collect())
}

/// Coordinate systems on the simplex / sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    /// Hyperspherical angles restricted to the positive orthant,
    /// every `θ_l ∈ [0, π/2]`.
    Hyperspherical,
    /// Hyperspherical angles over the full sphere:
    /// `θ_1..θ_{M-2} ∈ [0, π]`, `θ_{M-1} ∈ [0, 2π)`.
    HypersphericalFull,
    /// Stick-breaking probabilities: `P_1 = λ_1`,
    /// `P_k = λ_k Π_{j<k}(1-λ_j)`, `λ ∈ [0,1]^{M-1}`. For `M = 2` this is
    /// the identity chart `λ_1 = P_1`.
    StickBreaking,
}

/// A chart of `M - 1` coordinates over `M`-outcome probability tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamChart {
    pub kind: ChartKind,
    pub outcomes: usize,
}

impl ParamChart {
    pub fn new(kind: ChartKind, outcomes: usize) -> Result<Self> {
        if outcomes < 2 {
            return Err(Error::param("a chart needs at least two outcomes"));
        }
        Ok(Self { kind, outcomes })
    }

    pub fn hyperspherical(outcomes: usize) -> Self {
        Self::new(ChartKind::Hyperspherical, outcomes).expect("outcomes >= 2")
    }

    pub fn stick_breaking(outcomes: usize) -> Self {
        Self::new(ChartKind::StickBreaking, outcomes).expect("outcomes >= 2")
    }

    pub fn dim(&self) -> usize {
        self.outcomes - 1
    }

    /// Closed coordinate box `[lo, hi]` per coordinate.
    pub fn domain<T: Real>(&self) -> Vec<(T, T)> {
        let d = self.dim();
        match self.kind {
            ChartKind::Hyperspherical => vec![(T::zero(), T::frac_pi_2()); d],
            ChartKind::HypersphericalFull => (0..d)
                .map(|l| if l + 1 == d { (T::zero(), T::two_pi()) } else { (T::zero(), T::pi()) })
                .collect(),
            ChartKind::StickBreaking => vec![(T::zero(), T::one()); d],
        }
    }

    fn check_domain<T: Real>(&self, values: &[T]) -> Result<()> {
        Error::check_dim(self.dim(), values.len())?;
        let eps = T::tol(1e-12);
        for (l, (&v, (lo, hi))) in values.iter().zip(self.domain::<T>()).enumerate() {
            if !v.is_finite() || v < lo - eps || v > hi + eps {
                return Err(Error::Domain(format!(
                    "coordinate {l} = {v} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Maps chart coordinates to probabilities.
    pub fn to_prob<T: Real>(&self, values: &[T]) -> Result<ProbVector<T>> {
        Ok(q_to_prob(&self.to_q(values)?))
    }

    pub fn to_q<T: Real>(&self, values: &[T]) -> Result<QPoint<T>> {
        self.check_domain(values)?;
        Ok(QPoint(self.q_unchecked(values)))
    }

    fn q_unchecked<T: Real>(&self, values: &[T]) -> Vec<T> {
        let m = self.outcomes;
        match self.kind {
            ChartKind::Hyperspherical | ChartKind::HypersphericalFull => {
                let mut q = Vec::with_capacity(m);
                let mut sin_prod = T::one();
                for &theta in values {
                    q.push(sin_prod * theta.cos());
                    sin_prod *= theta.sin();
                }
                q.push(sin_prod);
                q
            }
            ChartKind::StickBreaking => {
                stick_probs(values).into_iter().map(|p| p.max(T::zero()).sqrt()).collect()
            }
        }
    }

    /// Inverse chart. Zero-radius sub-spheres map to zero angles.
    pub fn from_q<T: Real>(&self, q: &QPoint<T>) -> Result<Vec<T>> {
        Error::check_dim(self.outcomes, q.len())?;
        let x = q.entries();
        let m = self.outcomes;
        let vals = match self.kind {
            ChartKind::Hyperspherical | ChartKind::HypersphericalFull => {
                if self.kind == ChartKind::Hyperspherical
                    && x.iter().any(|&v| v < -T::lit(ZERO_CUTOFF))
                {
                    return Err(Error::Domain("orthant chart needs nonnegative Q".into()));
                }
                let mut out = Vec::with_capacity(m - 1);
                for k in 0..m - 1 {
                    if k + 2 == m {
                        let mut t = x[m - 1].atan2(x[m - 2]);
                        if t < T::zero() {
                            t += T::two_pi();
                        }
                        out.push(t);
                    } else {
                        let tail = x[k + 1..].iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
                        out.push(tail.atan2(x[k]));
                    }
                }
                out
            }
            ChartKind::StickBreaking => {
                let p = q_to_prob(q);
                let mut rest = T::one();
                let mut out = Vec::with_capacity(m - 1);
                for &pk in &p.entries()[..m - 1] {
                    let l = if rest > T::lit(ZERO_CUTOFF) { (pk / rest).min(T::one()) } else { T::zero() };
                    out.push(l);
                    rest -= pk;
                }
                out
            }
        };
        Ok(vals)
    }

    pub fn from_prob<T: Real>(&self, p: &ProbVector<T>) -> Result<Vec<T>> {
        self.from_q(&prob_to_q(p))
    }

    /// Jacobian `∂P_i/∂λ_l` (`M × (M-1)`).
    pub fn prob_jacobian<T: Real>(&self, values: &[T]) -> Result<DMatrix<T>> {
        self.check_domain(values)?;
        let m = self.outcomes;
        let d = self.dim();
        Ok(match self.kind {
            ChartKind::Hyperspherical | ChartKind::HypersphericalFull => {
                let q = self.q_unchecked(values);
                let jq = sphere_q_jacobian(values);
                DMatrix::from_fn(m, d, |i, l| T::lit(2.0) * q[i] * jq[(i, l)])
            }
            ChartKind::StickBreaking => stick_jacobian(values),
        })
    }

    /// Jacobian `∂Q_i/∂λ_l` of the (nonnegative) square-root coordinates.
    /// For the stick-breaking chart this is singular on the simplex boundary.
    pub fn q_jacobian<T: Real>(&self, values: &[T]) -> Result<DMatrix<T>> {
        self.check_domain(values)?;
        Ok(match self.kind {
            ChartKind::Hyperspherical | ChartKind::HypersphericalFull => sphere_q_jacobian(values),
            ChartKind::StickBreaking => {
                let q = self.q_unchecked(values);
                let jp = stick_jacobian(values);
                DMatrix::from_fn(jp.nrows(), jp.ncols(), |i, l| {
                    jp[(i, l)] / (T::lit(2.0) * q[i])
                })
            }
        })
    }

    /// Sphere area element `√det(J_Qᵀ J_Q)` at the given coordinates.
    pub fn area_element<T: Real>(&self, values: &[T]) -> Result<T> {
        match self.kind {
            ChartKind::Hyperspherical | ChartKind::HypersphericalFull => {
                self.check_domain(values)?;
                Ok(sphere_scale_factors(values).into_iter().fold(T::one(), |a, h| a * h))
            }
            ChartKind::StickBreaking => {
                let j = self.q_jacobian(values)?;
                Ok((j.transpose() * &j).determinant().abs().sqrt())
            }
        }
    }

    /// Lebesgue element `|det ∂(P_1..P_{M-1})/∂λ|` of the simplex.
    pub fn simplex_volume_element<T: Real>(&self, values: &[T]) -> Result<T> {
        let j = self.prob_jacobian(values)?;
        let d = self.dim();
        Ok(j.view((0, 0), (d, d)).into_owned().determinant().abs())
    }
}

/// Scale factors `h_l = Π_{j<l} sin θ_j` of hyperspherical coordinates, so
/// that `ds_l = h_l dθ_l`.
pub fn sphere_scale_factors<T: Real>(theta: &[T]) -> Vec<T> {
    let mut h = Vec::with_capacity(theta.len());
    let mut s = T::one();
    for &t in theta {
        h.push(s);
        s *= t.sin();
    }
    h
}

fn sphere_q_jacobian<T: Real>(theta: &[T]) -> DMatrix<T> {
    let d = theta.len();
    let m = d + 1;
    DMatrix::from_fn(m, d, |k, l| {
        // Q_k = (Π_{j<k} sin θ_j) · c_k, c_k = cos θ_k (k < M-1) or 1.
        if l > k {
            return T::zero();
        }
        let mut v = T::one();
        for (j, &t) in theta.iter().enumerate().take(k) {
            v *= if j == l { t.cos() } else { t.sin() };
        }
        if l == k {
            -v * theta[k].sin()
        } else if k < d {
            v * theta[k].cos()
        } else {
            v
        }
    })
}

fn stick_probs<T: Real>(lambda: &[T]) -> Vec<T> {
    let mut rest = T::one();
    let mut p = Vec::with_capacity(lambda.len() + 1);
    for &l in lambda {
        p.push(l * rest);
        rest *= T::one() - l;
    }
    p.push(rest);
    p
}

fn stick_jacobian<T: Real>(lambda: &[T]) -> DMatrix<T> {
    let d = lambda.len();
    DMatrix::from_fn(d + 1, d, |k, l| {
        // P_k = λ_k Π_{j<k}(1-λ_j) for k < d; P_d = Π_{j<d}(1-λ_j).
        if l > k || (l == k && k == d) {
            return T::zero();
        }
        let mut v = T::one();
        for (j, &lj) in lambda.iter().enumerate().take(k) {
            v *= if j == l { -T::one() } else { T::one() - lj };
        }
        if k < d && l != k {
            v * lambda[k]
        } else {
            v
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn pv(x: &[f64]) -> ProbVector<f64> {
        ProbVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn prob_to_q_examples() {
        assert_eq!(prob_to_q(&pv(&[1.0, 0.0])).entries(), &[1.0, 0.0]);
        let q = prob_to_q(&pv(&[0.5, 0.5]));
        assert_abs_diff_eq!(q.entries()[0], 0.5f64.sqrt(), epsilon = 1e-15);
        let q = prob_to_q(&pv(&[0.25, 0.25, 0.5]));
        assert_abs_diff_eq!(q.entries()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q.entries()[2], 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn q_to_prob_examples() {
        let p = q_to_prob(&QPoint::new(vec![-1.0, 0.0]).unwrap());
        assert_eq!(p.entries(), &[1.0, 0.0]);
        let p = q_to_prob(&QPoint::new(vec![0.6, -0.8]).unwrap());
        assert_abs_diff_eq!(p.entries()[0], 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(p.entries()[1], 0.64, epsilon = 1e-15);
    }

    #[test]
    fn invalid_vectors_rejected() {
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![1.2, -0.2]).is_err());
        assert!(QPoint::new(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn orthant_signs() {
        let q = QPoint::new(vec![0.6, -0.8, 0.0]).unwrap();
        assert_eq!(q.orthant(), vec![1, -1, 0]);
    }

    #[test]
    fn hyperspherical_chart_examples() {
        let c2 = ParamChart::hyperspherical(2);
        assert_eq!(c2.to_q(&[0.0]).unwrap().entries(), &[1.0, 0.0]);
        let q = c2.to_q(&[FRAC_PI_4]).unwrap();
        assert_abs_diff_eq!(q.entries()[1], 0.5f64.sqrt(), epsilon = 1e-15);
        let c3 = ParamChart::hyperspherical(3);
        let q = c3.to_q(&[FRAC_PI_2, FRAC_PI_2]).unwrap();
        assert_abs_diff_eq!(q.entries()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.entries()[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.entries()[2], 1.0, epsilon = 1e-15);
        assert!(matches!(c2.to_q(&[2.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn chart_round_trips() {
        for kind in [ChartKind::Hyperspherical, ChartKind::StickBreaking] {
            for m in 2..6 {
                let chart = ParamChart::new(kind, m).unwrap();
                let vals: Vec<f64> =
                    (0..m - 1).map(|l| 0.15 + 0.6 * (l as f64 + 1.0) / m as f64).collect();
                let q = chart.to_q(&vals).unwrap();
                let back = chart.from_q(&q).unwrap();
                for (a, b) in vals.iter().zip(&back) {
                    assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                }
            }
        }
        let full = ParamChart::new(ChartKind::HypersphericalFull, 4).unwrap();
        let vals = [2.5, 0.3, 4.0];
        let back = full.from_q(&full.to_q(&vals).unwrap()).unwrap();
        for (a, b) in vals.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        for kind in [ChartKind::Hyperspherical, ChartKind::StickBreaking] {
            let chart = ParamChart::new(kind, 4).unwrap();
            let x = [0.4, 0.7, 0.3];
            let j = chart.prob_jacobian(&x).unwrap();
            let h = 1e-6;
            for l in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[l] += h;
                xm[l] -= h;
                let pp = chart.to_prob(&xp).unwrap();
                let pm = chart.to_prob(&xm).unwrap();
                for i in 0..4 {
                    let fd = (pp.entries()[i] - pm.entries()[i]) / (2.0 * h);
                    assert_abs_diff_eq!(j[(i, l)], fd, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn hyperspherical_area_element_is_orthogonal_product() {
        let chart = ParamChart::hyperspherical(4);
        let x = [0.4f64, 0.9, 0.2];
        let j = chart.q_jacobian(&x).unwrap();
        let g = j.transpose() * &j;
        assert_abs_diff_eq!(g[(0, 1)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g[(1, 2)], 0.0, epsilon = 1e-14);
        let direct = g.determinant().sqrt();
        assert_abs_diff_eq!(chart.area_element(&x).unwrap(), direct, epsilon = 1e-14);
    }

    #[test]
    fn arc_distance_examples() {
        let e1 = QPoint::new(vec![1.0, 0.0]).unwrap();
        let e2 = QPoint::new(vec![0.0, 1.0]).unwrap();
        let d = QPoint::new(vec![0.5f64.sqrt(), 0.5f64.sqrt()]).unwrap();
        assert_eq!(arc_distance(&e1, &e1), 0.0);
        assert_abs_diff_eq!(arc_distance(&e1, &e2), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(arc_distance(&e1, &d), FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn fisher_examples() {
        let eps = 1e-4;
        let v = fisher_line_element(&pv(&[0.5, 0.5]), &[eps, -eps]).unwrap();
        assert_abs_diff_eq!(v, 2e-4, epsilon = 1e-16);
        assert_eq!(fisher_line_element(&pv(&[0.5, 0.5]), &[0.0, 0.0]).unwrap(), 0.0);
        let v = fisher_line_element(&pv(&[0.25, 0.75]), &[eps, -eps]).unwrap();
        assert_abs_diff_eq!(v, eps * (4.0 + 4.0 / 3.0f64).sqrt(), epsilon = 1e-16);
        assert_eq!(
            fisher_line_element(&pv(&[1.0, 0.0]), &[-eps, eps]),
            Err(Error::Singularity { index: 1 })
        );
        assert!(fisher_line_element(&pv(&[0.5, 0.5]), &[eps, eps]).is_err());
    }

    #[test]
    fn surface_areas() {
        assert_abs_diff_eq!(unit_ball_surface_area::<f64>(2), 2.0 * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(unit_ball_surface_area::<f64>(3), 4.0 * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(unit_ball_surface_area::<f64>(4), 2.0 * PI * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(unit_ball_surface_area::<f64>(1), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn orthant_sampler_marginals() {
        let mut rng = seeded(11);
        let n = 100_000;
        let mut sums = [0.0; 3];
        for _ in 0..n {
            let q = sample_uniform_orthant::<f64, _>(3, &mut rng);
            assert!((q.dot(&q) - 1.0).abs() < 1e-12);
            assert!(q.entries().iter().all(|&x| x >= 0.0));
            for (s, &x) in sums.iter_mut().zip(q.entries()) {
                *s += x * x;
            }
        }
        for s in sums {
            assert!((s / n as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn orthant_sampler_angle_is_uniform_for_two_outcomes() {
        let mut rng = seeded(12);
        let thetas: Vec<f64> = (0..100_000)
            .map(|_| {
                let q = sample_uniform_orthant::<f64, _>(2, &mut rng);
                q.entries()[1].atan2(q.entries()[0])
            })
            .collect();
        let ks = crate::stats::ks_one_sample(&thetas, |t| (t / FRAC_PI_2).clamp(0.0, 1.0));
        assert!(ks < 0.01, "ks = {ks}");
    }

    #[test]
    fn f32_round_trip() {
        let p = ProbVector::<f32>::new(vec![0.2, 0.3, 0.5]).unwrap();
        let back = q_to_prob(&prob_to_q(&p));
        assert!(back.max_abs_diff(&p) < 1e-6);
    }
}
