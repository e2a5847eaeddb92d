//! The state in its three equivalent forms: the `(P; χ)` pair, a signed
//! point on `S^{2N-1}`, and a complex `N`-vector.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{arg, inner, norm_sqr, polar, vec_norm, C};
use crate::error::{Error, Result};
use crate::scalar::{angle_distance, pairwise_sum, Real};
use crate::simplex::{sample_uniform_sphere, ProbVector, QPoint, ZERO_CUTOFF};

/// `(P_1..P_N; χ_1..χ_N)`. Phases are stored unwrapped and compared
/// modulo 2π.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState<T: Real> {
    probs: ProbVector<T>,
    phases: Vec<T>,
}

impl<T: Real> QuantumState<T> {
    pub fn new(probs: ProbVector<T>, phases: Vec<T>) -> Result<Self> {
        Error::check_dim(probs.len(), phases.len())?;
        if phases.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invariant("phases must be finite".into()));
        }
        Ok(Self { probs, phases })
    }

    pub fn from_parts(probs: Vec<T>, phases: Vec<T>) -> Result<Self> {
        Self::new(ProbVector::new(probs)?, phases)
    }

    /// Basis state `e_i` with zero phases.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut p = vec![T::zero(); n];
        p[i] = T::one();
        Self { probs: ProbVector::new(p).unwrap(), phases: vec![T::zero(); n] }
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn probs(&self) -> &ProbVector<T> {
        &self.probs
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    /// Equality of probabilities within `tol` and of phases modulo 2π,
    /// ignoring the phase of zero-probability components.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.dim() == other.dim()
            && self.probs.max_abs_diff(&other.probs) <= tol
            && self.phases.iter().zip(&other.phases).zip(self.probs.entries()).all(
                |((&a, &b), &p)| p <= T::lit(ZERO_CUTOFF) || angle_distance(a, b) <= tol,
            )
    }
}

/// A signed unit vector in `Q^{2N}` laid out as
/// `(√P₁cosχ₁, √P₁sinχ₁, …, √P_N sinχ_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BigQ<T: Real>(QPoint<T>);

impl<T: Real> BigQ<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.len() % 2 != 0 {
            return Err(Error::param("Q-vector length must be even"));
        }
        Ok(Self(QPoint::new(entries)?))
    }

    pub fn entries(&self) -> &[T] {
        self.0.entries()
    }

    pub fn point(&self) -> &QPoint<T> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() / 2
    }
}

/// Complex unit vector `v_i = √P_i e^{iχ_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVectorC<T: Real>(DVector<C<T>>);

impl<T: Real> StateVectorC<T> {
    pub fn new(v: DVector<C<T>>) -> Result<Self> {
        let n = vec_norm(&v);
        if (n - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::Normalization(format!("|v| = {n}")));
        }
        Ok(Self(v))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: DVector<C<T>>) -> Result<Self> {
        let n = vec_norm(&v);
        if n <= T::zero() {
            return Err(Error::param("cannot normalize the zero vector"));
        }
        let s = C::new(T::one() / n, T::zero());
        Ok(Self(v.map(|z| z * s)))
    }

    pub(crate) fn new_unchecked(v: DVector<C<T>>) -> Self {
        Self(v)
    }

    pub fn from_slice(v: &[C<T>]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = DVector::from_element(n, C::new(T::zero(), T::zero()));
        v[i] = C::new(T::one(), T::zero());
        Self(v)
    }

    pub fn as_vector(&self) -> &DVector<C<T>> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<C<T>> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn inner(&self, other: &Self) -> C<T> {
        inner(&self.0, &other.0)
    }

    /// `e^{iχ₀} v`.
    pub fn with_global_phase(&self, chi0: T) -> Self {
        let ph = polar(T::one(), chi0);
        Self(self.0.map(|z| z * ph))
    }

    /// Re/Im interleaving onto `S^{2N-1}`.
    pub fn to_big_q(&self) -> BigQ<T> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for z in self.0.iter() {
            out.push(z.re);
            out.push(z.im);
        }
        BigQ(QPoint::normalized(out).expect("unit vector"))
    }

    pub fn from_big_q(q: &BigQ<T>) -> Self {
        let e = q.entries();
        Self(DVector::from_fn(q.dim(), |i, _| C::new(e[2 * i], e[2 * i + 1])))
    }

    /// Largest component-wise modulus difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(T::zero(), |m, (&a, &b)| m.max(norm_sqr(a - b).sqrt()))
    }
}

pub fn to_big_q<T: Real>(s: &QuantumState<T>) -> BigQ<T> {
    let mut out = Vec::with_capacity(2 * s.dim());
    for (&p, &chi) in s.probs.entries().iter().zip(&s.phases) {
        let r = p.sqrt();
        out.push(r * chi.cos());
        out.push(r * chi.sin());
    }
    BigQ(QPoint::normalized(out).expect("valid state has unit norm"))
}

/// Inverse of [`to_big_q`]; zero-amplitude components get phase 0.
pub fn from_big_q<T: Real>(q: &BigQ<T>) -> QuantumState<T> {
    let e = q.entries();
    let n = q.dim();
    let mut probs = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    for i in 0..n {
        let (x, y) = (e[2 * i], e[2 * i + 1]);
        let p = x * x + y * y;
        probs.push(p);
        phases.push(if p < T::lit(ZERO_CUTOFF) { T::zero() } else { y.atan2(x) });
    }
    let s = pairwise_sum(&probs);
    let probs = probs.into_iter().map(|p| p / s).collect();
    QuantumState { probs: ProbVector::new(probs).expect("normalized"), phases }
}

pub fn to_complex<T: Real>(s: &QuantumState<T>) -> StateVectorC<T> {
    StateVectorC(DVector::from_fn(s.dim(), |i, _| {
        polar(s.probs.entries()[i].sqrt(), s.phases[i])
    }))
}

/// Inverse of [`to_complex`]; components with `P_i < 1e-15` get `χ_i = 0`.
pub fn from_complex<T: Real>(v: &StateVectorC<T>) -> Result<QuantumState<T>> {
    let n = vec_norm(&v.0);
    if (n - T::one()).abs() > T::tol(1e-12) {
        return Err(Error::Normalization(format!("|v| = {n}")));
    }
    let mut probs: Vec<T> = v.0.iter().map(|&z| norm_sqr(z)).collect();
    let s = pairwise_sum(&probs);
    probs.iter_mut().for_each(|p| *p /= s);
    let phases = v
        .0
        .iter()
        .zip(&probs)
        .map(|(&z, &p)| if p < T::lit(ZERO_CUTOFF) { T::zero() } else { arg(z) })
        .collect();
    QuantumState::new(ProbVector::new(probs)?, phases)
}

/// Adds `χ₀` to every phase, i.e. `v ↦ e^{iχ₀} v`.
pub fn add_global_phase<T: Real>(s: &QuantumState<T>, chi0: T) -> QuantumState<T> {
    QuantumState {
        probs: s.probs.clone(),
        phases: s.phases.iter().map(|&x| x + chi0).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn of<T: Real>(x: T) -> Self {
        if x < T::zero() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Conditional probabilities and signs of the unobserved binary outcome
/// attached to observed outcome `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenOutcome<T: Real> {
    pub p_a: T,
    pub p_b: T,
    pub sign_a: Sign,
    pub sign_b: Sign,
}

pub fn hidden_outcome_probs<T: Real>(s: &QuantumState<T>, i: usize) -> Result<HiddenOutcome<T>> {
    let chi = *s
        .phases
        .get(i)
        .ok_or_else(|| Error::param(format!("index {i} out of range for N = {}", s.dim())))?;
    let (c, sn) = (chi.cos(), chi.sin());
    let p_a = c * c;
    Ok(HiddenOutcome { p_a, p_b: T::one() - p_a, sign_a: Sign::of(c), sign_b: Sign::of(sn) })
}

/// `(P₁P_{a|1}, P₁P_{b|1}, …, P_N P_{b|N})`.
pub fn full_outcome_distribution<T: Real>(s: &QuantumState<T>) -> ProbVector<T> {
    let mut out = Vec::with_capacity(2 * s.dim());
    for (&p, &chi) in s.probs.entries().iter().zip(&s.phases) {
        let c2 = chi.cos() * chi.cos();
        out.push(p * c2);
        out.push(p * (T::one() - c2));
    }
    ProbVector::new(out).expect("products of distributions")
}

/// Phase evolution under a definite energy: `χ_i ↦ χ_i - EΔt/α`.
pub fn temporal_phase_evolve<T: Real>(
    s: &QuantumState<T>,
    energy: T,
    dt: T,
    action: T,
) -> Result<QuantumState<T>> {
    if action == T::zero() || !action.is_finite() {
        return Err(Error::param("action constant must be nonzero"));
    }
    Ok(add_global_phase(s, -energy * dt / action))
}

/// Draws a state whose `Q`-vector is uniform on `S^{2N-1}`.
pub fn sample_state_prior<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> QuantumState<T> {
    assert!(n >= 1);
    let q = sample_uniform_sphere::<T, R>(2 * n, rng);
    let mut s = from_big_q(&BigQ(q));
    s.phases.iter_mut().for_each(|x| *x = crate::scalar::wrap_angle(*x));
    s
}
