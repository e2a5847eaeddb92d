//! Orthogonal maps on `Q^{2N}`, the phase-offset constraint system and the
//! correspondence with unitary and antiunitary complex maps.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{adjoint, conj_mat, conj_vec, max_abs_diff, modulus, unitarity_defect, C};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::simplex::{sample_uniform_sphere, standard_normal, ProbVector, QPoint};
use crate::state::{add_global_phase, sample_state_prior, to_big_q, BigQ, QuantumState, StateVectorC};
use crate::stats::ks_two_sample;

/// Tolerance for the orthogonality and unitarity invariants.
pub const INVARIANT_TOL: f64 = 1e-10;
/// Below this block scale a 2×2 block counts as zero.
pub const ZERO_BLOCK: f64 = 1e-14;

/// `+1` for unitary maps, `-1` for antiunitary ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sigma {
    Unitary,
    Antiunitary,
}

impl Sigma {
    pub fn value(self) -> i8 {
        match self {
            Sigma::Unitary => 1,
            Sigma::Antiunitary => -1,
        }
    }

    pub fn compose(self, other: Sigma) -> Sigma {
        if self == other {
            Sigma::Unitary
        } else {
            Sigma::Antiunitary
        }
    }
}

impl From<Sigma> for i8 {
    fn from(s: Sigma) -> i8 {
        s.value()
    }
}

impl TryFrom<i8> for Sigma {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sigma::Unitary),
            -1 => Ok(Sigma::Antiunitary),
            _ => Err(format!("sigma must be +1 or -1, got {v}")),
        }
    }
}

/// Real orthogonal `2N×2N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoMap<T: Real> {
    matrix: DMatrix<T>,
}

impl<T: Real> OrthoMap<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::param(format!("expected an even square matrix, got {r}x{c}")));
        }
        let defect = (matrix.transpose() * &matrix - DMatrix::identity(r, r)).amax();
        if defect > T::tol(INVARIANT_TOL) {
            return Err(Error::Invariant(format!("M^T M deviates from I by {defect}")));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: DMatrix::identity(2 * n, 2 * n) }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// Number of complex components `N`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn transpose(&self) -> Self {
        Self { matrix: self.matrix.transpose() }
    }

    pub fn determinant(&self) -> T {
        self.matrix.clone().determinant()
    }
}

/// `v ↦ U v` (σ = +1) or `v ↦ U v*` (σ = −1).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMap<T: Real> {
    u: DMatrix<C<T>>,
    sigma: Sigma,
}

impl<T: Real> ComplexMap<T> {
    pub fn new(u: DMatrix<C<T>>, sigma: Sigma) -> Result<Self> {
        if !u.is_square() || u.nrows() == 0 {
            return Err(Error::param("U must be a nonempty square matrix"));
        }
        let d = unitarity_defect(&u);
        if d > T::tol(INVARIANT_TOL) {
            return Err(Error::Invariant(format!("U^† U deviates from I by {d}")));
        }
        Ok(Self { u, sigma })
    }

    pub fn identity(n: usize) -> Self {
        Self { u: crate::complex::identity(n), sigma: Sigma::Unitary }
    }

    /// `e^{iφ} I`.
    pub fn phase(n: usize, phi: T) -> Self {
        Self { u: crate::complex::identity(n) * crate::complex::cis(phi), sigma: Sigma::Unitary }
    }

    pub fn u(&self) -> &DMatrix<C<T>> {
        &self.u
    }

    pub fn sigma(&self) -> Sigma {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn apply(&self, v: &StateVectorC<T>) -> Result<StateVectorC<T>> {
        Error::check_dim(self.dim(), v.dim())?;
        let x = match self.sigma {
            Sigma::Unitary => &self.u * v.as_vector(),
            Sigma::Antiunitary => &self.u * conj_vec(v.as_vector()),
        };
        Ok(StateVectorC::new_unchecked(x))
    }

    /// `self ∘ other`.
    pub fn then_after(&self, other: &Self) -> Result<Self> {
        Error::check_dim(self.dim(), other.dim())?;
        let inner = match self.sigma {
            Sigma::Unitary => other.u.clone(),
            Sigma::Antiunitary => conj_mat(&other.u),
        };
        Ok(Self { u: &self.u * inner, sigma: self.sigma.compose(other.sigma) })
    }

    pub fn inverse(&self) -> Self {
        match self.sigma {
            Sigma::Unitary => Self { u: adjoint(&self.u), sigma: Sigma::Unitary },
            Sigma::Antiunitary => Self { u: self.u.transpose(), sigma: Sigma::Antiunitary },
        }
    }
}

pub fn apply_ortho<T: Real>(m: &OrthoMap<T>, q: &BigQ<T>) -> Result<BigQ<T>> {
    Error::check_dim(m.matrix.nrows(), q.entries().len())?;
    let out = &m.matrix * DVector::from_column_slice(q.entries());
    Ok(BigQ::new(out.as_slice().to_vec())?)
}

#[derive(Clone, Copy)]
struct Blocks<'a, T: Real>(&'a DMatrix<T>);

impl<T: Real> Blocks<'_, T> {
    /// `(a, b, c, d)` of block `(k, i)`, i.e. rows `2k, 2k+1` and columns
    /// `2i, 2i+1` (0-based).
    #[inline]
    fn get(&self, k: usize, i: usize) -> (T, T, T, T) {
        let m = self.0;
        (m[(2 * k, 2 * i)], m[(2 * k, 2 * i + 1)], m[(2 * k + 1, 2 * i)], m[(2 * k + 1, 2 * i + 1)])
    }

    fn alpha_beta_gamma(&self, k: usize, i: usize) -> (T, T, T) {
        let (a, b, c, d) = self.get(k, i);
        (a * a + c * c, b * b + d * d, a * b + c * d)
    }

    fn abcd(&self, k: usize, i: usize, j: usize) -> (T, T, T, T) {
        let (ai, bi, ci, di) = self.get(k, i);
        let (aj, bj, cj, dj) = self.get(k, j);
        (ai * aj + ci * cj, ai * bj + ci * dj, bi * aj + di * cj, bi * bj + di * dj)
    }
}

fn state_parts<T: Real>(s: &QuantumState<T>) -> (Vec<T>, Vec<T>, Vec<T>, Vec<T>) {
    let p = s.probs().entries().to_vec();
    let r = p.iter().map(|x| x.sqrt()).collect();
    let c = s.phases().iter().map(|x| x.cos()).collect();
    let sn = s.phases().iter().map(|x| x.sin()).collect();
    (p, r, c, sn)
}

fn check_state_dim<T: Real>(m: &OrthoMap<T>, s: &QuantumState<T>) -> Result<()> {
    Error::check_dim(m.dim(), s.dim())
}

fn finish<T: Real>(mut out: Vec<T>) -> Result<ProbVector<T>> {
    out.iter_mut().for_each(|x| *x = x.max(T::zero()));
    ProbVector::new(out)
}

/// `P'_k` from the explicit expansion in `cos χ_i`, `sin χ_i` with the
/// `A, B, C, D` cross coefficients.
pub fn predicted_probs<T: Real>(m: &OrthoMap<T>, s: &QuantumState<T>) -> Result<ProbVector<T>> {
    check_state_dim(m, s)?;
    let n = m.dim();
    let bl = Blocks(&m.matrix);
    let (p, r, c, sn) = state_parts(s);
    let two = T::lit(2.0);
    let out = (0..n)
        .map(|k| {
            let mut acc = T::zero();
            for i in 0..n {
                let (a, b, cc, d) = bl.get(k, i);
                let x = a * c[i] + b * sn[i];
                let y = cc * c[i] + d * sn[i];
                acc += p[i] * (x * x + y * y);
            }
            for i in 0..n {
                for j in i + 1..n {
                    let (aa, bb, cc, dd) = bl.abcd(k, i, j);
                    acc += two
                        * r[i]
                        * r[j]
                        * (aa * c[i] * c[j] + bb * c[i] * sn[j] + cc * sn[i] * c[j] + dd * sn[i] * sn[j]);
                }
            }
            acc
        })
        .collect();
    finish(out)
}

/// `P'_k` regrouped into `χ_i ± χ_j` harmonics with `α, β, γ`.
pub fn predicted_probs_regrouped<T: Real>(
    m: &OrthoMap<T>,
    s: &QuantumState<T>,
) -> Result<ProbVector<T>> {
    check_state_dim(m, s)?;
    let n = m.dim();
    let bl = Blocks(&m.matrix);
    let (p, r, _, _) = state_parts(s);
    let chi = s.phases();
    let half = T::lit(0.5);
    let out = (0..n)
        .map(|k| {
            let mut acc = T::zero();
            for i in 0..n {
                let (al, be, ga) = bl.alpha_beta_gamma(k, i);
                let i1 = (i + 1) % n;
                let (sum, diff) = (chi[i] + chi[i1], chi[i] - chi[i1]);
                acc += half * (al + be) * p[i];
                acc += sum.cos() * (half * (al - be) * p[i] * diff.cos() + ga * p[i] * diff.sin());
                acc += sum.sin() * (-half * (al - be) * p[i] * diff.sin() + ga * p[i] * diff.cos());
            }
            for i in 0..n {
                for j in i + 1..n {
                    let (aa, bb, cc, dd) = bl.abcd(k, i, j);
                    let rr = r[i] * r[j];
                    let (dm, sm) = (chi[i] - chi[j], chi[i] + chi[j]);
                    acc += rr * ((aa + dd) * dm.cos() - (bb - cc) * dm.sin());
                    acc += rr * ((aa - dd) * sm.cos() + (bb + cc) * sm.sin());
                }
            }
            acc
        })
        .collect();
    finish(out)
}

/// `P'_k` by applying `M` to `Q` and summing squares pairwise.
pub fn predicted_probs_by_rotation<T: Real>(
    m: &OrthoMap<T>,
    s: &QuantumState<T>,
) -> Result<ProbVector<T>> {
    check_state_dim(m, s)?;
    let q = apply_ortho(m, &to_big_q(s))?;
    let e = q.entries();
    finish((0..m.dim()).map(|k| e[2 * k] * e[2 * k] + e[2 * k + 1] * e[2 * k + 1]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockType {
    Zero,
    Rotation,
    ReflectionRotation,
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub residual_alpha_beta: f64,
    pub residual_gamma: f64,
    pub residual_ad: f64,
    pub residual_bc: f64,
    /// `block_types[k][i]` classifies the block at rows `k`, columns `i`.
    pub block_types: Vec<Vec<BlockType>>,
    pub row_homogeneous: bool,
    pub column_homogeneous: bool,
    pub homogeneity: bool,
    pub sigma: Option<Sigma>,
}

impl ConstraintReport {
    pub fn max_residual(&self) -> f64 {
        self.residual_alpha_beta.max(self.residual_gamma).max(self.residual_ad).max(self.residual_bc)
    }
}

fn common_type<'a>(it: impl Iterator<Item = &'a BlockType>) -> Option<Option<BlockType>> {
    let mut seen = None;
    for &t in it {
        match t {
            BlockType::Zero => {}
            BlockType::Unconstrained => return None,
            t => match seen {
                None => seen = Some(t),
                Some(s) if s == t => {}
                Some(_) => return None,
            },
        }
    }
    Some(seen)
}

pub fn constraint_coeffs<T: Real>(m: &OrthoMap<T>) -> ConstraintReport {
    constraint_coeffs_with_tol(m, INVARIANT_TOL)
}

/// Evaluates every constraint coefficient and classifies blocks, treating
/// deviations up to `tol` as structural zeros.
pub fn constraint_coeffs_with_tol<T: Real>(m: &OrthoMap<T>, tol: f64) -> ConstraintReport {
    let n = m.dim();
    let bl = Blocks(&m.matrix);
    let (mut r_ab, mut r_g, mut r_ad, mut r_bc) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut types = vec![vec![BlockType::Zero; n]; n];
    for k in 0..n {
        for i in 0..n {
            let (al, be, ga) = bl.alpha_beta_gamma(k, i);
            r_ab = r_ab.max((al - be).abs().as_f64());
            r_g = r_g.max(ga.abs().as_f64());
            let (a, b, c, d) = bl.get(k, i);
            let (a, b, c, d) = (a.as_f64(), b.as_f64(), c.as_f64(), d.as_f64());
            types[k][i] = if al.as_f64() < ZERO_BLOCK && be.as_f64() < ZERO_BLOCK {
                BlockType::Zero
            } else if (a - d).abs() <= tol && (b + c).abs() <= tol {
                BlockType::Rotation
            } else if (a + d).abs() <= tol && (b - c).abs() <= tol {
                BlockType::ReflectionRotation
            } else {
                BlockType::Unconstrained
            };
            for j in i + 1..n {
                let (aa, bb, cc, dd) = bl.abcd(k, i, j);
                r_ad = r_ad.max((aa - dd).abs().as_f64());
                r_bc = r_bc.max((bb + cc).abs().as_f64());
            }
        }
    }
    let row_homogeneous = types.iter().all(|row| common_type(row.iter()).is_some());
    let column_homogeneous =
        (0..n).all(|i| common_type(types.iter().map(|row| &row[i])).is_some());
    let global = common_type(types.iter().flatten());
    let homogeneity = matches!(global, Some(Some(_)));
    let residuals_ok = r_ab.max(r_g).max(r_ad).max(r_bc) <= tol;
    let sigma = match global {
        Some(Some(BlockType::Rotation)) if residuals_ok => Some(Sigma::Unitary),
        Some(Some(BlockType::ReflectionRotation)) if residuals_ok => Some(Sigma::Antiunitary),
        _ => None,
    };
    ConstraintReport {
        residual_alpha_beta: r_ab,
        residual_gamma: r_g,
        residual_ad: r_ad,
        residual_bc: r_bc,
        block_types: types,
        row_homogeneous,
        column_homogeneous,
        homogeneity,
        sigma,
    }
}

/// `(V^†V)_{ij} = Σ_k (A_kij − i B_kij)` computed from the real blocks.
pub fn gram_via_blocks<T: Real>(m: &OrthoMap<T>) -> DMatrix<C<T>> {
    let n = m.dim();
    let bl = Blocks(&m.matrix);
    DMatrix::from_fn(n, n, |i, j| {
        (0..n).fold(C::new(T::zero(), T::zero()), |s, k| {
            let (a, b, _, _) = bl.abcd(k, i, j);
            s + C::new(a, -b)
        })
    })
}

pub fn embed_complex<T: Real>(c: &ComplexMap<T>) -> OrthoMap<T> {
    let n = c.dim();
    let sg = T::lit(f64::from(c.sigma.value()));
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        for i in 0..n {
            let z = c.u[(k, i)];
            m[(2 * k, 2 * i)] = z.re;
            m[(2 * k, 2 * i + 1)] = -sg * z.im;
            m[(2 * k + 1, 2 * i)] = z.im;
            m[(2 * k + 1, 2 * i + 1)] = sg * z.re;
        }
    }
    OrthoMap { matrix: m }
}

/// Reads `(U, σ)` off a map that satisfies the constraint system.
pub fn recast_to_complex<T: Real>(m: &OrthoMap<T>, tol: f64) -> Result<ComplexMap<T>> {
    let report = constraint_coeffs_with_tol(m, tol);
    let sigma = report.sigma.ok_or_else(|| {
        Error::NotRepresentable(format!(
            "max residual {:.3e}, homogeneity {}",
            report.max_residual(),
            report.homogeneity
        ))
    })?;
    let n = m.dim();
    let u = DMatrix::from_fn(n, n, |k, i| C::new(m.matrix[(2 * k, 2 * i)], m.matrix[(2 * k + 1, 2 * i)]));
    let c = ComplexMap::new(u, sigma).map_err(|e| Error::NotRepresentable(e.to_string()))?;
    let err = (embed_complex(&c).matrix - &m.matrix).amax().as_f64();
    if err > tol {
        return Err(Error::NotRepresentable(format!("re-embedding differs by {err:.3e}")));
    }
    Ok(c)
}

/// Common σ along a path of maps; a sign change cannot be reached
/// continuously.
pub fn sigma_path_class<T: Real>(path: &[ComplexMap<T>]) -> Result<Sigma> {
    let first = path.first().ok_or_else(|| Error::param("empty path"))?.sigma;
    match path.iter().position(|c| c.sigma != first) {
        Some(step) => Err(Error::Discontinuity { step }),
        None => Ok(first),
    }
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the
/// phases of `diag(R)` divided out.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMap<T> {
    assert!(n >= 1);
    let half = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let g = DMatrix::from_fn(n, n, |_, _| {
        C::new(standard_normal::<T, R>(rng) * half, standard_normal::<T, R>(rng) * half)
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let m = modulus(d);
        let ph = if m > T::zero() { d * C::new(T::one() / m, T::zero()) } else { C::new(T::one(), T::zero()) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    ComplexMap { u: q, sigma: Sigma::Unitary }
}

/// Haar-random real orthogonal matrix of even size `dim`.
pub fn haar_orthogonal<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> OrthoMap<T> {
    assert!(dim >= 2 && dim % 2 == 0, "dimension must be even");
    let g = DMatrix::from_fn(dim, dim, |_, _| standard_normal::<T, R>(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    OrthoMap { matrix: q }
}

/// A state, offset and outcome index at which a map changes an outcome
/// probability under a global phase shift.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseWitness<T: Real> {
    pub state: QuantumState<T>,
    pub chi0: T,
    pub outcome: usize,
    pub deviation: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCheck<T: Real> {
    pub passed: bool,
    pub max_deviation: T,
    pub witness: Option<PhaseWitness<T>>,
}

fn phase_deviation<T: Real>(m: &OrthoMap<T>, s: &QuantumState<T>, chi0: T) -> (usize, T) {
    let a = predicted_probs(m, s).expect("dimension checked");
    let b = predicted_probs(m, &add_global_phase(s, chi0)).expect("dimension checked");
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (*x - *y).abs())
        .enumerate()
        .fold((0, T::zero()), |best, (k, d)| if d > best.1 { (k, d) } else { best })
}

/// Checks that every outcome probability is unchanged when a constant is
/// added to all phases, on random states and on the single-outcome and
/// two-equal-outcome families.
pub fn check_postulate32<T: Real, R: Rng + ?Sized>(
    m: &OrthoMap<T>,
    trials: usize,
    rng: &mut R,
    tol: T,
) -> Result<PhaseCheck<T>> {
    if trials < 10 {
        return Err(Error::param("need at least 10 trials"));
    }
    let n = m.dim();
    let two_pi = T::two_pi();
    let mut cases: Vec<(QuantumState<T>, T)> = Vec::new();
    for _ in 0..trials {
        let s = sample_state_prior::<T, R>(n, rng);
        let chi0 = T::lit(rng.random::<f64>()) * two_pi;
        cases.push((s, chi0));
    }
    for i in 0..n {
        let phi = T::lit(rng.random::<f64>()) * two_pi;
        let mut p = vec![T::zero(); n];
        p[i] = T::one();
        let chi0 = T::lit(rng.random::<f64>()) * two_pi;
        cases.push((QuantumState::from_parts(p, vec![phi; n])?, chi0));
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut p = vec![T::zero(); n];
            p[i] = T::lit(0.5);
            p[j] = T::lit(0.5);
            let phases = (0..n).map(|_| T::lit(rng.random::<f64>()) * two_pi).collect();
            let chi0 = T::lit(rng.random::<f64>()) * two_pi;
            cases.push((QuantumState::from_parts(p, phases)?, chi0));
        }
    }
    let mut worst: Option<PhaseWitness<T>> = None;
    for (s, chi0) in cases {
        let (k, d) = phase_deviation(m, &s, chi0);
        if worst.as_ref().is_none_or(|w| d > w.deviation) {
            worst = Some(PhaseWitness { state: s, chi0, outcome: k, deviation: d });
        }
    }
    let worst = worst.expect("at least one case");
    let passed = worst.deviation < tol;
    Ok(PhaseCheck { passed, max_deviation: worst.deviation, witness: (!passed).then_some(worst) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurePreservation {
    /// Largest two-sample KS distance over the projections.
    pub statistic: f64,
    /// Bonferroni-corrected p-value.
    pub p_value: f64,
    pub projections: usize,
}

pub const PRESERVATION_PROJECTIONS: usize = 16;

/// Pushes uniform sphere samples through `m` and compares them with fresh
/// uniform samples along random one-dimensional projections.
pub fn measure_preservation_check<T: Real, R: Rng + ?Sized>(
    m: &OrthoMap<T>,
    samples: usize,
    rng: &mut R,
) -> MeasurePreservation {
    let dim = m.matrix.nrows();
    let pushed: Vec<Vec<f64>> = (0..samples)
        .map(|_| {
            let q = sample_uniform_sphere::<T, R>(dim, rng);
            let y = &m.matrix * DVector::from_column_slice(q.entries());
            y.iter().map(|x| x.as_f64()).collect()
        })
        .collect();
    let fresh: Vec<QPoint<f64>> = (0..samples).map(|_| sample_uniform_sphere(dim, rng)).collect();
    let dirs: Vec<QPoint<f64>> =
        (0..PRESERVATION_PROJECTIONS).map(|_| sample_uniform_sphere(dim, rng)).collect();
    let dot = |a: &[f64], d: &QPoint<f64>| a.iter().zip(d.entries()).map(|(x, y)| x * y).sum::<f64>();
    let (mut stat, mut pmin) = (0.0f64, 1.0f64);
    for d in &dirs {
        let a: Vec<f64> = pushed.iter().map(|x| dot(x, d)).collect();
        let b: Vec<f64> = fresh.iter().map(|x| dot(x.entries(), d)).collect();
        let (ks, p) = ks_two_sample(&a, &b);
        stat = stat.max(ks);
        pmin = pmin.min(p);
    }
    MeasurePreservation {
        statistic: stat,
        p_value: (pmin * PRESERVATION_PROJECTIONS as f64).min(1.0),
        projections: PRESERVATION_PROJECTIONS,
    }
}

/// `max |U - U'|` for maps of equal σ; infinite otherwise.
pub fn map_distance<T: Real>(a: &ComplexMap<T>, b: &ComplexMap<T>) -> T {
    if a.sigma != b.sigma || a.dim() != b.dim() {
        return T::max_value().unwrap_or_else(T::one);
    }
    max_abs_diff(&a.u, &b.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::cis;
    use crate::rng::seeded;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn rot(phi: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[phi.cos(), -phi.sin(), phi.sin(), phi.cos()])
    }

    #[test]
    fn apply_examples() {
        let q = BigQ::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(apply_ortho(&OrthoMap::identity(1), &q).unwrap(), q);
        let out = apply_ortho(&OrthoMap::new(rot(FRAC_PI_2)).unwrap(), &q).unwrap();
        assert!((out.entries()[0]).abs() < 1e-15 && (out.entries()[1] - 1.0).abs() < 1e-15);
        let mut rng = seeded(4);
        let m = haar_orthogonal::<f64, _>(6, &mut rng);
        let s = sample_state_prior::<f64, _>(3, &mut rng);
        let out = apply_ortho(&m, &to_big_q(&s)).unwrap();
        let norm: f64 = out.entries().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(apply_ortho(&OrthoMap::identity(2), &q).is_err());
    }

    #[test]
    fn predicted_probs_examples() {
        let mut rng = seeded(5);
        let s = sample_state_prior::<f64, _>(3, &mut rng);
        let p = predicted_probs(&OrthoMap::identity(3), &s).unwrap();
        assert!(p.max_abs_diff(s.probs()) < 1e-14);
        let m = embed_complex(&ComplexMap::phase(3, 1.234));
        assert!(predicted_probs(&m, &s).unwrap().max_abs_diff(s.probs()) < 1e-14);
        let one = C::new(1.0, 0.0);
        let zero = C::new(0.0, 0.0);
        let swap = ComplexMap::new(DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]), Sigma::Unitary)
            .unwrap();
        let s = QuantumState::from_parts(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let p = predicted_probs(&embed_complex(&swap), &s).unwrap();
        assert_eq!(p.entries(), &[0.0, 1.0]);
    }

    #[test]
    fn three_paths_agree() {
        let mut rng = seeded(6);
        for n in 1..=4 {
            for _ in 0..50 {
                let m = haar_orthogonal::<f64, _>(2 * n, &mut rng);
                let s = sample_state_prior::<f64, _>(n, &mut rng);
                let a = predicted_probs(&m, &s).unwrap();
                let b = predicted_probs_regrouped(&m, &s).unwrap();
                let c = predicted_probs_by_rotation(&m, &s).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-12);
                assert!(a.max_abs_diff(&c) < 1e-12);
            }
        }
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed_complex(&ComplexMap::<f64>::identity(3)).matrix(), &DMatrix::identity(6, 6));
        let i1 = ComplexMap::new(DMatrix::from_element(1, 1, C::new(0.0, 1.0)), Sigma::Unitary).unwrap();
        assert!((embed_complex(&i1).matrix() - rot(FRAC_PI_2)).amax() < 1e-15);
        let anti = ComplexMap::new(crate::complex::identity::<f64>(2), Sigma::Antiunitary).unwrap();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 1.0, -1.0]));
        assert_eq!(embed_complex(&anti).matrix(), &expect);
        let bad = DMatrix::from_element(1, 1, C::new(2.0, 0.0));
        assert!(matches!(ComplexMap::new(bad, Sigma::Unitary), Err(Error::Invariant(_))));
    }

    #[test]
    fn embedding_matches_complex_action() {
        let mut rng = seeded(7);
        for sigma in [Sigma::Unitary, Sigma::Antiunitary] {
            let c = ComplexMap { sigma, ..haar_unitary::<f64, _>(3, &mut rng) };
            let s = sample_state_prior::<f64, _>(3, &mut rng);
            let v = crate::state::to_complex(&s);
            let via_c = c.apply(&v).unwrap().to_big_q();
            let via_m = apply_ortho(&embed_complex(&c), &to_big_q(&s)).unwrap();
            assert!(via_c.point().entries().iter().zip(via_m.entries()).all(|(a, b)| (a - b).abs() < 1e-14));
        }
    }

    #[test]
    fn constraint_examples() {
        let mut rng = seeded(8);
        let u = haar_unitary::<f64, _>(3, &mut rng);
        let r = constraint_coeffs(&embed_complex(&u));
        assert!(r.max_residual() < 1e-12);
        assert_eq!(r.sigma, Some(Sigma::Unitary));
        let a = ComplexMap { sigma: Sigma::Antiunitary, ..u };
        let r = constraint_coeffs(&embed_complex(&a));
        assert!(r.max_residual() < 1e-12);
        assert_eq!(r.sigma, Some(Sigma::Antiunitary));
        let rejected = (0..100)
            .filter(|_| {
                let r = constraint_coeffs(&haar_orthogonal::<f64, _>(4, &mut rng));
                !r.homogeneity || r.max_residual() > 0.01
            })
            .count();
        assert!(rejected >= 99);
    }

    #[test]
    fn zero_blocks_do_not_vote() {
        let one = C::new(1.0, 0.0);
        let zero = C::new(0.0, 0.0);
        let swap = ComplexMap::new(DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]), Sigma::Antiunitary)
            .unwrap();
        let r = constraint_coeffs(&embed_complex(&swap));
        assert_eq!(r.block_types[0][0], BlockType::Zero);
        assert_eq!(r.block_types[0][1], BlockType::ReflectionRotation);
        assert!(r.homogeneity && r.row_homogeneous && r.column_homogeneous);
        assert_eq!(r.sigma, Some(Sigma::Antiunitary));
    }

    #[test]
    fn mixed_blocks_are_not_homogeneous() {
        let mut m = DMatrix::<f64>::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&rot(0.3));
        m.view_mut((2, 2), (2, 2)).copy_from(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let r = constraint_coeffs(&OrthoMap::new(m.clone()).unwrap());
        assert!(r.row_homogeneous && r.column_homogeneous);
        assert!(!r.homogeneity);
        assert_eq!(r.sigma, None);
        assert!(matches!(recast_to_complex(&OrthoMap::new(m).unwrap(), 1e-10), Err(Error::NotRepresentable(_))));
    }

    #[test]
    fn recast_examples() {
        let mut m = DMatrix::<f64>::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&rot(0.3));
        m.view_mut((2, 2), (2, 2)).copy_from(&rot(-1.1));
        let c = recast_to_complex(&OrthoMap::new(m).unwrap(), 1e-10).unwrap();
        assert_eq!(c.sigma(), Sigma::Unitary);
        assert!(modulus(c.u()[(0, 0)] - cis(0.3)) < 1e-15);
        assert!(modulus(c.u()[(1, 1)] - cis(-1.1)) < 1e-15);
        assert!(modulus(c.u()[(0, 1)]) < 1e-15);
        let id = recast_to_complex(&OrthoMap::<f64>::identity(2), 1e-10).unwrap();
        assert_eq!(id, ComplexMap::identity(2));
        let mut rng = seeded(9);
        for n in [2, 3, 5] {
            for k in 0..100 {
                let mut u = haar_unitary::<f64, _>(n, &mut rng);
                if k % 2 == 1 {
                    u.sigma = Sigma::Antiunitary;
                }
                let back = recast_to_complex(&embed_complex(&u), 1e-10).unwrap();
                assert_eq!(back.sigma(), u.sigma());
                assert!(map_distance(&back, &u) < 1e-12);
            }
        }
    }

    #[test]
    fn gram_matches_direct_product() {
        let mut rng = seeded(10);
        let u = haar_unitary::<f64, _>(4, &mut rng);
        let m = embed_complex(&u);
        let direct = adjoint(u.u()) * u.u();
        assert!(max_abs_diff(&gram_via_blocks(&m), &direct) < 1e-12);
    }

    #[test]
    fn sigma_path_examples() {
        let path: Vec<_> = (0..=10).map(|k| ComplexMap::phase(2, PI * k as f64 / 10.0)).collect();
        assert_eq!(sigma_path_class(&path).unwrap(), Sigma::Unitary);
        let anti = ComplexMap::new(crate::complex::identity::<f64>(2), Sigma::Antiunitary).unwrap();
        assert_eq!(sigma_path_class(std::slice::from_ref(&anti)).unwrap(), Sigma::Antiunitary);
        let mixed = [ComplexMap::identity(2), anti];
        assert_eq!(sigma_path_class(&mixed), Err(Error::Discontinuity { step: 1 }));
        assert!(sigma_path_class::<f64>(&[]).is_err());
    }

    #[test]
    fn haar_examples() {
        let mut rng = seeded(11);
        let mean: f64 = (0..10_000)
            .map(|_| crate::complex::norm_sqr(haar_unitary::<f64, _>(2, &mut rng).u()[(0, 0)]))
            .sum::<f64>()
            / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
        for _ in 0..20 {
            let u = haar_unitary::<f64, _>(3, &mut rng);
            assert!(unitarity_defect(u.u()) < 1e-12);
            let o = haar_orthogonal::<f64, _>(6, &mut rng);
            assert!((o.determinant().abs() - 1.0).abs() < 1e-10);
        }
        let phases: Vec<f64> = (0..20_000)
            .map(|_| crate::scalar::wrap_angle(crate::complex::arg(haar_unitary::<f64, _>(1, &mut rng).u()[(0, 0)])))
            .collect();
        let ks = crate::stats::ks_one_sample(&phases, |x| x / (2.0 * PI));
        assert!(ks < 0.015, "{ks}");
    }

    #[test]
    fn phase_check_examples() {
        let mut rng = seeded(12);
        let u = haar_unitary::<f64, _>(3, &mut rng);
        let r = check_postulate32(&embed_complex(&u), 100, &mut rng, 1e-12).unwrap();
        assert!(r.passed && r.witness.is_none(), "{}", r.max_deviation);
        let a = ComplexMap { sigma: Sigma::Antiunitary, ..u };
        assert!(check_postulate32(&embed_complex(&a), 100, &mut rng, 1e-12).unwrap().passed);
        let o = haar_orthogonal::<f64, _>(6, &mut rng);
        let r = check_postulate32(&o, 100, &mut rng, 1e-12).unwrap();
        assert!(!r.passed && r.max_deviation > 0.01);
        let w = r.witness.unwrap();
        let (k, d) = phase_deviation(&o, &w.state, w.chi0);
        assert_eq!((k, d), (w.outcome, w.deviation));
        assert!(check_postulate32(&o, 5, &mut rng, 1e-12).is_err());
    }

    #[test]
    fn inverse_and_composition() {
        let mut rng = seeded(13);
        let u = ComplexMap { sigma: Sigma::Antiunitary, ..haar_unitary::<f64, _>(3, &mut rng) };
        let w = haar_unitary::<f64, _>(3, &mut rng);
        let s = crate::state::to_complex(&sample_state_prior::<f64, _>(3, &mut rng));
        let back = u.inverse().apply(&u.apply(&s).unwrap()).unwrap();
        assert!(back.max_abs_diff(&s) < 1e-13);
        let two_step = u.apply(&w.apply(&s).unwrap()).unwrap();
        let composed = u.then_after(&w).unwrap().apply(&s).unwrap();
        assert!(two_step.max_abs_diff(&composed) < 1e-13);
    }

    #[test]
    fn scaled_map_is_rejected() {
        let m = DMatrix::<f64>::identity(4, 4) * 2.0;
        assert!(matches!(OrthoMap::new(m), Err(Error::Invariant(_))));
    }

    #[test]
    fn f32_embedding_roundtrip() {
        let mut rng = seeded(14);
        let u = haar_unitary::<f32, _>(3, &mut rng);
        let back = recast_to_complex(&embed_complex(&u), 1e-5).unwrap();
        assert!(map_distance(&back, &u) < 1e-5);
    }
}
