//! Projective measurements as orthonormal bases with real outcome values,
//! the unitary arrangement that realizes one measurement with another, and
//! sub-system and degenerate measurements.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::complex::{adjoint, identity, inner, kron, max_abs_diff, norm_sqr, phase_normalize, vec_norm, C};
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};
use crate::simplex::ProbVector;
use crate::state::StateVectorC;
use crate::transform::{ComplexMap, Sigma, INVARIANT_TOL};

/// Eigenvalues closer than this (relative to the spectral scale) are
/// treated as one degenerate value.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOp<T: Real> {
    basis: Vec<DVector<C<T>>>,
    values: Vec<T>,
    groups: Vec<Vec<usize>>,
}

fn group_values<T: Real>(values: &[T]) -> Vec<Vec<usize>> {
    let scale = values.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let tol = T::tol(DEGENERACY_TOL) * scale;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.iter_mut().find(|g| (values[g[0]] - v).abs() <= tol) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

impl<T: Real> MeasurementOp<T> {
    /// Validates orthonormality and groups equal values into degenerate
    /// outcomes, ordered by first occurrence.
    pub fn new(basis: Vec<DVector<C<T>>>, values: Vec<T>) -> Result<Self> {
        let n = basis.len();
        if n == 0 {
            return Err(Error::param("empty basis"));
        }
        Error::check_dim(n, values.len())?;
        for (i, b) in basis.iter().enumerate() {
            Error::check_dim(n, b.len())?;
            let norm = vec_norm(b);
            if (norm - T::one()).abs() > T::tol(1e-12) {
                return Err(Error::Invariant(format!("basis vector {i} has norm {norm}")));
            }
            for (j, c) in basis.iter().enumerate().skip(i + 1) {
                let ov = norm_sqr(inner(b, c)).sqrt();
                if ov >= T::tol(INVARIANT_TOL) {
                    return Err(Error::Invariant(format!("|<v{i}, v{j}>| = {ov}")));
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("values must be finite"));
        }
        let groups = group_values(&values);
        let mut values = values;
        for g in &groups {
            let v = values[g[0]];
            g.iter().for_each(|&i| values[i] = v);
        }
        Ok(Self { basis, values, groups })
    }

    /// Columns of `u` as the basis.
    pub fn from_columns(u: &DMatrix<C<T>>, values: Vec<T>) -> Result<Self> {
        Self::new(u.column_iter().map(|c| c.into_owned()).collect(), values)
    }

    /// Standard basis with values `1, 2, …, N` unless given.
    pub fn standard(n: usize, values: Option<Vec<T>>) -> Result<Self> {
        let values = values.unwrap_or_else(|| (1..=n).map(|k| T::lit(k as f64)).collect());
        Self::from_columns(&identity(n), values)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DVector<C<T>>] {
        &self.basis
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Number of distinguishable outcomes.
    pub fn outcomes(&self) -> usize {
        self.groups.len()
    }

    pub fn group_value(&self, g: usize) -> T {
        self.values[self.groups[g][0]]
    }

    pub fn is_degenerate(&self) -> bool {
        self.groups.len() < self.basis.len()
    }

    /// Matrix whose columns are the basis vectors.
    pub fn basis_matrix(&self) -> DMatrix<C<T>> {
        DMatrix::from_columns(&self.basis)
    }

    pub fn projector(&self, g: usize) -> DMatrix<C<T>> {
        let n = self.dim();
        self.groups[g].iter().fold(DMatrix::zeros(n, n), |acc, &i| acc + &self.basis[i] * self.basis[i].adjoint())
    }

    /// Equality of outcome projectors and values, independent of the basis
    /// chosen inside degenerate eigenspaces.
    pub fn same_measurement(&self, other: &Self, tol: T) -> bool {
        self.dim() == other.dim()
            && self.outcomes() == other.outcomes()
            && (0..self.outcomes()).all(|g| {
                (self.group_value(g) - other.group_value(g)).abs() <= tol
                    && max_abs_diff(&self.projector(g), &other.projector(g)) <= tol
            })
    }
}

/// `A' = Σ v_i a_i v_i^†`.
pub fn hermitian_of<T: Real>(m: &MeasurementOp<T>) -> DMatrix<C<T>> {
    let n = m.dim();
    m.basis.iter().zip(&m.values).fold(DMatrix::zeros(n, n), |acc, (v, &a)| {
        acc + v * v.adjoint() * C::new(a, T::zero())
    })
}

pub fn hermiticity_defect<T: Real>(h: &DMatrix<C<T>>) -> T {
    max_abs_diff(h, &adjoint(h))
}

fn lex_cmp<T: Real>(a: &DVector<C<T>>, b: &DVector<C<T>>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.partial_cmp(&y.re).unwrap_or(Ordering::Equal).reverse();
        if o != Ordering::Equal {
            return o;
        }
        let o = x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal).reverse();
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Diagonalizes a Hermitian matrix into a measurement: ascending values,
/// phase-normalized eigenvectors, ties ordered by descending lexicographic
/// comparison so that a permuted standard basis comes out in index order.
pub fn eigen_measurement<T: Real>(h: &DMatrix<C<T>>) -> Result<MeasurementOp<T>> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::param("operator must be a nonempty square matrix"));
    }
    let d = hermiticity_defect(h);
    if d > T::tol(INVARIANT_TOL) {
        return Err(Error::param(format!("operator is not Hermitian (defect {d})")));
    }
    let n = h.nrows();
    let sym = (h + adjoint(h)) * C::new(T::lit(0.5), T::zero());
    let eig = sym.symmetric_eigen();
    let mut pairs: Vec<(T, DVector<C<T>>)> = (0..n)
        .map(|i| (eig.eigenvalues[i], phase_normalize(&eig.eigenvectors.column(i).into_owned())))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let values: Vec<T> = pairs.iter().map(|p| p.0).collect();
    let groups = group_values(&values);
    let mut ordered = Vec::with_capacity(n);
    for g in groups {
        let mean = pairwise_sum(&g.iter().map(|&i| values[i]).collect::<Vec<_>>()) / T::lit(g.len() as f64);
        let mut members: Vec<DVector<C<T>>> = g.iter().map(|&i| pairs[i].1.clone()).collect();
        if members.len() > 1 {
            members = orthonormalize(members);
        }
        members.sort_by(lex_cmp);
        ordered.extend(members.into_iter().map(|v| (mean, v)));
    }
    let (values, basis): (Vec<T>, Vec<DVector<C<T>>>) = ordered.into_iter().unzip();
    MeasurementOp::new(basis, values)
}

/// Gram–Schmidt inside a degenerate eigenspace.
fn orthonormalize<T: Real>(vs: Vec<DVector<C<T>>>) -> Vec<DVector<C<T>>> {
    let mut out: Vec<DVector<C<T>>> = Vec::with_capacity(vs.len());
    for mut v in vs {
        for u in &out {
            let c = inner(u, &v);
            v -= u * c;
        }
        let n = vec_norm(&v);
        out.push(phase_normalize(&v.map(|z| z * C::new(T::one() / n, T::zero()))));
    }
    out
}

/// Group-summed `|⟨v_i', v⟩|²`.
pub fn outcome_probs<T: Real>(m: &MeasurementOp<T>, v: &StateVectorC<T>) -> Result<ProbVector<T>> {
    Error::check_dim(m.dim(), v.dim())?;
    let cell: Vec<T> = m.basis.iter().map(|b| norm_sqr(inner(b, v.as_vector()))).collect();
    let grouped: Vec<T> =
        m.groups.iter().map(|g| pairwise_sum(&g.iter().map(|&i| cell[i]).collect::<Vec<_>>())).collect();
    ProbVector::from_weights(&grouped)
}

/// Post-measurement state for outcome group `g`: the normalized projection
/// of `v`, which for a non-degenerate outcome is the basis vector itself.
pub fn collapse<T: Real>(m: &MeasurementOp<T>, v: &StateVectorC<T>, g: usize) -> Result<StateVectorC<T>> {
    Error::check_dim(m.dim(), v.dim())?;
    let group = m.groups.get(g).ok_or_else(|| Error::param(format!("outcome {g} out of range")))?;
    let p = outcome_probs(m, v)?.entries()[g];
    if p <= T::lit(1e-15) {
        return Err(Error::ImpossibleOutcome { outcome: g });
    }
    if group.len() == 1 {
        return Ok(StateVectorC::new_unchecked(phase_normalize(&m.basis[group[0]])));
    }
    let proj = m.projector(g) * v.as_vector();
    let out = StateVectorC::normalized(proj)?;
    Ok(StateVectorC::new_unchecked(phase_normalize(out.as_vector())))
}

/// `U` maps each target basis vector onto the matching reference vector,
/// `V = U^†` maps it back.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement<T: Real> {
    pub pre: ComplexMap<T>,
    pub post: ComplexMap<T>,
}

pub fn arrangement_for<T: Real>(target: &MeasurementOp<T>, reference: &MeasurementOp<T>) -> Result<Arrangement<T>> {
    Error::check_dim(reference.dim(), target.dim())?;
    if target.is_degenerate() || reference.is_degenerate() {
        return Err(Error::param("arrangement needs non-degenerate measurements"));
    }
    let u = reference.basis_matrix() * adjoint(&target.basis_matrix());
    let pre = ComplexMap::new(u, Sigma::Unitary)?;
    let post = pre.inverse();
    Ok(Arrangement { pre, post })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrangementOutcome<T: Real> {
    pub probs: ProbVector<T>,
    pub outputs: Vec<StateVectorC<T>>,
}

/// Runs `v` through `U`, the reference measurement and `V`.
pub fn simulate_arrangement<T: Real>(
    arr: &Arrangement<T>,
    reference: &MeasurementOp<T>,
    v: &StateVectorC<T>,
) -> Result<ArrangementOutcome<T>> {
    let u = arr.pre.apply(v)?;
    let probs = outcome_probs(reference, &u)?;
    let outputs = reference
        .basis
        .iter()
        .map(|b| arr.post.apply(&StateVectorC::new_unchecked(b.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(ArrangementOutcome { probs, outputs })
}

/// `Σ a_g P_g`.
pub fn expected_value<T: Real>(m: &MeasurementOp<T>, v: &StateVectorC<T>) -> Result<T> {
    let p = outcome_probs(m, v)?;
    let terms: Vec<T> = (0..m.outcomes()).map(|g| m.group_value(g) * p.entries()[g]).collect();
    Ok(pairwise_sum(&terms))
}

/// `Re v^† H v`.
pub fn operator_expectation<T: Real>(h: &DMatrix<C<T>>, v: &StateVectorC<T>) -> Result<T> {
    Error::check_dim(h.nrows(), v.dim())?;
    Ok(inner(v.as_vector(), &(h * v.as_vector())).re)
}

/// `A ⊗ I_{n2}`.
pub fn subsystem_operator<T: Real>(a1: &DMatrix<C<T>>, n2: usize) -> Result<DMatrix<C<T>>> {
    if !a1.is_square() || hermiticity_defect(a1) > T::tol(INVARIANT_TOL) {
        return Err(Error::param("sub-system operator must be Hermitian"));
    }
    if n2 == 0 {
        return Err(Error::param("second factor dimension must be positive"));
    }
    Ok(kron(a1, &identity(n2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::state::{sample_state_prior, to_complex};
    use crate::transform::haar_unitary;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    fn fourier2() -> MeasurementOp<f64> {
        let r = FRAC_1_SQRT_2;
        MeasurementOp::new(
            vec![DVector::from_vec(vec![c(r, 0.0), c(r, 0.0)]), DVector::from_vec(vec![c(r, 0.0), c(-r, 0.0)])],
            vec![1.0, -1.0],
        )
        .unwrap()
    }

    fn random_op(n: usize, seed: u64) -> MeasurementOp<f64> {
        let mut rng = seeded(seed);
        let u = haar_unitary::<f64, _>(n, &mut rng);
        MeasurementOp::from_columns(u.u(), (0..n).map(|k| k as f64 - 0.5).collect()).unwrap()
    }

    fn random_state(n: usize, seed: u64) -> StateVectorC<f64> {
        to_complex(&sample_state_prior::<f64, _>(n, &mut seeded(seed)))
    }

    #[test]
    fn hermitian_examples() {
        let z = MeasurementOp::standard(2, Some(vec![1.0, -1.0])).unwrap();
        let h = hermitian_of(&z);
        assert_eq!(h[(0, 0)], c(1.0, 0.0));
        assert_eq!(h[(1, 1)], c(-1.0, 0.0));
        let x = hermitian_of(&fourier2());
        for (a, b) in x.iter().zip([0.0, 1.0, 1.0, 0.0]) {
            assert!((a - c(b, 0.0)).norm() < 1e-15);
        }
        let op = random_op(4, 1);
        let h = hermitian_of(&op);
        assert!(hermiticity_defect(&h) < 1e-12);
        assert!((h.trace().re - op.values().iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn eigen_examples() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]));
        let m = eigen_measurement(&h).unwrap();
        assert_eq!(m.values(), &[1.0, 2.0, 3.0]);
        let perm = [1, 2, 0];
        for (v, &k) in m.basis().iter().zip(&perm) {
            assert!((v[k] - c(1.0, 0.0)).norm() < 1e-14);
        }
        let id = eigen_measurement(&identity::<f64>(3)).unwrap();
        assert_eq!(id.groups(), &[vec![0, 1, 2]]);
        for (v, k) in id.basis().iter().zip(0..3) {
            assert!((v[k] - c(1.0, 0.0)).norm() < 1e-14);
        }
        let op = random_op(5, 2);
        let back = eigen_measurement(&hermitian_of(&op)).unwrap();
        assert!(max_abs_diff(&hermitian_of(&back), &hermitian_of(&op)) < 1e-10);
        assert!(back.same_measurement(&op, 1e-9));
    }

    #[test]
    fn eigen_is_deterministic_under_phase_changes() {
        let op = random_op(3, 3);
        let h = hermitian_of(&op);
        let a = eigen_measurement(&h).unwrap();
        let b = eigen_measurement(&h.clone()).unwrap();
        assert_eq!(a, b);
        for v in a.basis() {
            let first = v.iter().find(|z| z.norm() > 1e-12).unwrap();
            assert!(first.im.abs() < 1e-15 && first.re > 0.0);
        }
    }

    #[test]
    fn outcome_prob_examples() {
        let op = random_op(3, 4);
        let p = outcome_probs(&op, &StateVectorC::new(op.basis()[1].clone()).unwrap()).unwrap();
        assert!((p.entries()[1] - 1.0).abs() < 1e-12);
        let std2 = MeasurementOp::standard(2, None).unwrap();
        for phi in [0.0, 0.7, 2.5] {
            let v = StateVectorC::from_slice(&[c(0.5f64.sqrt(), 0.0), crate::complex::polar(0.5f64.sqrt(), phi)]).unwrap();
            let p = outcome_probs(&std2, &v).unwrap();
            assert!((p.entries()[0] - 0.5).abs() < 1e-15);
        }
        let deg = MeasurementOp::standard(3, Some(vec![1.0, 2.0, 2.0])).unwrap();
        assert_eq!(deg.groups(), &[vec![0], vec![1, 2]]);
        let v = StateVectorC::from_slice(&[c(0.2f64.sqrt(), 0.0), c(0.3f64.sqrt(), 0.0), c(0.0, 0.5f64.sqrt())]).unwrap();
        let p = outcome_probs(&deg, &v).unwrap();
        assert!((p.entries()[0] - 0.2).abs() < 1e-15 && (p.entries()[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn collapse_examples() {
        let op = random_op(3, 5);
        let v = random_state(3, 6);
        for i in 0..3 {
            let out = collapse(&op, &v, i).unwrap();
            let p = outcome_probs(&op, &out).unwrap();
            assert!((p.entries()[i] - 1.0).abs() < 1e-12);
            assert_eq!(collapse(&op, &out, i).unwrap(), out);
            assert!((out.inner(&StateVectorC::new(op.basis()[i].clone()).unwrap()).norm() - 1.0).abs() < 1e-12);
        }
        let std2 = MeasurementOp::<f64>::standard(2, None).unwrap();
        let e0 = StateVectorC::basis(2, 0);
        assert_eq!(collapse(&std2, &e0, 1), Err(Error::ImpossibleOutcome { outcome: 1 }));
        let deg = MeasurementOp::standard(3, Some(vec![1.0, 2.0, 2.0])).unwrap();
        let out = collapse(&deg, &v, 1).unwrap();
        assert!(out.as_vector()[0].norm() < 1e-15);
        assert!((outcome_probs(&deg, &out).unwrap().entries()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arrangement_examples() {
        let std2 = MeasurementOp::standard(2, Some(vec![1.0, -1.0])).unwrap();
        let a = arrangement_for(&std2, &std2).unwrap();
        assert_eq!(a.pre, ComplexMap::identity(2));
        let f = fourier2();
        let a = arrangement_for(&f, &std2).unwrap();
        let r = FRAC_1_SQRT_2;
        for (x, y) in a.pre.u().iter().zip([r, r, r, -r]) {
            assert!((x - c(y, 0.0)).norm() < 1e-15);
        }
        for n in [2, 3, 4] {
            let target = random_op(n, 10 + n as u64);
            let reference = random_op(n, 20 + n as u64);
            let arr = arrangement_for(&target, &reference).unwrap();
            for (t, r) in target.basis().iter().zip(reference.basis()) {
                let mapped = arr.pre.apply(&StateVectorC::new(t.clone()).unwrap()).unwrap();
                assert!((mapped.inner(&StateVectorC::new(r.clone()).unwrap()).norm() - 1.0).abs() < 1e-12);
            }
        }
        let deg = MeasurementOp::standard(2, Some(vec![1.0, 1.0])).unwrap();
        assert!(arrangement_for(&deg, &std2).is_err());
        assert!(arrangement_for(&MeasurementOp::standard(3, None).unwrap(), &std2).is_err());
    }

    #[test]
    fn arrangement_reproduces_target() {
        for trial in 0..100u64 {
            let target = random_op(3, 100 + trial);
            let reference = random_op(3, 300 + trial);
            let v = random_state(3, 500 + trial);
            let arr = arrangement_for(&target, &reference).unwrap();
            let out = simulate_arrangement(&arr, &reference, &v).unwrap();
            assert!(out.probs.max_abs_diff(&outcome_probs(&target, &v).unwrap()) < 1e-12);
            for (o, t) in out.outputs.iter().zip(target.basis()) {
                assert!((o.inner(&StateVectorC::new(t.clone()).unwrap()).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let op = random_op(3, 7);
        for (i, b) in op.basis().iter().enumerate() {
            let e = expected_value(&op, &StateVectorC::new(b.clone()).unwrap()).unwrap();
            assert!((e - op.values()[i]).abs() < 1e-12);
        }
        let z = MeasurementOp::standard(2, Some(vec![1.0, -1.0])).unwrap();
        let r = FRAC_1_SQRT_2;
        let v = StateVectorC::from_slice(&[c(r, 0.0), c(r, 0.0)]).unwrap();
        assert!(expected_value(&z, &v).unwrap().abs() < 1e-15);
        let h = hermitian_of(&op);
        let mut rng = seeded(8);
        for _ in 0..1000 {
            let v = to_complex(&sample_state_prior::<f64, _>(3, &mut rng));
            let e = expected_value(&op, &v).unwrap();
            assert!((e - operator_expectation(&h, &v).unwrap()).abs() < 1e-12);
            assert!((-0.5 - 1e-12..=1.5 + 1e-12).contains(&e));
        }
    }

    #[test]
    fn subsystem_examples() {
        let i2 = identity::<f64>(2);
        assert_eq!(subsystem_operator(&i2, 3).unwrap(), identity::<f64>(6));
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let zz = subsystem_operator(&z, 2).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| zz[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        let m = eigen_measurement(&zz).unwrap();
        assert_eq!(m.outcomes(), 2);
        assert!(m.groups().iter().all(|g| g.len() == 2));
        let bad = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(subsystem_operator(&bad, 2).is_err());
    }

    #[test]
    fn completeness_and_phase_invariance() {
        let op = random_op(4, 9);
        let sum = (0..4).fold(DMatrix::zeros(4, 4), |acc, g| acc + op.projector(g));
        assert!(max_abs_diff(&sum, &identity(4)) < 1e-12);
        let v = random_state(4, 10);
        assert_eq!(outcome_probs(&op, &v).unwrap(), outcome_probs(&op, &v).unwrap());
        let w = v.with_global_phase(1.1);
        assert!(outcome_probs(&op, &v).unwrap().max_abs_diff(&outcome_probs(&op, &w).unwrap()) < 1e-15);
    }

    #[test]
    fn invalid_bases_are_rejected() {
        let v = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(MeasurementOp::new(vec![v.clone(), v.clone()], vec![1.0, 2.0]).is_err());
        let w = DVector::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(MeasurementOp::new(vec![w, v], vec![1.0, 2.0]).is_err());
    }
}
