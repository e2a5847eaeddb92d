//! Composite systems: probabilities multiply, phases add, and the complex
//! form is the Kronecker product.

use nalgebra::DVector;

use crate::complex::{kron_vec, C};
use crate::error::{Error, Result};
use crate::measurement::MeasurementOp;
use crate::scalar::Real;
use crate::simplex::ProbVector;
use crate::state::{QuantumState, StateVectorC};

/// Row-major flattening of multi-indices: for two factors `(i, j) ↦ i·N₂ + j`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CompositeIndex {
    dims: Vec<usize>,
}

impl CompositeIndex {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::param("factor dimensions must be positive"));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn flatten(&self, idx: &[usize]) -> Result<usize> {
        Error::check_dim(self.dims.len(), idx.len())?;
        idx.iter().zip(&self.dims).try_fold(0, |acc, (&i, &d)| {
            if i < d {
                Ok(acc * d + i)
            } else {
                Err(Error::param(format!("index {i} out of range for factor of size {d}")))
            }
        })
    }

    pub fn unflatten(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (o, &d) in out.iter_mut().zip(&self.dims).rev() {
            *o = k % d;
            k /= d;
        }
        out
    }
}

pub fn compose_states<T: Real>(s1: &QuantumState<T>, s2: &QuantumState<T>) -> QuantumState<T> {
    let (p1, p2) = (s1.probs().entries(), s2.probs().entries());
    let mut probs = Vec::with_capacity(p1.len() * p2.len());
    let mut phases = Vec::with_capacity(p1.len() * p2.len());
    for (a, x) in p1.iter().zip(s1.phases()) {
        for (b, y) in p2.iter().zip(s2.phases()) {
            probs.push(*a * *b);
            phases.push(*x + *y);
        }
    }
    QuantumState::new(ProbVector::from_weights(&probs).expect("product of distributions"), phases)
        .expect("dimensions agree")
}

pub fn tensor_complex<T: Real>(v1: &StateVectorC<T>, v2: &StateVectorC<T>) -> StateVectorC<T> {
    StateVectorC::new_unchecked(kron_vec(v1.as_vector(), v2.as_vector()))
}

/// Left-associated chain of [`compose_states`].
pub fn compose_many<T: Real>(states: &[QuantumState<T>]) -> Result<QuantumState<T>> {
    let (first, rest) = states.split_first().ok_or_else(|| Error::param("no states to compose"))?;
    Ok(rest.iter().fold(first.clone(), |acc, s| compose_states(&acc, s)))
}

/// Product measurement with outcome values kept as pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeMeasurement<T: Real> {
    pub basis: Vec<DVector<C<T>>>,
    pub labels: Vec<(T, T)>,
    pub index: CompositeIndex,
}

impl<T: Real> CompositeMeasurement<T> {
    /// Collapses the value pairs to scalars; equal scalars become a
    /// degenerate outcome.
    pub fn to_measurement_op(&self, combiner: impl Fn(T, T) -> T) -> Result<MeasurementOp<T>> {
        MeasurementOp::new(self.basis.clone(), self.labels.iter().map(|&(a, b)| combiner(a, b)).collect())
    }

    /// Labels replaced by their flat index, so every outcome stays distinct.
    pub fn indexed_op(&self) -> Result<MeasurementOp<T>> {
        MeasurementOp::new(self.basis.clone(), (0..self.basis.len()).map(|k| T::lit(k as f64)).collect())
    }
}

pub fn composite_measurement<T: Real>(
    m1: &MeasurementOp<T>,
    m2: &MeasurementOp<T>,
) -> Result<CompositeMeasurement<T>> {
    if m1.is_degenerate() || m2.is_degenerate() {
        return Err(Error::param("composite measurement needs non-degenerate factors"));
    }
    let mut basis = Vec::with_capacity(m1.dim() * m2.dim());
    let mut labels = Vec::with_capacity(basis.capacity());
    for (v, &a) in m1.basis().iter().zip(m1.values()) {
        for (w, &b) in m2.basis().iter().zip(m2.values()) {
            basis.push(kron_vec(v, w));
            labels.push((a, b));
        }
    }
    Ok(CompositeMeasurement { basis, labels, index: CompositeIndex::new(vec![m1.dim(), m2.dim()])? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{expected_value, hermitian_of, operator_expectation, outcome_probs, subsystem_operator};
    use crate::rng::seeded;
    use crate::state::{sample_state_prior, to_complex};
    use crate::transform::haar_unitary;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn st(p: &[f64], chi: &[f64]) -> QuantumState<f64> {
        QuantumState::from_parts(p.to_vec(), chi.to_vec()).unwrap()
    }

    #[test]
    fn index_convention() {
        let ix = CompositeIndex::new(vec![2, 3]).unwrap();
        assert_eq!(ix.flatten(&[1, 2]).unwrap(), 5);
        assert_eq!(ix.unflatten(4), vec![1, 1]);
        for k in 0..6 {
            assert_eq!(ix.flatten(&ix.unflatten(k)).unwrap(), k);
        }
        assert!(ix.flatten(&[2, 0]).is_err());
        assert!(CompositeIndex::new(vec![]).is_err());
    }

    #[test]
    fn compose_examples() {
        let s1 = st(&[0.3, 0.7], &[0.1, 0.2]);
        assert_eq!(compose_states(&s1, &st(&[1.0], &[0.0])), s1);
        let c = compose_states(&st(&[0.5, 0.5], &[0.0, FRAC_PI_2]), &st(&[0.25, 0.75], &[PI, 0.0]));
        assert_eq!(c.probs().entries(), &[0.125, 0.375, 0.125, 0.375]);
        assert_eq!(c.phases(), &[PI, 0.0, FRAC_PI_2 + PI, FRAC_PI_2]);
    }

    #[test]
    fn tensor_examples() {
        let t = tensor_complex(&StateVectorC::<f64>::basis(2, 0), &StateVectorC::basis(2, 1));
        let e: Vec<_> = t.as_vector().iter().map(|z| z.re).collect();
        assert_eq!(e, vec![0.0, 1.0, 0.0, 0.0]);
        let a = st(&[0.5, 0.5], &[0.3, 1.0]);
        let b = st(&[0.5, 0.5], &[-0.2, 0.4]);
        let t = tensor_complex(&to_complex(&a), &to_complex(&b));
        assert!(t.max_abs_diff(&to_complex(&compose_states(&a, &b))) < 1e-15);
        assert!(t.as_vector().iter().all(|z| (z.norm() - 0.5).abs() < 1e-15));
    }

    #[test]
    fn compose_matches_tensor_on_random_pairs() {
        let mut rng = seeded(1);
        for _ in 0..1000 {
            let a = sample_state_prior::<f64, _>(2, &mut rng);
            let b = sample_state_prior::<f64, _>(3, &mut rng);
            let via_states = to_complex(&compose_states(&a, &b));
            let via_tensor = tensor_complex(&to_complex(&a), &to_complex(&b));
            assert!(via_states.max_abs_diff(&via_tensor) < 1e-14);
        }
    }

    #[test]
    fn compose_many_examples() {
        let mut rng = seeded(2);
        let a = sample_state_prior::<f64, _>(2, &mut rng);
        let b = sample_state_prior::<f64, _>(3, &mut rng);
        let c = sample_state_prior::<f64, _>(2, &mut rng);
        assert_eq!(compose_many(std::slice::from_ref(&a)).unwrap(), a);
        let left = compose_states(&compose_states(&a, &b), &c);
        let right = compose_states(&a, &compose_states(&b, &c));
        assert!(left.approx_eq(&right, 1e-14));
        let one = st(&[1.0], &[0.0]);
        assert_eq!(compose_many(&[one.clone(), one.clone(), one]).unwrap().dim(), 1);
        assert!(compose_many::<f64>(&[]).is_err());
    }

    #[test]
    fn composite_measurement_examples() {
        let s2 = MeasurementOp::<f64>::standard(2, None).unwrap();
        let cm = composite_measurement(&s2, &s2).unwrap();
        let std4 = MeasurementOp::standard(4, Some(vec![0.0, 1.0, 2.0, 3.0])).unwrap();
        assert!(cm.indexed_op().unwrap().same_measurement(&std4, 1e-15));
        assert_eq!(cm.labels[1], (1.0, 2.0));

        let mut rng = seeded(3);
        let u1 = haar_unitary::<f64, _>(2, &mut rng);
        let u2 = haar_unitary::<f64, _>(3, &mut rng);
        let m1 = MeasurementOp::from_columns(u1.u(), vec![0.0, 1.0]).unwrap();
        let m2 = MeasurementOp::from_columns(u2.u(), vec![0.0, 1.0, 2.0]).unwrap();
        let cm = composite_measurement(&m1, &m2).unwrap().indexed_op().unwrap();
        let a = to_complex(&sample_state_prior::<f64, _>(2, &mut rng));
        let b = to_complex(&sample_state_prior::<f64, _>(3, &mut rng));
        let p = outcome_probs(&cm, &tensor_complex(&a, &b)).unwrap();
        let (pa, pb) = (outcome_probs(&m1, &a).unwrap(), outcome_probs(&m2, &b).unwrap());
        for i in 0..2 {
            for j in 0..3 {
                assert!((p.entries()[3 * i + j] - pa.entries()[i] * pb.entries()[j]).abs() < 1e-12);
            }
        }

        let ent = StateVectorC::from_slice(&[C::new(0.6, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.8, 0.0)])
            .unwrap();
        let p = outcome_probs(&std4, &ent).unwrap();
        for (x, y) in p.entries().iter().zip([0.36, 0.0, 0.0, 0.64]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(composite_measurement(&MeasurementOp::standard(2, Some(vec![1.0, 1.0])).unwrap(), &s2).is_err());
    }

    #[test]
    fn combiner_can_create_degeneracy() {
        let s2 = MeasurementOp::<f64>::standard(2, Some(vec![1.0, -1.0])).unwrap();
        let op = composite_measurement(&s2, &s2).unwrap().to_measurement_op(|a, b| a * b).unwrap();
        assert_eq!(op.groups(), &[vec![0, 3], vec![1, 2]]);
    }

    #[test]
    fn subsystem_expectation_commutes_with_composition() {
        let mut rng = seeded(4);
        let u = haar_unitary::<f64, _>(2, &mut rng);
        let a1 = hermitian_of(&MeasurementOp::from_columns(u.u(), vec![-0.3, 1.7]).unwrap());
        let full = subsystem_operator(&a1, 3).unwrap();
        for _ in 0..100 {
            let s1 = sample_state_prior::<f64, _>(2, &mut rng);
            let s2 = sample_state_prior::<f64, _>(3, &mut rng);
            let lhs = operator_expectation(&full, &to_complex(&compose_states(&s1, &s2))).unwrap();
            let rhs = operator_expectation(&a1, &to_complex(&s1)).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
            let m = crate::measurement::eigen_measurement(&full).unwrap();
            let ev = expected_value(&m, &to_complex(&compose_states(&s1, &s2))).unwrap();
            assert!((ev - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn marginals_of_product_states() {
        let mut rng = seeded(5);
        let a = sample_state_prior::<f64, _>(2, &mut rng);
        let b = sample_state_prior::<f64, _>(3, &mut rng);
        let c = compose_states(&a, &b);
        for i in 0..2 {
            let m: f64 = (0..3).map(|j| c.probs().entries()[3 * i + j]).sum();
            assert!((m - a.probs().entries()[i]).abs() < 1e-15);
        }
    }
}
