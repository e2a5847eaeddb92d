//! Small complex-number helpers usable with any [`Real`] component type.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::scalar::Real;

pub type C<T> = Complex<T>;

#[inline]
pub fn cis<T: Real>(theta: T) -> C<T> {
    C::new(theta.cos(), theta.sin())
}

#[inline]
pub fn polar<T: Real>(r: T, theta: T) -> C<T> {
    C::new(r * theta.cos(), r * theta.sin())
}

#[inline]
pub fn norm_sqr<T: Real>(z: C<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub fn modulus<T: Real>(z: C<T>) -> T {
    norm_sqr(z).sqrt()
}

#[inline]
pub fn arg<T: Real>(z: C<T>) -> T {
    z.im.atan2(z.re)
}

#[inline]
pub fn conj<T: Real>(z: C<T>) -> C<T> {
    C::new(z.re, -z.im)
}

/// `⟨a, b⟩ = Σ a_i^* b_i`.
pub fn inner<T: Real>(a: &DVector<C<T>>, b: &DVector<C<T>>) -> C<T> {
    a.iter().zip(b.iter()).fold(C::new(T::zero(), T::zero()), |s, (&x, &y)| s + conj(x) * y)
}

pub fn vec_norm<T: Real>(v: &DVector<C<T>>) -> T {
    v.iter().fold(T::zero(), |s, &z| s + norm_sqr(z)).sqrt()
}

pub fn conj_vec<T: Real>(v: &DVector<C<T>>) -> DVector<C<T>> {
    v.map(conj)
}

pub fn adjoint<T: Real>(m: &DMatrix<C<T>>) -> DMatrix<C<T>> {
    m.transpose().map(conj)
}

pub fn conj_mat<T: Real>(m: &DMatrix<C<T>>) -> DMatrix<C<T>> {
    m.map(conj)
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff<T: Real>(a: &DMatrix<C<T>>, b: &DMatrix<C<T>>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |m, (&x, &y)| m.max(modulus(x - y)))
}

pub fn identity<T: Real>(n: usize) -> DMatrix<C<T>> {
    DMatrix::from_fn(n, n, |i, j| if i == j { C::new(T::one(), T::zero()) } else { C::new(T::zero(), T::zero()) })
}

/// `max |U†U - I|`.
pub fn unitarity_defect<T: Real>(u: &DMatrix<C<T>>) -> T {
    max_abs_diff(&(adjoint(u) * u), &identity(u.ncols()))
}

/// Multiplies `v` by the phase that makes its first non-negligible
/// component real and positive.
pub fn phase_normalize<T: Real>(v: &DVector<C<T>>) -> DVector<C<T>> {
    let cut = T::lit(1e-12) * vec_norm(v).max(T::one());
    match v.iter().find(|z| modulus(**z) > cut) {
        Some(&z) => {
            let ph = conj(z) * C::new(T::one() / modulus(z), T::zero());
            v.map(|x| x * ph)
        }
        None => v.clone(),
    }
}

pub fn kron<T: Real>(a: &DMatrix<C<T>>, b: &DMatrix<C<T>>) -> DMatrix<C<T>> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn kron_vec<T: Real>(a: &DVector<C<T>>, b: &DVector<C<T>>) -> DVector<C<T>> {
    let nb = b.len();
    DVector::from_fn(a.len() * nb, |i, _| a[i / nb] * b[i % nb])
}
