//! Scalar abstraction and small dense complex linear-algebra helpers.

use std::fmt;

use nalgebra::{DMatrix, DVector, RealField, SymmetricEigen};
use num_complex::Complex;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

/// Real scalar the engine is generic over (`f32` or `f64`).
pub trait Real:
    RealField + FromPrimitive + ToPrimitive + Copy + Send + Sync + fmt::Debug + fmt::Display + fmt::LowerExp
{
    /// Lossy conversion of an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex numbers over the engine scalar.
pub type C<T> = Complex<T>;
/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<C<T>>;
/// Dense complex column vector.
pub type CVector<T> = DVector<C<T>>;

pub fn re<T: Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

/// `exp(i phase)`.
pub fn cis<T: Real>(phase: T) -> C<T> {
    C::new(phase.cos(), phase.sin())
}

pub fn modulus<T: Real>(z: C<T>) -> T {
    z.norm_sqr().sqrt()
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

/// Pauli matrices σx, σy, σz.
pub fn pauli_x<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[C::zero(), C::one(), C::one(), C::zero()])
}

pub fn pauli_y<T: Real>() -> CMatrix<T> {
    let i = C::i();
    CMatrix::from_row_slice(2, 2, &[C::zero(), -i, i, C::zero()])
}

pub fn pauli_z<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[C::one(), C::zero(), C::zero(), -C::<T>::one()])
}

/// Largest entry modulus, `‖A‖_max`.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().map(|z| modulus(*z)).fold(T::zero(), |a, b| a.max(b))
}

/// `‖A − B‖_max`.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter().zip(b.iter()).map(|(x, y)| modulus(*x - *y)).fold(T::zero(), |acc, v| acc.max(v))
}

/// `‖A − A†‖_max`.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    max_abs_diff(m, &m.adjoint())
}

/// `‖U†U − I‖_max`.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &identity(n))
}

/// `(A + A†)/2`.
pub fn hermitize<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()).map(|z| z * T::lit(0.5))
}

/// Hermitian eigendecomposition with eigenpairs sorted ascending.
pub fn eigh_sorted<T: Real>(m: CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = m.nrows();
    sort_eigen(n, SymmetricEigen::new(m))
}

/// As [`eigh_sorted`], but `None` when the iteration does not converge or
/// produces non-finite eigenvalues.
pub fn try_eigh_sorted<T: Real>(m: CMatrix<T>) -> Option<(Vec<T>, CMatrix<T>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m, T::default_epsilon(), 100 * n.max(10))?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(sort_eigen(n, eig))
}

fn sort_eigen<T: Real>(n: usize, eig: SymmetricEigen<C<T>, nalgebra::Dyn>) -> (Vec<T>, CMatrix<T>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvalsh<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// `exp(−i H dt)` for Hermitian `H`.
pub fn expm_hermitian<T: Real>(h: &CMatrix<T>, dt: T) -> CMatrix<T> {
    let (vals, vecs) = eigh_sorted(h.clone());
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let phase = cis(-v * dt);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    scaled * vecs.adjoint()
}

/// `⟨ψ|A|ψ⟩`.
pub fn expectation<T: Real>(a: &CMatrix<T>, psi: &CVector<T>) -> C<T> {
    psi.dotc(&(a * psi))
}

/// Euclidean norm of a state vector.
pub fn state_norm<T: Real>(psi: &CVector<T>) -> T {
    psi.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
}
