//! Dense complex matrix primitives: Hermitian square roots, matrix
//! exponentials, commutators and metric validation.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{abs2, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

pub fn sigma_x<T: Real>() -> CMatrix<T> {
    let (o, l) = (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
    CMatrix::from_row_slice(2, 2, &[o, l, l, o])
}

pub fn sigma_y<T: Real>() -> CMatrix<T> {
    let o = Complex::new(T::zero(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    CMatrix::from_row_slice(2, 2, &[o, -i, i, o])
}

pub fn sigma_z<T: Real>() -> CMatrix<T> {
    let (o, l) = (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
    CMatrix::from_row_slice(2, 2, &[l, o, o, -l])
}

/// `c0 I + cx σx + cy σy + cz σz` for complex coefficients.
pub fn pauli_combination<T: Real>(
    c0: Complex<T>,
    cx: Complex<T>,
    cy: Complex<T>,
    cz: Complex<T>,
) -> CMatrix<T> {
    let i = Complex::new(T::zero(), T::one());
    CMatrix::from_row_slice(2, 2, &[c0 + cz, cx - i * cy, cx + i * cy, c0 - cz])
}

/// Components `(a0, ax, ay, az)` of a 2×2 matrix in the Pauli basis.
pub fn pauli_components<T: Real>(a: &CMatrix<T>) -> [Complex<T>; 4] {
    let half = T::lit(0.5);
    let i = Complex::new(T::zero(), T::one());
    let a0 = (a[(0, 0)] + a[(1, 1)]) * half;
    let az = (a[(0, 0)] - a[(1, 1)]) * half;
    let ax = (a[(0, 1)] + a[(1, 0)]) * half;
    let ay = i * (a[(0, 1)] - a[(1, 0)]) * half;
    [a0, ax, ay, az]
}

/// Frobenius norm.
pub fn frob<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + abs2(*z)).sqrt()
}

pub fn vec_norm<T: Real>(v: &CVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + abs2(*z)).sqrt()
}

/// `⟨a|m|b⟩`.
pub fn sandwich<T: Real>(a: &CVector<T>, m: &CMatrix<T>, b: &CVector<T>) -> Complex<T> {
    a.dotc(&(m * b))
}

pub fn ensure_square<T: Real>(m: &CMatrix<T>) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

pub fn ensure_finite<T: Real>(m: &CMatrix<T>) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `‖M − M†‖_F`.
pub fn hermiticity_residual<T: Real>(m: &CMatrix<T>) -> T {
    frob(&(m - m.adjoint()))
}

/// `‖U†U − I‖_F`.
pub fn unitarity_residual<T: Real>(u: &CMatrix<T>) -> T {
    frob(&(u.adjoint() * u - identity::<T>(u.nrows())))
}

pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()) * Complex::new(T::lit(0.5), T::zero())
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    /// Columns are the orthonormal eigenvectors, ordered like `values`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// Decomposes the Hermitian part of `m`.
    pub fn new(m: &CMatrix<T>) -> Result<Self> {
        let n = ensure_square(m)?;
        ensure_finite(m)?;
        let eig = nalgebra::SymmetricEigen::try_new(hermitian_part(m), T::eps(), 0)
            .ok_or(Error::NoConvergence)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let n = self.values.len();
        let d = CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex::new(f(self.values[r]), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        &self.vectors * d * self.vectors.adjoint()
    }
}

/// Positive square root of a Hermitian positive-definite matrix together
/// with its inverse.
#[derive(Debug, Clone)]
pub struct HermitianSqrt<T: Real> {
    pub sqrt: CMatrix<T>,
    pub inv_sqrt: CMatrix<T>,
    pub eigen: HermitianEigen<T>,
}

impl<T: Real> HermitianSqrt<T> {
    /// Derivative of `√M` along a direction `dm` (`dm` Hermitian), from the
    /// Sylvester equation `√M X + X √M = dm` solved in the eigenbasis.
    pub fn derivative(&self, dm: &CMatrix<T>) -> CMatrix<T> {
        let v = &self.eigen.vectors;
        let roots: Vec<T> = self.eigen.values.iter().map(|&l| l.sqrt()).collect();
        let n = roots.len();
        let mut x = v.adjoint() * dm * v;
        for c in 0..n {
            for r in 0..n {
                x[(r, c)] = x[(r, c)].unscale(roots[r] + roots[c]);
            }
        }
        v * x * v.adjoint()
    }
}

/// Principal square root `√M` and `√M⁻¹` of a Hermitian positive-definite
/// matrix.
pub fn hermitian_sqrt<T: Real>(m: &CMatrix<T>, tol: T) -> Result<HermitianSqrt<T>> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let residual = hermiticity_residual(m);
    if residual > tol {
        return Err(Error::NotHermitian { residual: residual.to_f64_lossy(), tol: tol.to_f64_lossy() });
    }
    let eigen = HermitianEigen::new(m)?;
    let min = eigen.values[0];
    if min <= tol {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min.to_f64_lossy(),
            tol: tol.to_f64_lossy(),
        });
    }
    let sqrt = eigen.map(|l| l.sqrt());
    let inv_sqrt = eigen.map(|l| T::one() / l.sqrt());
    Ok(HermitianSqrt { sqrt, inv_sqrt, eigen })
}

/// `AB − BA`.
pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = ensure_square(a)?;
    let m = ensure_square(b)?;
    if n != m {
        return Err(Error::DimensionMismatch { left: n, right: m });
    }
    Ok(a * b - b * a)
}

/// `AB − BA` for operands already known to share a dimension.
pub(crate) fn comm<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

/// Matrix exponential. 2×2 inputs use the Pauli closed form, larger ones
/// Padé(13) scaling and squaring.
pub fn matrix_exponential<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = ensure_square(a)?;
    ensure_finite(a)?;
    let e = if n == 2 { expm_pauli(a) } else { expm_pade(a) };
    ensure_finite(&e).map_err(|_| Error::Overflow)?;
    Ok(e)
}

/// Closed-form exponential of a 2×2 matrix `a0 I + a·σ`:
/// `e^{a0} (cosh s I + sinh(s)/s a·σ)` with `s² = a·a`.
pub fn expm_pauli<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let [a0, ax, ay, az] = pauli_components(a);
    let s2 = ax * ax + ay * ay + az * az;
    let s = ComplexField::sqrt(s2);
    let one = Complex::new(T::one(), T::zero());
    let (cosh, sinhc) = if abs2(s2) < T::lit(1e-6) {
        // Taylor series, |s|² < 1e-3
        let c = one + s2 * T::lit(0.5) + s2 * s2 / T::lit(24.0) + s2 * s2 * s2 / T::lit(720.0);
        let sc = one + s2 / T::lit(6.0) + s2 * s2 / T::lit(120.0) + s2 * s2 * s2 / T::lit(5040.0);
        (c, sc)
    } else {
        (ComplexField::cosh(s), ComplexField::sinh(s) / s)
    };
    let pre = ComplexField::exp(a0);
    pauli_combination(pre * cosh, pre * sinhc * ax, pre * sinhc * ay, pre * sinhc * az)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm<T: Real>(a: &CMatrix<T>) -> T {
    (0..a.ncols())
        .map(|c| a.column(c).iter().fold(T::zero(), |acc, z| acc + abs2(*z).sqrt()))
        .fold(T::zero(), |m, x| if x > m { x } else { m })
}

/// Scaling-and-squaring exponential with the degree-13 Padé approximant.
pub fn expm_pade<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.nrows();
    let theta13 = T::lit(5.371920351148152);
    let norm = one_norm(a);
    let mut squarings = 0i32;
    if norm > theta13 {
        let ratio = (norm / theta13).to_f64_lossy();
        squarings = ratio.log2().ceil().max(0.0) as i32;
    }
    let scale = T::lit(2f64.powi(-squarings));
    let a = a * Complex::new(scale, T::zero());
    let b = |k: usize| Complex::new(T::lit(PADE13[k]), T::zero());
    let id = identity::<T>(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = match q.lu().solve(&p) {
        Some(r) => r,
        None => return CMatrix::from_element(n, n, Complex::new(T::zero() / T::zero(), T::zero())),
    };
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Report of [`validate_metric`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetricValidation<T> {
    pub hermiticity_residual: T,
    pub min_eigenvalue: T,
    pub condition_number: T,
    pub ok: bool,
}

/// Checks that `eta` is a usable metric: Hermitian within `tol` and with
/// smallest eigenvalue above `tol`.
pub fn validate_metric<T: Real>(eta: &CMatrix<T>, tol: T) -> MetricValidation<T> {
    let hermiticity_residual = if ensure_square(eta).is_ok() && ensure_finite(eta).is_ok() {
        hermiticity_residual(eta)
    } else {
        T::max_value().unwrap_or(T::one() / T::eps())
    };
    let (min_eigenvalue, condition_number) = match HermitianEigen::new(eta) {
        Ok(e) => {
            let lo = e.values[0];
            let hi = e.values[e.values.len() - 1].abs().max(lo.abs());
            let cond = if lo > T::zero() { hi / lo } else { T::one() / T::eps() / T::eps() };
            (lo, cond)
        }
        Err(_) => (-T::one() / T::eps(), T::one() / T::eps() / T::eps()),
    };
    let ok = hermiticity_residual <= tol && min_eigenvalue > tol;
    MetricValidation { hermiticity_residual, min_eigenvalue, condition_number, ok }
}

/// Default positivity tolerance `1e-10·‖η‖_F`.
pub fn default_metric_tol<T: Real>(eta: &CMatrix<T>) -> T {
    T::lit(1e-10) * frob(eta).max(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    type M = CMatrix<f64>;

    fn sx() -> M {
        sigma_x()
    }
    fn sy() -> M {
        sigma_y()
    }
    fn sz() -> M {
        sigma_z()
    }
    fn id() -> M {
        identity(2)
    }
    fn s(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn sqrt_of_identity_is_identity() {
        let r = hermitian_sqrt(&id(), 1e-12).unwrap();
        assert!(frob(&(r.sqrt - id())) < 1e-14);
        assert!(frob(&(r.inv_sqrt - id())) < 1e-14);
    }

    #[test]
    fn sqrt_of_annulus_metric_at_origin() {
        let r3 = 3f64.sqrt();
        let eta = id() + sx() * s(r3 / 2.0);
        let r = hermitian_sqrt(&eta, 1e-12).unwrap();
        let expected = id() * s(r3 / 2.0) + sx() * s(0.5);
        let expected_inv = id() * s(r3) - sx();
        assert!(frob(&(&r.sqrt - expected)) < 1e-14);
        assert!(frob(&(&r.inv_sqrt - &expected_inv)) < 1e-14);
        // (√3 I − σx)·√η = I by direct multiplication
        assert!(frob(&(expected_inv * &r.sqrt - id())) < 1e-14);
    }

    #[test]
    fn sqrt_matches_closed_form_for_sigma_y_metric() {
        let v: f64 = 0.5;
        let eta = id() + sy() * s(v);
        let r = hermitian_sqrt(&eta, 1e-12).unwrap();
        let closed = expm_pauli(&(sy() * s(0.5 * v.atanh()))) * s((1.0 - v * v).powf(0.25));
        assert!(frob(&(r.sqrt - closed)) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_non_hermitian_and_indefinite() {
        let bad = sy() * cplx(0.0, 1.0);
        assert!(matches!(hermitian_sqrt(&bad, 1e-10), Err(Error::NotHermitian { .. })));
        let indef = id() + sx() * s(1.2);
        assert!(matches!(hermitian_sqrt(&indef, 1e-10), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn sqrt_derivative_matches_finite_difference() {
        let eta = |t: f64| id() + sx() * s(0.4 * t.cos()) + sy() * s(0.3 * t.sin()) + sz() * s(0.2 * t);
        let deta = |t: f64| sx() * s(-0.4 * t.sin()) + sy() * s(0.3 * t.cos()) + sz() * s(0.2);
        let t0 = 0.7;
        let h = 1e-5;
        let r = hermitian_sqrt(&eta(t0), 1e-12).unwrap();
        let analytic = r.derivative(&deta(t0));
        let fd = (hermitian_sqrt(&eta(t0 + h), 1e-12).unwrap().sqrt
            - hermitian_sqrt(&eta(t0 - h), 1e-12).unwrap().sqrt)
            / s(2.0 * h);
        assert!(frob(&(analytic - fd)) < 1e-9);
    }

    #[test]
    fn exponential_of_zero_is_identity() {
        let z = M::zeros(2, 2);
        assert!(frob(&(matrix_exponential(&z).unwrap() - id())) < 1e-15);
        let z3 = M::zeros(3, 3);
        assert!(frob(&(matrix_exponential(&z3).unwrap() - identity(3))) < 1e-15);
    }

    #[test]
    fn exponential_of_minus_i_pi_sigma_z() {
        let e = matrix_exponential(&(sz() * cplx(0.0, -PI))).unwrap();
        assert!(frob(&(e + id())) < 1e-14);
        let e = expm_pade(&(sz() * cplx(0.0, -PI)));
        assert!(frob(&(e + id())) < 1e-13);
    }

    #[test]
    fn exponential_of_quarter_turn() {
        let e = matrix_exponential(&(sz() * cplx(0.0, -PI / 2.0))).unwrap();
        assert_relative_eq!(e[(0, 0)].im, -1.0, epsilon = 1e-14);
        assert_relative_eq!(e[(1, 1)].im, 1.0, epsilon = 1e-14);
        assert!(e[(0, 0)].re.abs() < 1e-14 && e[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn exponential_nilpotent_uses_series_branch() {
        // s² = 0 for a nilpotent matrix
        let a = M::from_row_slice(2, 2, &[s(0.0), s(1.0), s(0.0), s(0.0)]);
        let e = matrix_exponential(&a).unwrap();
        let expected = M::from_row_slice(2, 2, &[s(1.0), s(1.0), s(0.0), s(1.0)]);
        assert!(frob(&(e - expected)) < 1e-15);
    }

    #[test]
    fn exponential_overflow_is_reported() {
        let a = id() * s(1e4);
        assert_eq!(matrix_exponential(&a), Err(Error::Overflow));
        let a3 = identity::<f64>(3) * s(1e4);
        assert_eq!(matrix_exponential(&a3), Err(Error::Overflow));
    }

    #[test]
    fn commutator_pauli_algebra() {
        let c = commutator(&sx(), &sy()).unwrap();
        assert!(frob(&(c - sz() * cplx(0.0, 2.0))) < 1e-15);
        assert!(frob(&commutator(&sx(), &sx()).unwrap()) == 0.0);
        assert!(frob(&commutator(&sx(), &id()).unwrap()) == 0.0);
        assert!(matches!(
            commutator(&sx(), &identity(3)),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn metric_validation_reports() {
        let ok = validate_metric(&(id() + sx() * s(3f64.sqrt() / 2.0)), 1e-10);
        assert!(ok.ok);
        assert_relative_eq!(ok.min_eigenvalue, 1.0 - 3f64.sqrt() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(
            ok.condition_number,
            (1.0 + 3f64.sqrt() / 2.0) / (1.0 - 3f64.sqrt() / 2.0),
            epsilon = 1e-10
        );
        let bad = validate_metric(&(id() + sx() * s(1.2)), 1e-10);
        assert!(!bad.ok);
        assert_relative_eq!(bad.min_eigenvalue, -0.2, epsilon = 1e-14);
        let nh = validate_metric(&(sy() * cplx(0.0, 1.0)), 1e-10);
        assert!(!nh.ok && nh.hermiticity_residual > 0.0);
    }

    #[test]
    fn pauli_round_trip() {
        let a = M::from_row_slice(2, 2, &[cplx(1.0, 2.0), cplx(-0.5, 0.3), cplx(0.7, -1.1), cplx(0.2, 0.0)]);
        let [a0, ax, ay, az] = pauli_components(&a);
        assert!(frob(&(pauli_combination(a0, ax, ay, az) - &a)) < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let eta: CMatrix<f32> = identity(2) + sigma_x::<f32>() * Complex::new(0.5f32, 0.0);
        let r = hermitian_sqrt(&eta, 1e-5).unwrap();
        assert!(frob(&(&r.sqrt * &r.sqrt - &eta)) < 1e-5);
        let e = matrix_exponential(&(sigma_z::<f32>() * Complex::new(0.0, -std::f32::consts::PI))).unwrap();
        assert!(frob(&(e + identity::<f32>(2))) < 1e-5);
    }
}
