//! Parameterized quasi-Hermitian systems `R ↦ (H(R), η(R))`.

mod builtin;
mod custom;

pub use builtin::{Example1, Example2, Example3};
pub use custom::{FnModel, RandomSmoothFamily};

use std::ops::{Add, Deref, Mul, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frob, CMatrix};
use crate::scalar::Real;

/// One coordinate axis of a parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis<T> {
    pub label: String,
    pub lo: T,
    pub hi: T,
    /// Periodic axes accept any coordinate; the period is `hi − lo`.
    pub periodic: bool,
}

impl<T: Real> Axis<T> {
    pub fn interval(label: &str, lo: T, hi: T) -> Self {
        Self { label: label.to_string(), lo, hi, periodic: false }
    }

    pub fn angle(label: &str) -> Self {
        Self { label: label.to_string(), lo: T::zero(), hi: T::two_pi(), periodic: true }
    }

    pub fn span(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, x: T) -> bool {
        x.is_finite() && (self.periodic || (x >= self.lo && x <= self.hi))
    }

    /// Default finite-difference step, `1e-4` of the axis span.
    pub fn default_step(&self) -> T {
        T::lit(1e-4) * self.span()
    }
}

/// A point `R = (R¹, R², …)` in parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterPoint<T> {
    pub coords: Vec<T>,
}

impl<T: Real> ParameterPoint<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Self { coords }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|x| x.to_f64_lossy()).collect()
    }
}

impl<T> Deref for ParameterPoint<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.coords
    }
}

impl<T: Real> From<Vec<T>> for ParameterPoint<T> {
    fn from(coords: Vec<T>) -> Self {
        Self { coords }
    }
}

/// A family of Hamiltonians with a metric operator `η` such that
/// `η H = H† η` on the whole domain.
///
/// Evaluation must be pure: the geometry routines call these methods many
/// times at nearby points and from several threads.
pub trait QuasiHermitianModel<T: Real>: Send + Sync {
    fn name(&self) -> &str;

    /// Hilbert-space dimension.
    fn dim(&self) -> usize;

    fn axes(&self) -> &[Axis<T>];

    fn hamiltonian(&self, r: &[T]) -> CMatrix<T>;

    fn metric(&self, r: &[T]) -> CMatrix<T>;

    /// Closed-form `∂η/∂R^axis`, when the model knows it.
    fn metric_partial_analytic(&self, _r: &[T], _axis: usize) -> Option<CMatrix<T>> {
        None
    }

    fn param_count(&self) -> usize {
        self.axes().len()
    }
}

pub(crate) fn point_f64<T: Real>(r: &[T]) -> Vec<f64> {
    r.iter().map(|x| x.to_f64_lossy()).collect()
}

/// Checks arity and per-axis domain membership.
pub fn check_point<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, r: &[T]) -> Result<()> {
    let axes = model.axes();
    if r.len() != axes.len() {
        return Err(Error::WrongArity { expected: axes.len(), got: r.len() });
    }
    for (k, (x, ax)) in r.iter().zip(axes).enumerate() {
        if !ax.contains(*x) {
            return Err(Error::OutOfDomain { point: point_f64(r), axis: k, label: ax.label.clone() });
        }
    }
    Ok(())
}

pub(crate) fn check_axis<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, axis: usize) -> Result<()> {
    if axis >= model.param_count() {
        return Err(Error::BadAxis { axis, count: model.param_count() });
    }
    Ok(())
}

/// `H`, `η` and the quasi-Hermiticity residual at one point.
#[derive(Debug, Clone)]
pub struct SystemSample<T: Real> {
    pub point: ParameterPoint<T>,
    pub h: CMatrix<T>,
    pub eta: CMatrix<T>,
    /// `‖ηH − H†η‖_F`
    pub qh_residual: T,
}

pub fn qh_residual<T: Real>(h: &CMatrix<T>, eta: &CMatrix<T>) -> T {
    frob(&(eta * h - h.adjoint() * eta))
}

/// Evaluates the model at `r`. A large residual is reported, not rejected.
pub fn eval_point<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, r: &[T]) -> Result<SystemSample<T>> {
    check_point(model, r)?;
    let h = model.hamiltonian(r);
    let eta = model.metric(r);
    let qh_residual = qh_residual(&h, &eta);
    Ok(SystemSample { point: ParameterPoint::new(r.to_vec()), h, eta, qh_residual })
}

/// Fourth-order central difference `(−f₂ + 8f₁ − 8f₋₁ + f₋₂)/(12h)` of a
/// matrix- or vector-valued function of the parameters along one axis.
///
/// Non-periodic axes reject stencils that leave the domain.
pub fn central_difference<T, M, V, F>(model: &M, r: &[T], axis: usize, h: T, mut f: F) -> Result<V>
where
    T: Real,
    M: QuasiHermitianModel<T> + ?Sized,
    V: Add<Output = V> + Sub<Output = V> + Mul<Complex<T>, Output = V>,
    F: FnMut(&[T]) -> Result<V>,
{
    check_axis(model, axis)?;
    if !(h > T::zero()) {
        return Err(Error::ConfigInvalid(format!("finite-difference step must be positive, got {}", h.to_f64_lossy())));
    }
    let ax = &model.axes()[axis];
    let two = T::lit(2.0);
    if !ax.periodic && (r[axis] - two * h < ax.lo || r[axis] + two * h > ax.hi) {
        return Err(Error::StepTooLarge { point: point_f64(r), axis, step: h.to_f64_lossy() });
    }
    let mut shifted = r.to_vec();
    let mut at = |offset: T| -> Result<V> {
        shifted[axis] = r[axis] + offset;
        f(&shifted)
    };
    let p2 = at(two * h)?;
    let p1 = at(h)?;
    let m1 = at(-h)?;
    let m2 = at(-two * h)?;
    let w = Complex::new(T::one() / (T::lit(12.0) * h), T::zero());
    let eight = Complex::new(T::lit(8.0), T::zero());
    Ok(((p1 - m1) * eight - (p2 - m2)) * w)
}

/// `∂η/∂R^axis`: analytic when the model provides it, otherwise a
/// fourth-order central difference with step `h`.
pub fn metric_partial<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    r: &[T],
    axis: usize,
    h: T,
) -> Result<CMatrix<T>> {
    check_point(model, r)?;
    check_axis(model, axis)?;
    if let Some(d) = model.metric_partial_analytic(r, axis) {
        return Ok(d);
    }
    metric_partial_numeric(model, r, axis, h)
}

/// Finite-difference `∂η/∂R^axis`, ignoring any analytic partial.
pub fn metric_partial_numeric<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    r: &[T],
    axis: usize,
    h: T,
) -> Result<CMatrix<T>> {
    check_point(model, r)?;
    central_difference(model, r, axis, h, |p| Ok(model.metric(p)))
}

/// Default step for `axis`.
pub fn default_step<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, axis: usize) -> T {
    model.axes()[axis].default_step()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_residual, identity, sigma_x, sigma_y};
    use std::f64::consts::PI;

    fn constant_model() -> FnModel<f64> {
        let eta = identity::<f64>(2) + sigma_x::<f64>() * Complex::new(0.3, 0.0);
        let e2 = eta.clone();
        FnModel::new(
            "constant",
            2,
            vec![Axis::interval("a", -1.0, 1.0), Axis::angle("b")],
            move |_| crate::linalg::sigma_z::<f64>(),
            move |_| e2.clone(),
        )
    }

    #[test]
    fn constant_metric_has_zero_partials() {
        let m = constant_model();
        for axis in 0..2 {
            let d = metric_partial(&m, &[0.1, 2.0], axis, 1e-4).unwrap();
            assert!(frob(&d) < 1e-12);
        }
    }

    #[test]
    fn example3_phi_partial_at_origin() {
        let m = Example3::<f64>::new();
        let expected = sigma_y::<f64>() * Complex::new(3f64.sqrt() / 2.0, 0.0);
        let analytic = metric_partial(&m, &[1.5, 0.0], 1, 1e-4).unwrap();
        let numeric = metric_partial_numeric(&m, &[1.5, 0.0], 1, 1e-4).unwrap();
        assert!(frob(&(&analytic - &expected)) < 1e-14);
        assert!(frob(&(&numeric - &expected)) < 1e-10);
        assert!(hermiticity_residual(&numeric) < 1e-8);
    }

    #[test]
    fn example2_r_partial() {
        let m = Example2::<f64>::new(PI / 2.0);
        let numeric = metric_partial_numeric(&m, &[0.5, 0.0], 0, 1e-4).unwrap();
        assert!(frob(&(numeric - sigma_x::<f64>())) < 1e-10);
    }

    #[test]
    fn stencil_leaving_domain_is_rejected() {
        let m = Example3::<f64>::new();
        let err = metric_partial_numeric(&m, &[1.0001, 0.3], 0, 1e-4).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { axis: 0, .. }));
        // periodic axis wraps instead
        assert!(metric_partial_numeric(&m, &[1.5, 0.0], 1, 1e-4).is_ok());
    }

    #[test]
    fn out_of_domain_and_arity() {
        let m = Example3::<f64>::new();
        assert!(matches!(eval_point(&m, &[2.5, 0.0]), Err(Error::OutOfDomain { axis: 0, .. })));
        assert!(matches!(eval_point(&m, &[1.5]), Err(Error::WrongArity { expected: 2, got: 1 })));
        assert!(matches!(metric_partial(&m, &[1.5, 0.0], 2, 1e-4), Err(Error::BadAxis { .. })));
        // angles are unrestricted
        assert!(eval_point(&m, &[1.5, -40.0]).is_ok());
    }

    #[test]
    fn nonpositive_step_rejected() {
        let m = Example3::<f64>::new();
        assert!(matches!(metric_partial_numeric(&m, &[1.5, 0.0], 1, 0.0), Err(Error::ConfigInvalid(_))));
    }
}
