use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use super::{Axis, QuasiHermitianModel};
use crate::error::{Error, Result};
use crate::linalg::{identity, pauli_combination, sigma_x, sigma_y, CMatrix};
use crate::scalar::{re, Real};

pub type ScalarFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type GradientFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// `H₀ = B σx + iγ σz` with metric `η₀ = I + (γ/B) σy`.
///
/// `B` and `γ` are arbitrary smooth functions of the parameters with
/// `B² − γ² > 0`. The connection vanishes identically for this family.
#[derive(Clone)]
pub struct Example1<T: Real> {
    axes: Vec<Axis<T>>,
    b: ScalarFn<T>,
    gamma: ScalarFn<T>,
    gradients: Option<(GradientFn<T>, GradientFn<T>)>,
}

impl<T: Real> fmt::Debug for Example1<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Example1").field("axes", &self.axes).finish_non_exhaustive()
    }
}

impl<T: Real> Example1<T> {
    pub fn new(
        axes: Vec<Axis<T>>,
        b: impl Fn(&[T]) -> T + Send + Sync + 'static,
        gamma: impl Fn(&[T]) -> T + Send + Sync + 'static,
    ) -> Self {
        Self { axes, b: Arc::new(b), gamma: Arc::new(gamma), gradients: None }
    }

    /// Supplies analytic gradients of `B` and `γ` (one entry per axis).
    pub fn with_gradients(
        mut self,
        b_grad: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
        gamma_grad: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        self.gradients = Some((Arc::new(b_grad), Arc::new(gamma_grad)));
        self
    }

    /// Constant `B`, `γ` over the square `(x, y) ∈ [−1, 1]²`.
    pub fn constant(b: T, gamma: T) -> Result<Self> {
        if !(b * b - gamma * gamma > T::zero()) {
            return Err(Error::ConfigInvalid(format!(
                "example1 requires B² − γ² > 0 (B = {}, γ = {})",
                b.to_f64_lossy(),
                gamma.to_f64_lossy()
            )));
        }
        let one = T::one();
        Ok(Self::new(
            vec![Axis::interval("x", -one, one), Axis::interval("y", -one, one)],
            move |_| b,
            move |_| gamma,
        )
        .with_gradients(|r| vec![T::zero(); r.len()], |r| vec![T::zero(); r.len()]))
    }

    /// `B = 2 + ½ sin x cos y`, `γ = 0.9 cos(x + y/2)` on `[−1, 1]²`.
    pub fn smooth() -> Self {
        let one = T::one();
        let half = T::lit(0.5);
        let g = T::lit(0.9);
        Self::new(
            vec![Axis::interval("x", -one, one), Axis::interval("y", -one, one)],
            move |r| T::lit(2.0) + half * r[0].sin() * r[1].cos(),
            move |r| g * (r[0] + half * r[1]).cos(),
        )
        .with_gradients(
            move |r| vec![half * r[0].cos() * r[1].cos(), -half * r[0].sin() * r[1].sin()],
            move |r| {
                let s = (r[0] + half * r[1]).sin();
                vec![-g * s, -g * half * s]
            },
        )
    }

    pub fn b(&self, r: &[T]) -> T {
        (self.b)(r)
    }

    pub fn gamma(&self, r: &[T]) -> T {
        (self.gamma)(r)
    }
}

impl<T: Real> QuasiHermitianModel<T> for Example1<T> {
    fn name(&self) -> &str {
        "example1"
    }

    fn dim(&self) -> usize {
        2
    }

    fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    fn hamiltonian(&self, r: &[T]) -> CMatrix<T> {
        let zero = re(T::zero());
        pauli_combination(zero, re(self.b(r)), zero, Complex::new(T::zero(), self.gamma(r)))
    }

    fn metric(&self, r: &[T]) -> CMatrix<T> {
        identity::<T>(2) + sigma_y::<T>() * re(self.gamma(r) / self.b(r))
    }

    fn metric_partial_analytic(&self, r: &[T], axis: usize) -> Option<CMatrix<T>> {
        let (bg, gg) = self.gradients.as_ref()?;
        let (b, g) = (self.b(r), self.gamma(r));
        let dv = (gg(r)[axis] * b - g * bg(r)[axis]) / (b * b);
        Some(sigma_y::<T>() * re(dv))
    }
}

/// Two-level system on the unit disk `(r, θ)` with metric
/// `η = I + r cosθ σx + r sinθ σy`; its metric connection has curvature.
#[derive(Debug, Clone)]
pub struct Example2<T: Real> {
    alpha: T,
    axes: Vec<Axis<T>>,
}

/// Largest admissible radius; the metric degenerates at `r = 1`.
pub const EXAMPLE2_R_MAX: f64 = 1.0 - 1e-6;

impl<T: Real> Example2<T> {
    pub fn new(alpha: T) -> Self {
        Self { alpha, axes: vec![Axis::interval("r", T::zero(), T::lit(EXAMPLE2_R_MAX)), Axis::angle("θ")] }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `γ_r = 1/√(1 − r²)`.
    pub fn gamma_r(r: T) -> T {
        T::one() / (T::one() - r * r).sqrt()
    }

    /// `g(r) = (γ_r − 1)/2`, the rotation rate of the proper frame.
    pub fn g(r: T) -> T {
        (Self::gamma_r(r) - T::one()) * T::lit(0.5)
    }

    /// Radius at which `g = 1`: `2√2/3`.
    pub fn quantized_radius() -> T {
        T::lit(2.0) * T::lit(2.0).sqrt() / T::lit(3.0)
    }
}

impl<T: Real> QuasiHermitianModel<T> for Example2<T> {
    fn name(&self) -> &str {
        "example2"
    }

    fn dim(&self) -> usize {
        2
    }

    fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    fn hamiltonian(&self, p: &[T]) -> CMatrix<T> {
        let (r, th) = (p[0], p[1]);
        let gr = Self::gamma_r(r);
        let (sa, ca) = (self.alpha.sin(), self.alpha.cos());
        let half = T::lit(0.5);
        let three = T::lit(3.0);
        let plus = (gr + T::one()) * half;
        let minus = (gr - T::one()) * half;
        let hz = Complex::new(gr * ca, gr * r * sa * (T::lit(2.0) * th).sin());
        let hx = Complex::new(sa * (plus * th.cos() - minus * (three * th).cos()), -gr * r * ca * th.sin());
        let hy = Complex::new(sa * (-plus * th.sin() - minus * (three * th).sin()), gr * r * ca * th.cos());
        pauli_combination(re(T::zero()), hx, hy, hz)
    }

    fn metric(&self, p: &[T]) -> CMatrix<T> {
        let (r, th) = (p[0], p[1]);
        identity::<T>(2) + sigma_x::<T>() * re(r * th.cos()) + sigma_y::<T>() * re(r * th.sin())
    }

    fn metric_partial_analytic(&self, p: &[T], axis: usize) -> Option<CMatrix<T>> {
        let (r, th) = (p[0], p[1]);
        match axis {
            0 => Some(sigma_x::<T>() * re(th.cos()) + sigma_y::<T>() * re(th.sin())),
            1 => Some(sigma_x::<T>() * re(-r * th.sin()) + sigma_y::<T>() * re(r * th.cos())),
            _ => None,
        }
    }
}

/// Flat but multiply connected: annulus `(R, φ)`, `R ∈ [1, 2]`, with metric
/// `η = I + (√3/2)(cosφ σx + sinφ σy)` and spectrum `±1`.
#[derive(Debug, Clone)]
pub struct Example3<T: Real> {
    axes: Vec<Axis<T>>,
}

impl<T: Real> Default for Example3<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Example3<T> {
    pub fn new() -> Self {
        Self { axes: vec![Axis::interval("R", T::one(), T::lit(2.0)), Axis::angle("φ")] }
    }

    fn kappa() -> T {
        T::lit(3.0).sqrt() * T::lit(0.5)
    }
}

impl<T: Real> QuasiHermitianModel<T> for Example3<T> {
    fn name(&self) -> &str {
        "example3"
    }

    fn dim(&self) -> usize {
        2
    }

    fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    fn hamiltonian(&self, p: &[T]) -> CMatrix<T> {
        let phi = p[1];
        let (s, c) = (phi.sin(), phi.cos());
        pauli_combination(
            re(T::zero()),
            re(T::one() + s * s),
            re(-s * c),
            Complex::new(T::zero(), T::lit(3.0).sqrt() * s),
        )
    }

    fn metric(&self, p: &[T]) -> CMatrix<T> {
        let phi = p[1];
        let k = Self::kappa();
        identity::<T>(2) + sigma_x::<T>() * re(k * phi.cos()) + sigma_y::<T>() * re(k * phi.sin())
    }

    fn metric_partial_analytic(&self, p: &[T], axis: usize) -> Option<CMatrix<T>> {
        let phi = p[1];
        let k = Self::kappa();
        match axis {
            0 => Some(CMatrix::zeros(2, 2)),
            1 => Some(sigma_x::<T>() * re(-k * phi.sin()) + sigma_y::<T>() * re(k * phi.cos())),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob, validate_metric};
    use crate::model::{eval_point, metric_partial_numeric};
    use std::f64::consts::PI;

    fn grid(model: &dyn QuasiHermitianModel<f64>, n: usize, margin: f64) -> Vec<[f64; 2]> {
        let ax = model.axes();
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let t = |a: &Axis<f64>, k: usize| {
                    let lo = a.lo + margin * a.span();
                    let hi = a.hi - margin * a.span();
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                };
                pts.push([t(&ax[0], i), t(&ax[1], j)]);
            }
        }
        pts
    }

    fn builtins() -> Vec<Box<dyn QuasiHermitianModel<f64>>> {
        vec![
            Box::new(Example1::constant(2.0, 1.0).unwrap()),
            Box::new(Example1::smooth()),
            Box::new(Example2::new(PI / 2.0)),
            Box::new(Example2::new(0.4)),
            Box::new(Example3::new()),
        ]
    }

    #[test]
    fn quasi_hermiticity_on_grids() {
        for m in builtins() {
            for p in grid(m.as_ref(), 20, 0.02) {
                let s = eval_point(m.as_ref(), &p).unwrap();
                assert!(s.qh_residual <= 1e-10, "{} at {:?}: {}", m.name(), p, s.qh_residual);
            }
        }
    }

    #[test]
    fn spot_residuals() {
        let e1 = Example1::constant(2.0, 1.0).unwrap();
        assert!(eval_point(&e1, &[0.3, -0.2]).unwrap().qh_residual <= 1e-12);
        let e3 = Example3::new();
        assert!(eval_point(&e3, &[1.5, 0.7]).unwrap().qh_residual <= 1e-12);
        let e2 = Example2::new(PI / 2.0);
        assert!(eval_point(&e2, &[0.6, 1.0]).unwrap().qh_residual <= 1e-12);
    }

    #[test]
    fn analytic_partials_match_differences() {
        for m in builtins() {
            for p in grid(m.as_ref(), 10, 0.05) {
                for axis in 0..2 {
                    let a = m.metric_partial_analytic(&p, axis).unwrap();
                    let n = metric_partial_numeric(m.as_ref(), &p, axis, 1e-4).unwrap();
                    assert!(frob(&(a - n)) < 1e-6, "{} axis {} at {:?}", m.name(), axis, p);
                }
            }
        }
    }

    #[test]
    fn example2_metric_min_eigenvalue() {
        let m = Example2::<f64>::new(1.0);
        for k in 0..=99 {
            let r = 0.99 * k as f64 / 99.0;
            let v = validate_metric(&m.metric(&[r, 0.37 * k as f64]), 1e-10);
            assert!(v.ok, "r = {r}");
            assert!((v.min_eigenvalue - (1.0 - r)).abs() < 1e-12);
        }
    }

    #[test]
    fn example2_quantized_radius() {
        let r0 = Example2::<f64>::quantized_radius();
        assert!((Example2::<f64>::gamma_r(r0) - 3.0).abs() < 1e-12);
        assert!((Example2::<f64>::g(r0) - 1.0).abs() < 1e-12);
        assert!((Example2::<f64>::g(0.6) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn example1_rejects_exceptional_parameters() {
        assert!(Example1::<f64>::constant(1.0, 1.0).is_err());
        assert!(Example1::<f64>::constant(1.0, 2.0).is_err());
    }
}
