use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Axis, QuasiHermitianModel};
use crate::linalg::{hermitian_sqrt, identity, pauli_combination, sigma_x, sigma_y, CMatrix};
use crate::scalar::{re, Real};

type MatrixFn<T> = Arc<dyn Fn(&[T]) -> CMatrix<T> + Send + Sync>;
type PartialFn<T> = Arc<dyn Fn(&[T], usize) -> CMatrix<T> + Send + Sync>;

/// User-defined model built from closures.
#[derive(Clone)]
pub struct FnModel<T: Real> {
    name: String,
    dim: usize,
    axes: Vec<Axis<T>>,
    hamiltonian: MatrixFn<T>,
    metric: MatrixFn<T>,
    partial: Option<PartialFn<T>>,
}

impl<T: Real> fmt::Debug for FnModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnModel").field("name", &self.name).field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl<T: Real> FnModel<T> {
    pub fn new(
        name: &str,
        dim: usize,
        axes: Vec<Axis<T>>,
        hamiltonian: impl Fn(&[T]) -> CMatrix<T> + Send + Sync + 'static,
        metric: impl Fn(&[T]) -> CMatrix<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.to_string(),
            dim,
            axes,
            hamiltonian: Arc::new(hamiltonian),
            metric: Arc::new(metric),
            partial: None,
        }
    }

    pub fn with_metric_partials(mut self, partial: impl Fn(&[T], usize) -> CMatrix<T> + Send + Sync + 'static) -> Self {
        self.partial = Some(Arc::new(partial));
        self
    }
}

impl<T: Real> QuasiHermitianModel<T> for FnModel<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    fn hamiltonian(&self, r: &[T]) -> CMatrix<T> {
        (self.hamiltonian)(r)
    }

    fn metric(&self, r: &[T]) -> CMatrix<T> {
        (self.metric)(r)
    }

    fn metric_partial_analytic(&self, r: &[T], axis: usize) -> Option<CMatrix<T>> {
        self.partial.as_ref().map(|p| p(r, axis))
    }
}

/// One smooth wave `amp · sin(kx x + ky y + phase)`.
#[derive(Debug, Clone, Copy)]
struct Wave {
    amp: f64,
    kx: f64,
    ky: f64,
    phase: f64,
}

impl Wave {
    fn random(rng: &mut ChaCha8Rng, amp: f64) -> Self {
        Self {
            amp: amp * rng.gen_range(0.5..1.0),
            kx: rng.gen_range(0.5..2.0),
            ky: rng.gen_range(0.5..2.0),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        }
    }

    fn value<T: Real>(&self, r: &[T]) -> T {
        T::lit(self.amp) * (T::lit(self.kx) * r[0] + T::lit(self.ky) * r[1] + T::lit(self.phase)).sin()
    }

    fn gradient<T: Real>(&self, r: &[T]) -> [T; 2] {
        let c = T::lit(self.amp) * (T::lit(self.kx) * r[0] + T::lit(self.ky) * r[1] + T::lit(self.phase)).cos();
        [c * T::lit(self.kx), c * T::lit(self.ky)]
    }
}

/// Seeded random smooth two-level family on `[−1, 1]²`:
/// `η = I + a σx + b σy` with `‖(a, b)‖ < 0.9` and `H = √η⁻¹ h √η` for a
/// gapped Hermitian `h`, so `ηH = H†η` holds by construction.
#[derive(Debug, Clone)]
pub struct RandomSmoothFamily<T: Real> {
    seed: u64,
    axes: Vec<Axis<T>>,
    a: Wave,
    b: Wave,
    hx: Wave,
    hy: Wave,
    hz: Wave,
}

impl<T: Real> RandomSmoothFamily<T> {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let one = T::one();
        Self {
            seed,
            axes: vec![Axis::interval("x", -one, one), Axis::interval("y", -one, one)],
            a: Wave::random(&mut rng, 0.6),
            b: Wave::random(&mut rng, 0.6),
            hx: Wave::random(&mut rng, 0.8),
            hy: Wave::random(&mut rng, 0.8),
            hz: Wave::random(&mut rng, 0.3),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The Hermitian reference `h(R)`, with `σz` coefficient `1 + hz ≥ 0.7`.
    pub fn hermitian_reference(&self, r: &[T]) -> CMatrix<T> {
        pauli_combination(
            re(T::zero()),
            re(self.hx.value(r)),
            re(self.hy.value(r)),
            re(T::one() + self.hz.value(r)),
        )
    }
}

impl<T: Real> QuasiHermitianModel<T> for RandomSmoothFamily<T> {
    fn name(&self) -> &str {
        "random"
    }

    fn dim(&self) -> usize {
        2
    }

    fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    fn hamiltonian(&self, r: &[T]) -> CMatrix<T> {
        let root = hermitian_sqrt(&self.metric(r), T::lit(1e-12)).expect("metric positive by construction");
        &root.inv_sqrt * self.hermitian_reference(r) * &root.sqrt
    }

    fn metric(&self, r: &[T]) -> CMatrix<T> {
        identity::<T>(2) + sigma_x::<T>() * re(self.a.value(r)) + sigma_y::<T>() * re(self.b.value(r))
    }

    fn metric_partial_analytic(&self, r: &[T], axis: usize) -> Option<CMatrix<T>> {
        if axis > 1 {
            return None;
        }
        Some(sigma_x::<T>() * re(self.a.gradient(r)[axis]) + sigma_y::<T>() * re(self.b.gradient(r)[axis]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob, validate_metric};
    use crate::model::{eval_point, metric_partial_numeric};

    #[test]
    fn random_family_is_quasi_hermitian_and_reproducible() {
        for seed in 0..5 {
            let m = RandomSmoothFamily::<f64>::new(seed);
            let again = RandomSmoothFamily::<f64>::new(seed);
            for k in 0..25 {
                let p = [-0.9 + 0.07 * k as f64, 0.8 - 0.06 * k as f64];
                let s = eval_point(&m, &p).unwrap();
                assert!(s.qh_residual < 1e-12);
                assert!(validate_metric(&s.eta, 1e-10).ok);
                assert_eq!(s.h, again.hamiltonian(&p));
                let a = (s.eta[(0, 1)].re.powi(2) + s.eta[(0, 1)].im.powi(2)).sqrt();
                assert!(a < 0.9);
                for axis in 0..2 {
                    let an = m.metric_partial_analytic(&p, axis).unwrap();
                    let nu = metric_partial_numeric(&m, &p, axis, 1e-4).unwrap();
                    assert!(frob(&(an - nu)) < 1e-9);
                }
            }
        }
    }
}
