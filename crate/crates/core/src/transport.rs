//! Parallel transport of the unitary factor `U` of a proper frame
//! `S = U√η` (`∂_μU = −U G_μ`), Wilson loops, Hermitian images and
//! obstruction classification.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{max_curvature_norm, LocalMetric};
use crate::linalg::{frob, hermiticity_residual, identity, matrix_exponential, unitarity_residual, CMatrix};
use crate::model::{check_point, QuasiHermitianModel};
use crate::path::PathSpec;
use crate::scalar::{re, Real};

/// Frames whose `√η` condition number exceeds this are treated as singular.
pub const FRAME_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct TransportResult<T: Real> {
    pub u_samples: Vec<CMatrix<T>>,
    /// `max_k ‖U_k†U_k − I‖_F`
    pub unitarity_residual: T,
    pub step_count: usize,
    /// `‖U_N − U_N^{coarse}‖_F / 3` from the same path at half resolution.
    pub convergence: T,
}

impl<T: Real> TransportResult<T> {
    pub fn endpoint(&self) -> &CMatrix<T> {
        &self.u_samples[self.u_samples.len() - 1]
    }
}

/// `Σ_μ G_μ(mid) ΔR^μ` for one segment.
fn segment_generator<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, a: &[T], b: &[T]) -> Result<CMatrix<T>> {
    let half = T::lit(0.5);
    let mid: Vec<T> = a.iter().zip(b).map(|(&x, &y)| (x + y) * half).collect();
    let local = LocalMetric::at(model, &mid)?;
    let n = model.dim();
    let mut x = CMatrix::zeros(n, n);
    for (axis, (&xa, &xb)) in a.iter().zip(b).enumerate() {
        let d = xb - xa;
        if d != T::zero() {
            x += local.g(axis) * re(d);
        }
    }
    Ok(x)
}

fn integrate<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    samples: &[Vec<T>],
    u0: &CMatrix<T>,
) -> Result<Vec<CMatrix<T>>> {
    let mut us = Vec::with_capacity(samples.len());
    us.push(u0.clone());
    for w in samples.windows(2) {
        let x = segment_generator(model, &w[0], &w[1])?;
        let step = matrix_exponential(&(-x))?;
        let next = &us[us.len() - 1] * step;
        us.push(next);
    }
    Ok(us)
}

fn check_u0<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, u0: &CMatrix<T>) -> Result<()> {
    let n = model.dim();
    if u0.nrows() != n || u0.ncols() != n {
        return Err(Error::DimensionMismatch { left: u0.nrows(), right: n });
    }
    let r = unitarity_residual(u0);
    if r > T::lit(1e-10) {
        return Err(Error::NotUnitary { residual: r.to_f64_lossy() });
    }
    Ok(())
}

/// Integrates `dU = −U G_μ dR^μ` along `path` from `U_0 = u0` with the
/// midpoint product of exponentials `U_{k+1} = U_k exp(−G_μ(mid) ΔR^μ)`.
pub fn transport_unitary<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    path: &PathSpec<T>,
    u0: &CMatrix<T>,
) -> Result<TransportResult<T>> {
    check_u0(model, u0)?;
    let u_samples = integrate(model, &path.samples, u0)?;
    let coarse = path.coarsened();
    let convergence = if coarse.samples.len() >= 3 {
        let uc = integrate(model, &coarse.samples, u0)?;
        frob(&(&u_samples[u_samples.len() - 1] - &uc[uc.len() - 1])) / T::lit(3.0)
    } else {
        T::zero()
    };
    let unitarity_residual = u_samples.iter().map(unitarity_residual).fold(T::zero(), |a, b| a.max(b));
    Ok(TransportResult { u_samples, unitarity_residual, step_count: path.steps(), convergence })
}

#[derive(Debug, Clone)]
pub struct HolonomyResult<T: Real> {
    pub w: CMatrix<T>,
    /// `‖W − I‖_F`
    pub distance_to_identity: T,
    /// `min_φ ‖W − e^{iφ}I‖_F`
    pub distance_to_center: T,
    pub nontrivial: bool,
    pub unitarity_residual: T,
    pub convergence: T,
}

/// `min_φ ‖W − e^{iφ}I‖_F = √(‖W‖² + n − 2|tr W|)`.
pub fn distance_to_center<T: Real>(w: &CMatrix<T>) -> T {
    let n = T::lit(w.nrows() as f64);
    let f = frob(w);
    let tr = w.trace();
    let tr_abs = (tr.re * tr.re + tr.im * tr.im).sqrt();
    (f * f + n - T::lit(2.0) * tr_abs).max(T::zero()).sqrt()
}

/// Wilson loop `W(C) = P exp(−∮ G_μ dR^μ)`, transported from `U_0 = I`.
/// `nontrivial` is `‖W − I‖_F > tol`.
pub fn wilson_loop<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    path: &PathSpec<T>,
    tol: T,
) -> Result<HolonomyResult<T>> {
    path.require_closed()?;
    let id = identity::<T>(model.dim());
    let tr = transport_unitary(model, path, &id)?;
    let w = tr.endpoint().clone();
    let distance_to_identity = frob(&(&w - &id));
    Ok(HolonomyResult {
        distance_to_center: distance_to_center(&w),
        nontrivial: distance_to_identity > tol,
        distance_to_identity,
        unitarity_residual: tr.unitarity_residual,
        convergence: tr.convergence,
        w,
    })
}

/// Samples `S_k = U_k √η(R_k)` of a proper frame along a path.
#[derive(Debug, Clone)]
pub struct ProperFrame<T: Real> {
    pub s_samples: Vec<CMatrix<T>>,
    pub u_samples: Vec<CMatrix<T>>,
    pub sqrt_eta: Vec<CMatrix<T>>,
    pub inv_sqrt_eta: Vec<CMatrix<T>>,
    /// `max ‖S†∂_tS − ½∂_tη‖_F` over interior samples, with fourth-order
    /// central differences in the path parameter.
    pub proper_residual: T,
    /// `max ‖S†S − η‖_F`
    pub factorization_residual: T,
    pub transport: TransportResult<T>,
}

/// Fourth-order central difference of sampled values at interior index `k`.
pub(crate) fn path_derivative<T: Real>(v: &[CMatrix<T>], k: usize, dt: T) -> CMatrix<T> {
    let w = re(T::one() / (T::lit(12.0) * dt));
    ((&v[k + 1] - &v[k - 1]) * re(T::lit(8.0)) - (&v[k + 2] - &v[k - 2])) * w
}

pub fn proper_frame<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    path: &PathSpec<T>,
    u0: &CMatrix<T>,
) -> Result<ProperFrame<T>> {
    let transport = transport_unitary(model, path, u0)?;
    let mut etas = Vec::with_capacity(path.samples.len());
    let mut sqrt_eta = Vec::with_capacity(path.samples.len());
    let mut inv_sqrt_eta = Vec::with_capacity(path.samples.len());
    for p in &path.samples {
        let local = LocalMetric::at(model, p)?;
        etas.push(local.eta);
        sqrt_eta.push(local.root.sqrt);
        inv_sqrt_eta.push(local.root.inv_sqrt);
    }
    let s_samples: Vec<CMatrix<T>> = transport.u_samples.iter().zip(&sqrt_eta).map(|(u, r)| u * r).collect();
    let factorization_residual = s_samples
        .iter()
        .zip(&etas)
        .map(|(s, e)| frob(&(s.adjoint() * s - e)))
        .fold(T::zero(), |a, b| a.max(b));
    let n = path.steps();
    let dt = path.dt();
    let half = re(T::lit(0.5));
    let mut proper_residual = T::zero();
    for k in 2..n.saturating_sub(1) {
        let ds = path_derivative(&s_samples, k, dt);
        let de = path_derivative(&etas, k, dt);
        let r = frob(&(s_samples[k].adjoint() * ds - de * half));
        proper_residual = proper_residual.max(r);
    }
    Ok(ProperFrame {
        s_samples,
        u_samples: transport.u_samples.clone(),
        sqrt_eta,
        inv_sqrt_eta,
        proper_residual,
        factorization_residual,
        transport,
    })
}

#[derive(Debug, Clone)]
pub struct MappedHamiltonian<T: Real> {
    /// `H̃_k = S_k H(R_k) S_k⁻¹`
    pub h_tilde: Vec<CMatrix<T>>,
    /// `max ‖H̃ − H̃†‖_F`
    pub hermiticity_residual: T,
    /// `‖H̃_N − H̃_0‖_F`, closed paths only.
    pub periodicity_defect: Option<T>,
    /// `‖H̃_N − V H̃_0 V⁻¹‖_F` with `V = U_N U_0⁻¹`, closed paths only.
    pub monodromy_residual: Option<T>,
    /// `V`, closed paths only.
    pub monodromy: Option<CMatrix<T>>,
    pub max_condition: T,
}

pub fn mapped_hamiltonian<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    frame: &ProperFrame<T>,
    path: &PathSpec<T>,
) -> Result<MappedHamiltonian<T>> {
    if frame.s_samples.len() != path.samples.len() {
        return Err(Error::DimensionMismatch { left: frame.s_samples.len(), right: path.samples.len() });
    }
    let mut h_tilde = Vec::with_capacity(path.samples.len());
    let mut max_condition = T::one();
    for (k, p) in path.samples.iter().enumerate() {
        check_point(model, p)?;
        let local = LocalMetric::at(model, p)?;
        let vals = &local.root.eigen.values;
        let cond = (vals[vals.len() - 1] / vals[0]).sqrt();
        if !(cond <= T::lit(FRAME_CONDITION_LIMIT)) {
            return Err(Error::SingularFrame { sample: k, condition: cond.to_f64_lossy() });
        }
        max_condition = max_condition.max(cond);
        let s_inv = &frame.inv_sqrt_eta[k] * frame.u_samples[k].adjoint();
        h_tilde.push(&frame.s_samples[k] * model.hamiltonian(p) * s_inv);
    }
    let hermiticity_residual = h_tilde.iter().map(hermiticity_residual).fold(T::zero(), |a, b| a.max(b));
    let (periodicity_defect, monodromy_residual, monodromy) = if path.closed {
        let n = h_tilde.len() - 1;
        let v = &frame.u_samples[n] * frame.u_samples[0].adjoint();
        let conj = &v * &h_tilde[0] * v.adjoint();
        (Some(frob(&(&h_tilde[n] - &h_tilde[0]))), Some(frob(&(&h_tilde[n] - conj))), Some(v))
    } else {
        (None, None, None)
    };
    Ok(MappedHamiltonian { h_tilde, hermiticity_residual, periodicity_defect, monodromy_residual, monodromy, max_condition })
}

/// Rectangular sampling of parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Per axis `(lo, hi, count)`; both ends included.
    pub ranges: Vec<(f64, f64, usize)>,
}

impl GridSpec {
    /// `count` points per axis, kept `margin` inside non-periodic bounds;
    /// periodic axes are sampled over one period without the endpoint.
    pub fn covering<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, count: usize, margin: f64) -> Self {
        let ranges = model
            .axes()
            .iter()
            .map(|a| {
                let (lo, hi) = (a.lo.to_f64_lossy(), a.hi.to_f64_lossy());
                if a.periodic {
                    let step = (hi - lo) / count as f64;
                    (lo, hi - step, count)
                } else {
                    (lo + margin, hi - margin, count)
                }
            })
            .collect();
        Self { ranges }
    }

    pub fn points<T: Real>(&self) -> Vec<Vec<T>> {
        let mut out: Vec<Vec<T>> = vec![Vec::new()];
        for &(lo, hi, n) in &self.ranges {
            let vals: Vec<f64> = if n <= 1 {
                vec![lo]
            } else {
                (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
            };
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(T::lit(v));
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    None,
    Geometric,
    Topological,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::None => "none",
            Verdict::Geometric => "geometric",
            Verdict::Topological => "topological",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ObstructionReport<T: Real> {
    pub verdict: Verdict,
    pub max_curvature_norm: T,
    pub loop_results: Vec<(usize, HolonomyResult<T>)>,
    pub notes: String,
}

/// Geometric obstruction when `max ‖F^G‖_F > tol` on the grid; otherwise
/// topological when some loop has `‖W − I‖_F > tol`.
pub fn classify_obstruction<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    grid: &GridSpec,
    loops: &[PathSpec<T>],
    tol: T,
    h: T,
) -> Result<ObstructionReport<T>> {
    let points = grid.points::<T>();
    let max_f = max_curvature_norm(model, &points, h)?;
    if max_f > tol {
        return Ok(ObstructionReport {
            verdict: Verdict::Geometric,
            max_curvature_norm: max_f,
            loop_results: Vec::new(),
            notes: format!(
                "curvature F^G reaches {:.6e} on the grid; no proper frame exists on any open set containing that point",
                max_f.to_f64_lossy()
            ),
        });
    }
    let loop_results = loops
        .par_iter()
        .enumerate()
        .map(|(k, l)| wilson_loop(model, l, tol).map(|w| (k, w)))
        .collect::<Result<Vec<_>>>()?;
    let open: Vec<usize> = loop_results.iter().filter(|(_, w)| w.nontrivial).map(|(k, _)| *k).collect();
    let (verdict, notes) = if open.is_empty() {
        (Verdict::None, format!("flat on the grid and {} loop(s) have trivial holonomy", loop_results.len()))
    } else {
        let central = open.iter().all(|&k| loop_results[k].1.distance_to_center <= tol);
        (
            Verdict::Topological,
            format!(
                "flat on the grid but loop(s) {open:?} have nontrivial holonomy{}",
                if central { "; every such W is a phase times I, so H̃ is still single-valued" } else { "" }
            ),
        )
    };
    Ok(ObstructionReport { verdict, max_curvature_norm: max_f, loop_results, notes })
}

/// `exp(−i a σz)` helper for closed-form comparisons.
pub fn z_rotation<T: Real>(a: T) -> CMatrix<T> {
    let (c, s) = (a.cos(), a.sin());
    let o = Complex::new(T::zero(), T::zero());
    CMatrix::from_row_slice(2, 2, &[Complex::new(c, -s), o, o, Complex::new(c, s)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_x, sigma_y, sigma_z};
    use crate::model::{Axis, Example1, Example2, Example3, FnModel};
    use crate::scalar::cplx;
    use std::f64::consts::PI;

    fn ex3_loop(steps: usize) -> PathSpec<f64> {
        PathSpec::circle(&Example3::new(), 1, vec![1.5, 0.0], 1, steps).unwrap()
    }

    #[test]
    fn example1_transport_is_trivial() {
        let m = Example1::smooth();
        let p = PathSpec::waypoints(&m, vec![vec![-0.5, -0.5], vec![0.7, 0.1], vec![0.2, 0.8]], false, 64).unwrap();
        let u0 = matrix_exponential(&(sigma_y::<f64>() * cplx(0.0, 0.4))).unwrap();
        let t = transport_unitary(&m, &p, &u0).unwrap();
        assert!(t.u_samples.iter().all(|u| frob(&(u - &u0)) < 1e-13));
    }

    #[test]
    fn example3_half_turn() {
        let m = Example3::<f64>::new();
        let p = PathSpec::from_curve(
            &m,
            crate::path::Curve::Polyline { waypoints: vec![vec![1.5, 0.0], vec![1.5, PI]] },
            256,
        )
        .unwrap();
        let t = transport_unitary(&m, &p, &identity(2)).unwrap();
        let expected = sigma_z::<f64>() * cplx(0.0, -1.0);
        assert!(frob(&(t.endpoint() - expected)) < 1e-12);
    }

    #[test]
    fn unitarity_on_1024_steps() {
        let m = Example2::<f64>::new(PI / 3.0);
        let p = PathSpec::waypoints(&m, vec![vec![0.1, 0.0], vec![0.9, 2.0], vec![0.4, 5.0]], true, 1024).unwrap();
        let t = transport_unitary(&m, &p, &identity(2)).unwrap();
        assert!(t.unitarity_residual <= 1e-10);
    }

    #[test]
    fn rejects_nonunitary_start() {
        let m = Example3::<f64>::new();
        let u0 = identity::<f64>(2) * cplx(1.1, 0.0);
        assert!(matches!(transport_unitary(&m, &ex3_loop(16), &u0), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn example3_wilson_loop_is_minus_identity() {
        let m = Example3::<f64>::new();
        let w = wilson_loop(&m, &ex3_loop(2048), 1e-6).unwrap();
        assert!(frob(&(&w.w + identity::<f64>(2))) < 1e-10);
        assert!((w.distance_to_identity - 8f64.sqrt()).abs() < 1e-10);
        assert!(w.distance_to_center < 1e-6);
        assert!(w.nontrivial);
    }

    #[test]
    fn example2_wilson_loops() {
        let m = Example2::<f64>::new(PI / 2.0);
        let r0 = Example2::<f64>::quantized_radius();
        let at_r0 = wilson_loop(&m, &PathSpec::circle(&m, 1, vec![r0, 0.0], 1, 1024).unwrap(), 1e-6).unwrap();
        assert!(at_r0.distance_to_identity < 1e-9);
        let at_06 = wilson_loop(&m, &PathSpec::circle(&m, 1, vec![0.6, 0.0], 1, 1024).unwrap(), 1e-6).unwrap();
        assert!(frob(&(&at_06.w - z_rotation(PI / 4.0))) < 1e-10);
        assert!(at_06.nontrivial);
        assert!(at_06.distance_to_center > 0.1);
    }

    #[test]
    fn open_path_has_no_wilson_loop() {
        let m = Example1::smooth();
        let p = PathSpec::waypoints(&m, vec![vec![0.0, 0.0], vec![0.5, 0.5]], false, 16).unwrap();
        assert!(matches!(wilson_loop(&m, &p, 1e-6), Err(Error::PathNotClosed)));
    }

    #[test]
    fn distance_to_center_closed_form_matches_scan() {
        let w = z_rotation(0.3f64) * matrix_exponential(&(sigma_x::<f64>() * cplx(0.0, 0.2))).unwrap();
        let scan = (0..4096)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / 4096.0;
                frob(&(&w - identity::<f64>(2) * crate::scalar::cis(phi)))
            })
            .fold(f64::INFINITY, f64::min);
        let exact = distance_to_center(&w);
        assert!(exact <= scan + 1e-12 && scan - exact < 1e-5);
    }

    #[test]
    fn constant_metric_frame() {
        let eta = identity::<f64>(2) + sigma_x::<f64>() * cplx(0.5, 0.0);
        let e = eta.clone();
        let m = FnModel::new("c", 2, vec![Axis::interval("a", 0.0, 1.0), Axis::angle("b")], |_| sigma_z(), move |_| e.clone());
        let p = PathSpec::circle(&m, 1, vec![0.5, 0.0], 1, 64).unwrap();
        let f = proper_frame(&m, &p, &identity(2)).unwrap();
        let root = crate::linalg::hermitian_sqrt(&eta, 1e-12).unwrap().sqrt;
        assert!(f.s_samples.iter().all(|s| frob(&(s - &root)) < 1e-14));
        assert_eq!(f.proper_residual, 0.0);
        assert!(wilson_loop(&m, &p, 1e-9).unwrap().distance_to_identity == 0.0);
    }

    #[test]
    fn example2_frame_at_quantized_radius() {
        let m = Example2::<f64>::new(PI / 2.0);
        let r0 = Example2::<f64>::quantized_radius();
        let p = PathSpec::circle(&m, 1, vec![r0, 0.0], 1, 2048).unwrap();
        let f = proper_frame(&m, &p, &identity(2)).unwrap();
        assert!(f.proper_residual <= 1e-6, "{}", f.proper_residual);
        assert!(f.factorization_residual <= 1e-8);
        for (k, s) in f.s_samples.iter().enumerate().step_by(97) {
            let th = p.params[k];
            let sp = z_rotation(th) * &f.sqrt_eta[k];
            assert!(frob(&(s - sp)) < 1e-10);
        }
        let mh = mapped_hamiltonian(&m, &f, &p).unwrap();
        assert!(mh.periodicity_defect.unwrap() <= 1e-6);
        for (k, h) in mh.h_tilde.iter().enumerate().step_by(101) {
            let th = p.params[k];
            let expected = sigma_x::<f64>() * cplx(th.cos(), 0.0) + sigma_y::<f64>() * cplx(th.sin(), 0.0);
            assert!(frob(&(h - expected)) < 1e-9);
        }
    }

    #[test]
    fn example2_monodromy_off_resonance() {
        let m = Example2::<f64>::new(PI / 2.0);
        let p = PathSpec::circle(&m, 1, vec![0.6, 0.0], 1, 2048).unwrap();
        let f = proper_frame(&m, &p, &identity(2)).unwrap();
        let mh = mapped_hamiltonian(&m, &f, &p).unwrap();
        assert!(mh.periodicity_defect.unwrap() > 0.1);
        assert!(mh.monodromy_residual.unwrap() <= 1e-6);
        assert!(mh.hermiticity_residual < 1e-10);
    }

    #[test]
    fn example1_image_is_sqrt3_sigma_x() {
        let m = Example1::constant(2.0, 1.0).unwrap();
        let p = PathSpec::waypoints(&m, vec![vec![-0.5, -0.5], vec![0.5, -0.5], vec![0.5, 0.5]], true, 64).unwrap();
        let f = proper_frame(&m, &p, &identity(2)).unwrap();
        let mh = mapped_hamiltonian(&m, &f, &p).unwrap();
        let expected = sigma_x::<f64>() * cplx(3f64.sqrt(), 0.0);
        assert!(mh.h_tilde.iter().all(|h| frob(&(h - &expected)) < 1e-10));
        assert!(mh.periodicity_defect.unwrap() < 1e-10);
    }

    #[test]
    fn frames_differ_by_constant_unitary() {
        let m = Example2::<f64>::new(PI / 3.0);
        let p = PathSpec::waypoints(&m, vec![vec![0.2, 0.0], vec![0.8, 1.0], vec![0.5, 3.0]], false, 512).unwrap();
        let a = proper_frame(&m, &p, &identity(2)).unwrap();
        let v = matrix_exponential(&(sigma_y::<f64>() * cplx(0.0, 1.0))).unwrap();
        let b = proper_frame(&m, &p, &v).unwrap();
        let c0 = &b.u_samples[0] * a.u_samples[0].adjoint();
        for (ua, ub) in a.u_samples.iter().zip(&b.u_samples) {
            assert!(frob(&(ub * ua.adjoint() - &c0)) <= 1e-8);
        }
    }

    #[test]
    fn classification_of_examples() {
        let e1 = Example1::smooth();
        let grid1 = GridSpec::covering(&e1, 6, 0.01);
        let rect = PathSpec::waypoints(&e1, vec![vec![-0.5, -0.5], vec![0.5, -0.5], vec![0.5, 0.5], vec![-0.5, 0.5]], true, 64).unwrap();
        let r1 = classify_obstruction(&e1, &grid1, &[rect], 1e-6, 1e-4).unwrap();
        assert_eq!(r1.verdict, Verdict::None);

        let e2 = Example2::<f64>::new(PI / 2.0);
        let grid2 = GridSpec { ranges: vec![(0.1, 0.9, 5), (0.0, 5.0, 5)] };
        let r2 = classify_obstruction(&e2, &grid2, &[], 1e-6, 1e-4).unwrap();
        assert_eq!(r2.verdict, Verdict::Geometric);
        assert!(r2.max_curvature_norm > 0.1);

        let e3 = Example3::<f64>::new();
        let grid3 = GridSpec::covering(&e3, 6, 0.01);
        let r3 = classify_obstruction(&e3, &grid3, &[ex3_loop(256)], 1e-6, 1e-4).unwrap();
        assert_eq!(r3.verdict, Verdict::Topological);
        assert!(r3.loop_results[0].1.nontrivial);
    }

    #[test]
    fn grid_points_cover_product() {
        let g = GridSpec { ranges: vec![(0.0, 1.0, 3), (2.0, 2.0, 1)] };
        let pts = g.points::<f64>();
        assert_eq!(pts, vec![vec![0.0, 2.0], vec![0.5, 2.0], vec![1.0, 2.0]]);
    }
}
