//! Metric-induced connections `G_μ = ½[∂_μ√η, √η⁻¹]` and
//! `K_μ = ½η⁻¹∂_μη`, their curvatures, and the curvature difference `Δ`.

use nalgebra::ComplexField;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{comm, default_metric_tol, frob, hermitian_sqrt, sandwich, validate_metric, CMatrix, HermitianSqrt};
use crate::model::{central_difference, check_axis, check_point, metric_partial, point_f64, ParameterPoint, QuasiHermitianModel};
use crate::scalar::Real;
use crate::spectra::{biorthogonal_eigensystem, check_band_gap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionKind {
    G,
    K,
}

#[derive(Debug, Clone)]
pub struct ConnectionSample<T: Real> {
    pub point: ParameterPoint<T>,
    pub per_axis: Vec<CMatrix<T>>,
    pub kind: ConnectionKind,
}

#[derive(Debug, Clone)]
pub struct CurvatureSample<T: Real> {
    pub point: ParameterPoint<T>,
    pub axes: (usize, usize),
    pub f: CMatrix<T>,
    pub kind: ConnectionKind,
    /// For `K`: the commutator form `−[K_μ, K_ν]`, equal to `F^K` by the
    /// identity `∂_μK_ν − ∂_νK_μ = −2[K_μ, K_ν]`.
    pub simplified: Option<CMatrix<T>>,
}

/// Metric data at one point: `η`, its square root and its partials.
#[derive(Debug, Clone)]
pub struct LocalMetric<T: Real> {
    pub eta: CMatrix<T>,
    pub root: HermitianSqrt<T>,
    pub partials: Vec<CMatrix<T>>,
}

impl<T: Real> LocalMetric<T> {
    pub fn at<M: QuasiHermitianModel<T> + ?Sized>(model: &M, r: &[T]) -> Result<Self> {
        check_point(model, r)?;
        let eta = model.metric(r);
        let tol = default_metric_tol(&eta);
        let root = hermitian_sqrt(&eta, tol).map_err(|e| {
            let v = validate_metric(&eta, tol);
            Error::MetricInvalid {
                point: point_f64(r),
                reason: format!(
                    "{e}; hermiticity residual {:.3e}, min eigenvalue {:.3e}",
                    v.hermiticity_residual.to_f64_lossy(),
                    v.min_eigenvalue.to_f64_lossy()
                ),
            }
        })?;
        let partials = (0..model.param_count())
            .map(|axis| metric_partial(model, r, axis, model.axes()[axis].default_step()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { eta, root, partials })
    }

    pub fn inverse(&self) -> CMatrix<T> {
        &self.root.inv_sqrt * &self.root.inv_sqrt
    }

    /// `∂_μ√η`.
    pub fn sqrt_partial(&self, axis: usize) -> CMatrix<T> {
        self.root.derivative(&self.partials[axis])
    }

    /// `G_μ = ½[∂_μ√η, √η⁻¹]`.
    pub fn g(&self, axis: usize) -> CMatrix<T> {
        comm(&self.sqrt_partial(axis), &self.root.inv_sqrt) * half::<T>()
    }

    /// `K_μ = ½η⁻¹∂_μη`.
    pub fn k(&self, axis: usize) -> CMatrix<T> {
        self.inverse() * &self.partials[axis] * half::<T>()
    }
}

fn half<T: Real>() -> Complex<T> {
    Complex::new(T::lit(0.5), T::zero())
}

/// `G_μ` at `r` for every axis.
pub fn connection_g<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, r: &[T]) -> Result<ConnectionSample<T>> {
    let local = LocalMetric::at(model, r)?;
    Ok(ConnectionSample {
        point: ParameterPoint::new(r.to_vec()),
        per_axis: (0..model.param_count()).map(|a| local.g(a)).collect(),
        kind: ConnectionKind::G,
    })
}

/// `K_μ` at `r` for every axis.
pub fn connection_k<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, r: &[T]) -> Result<ConnectionSample<T>> {
    let local = LocalMetric::at(model, r)?;
    Ok(ConnectionSample {
        point: ParameterPoint::new(r.to_vec()),
        per_axis: (0..model.param_count()).map(|a| local.k(a)).collect(),
        kind: ConnectionKind::K,
    })
}

/// `∂_μX_ν − ∂_νX_μ` for the connection `kind`, plus the connection itself
/// at `r`.
fn connection_curl<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    r: &[T],
    mu: usize,
    nu: usize,
    h: T,
    kind: ConnectionKind,
) -> Result<(CMatrix<T>, LocalMetric<T>)> {
    check_axis(model, mu)?;
    check_axis(model, nu)?;
    let local = LocalMetric::at(model, r)?;
    let n = model.dim();
    if mu == nu {
        return Ok((CMatrix::zeros(n, n), local));
    }
    let component = |p: &[T], axis: usize| -> Result<CMatrix<T>> {
        let l = LocalMetric::at(model, p)?;
        Ok(match kind {
            ConnectionKind::G => l.g(axis),
            ConnectionKind::K => l.k(axis),
        })
    };
    let d_mu_x_nu = central_difference(model, r, mu, h, |p| component(p, nu))?;
    let d_nu_x_mu = central_difference(model, r, nu, h, |p| component(p, mu))?;
    Ok((d_mu_x_nu - d_nu_x_mu, local))
}

/// `F^G_{μν} = ∂_μG_ν − ∂_νG_μ − [G_μ, G_ν]` with central differences of
/// step `h`.
pub fn curvature_g<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    r: &[T],
    mu: usize,
    nu: usize,
    h: T,
) -> Result<CurvatureSample<T>> {
    let (curl, local) = connection_curl(model, r, mu, nu, h, ConnectionKind::G)?;
    let f = curl - comm(&local.g(mu), &local.g(nu));
    Ok(CurvatureSample { point: ParameterPoint::new(r.to_vec()), axes: (mu, nu), f, kind: ConnectionKind::G, simplified: None })
}

/// `F^K_{μν} = ∂_μK_ν − ∂_νK_μ + [K_μ, K_ν]`.
pub fn curvature_k<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    r: &[T],
    mu: usize,
    nu: usize,
    h: T,
) -> Result<CurvatureSample<T>> {
    let (curl, local) = connection_curl(model, r, mu, nu, h, ConnectionKind::K)?;
    let kk = comm(&local.k(mu), &local.k(nu));
    let f = curl + &kk;
    Ok(CurvatureSample {
        point: ParameterPoint::new(r.to_vec()),
        axes: (mu, nu),
        f,
        kind: ConnectionKind::K,
        simplified: Some(-kk),
    })
}

/// Residuals of the two pointwise identities linking `K` and `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals<T> {
    /// `‖(∂_μK_ν − ∂_νK_μ) + 2[K_μ, K_ν]‖_F`
    pub curl_identity: T,
    /// `‖F^K + √η⁻¹ F^G √η‖_F`
    pub similarity: T,
    /// `‖F^G‖_F`, for scale.
    pub curvature_norm: T,
}

pub fn check_identities<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    r: &[T],
    mu: usize,
    nu: usize,
    h: T,
) -> Result<IdentityResiduals<T>> {
    let (curl_k, local) = connection_curl(model, r, mu, nu, h, ConnectionKind::K)?;
    let kk = comm(&local.k(mu), &local.k(nu));
    let two = Complex::new(T::lit(2.0), T::zero());
    let curl_identity = frob(&(&curl_k + &kk * two));
    let fk = curl_k + kk;
    let fg = curvature_g(model, r, mu, nu, h)?.f;
    let similarity = frob(&(fk + &local.root.inv_sqrt * &fg * &local.root.sqrt));
    Ok(IdentityResiduals { curl_identity, similarity, curvature_norm: frob(&fg) })
}

/// Curvature difference `Δ_{n,μν}` between the quasi-Hermitian and the
/// Hermitian-picture Berry curvatures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaCurvature<T> {
    /// `−½ Im⟨Ψ_n|η F^K_{μν}|Ψ_n⟩`
    pub value: T,
    /// `½ Im⟨Ψ_n|η [K_μ, K_ν]|Ψ_n⟩`, the same quantity without derivatives of `K`.
    pub commutator_form: T,
    /// `|Re⟨Ψ_n|η F^K|Ψ_n⟩|`; the expectation is purely imaginary.
    pub real_part: T,
}

pub fn delta_curvature<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    r: &[T],
    band: usize,
    mu: usize,
    nu: usize,
    h: T,
) -> Result<DeltaCurvature<T>> {
    check_point(model, r)?;
    let h_mat = model.hamiltonian(r);
    let fk = curvature_k(model, r, mu, nu, h)?;
    let local = LocalMetric::at(model, r)?;
    let sys = biorthogonal_eigensystem(&h_mat, &local.eta)?;
    check_band_gap(&sys, &h_mat, band, r)?;
    let psi = &sys.right[band];
    let e_fk = sandwich(psi, &(&local.eta * &fk.f), psi);
    let e_kk = sandwich(psi, &(&local.eta * comm(&local.k(mu), &local.k(nu))), psi);
    let half = T::lit(0.5);
    Ok(DeltaCurvature { value: -half * e_fk.im, commutator_form: half * e_kk.im, real_part: ComplexField::abs(e_fk.re) })
}

/// Largest `‖F^G_{μν}‖_F` over `points` and all axis pairs.
pub fn max_curvature_norm<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    points: &[Vec<T>],
    h: T,
) -> Result<T> {
    let n = model.param_count();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
    let norms = points
        .par_iter()
        .map(|p| {
            pairs.iter().try_fold(T::zero(), |acc, &(mu, nu)| {
                let f = curvature_g(model, p, mu, nu, h)?;
                Ok(acc.max(frob(&f.f)))
            })
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(norms.into_iter().fold(T::zero(), |a, b| a.max(b)))
}
