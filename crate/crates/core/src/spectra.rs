//! Bi-orthogonal eigensystems, Berry connections, curvatures and phases.

use nalgebra::ComplexField;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{delta_curvature, LocalMetric};
use crate::linalg::{ensure_finite, ensure_square, frob, identity, sandwich, validate_metric, CMatrix, CVector};
use crate::model::{central_difference, check_axis, check_point, point_f64, QuasiHermitianModel};
use crate::path::PathSpec;
use crate::scalar::{arg, modulus, re, wrap_angle, Real};
use crate::transport::{path_derivative, proper_frame, ProperFrame};

/// Right eigenvectors `Ψ_n` of `H`, left eigenvectors `Φ_n = ηΨ_n`, with
/// `⟨Φ_n|Ψ_m⟩ = δ_nm`.
#[derive(Debug, Clone)]
pub struct BiorthogonalSystem<T: Real> {
    /// Sorted ascending by real part.
    pub energies: Vec<Complex<T>>,
    pub right: Vec<CVector<T>>,
    pub left: Vec<CVector<T>>,
    /// `max_{nm} |⟨Φ_n|Ψ_m⟩ − δ_nm|`
    pub biorth_residual: T,
    /// Some `|Im E| > 1e-8`: outside the real-spectrum regime.
    pub complex_spectrum: bool,
}

impl<T: Real> BiorthogonalSystem<T> {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Distance from `E_band` to the nearest other eigenvalue.
    pub fn gap(&self, band: usize) -> T {
        let e = self.energies[band];
        self.energies
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != band)
            .map(|(_, &f)| modulus(e - f))
            .fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
    }
}

fn tiny<T: Real>() -> T {
    T::eps() * T::eps()
}

fn eigenvalue_scale<T: Real>(h: &CMatrix<T>) -> T {
    frob(h).max(tiny::<T>())
}

/// Solves `H Ψ = E Ψ` and normalizes `⟨Ψ|η|Ψ⟩ = 1`, with the phase fixed so
/// the largest-magnitude component is real positive.
pub fn biorthogonal_eigensystem<T: Real>(h: &CMatrix<T>, eta: &CMatrix<T>) -> Result<BiorthogonalSystem<T>> {
    let n = ensure_square(h)?;
    let ne = ensure_square(eta)?;
    if n != ne {
        return Err(Error::DimensionMismatch { left: n, right: ne });
    }
    ensure_finite(h)?;
    let tol = T::lit(1e-10) * frob(eta).max(T::one());
    let v = validate_metric(eta, tol);
    if !v.ok {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: v.min_eigenvalue.to_f64_lossy(), tol: tol.to_f64_lossy() });
    }
    let scale = eigenvalue_scale(h);
    let threshold = T::lit(1e-10) * scale;

    let schur = nalgebra::Schur::try_new(h.clone(), T::eps(), 0).ok_or(Error::NoConvergence)?;
    let (q, t) = schur.unpack();
    let lambda: Vec<Complex<T>> = (0..n).map(|k| t[(k, k)]).collect();

    for i in 0..n {
        for j in (i + 1)..n {
            let gap = modulus(lambda[i] - lambda[j]);
            if gap <= threshold {
                return Err(classify_coalescence(h, (lambda[i] + lambda[j]) * re(T::lit(0.5)), gap, threshold));
            }
        }
    }

    let mut pairs: Vec<(Complex<T>, CVector<T>)> = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = CVector::<T>::zeros(n);
        x[k] = re(T::one());
        for j in (0..k).rev() {
            let mut s = Complex::new(T::zero(), T::zero());
            for l in (j + 1)..=k {
                s += t[(j, l)] * x[l];
            }
            x[j] = -s / (t[(j, j)] - lambda[k]);
        }
        pairs.push((lambda[k], &q * x));
    }
    pairs.sort_by(|a, b| a.0.re.partial_cmp(&b.0.re).unwrap_or(std::cmp::Ordering::Equal));

    let mut energies = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for (e, v) in pairs {
        let norm = sandwich(&v, eta, &v).re;
        let v = v.unscale(norm.sqrt());
        right.push(fix_phase(v));
        energies.push(e);
    }

    let cols = CMatrix::from_columns(&right.iter().map(|v| v.normalize()).collect::<Vec<_>>());
    let sv = cols.singular_values();
    let cond = sv[0] / sv[n - 1].max(tiny::<T>());
    if cond > T::lit(1e12) {
        return Err(Error::NonDiagonalizable { condition: cond.to_f64_lossy() });
    }

    let left: Vec<CVector<T>> = right.iter().map(|v| eta * v).collect();
    let mut biorth_residual = T::zero();
    for (a, phi) in left.iter().enumerate() {
        for (b, psi) in right.iter().enumerate() {
            let d = phi.dotc(psi) - if a == b { re(T::one()) } else { re(T::zero()) };
            biorth_residual = biorth_residual.max(modulus(d));
        }
    }
    let complex_spectrum = energies.iter().any(|e| ComplexField::abs(e.im) > T::lit(1e-8));
    Ok(BiorthogonalSystem { energies, right, left, biorth_residual, complex_spectrum })
}

/// Distinguishes a genuine degeneracy from an exceptional point by the
/// rank deficiency of `H − λI`.
fn classify_coalescence<T: Real>(h: &CMatrix<T>, lambda: Complex<T>, gap: T, threshold: T) -> Error {
    let n = h.nrows();
    let shifted = h - identity::<T>(n) * lambda;
    let sv = shifted.singular_values();
    let scale = eigenvalue_scale(h);
    let cut = (threshold * scale).sqrt();
    let small = sv.iter().filter(|&&s| s <= cut).count();
    if small < 2 {
        let smin = sv.iter().fold(T::max_value().unwrap_or_else(T::one), |a, &b| a.min(b));
        let cond = sv[0] / smin.max(tiny::<T>());
        Error::NonDiagonalizable { condition: cond.to_f64_lossy() }
    } else {
        Error::DegenerateSpectrum { gap: gap.to_f64_lossy(), threshold: threshold.to_f64_lossy() }
    }
}

fn fix_phase<T: Real>(v: CVector<T>) -> CVector<T> {
    let max = v.iter().fold(T::zero(), |a, z| a.max(modulus(*z)));
    let pivot = v.iter().find(|z| modulus(**z) >= max * (T::one() - T::lit(1e-8))).copied();
    match pivot {
        Some(p) if max > T::zero() => v * (p.conj() / re(modulus(p))),
        _ => v,
    }
}

/// `DegenerateBand` when band `band` lies within `1e-8‖H‖` of another one.
pub(crate) fn check_band_gap<T: Real>(sys: &BiorthogonalSystem<T>, h: &CMatrix<T>, band: usize, r: &[T]) -> Result<()> {
    if band >= sys.dim() {
        return Err(Error::BadBand { band, dim: sys.dim() });
    }
    let gap = sys.gap(band);
    if gap < T::lit(1e-8) * frob(h) {
        return Err(Error::DegenerateBand { band, point: point_f64(r), gap: gap.to_f64_lossy() });
    }
    Ok(())
}

fn degeneracy_as_band_error(e: Error, band: usize, r: &[f64]) -> Error {
    match e {
        Error::DegenerateSpectrum { gap, .. } => Error::DegenerateBand { band, point: r.to_vec(), gap },
        other => other,
    }
}

/// Band `band` at `r` in the default gauge, with `η(r)`.
pub fn band_state<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    r: &[T],
    band: usize,
) -> Result<(CVector<T>, CMatrix<T>)> {
    check_point(model, r)?;
    let h = model.hamiltonian(r);
    let eta = model.metric(r);
    let sys = biorthogonal_eigensystem(&h, &eta).map_err(|e| degeneracy_as_band_error(e, band, &point_f64(r)))?;
    check_band_gap(&sys, &h, band, r)?;
    Ok((sys.right[band].clone(), eta))
}

/// Rephases `psi` so that `⟨reference|η_ref|psi⟩` is real positive.
pub fn align_phase<T: Real>(psi: CVector<T>, reference: &CVector<T>, eta_ref: &CMatrix<T>) -> CVector<T> {
    let z = sandwich(reference, eta_ref, &psi);
    let m = modulus(z);
    if m > T::zero() {
        psi * (z.conj() / re(m))
    } else {
        psi
    }
}

/// Band state at `p` in the gauge parallel to `(reference, eta_ref)`.
fn aligned_state<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    p: &[T],
    band: usize,
    reference: &CVector<T>,
    eta_ref: &CMatrix<T>,
) -> Result<CVector<T>> {
    Ok(align_phase(band_state(model, p, band)?.0, reference, eta_ref))
}

/// Quasi-Hermitian Berry connection `A_μ = i(⟨Ψ|η∂_μΨ⟩ + ½⟨Ψ|∂_μη|Ψ⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BerryConnection<T> {
    pub values: Vec<T>,
    /// `max_μ |Im A_μ|`; zero for η-normalized states up to discretization.
    pub imag_residue: T,
}

fn connection_from<T: Real>(psi: &CVector<T>, eta: &CMatrix<T>, dpsi: &CVector<T>, deta: &CMatrix<T>) -> Complex<T> {
    let i = Complex::new(T::zero(), T::one());
    i * (sandwich(psi, eta, dpsi) + sandwich(psi, deta, psi) * re(T::lit(0.5)))
}

fn default_steps<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M) -> Vec<T> {
    model.axes().iter().map(|a| a.default_step()).collect()
}

/// `A_μ` for band `band` at `r` in a gauge that is smooth around `r`.
pub fn qh_connection<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    r: &[T],
    band: usize,
) -> Result<BerryConnection<T>> {
    let (psi, eta) = band_state(model, r, band)?;
    qh_connection_of(model, r, |p| aligned_state(model, p, band, &psi, &eta))
}

/// `A_μ` at `r` for a caller-supplied state family `R ↦ Ψ(R)`, which fixes
/// the gauge.
pub fn qh_connection_of<T: Real, M: QuasiHermitianModel<T> + ?Sized, F>(
    model: &M,
    r: &[T],
    mut states: F,
) -> Result<BerryConnection<T>>
where
    F: FnMut(&[T]) -> Result<CVector<T>>,
{
    let local = LocalMetric::at(model, r)?;
    let psi = states(r)?;
    let steps = default_steps(model);
    let mut values = Vec::with_capacity(model.param_count());
    let mut imag_residue = T::zero();
    for axis in 0..model.param_count() {
        let dpsi = central_difference(model, r, axis, steps[axis], &mut states)?;
        let a = connection_from(&psi, &local.eta, &dpsi, &local.partials[axis]);
        values.push(a.re);
        imag_residue = imag_residue.max(ComplexField::abs(a.im));
    }
    Ok(BerryConnection { values, imag_residue })
}

/// Berry curvatures of one band at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerryCurvatures<T> {
    /// Quasi-Hermitian curvature from the explicit `Im` form.
    pub f: T,
    /// The same curvature as the finite-difference curl of `A`.
    pub f_curl: T,
    /// Curvature of the Hermitian image `ψ = S_pΨ`.
    pub f_tilde: T,
    /// `Δ` from the metric connection.
    pub delta: T,
    /// `|F̃ − F + 2Δ|`
    pub relation_residual: T,
    /// `|F − F_curl|`
    pub curl_residual: T,
}

/// `F_{μν}`, `F̃_{μν}` and `Δ_{μν}` for band `band` at `r`, with state
/// derivatives from central differences of step `h`.
///
/// `F̃` uses `∂_μψ = U(∂_μ − G_μ)(√ηΨ)`, valid for any frame `S = U√η` that
/// is proper at `r`; no single-valued frame on a neighbourhood is needed.
pub fn berry_curvatures<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    r: &[T],
    band: usize,
    mu: usize,
    nu: usize,
    h: T,
) -> Result<BerryCurvatures<T>> {
    check_axis(model, mu)?;
    check_axis(model, nu)?;
    let (psi, eta) = band_state(model, r, band)?;
    let local = LocalMetric::at(model, r)?;
    let state = |p: &[T]| aligned_state(model, p, band, &psi, &eta);
    let d_mu = central_difference(model, r, mu, h, state)?;
    let d_nu = central_difference(model, r, nu, h, state)?;
    let half = re(T::lit(0.5));
    let im_form = sandwich(&d_mu, &eta, &d_nu)
        + sandwich(&psi, &local.partials[mu], &d_nu) * half
        + sandwich(&d_mu, &local.partials[nu], &psi) * half;
    let f = -T::lit(2.0) * im_form.im;

    // curl of A with the gauge anchored at r
    let a_at = |p: &[T], axis: usize| -> Result<Complex<T>> {
        let l = LocalMetric::at(model, p)?;
        let s = state(p)?;
        let ds = central_difference(model, p, axis, h, state)?;
        Ok(connection_from(&s, &l.eta, &ds, &l.partials[axis]))
    };
    let outer = h * T::lit(10.0);
    let curl = central_difference(model, r, mu, outer, |p| a_at(p, nu))?
        - central_difference(model, r, nu, outer, |p| a_at(p, mu))?;
    let f_curl = if mu == nu { T::zero() } else { curl.re };

    let chi = |p: &[T]| -> Result<CVector<T>> {
        let l = LocalMetric::at(model, p)?;
        Ok(&l.root.sqrt * state(p)?)
    };
    let chi0 = &local.root.sqrt * &psi;
    let d_chi_mu = central_difference(model, r, mu, h, chi)? - local.g(mu) * &chi0;
    let d_chi_nu = central_difference(model, r, nu, h, chi)? - local.g(nu) * &chi0;
    let f_tilde = -T::lit(2.0) * d_chi_mu.dotc(&d_chi_nu).im;

    let delta = delta_curvature(model, r, band, mu, nu, h)?.value;
    Ok(BerryCurvatures {
        f,
        f_curl,
        f_tilde,
        delta,
        relation_residual: (f_tilde - f + T::lit(2.0) * delta).abs(),
        curl_residual: (f - f_curl).abs(),
    })
}

/// Frame in which a Berry phase is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// `Ψ_n` with the η inner product.
    Quasi,
    /// `ψ_n = S_pΨ_n` with the plain inner product, `S_p` from the proper frame.
    Hermitian,
}

/// Band states tracked along a path.
#[derive(Debug, Clone)]
pub struct TrackedBand<T: Real> {
    pub states: Vec<CVector<T>>,
    pub etas: Vec<CMatrix<T>>,
    pub energies: Vec<Complex<T>>,
    /// Smallest `|⟨Ψ_k|η̄|Ψ_{k+1}⟩|` encountered.
    pub min_overlap: T,
}

/// Follows band `band` (indexed at the first sample) by maximal η-overlap
/// and aligns phases so that consecutive overlaps are real positive.
pub fn track_band<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    path: &PathSpec<T>,
    band: usize,
) -> Result<TrackedBand<T>> {
    let mut systems = Vec::with_capacity(path.samples.len());
    for (k, p) in path.samples.iter().enumerate() {
        let h = model.hamiltonian(p);
        let eta = model.metric(p);
        let sys = biorthogonal_eigensystem(&h, &eta).map_err(|e| match e {
            Error::DegenerateSpectrum { gap, .. } => Error::BandCrossingOnLoop { sample: k, overlap: gap },
            other => other,
        })?;
        if band >= sys.dim() {
            return Err(Error::BadBand { band, dim: sys.dim() });
        }
        systems.push((sys, eta, h));
    }
    let half = re(T::lit(0.5));
    let mut states = vec![systems[0].0.right[band].clone()];
    let mut energies = vec![systems[0].0.energies[band]];
    let mut min_overlap = T::one();
    for k in 0..systems.len() - 1 {
        let prev = &states[k];
        let (next_sys, next_eta, next_h) = &systems[k + 1];
        let eta_bar = (&systems[k].1 + next_eta) * half;
        let (best, z) = next_sys
            .right
            .iter()
            .enumerate()
            .map(|(m, v)| (m, sandwich(prev, &eta_bar, v)))
            .fold((0, Complex::new(T::zero(), T::zero())), |acc, x| if modulus(x.1) > modulus(acc.1) { x } else { acc });
        let overlap = modulus(z);
        min_overlap = min_overlap.min(overlap);
        if overlap < T::lit(0.5) || next_sys.gap(best) < T::lit(1e-8) * frob(next_h) {
            return Err(Error::BandCrossingOnLoop { sample: k + 1, overlap: overlap.to_f64_lossy() });
        }
        states.push(next_sys.right[best].clone() * (z.conj() / re(overlap)));
        energies.push(next_sys.energies[best]);
    }
    let etas = systems.into_iter().map(|(_, e, _)| e).collect();
    Ok(TrackedBand { states, etas, energies, min_overlap })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerryPhase<T> {
    /// In `(−π, π]`.
    pub phase: T,
    /// `|γ_N − γ_{N/2}|` on the circle.
    pub convergence: T,
    /// `|⟨Ψ_0|η_0|Ψ_N⟩|` (or `|⟨ψ_0|ψ_N⟩|` in the Hermitian frame).
    pub closing_overlap: T,
    pub frame: Frame,
}

/// Link-product Berry phase of explicit samples:
/// `γ = −Σ_k arg⟨v_k|m_k|v_{k+1}⟩ + arg⟨v_0|m_0|v_N⟩`, with `m_k` the
/// midpoint metric (identity in the Hermitian frame). The sum is invariant
/// under `v_k → e^{iχ_k}v_k`.
fn link_phase<T: Real>(states: &[CVector<T>], metrics: Option<&[CMatrix<T>]>) -> (T, T) {
    let n = states.len() - 1;
    let half = re(T::lit(0.5));
    let mut sum = T::zero();
    for k in 0..n {
        let z = match metrics {
            Some(m) => sandwich(&states[k], &((&m[k] + &m[k + 1]) * half), &states[k + 1]),
            None => states[k].dotc(&states[k + 1]),
        };
        sum -= arg(z);
    }
    let close = match metrics {
        Some(m) => sandwich(&states[0], &m[0], &states[n]),
        None => states[0].dotc(&states[n]),
    };
    (wrap_angle(sum + arg(close)), modulus(close))
}

fn hermitian_states<T: Real>(frame: &ProperFrame<T>, states: &[CVector<T>]) -> Vec<CVector<T>> {
    frame.s_samples.iter().zip(states).map(|(s, v)| s * v).collect()
}

/// Berry phase of explicit η-normalized states `states[k]` at the path
/// samples (any gauge).
pub fn berry_phase_of_states<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    path: &PathSpec<T>,
    states: &[CVector<T>],
    frame: Frame,
) -> Result<(T, T)> {
    path.require_closed()?;
    if states.len() != path.samples.len() {
        return Err(Error::DimensionMismatch { left: states.len(), right: path.samples.len() });
    }
    match frame {
        Frame::Quasi => {
            let etas: Vec<CMatrix<T>> = path.samples.iter().map(|p| model.metric(p)).collect();
            Ok(link_phase(states, Some(&etas)))
        }
        Frame::Hermitian => {
            let f = proper_frame(model, path, &identity(model.dim()))?;
            let psi = hermitian_states(&f, states);
            let (phase, overlap) = link_phase(&psi, None);
            if overlap < T::one() - T::lit(1e-6) {
                return Err(Error::OpenHermitianImage { overlap: overlap.to_f64_lossy() });
            }
            Ok((phase, overlap))
        }
    }
}

/// Berry phase of band `band` around a closed loop, in `(−π, π]`.
///
/// In the Hermitian frame the image states are `ψ_k = S_kΨ_k` with the
/// proper frame transported from `U_0 = I`; when the loop's holonomy does
/// not map `ψ_0` onto a multiple of itself the phase is undefined and
/// `OpenHermitianImage` is returned.
pub fn berry_phase<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    path: &PathSpec<T>,
    band: usize,
    frame: Frame,
) -> Result<BerryPhase<T>> {
    path.require_closed()?;
    let fine = track_band(model, path, band)?;
    let (phase, closing_overlap) = berry_phase_of_states(model, path, &fine.states, frame)?;
    let coarse_path = path.coarsened();
    let coarse_states: Vec<CVector<T>> = {
        let n = path.steps();
        let mut idx: Vec<usize> = (0..=n).step_by(2).collect();
        if n % 2 == 1 {
            idx.push(n);
        }
        idx.iter().map(|&k| fine.states[k].clone()).collect()
    };
    let (coarse, _) = berry_phase_of_states(model, &coarse_path, &coarse_states, frame)?;
    Ok(BerryPhase { phase, convergence: wrap_angle(phase - coarse).abs(), closing_overlap, frame })
}

/// Hermitian-image and quasi-Hermitian connections along a path.
#[derive(Debug, Clone)]
pub struct ConnectionAlongPath<T> {
    /// Interior sample indices `2 ..= N−2`.
    pub indices: Vec<usize>,
    /// `Ã_t = i⟨ψ|∂_tψ⟩`
    pub hermitian: Vec<T>,
    /// `A_t = i(⟨Ψ|η∂_tΨ⟩ + ½⟨Ψ|∂_tη|Ψ⟩)`
    pub quasi: Vec<T>,
    pub max_difference: T,
}

/// Connections per unit path parameter for states `states[k]` given at the
/// path samples, with fourth-order differences along the path.
pub fn hermitian_connection<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    frame: &ProperFrame<T>,
    path: &PathSpec<T>,
    states: &[CVector<T>],
) -> Result<ConnectionAlongPath<T>> {
    let n = path.steps();
    if states.len() != n + 1 || frame.s_samples.len() != n + 1 {
        return Err(Error::DimensionMismatch { left: states.len(), right: n + 1 });
    }
    let dt = path.dt();
    let as_cols = |v: &[CVector<T>]| -> Vec<CMatrix<T>> { v.iter().map(|x| CMatrix::from_column_slice(x.len(), 1, x.as_slice())).collect() };
    let psi = as_cols(&hermitian_states(frame, states));
    let big = as_cols(states);
    let etas: Vec<CMatrix<T>> = path.samples.iter().map(|p| model.metric(p)).collect();
    let i = Complex::new(T::zero(), T::one());
    let mut out = ConnectionAlongPath { indices: Vec::new(), hermitian: Vec::new(), quasi: Vec::new(), max_difference: T::zero() };
    for k in 2..n.saturating_sub(1) {
        let dpsi = path_derivative(&psi, k, dt);
        let at = (i * (psi[k].adjoint() * dpsi)[(0, 0)]).re;
        let dbig = path_derivative(&big, k, dt);
        let deta = path_derivative(&etas, k, dt);
        let a = connection_from(&states[k], &etas[k], &CVector::from_column_slice(dbig.as_slice()), &deta).re;
        out.indices.push(k);
        out.hermitian.push(at);
        out.quasi.push(a);
        out.max_difference = out.max_difference.max((at - a).abs());
    }
    Ok(out)
}
