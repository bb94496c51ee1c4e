//! Time evolution under `i∂_tΨ = (H − (i/2)η⁻¹η̇)Ψ` and comparison with the
//! Hermitian image `i∂_tψ = H̃ψ`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LocalMetric;
use crate::linalg::{identity, sandwich, vec_norm, CMatrix, CVector};
use crate::model::{check_point, QuasiHermitianModel};
use crate::path::{Curve, PathConfig, PathSpec};
use crate::scalar::{re, Real};

/// Modified-mode runs whose η-norm drifts further than this are rejected.
pub const DRIFT_LIMIT: f64 = 1e-3;

/// `t ↦ R(t)` for `t ∈ [0, T]`, traversing `curve` at constant speed.
#[derive(Debug, Clone)]
pub struct Schedule<T: Real> {
    pub curve: Curve<T>,
    pub total_time: T,
    pub dt: T,
}

/// JSON form: `{"path": {...}, "T": 10.0, "dt": 0.001}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub path: PathConfig,
    #[serde(rename = "T")]
    pub total_time: f64,
    pub dt: f64,
}

impl<T: Real> Schedule<T> {
    pub fn new(curve: Curve<T>, total_time: T, dt: T) -> Result<Self> {
        if !(total_time > T::zero()) || !(dt > T::zero()) || dt > total_time {
            return Err(Error::ConfigInvalid(format!(
                "need 0 < dt <= T, got T = {}, dt = {}",
                total_time.to_f64_lossy(),
                dt.to_f64_lossy()
            )));
        }
        Ok(Self { curve, total_time, dt })
    }

    pub fn from_config<M: QuasiHermitianModel<T> + ?Sized>(model: &M, cfg: &ScheduleConfig) -> Result<Self> {
        let path = PathSpec::from_config(model, &cfg.path)?;
        let curve = path.curve.ok_or_else(|| Error::ConfigInvalid("schedule path needs a generator".into()))?;
        Self::new(curve, T::lit(cfg.total_time), T::lit(cfg.dt))
    }

    /// Number of steps; `dt` is rounded so that they tile `[0, T]`.
    pub fn steps(&self) -> usize {
        (self.total_time / self.dt).round().to_f64_lossy().max(1.0) as usize
    }

    fn step(&self) -> T {
        self.total_time / T::lit(self.steps() as f64)
    }

    pub fn point(&self, t: T) -> Vec<T> {
        let (a, b) = self.curve.range();
        self.curve.point(a + (b - a) * t / self.total_time)
    }

    /// `dR/dt`.
    pub fn velocity(&self, t: T) -> Vec<T> {
        let (a, b) = self.curve.range();
        let rate = (b - a) / self.total_time;
        self.curve.tangent(a + (b - a) * t / self.total_time).into_iter().map(|x| x * rate).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionMode {
    /// With the `−½η⁻¹η̇` correction.
    Modified,
    /// Without it. Not norm-preserving; only for demonstrating the drift.
    Naive,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<CVector<T>>,
    /// `⟨Ψ(t_k)|η(t_k)|Ψ(t_k)⟩`
    pub eta_norms: Vec<T>,
    /// `max_k |eta_norms[k] − eta_norms[0]|`
    pub max_drift: T,
    /// `∫⟨Ψ|η̇|Ψ⟩dt` (trapezoid), the drift rate of the uncorrected equation.
    pub naive_drift_integral: T,
    /// `max_k |Im⟨Ψ|ηH|Ψ⟩|`
    pub energy_imag_max: T,
    pub mode: EvolutionMode,
}

struct Instant<T: Real> {
    h: CMatrix<T>,
    local: LocalMetric<T>,
    eta_dot: CMatrix<T>,
}

fn instant<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, s: &Schedule<T>, t: T) -> Result<Instant<T>> {
    let r = s.point(t);
    check_point(model, &r)?;
    let local = LocalMetric::at(model, &r)?;
    let v = s.velocity(t);
    let n = model.dim();
    let mut eta_dot = CMatrix::zeros(n, n);
    for (axis, &x) in v.iter().enumerate() {
        if x != T::zero() {
            eta_dot += &local.partials[axis] * re(x);
        }
    }
    Ok(Instant { h: model.hamiltonian(&r), local, eta_dot })
}

fn minus_i<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), -T::one())
}

fn schrodinger_rhs<T: Real>(at: &Instant<T>, psi: &CVector<T>, mode: EvolutionMode) -> CVector<T> {
    let mut d = &at.h * psi * minus_i::<T>();
    if mode == EvolutionMode::Modified {
        d -= at.local.inverse() * (&at.eta_dot * psi) * re(T::lit(0.5));
    }
    d
}

fn check_initial<T: Real>(model_dim: usize, psi0: &CVector<T>) -> Result<()> {
    if psi0.len() != model_dim {
        return Err(Error::DimensionMismatch { left: psi0.len(), right: model_dim });
    }
    if !(vec_norm(psi0) > T::zero()) {
        return Err(Error::ConfigInvalid("initial state must be nonzero and finite".into()));
    }
    Ok(())
}

/// Classical fourth-order Runge-Kutta with fixed step.
pub fn evolve_modified<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    schedule: &Schedule<T>,
    psi0: &CVector<T>,
    mode: EvolutionMode,
) -> Result<Trajectory<T>> {
    check_initial(model.dim(), psi0)?;
    let n = schedule.steps();
    let dt = schedule.step();
    let half = T::lit(0.5);
    let two = re(T::lit(2.0));
    let sixth = re(dt / T::lit(6.0));
    let mut psi = psi0.clone();
    let mut at = instant(model, schedule, T::zero())?;
    let mut tr = Trajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        eta_norms: Vec::with_capacity(n + 1),
        max_drift: T::zero(),
        naive_drift_integral: T::zero(),
        energy_imag_max: T::zero(),
        mode,
    };
    let mut prev_rate = sandwich(&psi, &at.eta_dot, &psi).re;
    let record = |tr: &mut Trajectory<T>, t: T, psi: &CVector<T>, at: &Instant<T>| {
        let norm = sandwich(psi, &at.local.eta, psi).re;
        let e = sandwich(psi, &(&at.local.eta * &at.h), psi);
        tr.energy_imag_max = tr.energy_imag_max.max(e.im.abs());
        if let Some(&n0) = tr.eta_norms.first() {
            tr.max_drift = tr.max_drift.max((norm - n0).abs());
        }
        tr.times.push(t);
        tr.states.push(psi.clone());
        tr.eta_norms.push(norm);
    };
    record(&mut tr, T::zero(), &psi, &at);
    for k in 0..n {
        let t = dt * T::lit(k as f64);
        let mid = instant(model, schedule, t + dt * half)?;
        let end = instant(model, schedule, t + dt)?;
        let k1 = schrodinger_rhs(&at, &psi, mode);
        let k2 = schrodinger_rhs(&mid, &(&psi + &k1 * re(dt * half)), mode);
        let k3 = schrodinger_rhs(&mid, &(&psi + &k2 * re(dt * half)), mode);
        let k4 = schrodinger_rhs(&end, &(&psi + &k3 * re(dt)), mode);
        psi += (k1 + (k2 + k3) * two + k4) * sixth;
        at = end;
        let rate = sandwich(&psi, &at.eta_dot, &psi).re;
        tr.naive_drift_integral += (prev_rate + rate) * dt * half;
        prev_rate = rate;
        record(&mut tr, t + dt, &psi, &at);
    }
    if mode == EvolutionMode::Modified && tr.max_drift > T::lit(DRIFT_LIMIT) {
        return Err(Error::StepUnstable { drift: tr.max_drift.to_f64_lossy(), limit: DRIFT_LIMIT });
    }
    Ok(tr)
}

#[derive(Debug, Clone)]
pub struct FrameComparison<T: Real> {
    /// `max_t ‖S(t)Ψ(t) − ψ(t)‖`
    pub max_deviation: T,
    pub trajectory: Trajectory<T>,
    /// `ψ(t_k)`
    pub image_states: Vec<CVector<T>>,
}

/// Integrates `Ψ` (modified equation), the frame factor `U`
/// (`dU/dt = −U G_μ Ṙ^μ`, `U(0) = I`) and the image `ψ` (`i dψ/dt = H̃ψ`,
/// `H̃ = SHS⁻¹`, `S = U√η`, `ψ(0) = S(0)Ψ(0)`) together with the same RK4
/// steps, then compares `SΨ` with `ψ`.
pub fn evolve_compare<T: Real, M: QuasiHermitianModel<T> + ?Sized>(
    model: &M,
    schedule: &Schedule<T>,
    psi0: &CVector<T>,
) -> Result<FrameComparison<T>> {
    let trajectory = evolve_modified(model, schedule, psi0, EvolutionMode::Modified)?;
    let n = schedule.steps();
    let dt = schedule.step();
    let half = T::lit(0.5);
    let two = re(T::lit(2.0));
    let sixth = re(dt / T::lit(6.0));

    let generator = |at: &Instant<T>, t: T| -> CMatrix<T> {
        let v = schedule.velocity(t);
        let d = model.dim();
        let mut g = CMatrix::zeros(d, d);
        for (axis, &x) in v.iter().enumerate() {
            if x != T::zero() {
                g += at.local.g(axis) * re(x);
            }
        }
        g
    };
    // (dΨ, dU, dψ)
    let rhs = |at: &Instant<T>, t: T, psi: &CVector<T>, u: &CMatrix<T>, img: &CVector<T>| {
        let dpsi = schrodinger_rhs(at, psi, EvolutionMode::Modified);
        let du = -(u * generator(at, t));
        let s = u * &at.local.root.sqrt;
        let s_inv = &at.local.root.inv_sqrt * u.adjoint();
        let dimg = &s * (&at.h * (s_inv * img)) * minus_i::<T>();
        (dpsi, du, dimg)
    };

    let mut at = instant(model, schedule, T::zero())?;
    let mut psi = psi0.clone();
    let mut u = identity::<T>(model.dim());
    let mut img = &at.local.root.sqrt * psi0;
    let mut image_states = Vec::with_capacity(n + 1);
    image_states.push(img.clone());
    let mut max_deviation = T::zero();
    for k in 0..n {
        let t = dt * T::lit(k as f64);
        let mid = instant(model, schedule, t + dt * half)?;
        let end = instant(model, schedule, t + dt)?;
        let hd = re(dt * half);
        let (a1, b1, c1) = rhs(&at, t, &psi, &u, &img);
        let (a2, b2, c2) = rhs(&mid, t + dt * half, &(&psi + &a1 * hd), &(&u + &b1 * hd), &(&img + &c1 * hd));
        let (a3, b3, c3) = rhs(&mid, t + dt * half, &(&psi + &a2 * hd), &(&u + &b2 * hd), &(&img + &c2 * hd));
        let fd = re(dt);
        let (a4, b4, c4) = rhs(&end, t + dt, &(&psi + &a3 * fd), &(&u + &b3 * fd), &(&img + &c3 * fd));
        psi += (a1 + (a2 + a3) * two + a4) * sixth;
        u += (b1 + (b2 + b3) * two + b4) * sixth;
        img += (c1 + (c2 + c3) * two + c4) * sixth;
        at = end;
        let mapped = &u * &at.local.root.sqrt * &psi;
        max_deviation = max_deviation.max(vec_norm(&(mapped - &img)));
        image_states.push(img.clone());
    }
    Ok(FrameComparison { max_deviation, trajectory, image_states })
}
