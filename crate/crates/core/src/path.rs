//! Discretized curves in parameter space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_point, QuasiHermitianModel};
use crate::scalar::Real;

/// A curve `t ↦ R(t)` with an analytic tangent.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve<T> {
    /// Coordinate `axis` runs from `base[axis]` through `winding` full turns;
    /// the parameter `t` is the angle travelled.
    Circle { axis: usize, base: Vec<T>, winding: i32 },
    /// Piecewise-linear through the waypoints, `t ∈ [0, 1]` split evenly
    /// between segments.
    Polyline { waypoints: Vec<Vec<T>> },
}

impl<T: Real> Curve<T> {
    /// Parameter range `[t0, t1]`.
    pub fn range(&self) -> (T, T) {
        match self {
            Curve::Circle { winding, .. } => (T::zero(), T::two_pi() * T::lit(f64::from(winding.abs()))),
            Curve::Polyline { .. } => (T::zero(), T::one()),
        }
    }

    pub fn point(&self, t: T) -> Vec<T> {
        match self {
            Curve::Circle { axis, base, winding } => {
                let mut p = base.clone();
                p[*axis] += if *winding < 0 { -t } else { t };
                p
            }
            Curve::Polyline { waypoints } => {
                let (j, u) = self.segment(t);
                let (a, b) = (&waypoints[j], &waypoints[j + 1]);
                a.iter().zip(b).map(|(&x, &y)| x + (y - x) * u).collect()
            }
        }
    }

    /// `dR/dt`.
    pub fn tangent(&self, t: T) -> Vec<T> {
        match self {
            Curve::Circle { axis, base, winding } => {
                let mut d = vec![T::zero(); base.len()];
                d[*axis] = if *winding < 0 { -T::one() } else { T::one() };
                d
            }
            Curve::Polyline { waypoints } => {
                let (j, _) = self.segment(t);
                let m = T::lit((waypoints.len() - 1) as f64);
                waypoints[j].iter().zip(&waypoints[j + 1]).map(|(&x, &y)| (y - x) * m).collect()
            }
        }
    }

    fn segment(&self, t: T) -> (usize, T) {
        let Curve::Polyline { waypoints } = self else { unreachable!() };
        let segs = waypoints.len() - 1;
        let x = t.max(T::zero()).min(T::one()) * T::lit(segs as f64);
        let j = x.floor().to_f64_lossy().max(0.0) as usize;
        let j = j.min(segs - 1);
        (j, x - T::lit(j as f64))
    }
}

/// Serializable description of a path, resolved against a model by
/// [`PathSpec::from_config`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum PathConfig {
    /// Full turns of the first periodic axis named `theta`.
    CircleTheta {
        #[serde(default)]
        fixed: std::collections::BTreeMap<String, f64>,
        #[serde(default = "one")]
        winding: i32,
        #[serde(default = "default_steps")]
        steps: usize,
    },
    /// Full turns of the axis named `phi`.
    CirclePhi {
        #[serde(default)]
        fixed: std::collections::BTreeMap<String, f64>,
        #[serde(default = "one")]
        winding: i32,
        #[serde(default = "default_steps")]
        steps: usize,
    },
    Waypoints {
        points: Vec<Vec<f64>>,
        #[serde(default)]
        closed: bool,
        #[serde(default = "default_steps")]
        steps: usize,
    },
}

fn one() -> i32 {
    1
}

fn default_steps() -> usize {
    1024
}

/// `N + 1` samples `R_0 … R_N` of a curve at uniformly spaced parameters.
#[derive(Debug, Clone)]
pub struct PathSpec<T: Real> {
    pub samples: Vec<Vec<T>>,
    pub params: Vec<T>,
    pub closed: bool,
    pub curve: Option<Curve<T>>,
}

pub const MIN_STEPS: usize = 8;

impl<T: Real> PathSpec<T> {
    /// Samples `curve` at `steps + 1` uniformly spaced parameters.
    pub fn from_curve<M: QuasiHermitianModel<T> + ?Sized>(model: &M, curve: Curve<T>, steps: usize) -> Result<Self> {
        if steps < MIN_STEPS {
            return Err(Error::InvalidPath(format!("need at least {MIN_STEPS} steps, got {steps}")));
        }
        let (t0, t1) = curve.range();
        let params: Vec<T> =
            (0..=steps).map(|k| t0 + (t1 - t0) * T::lit(k as f64) / T::lit(steps as f64)).collect();
        let samples: Vec<Vec<T>> = params.iter().map(|&t| curve.point(t)).collect();
        let closed = match &curve {
            Curve::Circle { .. } => true,
            Curve::Polyline { waypoints } => same_point(model, &waypoints[0], &waypoints[waypoints.len() - 1]),
        };
        let path = Self { samples, params, closed, curve: Some(curve) };
        path.validate(model)?;
        Ok(path)
    }

    /// A closed loop around the periodic `axis`, starting at `base`.
    pub fn circle<M: QuasiHermitianModel<T> + ?Sized>(
        model: &M,
        axis: usize,
        base: Vec<T>,
        winding: i32,
        steps: usize,
    ) -> Result<Self> {
        let ax = model.axes().get(axis).ok_or(Error::BadAxis { axis, count: model.param_count() })?;
        if !ax.periodic {
            return Err(Error::InvalidPath(format!("axis {} is not periodic", ax.label)));
        }
        if winding == 0 {
            return Err(Error::InvalidPath("winding must be nonzero".into()));
        }
        if base.len() != model.param_count() {
            return Err(Error::WrongArity { expected: model.param_count(), got: base.len() });
        }
        Self::from_curve(model, Curve::Circle { axis, base, winding }, steps)
    }

    /// Polyline through `waypoints`; `closed` appends the first waypoint.
    pub fn waypoints<M: QuasiHermitianModel<T> + ?Sized>(
        model: &M,
        mut waypoints: Vec<Vec<T>>,
        closed: bool,
        steps: usize,
    ) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidPath("need at least two waypoints".into()));
        }
        if closed && !same_point(model, &waypoints[0], &waypoints[waypoints.len() - 1]) {
            waypoints.push(waypoints[0].clone());
        }
        Self::from_curve(model, Curve::Polyline { waypoints }, steps)
    }

    /// Explicit samples with parameters `0, 1, …, N`.
    pub fn from_samples<M: QuasiHermitianModel<T> + ?Sized>(model: &M, samples: Vec<Vec<T>>) -> Result<Self> {
        if samples.len() < MIN_STEPS + 1 {
            return Err(Error::InvalidPath(format!("need at least {} samples", MIN_STEPS + 1)));
        }
        let closed = same_point(model, &samples[0], &samples[samples.len() - 1]);
        let params = (0..samples.len()).map(|k| T::lit(k as f64)).collect();
        let path = Self { samples, params, closed, curve: None };
        path.validate(model)?;
        Ok(path)
    }

    pub fn from_config<M: QuasiHermitianModel<T> + ?Sized>(model: &M, cfg: &PathConfig) -> Result<Self> {
        match cfg {
            PathConfig::CircleTheta { fixed, winding, steps } => {
                Self::named_circle(model, &["theta", "θ"], fixed, *winding, *steps)
            }
            PathConfig::CirclePhi { fixed, winding, steps } => {
                Self::named_circle(model, &["phi", "φ"], fixed, *winding, *steps)
            }
            PathConfig::Waypoints { points, closed, steps } => {
                let pts = points.iter().map(|p| p.iter().map(|&x| T::lit(x)).collect()).collect();
                Self::waypoints(model, pts, *closed, *steps)
            }
        }
    }

    fn named_circle<M: QuasiHermitianModel<T> + ?Sized>(
        model: &M,
        names: &[&str],
        fixed: &std::collections::BTreeMap<String, f64>,
        winding: i32,
        steps: usize,
    ) -> Result<Self> {
        let axes = model.axes();
        let axis = axes
            .iter()
            .position(|a| names.contains(&a.label.as_str()))
            .ok_or_else(|| Error::InvalidPath(format!("model {} has no axis named {}", model.name(), names[0])))?;
        let mut base: Vec<T> = axes
            .iter()
            .map(|a| if a.periodic { a.lo } else { (a.lo + a.hi) * T::lit(0.5) })
            .collect();
        for (name, &v) in fixed {
            let k = axes
                .iter()
                .position(|a| &a.label == name)
                .ok_or_else(|| Error::InvalidPath(format!("unknown coordinate {name}")))?;
            base[k] = T::lit(v);
        }
        Self::circle(model, axis, base, winding, steps)
    }

    pub fn steps(&self) -> usize {
        self.samples.len() - 1
    }

    /// Uniform parameter spacing.
    pub fn dt(&self) -> T {
        (self.params[self.steps()] - self.params[0]) / T::lit(self.steps() as f64)
    }

    /// Every other sample (plus the endpoint when `N` is odd).
    pub fn coarsened(&self) -> Self {
        let n = self.steps();
        let mut idx: Vec<usize> = (0..=n).step_by(2).collect();
        if n % 2 == 1 {
            idx.push(n);
        }
        Self {
            samples: idx.iter().map(|&k| self.samples[k].clone()).collect(),
            params: idx.iter().map(|&k| self.params[k]).collect(),
            closed: self.closed,
            curve: self.curve.clone(),
        }
    }

    /// The same samples traversed backwards.
    pub fn reversed(&self) -> Self {
        let t1 = self.params[self.steps()];
        Self {
            samples: self.samples.iter().rev().cloned().collect(),
            params: self.params.iter().rev().map(|&t| t1 - t).collect(),
            closed: self.closed,
            curve: None,
        }
    }

    /// Samples `from..=to` as a path of their own.
    pub fn slice(&self, from: usize, to: usize) -> Self {
        Self {
            samples: self.samples[from..=to].to_vec(),
            params: self.params[from..=to].to_vec(),
            closed: false,
            curve: None,
        }
    }

    fn validate<M: QuasiHermitianModel<T> + ?Sized>(&self, model: &M) -> Result<()> {
        for p in &self.samples {
            check_point(model, p)?;
        }
        Ok(())
    }

    pub(crate) fn require_closed(&self) -> Result<()> {
        if self.closed {
            Ok(())
        } else {
            Err(Error::PathNotClosed)
        }
    }
}

/// Equality of points modulo the periods of periodic axes.
pub fn same_point<T: Real, M: QuasiHermitianModel<T> + ?Sized>(model: &M, a: &[T], b: &[T]) -> bool {
    let tol = T::lit(1e-9);
    a.len() == b.len()
        && a.iter().zip(b).zip(model.axes()).all(|((&x, &y), ax)| {
            let d = x - y;
            if ax.periodic {
                let p = ax.span();
                (d - (d / p).round() * p).abs() <= tol
            } else {
                d.abs() <= tol
            }
        })
}
