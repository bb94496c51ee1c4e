use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hermitana::config::ModelConfig;
use hermitana::dynamics::ScheduleConfig;
use hermitana::{Frame, PathConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Everything a run needs. Built from flags, then overlaid key by key with
/// the `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub path: Option<PathConfig>,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub band: usize,
    /// Parameter axes `(μ, ν)` for curvature components.
    #[serde(default = "default_axes")]
    pub axes: [usize; 2],
    #[serde(default = "default_frame")]
    pub frame: Frame,
    /// Grid points per axis for curvature sweeps.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Random points for the identity suite.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub seed: u64,
    /// Evolve without the metric correction (non-physical).
    #[serde(default)]
    pub naive: bool,
    /// Initial state as `[re, im]` pairs; defaults to the η-normalized first
    /// basis vector.
    #[serde(default)]
    pub psi0: Option<Vec<[f64; 2]>>,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_h() -> f64 {
    1e-4
}

fn default_axes() -> [usize; 2] {
    [0, 1]
}

fn default_frame() -> Frame {
    Frame::Quasi
}

fn default_grid() -> usize {
    20
}

fn default_points() -> usize {
    50
}

#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub model: Option<String>,
    pub b: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub loop_kind: Option<String>,
    pub big_r: Option<f64>,
    pub small_r: Option<f64>,
    pub steps: Option<usize>,
    pub frame: Option<Frame>,
    pub band: Option<usize>,
    pub axes: Option<[usize; 2]>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub points: Option<usize>,
    pub total_time: Option<f64>,
    pub dt: Option<f64>,
    pub naive: bool,
}

pub const DEFAULT_STEPS: usize = 1024;

impl Flags {
    fn model_config(&self) -> ModelConfig {
        let name = self.model.clone().unwrap_or_else(|| "example3".into());
        let mut m = ModelConfig::new(&name);
        for (k, v) in [("B", self.b), ("gamma", self.gamma), ("alpha", self.alpha)] {
            if let Some(v) = v {
                m = m.with(k, v);
            }
        }
        if name == "random" {
            m = m.with("seed", self.seed.unwrap_or(0) as f64);
        }
        m
    }

    fn path_config(&self, model: &str) -> Result<PathConfig> {
        let steps = self.steps.unwrap_or(DEFAULT_STEPS);
        let mut fixed = BTreeMap::new();
        if let Some(r) = self.big_r {
            fixed.insert("R".to_string(), r);
        }
        if let Some(r) = self.small_r {
            fixed.insert("r".to_string(), r);
        }
        let kind = match &self.loop_kind {
            Some(k) => k.clone(),
            None => match model {
                "example2" => "circle_theta".into(),
                "example3" => "circle_phi".into(),
                _ => "rect".into(),
            },
        };
        Ok(match kind.as_str() {
            "circle_theta" => {
                if model == "example2" && !fixed.contains_key("r") {
                    fixed.insert("r".into(), 0.6);
                }
                PathConfig::CircleTheta { fixed, winding: 1, steps }
            }
            "circle_phi" => {
                if model == "example3" && !fixed.contains_key("R") {
                    fixed.insert("R".into(), 1.5);
                }
                PathConfig::CirclePhi { fixed, winding: 1, steps }
            }
            "rect" => PathConfig::Waypoints {
                points: vec![vec![-0.5, -0.5], vec![0.5, -0.5], vec![0.5, 0.5], vec![-0.5, 0.5]],
                closed: true,
                steps,
            },
            other => bail!("unknown loop {other:?}; expected circle_theta, circle_phi or rect"),
        })
    }

    pub fn to_config(&self) -> Result<RunConfig> {
        let model = self.model_config();
        let path = self.path_config(&model.model)?;
        let schedule = ScheduleConfig {
            path: path.clone(),
            total_time: self.total_time.unwrap_or(10.0),
            dt: self.dt.unwrap_or(1e-3),
        };
        Ok(RunConfig {
            model,
            path: Some(path),
            schedule: Some(schedule),
            tol: self.tol.unwrap_or_else(default_tol),
            h: self.h.unwrap_or_else(default_h),
            band: self.band.unwrap_or(0),
            axes: self.axes.unwrap_or_else(default_axes),
            frame: self.frame.unwrap_or(Frame::Quasi),
            grid: self.grid.unwrap_or_else(default_grid),
            points: self.points.unwrap_or_else(default_points),
            seed: self.seed.unwrap_or(0),
            naive: self.naive,
            psi0: None,
        })
    }
}

/// Overlays the top-level keys of `file` onto `base`.
pub fn merge_file(base: &RunConfig, file: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let overlay: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
    let Value::Object(overlay) = overlay else { bail!("{} must hold a JSON object", file.display()) };
    let Value::Object(mut merged) = serde_json::to_value(base)? else { unreachable!() };
    for (k, v) in overlay {
        merged.insert(k, v);
    }
    serde_json::from_value(Value::Object(merged)).with_context(|| format!("invalid configuration in {}", file.display()))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            bail!("tol must be positive, got {}", self.tol);
        }
        if !(self.h > 0.0) {
            bail!("h must be positive, got {}", self.h);
        }
        if self.grid < 2 {
            bail!("grid needs at least 2 points per axis, got {}", self.grid);
        }
        if self.points == 0 {
            bail!("points must be at least 1");
        }
        if self.axes[0] == self.axes[1] {
            bail!("curvature axes must differ, got {:?}", self.axes);
        }
        let paths = self.path.iter().chain(self.schedule.iter().map(|s| &s.path));
        for p in paths {
            let steps = match p {
                PathConfig::CircleTheta { steps, .. } | PathConfig::CirclePhi { steps, .. } | PathConfig::Waypoints { steps, .. } => *steps,
            };
            if steps < 8 {
                bail!("paths need at least 8 steps, got {steps}");
            }
        }
        if let Some(s) = &self.schedule {
            if !(s.total_time > 0.0 && s.dt > 0.0) {
                bail!("schedule needs T > 0 and dt > 0, got T = {} and dt = {}", s.total_time, s.dt);
            }
        }
        Ok(())
    }
}
