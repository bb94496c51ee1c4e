use anyhow::{anyhow, bail, Context, Result};
use hermitana::dynamics::{evolve_compare, evolve_modified, EvolutionMode, Schedule};
use hermitana::geometry::{check_identities, connection_g, curvature_g, curvature_k, delta_curvature};
use hermitana::linalg::{frob, identity, sandwich};
use hermitana::reproduce::run_all;
use hermitana::spectra::{berry_phase, track_band};
use hermitana::transport::{classify_obstruction, mapped_hamiltonian, proper_frame, wilson_loop};
use hermitana::{Complex, GridSpec, Path, QuasiHermitianModel, Vector, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::report::{complex, matrix, matrix_columns, matrix_values, vector, Report, Series};

type Model = Box<dyn QuasiHermitianModel<f64>>;

/// What a command produced; `finding` selects exit code 2.
pub struct Outcome {
    pub report: Report,
    pub series: Option<Series>,
    pub finding: bool,
}

fn model(cfg: &RunConfig) -> Result<Model> {
    cfg.model.build().map_err(|e| anyhow!(e))
}

fn path(cfg: &RunConfig, m: &Model) -> Result<Path> {
    let pc = cfg.path.as_ref().ok_or_else(|| anyhow!("this command needs a path"))?;
    Path::from_config(m.as_ref(), pc).with_context(|| format!("building the path on {}", m.name()))
}

fn coords_header(m: &Model) -> Vec<String> {
    m.axes().iter().map(|a| a.label.clone()).collect()
}

/// `grid` points per axis, inset by 10% of the span on bounded axes.
fn analysis_grid(m: &Model, count: usize) -> GridSpec {
    let ranges = m
        .axes()
        .iter()
        .map(|a| {
            if a.periodic {
                (a.lo, a.hi - (a.hi - a.lo) / count as f64, count)
            } else {
                let pad = 0.1 * (a.hi - a.lo);
                (a.lo + pad, a.hi - pad, count)
            }
        })
        .collect();
    GridSpec { ranges }
}

fn random_points(m: &Model, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            m.axes()
                .iter()
                .map(|a| {
                    let pad = if a.periodic { 0.0 } else { 0.05 * (a.hi - a.lo) };
                    rng.gen_range(a.lo + pad..a.hi - pad)
                })
                .collect()
        })
        .collect()
}

pub fn analyze(cfg: &RunConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let lp = path(cfg, &m)?;
    let grid = analysis_grid(&m, cfg.grid);
    let rep = classify_obstruction(m.as_ref(), &grid, std::slice::from_ref(&lp), cfg.tol, cfg.h)
        .with_context(|| format!("classifying {}", m.name()))?;
    let mut report = Report::new("analyze", cfg);
    report.result("grid", &grid);
    report.result("max_curvature_norm", rep.max_curvature_norm);
    report.result("notes", &rep.notes);
    let loops: Vec<_> = rep
        .loop_results
        .iter()
        .map(|(k, w)| {
            json!({
                "index": k,
                "w": matrix(&w.w),
                "distance_to_identity": w.distance_to_identity,
                "distance_to_center": w.distance_to_center,
                "nontrivial": w.nontrivial,
                "convergence": w.convergence,
            })
        })
        .collect();
    report.result("loops", loops);
    report.residual("max_curvature_norm", rep.max_curvature_norm, cfg.tol);
    for (k, w) in &rep.loop_results {
        report.residual(&format!("loop{k}_unitarity"), w.unitarity_residual, cfg.tol);
        report.residual(&format!("loop{k}_transport_convergence"), w.convergence, cfg.tol);
    }
    if rep.verdict == Verdict::None {
        let frame = proper_frame(m.as_ref(), &lp, &identity(m.dim()))?;
        let mh = mapped_hamiltonian(m.as_ref(), &frame, &lp)?;
        report.result(
            "frame",
            json!({
                "h_tilde_start": matrix(&mh.h_tilde[0]),
                "periodicity_defect": mh.periodicity_defect,
                "max_condition": mh.max_condition,
            }),
        );
        report.residual("proper_residual", frame.proper_residual, cfg.tol);
        report.residual("hermiticity_residual", mh.hermiticity_residual, cfg.tol);
    }
    report.verdict("obstruction", rep.verdict.as_str());
    Ok(Outcome { report, series: None, finding: rep.verdict != Verdict::None })
}

pub fn wilson(cfg: &RunConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let lp = path(cfg, &m)?;
    let w = wilson_loop(m.as_ref(), &lp, cfg.tol).with_context(|| format!("Wilson loop on {}", m.name()))?;
    let tr = hermitana::transport::transport_unitary(m.as_ref(), &lp, &identity(m.dim()))?;
    let id = identity::<f64>(m.dim());
    let mut series = Series::new(
        ["step", "t"].into_iter().map(String::from).chain(coords_header(&m)).chain(["distance_to_identity".to_string()]),
    );
    for (k, (p, u)) in lp.samples.iter().zip(&tr.u_samples).enumerate() {
        let mut row = vec![k as f64, lp.params[k]];
        row.extend(p);
        row.push(frob(&(u - &id)));
        series.push(row);
    }
    let mut report = Report::new("wilson", cfg);
    report.result("w", matrix(&w.w));
    report.result("trace", complex(w.w.trace()));
    report.result("distance_to_identity", w.distance_to_identity);
    report.result("distance_to_center", w.distance_to_center);
    report.result("steps", lp.steps());
    report.residual("unitarity", w.unitarity_residual, cfg.tol);
    report.residual("transport_convergence", w.convergence, cfg.tol);
    report.verdict("nontrivial", w.nontrivial);
    report.verdict("central", w.distance_to_center <= cfg.tol);
    Ok(Outcome { report, series: Some(series), finding: w.nontrivial })
}

pub fn berry(cfg: &RunConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let lp = path(cfg, &m)?;
    let b = berry_phase(m.as_ref(), &lp, cfg.band, cfg.frame)
        .with_context(|| format!("Berry phase of band {} on {}", cfg.band, m.name()))?;
    let tracked = track_band(m.as_ref(), &lp, cfg.band)?;
    let mut series = Series::new(
        ["step", "t"]
            .into_iter()
            .map(String::from)
            .chain(coords_header(&m))
            .chain(["energy_re", "energy_im"].map(String::from)),
    );
    for (k, p) in lp.samples.iter().enumerate() {
        let mut row = vec![k as f64, lp.params[k]];
        row.extend(p);
        row.extend([tracked.energies[k].re, tracked.energies[k].im]);
        series.push(row);
    }
    let mut report = Report::new("berry", cfg);
    report.result("phase", b.phase);
    report.result("frame", b.frame);
    report.result("band", cfg.band);
    report.result("closing_overlap", b.closing_overlap);
    report.result("min_tracking_overlap", tracked.min_overlap);
    report.residual("step_doubling_change", b.convergence, cfg.tol);
    Ok(Outcome { report, series: Some(series), finding: false })
}

struct GridRow {
    point: Vec<f64>,
    g_norm: f64,
    fg: f64,
    fk: f64,
    delta: Option<f64>,
}

pub fn curvature(cfg: &RunConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let [mu, nu] = cfg.axes;
    let grid = analysis_grid(&m, cfg.grid);
    let rows = grid
        .points::<f64>()
        .into_par_iter()
        .map(|p| -> hermitana::Result<GridRow> {
            let g_norm = connection_g(m.as_ref(), &p)?.per_axis.iter().map(frob).fold(0.0, f64::max);
            let fg = frob(&curvature_g(m.as_ref(), &p, mu, nu, cfg.h)?.f);
            let fk = frob(&curvature_k(m.as_ref(), &p, mu, nu, cfg.h)?.f);
            // Δ needs a gapped band; points where it is degenerate are left empty.
            let delta = delta_curvature(m.as_ref(), &p, cfg.band, mu, nu, cfg.h).ok().map(|d| d.value);
            Ok(GridRow { point: p, g_norm, fg, fk, delta })
        })
        .collect::<hermitana::Result<Vec<_>>>()
        .with_context(|| format!("curvature sweep on {}", m.name()))?;
    let mut series = Series::new(
        ["index"]
            .into_iter()
            .map(String::from)
            .chain(coords_header(&m))
            .chain(["g_norm", "fg_norm", "fk_norm", "delta"].map(String::from)),
    );
    let (mut g_max, mut fg_max, mut fk_max, mut d_max) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (k, r) in rows.iter().enumerate() {
        g_max = g_max.max(r.g_norm);
        fg_max = fg_max.max(r.fg);
        fk_max = fk_max.max(r.fk);
        d_max = d_max.max(r.delta.map_or(0.0, f64::abs));
        let mut row = vec![k as f64];
        row.extend(&r.point);
        row.extend([r.g_norm, r.fg, r.fk, r.delta.unwrap_or(f64::NAN)]);
        series.push(row);
    }
    let mut report = Report::new("curvature", cfg);
    report.result("grid", &grid);
    report.result("axes", cfg.axes);
    report.result("max_g_norm", g_max);
    report.result("max_fg_norm", fg_max);
    report.result("max_fk_norm", fk_max);
    report.result("max_abs_delta", d_max);
    report.result("degenerate_points", rows.iter().filter(|r| r.delta.is_none()).count());
    report.residual("max_fg_norm", fg_max, cfg.tol);
    report.verdict("flat", fg_max <= cfg.tol);
    Ok(Outcome { report, series: Some(series), finding: fg_max > cfg.tol })
}

pub fn frame(cfg: &RunConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let lp = path(cfg, &m)?;
    let f = proper_frame(m.as_ref(), &lp, &identity(m.dim())).with_context(|| format!("proper frame on {}", m.name()))?;
    let mh = mapped_hamiltonian(m.as_ref(), &f, &lp)?;
    let mut series = Series::new(
        ["step", "t"].into_iter().map(String::from).chain(coords_header(&m)).chain(matrix_columns("h", m.dim())),
    );
    for (k, p) in lp.samples.iter().enumerate() {
        let mut row = vec![k as f64, lp.params[k]];
        row.extend(p);
        row.extend(matrix_values(&mh.h_tilde[k]));
        series.push(row);
    }
    let mut report = Report::new("frame", cfg);
    report.result("h_tilde_start", matrix(&mh.h_tilde[0]));
    report.result("h_tilde_end", matrix(&mh.h_tilde[mh.h_tilde.len() - 1]));
    report.result("periodicity_defect", mh.periodicity_defect);
    report.result("monodromy", mh.monodromy.as_ref().map(matrix));
    report.result("max_condition", mh.max_condition);
    report.residual("proper_residual", f.proper_residual, cfg.tol);
    report.residual("factorization_residual", f.factorization_residual, cfg.tol);
    report.residual("hermiticity_residual", mh.hermiticity_residual, cfg.tol);
    report.residual("transport_convergence", f.transport.convergence, cfg.tol);
    if let Some(r) = mh.monodromy_residual {
        report.residual("monodromy_residual", r, cfg.tol);
    }
    let defect = mh.periodicity_defect.is_some_and(|d| d > cfg.tol);
    if mh.periodicity_defect.is_some() {
        report.verdict("single_valued", !defect);
    }
    Ok(Outcome { report, series: Some(series), finding: defect })
}

pub fn evolve(cfg: &RunConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let sc = cfg.schedule.as_ref().ok_or_else(|| anyhow!("evolve needs a schedule"))?;
    let sched = Schedule::from_config(m.as_ref(), sc).with_context(|| format!("building the schedule on {}", m.name()))?;
    let start = sched.point(0.0);
    let eta0 = m.metric(&start);
    let psi0 = match &cfg.psi0 {
        Some(v) => {
            if v.len() != m.dim() {
                bail!("psi0 has {} entries, model {} has dimension {}", v.len(), m.name(), m.dim());
            }
            Vector::from_iterator(v.len(), v.iter().map(|z| Complex::new(z[0], z[1])))
        }
        None => {
            let mut e = Vector::zeros(m.dim());
            e[0] = Complex::new(1.0, 0.0);
            e
        }
    };
    let norm = sandwich(&psi0, &eta0, &psi0).re.sqrt();
    if !(norm > 0.0) {
        bail!("psi0 has zero eta-norm at {start:?}");
    }
    let psi0 = psi0 / Complex::new(norm, 0.0);
    let mode = if cfg.naive { EvolutionMode::Naive } else { EvolutionMode::Modified };
    let t = evolve_modified(m.as_ref(), &sched, &psi0, mode).with_context(|| format!("evolving on {}", m.name()))?;

    let mut psi_cols = Vec::new();
    for i in 0..m.dim() {
        psi_cols.push(format!("psi{i}_re"));
        psi_cols.push(format!("psi{i}_im"));
    }
    let mut series = Series::new(["step", "t", "eta_norm"].into_iter().map(String::from).chain(psi_cols));
    for (k, (time, psi)) in t.times.iter().zip(&t.states).enumerate() {
        let mut row = vec![k as f64, *time, t.eta_norms[k]];
        row.extend(psi.iter().flat_map(|z| [z.re, z.im]));
        series.push(row);
    }
    let mut report = Report::new("evolve", cfg);
    report.result("mode", if cfg.naive { "naive" } else { "modified" });
    report.result("steps", sched.steps());
    report.result("psi_final", vector(&t.states[t.states.len() - 1]));
    report.result("naive_drift_integral", t.naive_drift_integral);
    report.result("energy_imag_max", t.energy_imag_max);
    report.residual("eta_norm_drift", t.max_drift, cfg.tol);
    if !cfg.naive {
        let c = evolve_compare(m.as_ref(), &sched, &psi0)?;
        report.residual("frame_equivalence", c.max_deviation, cfg.tol);
    }
    report.verdict("norm_conserved", t.max_drift <= cfg.tol);
    Ok(Outcome { report, series: Some(series), finding: false })
}

pub fn identities(cfg: &RunConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let [mu, nu] = cfg.axes;
    let points = random_points(&m, cfg.points, cfg.seed);
    let rows = points
        .par_iter()
        .map(|p| -> hermitana::Result<(f64, f64, f64)> {
            let r = check_identities(m.as_ref(), p, mu, nu, cfg.h)?;
            let re = (0..m.dim())
                .map(|b| delta_curvature(m.as_ref(), p, b, mu, nu, cfg.h).map(|d| d.real_part))
                .collect::<hermitana::Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((r.curl_identity, r.similarity, re))
        })
        .collect::<hermitana::Result<Vec<_>>>()
        .with_context(|| format!("identity suite on {}", m.name()))?;
    let mut series = Series::new(
        ["index"]
            .into_iter()
            .map(String::from)
            .chain(coords_header(&m))
            .chain(["curl_identity", "similarity", "expectation_real_part"].map(String::from)),
    );
    let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
    for (k, (p, r)) in points.iter().zip(&rows).enumerate() {
        a = a.max(r.0);
        b = b.max(r.1);
        c = c.max(r.2);
        let mut row = vec![k as f64];
        row.extend(p);
        row.extend([r.0, r.1, r.2]);
        series.push(row);
    }
    let mut report = Report::new("identities", cfg);
    report.result("points", points.len());
    report.residual("curl_identity", a, cfg.tol);
    report.residual("similarity", b, cfg.tol);
    report.residual("expectation_real_part", c, cfg.tol);
    let ok = a <= cfg.tol && b <= cfg.tol && c <= cfg.tol;
    report.verdict("identities_hold", ok);
    Ok(Outcome { report, series: Some(series), finding: !ok })
}

pub fn reproduce(cfg: &RunConfig) -> Result<Outcome> {
    let outcomes = run_all(cfg.seed);
    for o in &outcomes {
        eprintln!("{}", o.summary_line());
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    eprintln!("{passed}/{} checks passed", outcomes.len());
    let mut report = Report::new("reproduce-paper", cfg);
    report.result("checks", &outcomes);
    for o in &outcomes {
        for (k, ms) in o.measurements.iter().enumerate() {
            if let Some(b) = ms.bound.strip_prefix("<= ").and_then(|b| b.parse::<f64>().ok()) {
                report.residual(&format!("check{:02}_{k}", o.id), ms.value, b);
            }
        }
    }
    let all = passed == outcomes.len();
    report.verdict("all_passed", all);
    Ok(Outcome { report, series: None, finding: !all })
}
