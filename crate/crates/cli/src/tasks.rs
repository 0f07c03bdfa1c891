//! One function per task; each writes its artifacts into the output directory.

use std::path::{Path, PathBuf};

use anharmonic::discretize::{convergence_check, BasisSpec};
use anharmonic::gauge::{f_prime_at_zero, pfd_eval, pfd_half_eval, zero, Summation, Terms};
use anharmonic::model::{constants, predicted_eigenvalue, predicted_projection_norm, OscillatorSpec};
use anharmonic::pseudomode::{build, certify_against_svd, fit_scan, ScanPoint};
use anharmonic::spectra::{
    compute_spectrum, fit_growth, fit_growth_order, projection_norms, pseudospectra_grid, GrowthFit, ResolventOperator, Spectrum,
};
use anharmonic::C64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{num, write_atomic, write_json, Csv};
use crate::{svg, verify, CliError};

fn compute_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

/// Spectrum with the first `count` modes required to be trusted; otherwise the
/// strict doubling report is written next to the partial output.
fn spectrum_or_convergence(spec: &OscillatorSpec, basis: &BasisSpec, count: usize, dir: &Path) -> Result<(Spectrum, Option<CliError>), CliError> {
    let s = compute_spectrum(spec, basis, count).map_err(compute_err)?;
    let trusted = s.modes.iter().take(count).take_while(|m| m.trusted).count();
    if trusted >= count {
        return Ok((s, None));
    }
    let m = count.min(basis.size / 4).max(1);
    let report = match convergence_check(spec, basis, m) {
        Ok(r) => serde_json::to_value(r).expect("serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let path = write_json(dir, "convergence.json", &json!({ "requested": count, "trusted_prefix": trusted, "doubling_check": report }))?;
    let e = CliError::Convergence(format!(
        "only the first {trusted} of {count} requested modes are trusted at N = {}; see {}",
        basis.size,
        path.display()
    ));
    Ok((s, Some(e)))
}

fn eigs_csv(s: &Spectrum, count: usize) -> String {
    let mut csv = Csv::new("anharmonic-eigs", 1, &["n", "re_lambda", "im_lambda", "trusted"]);
    for m in s.modes.iter().take(count) {
        csv.row(&[m.n.to_string(), num(m.lambda.re), num(m.lambda.im), m.trusted.to_string()]);
    }
    csv.into_string()
}

pub fn eigs(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let spec = cfg.operator()?;
    let (s, failure) = spectrum_or_convergence(spec, &cfg.basis(), cfg.eigs.count, dir)?;
    let path = write_atomic(dir, "eigs.csv", eigs_csv(&s, cfg.eigs.count).as_bytes())?;
    match failure {
        Some(e) => Err(e),
        None => Ok(vec![path]),
    }
}

#[derive(Debug, Serialize)]
struct ProjFit {
    window: [usize; 2],
    sigma: Option<f64>,
    fit: Option<GrowthFit>,
    /// Growth order fitted from `log log ‖P_n‖` when no σ is known.
    order_fit: Option<GrowthFit>,
    model: serde_json::Value,
    error: Option<String>,
}

fn proj_csv(s: &Spectrum) -> String {
    let mut csv = Csv::new(
        "anharmonic-proj",
        1,
        &["n", "re_lambda", "im_lambda", "overlap_abs", "proj_norm", "log_proj_norm", "precision_limited"],
    );
    for p in projection_norms(s) {
        csv.row(&[
            p.n.to_string(),
            num(p.lambda.re),
            num(p.lambda.im),
            num(p.overlap_abs),
            num(p.norm),
            num(p.norm.ln()),
            p.precision_limited.to_string(),
        ]);
    }
    csv.into_string()
}

fn proj_fit(cfg: &RunConfig, spec: &OscillatorSpec, s: &Spectrum) -> ProjFit {
    let count = cfg.proj.count;
    let window = cfg.proj.fit_window.unwrap_or([(count / 3).max(1), count]);
    let pts: Vec<(f64, f64)> = projection_norms(s)
        .iter()
        .filter(|p| (window[0]..=window[1]).contains(&p.n) && !p.precision_limited)
        .map(|p| (p.n as f64, p.norm))
        .collect();
    let sigma = cfg.proj.sigma.or_else(|| constants(spec).ok().and_then(|k| k.sigma));
    let model = predicted_projection_norm(spec, window[1]).map(|p| serde_json::to_value(p).expect("serializes")).unwrap_or(json!(null));
    let (fit, order_fit, error) = match sigma {
        Some(sg) => match fit_growth(&pts, sg) {
            Ok(f) => (Some(f), None, None),
            Err(e) => (None, None, Some(e.to_string())),
        },
        None => match fit_growth_order(&pts) {
            Ok(f) => (None, Some(f), None),
            Err(e) => (None, None, Some(e.to_string())),
        },
    };
    ProjFit { window, sigma, fit, order_fit, model, error }
}

fn proj_svg(s: &Spectrum) -> String {
    let pts: Vec<(f64, f64)> = projection_norms(s).iter().map(|p| (p.n as f64, p.norm.ln())).collect();
    svg::line_plot("Spectral projection norms", "n", "log ‖P_n‖", &pts)
}

pub fn proj(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let spec = cfg.operator()?;
    let (s, failure) = spectrum_or_convergence(spec, &cfg.basis(), cfg.proj.count, dir)?;
    let mut out = vec![write_atomic(dir, "proj.csv", proj_csv(&s).as_bytes())?];
    out.push(write_json(dir, "proj_fit.json", &proj_fit(cfg, spec, &s))?);
    if cfg.output.svg {
        out.push(write_atomic(dir, "proj.svg", proj_svg(&s).as_bytes())?);
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub fn pspec(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let spec = cfg.operator()?;
    let task = cfg.pspec.as_ref().expect("checked at parse time");
    let op = ResolventOperator::from_spec(spec, &cfg.basis()).map_err(compute_err)?;
    let grid = pseudospectra_grid(&op, task.rect, task.nx, task.ny).map_err(compute_err)?;
    let mut csv = Csv::new("anharmonic-pspec", 1, &["re_z", "im_z", "resolvent_norm", "dist_to_spectrum"]);
    for p in &grid.samples {
        csv.row(&[num(p.z.re), num(p.z.im), num(p.norm), num(p.dist_to_spectrum)]);
    }
    let mut out = vec![write_atomic(dir, "pspec.csv", csv.into_string().as_bytes())?];
    if cfg.output.svg {
        let levels: Vec<f64> = grid.samples.iter().map(|p| p.norm.log10()).collect();
        let eigs: Vec<(f64, f64)> = op.eigenvalues.iter().map(|z| (z.re, z.im)).collect();
        let r = task.rect;
        let picture = svg::heatmap("log10 ‖(z − A)^-1‖", (r.re_min, r.re_max), (r.im_min, r.im_max), grid.nx, grid.ny, &levels, &eigs);
        out.push(write_atomic(dir, "pspec.svg", picture.as_bytes())?);
    }
    Ok(out)
}

pub fn pmode(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let spec = cfg.operator()?;
    let task = cfg.pmode.as_ref().expect("checked at parse time");
    let curve: Vec<C64> = task.curve.iter().map(|&[re, im]| C64::new(re, im)).collect();
    let builds: Vec<_> = curve.par_iter().map(|&l| build(spec, l, &task.params)).collect();
    let points: Vec<ScanPoint> = curve.iter().zip(&builds).map(|(&l, r)| ScanPoint::from_build(l, r)).collect();

    let mut csv = Csv::new("anharmonic-pmode", 1, &["re_lambda", "im_lambda", "q", "lower_bound", "mu_lambda", "delta_lambda", "n_used", "status"]);
    let mut samples = Csv::new("anharmonic-pmode-samples", 1, &["index", "x", "re_u", "im_u"]);
    for (i, (l, r)) in curve.iter().zip(&builds).enumerate() {
        match r {
            Ok(r) => {
                csv.row(&[num(l.re), num(l.im), num(r.q), num(r.lower_bound), num(r.mu_lambda), num(r.delta_lambda), r.n_used.to_string(), "ok".into()]);
                for &(x, u) in &r.samples {
                    samples.row(&[i.to_string(), num(x), num(u.re), num(u.im)]);
                }
            }
            Err(_) => csv.row(&[num(l.re), num(l.im), "nan".into(), "nan".into(), "nan".into(), "nan".into(), "0".into(), "failed".into()]),
        }
    }
    let scan = fit_scan(spec, points.clone(), &task.params);
    let certificates: Vec<serde_json::Value> = if task.certify {
        let basis = cfg.basis();
        curve
            .iter()
            .map(|&l| match certify_against_svd(spec, &basis, l, &task.params) {
                Ok(c) => {
                    let mut v = serde_json::to_value(&c).expect("serializes");
                    v["pseudomode"]["samples"] = json!(null);
                    v["certified"] = json!(c.certified());
                    v
                }
                Err(e) => json!({ "lambda": l, "error": e.to_string() }),
            })
            .collect()
    } else {
        Vec::new()
    };
    let report = json!({
        "points": points,
        "scan": scan.as_ref().ok().map(|s| json!({ "eta_hat": s.eta_hat, "r_squared": s.r_squared, "fits": s.fits })),
        "scan_error": scan.as_ref().err().map(|e| e.to_string()),
        "certificates": certificates,
    });
    let mut out = vec![
        write_atomic(dir, "pmode.csv", csv.into_string().as_bytes())?,
        write_atomic(dir, "pmode_samples.csv", samples.into_string().as_bytes())?,
        write_json(dir, "pmode.json", &report)?,
    ];
    if cfg.output.svg {
        if let Some(Ok(r)) = builds.first() {
            let pts: Vec<(f64, f64)> = r.samples.iter().map(|&(x, u)| (x, u.norm())).collect();
            out.push(write_atomic(dir, "pmode.svg", svg::line_plot("Pseudomode modulus", "x", "|u(x)|", &pts).as_bytes())?);
        }
    }
    Ok(out)
}

pub fn gauge(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let task = cfg.gauge.as_ref().expect("checked at parse time");
    let g = &task.spec;
    let b = g.b();
    let mut csv = Csv::new("anharmonic-gauge", 1, &["n", "a_n", "fprime_sign", "log_abs_fprime", "log_a_nb"]);
    for n in 1..=task.n_max {
        let f = f_prime_at_zero(g, n).map_err(compute_err)?;
        let log_a = f.log_abs - b * g.nu.ln() + b * (n as f64).ln();
        csv.row(&[n.to_string(), num(zero(g, n)), num(f.sign), num(f.log_abs), num(log_a)]);
    }
    let mut checks = Vec::new();
    for &[re, im] in &task.points {
        let w = C64::new(re, im);
        let r = if (g.rho - 0.5).abs() < 1e-14 {
            pfd_half_eval(g, w, Terms::Adaptive, Summation::Paired)
        } else {
            pfd_eval(g, w, Terms::Adaptive)
        };
        checks.push(match r {
            Ok(r) => json!({ "w": w, "direct": r.value_direct, "series": r.value_series, "residual": r.residual, "terms": r.terms_used }),
            Err(e) => json!({ "w": w, "error": e.to_string() }),
        });
    }
    let mut out = vec![write_atomic(dir, "gauge.csv", csv.into_string().as_bytes())?];
    out.push(write_json(dir, "gauge.json", &json!({ "spec": g, "partial_fractions": checks }))?);
    if cfg.output.svg {
        let pts: Vec<(f64, f64)> = (1..=task.n_max).filter_map(|n| f_prime_at_zero(g, n).ok().map(|f| (n as f64, f.log_abs))).collect();
        out.push(write_atomic(dir, "gauge.svg", svg::line_plot("Gauge derivative at its zeros", "n", "log |F′(−a_n)|", &pts).as_bytes())?);
    }
    Ok(out)
}

pub fn verify(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let results = verify::run_all(cfg.verify.criteria.as_deref(), |r| println!("{r}"));
    let path = write_json(dir, "verify.json", &results)?;
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(vec![path])
    } else {
        Err(CliError::Verify(failed))
    }
}

pub fn report(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let spec = cfg.operator()?;
    let count = cfg.eigs.count.max(cfg.proj.count);
    let (s, failure) = spectrum_or_convergence(spec, &cfg.basis(), count, dir)?;
    let k = constants(spec).ok();
    let eig_rows: Vec<serde_json::Value> = s
        .modes
        .iter()
        .take(count)
        .map(|m| {
            let pred = predicted_eigenvalue(spec, m.n).ok();
            json!({
                "n": m.n,
                "lambda": m.lambda,
                "predicted": pred,
                "relative_deviation": pred.map(|p| (m.lambda - p).norm() / p.norm()),
                "projection_norm": m.projection_norm,
                "trusted": m.trusted,
            })
        })
        .collect();
    let rep = json!({
        "oscillator": spec,
        "basis": cfg.basis(),
        "constants": k,
        "trusted_modes": s.trusted().count(),
        "excluded": s.excluded,
        "modes": eig_rows,
        "projection_fit": proj_fit(cfg, spec, &s),
    });
    let mut out = vec![
        write_atomic(dir, "eigs.csv", eigs_csv(&s, count).as_bytes())?,
        write_atomic(dir, "proj.csv", proj_csv(&s).as_bytes())?,
        write_json(dir, "report.json", &rep)?,
    ];
    if cfg.output.svg {
        out.push(write_atomic(dir, "proj.svg", proj_svg(&s).as_bytes())?);
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
