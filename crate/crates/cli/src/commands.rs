use std::io::Write;
use std::path::Path;

use gsd::dataset::{parse_scores_csv, write_scores_csv};
use gsd::dist::{self, GsdParams};
use gsd::format::fmt_sig;
use gsd::gof::chi_squared_gof;
use gsd::normal::{distortion_curve, linspace, qnormal_pmf, variance_ceiling_map};
use gsd::report::{fit_model, run_batch, write_rows_csv};
use gsd::simstudy::{accuracy_summary, run_sim_study, write_errors_csv, write_records_csv};
use gsd::{BatchConfig, Dataset, Error, FitConfig, Model, NormalParams, Pmf, SimDesign};
use serde_json::{json, Value};

use crate::output::{self, to_json};
use crate::{
    BatchArgs, CliError, CurvesArgs, FitArgs, FitTuning, GofArgs, InputArgs, ModelArg, PmfArgs, SampleArgs,
    SimstudyArgs,
};

type CliResult = Result<(), CliError>;

fn load(input: &InputArgs) -> Result<Dataset, CliError> {
    let d = parse_scores_csv(&input.input, input.format.into(), input.m)?;
    log::info!("read {} samples from {}", d.len(), d.source_path);
    Ok(d)
}

fn fit_config(tuning: &FitTuning) -> Result<FitConfig, CliError> {
    let mut cfg = FitConfig::default();
    if let Some(r) = tuning.restarts {
        cfg.n_restarts = r;
    }
    if let Some(t) = tuning.tolerance {
        cfg.grad_tolerance = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check_alpha(alpha: f64) -> CliResult {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--alpha must be in (0, 1), got {alpha}")))
    }
}

/// Location/spread field names used for each model in JSON output.
fn param_names(model: Model) -> (&'static str, &'static str) {
    match model {
        Model::Gsd => ("psi", "rho"),
        Model::QNormal | Model::Normal => ("psi_o", "sigma_o"),
    }
}

/// PMF for `--psi/--rho` (gsd) or `--psi/--sigma` (qnormal, normal).
fn model_pmf(model: ModelArg, psi: f64, rho: Option<f64>, sigma: Option<f64>, m: u32) -> Result<Pmf, CliError> {
    match model {
        ModelArg::Gsd => {
            let rho = rho.ok_or_else(|| CliError::Usage("--rho is required for the gsd model".into()))?;
            if sigma.is_some() {
                return Err(CliError::Usage("--sigma applies to the normal models only".into()));
            }
            Ok(dist::pmf(&GsdParams::new(psi, rho, m)?))
        }
        ModelArg::Qnormal | ModelArg::Normal => {
            let sigma = sigma.ok_or_else(|| CliError::Usage("--sigma is required for the normal models".into()))?;
            if rho.is_some() {
                return Err(CliError::Usage("--rho applies to the gsd model only".into()));
            }
            Ok(qnormal_pmf(&NormalParams::new(psi, sigma, m)?))
        }
    }
}

pub fn fit(args: FitArgs) -> CliResult {
    let dataset = load(&args.input)?;
    let cfg = fit_config(&args.tuning)?;
    let model: Model = args.model.into();
    let (loc, spread) = param_names(model);
    let mut out = output::open(args.output.as_deref())?;
    for s in &dataset.samples {
        let line = match fit_model(s, model, &cfg) {
            Ok(f) => json!({
                "id": s.id(),
                "n": s.len(),
                "model": model,
                loc: f.location,
                spread: f.spread,
                "log_likelihood": f.log_likelihood,
                "converged": f.converged,
                "steps_used": f.steps_used,
                "restarts_tried": f.restarts_tried,
                "degenerate": f.degenerate,
            }),
            Err(Error::DegenerateSample(msg)) => {
                log::warn!("{}: {msg}", s.id());
                json!({
                    "id": s.id(),
                    "n": s.len(),
                    "model": model,
                    loc: s.mean(),
                    spread: Value::Null,
                    "log_likelihood": Value::Null,
                    "converged": false,
                    "steps_used": 0,
                    "restarts_tried": 0,
                    "degenerate": true,
                })
            }
            Err(e) => return Err(e.into()),
        };
        output::write_json_line(&mut out, &line)?;
    }
    out.flush()?;
    Ok(())
}

pub fn pmf(args: PmfArgs) -> CliResult {
    let pmf = model_pmf(args.model, args.psi, args.rho, args.sigma, args.m)?;
    let mut out = output::open(args.output.as_deref())?;
    for (i, p) in pmf.probs().iter().enumerate() {
        writeln!(out, "{}:{}", i + 1, fmt_sig(*p))?;
    }
    out.flush()?;
    Ok(())
}

pub fn sample(args: SampleArgs) -> CliResult {
    if args.n == 0 || args.count == 0 {
        return Err(CliError::Usage("--n and --count must be positive".into()));
    }
    let pmf = model_pmf(args.model, args.psi, args.rho, args.sigma, args.m)?;
    let samples = (0..args.count)
        .map(|i| pmf.draw(&format!("s{}", i + 1), args.n, gsd::simstudy::record_seed(args.seed, i as u64)))
        .collect::<gsd::Result<Vec<_>>>()?;
    let mut out = output::open(args.output.as_deref())?;
    write_scores_csv(&samples, args.format.into(), &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn gof(args: GofArgs) -> CliResult {
    check_alpha(args.alpha)?;
    let dataset = load(&args.input)?;
    let cfg = fit_config(&args.tuning)?;
    let fixed = match (args.psi, args.rho) {
        (Some(psi), Some(rho)) => Some(GsdParams::new(psi, rho, dataset.m)?),
        (None, None) => None,
        _ => return Err(CliError::Usage("--psi and --rho must be given together".into())),
    };
    if fixed.is_some() && !matches!(args.model, ModelArg::Gsd) {
        return Err(CliError::Usage("--psi/--rho test a fixed GSD; drop --model".into()));
    }
    let model: Model = args.model.into();
    let (loc, spread) = param_names(model);
    let mut out = output::open(args.output.as_deref())?;
    for s in &dataset.samples {
        let mut line = json!({"id": s.id(), "n": s.len(), "model": model});
        let (pmf, n_fitted) = match fixed {
            Some(p) => {
                line[loc] = json!(p.psi());
                line[spread] = json!(p.rho());
                (dist::pmf(&p), 0)
            }
            None => match fit_model(s, model, &cfg) {
                Ok(f) => {
                    line[loc] = json!(f.location);
                    line[spread] = json!(f.spread);
                    line["converged"] = json!(f.converged);
                    (f.pmf, model.n_fitted_params())
                }
                Err(Error::DegenerateSample(msg)) => {
                    log::warn!("{}: {msg}", s.id());
                    line["degenerate"] = json!(true);
                    output::write_json_line(&mut out, &line)?;
                    continue;
                }
                Err(e) => return Err(e.into()),
            },
        };
        match chi_squared_gof(s, &pmf, n_fitted, args.min_expected) {
            Ok(r) => {
                let reject = r.p_value < args.alpha;
                let Value::Object(fields) = to_json(&r) else {
                    unreachable!("GofResult serializes to an object")
                };
                line.as_object_mut().expect("object").extend(fields);
                line["reject"] = json!(reject);
            }
            Err(Error::Untestable { .. }) => line["untestable"] = json!(true),
            Err(e) => return Err(e.into()),
        }
        output::write_json_line(&mut out, &line)?;
    }
    out.flush()?;
    Ok(())
}

pub fn batch(args: BatchArgs) -> CliResult {
    check_alpha(args.alpha)?;
    let dataset = load(&args.input)?;
    let config = BatchConfig {
        alpha: args.alpha,
        min_expected: args.min_expected,
        seed: args.seed,
        fit: fit_config(&args.tuning)?,
    };
    let report = run_batch(&dataset, &config)?;
    for s in &report.global {
        log::info!(
            "{}: {} tests, {} below alpha, global p {:?}",
            s.model,
            s.n_tests,
            s.n_below_alpha,
            s.global_p_value
        );
    }
    if let Some(path) = &args.csv {
        let mut w = output::open(Some(path))?;
        write_rows_csv(&report.rows, &mut w)?;
        w.flush()?;
    }
    let mut out = output::open(args.output.as_deref())?;
    output::write_json_pretty(&mut out, &report)?;
    out.flush()?;
    Ok(())
}

fn read_design(path: &Path) -> Result<(SimDesign, FitConfig), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read design {}: {e}", path.display())))?;
    let bad = |e: toml::de::Error| CliError::Usage(format!("design {}: {e}", path.display()));
    let mut table: toml::Table = toml::from_str(&text).map_err(bad)?;
    let fit = match table.remove("fit") {
        Some(v) => v.try_into().map_err(bad)?,
        None => FitConfig::default(),
    };
    let design = toml::Value::Table(table).try_into().map_err(bad)?;
    Ok((design, fit))
}

pub fn simstudy(args: SimstudyArgs) -> CliResult {
    let (mut design, fit) = match &args.design {
        Some(p) => read_design(p)?,
        None => (SimDesign::default(), FitConfig::default()),
    };
    if let Some(seed) = args.seed {
        design.seed = seed;
    }
    design.validate()?;
    fit.validate()?;
    log::info!("running {} records", design.num_records());
    let records = run_sim_study(&design, &fit)?;
    let not_converged = records.iter().filter(|r| !r.converged).count();
    if not_converged > 0 {
        log::warn!("{not_converged} of {} fits did not converge", records.len());
    }
    let mut out = output::open(args.output.as_deref())?;
    write_records_csv(&records, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.errors {
        let mut w = output::open(Some(path))?;
        write_errors_csv(&records, &mut w)?;
        w.flush()?;
    }
    if let Some(path) = &args.summary {
        let mut w = output::open(Some(path))?;
        output::write_json_pretty(&mut w, &accuracy_summary(&records)?)?;
        w.flush()?;
    }
    Ok(())
}

pub fn curves(args: CurvesArgs) -> CliResult {
    if args.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let grid = linspace(1.0, args.m as f64, args.points);
    let mut out = output::open(args.output.as_deref())?;
    if args.ceiling {
        writeln!(out, "psi_o,v_max,sigma_u_sq")?;
        for p in variance_ceiling_map(&grid, args.m)? {
            writeln!(out, "{},{},{}", fmt_sig(p.psi_o), fmt_sig(p.v_max), fmt_sig(p.sigma_u_sq))?;
        }
    } else {
        writeln!(out, "sigma_o,psi_o,psi_u,sigma_u_sq")?;
        for &sigma in &args.sigma {
            for p in distortion_curve(&grid, sigma, args.m)? {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_sig(p.sigma_o),
                    fmt_sig(p.psi_o),
                    fmt_sig(p.psi_u),
                    fmt_sig(p.sigma_u_sq)
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
