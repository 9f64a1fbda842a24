mod args;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use polar4::manybody::{self, AtomResult};
use polar4::numfmt::{csv as num, csv_opt as num_opt};
use polar4::quad::exact_sum;
use polar4::scaling::{build_report, legacy_comparison, parameter_range, sweep_parameter, ScalingReport};
use polar4::solver::{spectral_grid, trk_check, trk_estimate, Transitions};
use polar4::tsmodel::{self, dataset_stats, relative_error, DatasetStats, Predictor};
use polar4::validate::run_validation;
use polar4::NumericPolicy;
use serde::Serialize;
use serde_json::json;

use args::{
    AtomsArgs, Cli, Command, Common, Format, InputArgs, InputFormat, ModelArgs, StatsArgs, SweepArgs, TrkArgs,
    ValidateArgs,
};
use output::{report_row, Table, REPORT_COLUMNS};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// A check failed; the output was still written.
    Failed(String),
    Io(String),
    Core(polar4::Error),
}

impl From<polar4::Error> for CliError {
    fn from(e: polar4::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// Both renderings of a command's result.
struct Output {
    csv: String,
    json: serde_json::Value,
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Io(e.to_string()))
}

fn emit(common: &Common, out: &Output) -> Result<(), CliError> {
    let text = match common.format {
        Format::Csv => out.csv.clone(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    let written = match &common.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    written.map_err(CliError::Io)
}

fn warn(common: &Common, lines: impl IntoIterator<Item = String>) {
    if common.verbose {
        for l in lines {
            eprintln!("warning: {l}");
        }
    }
}

fn cmd_model(common: &Common, args: &ModelArgs) -> Result<Output, CliError> {
    let spec = args.build()?;
    let policy = common.policy(NumericPolicy::default())?;
    let report = build_report(&spec, &policy)?;
    warn(common, report.warnings.iter().cloned());
    let mut t = Table::new(&REPORT_COLUMNS);
    t.rows.push(report_row(&report));
    Ok(Output {
        csv: t.render()?,
        json: to_json(&report)?,
    })
}

fn cmd_sweep(common: &Common, args: &SweepArgs) -> Result<Output, CliError> {
    let values = match (args.from, args.to, args.count) {
        (Some(from), Some(to), Some(count)) => parameter_range(from, to, count, args.log)?,
        _ => args.values.clone(),
    };
    let mut model = args.model.clone();
    if let Some(&first) = values.first() {
        model.seed(args.param, first);
    }
    let spec = model.build()?;
    let policy = common.policy(NumericPolicy::default())?;
    let result = sweep_parameter(&spec, args.param, &values, &policy)?;
    if result.reports().next().is_none() {
        let first = result.points.iter().find_map(|p| p.error.clone()).unwrap_or_default();
        return Err(CliError::Usage(format!("no sweep point succeeded: {first}")));
    }
    for p in &result.points {
        if let Some(e) = &p.error {
            eprintln!("warning: {} = {}: {e}", args.param, num(p.value));
        }
    }
    warn(common, result.reports().flat_map(|r| r.warnings.iter().cloned()));

    let reports: Vec<ScalingReport> = result.reports().cloned().collect();
    let fits = legacy_comparison(&reports);

    let mut header = vec![args.param.name().to_string(), "error".into()];
    header.extend(REPORT_COLUMNS.iter().map(|s| s.to_string()));
    let mut t = Table::new(&header);
    for p in &result.points {
        let mut row = vec![num(p.value), p.error.clone().unwrap_or_default()];
        match &p.report {
            Some(r) => row.extend(report_row(r)),
            None => row.extend(std::iter::repeat_n(String::new(), REPORT_COLUMNS.len())),
        }
        t.rows.push(row);
    }
    t.footer
        .push(format!("c_spread={} partial={}", num(result.c_spread), result.partial));
    match &fits {
        Ok(fits) => {
            for f in fits {
                t.footer.push(format!(
                    "fit exponent={} free={} log_prefactor={} residual={} points={}",
                    num(f.exponent),
                    f.free,
                    num(f.log_prefactor),
                    num(f.residual),
                    f.points
                ));
            }
        }
        Err(e) => t.footer.push(format!("fit unavailable: {e}")),
    }
    let fits_json = match &fits {
        Ok(f) => json!({ "fits": f }),
        Err(e) => json!({ "fit_error": e.to_string() }),
    };
    let mut json = to_json(&result)?;
    if let (Some(obj), serde_json::Value::Object(extra)) = (json.as_object_mut(), fits_json) {
        obj.extend(extra);
    }
    Ok(Output { csv: t.render()?, json })
}

fn cmd_validate(common: &Common, args: &ValidateArgs) -> Result<(Output, bool), CliError> {
    let (base, default_scale) = if args.fast {
        (NumericPolicy::fast(), 10.0)
    } else {
        (NumericPolicy::default(), 1.0)
    };
    let policy = common.policy(base)?;
    let tol_scale = args.tol_scale.unwrap_or(default_scale);
    if !(tol_scale >= 0.0 && tol_scale.is_finite()) {
        return Err(CliError::Usage("--tol-scale must be a non-negative number".into()));
    }
    let report = run_validation(&policy, tol_scale)?;
    let mut t = Table::new(&["id", "passed", "value", "target", "tolerance", "detail"]);
    for c in &report.checks {
        t.rows.push(vec![
            c.id.clone(),
            c.passed.to_string(),
            num(c.value),
            num(c.target),
            num(c.tolerance),
            c.detail.clone(),
        ]);
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    t.footer
        .push(format!("passed {passed} of {} checks", report.checks.len()));
    Ok((
        Output {
            csv: t.render()?,
            json: to_json(&report)?,
        },
        report.passed,
    ))
}

fn cmd_trk(common: &Common, args: &TrkArgs) -> Result<Output, CliError> {
    let spec = args.model.build()?;
    spec.validate()?;
    let policy = common.policy(NumericPolicy::default())?;
    let grid = spectral_grid(&spec, &policy)?;
    let tr = Transitions::on_grid(&spec, &grid, None)?;
    let sum = trk_check(&tr, args.terms);
    let extrapolated = args.terms.map(|n| trk_estimate(&spec, &policy, n)).transpose()?;

    let mut t = Table::new(&["m", "excitation_energy", "dipole", "term", "partial_sum"]);
    let mut terms = Vec::with_capacity(sum.partial_sums.len());
    for (i, (x, partial)) in tr.excitations.iter().zip(&sum.partial_sums).enumerate() {
        let term = x.energy * x.dipole * x.dipole / tr.kinetic;
        t.rows.push(vec![
            (i + 1).to_string(),
            num(x.energy),
            num(x.dipole),
            num(term),
            num(*partial),
        ]);
        terms.push(json!({
            "m": i + 1,
            "excitation_energy": x.energy,
            "dipole": x.dipole,
            "term": term,
            "partial_sum": partial,
        }));
    }
    t.footer.push(format!(
        "total={} terms={} complete={} grid_points={}",
        num(sum.total),
        sum.partial_sums.len(),
        tr.complete,
        grid.points()
    ));
    if let Some(e) = &extrapolated {
        t.footer.push(format!("extrapolated={}", num(e.value)));
    }
    Ok(Output {
        csv: t.render()?,
        json: json!({
            "model": spec,
            "total": sum.total,
            "complete": tr.complete,
            "grid_points": grid.points(),
            "extrapolated": extrapolated.map(|e| e.value),
            "terms": terms,
        }),
    })
}

#[derive(Serialize)]
struct AtomSummary {
    count: usize,
    with_reference: usize,
    approximate: usize,
    mean_re: Option<f64>,
    mean_rae: Option<f64>,
    mean_c_tilde: Option<f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| exact_sum(xs.iter().copied()) / xs.len() as f64)
}

fn atom_summary(results: &[AtomResult]) -> AtomSummary {
    let re: Vec<f64> = results
        .iter()
        .filter_map(|r| r.alpha_ref.map(|a| relative_error(r.alpha_model, a)))
        .collect();
    let abs: Vec<f64> = re.iter().map(|r| r.abs()).collect();
    let c: Vec<f64> = results.iter().filter_map(|r| r.c_tilde).collect();
    AtomSummary {
        count: results.len(),
        with_reference: re.len(),
        approximate: results.iter().filter(|r| r.approximate).count(),
        mean_re: mean(&re),
        mean_rae: mean(&abs),
        mean_c_tilde: mean(&c),
    }
}

fn csv_text(f: impl FnOnce(&mut Vec<u8>) -> polar4::Result<()>) -> Result<String, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}

fn cmd_atoms(common: &Common, args: &AtomsArgs) -> Result<Output, CliError> {
    let text = args.input.read()?;
    let batch = match args.input.format() {
        InputFormat::Json => manybody::read_atoms_json(&text)?,
        InputFormat::Csv => manybody::read_atoms_csv(text.as_bytes())?,
    };
    let results = manybody::process_atoms(&batch, args.eta_convention.into())?;
    let summary = atom_summary(&results);
    if summary.approximate > 0 {
        warn(
            common,
            [format!("{} atoms use estimated shell lengths", summary.approximate)],
        );
    }
    let mut csv = csv_text(|w| manybody::write_atoms_csv(&results, w))?;
    csv.push_str(&format!(
        "# count={} with_reference={} approximate={} mean_RE={} mean_RAE={} mean_c_tilde={}\n",
        summary.count,
        summary.with_reference,
        summary.approximate,
        num_opt(summary.mean_re),
        num_opt(summary.mean_rae),
        num_opt(summary.mean_c_tilde)
    ));
    Ok(Output {
        csv,
        json: json!({ "atoms": results, "summary": summary }),
    })
}

fn read_molecules(input: &InputArgs) -> Result<Vec<tsmodel::MoleculeRecord>, CliError> {
    let text = input.read()?;
    Ok(match input.format() {
        InputFormat::Json => tsmodel::read_molecules_json(&text)?,
        InputFormat::Csv => tsmodel::read_molecules_csv(text.as_bytes())?,
    })
}

fn stats_line(name: &str, s: &DatasetStats) -> String {
    format!(
        "{name} count={} mean_RE={} mean_RAE={}",
        s.count,
        num(s.mean_re),
        num(s.mean_rae)
    )
}

fn cmd_molecules(common: &Common, args: &InputArgs) -> Result<Output, CliError> {
    let mols = read_molecules(args)?;
    let results = tsmodel::process_molecules(&mols)?;
    let mut csv = csv_text(|w| tsmodel::write_molecules_csv(&results, w))?;
    let stats = tsmodel::stats_summary(&mols);
    let stats_json = match &stats {
        Ok(s) => {
            csv.push_str(&format!(
                "# {}\n# {}\n",
                stats_line("volume", &s.volume),
                stats_line("L4", &s.l4)
            ));
            to_json(s)?
        }
        Err(e) => {
            warn(common, [format!("no summary statistics: {e}")]);
            csv.push_str(&format!("# stats unavailable: {e}\n"));
            serde_json::Value::Null
        }
    };
    Ok(Output {
        csv,
        json: json!({ "molecules": results, "stats": stats_json }),
    })
}

fn cmd_stats(args: &StatsArgs) -> Result<Output, CliError> {
    let mols = read_molecules(&args.input)?;
    let summary = tsmodel::stats_summary(&mols)?;
    let mut t = Table::new(&["predictor", "exponent", "count", "mean_RE", "mean_RAE"]);
    let mut row = |name: &str, e: &str, s: &DatasetStats| {
        t.rows.push(vec![
            name.into(),
            e.into(),
            s.count.to_string(),
            num(s.mean_re),
            num(s.mean_rae),
        ]);
    };
    row("volume", "", &summary.volume);
    row("L4", "4", &summary.l4);
    let mut json = to_json(&summary)?;
    if let Some(e) = args.exponent {
        let s = dataset_stats(&mols, Predictor::Power(e))?;
        row("power", &num(e), &s);
        json["power"] = json!({ "exponent": e, "count": s.count, "mean_re": s.mean_re, "mean_rae": s.mean_rae });
    }
    Ok(Output { csv: t.render()?, json })
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let common = &cli.common;
    let out = match &cli.command {
        Command::Model(a) => cmd_model(common, a)?,
        Command::Sweep(a) => cmd_sweep(common, a)?,
        Command::Trk(a) => cmd_trk(common, a)?,
        Command::Atoms(a) => cmd_atoms(common, a)?,
        Command::Molecules(a) => cmd_molecules(common, a)?,
        Command::Stats(a) => cmd_stats(a)?,
        Command::Validate(a) => {
            let (out, passed) = cmd_validate(common, a)?;
            emit(common, &out)?;
            if !passed {
                let failed: Vec<&str> = out.json["checks"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .filter(|c| c["passed"] == false)
                    .filter_map(|c| c["id"].as_str())
                    .collect();
                return Err(CliError::Failed(format!("failed checks: {}", failed.join(", "))));
            }
            return Ok(());
        }
    };
    emit(common, &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polar4: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
