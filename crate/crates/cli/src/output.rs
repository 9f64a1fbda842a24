use polar4::numfmt::{csv as num, csv_opt as num_opt};
use polar4::scaling::ScalingReport;

use crate::CliError;

/// Rows of a CSV file plus `#` comment lines after them.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub footer: Vec<String>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn render(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let mut out = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        for line in &self.footer {
            out.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        String::from_utf8(out).map_err(|e| CliError::Io(e.to_string()))
    }
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn flag(b: Option<bool>) -> String {
    b.map(|b| b.to_string()).unwrap_or_default()
}

pub const REPORT_COLUMNS: [&str; 24] = [
    "family",
    "state",
    "model",
    "oracle",
    "alpha",
    "alpha_analytic",
    "alpha_dl",
    "alpha_ff",
    "alpha_sos",
    "sos_tail",
    "alpha_sos_same_grid",
    "L",
    "L_numeric",
    "C",
    "C_kirkwood",
    "C_unsold",
    "alpha_kirkwood",
    "alpha_unsold",
    "trk",
    "kirkwood_bound",
    "unsold_bound",
    "delta_C",
    "effective_gap",
    "warnings",
];

pub fn report_row(r: &ScalingReport) -> Vec<String> {
    let a = &r.alphas;
    vec![
        r.family.clone(),
        r.state.to_string(),
        serde_json::to_string(&r.model).unwrap_or_default(),
        r.oracle.to_string(),
        num(r.alpha),
        num_opt(a.analytic),
        num_opt(a.dalgarno_lewis),
        num_opt(a.finite_field),
        num_opt(a.sum_over_states),
        num_opt(a.sum_over_states_tail),
        num_opt(a.sum_over_states_reference),
        num(r.length),
        num_opt(r.length_numeric),
        num(r.c),
        num(r.c_kirkwood),
        num_opt(r.c_unsold),
        num(r.alpha_kirkwood),
        num_opt(r.alpha_unsold),
        num_opt(r.trk),
        flag(r.kirkwood_bound_holds),
        flag(r.unsold_bound_holds),
        num(r.delta_c),
        num(r.effective_gap),
        r.warnings.join("; "),
    ]
}
