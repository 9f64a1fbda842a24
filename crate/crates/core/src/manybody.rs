//! Polarizabilities of many-electron atoms from per-orbital lengths: each
//! occupied shell contributes L⁴/(ηN), scaled by one constant C̃ per atom.

use std::collections::HashMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt;

const SHELL_LETTERS: [char; 4] = ['s', 'p', 'd', 'f'];

/// One occupied orbital, degenerate components merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitalShell {
    pub label: String,
    pub n: u32,
    pub l: u32,
    pub occ: u32,
    /// Per-axis characteristic length, a.u.
    #[serde(rename = "L")]
    pub length: f64,
}

impl OrbitalShell {
    pub fn new(n: u32, l: u32, occ: u32, length: f64) -> Result<Self> {
        let shell = Self {
            label: shell_label(n, l),
            n,
            l,
            occ,
            length,
        };
        shell.validate()?;
        Ok(shell)
    }

    pub fn capacity(&self) -> u32 {
        2 * (2 * self.l + 1)
    }

    pub fn validate(&self) -> Result<()> {
        check_quantum_numbers(self.n, self.l)?;
        if self.occ < 1 || self.occ > self.capacity() {
            return Err(Error::domain(format!(
                "occupation {} of shell {} outside [1, {}]",
                self.occ,
                self.label,
                self.capacity()
            )));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::domain(format!(
                "length of shell {} must be positive, got {}",
                self.label, self.length
            )));
        }
        Ok(())
    }
}

pub fn shell_label(n: u32, l: u32) -> String {
    match SHELL_LETTERS.get(l as usize) {
        Some(c) => format!("{n}{c}"),
        None => format!("{n}[l={l}]"),
    }
}

fn check_quantum_numbers(n: u32, l: u32) -> Result<()> {
    if n < 1 {
        return Err(Error::domain("principal quantum number must be at least 1"));
    }
    if l >= n {
        return Err(Error::domain(format!("l = {l} must be below n = {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub element: String,
    #[serde(rename = "Z")]
    pub z: u32,
    pub shells: Vec<OrbitalShell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_ref: Option<f64>,
}

impl AtomRecord {
    pub fn electrons(&self) -> u32 {
        self.shells.iter().map(|s| s.occ).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.z < 1 {
            return Err(Error::domain("atomic number must be at least 1"));
        }
        if self.shells.is_empty() {
            return Err(Error::domain("an atom needs at least one occupied shell"));
        }
        for s in &self.shells {
            s.validate()?;
        }
        let e = self.electrons();
        if e > self.z {
            return Err(Error::domain(format!("{e} electrons exceed Z = {}", self.z)));
        }
        if let Some(a) = self.alpha_ref {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::domain(format!(
                    "reference polarizability must be positive, got {a}"
                )));
            }
        }
        Ok(())
    }
}

/// Which η the first-row atoms get.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaConvention {
    /// nˡ·N^((1+(−1)ˡ)/2) for every shell of every atom.
    #[default]
    Formula,
    /// η = 1 for H and He, the formula from Li on.
    HeliumExempt,
}

/// η = nˡ·N^((1+(−1)ˡ)/2).
pub fn eta(n: u32, l: u32, occ: u32) -> Result<f64> {
    check_quantum_numbers(n, l)?;
    let base = (n as f64).powi(l as i32);
    Ok(if l.is_multiple_of(2) { base * occ as f64 } else { base })
}

fn shell_eta(atom: &AtomRecord, shell: &OrbitalShell, convention: EtaConvention) -> Result<f64> {
    match convention {
        EtaConvention::HeliumExempt if atom.z < 3 => Ok(1.0),
        _ => eta(shell.n, shell.l, shell.occ),
    }
}

/// α = C̃·4·Σ L⁴/(ηN), atomic units.
pub fn atomic_alpha(atom: &AtomRecord, c_tilde: f64, convention: EtaConvention) -> Result<f64> {
    atom.validate()?;
    let mut sum = 0.0;
    for s in &atom.shells {
        sum += s.length.powi(4) / (shell_eta(atom, s, convention)? * s.occ as f64);
    }
    Ok(c_tilde * 4.0 * sum)
}

/// α = 4·Σ L⁴/N, every shell weighted alike.
pub fn buckingham_alpha(atom: &AtomRecord) -> Result<f64> {
    atom.validate()?;
    Ok(4.0 * atom.shells.iter().map(|s| s.length.powi(4) / s.occ as f64).sum::<f64>())
}

/// C̃ = α_ref / α(C̃ = 1).
pub fn tilde_c_from_reference(atom: &AtomRecord, convention: EtaConvention) -> Result<f64> {
    let reference = atom.alpha_ref.ok_or_else(|| Error::InvalidRecord {
        record: atom.element.clone(),
        detail: "no reference polarizability".into(),
    })?;
    Ok(reference / atomic_alpha(atom, 1.0, convention)?)
}

/// Per-axis L of the hydrogenic orbital (n, l) with charge `z_eff`:
/// L² = n²(5n² + 1 − 3l(l+1))/(6Z²).
pub fn hydrogenic_shell_length(n: u32, l: u32, z_eff: f64) -> Result<f64> {
    check_quantum_numbers(n, l)?;
    if !(z_eff > 0.0 && z_eff.is_finite()) {
        return Err(Error::domain(format!("effective charge must be positive, got {z_eff}")));
    }
    let (n, l) = (n as f64, l as f64);
    let r2 = n * n * (5.0 * n * n + 1.0 - 3.0 * l * (l + 1.0)) / (2.0 * z_eff * z_eff);
    Ok((r2 / 3.0).sqrt())
}

// ---------------------------------------------------------------------------
// Approximate shell data

/// Subshells in filling order.
const MADELUNG: [(u32, u32); 19] = [
    (1, 0),
    (2, 0),
    (2, 1),
    (3, 0),
    (3, 1),
    (4, 0),
    (3, 2),
    (4, 1),
    (5, 0),
    (4, 2),
    (5, 1),
    (6, 0),
    (4, 3),
    (5, 2),
    (6, 1),
    (7, 0),
    (5, 3),
    (6, 2),
    (7, 1),
];

/// Ground configuration of a neutral atom by the filling-order rule, as
/// (n, l, occupation).
pub fn aufbau_configuration(z: u32) -> Result<Vec<(u32, u32, u32)>> {
    if !(1..=118).contains(&z) {
        return Err(Error::domain(format!("atomic number {z} outside 1..=118")));
    }
    let mut left = z;
    let mut out = Vec::new();
    for &(n, l) in &MADELUNG {
        if left == 0 {
            break;
        }
        let occ = left.min(2 * (2 * l + 1));
        out.push((n, l, occ));
        left -= occ;
    }
    Ok(out)
}

// Slater groups: (1s)(2s,2p)(3s,3p)(3d)(4s,4p)(4d)(4f)(5s,5p)...
fn slater_group(n: u32, l: u32) -> (u32, u32) {
    (n, l.saturating_sub(1))
}

/// Effective charge seen by an electron in (n, l) under Slater's screening
/// rules, for the configuration `config` of an atom with charge `z`.
pub fn slater_z_eff(z: u32, config: &[(u32, u32, u32)], n: u32, l: u32) -> Result<f64> {
    check_quantum_numbers(n, l)?;
    let target = slater_group(n, l);
    let mut screening = 0.0;
    let mut found = false;
    for &(ni, li, occ) in config {
        let g = slater_group(ni, li);
        let occ = occ as f64;
        if g == target {
            found = true;
            screening += if n == 1 { 0.30 } else { 0.35 } * occ;
        } else if g < target {
            // d and f electrons feel everything to their left fully
            screening += if l >= 2 || ni + 2 <= n { occ } else { 0.85 * occ };
        }
    }
    if !found {
        return Err(Error::domain(format!("shell {} is not occupied", shell_label(n, l))));
    }
    // the electron does not screen itself
    let own = if n == 1 { 0.30 } else { 0.35 };
    Ok(z as f64 - (screening - own))
}

/// Shells of a neutral atom with hydrogenic lengths under Slater effective
/// charges. A rough stand-in for orbital lengths from electronic-structure
/// calculations.
pub fn approximate_shells(z: u32) -> Result<Vec<OrbitalShell>> {
    let config = aufbau_configuration(z)?;
    config
        .iter()
        .map(|&(n, l, occ)| {
            OrbitalShell::new(
                n,
                l,
                occ,
                hydrogenic_shell_length(n, l, slater_z_eff(z, &config, n, l)?)?,
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Batch processing and file formats

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomResult {
    pub element: String,
    #[serde(rename = "Z")]
    pub z: u32,
    pub alpha_model: f64,
    pub alpha_buckingham: f64,
    pub alpha_ref: Option<f64>,
    pub c_tilde: Option<f64>,
    /// Some shell length came from the hydrogenic estimate.
    pub approximate: bool,
}

/// Atom records as read from a file; `approximate` marks atoms whose
/// lengths were estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomBatch {
    pub atoms: Vec<AtomRecord>,
    pub approximate: Vec<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShellDoc {
    #[serde(default)]
    label: Option<String>,
    n: u32,
    l: u32,
    occ: i64,
    #[serde(rename = "L", default)]
    length: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDoc {
    element: String,
    #[serde(rename = "Z")]
    z: u32,
    shells: Vec<ShellDoc>,
    #[serde(default)]
    alpha_ref: Option<f64>,
}

fn occupation(occ: i64, record: &str) -> Result<u32> {
    u32::try_from(occ).map_err(|_| Error::InvalidRecord {
        record: record.to_string(),
        detail: format!("occupation {occ} is negative or too large"),
    })
}

fn build_atom(
    element: String,
    z: u32,
    shells: Vec<(String, ShellDoc)>,
    alpha_ref: Option<f64>,
    record: &str,
) -> Result<(AtomRecord, bool)> {
    let invalid = |rec: &str, e: Error| Error::InvalidRecord {
        record: rec.to_string(),
        detail: e.to_string(),
    };
    let mut config = Vec::new();
    for (rec, s) in &shells {
        check_quantum_numbers(s.n, s.l).map_err(|e| invalid(rec, e))?;
        config.push((s.n, s.l, occupation(s.occ, rec)?));
    }
    let mut approximate = false;
    let mut out = Vec::with_capacity(shells.len());
    for (rec, s) in shells {
        let occ = occupation(s.occ, &rec)?;
        let length = match s.length {
            Some(l) => l,
            None => {
                approximate = true;
                slater_z_eff(z, &config, s.n, s.l)
                    .and_then(|ze| hydrogenic_shell_length(s.n, s.l, ze))
                    .map_err(|e| invalid(&rec, e))?
            }
        };
        let shell = OrbitalShell {
            label: s.label.unwrap_or_else(|| shell_label(s.n, s.l)),
            n: s.n,
            l: s.l,
            occ,
            length,
        };
        shell.validate().map_err(|e| invalid(&rec, e))?;
        out.push(shell);
    }
    let atom = AtomRecord {
        element,
        z,
        shells: out,
        alpha_ref,
    };
    atom.validate().map_err(|e| invalid(record, e))?;
    Ok((atom, approximate))
}

/// Parse a JSON array of atoms. Shells without `L` get the hydrogenic
/// estimate.
pub fn read_atoms_json(text: &str) -> Result<AtomBatch> {
    let docs: Vec<AtomDoc> = serde_json::from_str(text)?;
    if docs.is_empty() {
        return Err(Error::InsufficientData("no atoms in input".into()));
    }
    let mut batch = AtomBatch {
        atoms: Vec::new(),
        approximate: Vec::new(),
    };
    for (i, d) in docs.into_iter().enumerate() {
        let record = format!("atom {} ({})", i + 1, d.element);
        let shells = d
            .shells
            .into_iter()
            .enumerate()
            .map(|(j, s)| (format!("{record} shell {}", j + 1), s))
            .collect();
        let (atom, approx) = build_atom(d.element, d.z, shells, d.alpha_ref, &record)?;
        batch.atoms.push(atom);
        batch.approximate.push(approx);
    }
    Ok(batch)
}

#[derive(Debug, Deserialize)]
struct ShellRow {
    element: String,
    #[serde(rename = "Z")]
    z: u32,
    #[serde(default)]
    label: Option<String>,
    n: u32,
    l: u32,
    occ: i64,
    #[serde(rename = "L", default)]
    length: Option<f64>,
    #[serde(default)]
    alpha_ref: Option<f64>,
}

/// Shells of one atom, each tagged with its source line, and the reference α.
type ShellGroup = (Vec<(String, ShellDoc)>, Option<f64>);

/// Parse CSV with one shell per row and columns
/// `element,Z,label,n,l,occ,L,alpha_ref`. Rows sharing element and Z form
/// one atom; `alpha_ref` may be given on any of its rows.
pub fn read_atoms_csv<R: Read>(reader: R) -> Result<AtomBatch> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut order: Vec<(String, u32)> = Vec::new();
    let mut groups: HashMap<(String, u32), ShellGroup> = HashMap::new();
    for (i, row) in rdr.deserialize::<ShellRow>().enumerate() {
        // header is line 1
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        let key = (row.element.clone(), row.z);
        let record = format!("line {line} ({})", row.element);
        let entry = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            (Vec::new(), None)
        });
        if let Some(a) = row.alpha_ref {
            if entry.1.is_some_and(|prev| prev != a) {
                return Err(Error::InvalidRecord {
                    record,
                    detail: "conflicting reference polarizabilities".into(),
                });
            }
            entry.1 = Some(a);
        }
        entry.0.push((
            record,
            ShellDoc {
                label: row.label.filter(|s| !s.is_empty()),
                n: row.n,
                l: row.l,
                occ: row.occ,
                length: row.length,
            },
        ));
    }
    if order.is_empty() {
        return Err(Error::InsufficientData("no atoms in input".into()));
    }
    let mut batch = AtomBatch {
        atoms: Vec::new(),
        approximate: Vec::new(),
    };
    for key in order {
        let (shells, alpha_ref) = groups.remove(&key).expect("grouped key");
        let record = format!("{} (Z = {})", key.0, key.1);
        let (atom, approx) = build_atom(key.0, key.1, shells, alpha_ref, &record)?;
        batch.atoms.push(atom);
        batch.approximate.push(approx);
    }
    Ok(batch)
}

/// Model and Buckingham α, and C̃ where a reference exists, for every atom,
/// sorted by Z.
pub fn process_atoms(batch: &AtomBatch, convention: EtaConvention) -> Result<Vec<AtomResult>> {
    let mut out: Vec<AtomResult> = batch
        .atoms
        .par_iter()
        .zip(&batch.approximate)
        .map(|(a, &approximate)| {
            Ok(AtomResult {
                element: a.element.clone(),
                z: a.z,
                alpha_model: atomic_alpha(a, 1.0, convention)?,
                alpha_buckingham: buckingham_alpha(a)?,
                alpha_ref: a.alpha_ref,
                c_tilde: match a.alpha_ref {
                    Some(_) => Some(tilde_c_from_reference(a, convention)?),
                    None => None,
                },
                approximate,
            })
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| a.z.cmp(&b.z).then_with(|| a.element.cmp(&b.element)));
    Ok(out)
}

pub fn write_atoms_csv<W: Write>(results: &[AtomResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "element",
        "Z",
        "alpha_model",
        "alpha_buckingham",
        "alpha_ref",
        "c_tilde",
        "approximate",
    ])?;
    for r in results {
        w.write_record([
            r.element.clone(),
            r.z.to_string(),
            numfmt::csv(r.alpha_model),
            numfmt::csv(r.alpha_buckingham),
            numfmt::csv_opt(r.alpha_ref),
            numfmt::csv_opt(r.c_tilde),
            r.approximate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(z: u32, shells: Vec<OrbitalShell>, alpha_ref: Option<f64>) -> AtomRecord {
        AtomRecord {
            element: "X".into(),
            z,
            shells,
            alpha_ref,
        }
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(1, 0, 2).unwrap(), 2.0);
        assert_eq!(eta(2, 1, 6).unwrap(), 2.0);
        assert_eq!(eta(3, 2, 10).unwrap(), 90.0);
        assert_eq!(eta(4, 3, 14).unwrap(), 64.0);
        assert!(eta(2, 2, 1).is_err());
    }

    #[test]
    fn single_electron_reduces_to_single_particle_law() {
        let h = atom(1, vec![OrbitalShell::new(1, 0, 1, 1.0).unwrap()], Some(4.5));
        assert_eq!(atomic_alpha(&h, 1.125, EtaConvention::Formula).unwrap(), 4.5);
        assert_eq!(tilde_c_from_reference(&h, EtaConvention::Formula).unwrap(), 1.125);
        assert_eq!(buckingham_alpha(&h).unwrap(), 4.0);
    }

    #[test]
    fn helium_conventions_differ() {
        let he = atom(2, vec![OrbitalShell::new(1, 0, 2, 0.8).unwrap()], None);
        let f = atomic_alpha(&he, 1.0, EtaConvention::Formula).unwrap();
        let x = atomic_alpha(&he, 1.0, EtaConvention::HeliumExempt).unwrap();
        assert!((x / f - 2.0).abs() < 1e-15);
        assert_eq!(x, buckingham_alpha(&he).unwrap());
        // from lithium on both conventions agree
        let li = AtomRecord {
            z: 3,
            shells: vec![
                OrbitalShell::new(1, 0, 2, 0.3).unwrap(),
                OrbitalShell::new(2, 0, 1, 2.3).unwrap(),
            ],
            ..he
        };
        assert_eq!(
            atomic_alpha(&li, 1.0, EtaConvention::Formula).unwrap(),
            atomic_alpha(&li, 1.0, EtaConvention::HeliumExempt).unwrap()
        );
    }

    #[test]
    fn invariants_of_records() {
        assert!(OrbitalShell::new(2, 1, 7, 1.0).is_err());
        assert!(OrbitalShell::new(2, 1, 0, 1.0).is_err());
        assert!(OrbitalShell::new(1, 0, 1, 0.0).is_err());
        let too_many = atom(1, vec![OrbitalShell::new(1, 0, 2, 1.0).unwrap()], None);
        assert!(too_many.validate().is_err());
        assert!(tilde_c_from_reference(
            &atom(1, vec![OrbitalShell::new(1, 0, 1, 1.0).unwrap()], None),
            EtaConvention::Formula
        )
        .is_err());
    }

    #[test]
    fn hydrogenic_lengths() {
        assert!((hydrogenic_shell_length(1, 0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((hydrogenic_shell_length(1, 0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((hydrogenic_shell_length(2, 1, 1.0).unwrap() - 10f64.sqrt()).abs() < 1e-14);
        assert!(hydrogenic_shell_length(1, 1, 1.0).is_err());
        assert!(hydrogenic_shell_length(1, 0, 0.0).is_err());
    }

    #[test]
    fn slater_charges() {
        // textbook values: He 1s 1.70, C 2p 3.25, Zn 4s 4.35, Zn 3d 8.85
        let he = aufbau_configuration(2).unwrap();
        assert!((slater_z_eff(2, &he, 1, 0).unwrap() - 1.70).abs() < 1e-12);
        let c = aufbau_configuration(6).unwrap();
        assert!((slater_z_eff(6, &c, 2, 1).unwrap() - 3.25).abs() < 1e-12);
        let zn = aufbau_configuration(30).unwrap();
        assert!((slater_z_eff(30, &zn, 4, 0).unwrap() - 4.35).abs() < 1e-12);
        assert!((slater_z_eff(30, &zn, 3, 2).unwrap() - 8.85).abs() < 1e-12);
        assert!(slater_z_eff(6, &c, 3, 0).is_err());
    }

    #[test]
    fn aufbau_counts() {
        for z in [1, 10, 18, 26, 54, 118] {
            let cfg = aufbau_configuration(z).unwrap();
            assert_eq!(cfg.iter().map(|c| c.2).sum::<u32>(), z);
        }
        assert_eq!(aufbau_configuration(10).unwrap(), vec![(1, 0, 2), (2, 0, 2), (2, 1, 6)]);
        assert!(aufbau_configuration(0).is_err());
    }

    #[test]
    fn json_and_csv_agree() {
        let json = r#"[
            {"element": "Ne", "Z": 10, "alpha_ref": 2.66,
             "shells": [{"n": 1, "l": 0, "occ": 2, "L": 0.11},
                        {"n": 2, "l": 0, "occ": 2, "L": 0.55},
                        {"label": "2p", "n": 2, "l": 1, "occ": 6, "L": 0.62}]},
            {"element": "He", "Z": 2, "shells": [{"n": 1, "l": 0, "occ": 2}]}
        ]"#;
        let csv = "element,Z,label,n,l,occ,L,alpha_ref\n\
                   Ne,10,1s,1,0,2,0.11,2.66\n\
                   Ne,10,2s,2,0,2,0.55,\n\
                   Ne,10,2p,2,1,6,0.62,\n\
                   He,2,,1,0,2,,\n";
        let a = read_atoms_json(json).unwrap();
        let b = read_atoms_csv(csv.as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.approximate, vec![false, true]);
        let res = process_atoms(&a, EtaConvention::Formula).unwrap();
        assert_eq!(res[0].element, "He");
        assert!(res[1].c_tilde.is_some());
        let mut out = Vec::new();
        write_atoms_csv(&res, &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("element,Z,alpha_model"));
    }

    #[test]
    fn bad_records_are_identified() {
        let csv = "element,Z,label,n,l,occ,L,alpha_ref\nNe,10,1s,1,0,2,0.11,\nNe,10,2p,2,1,-6,0.62,\n";
        let err = read_atoms_csv(csv.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let json = r#"[{"element": "C", "Z": 6, "shells": [{"n": 1, "l": 1, "occ": 2, "L": 1.0}]}]"#;
        let err = read_atoms_json(json).unwrap_err().to_string();
        assert!(err.contains("atom 1 (C) shell 1"), "{err}");
        assert!(read_atoms_json("[]").is_err());
    }
}
