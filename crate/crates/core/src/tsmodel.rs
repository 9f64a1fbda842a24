//! Molecular polarizabilities as sums of free-atom values rescaled by
//! effective-to-free ratios, either of Hirshfeld volumes or of lengths to
//! the fourth power, and error statistics against reference data.

use std::collections::HashMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt;
use crate::quad::exact_sum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomInMolecule {
    pub element: String,
    pub alpha_free: f64,
    /// V_eff / V_free.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_ratio: Option<f64>,
    /// L_eff / L_free.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_ref: Option<f64>,
    pub atoms: Vec<AtomInMolecule>,
}

impl MoleculeRecord {
    pub fn validate(&self) -> Result<()> {
        let invalid = |detail: String| Error::InvalidRecord {
            record: self.id.clone(),
            detail,
        };
        if self.atoms.is_empty() {
            return Err(invalid("a molecule needs at least one atom".into()));
        }
        if let Some(a) = self.alpha_ref {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid(format!("reference polarizability must be positive, got {a}")));
            }
        }
        for (i, at) in self.atoms.iter().enumerate() {
            let positive = |name: &str, v: f64| {
                if v > 0.0 && v.is_finite() {
                    Ok(())
                } else {
                    Err(invalid(format!(
                        "atom {} ({}): {name} must be positive, got {v}",
                        i + 1,
                        at.element
                    )))
                }
            };
            positive("alpha_free", at.alpha_free)?;
            if let Some(v) = at.v_ratio {
                positive("v_ratio", v)?;
            }
            if let Some(l) = at.l_ratio {
                positive("l_ratio", l)?;
            }
        }
        Ok(())
    }

    fn ratios<F: Fn(&AtomInMolecule) -> Option<f64>>(&self, name: &str, get: F) -> Result<Vec<f64>> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                get(a).ok_or_else(|| Error::IncompleteRecord {
                    record: self.id.clone(),
                    detail: format!("atom {} ({}) has no {name}", i + 1, a.element),
                })
            })
            .collect()
    }
}

/// Σ α_free·v.
pub fn ts_alpha_volume(mol: &MoleculeRecord) -> Result<f64> {
    mol.validate()?;
    let v = mol.ratios("v_ratio", |a| a.v_ratio)?;
    Ok(mol.atoms.iter().zip(v).fold(0.0, |s, (a, v)| s + a.alpha_free * v))
}

/// Σ α_free·λ⁴.
pub fn ts_alpha_l4(mol: &MoleculeRecord) -> Result<f64> {
    ts_alpha_power(mol, 4.0)
}

/// Σ α_free·λᵉ.
pub fn ts_alpha_power(mol: &MoleculeRecord, exponent: f64) -> Result<f64> {
    mol.validate()?;
    if !exponent.is_finite() {
        return Err(Error::domain(format!("exponent must be finite, got {exponent}")));
    }
    let l = mol.ratios("l_ratio", |a| a.l_ratio)?;
    Ok(mol
        .atoms
        .iter()
        .zip(l)
        .fold(0.0, |s, (a, l)| s + a.alpha_free * l.powf(exponent)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    Volume,
    L4,
    Power(f64),
}

impl Predictor {
    pub fn predict(&self, mol: &MoleculeRecord) -> Result<f64> {
        match self {
            Predictor::Volume => ts_alpha_volume(mol),
            Predictor::L4 => ts_alpha_l4(mol),
            Predictor::Power(e) => ts_alpha_power(mol, *e),
        }
    }
}

/// Mean signed and absolute relative errors in percent, averaged over
/// molecules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub count: usize,
    pub mean_re: f64,
    pub mean_rae: f64,
}

/// 100·(α − α_ref)/α_ref.
pub fn relative_error(predicted: f64, reference: f64) -> f64 {
    100.0 * (predicted - reference) / reference
}

pub fn dataset_stats(mols: &[MoleculeRecord], predictor: Predictor) -> Result<DatasetStats> {
    if mols.is_empty() {
        return Err(Error::InsufficientData("no molecules".into()));
    }
    let re: Vec<f64> = mols
        .par_iter()
        .map(|m| {
            let reference = m.alpha_ref.ok_or_else(|| Error::IncompleteRecord {
                record: m.id.clone(),
                detail: "no reference polarizability".into(),
            })?;
            Ok(relative_error(predictor.predict(m)?, reference))
        })
        .collect::<Result<_>>()?;
    let n = re.len() as f64;
    Ok(DatasetStats {
        count: re.len(),
        mean_re: exact_sum(re.iter().copied()) / n,
        mean_rae: exact_sum(re.iter().map(|r| r.abs())) / n,
    })
}

/// One output row per molecule. Missing ratios or reference leave the
/// dependent columns empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoleculeResult {
    pub id: String,
    pub alpha_vol: Option<f64>,
    #[serde(rename = "alpha_L4")]
    pub alpha_l4: Option<f64>,
    pub alpha_ref: Option<f64>,
    pub re_vol: Option<f64>,
    #[serde(rename = "re_L4")]
    pub re_l4: Option<f64>,
}

fn optional(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::IncompleteRecord { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn process_molecules(mols: &[MoleculeRecord]) -> Result<Vec<MoleculeResult>> {
    mols.par_iter()
        .map(|m| {
            let alpha_vol = optional(ts_alpha_volume(m))?;
            let alpha_l4 = optional(ts_alpha_l4(m))?;
            let re = |p: Option<f64>| p.zip(m.alpha_ref).map(|(p, r)| relative_error(p, r));
            Ok(MoleculeResult {
                id: m.id.clone(),
                alpha_vol,
                alpha_l4,
                alpha_ref: m.alpha_ref,
                re_vol: re(alpha_vol),
                re_l4: re(alpha_l4),
            })
        })
        .collect()
}

/// Statistics of both predictors over one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub volume: DatasetStats,
    #[serde(rename = "L4")]
    pub l4: DatasetStats,
}

pub fn stats_summary(mols: &[MoleculeRecord]) -> Result<StatsSummary> {
    Ok(StatsSummary {
        volume: dataset_stats(mols, Predictor::Volume)?,
        l4: dataset_stats(mols, Predictor::L4)?,
    })
}

// ---------------------------------------------------------------------------
// File formats

pub fn read_molecules_json(text: &str) -> Result<Vec<MoleculeRecord>> {
    let mols: Vec<MoleculeRecord> = serde_json::from_str(text)?;
    check_batch(&mols)?;
    Ok(mols)
}

#[derive(Debug, Deserialize)]
struct AtomRow {
    id: String,
    #[serde(default)]
    alpha_ref: Option<f64>,
    element: String,
    alpha_free: f64,
    #[serde(default)]
    v_ratio: Option<f64>,
    #[serde(default)]
    l_ratio: Option<f64>,
}

/// CSV with one atom per row: `id,alpha_ref,element,alpha_free,v_ratio,l_ratio`.
/// Rows sharing an id form one molecule, in order of first appearance.
pub fn read_molecules_csv<R: Read>(reader: R) -> Result<Vec<MoleculeRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut mols: Vec<MoleculeRecord> = Vec::new();
    for (i, row) in rdr.deserialize::<AtomRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        let k = *index.entry(row.id.clone()).or_insert_with(|| {
            mols.push(MoleculeRecord {
                id: row.id.clone(),
                alpha_ref: None,
                atoms: Vec::new(),
            });
            mols.len() - 1
        });
        let mol = &mut mols[k];
        if let Some(a) = row.alpha_ref {
            if mol.alpha_ref.is_some_and(|prev| prev != a) {
                return Err(Error::InvalidRecord {
                    record: format!("line {line} ({})", row.id),
                    detail: "conflicting reference polarizabilities".into(),
                });
            }
            mol.alpha_ref = Some(a);
        }
        let atom = AtomInMolecule {
            element: row.element,
            alpha_free: row.alpha_free,
            v_ratio: row.v_ratio,
            l_ratio: row.l_ratio,
        };
        let probe = MoleculeRecord {
            id: format!("line {line} ({})", row.id),
            alpha_ref: None,
            atoms: vec![atom.clone()],
        };
        probe.validate()?;
        mol.atoms.push(atom);
    }
    check_batch(&mols)?;
    Ok(mols)
}

fn check_batch(mols: &[MoleculeRecord]) -> Result<()> {
    if mols.is_empty() {
        return Err(Error::InsufficientData("no molecules in input".into()));
    }
    let mut seen = HashMap::new();
    for (i, m) in mols.iter().enumerate() {
        if let Some(j) = seen.insert(m.id.as_str(), i) {
            return Err(Error::InvalidRecord {
                record: m.id.clone(),
                detail: format!("duplicate id (molecules {} and {})", j + 1, i + 1),
            });
        }
        m.validate()?;
    }
    Ok(())
}

pub fn write_molecules_csv<W: Write>(results: &[MoleculeResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "alpha_vol", "alpha_L4", "alpha_ref", "RE_vol", "RE_L4"])?;
    for r in results {
        w.write_record([
            r.id.clone(),
            numfmt::csv_opt(r.alpha_vol),
            numfmt::csv_opt(r.alpha_l4),
            numfmt::csv_opt(r.alpha_ref),
            numfmt::csv_opt(r.re_vol),
            numfmt::csv_opt(r.re_l4),
        ])?;
    }
    w.flush()?;
    Ok(())
}
