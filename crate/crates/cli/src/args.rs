use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use polar4::manybody::EtaConvention;
use polar4::models::reference_square_well_depth;
use polar4::scaling::SweepParam;
use polar4::{ModelSpec, NumericPolicy, ParticleParams};

use crate::CliError;

pub const POLICY_ENV: &str = "POLAR4_POLICY";

#[derive(Debug, Parser)]
#[command(
    name = "polar4",
    version,
    about = "Dipole polarizabilities and the α ∝ L⁴ scaling law"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Numeric-policy JSON file; overrides $POLAR4_POLICY.
    #[arg(long, global = true)]
    pub policy: Option<PathBuf>,

    /// Points of the base grid.
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,

    /// Points of the grid used for spectral sums.
    #[arg(long, global = true)]
    pub spectrum_points: Option<usize>,

    /// Finite-field amplitude in natural field units.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub field: Option<f64>,

    /// Skip the grid Richardson step.
    #[arg(long, global = true)]
    pub no_richardson: bool,

    /// Skip sum-over-states and TRK sums in reports.
    #[arg(long, global = true)]
    pub no_spectral: bool,

    /// Print warnings and summaries to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scaling report for one model state.
    Model(ModelArgs),
    /// Reports over a range of one model parameter, with power-law fits.
    Sweep(SweepArgs),
    /// Run the self-check suite.
    Validate(ValidateArgs),
    /// Thomas–Reiche–Kuhn partial sums on the spectral grid.
    Trk(TrkArgs),
    /// Shell-resolved atomic polarizabilities.
    Atoms(AtomsArgs),
    /// Volume and L⁴ rescaling of free-atom polarizabilities in molecules.
    Molecules(InputArgs),
    /// Mean signed and absolute relative errors over a molecule set.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Qdo,
    Hydrogen,
    Piab,
    #[value(alias = "spherical_box", alias = "spherical-box")]
    Sphere,
    #[value(alias = "delta_well", alias = "delta-well")]
    Delta,
    #[value(alias = "square_well", alias = "square-well")]
    Squarewell,
}

/// Inline model flags. Unset lengths and strengths default to 1, the
/// square-well depth to the reference depth.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Model family.
    #[arg(long, value_enum, required_unless_present = "file", conflicts_with = "file")]
    pub model: Option<Family>,

    /// Model JSON document instead of inline flags.
    #[arg(long)]
    pub file: Option<PathBuf>,

    /// Dimension of a box or oscillator.
    #[arg(long)]
    pub dim: Option<usize>,

    /// Oscillator frequency.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,

    /// Oscillator stiffness μω².
    #[arg(long, allow_negative_numbers = true)]
    pub k0: Option<f64>,

    /// Nuclear charge.
    #[arg(long = "Z", alias = "z", allow_negative_numbers = true)]
    pub z: Option<f64>,

    /// Box width, or square-well half-width.
    #[arg(long = "A", alias = "width", allow_negative_numbers = true)]
    pub a: Option<f64>,

    /// Sphere radius.
    #[arg(long = "R", alias = "radius", allow_negative_numbers = true)]
    pub r: Option<f64>,

    /// Delta-well decay constant.
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,

    /// Square-well depth.
    #[arg(
        long = "V0",
        alias = "depth",
        conflicts_with = "v0scale",
        allow_negative_numbers = true
    )]
    pub v0: Option<f64>,

    /// Square-well depth in units of 100ħ²/(2μA²).
    #[arg(long = "V0scale", alias = "depth-scale", allow_negative_numbers = true)]
    pub v0scale: Option<f64>,

    /// State index (0 is the ground state; boxes count from 1).
    #[arg(long)]
    pub state: Option<u32>,

    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub charge: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Parameter to vary: A, R, kappa, V0, V0scale, omega, k0, Z or mass.
    #[arg(long)]
    pub param: SweepParam,

    #[arg(long, requires_all = ["to", "count"], conflicts_with = "values")]
    pub from: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,

    #[arg(long)]
    pub count: Option<usize>,

    /// Space the values logarithmically.
    #[arg(long)]
    pub log: bool,

    /// Explicit comma-separated values.
    #[arg(
        long,
        value_delimiter = ',',
        required_unless_present = "from",
        allow_negative_numbers = true
    )]
    pub values: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Halved grids and ten times looser tolerances.
    #[arg(long)]
    pub fast: bool,

    /// Multiplier on every relative tolerance.
    #[arg(long, allow_negative_numbers = true)]
    pub tol_scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrkArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Sum only the first N transitions; also reports the grid-extrapolated
    /// partial sum.
    #[arg(long)]
    pub terms: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input file (JSON or CSV).
    pub file: PathBuf,

    /// Input format; guessed from the extension by default.
    #[arg(long, value_enum)]
    pub input_format: Option<InputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EtaArg {
    Formula,
    HeliumExempt,
}

impl From<EtaArg> for EtaConvention {
    fn from(e: EtaArg) -> Self {
        match e {
            EtaArg::Formula => EtaConvention::Formula,
            EtaArg::HeliumExempt => EtaConvention::HeliumExempt,
        }
    }
}

#[derive(Debug, Args)]
pub struct AtomsArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// η convention for hydrogen and helium.
    #[arg(long, value_enum, default_value_t = EtaArg::Formula)]
    pub eta_convention: EtaArg,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Also score αᶠʳᵉᵉ·λᵉ for this exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub exponent: Option<f64>,
}

impl InputArgs {
    pub fn format(&self) -> InputFormat {
        self.input_format
            .unwrap_or_else(|| match self.file.extension().and_then(|e| e.to_str()) {
                Some(e) if e.eq_ignore_ascii_case("csv") => InputFormat::Csv,
                _ => InputFormat::Json,
            })
    }

    pub fn read(&self) -> Result<String, CliError> {
        read_file(&self.file)
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl ModelArgs {
    /// Fill the flag that `param` controls, if it is unset.
    pub fn seed(&mut self, param: SweepParam, value: f64) {
        let slot = match param {
            SweepParam::Width => &mut self.a,
            SweepParam::Radius => &mut self.r,
            SweepParam::Kappa => &mut self.kappa,
            SweepParam::Depth => &mut self.v0,
            SweepParam::DepthScale => &mut self.v0scale,
            SweepParam::Omega => &mut self.omega,
            SweepParam::K0 => &mut self.k0,
            SweepParam::Z => &mut self.z,
            SweepParam::Mass => &mut self.mass,
        };
        slot.get_or_insert(value);
    }

    pub fn build(&self) -> Result<ModelSpec, CliError> {
        let mut spec = match (&self.file, self.model) {
            (Some(path), _) => {
                let text = read_file(path)?;
                let mut spec: ModelSpec =
                    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                if let Some(n) = self.state {
                    spec.state = Some(n);
                }
                return Ok(spec);
            }
            (None, Some(f)) => self.inline(f)?,
            (None, None) => return Err(CliError::Usage("give --model or --file".into())),
        };
        spec.state = self.state;
        Ok(spec)
    }

    fn inline(&self, family: Family) -> Result<ModelSpec, CliError> {
        let d = ParticleParams::default();
        let particle = ParticleParams {
            mass: self.mass.unwrap_or(d.mass),
            charge: self.charge.unwrap_or(d.charge),
            ..d
        };
        let dim = self.dim.unwrap_or(1);
        let spec = match family {
            Family::Qdo => {
                let omega = match (self.omega, self.k0) {
                    (Some(_), Some(_)) => return Err(CliError::Usage("give --omega or --k0, not both".into())),
                    (Some(w), None) => w,
                    (None, Some(k)) => (k / particle.mass).sqrt(),
                    (None, None) => 1.0,
                };
                ModelSpec::qdo(dim, omega)
            }
            Family::Hydrogen => ModelSpec::hydrogen(self.z.unwrap_or(1.0)),
            Family::Piab => ModelSpec::piab(dim, self.a.unwrap_or(1.0)),
            Family::Sphere => ModelSpec::spherical_box(self.r.unwrap_or(1.0)),
            Family::Delta => ModelSpec::delta_well(self.kappa.unwrap_or(1.0)),
            Family::Squarewell => {
                let a = self.a.unwrap_or(1.0);
                let depth = match self.v0 {
                    Some(v) => v,
                    None => self.v0scale.unwrap_or(1.0) * reference_square_well_depth(a, &particle),
                };
                ModelSpec::square_well(a, depth)
            }
        };
        Ok(spec.with_particle(particle))
    }
}

/// Overlay the JSON object `patch` onto `base`, key by key.
fn overlay(base: &NumericPolicy, patch: &str, origin: &str) -> Result<NumericPolicy, CliError> {
    let bad = |e: String| CliError::Usage(format!("policy {origin}: {e}"));
    let mut value = serde_json::to_value(base).map_err(|e| bad(e.to_string()))?;
    let patch: serde_json::Value = serde_json::from_str(patch).map_err(|e| bad(e.to_string()))?;
    let serde_json::Value::Object(fields) = patch else {
        return Err(bad("expected a JSON object".into()));
    };
    let target = value.as_object_mut().expect("policy serializes to an object");
    for (k, v) in fields {
        target.insert(k, v);
    }
    serde_json::from_value(value).map_err(|e| bad(e.to_string()))
}

impl Common {
    /// `base`, then the policy file, then flags.
    pub fn policy(&self, base: NumericPolicy) -> Result<NumericPolicy, CliError> {
        let file = self.policy.clone().or_else(|| {
            std::env::var_os(POLICY_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        });
        let mut p = match file {
            Some(path) => overlay(&base, &read_file(&path)?, &path.display().to_string())?,
            None => base,
        };
        if let Some(n) = self.grid_points {
            p.grid_points = n;
            p.max_points = p.max_points.max(n);
        }
        if let Some(n) = self.spectrum_points {
            p.spectrum_points = n;
        }
        if let Some(f) = self.field {
            p.field = f;
        }
        if self.no_richardson {
            p.richardson_grid = false;
        }
        if self.no_spectral {
            p.spectral_checks = false;
        }
        p.validate()?;
        Ok(p)
    }
}
