//! Shared value types and the scaling-law identity.
//!
//! Everything is in Hartree atomic units: lengths in bohr, energies in
//! hartree, polarizabilities in bohr³ (i.e. already divided by 4πε₀). An SI
//! polarizability is recovered by multiplying by 4πε₀·a₀³.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass, charge and ħ of the (effective) particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleParams {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "minus_one")]
    pub charge: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

fn minus_one() -> f64 {
    -1.0
}

impl Default for ParticleParams {
    fn default() -> Self {
        Self::ELECTRON
    }
}

impl ParticleParams {
    pub const ELECTRON: ParticleParams = ParticleParams {
        mass: 1.0,
        charge: -1.0,
        hbar: 1.0,
    };

    pub fn new(mass: f64, charge: f64) -> Result<Self> {
        let p = ParticleParams {
            mass,
            charge,
            hbar: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::domain(format!("mass must be positive, got {}", self.mass)));
        }
        if self.charge == 0.0 || !self.charge.is_finite() {
            return Err(Error::domain("charge must be non-zero"));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::domain(format!("hbar must be positive, got {}", self.hbar)));
        }
        Ok(())
    }

    /// The prefactor 4μq²/ħ² of the L⁴ law.
    pub fn law_prefactor(&self) -> f64 {
        4.0 * self.mass * self.charge * self.charge / (self.hbar * self.hbar)
    }

    /// ħ²/(2μ), the kinetic-energy coefficient.
    pub fn kinetic_coefficient(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

/// Principal-axis components of a dipole polarizability tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizabilityTensor {
    pub components: Vec<f64>,
}

impl PolarizabilityTensor {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("tensor needs at least one component"));
        }
        Ok(Self { components })
    }

    pub fn isotropic(alpha: f64, dim: usize) -> Self {
        Self {
            components: vec![alpha; dim.max(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// Mean of the principal components, i.e. (1/N)·Tr α.
pub fn reduce_isotropic(tensor: &PolarizabilityTensor) -> f64 {
    let n = tensor.components.len() as f64;
    tensor.components.iter().sum::<f64>() / n
}

/// Per-axis position spread √(⟨rᵢ²⟩ − ⟨rᵢ⟩²) of a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicLength {
    pub axes: Vec<f64>,
}

impl CharacteristicLength {
    pub fn new(axes: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::domain("characteristic length needs at least one axis"));
        }
        if let Some(l) = axes.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::domain(format!(
                "characteristic length must be positive, got {l}"
            )));
        }
        Ok(Self { axes })
    }

    pub fn isotropic(length: f64, dim: usize) -> Result<Self> {
        Self::new(vec![length; dim.max(1)])
    }

    /// The common length of an isotropic state (first axis otherwise).
    pub fn scalar(&self) -> f64 {
        self.axes[0]
    }

    pub fn is_isotropic(&self, rel_tol: f64) -> bool {
        let l0 = self.axes[0];
        self.axes.iter().all(|l| (l - l0).abs() <= rel_tol * l0)
    }
}

/// C = α·ħ² / (4μq²L⁴).
pub fn c_from_alpha(alpha: f64, length: f64, particle: &ParticleParams) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::domain(format!(
            "characteristic length must be positive, got {length}"
        )));
    }
    Ok(alpha / (particle.law_prefactor() * length.powi(4)))
}

/// α = C·(4μq²/ħ²)·L⁴.
pub fn alpha_from_c(c: f64, length: f64, particle: &ParticleParams) -> f64 {
    c * particle.law_prefactor() * length.powi(4)
}
