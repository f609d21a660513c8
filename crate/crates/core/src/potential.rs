//! The energy-dependent hyperbolic Scarf potential
//! `V(x, E) = -λ(E) sech(x) + μ(E) tanh(x) + E` and the weights that enter the
//! modified norm and orthogonality integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative gap below which two energies count as degenerate in [`ScarfPotential::ortho_weight`].
pub const DEGENERATE_ENERGY_REL: f64 = 1e-12;

/// Energy dependence of one potential coefficient.
///
/// JSON form: `{"kind": "linear", "alpha": 1.0}`, `{"kind": "inverse", "alpha": 1.0}`
/// or `{"kind": "constant", "value": 1.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ParameterProfile {
    Constant {
        value: f64,
    },
    /// `αE`
    Linear {
        alpha: f64,
    },
    /// `-α/E`, undefined at `E = 0`.
    #[serde(rename = "inverse")]
    InversePower {
        alpha: f64,
    },
}

impl ParameterProfile {
    pub fn eval(&self, energy: f64) -> Result<f64> {
        match *self {
            ParameterProfile::Constant { value } => Ok(value),
            ParameterProfile::Linear { alpha } => Ok(alpha * energy),
            ParameterProfile::InversePower { alpha } => {
                if energy == 0.0 {
                    Err(Error::ProfileDomain)
                } else {
                    Ok(-alpha / energy)
                }
            }
        }
    }

    pub fn derivative(&self, energy: f64) -> Result<f64> {
        match *self {
            ParameterProfile::Constant { .. } => Ok(0.0),
            ParameterProfile::Linear { alpha } => Ok(alpha),
            ParameterProfile::InversePower { alpha } => {
                if energy == 0.0 {
                    Err(Error::ProfileDomain)
                } else {
                    Ok(alpha / (energy * energy))
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ParameterProfile::Constant { .. })
    }

    /// Whether the profile has a strictly positive derivative everywhere on its domain.
    pub fn strictly_increasing(&self) -> bool {
        match *self {
            ParameterProfile::Constant { .. } => false,
            ParameterProfile::Linear { alpha } | ParameterProfile::InversePower { alpha } => {
                alpha > 0.0
            }
        }
    }

    /// Energy at which the profile is singular, if any.
    pub fn singularity(&self) -> Option<f64> {
        match self {
            ParameterProfile::InversePower { .. } => Some(0.0),
            _ => None,
        }
    }

    fn check_finite(&self) -> Result<()> {
        let v = match *self {
            ParameterProfile::Constant { value } => value,
            ParameterProfile::Linear { alpha } | ParameterProfile::InversePower { alpha } => alpha,
        };
        if v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidProfile("non-finite coefficient".into()))
        }
    }
}

pub fn eval_profile(profile: &ParameterProfile, energy: f64) -> Result<f64> {
    profile.eval(energy)
}

pub fn eval_profile_derivative(profile: &ParameterProfile, energy: f64) -> Result<f64> {
    profile.derivative(energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScarfPotential {
    #[serde(rename = "lambda")]
    pub lambda_profile: ParameterProfile,
    #[serde(rename = "mu")]
    pub mu_profile: ParameterProfile,
}

/// Outcome of the norm-weight sign analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignReport {
    pub lambda_increasing: bool,
    pub mu_constant: bool,
    pub admissible: bool,
}

impl ScarfPotential {
    /// Builds a potential, rejecting profiles that make `λ` vanish identically
    /// or use a non-positive slope for a linear or inverse-power `λ`.
    pub fn new(lambda_profile: ParameterProfile, mu_profile: ParameterProfile) -> Result<Self> {
        let potential = ScarfPotential {
            lambda_profile,
            mu_profile,
        };
        potential.validate()?;
        Ok(potential)
    }

    pub fn validate(&self) -> Result<()> {
        self.lambda_profile.check_finite()?;
        self.mu_profile.check_finite()?;
        match self.lambda_profile {
            ParameterProfile::Constant { value: 0.0 } => Err(Error::InvalidProfile(
                "lambda must not vanish identically".into(),
            )),
            ParameterProfile::Linear { alpha } | ParameterProfile::InversePower { alpha }
                if alpha <= 0.0 =>
            {
                Err(Error::InvalidProfile(format!(
                    "lambda profile requires alpha > 0, got {alpha}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn lambda(&self, energy: f64) -> Result<f64> {
        self.lambda_profile.eval(energy)
    }

    pub fn mu(&self, energy: f64) -> Result<f64> {
        self.mu_profile.eval(energy)
    }

    pub fn eval(&self, x: f64, energy: f64) -> Result<f64> {
        let lambda = self.lambda(energy)?;
        let mu = self.mu(energy)?;
        Ok(-lambda * sech(x) + mu * x.tanh() + energy)
    }

    /// `1 - ∂V/∂E = λ'(E) sech(x) - μ'(E) tanh(x)`
    pub fn norm_weight(&self, x: f64, energy: f64) -> Result<f64> {
        let dl = self.lambda_profile.derivative(energy)?;
        let dm = self.mu_profile.derivative(energy)?;
        Ok(dl * sech(x) - dm * x.tanh())
    }

    /// `1 - (V(x,Em) - V(x,En)) / (Em - En)`.
    ///
    /// The additive `E` term cancels exactly against the leading 1, so the
    /// weight is assembled from the coefficient difference quotients.
    pub fn ortho_weight(&self, x: f64, em: f64, en: f64) -> Result<f64> {
        let gap = em - en;
        if gap.abs() < DEGENERATE_ENERGY_REL * em.abs().max(en.abs()).max(1.0) {
            return Err(Error::DegenerateEnergies { em, en });
        }
        let dl = (self.lambda(em)? - self.lambda(en)?) / gap;
        let dm = (self.mu(em)? - self.mu(en)?) / gap;
        Ok(dl * sech(x) - dm * x.tanh())
    }

    pub fn check_sign_condition(&self) -> SignReport {
        let lambda_increasing = self.lambda_profile.strictly_increasing();
        let mu_constant = self.mu_profile.is_constant();
        SignReport {
            lambda_increasing,
            mu_constant,
            admissible: lambda_increasing && mu_constant,
        }
    }
}

pub fn eval_potential(potential: &ScarfPotential, x: f64, energy: f64) -> Result<f64> {
    potential.eval(x, energy)
}

pub fn norm_weight(potential: &ScarfPotential, x: f64, energy: f64) -> Result<f64> {
    potential.norm_weight(x, energy)
}

pub fn ortho_weight(potential: &ScarfPotential, x: f64, em: f64, en: f64) -> Result<f64> {
    potential.ortho_weight(x, em, en)
}

pub fn check_sign_condition(potential: &ScarfPotential) -> SignReport {
    potential.check_sign_condition()
}

#[inline]
pub(crate) fn sech(x: f64) -> f64 {
    // 1/cosh overflows to 0 gracefully for large |x|.
    1.0 / x.cosh()
}
