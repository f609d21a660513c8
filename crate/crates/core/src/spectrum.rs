//! Stationary energies from the quantization condition
//! `1/2 - ε λ(E) + sqrt(k_y² - μ(E)²) + n = 0`.
//!
//! Two profile combinations have closed forms on the `ε = +1` branch (linear
//! and inverse-power `λ` with constant `μ`); everything else goes through a
//! bracketed Brent solve of the residual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{ParameterProfile, ScarfPotential};

/// Sign ε that resolves the squared-root notation of the bound-state exponents.
///
/// `Plus` gives electron-like wells (`λ > n + 1/2`), `Minus` hole-like ones
/// (`λ < -n - 1/2`). Serialized as the integers `1` and `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// The complete set of retained branches.
    pub const ALL: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl TryFrom<i8> for Branch {
    type Error = String;

    fn try_from(value: i8) -> std::result::Result<Self, Self::Error> {
        match value {
            1 => Ok(Branch::Plus),
            -1 => Ok(Branch::Minus),
            other => Err(format!("epsilon must be +1 or -1, got {other}")),
        }
    }
}

impl From<Branch> for i8 {
    fn from(b: Branch) -> i8 {
        match b {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub branch: Branch,
    pub n: usize,
    pub k_y: f64,
}

impl QuantumNumbers {
    pub fn new(branch: Branch, n: usize, k_y: f64) -> Result<Self> {
        check_wavenumber(k_y)?;
        Ok(QuantumNumbers { branch, n, k_y })
    }
}

fn check_wavenumber(k_y: f64) -> Result<()> {
    if k_y == 0.0 || !k_y.is_finite() {
        return Err(Error::InvalidQuantumNumbers(format!(
            "k_y must be finite and nonzero, got {k_y}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Validity {
    pub wavenumber_ok: bool,
    pub lambda_condition_ok: bool,
    pub sign_condition_ok: bool,
}

impl Validity {
    pub fn is_bound_state(&self) -> bool {
        self.wavenumber_ok && self.lambda_condition_ok && self.sign_condition_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLevel {
    pub energy: f64,
    pub n: usize,
    pub branch: Branch,
    pub k_y: f64,
    /// `sqrt(k_y² - μ(E)²)`
    pub kappa: f64,
    pub valid: Validity,
}

impl EnergyLevel {
    pub fn quantum_numbers(&self) -> QuantumNumbers {
        QuantumNumbers {
            branch: self.branch,
            n: self.n,
            k_y: self.k_y,
        }
    }
}

fn decay_rate(k_y: f64, mu: f64, energy: f64) -> Result<f64> {
    let radicand = k_y * k_y - mu * mu;
    if k_y.abs() < mu.abs() {
        return Err(Error::WavenumberDomain {
            k_y: k_y.abs(),
            mu: mu.abs(),
            energy,
        });
    }
    Ok(radicand.max(0.0).sqrt())
}

/// Decay rate `κ = sqrt(k_y² - μ(E)²)` at the given energy.
pub fn kappa_at(potential: &ScarfPotential, k_y: f64, energy: f64) -> Result<f64> {
    decay_rate(k_y, potential.mu(energy)?, energy)
}

/// `g(E) = 1/2 - ε λ(E) + sqrt(k_y² - μ(E)²) + n`; stationary energies are its zeros.
pub fn quantization_residual(
    potential: &ScarfPotential,
    q: &QuantumNumbers,
    energy: f64,
) -> Result<f64> {
    let lambda = potential.lambda(energy)?;
    let kappa = kappa_at(potential, q.k_y, energy)?;
    Ok(0.5 - q.branch.sign() * lambda + kappa + q.n as f64)
}

/// Fills the three validity flags of a level from the potential.
pub fn validate_level(potential: &ScarfPotential, level: EnergyLevel) -> EnergyLevel {
    let mut out = level;
    let n = level.n as f64;
    let (wavenumber_ok, kappa) = match potential.mu(level.energy) {
        Ok(mu) => match decay_rate(level.k_y, mu, level.energy) {
            Ok(kappa) => (true, kappa),
            Err(_) => (false, level.kappa),
        },
        Err(_) => (false, level.kappa),
    };
    let lambda_condition_ok = match potential.lambda(level.energy) {
        Ok(lambda) => match level.branch {
            Branch::Plus => lambda > n + 0.5,
            Branch::Minus => lambda < -n - 0.5,
        },
        Err(_) => false,
    };
    out.kappa = kappa;
    out.valid = Validity {
        wavenumber_ok,
        lambda_condition_ok,
        sign_condition_ok: potential.check_sign_condition().admissible,
    };
    out
}

const ROOT_MAX_ITER: usize = 300;

/// Brent's method on the quantization residual inside a caller-supplied bracket.
///
/// Converges to `|g(E)| < 1e-12 (1 + n)` with a final bracket narrower than
/// `1e-13 (1 + |E|)`, or until the bracket cannot shrink further in `f64`.
pub fn root_find_energy(
    potential: &ScarfPotential,
    q: &QuantumNumbers,
    bracket: [f64; 2],
) -> Result<f64> {
    check_wavenumber(q.k_y)?;
    let [lo, hi] = bracket;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::NoSignChange { lo, hi });
    }
    if let Some(s) = potential.lambda_profile.singularity() {
        if lo <= s && s <= hi {
            return Err(Error::ProfileDomain);
        }
    }
    let g = |e: f64| quantization_residual(potential, q, e);
    let f_tol = 1e-12 * (1.0 + q.n as f64);

    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a)?, g(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..ROOT_MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let x_tol = 1e-13 * (1.0 + b.abs());
        let width = (c - b).abs();
        if fb.abs() < f_tol && width < x_tol {
            return Ok(b);
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + f64::MIN_POSITIVE;
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            // Bracket exhausted at machine resolution.
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut qq);
            if a == c {
                p = 2.0 * m * s;
                qq = 1.0 - s;
            } else {
                let r = fb / fc;
                let t = fa / fc;
                p = s * (2.0 * m * t * (t - r) - (b - a) * (r - 1.0));
                qq = (t - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                qq = -qq;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * qq - (tol1 * qq).abs()).min((e * qq).abs()) {
                e = d;
                d = p / qq;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = g(b)?;
    }
    Err(Error::RootNotConverged {
        iterations: ROOT_MAX_ITER,
    })
}

/// Closed-form energy for the profile pairs that admit one on the `ε = +1` branch.
fn closed_form_energy(potential: &ScarfPotential, n: usize, kappa: f64) -> Option<f64> {
    let n = n as f64;
    match potential.lambda_profile {
        ParameterProfile::Linear { alpha } => Some((n + 0.5 + kappa) / alpha),
        ParameterProfile::InversePower { alpha } => {
            Some(-2.0 * alpha / (2.0 * n + 1.0 + 2.0 * kappa))
        }
        ParameterProfile::Constant { .. } => None,
    }
}

/// Whether [`solve_energies`] uses a closed form for this potential and branch.
pub fn has_closed_form(potential: &ScarfPotential, branch: Branch) -> bool {
    branch == Branch::Plus
        && potential.mu_profile.is_constant()
        && !potential.lambda_profile.is_constant()
}

/// Stationary energies for `n = 0..=n_max` on one branch.
///
/// Closed forms are used where available; otherwise each `n` is bracketed on
/// [`default_search_grid`] and refined with [`root_find_energy`]. Every level
/// carries validity flags from [`validate_level`].
pub fn solve_energies(
    potential: &ScarfPotential,
    branch: Branch,
    k_y: f64,
    n_max: usize,
) -> Result<Vec<EnergyLevel>> {
    check_wavenumber(k_y)?;
    if potential.lambda_profile.is_constant() && potential.mu_profile.is_constant() {
        return Err(Error::NoSpectrum);
    }

    if has_closed_form(potential, branch) {
        let ParameterProfile::Constant { value: beta } = potential.mu_profile else {
            unreachable!("closed form requires constant mu");
        };
        // The energy argument only labels the error; mu is constant.
        let kappa = decay_rate(k_y, beta, f64::NAN)?;
        return (0..=n_max)
            .map(|n| {
                let energy = closed_form_energy(potential, n, kappa).ok_or(Error::NoSpectrum)?;
                let level = EnergyLevel {
                    energy,
                    n,
                    branch,
                    k_y,
                    kappa,
                    valid: Validity::default(),
                };
                Ok(validate_level(potential, level))
            })
            .collect();
    }

    let grid = default_search_grid(potential);
    let mut levels = Vec::new();
    for n in 0..=n_max {
        let q = QuantumNumbers { branch, n, k_y };
        let roots = bracket_roots(potential, &q, &grid)?;
        if roots.is_empty() {
            return Err(Error::BracketingFailure { n });
        }
        for energy in roots {
            let kappa = kappa_at(potential, k_y, energy)?;
            let level = EnergyLevel {
                energy,
                n,
                branch,
                k_y,
                kappa,
                valid: Validity::default(),
            };
            levels.push(validate_level(potential, level));
        }
    }
    Ok(levels)
}

const SEARCH_MIN_ABS: f64 = 1e-8;
const SEARCH_MAX_ABS: f64 = 1e4;
const SEARCH_POINTS_PER_SIDE: usize = 4000;

/// Energy nodes used to bracket roots when no closed form exists.
///
/// Logarithmically spaced in `|E|` over `[1e-8, 1e4]` on both half-lines, so
/// levels accumulating at a singular `E = 0` are still separated. The
/// singular point itself is never a node.
pub fn default_search_grid(potential: &ScarfPotential) -> Vec<f64> {
    let ratio = (SEARCH_MAX_ABS / SEARCH_MIN_ABS).ln() / (SEARCH_POINTS_PER_SIDE - 1) as f64;
    let side: Vec<f64> = (0..SEARCH_POINTS_PER_SIDE)
        .map(|i| SEARCH_MIN_ABS * (ratio * i as f64).exp())
        .collect();
    let mut grid: Vec<f64> = side.iter().rev().map(|e| -e).collect();
    if potential.lambda_profile.singularity().is_none() {
        grid.push(0.0);
    }
    grid.extend(side);
    grid
}

fn bracket_roots(potential: &ScarfPotential, q: &QuantumNumbers, grid: &[f64]) -> Result<Vec<f64>> {
    let singular = potential.lambda_profile.singularity();
    let values: Vec<Option<f64>> = grid
        .iter()
        .map(|&e| quantization_residual(potential, q, e).ok())
        .collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (lo, hi) = (grid[i], grid[i + 1]);
        if let Some(s) = singular {
            if lo < s && s < hi {
                continue;
            }
        }
        match (values[i], values[i + 1]) {
            (Some(0.0), _) => roots.push(lo),
            (Some(flo), Some(fhi)) if flo.signum() != fhi.signum() && fhi != 0.0 => {
                roots.push(root_find_energy(potential, q, [lo, hi])?);
            }
            _ => {}
        }
    }
    Ok(roots)
}
