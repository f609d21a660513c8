//! Closed-form bound-state spinors.
//!
//! `ψ₁(x) = [1 - i sinh x]^p [1 + i sinh x]^q P_n^{(A,B)}(i sinh x)` with
//!
//! ```text
//! p = 1/4 - ε(1 + 2λ + 2iμ)/4     A = -ε(1 + 2λ + 2iμ)/2
//! q = 1/4 - ε(-1 + 2λ - 2iμ)/4    B =  ε(1 - 2λ + 2iμ)/2
//! ```
//!
//! The second component follows from `ψ₂ = (ψ₁' + i(V - E)ψ₁) / k_y` and the
//! spinor is `(ψ₊, ψ₋) = (ψ₁ + ψ₂, ψ₁ - ψ₂)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{sech, ScarfPotential};
use crate::specfun::{hyp2f1_series, jacobi_poly, jacobi_poly_derivative};
use crate::spectrum::{Branch, EnergyLevel, QuantumNumbers};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub level: EnergyLevel,
    /// Exponent of `1 - i sinh x`.
    pub p: Complex64,
    /// Exponent of `1 + i sinh x`.
    pub q: Complex64,
    pub jacobi_a: Complex64,
    pub jacobi_b: Complex64,
    pub n: usize,
    pub k_y: f64,
    pub lambda_e: f64,
    pub mu_e: f64,
}

impl BoundState {
    pub fn energy(&self) -> f64 {
        self.level.energy
    }

    pub fn branch(&self) -> Branch {
        self.level.branch
    }

    /// Decay rate of `|ψ₁|` at large `|x|`: `Re p + Re q + n = n + 1/2 - ελ(E)`.
    pub fn asymptotic_exponent(&self) -> f64 {
        self.p.re + self.q.re + self.n as f64
    }
}

/// Exponents and Jacobi parameters for given `λ(E)`, `μ(E)` and branch.
pub fn exponents(lambda: f64, mu: f64, branch: Branch) -> [Complex64; 4] {
    let eps = branch.sign();
    let s_plus = Complex64::new(1.0 + 2.0 * lambda, 2.0 * mu);
    let s_minus = Complex64::new(-1.0 + 2.0 * lambda, -2.0 * mu);
    let p = 0.25 - eps * s_plus / 4.0;
    let q = 0.25 - eps * s_minus / 4.0;
    let a = -eps * s_plus / 2.0;
    let b = -eps * s_minus / 2.0;
    [p, q, a, b]
}

/// Assembles the closed-form state for a level.
///
/// Levels that are not bound states are rejected unless `allow_invalid` is set
/// (useful for plotting or diagnosing inadmissible profiles). No normalization
/// is applied here.
pub fn build_bound_state(
    potential: &ScarfPotential,
    level: EnergyLevel,
    q: QuantumNumbers,
    allow_invalid: bool,
) -> Result<BoundState> {
    if !allow_invalid && !level.valid.is_bound_state() {
        return Err(Error::InvalidLevel {
            n: level.n,
            energy: level.energy,
        });
    }
    let lambda_e = potential.lambda(level.energy)?;
    let mu_e = potential.mu(level.energy)?;
    let [p, qq, jacobi_a, jacobi_b] = exponents(lambda_e, mu_e, q.branch);
    // Rejects Jacobi parameters for which the terminating sum is undefined, so
    // the pointwise evaluators below cannot fail.
    jacobi_poly(q.n, jacobi_a, jacobi_b, Complex64::new(0.0, 0.0))?;
    let level = EnergyLevel {
        n: q.n,
        branch: q.branch,
        k_y: q.k_y,
        ..level
    };
    Ok(BoundState {
        level,
        p,
        q: qq,
        jacobi_a,
        jacobi_b,
        n: q.n,
        k_y: q.k_y,
        lambda_e,
        mu_e,
    })
}

struct Factors {
    cosh: f64,
    z: Complex64,
    minus: Complex64,
    plus: Complex64,
    envelope: Complex64,
}

fn factors(state: &BoundState, x: f64) -> Factors {
    let s = x.sinh();
    let z = Complex64::new(0.0, s);
    let minus = Complex64::new(1.0, -s);
    let plus = Complex64::new(1.0, s);
    // Principal logs: both arguments have real part 1, so the cut is never crossed.
    let envelope = (state.p * minus.ln() + state.q * plus.ln()).exp();
    Factors {
        cosh: x.cosh(),
        z,
        minus,
        plus,
        envelope,
    }
}

pub fn eval_psi1(state: &BoundState, x: f64) -> Complex64 {
    let f = factors(state, x);
    let poly = jacobi_poly(state.n, state.jacobi_a, state.jacobi_b, f.z)
        .expect("Jacobi parameters validated at build time");
    f.envelope * poly
}

pub fn eval_psi1_prime(state: &BoundState, x: f64) -> Complex64 {
    let f = factors(state, x);
    let poly = jacobi_poly(state.n, state.jacobi_a, state.jacobi_b, f.z)
        .expect("Jacobi parameters validated at build time");
    let dpoly = jacobi_poly_derivative(state.n, state.jacobi_a, state.jacobi_b, f.z)
        .expect("Jacobi parameters validated at build time");
    let bracket = -I * state.p * poly / f.minus + I * state.q * poly / f.plus + I * dpoly;
    f.cosh * f.envelope * bracket
}

pub fn eval_psi2(state: &BoundState, _potential: &ScarfPotential, x: f64) -> Complex64 {
    let psi1 = eval_psi1(state, x);
    let dpsi1 = eval_psi1_prime(state, x);
    let shifted = shifted_potential(state, x);
    (dpsi1 + I * shifted * psi1) / state.k_y
}

/// `V(x, E) - E` at the state's energy, using the cached coefficients.
fn shifted_potential(state: &BoundState, x: f64) -> f64 {
    -state.lambda_e * sech(x) + state.mu_e * x.tanh()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinorSample {
    pub x: f64,
    pub psi1: Complex64,
    pub psi2: Complex64,
    pub psi_plus: Complex64,
    pub psi_minus: Complex64,
    pub density_plus: f64,
    pub density_minus: f64,
}

pub fn eval_spinor(
    state: &BoundState,
    potential: &ScarfPotential,
    x: f64,
    normalization: f64,
) -> SpinorSample {
    let psi1 = eval_psi1(state, x) * normalization;
    let psi2 = eval_psi2(state, potential, x) * normalization;
    let psi_plus = psi1 + psi2;
    let psi_minus = psi1 - psi2;
    SpinorSample {
        x,
        psi1,
        psi2,
        psi_plus,
        psi_minus,
        density_plus: psi_plus.norm_sqr(),
        density_minus: psi_minus.norm_sqr(),
    }
}

/// Amplitude scale that brings the grid maximum of `|ψ₊|²` to one.
pub fn peak_normalization(state: &BoundState, potential: &ScarfPotential, grid: &[f64]) -> f64 {
    let peak = grid
        .iter()
        .map(|&x| eval_spinor(state, potential, x, 1.0).density_plus)
        .fold(0.0, f64::max);
    if peak > 0.0 {
        1.0 / peak.sqrt()
    } else {
        1.0
    }
}

/// `k_y ψ₂ - ψ₁' - i(V - E)ψ₁`, evaluated with the potential recomputed from
/// its profiles.
pub fn definitional_residual(
    state: &BoundState,
    potential: &ScarfPotential,
    x: f64,
) -> Result<Complex64> {
    let shifted = potential.eval(x, state.energy())? - state.energy();
    Ok(state.k_y * eval_psi2(state, potential, x)
        - eval_psi1_prime(state, x)
        - I * shifted * eval_psi1(state, x))
}

/// Coefficient of `ψ₁` in the decoupled second-order equation.
pub fn ode_coefficient(lambda: f64, mu: f64, k_y: f64, x: f64) -> Complex64 {
    let sh = sech(x);
    let th = x.tanh();
    Complex64::new(-k_y * k_y + mu * mu, 0.0)
        + sh * sh * Complex64::new(lambda * lambda - mu * mu, mu)
        + sh * th * Complex64::new(-2.0 * lambda * mu, lambda)
}

fn fd_step(x: f64) -> f64 {
    1e-3 * x.abs().max(1.0)
}

/// Fourth-order central difference of `f` at `x` with step `h`.
pub(crate) fn central_difference<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> Complex64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Left-hand side of the second-order equation for `ψ₁`, with `ψ₁''` taken as
/// a fourth-order central difference of the analytic `ψ₁'`.
pub fn ode_residual_psi1(state: &BoundState, x: f64) -> Complex64 {
    let second = central_difference(|t| eval_psi1_prime(state, t), x, fd_step(x));
    second + ode_coefficient(state.lambda_e, state.mu_e, state.k_y, x) * eval_psi1(state, x)
}

/// Same residual for an arbitrary function known only by its values; `ψ''`
/// comes from the fourth-order five-point second-difference stencil.
pub fn ode_residual_values<F: Fn(f64) -> Result<Complex64>>(
    psi: F,
    lambda: f64,
    mu: f64,
    k_y: f64,
    x: f64,
) -> Result<Complex64> {
    let h = fd_step(x);
    let second = (-psi(x + 2.0 * h)? + 16.0 * psi(x + h)? - 30.0 * psi(x)? + 16.0 * psi(x - h)?
        - psi(x - 2.0 * h)?)
        / (12.0 * h * h);
    Ok(second + ode_coefficient(lambda, mu, k_y, x) * psi(x)?)
}

/// Parameters `a, b, c` of the general solution, with every `sqrt(w²)` taken
/// on the principal branch.
pub fn general_parameters(lambda: f64, mu: f64, k_y: f64) -> Result<[Complex64; 3]> {
    let radicand = k_y * k_y - mu * mu;
    if radicand < 0.0 {
        return Err(Error::WavenumberDomain {
            k_y: k_y.abs(),
            mu: mu.abs(),
            energy: f64::NAN,
        });
    }
    let kappa = radicand.sqrt();
    let root_minus = Complex64::new(-1.0 + 2.0 * lambda, -2.0 * mu)
        .powi(2)
        .sqrt();
    let root_plus = Complex64::new(1.0 + 2.0 * lambda, 2.0 * mu).powi(2).sqrt();
    let common = 0.5 - root_minus / 4.0 - root_plus / 4.0;
    Ok([common + kappa, common - kappa, 1.0 - root_plus / 2.0])
}

/// General solution `c₁ u₁(x) + c₂ u₂(x)` of the `ψ₁` equation at any energy,
/// evaluated with the hypergeometric series (so only where
/// `|(1 - i sinh x)/2| ≤ 0.8`, roughly `|x| ≤ 1.04`).
pub fn general_solution_psi1(
    potential: &ScarfPotential,
    energy: f64,
    k_y: f64,
    c1: Complex64,
    c2: Complex64,
    x: f64,
) -> Result<Complex64> {
    let lambda = potential.lambda(energy)?;
    let mu = potential.mu(energy)?;
    let [a, b, c] = general_parameters(lambda, mu, k_y)?;
    let s = x.sinh();
    let minus = Complex64::new(1.0, -s);
    let plus = Complex64::new(1.0, s);
    let arg = minus * 0.5;
    let (lm, lp) = (minus.ln(), plus.ln());

    let mut total = Complex64::new(0.0, 0.0);
    if c1 != Complex64::new(0.0, 0.0) {
        let e1 = c / 2.0 - 0.25;
        let e2 = a / 2.0 + b / 2.0 - c / 2.0 + 0.25;
        total += c1 * (e1 * lm + e2 * lp).exp() * hyp2f1_series(a, b, c, arg)?;
    }
    if c2 != Complex64::new(0.0, 0.0) {
        let e1 = 0.75 - c / 2.0;
        let e2 = 0.25 - a / 2.0 - b / 2.0 + c / 2.0;
        total += c2 * (e1 * lm + e2 * lp).exp() * hyp2f1_series(1.0 - a, 1.0 - b, 2.0 - c, arg)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ParameterProfile;
    use crate::spectrum::{solve_energies, Validity};
    use approx::assert_relative_eq;

    fn linear_well() -> ScarfPotential {
        ScarfPotential::new(
            ParameterProfile::Linear { alpha: 1.0 },
            ParameterProfile::Constant { value: 1.5 },
        )
        .unwrap()
    }

    fn state(v: &ScarfPotential, k_y: f64, n: usize) -> BoundState {
        let level = solve_energies(v, Branch::Plus, k_y, n).unwrap()[n];
        build_bound_state(v, level, level.quantum_numbers(), false).unwrap()
    }

    #[test]
    fn exponents_for_first_level() {
        let s = state(&linear_well(), 2.0, 0);
        let lambda = 0.5 + 1.75f64.sqrt();
        assert_relative_eq!(s.p.re, -lambda / 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.p.im, -0.75, epsilon = 1e-14);
        assert_relative_eq!(s.q.re, (1.0 - lambda) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.q.im, 0.75, epsilon = 1e-14);
        assert_relative_eq!(s.p.re, -0.911_437_827_8, epsilon = 1e-9);
    }

    #[test]
    fn exponents_secant_case_and_hole_branch() {
        let [p, q, _, _] = exponents(1.0, 0.0, Branch::Plus);
        assert_eq!(p, Complex64::new(-0.5, 0.0));
        assert_eq!(q, Complex64::new(0.0, 0.0));

        let (lambda, mu) = (-1.8, 1.5);
        let [p, q, _, _] = exponents(lambda, mu, Branch::Minus);
        assert_relative_eq!(p.re, (1.0 + lambda) / 2.0, epsilon = 1e-15);
        assert_relative_eq!(p.im, mu / 2.0, epsilon = 1e-15);
        assert_relative_eq!(q.re, lambda / 2.0, epsilon = 1e-15);
        assert_relative_eq!(q.im, -mu / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_level_rejected_without_override() {
        let v = linear_well();
        let level = EnergyLevel {
            energy: 1.0,
            n: 0,
            branch: Branch::Plus,
            k_y: 1.0,
            kappa: 0.0,
            valid: Validity::default(),
        };
        let q = level.quantum_numbers();
        assert!(matches!(
            build_bound_state(&v, level, q, false),
            Err(Error::InvalidLevel { .. })
        ));
        assert!(build_bound_state(&v, level, q, true).is_ok());
    }

    #[test]
    fn psi1_at_origin_and_trivial_profile() {
        let s = state(&linear_well(), 2.0, 0);
        assert_eq!(eval_psi1(&s, 0.0), Complex64::new(1.0, 0.0));

        let mut flat = s;
        flat.p = Complex64::new(0.0, 0.0);
        flat.q = Complex64::new(0.0, 0.0);
        for x in [-3.0, 0.2, 5.0] {
            assert_relative_eq!(eval_psi1(&flat, x).re, 1.0, epsilon = 1e-15);
            assert_eq!(eval_psi1_prime(&flat, x), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let v = linear_well();
        for n in 0..4 {
            let s = state(&v, 2.0, n);
            for x in [-2.5, 0.0, 0.7, 3.0] {
                let fd = central_difference(|t| eval_psi1(&s, t), x, 1e-3);
                let d = eval_psi1_prime(&s, x);
                assert!((d - fd).norm() <= 1e-8 * d.norm().max(1e-3), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn psi2_at_origin() {
        let v = linear_well();
        let s = state(&v, 2.0, 0);
        let expected = (eval_psi1_prime(&s, 0.0) + I * (-s.lambda_e)) / 2.0;
        let got = eval_psi2(&s, &v, 0.0);
        assert!((got - expected).norm() < 1e-15);
    }

    #[test]
    fn spinor_composition() {
        let v = linear_well();
        let s = state(&v, 2.0, 1);
        let sample = eval_spinor(&s, &v, 0.0, 1.0);
        assert_eq!(sample.psi_plus, eval_psi1(&s, 0.0) + eval_psi2(&s, &v, 0.0));
        let scaled = eval_spinor(&s, &v, 0.4, 3.0);
        let base = eval_spinor(&s, &v, 0.4, 1.0);
        assert_relative_eq!(
            scaled.density_minus,
            9.0 * base.density_minus,
            max_relative = 1e-14
        );
    }

    #[test]
    fn peak_normalized_density_reaches_one() {
        let v = linear_well();
        let s = state(&v, 2.0, 0);
        let grid: Vec<f64> = (0..=800).map(|i| -8.0 + 0.02 * i as f64).collect();
        let c = peak_normalization(&s, &v, &grid);
        let max = grid
            .iter()
            .map(|&x| eval_spinor(&s, &v, x, c).density_plus)
            .fold(0.0, f64::max);
        assert_relative_eq!(max, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn perturbed_energy_breaks_the_equation() {
        let v = linear_well();
        let s = state(&v, 2.0, 0);
        let mut off = s;
        off.level.energy += 0.01;
        off.lambda_e += 0.01;
        let grid: Vec<f64> = (0..=120).map(|i| -6.0 + 0.1 * i as f64).collect();
        let scale = grid
            .iter()
            .map(|&x| eval_psi1(&off, x).norm())
            .fold(0.0, f64::max);
        let worst = grid
            .iter()
            .map(|&x| {
                // Exponents stay at the old energy while the equation moves.
                let lhs = central_difference(|t| eval_psi1_prime(&s, t), x, 1e-3)
                    + ode_coefficient(off.lambda_e, off.mu_e, off.k_y, x) * eval_psi1(&s, x);
                lhs.norm() / scale
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-3, "{worst}");
    }

    #[test]
    fn general_solution_linearity_and_bound_state_limit() {
        let v = linear_well();
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(
            general_solution_psi1(&v, 2.3, 2.0, zero, zero, 0.3).unwrap(),
            zero
        );

        for n in 0..3 {
            let s = state(&v, 2.0, n);
            let ratio0 = general_solution_psi1(&v, s.energy(), 2.0, one, zero, 0.0).unwrap()
                / eval_psi1(&s, 0.0);
            for i in 0..=20 {
                let x = -1.0 + 0.1 * i as f64;
                let g = general_solution_psi1(&v, s.energy(), 2.0, one, zero, x).unwrap();
                let ratio = g / eval_psi1(&s, x);
                assert!(
                    (ratio - ratio0).norm() <= 1e-9 * ratio0.norm(),
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn general_solution_solves_ode_off_spectrum() {
        let v = linear_well();
        let (energy, k_y) = (2.37, 2.0);
        let lambda = v.lambda(energy).unwrap();
        let mu = v.mu(energy).unwrap();
        for (c1, c2) in [(1.0, 0.0), (0.0, 1.0), (0.6, -0.3)] {
            let (c1, c2) = (Complex64::new(c1, 0.0), Complex64::new(c2, 0.2));
            let f = |x: f64| general_solution_psi1(&v, energy, k_y, c1, c2, x);
            let grid: Vec<f64> = (0..=20).map(|i| -0.98 + 0.098 * i as f64).collect();
            let scale = grid
                .iter()
                .map(|&x| f(x).unwrap().norm())
                .fold(0.0, f64::max);
            for &x in &grid {
                let r = ode_residual_values(f, lambda, mu, k_y, x).unwrap();
                assert!(r.norm() / scale < 1e-6, "x={x} r={}", r.norm() / scale);
            }
        }
    }

    #[test]
    fn general_solution_outside_series_disk_errors() {
        let v = linear_well();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert!(matches!(
            general_solution_psi1(&v, 2.37, 2.0, one, zero, 1.5),
            Err(Error::SeriesDomain { .. })
        ));
    }
}
