//! Real-line integrals of exponentially decaying integrands: the modified norm,
//! orthogonality overlaps, and the pointwise modified continuity residual.
//!
//! Integrals are truncated at `L = (ln(1/tol) + 10) / (2κ)`, widened when the
//! tails would still dominate, and the finite part
//! is handled by globally adaptive Gauss–Kronrod (7, 15) panels. The error
//! estimate is the sum of the panel `|K15 - G7|` differences plus an
//! exponential tail bound taken from the integrand at `±L`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::ScarfPotential;
use crate::wavefunction::{central_difference, eval_spinor, BoundState};

/// Evaluation budget for one adaptive integration.
pub const MAX_EVALUATIONS: usize = 1_000_000;
const TRUNCATION_MARGIN: f64 = 10.0;
const INITIAL_PANELS: usize = 32;
/// Largest fraction of the error budget the truncated tails may take.
const TAIL_SHARE: f64 = 0.25;
const MAX_WIDENINGS: usize = 8;

/// Integrand values the adaptive rule can accumulate.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T> {
    pub value: T,
    /// Absolute error bound, including the truncated tails.
    pub error_estimate: f64,
    /// Truncation half-width `L`.
    pub half_width: f64,
    pub evaluations: usize,
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel<T> {
    lo: f64,
    hi: f64,
    value: T,
    error: f64,
    abs_value: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<T: QuadValue, F: Fn(f64) -> T>(f: &F, lo: f64, hi: f64) -> Panel<T> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_value = fc.magnitude() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        kronrod = kronrod + (f1 + f2) * WGK[j];
        abs_value += (f1.magnitude() + f2.magnitude()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = (kronrod - gauss).magnitude() * half;
    Panel {
        lo,
        hi,
        value,
        error,
        abs_value: abs_value * half.abs(),
    }
}

/// Half-width used for a decay rate and tolerance.
pub fn truncation_half_width(kappa: f64, tol: f64) -> f64 {
    ((1.0 / tol).ln() + TRUNCATION_MARGIN) / (2.0 * kappa)
}

/// Integrates `f` over the real line, given `|f(x)| ≲ C e^{-2κ|x|} (1+|x|)^m`.
///
/// `tol` is relative to `∫|f|`, which keeps overlap integrals that cancel to
/// zero well defined. The truncation starts at [`truncation_half_width`] and
/// widens while the tail bound at `±L` would dominate the error budget, which
/// happens for widely spread high-degree states.
pub fn integrate_decaying<T, F>(f: F, kappa: f64, tol: f64) -> Result<QuadratureResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::NonPositiveDecay(kappa));
    }
    let mut half_width = truncation_half_width(kappa, tol);
    let mut spent = 0;
    for _ in 0..MAX_WIDENINGS {
        match attempt(&f, kappa, half_width, tol)? {
            Attempt::Done(mut r) => {
                r.evaluations += spent;
                return Ok(r);
            }
            Attempt::TailDominated {
                tail,
                abs_total,
                evaluations,
            } => {
                spent += evaluations;
                let excess = tail / (TAIL_SHARE * tol * abs_total.max(f64::MIN_POSITIVE));
                half_width += excess.ln().max(1.0) / (2.0 * kappa);
            }
        }
    }
    Err(Error::QuadratureBudget {
        error_estimate: f64::INFINITY,
        evaluations: spent,
    })
}

/// Same as [`integrate_decaying`] with an explicit, fixed truncation half-width.
///
/// Fails with [`Error::QuadratureBudget`] when the tail bound at `±L` alone
/// exceeds the requested accuracy.
pub fn integrate_truncated<T, F>(
    f: F,
    kappa: f64,
    half_width: f64,
    tol: f64,
) -> Result<QuadratureResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::NonPositiveDecay(kappa));
    }
    match attempt(&f, kappa, half_width, tol)? {
        Attempt::Done(r) => Ok(r),
        Attempt::TailDominated {
            tail, evaluations, ..
        } => Err(Error::QuadratureBudget {
            error_estimate: tail,
            evaluations,
        }),
    }
}

enum Attempt<T> {
    Done(QuadratureResult<T>),
    TailDominated {
        tail: f64,
        abs_total: f64,
        evaluations: usize,
    },
}

fn attempt<T, F>(f: &F, kappa: f64, half_width: f64, tol: f64) -> Result<Attempt<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let tail = (f(-half_width).magnitude() + f(half_width).magnitude()) / (2.0 * kappa);
    let mut evaluations = 2;

    let step = 2.0 * half_width / INITIAL_PANELS as f64;
    let mut heap = BinaryHeap::with_capacity(4 * INITIAL_PANELS);
    for i in 0..INITIAL_PANELS {
        let lo = -half_width + step * i as f64;
        let hi = if i + 1 == INITIAL_PANELS {
            half_width
        } else {
            lo + step
        };
        heap.push(gauss_kronrod(f, lo, hi));
        evaluations += 15;
    }
    let abs_total: f64 = heap.iter().map(|p| p.abs_value).sum();
    if tail > TAIL_SHARE * tol * abs_total {
        return Ok(Attempt::TailDominated {
            tail,
            abs_total,
            evaluations,
        });
    }

    loop {
        let (mut value, mut error, mut abs_total) = (T::default(), tail, 0.0);
        for panel in heap.iter() {
            value = value + panel.value;
            error += panel.error;
            abs_total += panel.abs_value;
        }
        if !(error.is_finite() && value.magnitude().is_finite()) {
            return Err(Error::NonFinite("integrand"));
        }
        if error <= tol * abs_total.max(f64::MIN_POSITIVE) {
            return Ok(Attempt::Done(QuadratureResult {
                value,
                error_estimate: error,
                half_width,
                evaluations,
            }));
        }
        if evaluations + 30 > MAX_EVALUATIONS {
            return Err(Error::QuadratureBudget {
                error_estimate: error,
                evaluations,
            });
        }
        let worst = heap.pop().expect("panel set is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Panel cannot be split further in f64.
            return Err(Error::QuadratureBudget {
                error_estimate: error,
                evaluations,
            });
        }
        heap.push(gauss_kronrod(f, worst.lo, mid));
        heap.push(gauss_kronrod(f, mid, worst.hi));
        evaluations += 30;
    }
}

fn decay_of(state: &BoundState) -> Result<f64> {
    let kappa = state.level.kappa;
    if kappa > 0.0 {
        Ok(kappa)
    } else {
        Err(Error::NonPositiveDecay(kappa))
    }
}

/// `N = ∫ [1 - ∂V/∂E] (|ψ₊|² + |ψ₋|²) dx`.
///
/// Computed even when the sign condition fails, in which case the value may
/// be negative.
pub fn modified_norm(
    state: &BoundState,
    potential: &ScarfPotential,
    tol: f64,
) -> Result<QuadratureResult<f64>> {
    let kappa = decay_of(state)?;
    integrate_decaying(norm_integrand(state, potential)?, kappa, tol)
}

/// [`modified_norm`] on the fixed window `[-L, L]`.
pub fn modified_norm_truncated(
    state: &BoundState,
    potential: &ScarfPotential,
    half_width: f64,
    tol: f64,
) -> Result<QuadratureResult<f64>> {
    let kappa = decay_of(state)?;
    integrate_truncated(norm_integrand(state, potential)?, kappa, half_width, tol)
}

fn norm_integrand<'a>(
    state: &'a BoundState,
    potential: &'a ScarfPotential,
) -> Result<impl Fn(f64) -> f64 + 'a> {
    let energy = state.energy();
    // Validate the profile derivative once; the closure cannot fail afterwards.
    potential.norm_weight(0.0, energy)?;
    Ok(move |x: f64| {
        let w = potential.norm_weight(x, energy).unwrap_or(f64::NAN);
        let s = eval_spinor(state, potential, x, 1.0);
        w * (s.density_plus + s.density_minus)
    })
}

/// `∫ w_mn(x) [ψ₊,m* ψ₊,n + ψ₋,m* ψ₋,n] dx` with the orthogonality weight
/// `w_mn = 1 - (V(x,Em) - V(x,En))/(Em - En)`.
///
/// Degenerate energies switch to the norm weight, which is the `m → n` limit.
pub fn ortho_overlap(
    sm: &BoundState,
    sn: &BoundState,
    potential: &ScarfPotential,
    tol: f64,
) -> Result<QuadratureResult<Complex64>> {
    let kappa = 0.5 * (decay_of(sm)? + decay_of(sn)?);
    let (em, en) = (sm.energy(), sn.energy());
    let degenerate = potential.ortho_weight(0.0, em, en).is_err();
    if degenerate {
        potential.norm_weight(0.0, en)?;
    }
    let weight = |x: f64| {
        if degenerate {
            potential.norm_weight(x, en)
        } else {
            potential.ortho_weight(x, em, en)
        }
        .unwrap_or(f64::NAN)
    };
    let integrand = |x: f64| {
        let a = eval_spinor(sm, potential, x, 1.0);
        let b = eval_spinor(sn, potential, x, 1.0);
        (a.psi_plus.conj() * b.psi_plus + a.psi_minus.conj() * b.psi_minus) * weight(x)
    };
    integrate_decaying(integrand, kappa, tol)
}

/// Overlap matrix normalized by the diagonal: `O_mn / sqrt(N_m N_n)`.
pub fn normalized_overlap_matrix(
    states: &[BoundState],
    potential: &ScarfPotential,
    tol: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let norms = states
        .iter()
        .map(|s| modified_norm(s, potential, tol).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = vec![vec![Complex64::new(0.0, 0.0); states.len()]; states.len()];
    for (m, sm) in states.iter().enumerate() {
        for (n, sn) in states.iter().enumerate() {
            let overlap = ortho_overlap(sm, sn, potential, tol)?.value;
            matrix[m][n] = overlap / (norms[m].abs() * norms[n].abs()).sqrt();
        }
    }
    Ok(matrix)
}

/// Density `P = ψ₊,m* ψ₊,n + ψ₋,m* ψ₋,n` at `x`.
pub fn transition_density(
    sm: &BoundState,
    sn: &BoundState,
    potential: &ScarfPotential,
    x: f64,
) -> Complex64 {
    let a = eval_spinor(sm, potential, x, 1.0);
    let b = eval_spinor(sn, potential, x, 1.0);
    a.psi_plus.conj() * b.psi_plus + a.psi_minus.conj() * b.psi_minus
}

/// `x` component of the current, `Ψ_m† σ₁ Ψ_n = ψ₊,m* ψ₋,n + ψ₋,m* ψ₊,n`.
pub fn current_x(
    sm: &BoundState,
    sn: &BoundState,
    potential: &ScarfPotential,
    x: f64,
) -> Complex64 {
    let a = eval_spinor(sm, potential, x, 1.0);
    let b = eval_spinor(sn, potential, x, 1.0);
    a.psi_plus.conj() * b.psi_minus + a.psi_minus.conj() * b.psi_plus
}

/// `|∂P/∂t + i[V(x,En) - V(x,Em)] P + ∂J_x/∂x|` for the stationary pair.
///
/// The time derivative is exact, `-i(En - Em) P`; the y-current carries equal
/// `k_y` phases and has zero divergence. `∂J_x/∂x` is a fourth-order central
/// difference with step `1e-3 max(1, |x|)`.
pub fn continuity_residual(
    sm: &BoundState,
    sn: &BoundState,
    potential: &ScarfPotential,
    x: f64,
) -> Result<f64> {
    let i = Complex64::new(0.0, 1.0);
    let (em, en) = (sm.energy(), sn.energy());
    let density = transition_density(sm, sn, potential, x);
    let dv = potential.eval(x, en)? - potential.eval(x, em)?;
    let h = 1e-3 * x.abs().max(1.0);
    let div_j = central_difference(|t| current_x(sm, sn, potential, t), x, h);
    let total = -i * (en - em) * density + i * dv * density + div_j;
    Ok(total.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ParameterProfile;
    use crate::spectrum::{solve_energies, Branch};
    use crate::wavefunction::build_bound_state;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    #[test]
    fn closed_form_integrals() {
        let r = integrate_decaying(|x| sech(x).powi(2), 1.0, 1e-12).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-12);
        assert!(r.error_estimate <= 1e-12 * 2.0 * 1.0001);

        let r = integrate_decaying(sech, 0.5, 1e-12).unwrap();
        assert_relative_eq!(r.value, PI, max_relative = 1e-12);

        let r = integrate_decaying(|x| (-x * x).exp(), 1.0, 1e-10).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn complex_integrand_and_cancellation() {
        // Odd imaginary part integrates to zero; tolerance is relative to ∫|f|.
        let r = integrate_decaying(|x| Complex64::new(sech(x), x * sech(x)), 0.5, 1e-11).unwrap();
        assert_relative_eq!(r.value.re, PI, max_relative = 1e-11);
        assert!(r.value.im.abs() < 1e-10);
    }

    #[test]
    fn rejects_non_positive_decay() {
        assert!(matches!(
            integrate_decaying(sech, 0.0, 1e-10),
            Err(Error::NonPositiveDecay(_))
        ));
    }

    #[test]
    fn half_width_formula() {
        let l = truncation_half_width(1.0, 1e-12);
        assert_relative_eq!(l, (1e12f64.ln() + 10.0) / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn doubling_half_width_stays_within_error() {
        let f = |x: f64| sech(x).powi(2) * (1.0 + x * x);
        let r = integrate_decaying(f, 1.0, 1e-10).unwrap();
        let wide = integrate_truncated(f, 1.0, 2.0 * r.half_width, 1e-10).unwrap();
        assert!((r.value - wide.value).abs() < r.error_estimate);
    }

    fn linear_states(n_max: usize) -> (ScarfPotential, Vec<BoundState>) {
        let v = ScarfPotential::new(
            ParameterProfile::Linear { alpha: 1.0 },
            ParameterProfile::Constant { value: 1.5 },
        )
        .unwrap();
        let states = solve_energies(&v, Branch::Plus, 2.0, n_max)
            .unwrap()
            .into_iter()
            .map(|l| build_bound_state(&v, l, l.quantum_numbers(), false).unwrap())
            .collect();
        (v, states)
    }

    /// Composite trapezoid on [-40, 40]; spectrally accurate for analytic decaying integrands.
    fn trapezoid<F: Fn(f64) -> f64>(f: F, steps: usize) -> f64 {
        let (a, b) = (-40.0, 40.0);
        let h = (b - a) / steps as f64;
        let interior: f64 = (1..steps).map(|i| f(a + h * i as f64)).sum();
        h * (0.5 * (f(a) + f(b)) + interior)
    }

    #[test]
    fn modified_norm_matches_trapezoid_oracle() {
        let (v, states) = linear_states(0);
        let s = &states[0];
        let n = modified_norm(s, &v, 1e-12).unwrap().value;
        let oracle = trapezoid(
            |x| {
                let t = eval_spinor(s, &v, x, 1.0);
                sech(x) * (t.density_plus + t.density_minus)
            },
            16_000,
        );
        assert!(n > 0.0);
        assert_relative_eq!(n, oracle, max_relative = 1e-9);
    }

    #[test]
    fn norm_is_quadratic_in_amplitude() {
        let (v, states) = linear_states(1);
        let s = &states[1];
        let base = modified_norm(s, &v, 1e-12).unwrap().value;
        let c = 2.5;
        let scaled = integrate_decaying(
            |x| {
                let t = eval_spinor(s, &v, x, c);
                v.norm_weight(x, s.energy()).unwrap() * (t.density_plus + t.density_minus)
            },
            s.level.kappa,
            1e-12,
        )
        .unwrap()
        .value;
        assert_relative_eq!(scaled, c * c * base, max_relative = 1e-11);
    }

    #[test]
    fn overlap_diagonal_reduces_to_norm() {
        let (v, states) = linear_states(1);
        let n = modified_norm(&states[1], &v, 1e-12).unwrap().value;
        let o = ortho_overlap(&states[1], &states[1], &v, 1e-12)
            .unwrap()
            .value;
        assert_relative_eq!(o.re, n, max_relative = 1e-9);
        assert!(o.im.abs() < 1e-9 * n);
    }

    #[test]
    fn first_pair_is_orthogonal() {
        let (v, states) = linear_states(1);
        let nm = modified_norm(&states[0], &v, 1e-12).unwrap().value;
        let nn = modified_norm(&states[1], &v, 1e-12).unwrap().value;
        let o = ortho_overlap(&states[0], &states[1], &v, 1e-12)
            .unwrap()
            .value;
        assert!(o.norm() / (nm * nn).sqrt() < 1e-8);
    }

    #[test]
    fn continuity_residual_diagonal_and_pair() {
        let (v, states) = linear_states(1);
        let grid: Vec<f64> = (0..=80).map(|i| -4.0 + 0.1 * i as f64).collect();
        for (sm, sn) in [(&states[0], &states[1]), (&states[1], &states[1])] {
            let scale = grid
                .iter()
                .map(|&x| transition_density(sm, sn, &v, x).norm())
                .fold(0.0, f64::max);
            for &x in &grid {
                let r = continuity_residual(sm, sn, &v, x).unwrap();
                assert!(r < 1e-7 * scale, "x={x} r={r}");
            }
        }
    }

    #[test]
    fn continuity_residual_detects_energy_shift() {
        let (v, states) = linear_states(1);
        let mut shifted = states[1];
        shifted.level.energy += 0.01;
        let grid: Vec<f64> = (0..=80).map(|i| -4.0 + 0.1 * i as f64).collect();
        let exact = grid
            .iter()
            .map(|&x| continuity_residual(&states[0], &states[1], &v, x).unwrap())
            .fold(0.0, f64::max);
        let perturbed = grid
            .iter()
            .map(|&x| continuity_residual(&states[0], &shifted, &v, x).unwrap())
            .fold(0.0, f64::max);
        assert!(perturbed > 100.0 * exact, "{perturbed} vs {exact}");
    }
}
