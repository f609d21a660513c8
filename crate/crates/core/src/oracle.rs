//! Shooting-method oracle that checks the closed forms without touching the
//! special-function path.
//!
//! The `ψ₁` equation `u'' + Q(x) u = 0` is integrated as a first-order complex
//! system with an adaptive Dormand–Prince 5(4) pair, inwards from `x = ∓L`
//! where the solution is started on its decaying asymptotic mode. Eigenvalues
//! are zeros of the Wronskian of the two traces at `x = 0`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::ScarfPotential;
use crate::spectrum::kappa_at;
use crate::wavefunction::{eval_psi1, ode_coefficient, BoundState};

/// Minimum `κ L` for the asymptotic start to be trusted.
pub const MIN_KAPPA_L: f64 = 8.0;
/// Shot energies are accepted only below this Wronskian magnitude.
pub const WRONSKIAN_ACCEPT: f64 = 1e-5;
const GOLDEN_WIDTH: f64 = 1e-9;
const RENORM_THRESHOLD: f64 = 1e100;
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootingConfig {
    /// Matching half-width `L`; traces start at `x = ∓L`.
    pub half_width: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub scan_points: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            half_width: 12.0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            scan_points: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Samples of one integrated solution, in integration order (ending at `x = 0`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub x: Vec<f64>,
    pub u: Vec<Complex64>,
    pub du: Vec<Complex64>,
}

impl Trace {
    fn push(&mut self, x: f64, y: [Complex64; 2]) {
        self.x.push(x);
        self.u.push(y[0]);
        self.du.push(y[1]);
    }

    fn rescale(&mut self, factor: f64) {
        for v in self.u.iter_mut().chain(self.du.iter_mut()) {
            *v *= factor;
        }
    }

    /// Value and derivative at the final point.
    pub fn end(&self) -> (Complex64, Complex64) {
        let last = self.x.len() - 1;
        (self.u[last], self.du[last])
    }

    pub fn value_at(&self, x: f64) -> Option<Complex64> {
        self.x.iter().position(|&t| t == x).map(|i| self.u[i])
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Equation {
    lambda: f64,
    mu: f64,
    k_y: f64,
}

impl Equation {
    fn rhs(&self, x: f64, y: [Complex64; 2]) -> [Complex64; 2] {
        [
            y[1],
            -ode_coefficient(self.lambda, self.mu, self.k_y, x) * y[0],
        ]
    }
}

fn combine(
    y: [Complex64; 2],
    h: f64,
    k: &[[Complex64; 2]; 7],
    w: &[f64],
    stages: usize,
) -> [Complex64; 2] {
    let mut out = y;
    for (j, kj) in k.iter().enumerate().take(stages) {
        if w[j] != 0.0 {
            out[0] += kj[0] * (h * w[j]);
            out[1] += kj[1] * (h * w[j]);
        }
    }
    out
}

/// Integrates from `x0` to `x1`, landing exactly on every point of `outputs`
/// (which must lie between them, ordered along the direction of travel).
fn integrate(
    eq: &Equation,
    x0: f64,
    x1: f64,
    y0: [Complex64; 2],
    outputs: &[f64],
    cfg: &ShootingConfig,
) -> Result<Trace> {
    let dir = (x1 - x0).signum();
    let mut trace = Trace::default();
    let mut x = x0;
    let mut y = y0;
    trace.push(x, y);

    let mut targets: Vec<f64> = outputs
        .iter()
        .copied()
        .filter(|&t| (t - x0) * dir > 0.0 && (x1 - t) * dir > 0.0)
        .collect();
    targets.push(x1);
    let mut next_target = 0;

    let mut h = 1e-2 * dir;
    let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
    k[0] = eq.rhs(x, y);
    let mut steps = 0;

    while next_target < targets.len() {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::StepUnderflow { x });
        }
        let target = targets[next_target];
        let mut landing = false;
        if (x + h - target) * dir >= 0.0 {
            h = target - x;
            landing = true;
        }
        if h.abs() < 1e-14 * x.abs().max(1.0) && !landing {
            return Err(Error::StepUnderflow { x });
        }

        for s in 1..7 {
            let ys = combine(y, h, &k, &A[s], s);
            k[s] = eq.rhs(x + C[s] * h, ys);
        }
        let y_new = combine(y, h, &k, &A[6], 6);
        let err_vec = combine([Complex64::new(0.0, 0.0); 2], h, &k, &E, 7);

        let mut err_sq = 0.0;
        for c in 0..2 {
            let scale = cfg.abs_tol + cfg.rel_tol * y[c].norm().max(y_new[c].norm());
            err_sq += (err_vec[c].norm() / scale).powi(2);
        }
        let err = (err_sq / 2.0).sqrt();
        if !err.is_finite() {
            return Err(Error::NonFinite("ODE step"));
        }

        if err <= 1.0 {
            x = if landing { target } else { x + h };
            y = y_new;
            // FSAL: the last stage is the derivative at the new point.
            k[0] = k[6];
            let growth = y[0].norm();
            if growth > RENORM_THRESHOLD {
                let factor = 1.0 / growth;
                y[0] *= factor;
                y[1] *= factor;
                k[0] = [k[0][0] * factor, k[0][1] * factor];
                trace.rescale(factor);
            }
            trace.push(x, y);
            if landing {
                next_target += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(trace)
}

fn equation_at(
    potential: &ScarfPotential,
    energy: f64,
    k_y: f64,
    cfg: &ShootingConfig,
) -> Result<(Equation, f64)> {
    let lambda = potential.lambda(energy)?;
    let mu = potential.mu(energy)?;
    let kappa = kappa_at(potential, k_y, energy)?;
    if kappa * cfg.half_width < MIN_KAPPA_L {
        return Err(Error::AsymptoticRegime {
            kappa,
            half_width: cfg.half_width,
        });
    }
    Ok((Equation { lambda, mu, k_y }, kappa))
}

/// Integrates `ψ₁` from `x = -L` (left) or `x = +L` (right) to `x = 0`, starting
/// on the decaying mode `u = 1`, `u' = ±κ`.
pub fn integrate_psi1_ode(
    potential: &ScarfPotential,
    energy: f64,
    k_y: f64,
    side: Side,
    cfg: &ShootingConfig,
) -> Result<Trace> {
    integrate_psi1_ode_through(potential, energy, k_y, side, cfg, &[])
}

/// As [`integrate_psi1_ode`], additionally landing on each point of `outputs`
/// that lies on the traversed half-line.
pub fn integrate_psi1_ode_through(
    potential: &ScarfPotential,
    energy: f64,
    k_y: f64,
    side: Side,
    cfg: &ShootingConfig,
    outputs: &[f64],
) -> Result<Trace> {
    let (eq, kappa) = equation_at(potential, energy, k_y, cfg)?;
    let one = Complex64::new(1.0, 0.0);
    let (start, slope) = match side {
        Side::Left => (-cfg.half_width, kappa),
        Side::Right => (cfg.half_width, -kappa),
    };
    let mut ordered: Vec<f64> = outputs.to_vec();
    ordered.sort_by(f64::total_cmp);
    if side == Side::Right {
        ordered.reverse();
    }
    integrate(&eq, start, 0.0, [one, one * slope], &ordered, cfg)
}

/// `W(E) = u_L(0) u_R'(0) - u_L'(0) u_R(0)` with each side scaled so that
/// `|u|² + |u'|² = 1` at the matching point.
pub fn wronskian_mismatch(
    potential: &ScarfPotential,
    energy: f64,
    k_y: f64,
    cfg: &ShootingConfig,
) -> Result<Complex64> {
    let left = integrate_psi1_ode(potential, energy, k_y, Side::Left, cfg)?;
    let right = integrate_psi1_ode(potential, energy, k_y, Side::Right, cfg)?;
    let (ul, dul) = unit(left.end());
    let (ur, dur) = unit(right.end());
    Ok(ul * dur - dul * ur)
}

fn unit((u, du): (Complex64, Complex64)) -> (Complex64, Complex64) {
    let scale = (u.norm_sqr() + du.norm_sqr()).sqrt();
    (u / scale, du / scale)
}

/// Scans `|W|` over `scan_points` uniformly spaced energies, refines every
/// local minimum by golden-section search on `|W|²` and keeps those with
/// `|W| < 1e-5`. Energies where the equation is not set up (profile
/// singularity, `|k_y| < |μ|`, too small `κL`) are skipped.
pub fn shoot_energies(
    potential: &ScarfPotential,
    k_y: f64,
    range: [f64; 2],
    cfg: &ShootingConfig,
) -> Vec<f64> {
    let [lo, hi] = range;
    let points = cfg.scan_points.max(3);
    let step = (hi - lo) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    let magnitude = |e: f64| -> Option<f64> {
        wronskian_mismatch(potential, e, k_y, cfg)
            .ok()
            .map(|w| w.norm())
    };
    let values: Vec<Option<f64>> = grid.par_iter().map(|&e| magnitude(e)).collect();

    let candidates: Vec<usize> = (0..points)
        .filter(|&i| {
            let Some(v) = values[i] else { return false };
            let left_ok = i == 0 || values[i - 1].is_none_or(|w| v <= w);
            let right_ok = i + 1 == points || values[i + 1].is_none_or(|w| v < w);
            left_ok && right_ok
        })
        .collect();

    let mut found: Vec<f64> = candidates
        .par_iter()
        .filter_map(|&i| {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(points - 1)];
            let (e, w) = golden_section(|e| magnitude(e).map_or(f64::INFINITY, |w| w * w), a, b);
            (w.sqrt() < WRONSKIAN_ACCEPT).then_some(e)
        })
        .collect();
    found.sort_by(f64::total_cmp);
    found.dedup_by(|a, b| (*a - *b).abs() < 1e-7);
    found
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > GOLDEN_WIDTH {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    [(mid, fm), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("three candidates")
}

/// Left and right traces at one energy, both landing on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub energy: f64,
    pub left: Trace,
    pub right: Trace,
}

impl SolutionPair {
    /// Glued solution on the grid: the right trace is rescaled to agree with
    /// the left one in value at `x = 0`.
    pub fn glued(&self, grid: &[f64]) -> Option<Vec<Complex64>> {
        let (ul, _) = self.left.end();
        let (ur, _) = self.right.end();
        let join = ul / ur;
        grid.iter()
            .map(|&x| {
                if x < 0.0 {
                    self.left.value_at(x)
                } else if x > 0.0 {
                    self.right.value_at(x).map(|u| u * join)
                } else {
                    Some(ul)
                }
            })
            .collect()
    }
}

/// Integrates both sides at `energy`, landing on every grid point.
pub fn integrate_pair(
    potential: &ScarfPotential,
    energy: f64,
    k_y: f64,
    grid: &[f64],
    cfg: &ShootingConfig,
) -> Result<SolutionPair> {
    if let Some(&x) = grid.iter().find(|x| x.abs() >= cfg.half_width) {
        return Err(Error::Config(format!(
            "grid point {x} lies outside the shooting half-width {}",
            cfg.half_width
        )));
    }
    Ok(SolutionPair {
        energy,
        left: integrate_psi1_ode_through(potential, energy, k_y, Side::Left, cfg, grid)?,
        right: integrate_psi1_ode_through(potential, energy, k_y, Side::Right, cfg, grid)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeReport {
    /// `max |c u(x) - ψ₁(x)| / max |ψ₁|` over the grid.
    pub max_rel_dev: f64,
}

/// Fits the oracle solution to the closed-form `ψ₁` with one complex factor
/// chosen at `x = 0` and reports the worst deviation over the grid.
pub fn compare_states(
    state: &BoundState,
    pair: &SolutionPair,
    grid: &[f64],
) -> Result<ShapeReport> {
    let glued = pair
        .glued(grid)
        .ok_or_else(|| Error::Config("trace does not cover the comparison grid".into()))?;
    let (u0, _) = pair.left.end();
    let scale = eval_psi1(state, 0.0) / u0;
    let exact: Vec<Complex64> = grid.iter().map(|&x| eval_psi1(state, x)).collect();
    let peak = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = glued
        .iter()
        .zip(&exact)
        .map(|(u, e)| (u * scale - e).norm())
        .fold(0.0, f64::max);
    Ok(ShapeReport {
        max_rel_dev: worst / peak,
    })
}
