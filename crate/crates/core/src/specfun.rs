//! Complex-parameter Jacobi polynomials and the Gauss hypergeometric series.
//!
//! Everything here works directly with `Complex64`. The bound-state exponents
//! and Jacobi parameters are genuinely complex (they carry `2iμ` terms), so
//! the canonical Jacobi path is the terminating hypergeometric sum rather
//! than the three-term recurrence.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Series cap for the non-terminating hypergeometric sum.
pub const HYP2F1_MAX_TERMS: usize = 500;
/// Largest |z| accepted by [`hyp2f1_series`] when the series does not terminate.
pub const HYP2F1_RADIUS_GUARD: f64 = 0.8;
const HYP2F1_REL_STOP: f64 = 1e-16;

/// Neumaier-compensated accumulator applied componentwise.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: Complex64,
    carry: Complex64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, term: Complex64) {
        let (re, cre) = two_sum(self.sum.re, term.re);
        let (im, cim) = two_sum(self.sum.im, term.im);
        self.sum = Complex64::new(re, im);
        self.carry += Complex64::new(cre, cim);
    }

    pub(crate) fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Returns `Some(k)` when `z` is exactly the nonpositive integer `-k`.
pub(crate) fn nonpositive_integer(z: Complex64) -> Option<usize> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() && z.re > -(usize::MAX as f64) {
        Some((-z.re) as usize)
    } else {
        None
    }
}

/// Rising factorial `(a)_k = a(a+1)...(a+k-1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: Complex64, k: usize) -> Complex64 {
    (0..k).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (a + j as f64))
}

/// Jacobi polynomial `P_n^{(A,B)}(z)` for complex parameters and argument.
///
/// Evaluated by the three-term recurrence in the degree, which stays accurate
/// where the terminating sum
/// `[(A+1)_n / n!] Σ_k (-n)_k (n+A+B+1)_k / ((A+1)_k k!) ((1-z)/2)^k`
/// cancels badly (moderate `|z|`, large `n`). The sum is used only when a
/// recurrence denominator vanishes, which needs real integer `A+B`.
pub fn jacobi_poly(n: usize, a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    if n == 0 {
        return Ok(one);
    }
    let shifted = a + 1.0;
    if let Some(k) = nonpositive_integer(shifted) {
        if k < n {
            return Err(Error::JacobiDegenerate { degree: n, shifted });
        }
    }

    let value = jacobi_recurrence(n, a, b, z).unwrap_or_else(|| jacobi_sum(n, a, b, z));
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonFinite("jacobi_poly"));
    }
    Ok(value)
}

/// DLMF 18.9.1 forward recurrence; `None` if a leading coefficient is (nearly) zero.
fn jacobi_recurrence(n: usize, a: Complex64, b: Complex64, z: Complex64) -> Option<Complex64> {
    let s = a + b;
    let mut prev = Complex64::new(1.0, 0.0);
    let mut cur = (a + 1.0) + (s + 2.0) * (z - 1.0) * 0.5;
    let (a2, b2) = (a * a, b * b);
    for k in 2..=n {
        let kf = k as f64;
        let c = s + 2.0 * kf;
        let lead = 2.0 * kf * (s + kf) * (c - 2.0);
        if lead.norm() <= 1e-10 * (kf * kf * kf) {
            return None;
        }
        let mid = (c - 1.0) * (c * (c - 2.0) * z + a2 - b2);
        let back = 2.0 * (a + (kf - 1.0)) * (b + (kf - 1.0)) * c;
        let next = (mid * cur - back * prev) / lead;
        prev = cur;
        cur = next;
    }
    Some(cur)
}

fn jacobi_sum(n: usize, a: Complex64, b: Complex64, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let shifted = a + 1.0;
    let w = (one - z) * 0.5;
    let upper = a + b + (n as f64 + 1.0);
    let mut term = one;
    let mut acc = CompensatedSum::default();
    acc.add(term);
    for k in 0..n {
        let kf = k as f64;
        term = term * ((kf - n as f64) * (upper + kf)) / ((shifted + kf) * (kf + 1.0)) * w;
        acc.add(term);
    }
    // (A+1)_n / n!, built as a running product to stay in range for large n.
    let prefactor = (0..n).fold(one, |p, j| p * (shifted + j as f64) / (j as f64 + 1.0));
    prefactor * acc.value()
}

/// Derivative `d/dz P_n^{(A,B)}(z) = ((n+A+B+1)/2) P_{n-1}^{(A+1,B+1)}(z)`.
pub fn jacobi_poly_derivative(
    n: usize,
    a: Complex64,
    b: Complex64,
    z: Complex64,
) -> Result<Complex64> {
    if n == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let scale = (a + b + (n as f64 + 1.0)) * 0.5;
    Ok(scale * jacobi_poly(n - 1, a + 1.0, b + 1.0, z)?)
}

/// Partial-sum evaluation of the Gauss hypergeometric series `2F1(a, b; c; z)`.
///
/// Terminating cases (`a` or `b` a nonpositive integer) are summed exactly for
/// any `z`. Otherwise `|z|` must not exceed [`HYP2F1_RADIUS_GUARD`] and the sum
/// stops once a term drops below `1e-16` of the partial sum.
pub fn hyp2f1_series(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64> {
    let terminating = match (nonpositive_integer(a), nonpositive_integer(b)) {
        (Some(m), Some(k)) => Some(m.min(k)),
        (Some(m), None) | (None, Some(m)) => Some(m),
        (None, None) => None,
    };

    if let Some(pole) = nonpositive_integer(c) {
        // The series is only usable if it terminates before (c)_k vanishes.
        match terminating {
            Some(last) if last <= pole => {}
            _ => return Err(Error::SeriesPole { c }),
        }
    }

    let mut term = Complex64::new(1.0, 0.0);
    let mut acc = CompensatedSum::default();
    acc.add(term);

    if let Some(last) = terminating {
        for k in 0..last {
            let kf = k as f64;
            term = term * (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
            acc.add(term);
        }
        let value = acc.value();
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite("hyp2f1_series"));
        }
        return Ok(value);
    }

    let modulus = z.norm();
    if modulus > HYP2F1_RADIUS_GUARD {
        return Err(Error::SeriesDomain {
            modulus,
            limit: HYP2F1_RADIUS_GUARD,
        });
    }

    for k in 0..HYP2F1_MAX_TERMS - 1 {
        let kf = k as f64;
        term = term * (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        acc.add(term);
        let sum = acc.value();
        if !(sum.re.is_finite() && sum.im.is_finite()) {
            return Err(Error::NonFinite("hyp2f1_series"));
        }
        if term.norm() < HYP2F1_REL_STOP * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNonConvergence {
        terms: HYP2F1_MAX_TERMS,
    })
}
