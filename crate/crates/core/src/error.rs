use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "Jacobi polynomial of degree {degree} undefined: A+1 = {shifted} is a nonpositive integer"
    )]
    JacobiDegenerate { degree: usize, shifted: Complex64 },

    #[error("hypergeometric series did not converge within {terms} terms")]
    SeriesNonConvergence { terms: usize },

    #[error(
        "hypergeometric series argument |z| = {modulus} outside the convergence guard {limit}"
    )]
    SeriesDomain { modulus: f64, limit: f64 },

    #[error("hypergeometric lower parameter c = {c} is a nonpositive integer")]
    SeriesPole { c: Complex64 },

    #[error("inverse-power profile is undefined at E = 0")]
    ProfileDomain,

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("energies {em} and {en} are degenerate; use the norm weight instead")]
    DegenerateEnergies { em: f64, en: f64 },

    #[error("wavenumber domain violated: |k_y| = {k_y} < |mu(E)| = {mu} at E = {energy}")]
    WavenumberDomain { k_y: f64, mu: f64, energy: f64 },

    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),

    #[error("quantization residual is independent of the energy; no spectrum exists")]
    NoSpectrum,

    #[error("no sign change of the quantization residual on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("no energy level found for n = {n} on the default search window")]
    BracketingFailure { n: usize },

    #[error("root finder did not converge after {iterations} iterations")]
    RootNotConverged { iterations: usize },

    #[error("level n = {n} at E = {energy} is not a valid bound state")]
    InvalidLevel { n: usize, energy: f64 },

    #[error(
        "quadrature tolerance not met: error {error_estimate:e} after {evaluations} evaluations"
    )]
    QuadratureBudget {
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("decay rate must be positive, got {0}")]
    NonPositiveDecay(f64),

    #[error("ODE step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error(
        "decay rate kappa = {kappa} too small for half-width {half_width} (need kappa*L >= 8)"
    )]
    AsymptoticRegime { kappa: f64, half_width: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("configuration error: {0}")]
    Config(String),
}
