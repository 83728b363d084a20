//! Exact geometry of the unit ball inscribed in the cube `[-1, 1]^d`.
//!
//! Everything here is deterministic. Ratios are evaluated in log space so the
//! same code path covers `d = 2` and `d = 300`, where `2^d` and `Γ(d/2 + 1)`
//! both overflow an `f64`.
//!
//! Odd dimensions need `Γ(d/2 + 1)`, which carries a factor of `√π`. The Gamma
//! evaluation below uses the machine constant for π, so recovering π from an
//! *exact* probability is a consistency check rather than a derivation. The
//! Monte Carlo estimator only ever feeds in empirical hit fractions.

use std::f64::consts::{E, LN_2, PI};
use std::fmt;
use std::num::NonZeroU32;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_PI: f64 = 1.144_729_885_849_400_2;

// ln(2 * sqrt(e / pi))
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;

// Lanczos approximation parameters (Pugh, g = 10.900511, n = 11).
const LANCZOS_R: f64 = 10.900511;
#[allow(clippy::excessive_precision)]
const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_6e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_4,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_6,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412_2e-2,
    -5.719_261_174_043_057_8e-4,
    4.633_994_733_599_056_4e-6,
    -2.719_949_084_886_077e-9,
];

/// Number of coordinates of the sampling space. Always at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(NonZeroU32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        NonZeroU32::new(d).map(Dimension).ok_or(Error::ZeroDimension)
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.get())
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;

    fn try_from(d: u32) -> Result<Self> {
        Dimension::new(d)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.get()
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// Exact volumes for one dimension, bundled for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactGeometry {
    pub dimension: Dimension,
    pub ball_volume: f64,
    pub cube_volume: f64,
    pub inside_probability: f64,
}

impl ExactGeometry {
    pub fn new(d: Dimension) -> Self {
        ExactGeometry {
            dimension: d,
            ball_volume: unit_ball_volume(d),
            cube_volume: 2f64.powi(d.get() as i32),
            inside_probability: inside_probability(d),
        }
    }
}

/// Natural log of the Gamma function for `x > 0`.
///
/// Lanczos approximation for `x >= 0.5`, reflection formula below that.
/// Absolute error stays under `1e-12` on `[0.5, 200]`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return Err(Error::GammaDomain(x));
    }
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        let reflected = log_gamma(1.0 - x)?;
        return Ok(LN_PI - (PI * x).sin().ln() - reflected);
    }
    let sum = LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |acc, (k, dk)| acc + dk / (x + k as f64 - 1.0));
    Ok(sum.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / E).ln())
}

// ln Γ(d/2 + 1); the argument is at least 1.5, so it is always in the domain.
fn log_gamma_half_d_plus_one(d: Dimension) -> f64 {
    log_gamma(d.as_f64() / 2.0 + 1.0).expect("argument is >= 1.5")
}

/// ln of the volume of the unit ball in `d` dimensions.
pub fn log_unit_ball_volume(d: Dimension) -> f64 {
    d.as_f64() / 2.0 * LN_PI - log_gamma_half_d_plus_one(d)
}

/// Volume of the unit ball, `π^(d/2) / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: Dimension) -> f64 {
    match d.get() {
        1 => 2.0,
        2 => PI,
        _ => log_unit_ball_volume(d).exp(),
    }
}

/// ln of the probability that a uniform point of the cube lands in the ball.
pub fn log_inside_probability(d: Dimension) -> f64 {
    if d.get() == 1 {
        return 0.0;
    }
    log_unit_ball_volume(d) - d.as_f64() * LN_2
}

/// Probability that a uniform point of `[-1, 1]^d` lies in the unit ball.
///
/// Exactly 1 for `d = 1`. Underflows to 0 only past `d ≈ 1000`; use
/// [`log_inside_probability`] there.
pub fn inside_probability(d: Dimension) -> f64 {
    match d.get() {
        1 => 1.0,
        2 => PI / 4.0,
        _ => log_inside_probability(d).exp(),
    }
}

/// Recovers π from a hit probability: `(P · 2^d · Γ(d/2 + 1))^(2/d)`.
///
/// `d = 1` and `d = 2` use their closed forms (`π·P²` and `4P`); everything
/// else goes through logs.
pub fn pi_from_probability(p: f64, d: Dimension) -> Result<f64> {
    if p.is_nan() || p > 1.0 {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    if p <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    Ok(match d.get() {
        1 => PI * p * p,
        2 => 4.0 * p,
        _ => {
            let df = d.as_f64();
            let log_sum = p.ln() + df * LN_2 + log_gamma_half_d_plus_one(d);
            (2.0 / df * log_sum).exp()
        }
    })
}

/// ln of the Stirling-form asymptote `(1/√(πd)) · (πe/(2d))^(d/2)`.
pub fn log_stirling_ratio_approx(d: Dimension) -> f64 {
    let df = d.as_f64();
    -0.5 * (LN_PI + df.ln()) + df / 2.0 * (LN_PI + 1.0 - LN_2 - df.ln())
}

/// Stirling-form asymptote of [`inside_probability`]. Meaningful for `d >= 2`;
/// it overestimates the exact value by roughly a factor `1 + 1/(6d)`.
pub fn stirling_ratio_approx(d: Dimension) -> f64 {
    log_stirling_ratio_approx(d).exp()
}
