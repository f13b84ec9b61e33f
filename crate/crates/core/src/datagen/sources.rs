use std::f64::consts::TAU;

use crate::math::{standardize_columns, Matrix, Rng};

/// Number of distinct signal shapes in the bank.
pub const BANK_SIZE: usize = 6;

/// Standard deviation of the Gaussian jitter added to deterministic shapes.
pub const SOURCE_NOISE: f64 = 0.05;

const SINE_PERIOD: f64 = 23.7;
const SQUARE_PERIOD: f64 = 41.3;
const SAW_PERIOD: f64 = 31.9;
const CHIRP_SWEEP: f64 = 257.0;
const CHIRP_F0: f64 = 1.0 / 50.0;
const CHIRP_F1: f64 = 1.0 / 10.0;
const AM_CARRIER: f64 = 13.1;
const AM_ENVELOPE: f64 = 173.0;

/// Signal shapes, in column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceShape {
    Sine,
    Square,
    Sawtooth,
    Chirp,
    AmSine,
    UniformNoise,
}

impl SourceShape {
    pub fn for_column(j: usize) -> Self {
        match j % BANK_SIZE {
            0 => Self::Sine,
            1 => Self::Square,
            2 => Self::Sawtooth,
            3 => Self::Chirp,
            4 => Self::AmSine,
            _ => Self::UniformNoise,
        }
    }
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// One raw (unstandardized) column. `stretch` lengthens every period so
/// repeated cycles through the bank do not reuse the same frequencies.
fn column(shape: SourceShape, n: usize, stretch: f64, rng: &mut Rng) -> Vec<f64> {
    if shape == SourceShape::UniformNoise {
        return (0..n).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
    }
    let offset = rng.uniform() * 1000.0;
    let envelope_offset = rng.uniform() * AM_ENVELOPE * stretch;
    (0..n)
        .map(|i| {
            let t = i as f64 + offset;
            let clean = match shape {
                SourceShape::Sine => (TAU * t / (SINE_PERIOD * stretch)).sin(),
                SourceShape::Square => {
                    if frac(t / (SQUARE_PERIOD * stretch)) < 0.5 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                SourceShape::Sawtooth => 2.0 * frac(t / (SAW_PERIOD * stretch)) - 1.0,
                SourceShape::Chirp => {
                    let len = CHIRP_SWEEP * stretch;
                    let tau = t.rem_euclid(len);
                    let (f0, f1) = (CHIRP_F0 / stretch, CHIRP_F1 / stretch);
                    (TAU * (f0 * tau + (f1 - f0) * tau * tau / (2.0 * len))).sin()
                }
                SourceShape::AmSine => {
                    let env = 1.0 + 0.5 * (TAU * (i as f64 + envelope_offset) / (AM_ENVELOPE * stretch)).sin();
                    env * (TAU * t / (AM_CARRIER * stretch)).sin()
                }
                SourceShape::UniformNoise => unreachable!(),
            };
            clean + SOURCE_NOISE * rng.normal()
        })
        .collect()
}

/// `n × d` independent source signals, each column standardized. Column `j`
/// uses shape `j mod 6`; the k-th pass through the bank stretches periods by
/// `1 + 0.37·k`.
pub fn gen_sources(n: usize, d: usize, rng: &mut Rng) -> Matrix {
    assert!(n >= 1 && d >= 1, "gen_sources needs n, d >= 1");
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let stretch = 1.0 + 0.37 * (j / BANK_SIZE) as f64;
            column(SourceShape::for_column(j), n, stretch, rng)
        })
        .collect();
    let raw = Matrix::from_columns(&cols).expect("finite source bank");
    if n < 2 {
        return Matrix::zeros(n, d);
    }
    standardize_columns(&raw).expect("at least two rows")
}
