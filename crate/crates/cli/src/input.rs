//! Parsing and normalization of amplitude lists given on the command line.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scissorsim_core::QuditVector;

/// Relative norm deviation above which an input is renormalized with a warning.
pub const WARN_TOL: f64 = 1e-6;
/// Relative norm deviation above which an input is rejected.
pub const REJECT_TOL: f64 = 1e-2;

/// Comma-separated complex tokens such as `0.6,0.8i,0.1-0.2i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexList(pub Vec<Complex64>);

impl FromStr for ComplexList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                Complex64::from_str(tok).map_err(|_| format!("malformed complex amplitude {tok:?}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err("amplitudes must be finite".into());
        }
        Ok(Self(values))
    }
}

/// Either explicit amplitudes or a seeded Haar-random draw.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSource {
    Values(Vec<Complex64>),
    Random(u64),
}

impl FromStr for GammaSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().strip_prefix("random:") {
            Some(seed) => seed
                .trim()
                .parse()
                .map(Self::Random)
                .map_err(|_| format!("malformed seed {seed:?}")),
            None => ComplexList::from_str(s).map(|l| Self::Values(l.0)),
        }
    }
}

impl fmt::Display for GammaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Random(seed) => write!(f, "random:{seed}"),
            Self::Values(v) => {
                let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// Scales `values` to unit norm. Returns the result and, when the input was
/// off by more than [`WARN_TOL`], a warning to show the user.
pub fn normalize(what: &str, values: &[Complex64]) -> Result<(Vec<Complex64>, Option<String>), String> {
    let norm = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let deviation = (norm - 1.0).abs();
    if norm == 0.0 || deviation > REJECT_TOL {
        return Err(format!(
            "{what} have norm {norm}, which is too far from 1 to renormalize"
        ));
    }
    let warning = (deviation > WARN_TOL).then(|| format!("{what} have norm {norm}; renormalized to 1"));
    Ok((values.iter().map(|v| v / norm).collect(), warning))
}

pub fn resolve_gammas(source: &GammaSource, d: usize) -> Result<(QuditVector, Option<String>), String> {
    match source {
        GammaSource::Random(seed) => {
            let q = QuditVector::haar(d, &mut ChaCha8Rng::seed_from_u64(*seed)).map_err(|e| e.to_string())?;
            Ok((q, None))
        }
        GammaSource::Values(values) => {
            if values.len() != d {
                return Err(format!("expected {d} gammas for d = {d}, got {}", values.len()));
            }
            let (values, warning) = normalize("gammas", values)?;
            let (q, _) = QuditVector::normalized(values).map_err(|e| e.to_string())?;
            Ok((q, warning))
        }
    }
}

/// Parses `from,to,steps` into a grid of efficiencies, endpoints included.
pub fn eta_grid(range: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = range.split(',').map(str::trim).collect();
    let [from, to, steps] = parts.as_slice() else {
        return Err(format!("expected FROM,TO,STEPS, got {range:?}"));
    };
    let from: f64 = from.parse().map_err(|_| format!("malformed range start {from:?}"))?;
    let to: f64 = to.parse().map_err(|_| format!("malformed range end {to:?}"))?;
    let steps: usize = steps.parse().map_err(|_| format!("malformed step count {steps:?}"))?;
    for eta in [from, to] {
        if !(0.0..=1.0).contains(&eta) {
            return Err(format!("efficiency {eta} is outside [0, 1]"));
        }
    }
    match steps {
        0 => Err("step count must be positive".into()),
        1 if from == to => Ok(vec![from]),
        1 => Err("a single step needs FROM equal to TO".into()),
        _ => Ok((0..steps)
            .map(|k| {
                if k + 1 == steps {
                    to
                } else {
                    from + (to - from) * k as f64 / (steps - 1) as f64
                }
            })
            .collect()),
    }
}

pub fn check_eta(eta: f64) -> Result<f64, String> {
    if (0.0..=1.0).contains(&eta) {
        Ok(eta)
    } else {
        Err(format!("efficiency {eta} is outside [0, 1]"))
    }
}
