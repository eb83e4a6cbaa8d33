use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Slack used for the inclusive nucleus boundary so that a cumulative mass
/// equal to `p` up to rounding is kept.
pub const NUCLEUS_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecodingStrategy {
    Greedy,
    Ancestral,
    TopK { k: usize },
    Nucleus { p: f64 },
}

impl DecodingStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            DecodingStrategy::Greedy => "greedy",
            DecodingStrategy::Ancestral => "ancestral",
            DecodingStrategy::TopK { .. } => "topk",
            DecodingStrategy::Nucleus { .. } => "nucleus",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DecodingStrategy::TopK { k } if k < 1 => {
                Err(Error::Config("topk requires k >= 1".into()))
            }
            DecodingStrategy::Nucleus { p } if !(p > 0.0 && p <= 1.0) => Err(Error::Config(
                format!("nucleus requires 0 < p <= 1, got {p}"),
            )),
            _ => Ok(()),
        }
    }

    /// Parses a strategy name with the given `k` / `p` parameters.
    pub fn parse(name: &str, k: usize, p: f64) -> Result<Self> {
        let s = match name {
            "greedy" => DecodingStrategy::Greedy,
            "ancestral" | "sample" => DecodingStrategy::Ancestral,
            "topk" | "top-k" => DecodingStrategy::TopK { k },
            "nucleus" | "top-p" => DecodingStrategy::Nucleus { p },
            other => {
                return Err(Error::Config(format!(
                    "unknown decoding strategy {other:?}"
                )))
            }
        };
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for DecodingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecodingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DecodingStrategy::parse(s, 10, 0.8)
    }
}

/// Restricts a descending probability vector to the strategy's support and
/// renormalizes it. Output has the same length as the input; entries outside
/// the support are zero.
pub fn renormalize(dist: &[f64], strategy: &DecodingStrategy) -> Result<Vec<f64>> {
    strategy.validate()?;
    if let Some(i) = dist.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::UnsortedDistribution(i + 1));
    }
    if dist.is_empty() {
        return Ok(Vec::new());
    }
    let keep = match *strategy {
        DecodingStrategy::Ancestral => return Ok(dist.to_vec()),
        DecodingStrategy::Greedy => 1,
        DecodingStrategy::TopK { k } => k.min(dist.len()),
        DecodingStrategy::Nucleus { p } => {
            let mut cum = 0.0;
            let mut keep = 0;
            for &x in dist {
                cum += x;
                if cum <= p + NUCLEUS_EPS {
                    keep += 1;
                } else {
                    break;
                }
            }
            keep.max(1)
        }
    };
    let z: f64 = dist[..keep].iter().sum();
    let mut out = vec![0.0; dist.len()];
    if z > 0.0 {
        for (o, &x) in out.iter_mut().zip(&dist[..keep]) {
            *o = x / z;
        }
    } else {
        out[0] = 1.0;
    }
    Ok(out)
}

/// Draws an index from a categorical distribution.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last = i;
        if u < cum {
            return i;
        }
    }
    last
}
