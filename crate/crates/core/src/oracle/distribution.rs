use std::collections::BTreeMap;

use super::OracleError;

/// Outcome distribution over `width` classical bits. Index bit `k` is
/// classical bit `k`; bitstrings print with the highest bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    width: usize,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(width: usize, probs: Vec<f64>) -> Result<Self, OracleError> {
        if probs.len() != 1usize << width {
            return Err(OracleError::DimensionMismatch(format!(
                "{} probabilities for {width} bits",
                probs.len()
            )));
        }
        Ok(Self { width, probs })
    }

    /// All mass on one outcome.
    pub fn point(width: usize, outcome: usize) -> Self {
        let mut probs = vec![0.0; 1 << width];
        probs[outcome] = 1.0;
        Self { width, probs }
    }

    pub fn from_map(width: usize, map: &BTreeMap<String, f64>) -> Result<Self, OracleError> {
        let mut probs = vec![0.0; 1 << width];
        for (bits, p) in map {
            probs[parse_bitstring(bits, width)?] += p;
        }
        Ok(Self { width, probs })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.probs[outcome]
    }

    pub fn bitstring(&self, outcome: usize) -> String {
        (0..self.width)
            .rev()
            .map(|k| if (outcome >> k) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Nonzero entries keyed by bitstring.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, p)| (self.bitstring(i), *p))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_map()).expect("map serializes")
    }

    /// `p′(b) = (1−e)p(b) + e·p(b ⊕ bit)`.
    pub fn apply_readout_flip(&self, bit: usize, e: f64) -> Result<Self, OracleError> {
        if !(0.0..=1.0).contains(&e) {
            return Err(OracleError::Domain(format!(
                "readout error {e} outside [0, 1]"
            )));
        }
        if bit >= self.width {
            return Err(OracleError::DimensionMismatch(format!(
                "bit {bit} of a {}-bit distribution",
                self.width
            )));
        }
        let mask = 1usize << bit;
        let probs = (0..self.probs.len())
            .map(|b| (1.0 - e) * self.probs[b] + e * self.probs[b ^ mask])
            .collect();
        Ok(Self {
            width: self.width,
            probs,
        })
    }

    /// Marginal probability that classical bit `bit` reads `value`.
    pub fn bit_marginal(&self, bit: usize, value: bool) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| ((i >> bit) & 1 == 1) == value)
            .map(|(_, p)| p)
            .sum()
    }

    /// Outcomes carrying more than `tol` probability.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.probs.len())
            .filter(|&i| self.probs[i] > tol)
            .collect()
    }
}

pub fn parse_bitstring(bits: &str, width: usize) -> Result<usize, OracleError> {
    if bits.len() != width || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(OracleError::DimensionMismatch(format!(
            "bitstring {bits:?} is not {width} bits"
        )));
    }
    Ok(usize::from_str_radix(bits, 2).unwrap_or(0))
}

fn same_width(p: &Distribution, q: &Distribution) -> Result<(), OracleError> {
    if p.width != q.width {
        return Err(OracleError::DimensionMismatch(format!(
            "{} vs {} bits",
            p.width, q.width
        )));
    }
    Ok(())
}

/// `(1/√2)·√(Σ(√P − √Q)²)`.
pub fn hellinger(p: &Distribution, q: &Distribution) -> Result<f64, OracleError> {
    same_width(p, q)?;
    let s: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a.max(0.0).sqrt() - b.max(0.0).sqrt()).powi(2))
        .sum();
    Ok((s.sqrt() / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
}

/// Total probability assigned to `targets`.
pub fn success_probability(p: &Distribution, targets: &[usize]) -> Result<f64, OracleError> {
    let mut total = 0.0;
    for &t in targets {
        if t >= p.probs.len() {
            return Err(OracleError::DimensionMismatch(format!(
                "target {t} outside {} bits",
                p.width
            )));
        }
        total += p.probs[t];
    }
    Ok(total)
}
