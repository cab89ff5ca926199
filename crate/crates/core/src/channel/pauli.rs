//! Pauli labels, Pauli channels and the fixed Pauli-basis ordering.
//!
//! Pauli strings are ordered lexicographically over `{I, X, Y, Z}ⁿ` with the
//! leftmost qubit most significant, so for one qubit the order is `I, X, Y, Z`
//! and for two qubits `II, IX, IY, IZ, XI, …, ZZ`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Channel;
use crate::error::{Error, Result};
use crate::linalg::{cr, pauli_string};

const SYMBOLS: [char; 4] = ['I', 'X', 'Y', 'Z'];

pub fn pauli_labels(n_qubits: usize) -> Vec<String> {
    (0..4usize.pow(n_qubits as u32))
        .map(|idx| label_from_index(idx, n_qubits))
        .collect()
}

pub fn label_from_index(mut idx: usize, n_qubits: usize) -> String {
    let mut chars = vec!['I'; n_qubits];
    for q in (0..n_qubits).rev() {
        chars[q] = SYMBOLS[idx % 4];
        idx /= 4;
    }
    chars.into_iter().collect()
}

pub fn index_of_label(label: &str) -> Result<usize> {
    label.chars().try_fold(0usize, |acc, ch| {
        let digit = SYMBOLS
            .iter()
            .position(|&s| s == ch)
            .ok_or_else(|| Error::InvalidParameter(format!("bad Pauli label '{label}'")))?;
        Ok(acc * 4 + digit)
    })
}

fn symplectic(ch: char) -> (bool, bool) {
    match ch {
        'X' => (true, false),
        'Y' => (true, true),
        'Z' => (false, true),
        _ => (false, false),
    }
}

fn from_symplectic(x: bool, z: bool) -> char {
    match (x, z) {
        (false, false) => 'I',
        (true, false) => 'X',
        (true, true) => 'Y',
        (false, true) => 'Z',
    }
}

/// Product of two Pauli strings with the global phase dropped.
pub fn multiply_labels(a: &str, b: &str) -> Result<String> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "Pauli labels '{a}' and '{b}' act on different qubit counts"
        )));
    }
    Ok(a.chars()
        .zip(b.chars())
        .map(|(p, q)| {
            let (px, pz) = symplectic(p);
            let (qx, qz) = symplectic(q);
            from_symplectic(px ^ qx, pz ^ qz)
        })
        .collect())
}

/// A probabilistic mixture of Pauli conjugations `ρ ↦ Σ_P p_P · P ρ P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    n_qubits: usize,
    probs: BTreeMap<String, f64>,
}

impl PauliChannel {
    /// Probabilities must lie in `[0, 1]` and sum to one within `1e-9`.
    pub fn new(n_qubits: usize, probs: BTreeMap<String, f64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("Pauli channel on zero qubits".into()));
        }
        let mut sum = 0.0;
        for (label, &p) in &probs {
            if label.chars().count() != n_qubits {
                return Err(Error::InvalidParameter(format!(
                    "label '{label}' does not act on {n_qubits} qubit(s)"
                )));
            }
            index_of_label(label)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "probability {p} for '{label}' outside [0, 1]"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "Pauli probabilities sum to {sum}"
            )));
        }
        Ok(Self { n_qubits, probs })
    }

    pub fn from_pairs<'a>(n_qubits: usize, pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (label, p) in pairs {
            *probs.entry(label.to_string()).or_insert(0.0) += p;
        }
        Self::new(n_qubits, probs)
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut probs = BTreeMap::new();
        probs.insert("I".repeat(n_qubits), 1.0);
        Self { n_qubits, probs }
    }

    /// Single-qubit dephasing with flip probability `p`.
    pub fn dephasing(p: f64) -> Result<Self> {
        Self::from_pairs(1, [("I", 1.0 - p), ("Z", p)])
    }

    /// Isotropic single-qubit noise: each non-identity Pauli with probability `p/3`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        Self::from_pairs(1, [("I", 1.0 - p), ("X", p / 3.0), ("Y", p / 3.0), ("Z", p / 3.0)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn probs(&self) -> &BTreeMap<String, f64> {
        &self.probs
    }

    pub fn prob(&self, label: &str) -> f64 {
        self.probs.get(label).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Probabilities in the fixed lexicographic Pauli order.
    pub fn dense_probs(&self) -> Vec<f64> {
        pauli_labels(self.n_qubits).iter().map(|l| self.prob(l)).collect()
    }

    /// The channel obtained by applying the Pauli `frame` after this one.
    pub fn with_frame(&self, frame: &str) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (label, &p) in &self.probs {
            *probs.entry(multiply_labels(frame, label)?).or_insert(0.0) += p;
        }
        Ok(Self { n_qubits: self.n_qubits, probs })
    }

    /// Composition of two Pauli channels (convolution of their distributions).
    pub fn then(&self, next: &PauliChannel) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (a, &pa) in &self.probs {
            for (b, &pb) in &next.probs {
                *probs.entry(multiply_labels(b, a)?).or_insert(0.0) += pa * pb;
            }
        }
        Ok(Self { n_qubits: self.n_qubits, probs })
    }

    /// Product distribution on the joint register, `self` on the leftmost qubits.
    pub fn tensor(&self, other: &PauliChannel) -> Self {
        let mut probs = BTreeMap::new();
        for (a, &pa) in &self.probs {
            for (b, &pb) in &other.probs {
                *probs.entry(format!("{a}{b}")).or_insert(0.0) += pa * pb;
            }
        }
        Self { n_qubits: self.n_qubits + other.n_qubits, probs }
    }

    /// Diagonal of the PTM: `λ_a = Σ_b p_b · (±1)`, minus when `P_a`, `P_b` anticommute.
    pub fn ptm_diagonal(&self) -> Vec<f64> {
        let labels = pauli_labels(self.n_qubits);
        let probs = self.dense_probs();
        labels
            .iter()
            .map(|la| {
                labels
                    .iter()
                    .zip(&probs)
                    .map(|(lb, &pb)| if super::labels_commute(la, lb) { pb } else { -pb })
                    .sum()
            })
            .collect()
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let ops = self
            .probs
            .iter()
            .filter(|(_, &p)| p > 0.0)
            .map(|(label, &p)| Ok(pauli_string(label)? * cr(p.sqrt())))
            .collect::<Result<Vec<_>>>()?;
        Channel::from_kraus(ops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_lexicographic() {
        assert_eq!(pauli_labels(1), ["I", "X", "Y", "Z"]);
        let two = pauli_labels(2);
        assert_eq!(two[0], "II");
        assert_eq!(two[1], "IX");
        assert_eq!(two[4], "XI");
        assert_eq!(two[15], "ZZ");
        for (k, l) in two.iter().enumerate() {
            assert_eq!(index_of_label(l).unwrap(), k);
        }
    }

    #[test]
    fn z_frame_relabels_i_z_and_x_y() {
        let ch = PauliChannel::from_pairs(1, [("I", 0.7), ("X", 0.1), ("Y", 0.05), ("Z", 0.15)]).unwrap();
        let framed = ch.with_frame("Z").unwrap();
        assert!((framed.prob("I") - 0.15).abs() < 1e-15);
        assert!((framed.prob("Z") - 0.7).abs() < 1e-15);
        assert!((framed.prob("X") - 0.05).abs() < 1e-15);
        assert!((framed.prob("Y") - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(PauliChannel::from_pairs(1, [("I", 0.5)]).is_err());
        assert!(PauliChannel::from_pairs(1, [("I", 1.2), ("Z", -0.2)]).is_err());
        assert!(PauliChannel::from_pairs(1, [("II", 1.0)]).is_err());
        assert!(PauliChannel::from_pairs(1, [("Q", 1.0)]).is_err());
    }

    #[test]
    fn dephasing_composition_follows_contrast_product() {
        let (p, q) = (0.1, 0.23);
        let r = PauliChannel::dephasing(p).unwrap().then(&PauliChannel::dephasing(q).unwrap()).unwrap();
        let expected = (1.0 - (1.0 - 2.0 * p) * (1.0 - 2.0 * q)) / 2.0;
        assert!((r.prob("Z") - expected).abs() < 1e-15);
    }
}
