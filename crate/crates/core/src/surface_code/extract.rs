//! Logical Pauli channel of one correction round under code-capacity noise.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Decoder, PauliError, SurfaceCode};
use crate::channel::{Channel, PauliChannel};
use crate::error::{Error, Result};

/// Samples per independently seeded Monte Carlo chunk.
pub const CHUNK: u64 = 1 << 16;

/// Largest distance for which every error pattern is enumerated.
pub const EXACT_MAX_DISTANCE: usize = 3;

const CLASSES: [&str; 4] = ["I", "X", "Y", "Z"];

/// Product of two logical classes indexed `I, X, Y, Z`, phases dropped.
fn class_mul(a: usize, b: usize) -> usize {
    const BITS: [u8; 4] = [0b00, 0b10, 0b11, 0b01];
    let v = BITS[a] ^ BITS[b];
    BITS.iter().position(|&x| x == v).expect("closed under products")
}

fn class_index(c: char) -> usize {
    match c {
        'I' => 0,
        'X' => 1,
        'Y' => 2,
        _ => 3,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// X, Y, Z each with probability `p/3`.
    Depolarizing,
    /// Independent X and Z flips, each with probability `p`.
    IndependentXz,
    /// Z with probability `p`.
    DephasingOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub p_phys: f64,
    /// Scales `p_phys` for the simulated noise; the assumed noise keeps `p_phys`.
    #[serde(default = "one")]
    pub mismatch_factor: f64,
}

fn one() -> f64 {
    1.0
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, p_phys: f64) -> Result<Self> {
        let m = Self { kind, p_phys, mismatch_factor: 1.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn with_mismatch(mut self, factor: f64) -> Result<Self> {
        self.mismatch_factor = factor;
        self.validate()?;
        Ok(self)
    }

    /// The noise the compiler believes in: same kind and `p_phys`, no mismatch.
    pub fn assumed(&self) -> Self {
        Self { mismatch_factor: 1.0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.p_phys) {
            return Err(Error::InvalidParameter(format!("p_phys {} outside [0, 0.5]", self.p_phys)));
        }
        if !(self.mismatch_factor > 0.0 && self.mismatch_factor.is_finite()) {
            return Err(Error::InvalidParameter(format!("mismatch factor {} must be positive", self.mismatch_factor)));
        }
        if self.effective_p() > 1.0 {
            return Err(Error::InvalidParameter("p_phys × mismatch_factor exceeds 1".into()));
        }
        Ok(())
    }

    pub fn effective_p(&self) -> f64 {
        self.p_phys * self.mismatch_factor
    }

    /// Single-qubit probabilities of `I, X, Y, Z`.
    pub fn qubit_probs(&self) -> [f64; 4] {
        let p = self.effective_p();
        match self.kind {
            NoiseKind::Depolarizing => [1.0 - p, p / 3.0, p / 3.0, p / 3.0],
            NoiseKind::IndependentXz => [(1.0 - p) * (1.0 - p), p * (1.0 - p), p * p, p * (1.0 - p)],
            NoiseKind::DephasingOnly => [1.0 - p, 0.0, 0.0, p],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Estimation {
    ExactEnumeration,
    MonteCarlo { samples: u64, seed: u64 },
}

/// A change to the baseline decoder's output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum RecoveryPolicy {
    Baseline,
    /// Append a logical Pauli (`I`, `X`, `Y` or `Z`) after the correction.
    Frame { label: char },
    /// Append the logical `X` or `Z` operator whenever the full syndrome is listed.
    CosetFlip { logical: char, syndromes: Vec<u128> },
}

impl RecoveryPolicy {
    pub fn frames() -> Vec<RecoveryPolicy> {
        ['I', 'X', 'Y', 'Z'].into_iter().map(|label| RecoveryPolicy::Frame { label }).collect()
    }

    pub fn label(&self) -> String {
        match self {
            RecoveryPolicy::Baseline => "baseline".into(),
            RecoveryPolicy::Frame { label } => format!("frame-{label}"),
            RecoveryPolicy::CosetFlip { logical, syndromes } => {
                format!("coset-flip-{logical}-{}", syndromes.len())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            RecoveryPolicy::Baseline => true,
            RecoveryPolicy::Frame { label } => "IXYZ".contains(*label),
            RecoveryPolicy::CosetFlip { logical, .. } => "XZ".contains(*logical),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad recovery policy {self:?}")))
        }
    }

    fn apply(&self, class: usize, syndrome: u128) -> usize {
        match self {
            RecoveryPolicy::Baseline => class,
            RecoveryPolicy::Frame { label } => class_mul(class, class_index(*label)),
            RecoveryPolicy::CosetFlip { logical, syndromes } => {
                if syndromes.contains(&syndrome) {
                    class_mul(class, class_index(*logical))
                } else {
                    class
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalRoundChannel {
    pub distance: usize,
    pub noise: NoiseModel,
    #[serde(flatten)]
    pub estimation: Estimation,
    pub policy: RecoveryPolicy,
    pub pauli_probs: BTreeMap<String, f64>,
    pub standard_errors: BTreeMap<String, f64>,
}

impl LogicalRoundChannel {
    pub fn pauli_channel(&self) -> Result<PauliChannel> {
        PauliChannel::new(1, self.pauli_probs.clone())
    }

    pub fn channel(&self) -> Result<Channel> {
        self.pauli_channel()?.to_channel()
    }

    /// Probability that the logical state is disturbed at all.
    pub fn logical_error_rate(&self) -> f64 {
        1.0 - self.pauli_probs.get("I").copied().unwrap_or(0.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Per-pattern outcome: baseline class of the residual and the full syndrome.
fn classify(code: &SurfaceCode, decoder: &Decoder, error: &PauliError) -> Result<(usize, u128)> {
    let s = code.syndrome(error);
    let correction = decoder.decode(s)?;
    let residual = error.compose(&correction);
    Ok((class_index(code.logical_class(&residual)?), s))
}

fn exact_tally(code: &SurfaceCode, decoder: &Decoder, noise: &NoiseModel, policies: &[RecoveryPolicy]) -> Result<Vec<[f64; 4]>> {
    let n = code.n_data();
    let probs = noise.qubit_probs();
    let allowed: Vec<usize> = (0..4).filter(|&k| probs[k] > 0.0).collect();
    let base = allowed.len();
    let total = base.pow(n as u32);
    let mut tally = vec![[0.0; 4]; policies.len()];
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let mut e = PauliError::identity();
        let mut prob = 1.0;
        for (q, &dgt) in digits.iter().enumerate() {
            let k = allowed[dgt];
            prob *= probs[k];
            let bit = 1u128 << q;
            match k {
                1 => e.x_mask |= bit,
                2 => {
                    e.x_mask |= bit;
                    e.z_mask |= bit;
                }
                3 => e.z_mask |= bit,
                _ => {}
            }
        }
        let (class, s) = classify(code, decoder, &e)?;
        for (t, policy) in tally.iter_mut().zip(policies) {
            t[policy.apply(class, s)] += prob;
        }
        for dgt in digits.iter_mut() {
            *dgt += 1;
            if *dgt < base {
                break;
            }
            *dgt = 0;
        }
    }
    Ok(tally)
}

fn sample_error<R: Rng>(n: usize, cumulative: &[f64; 3], rng: &mut R) -> PauliError {
    let mut e = PauliError::identity();
    for q in 0..n {
        let u: f64 = rng.random();
        if u < cumulative[0] {
            continue;
        }
        let bit = 1u128 << q;
        if u < cumulative[1] {
            e.x_mask |= bit;
        } else if u < cumulative[2] {
            e.x_mask |= bit;
            e.z_mask |= bit;
        } else {
            e.z_mask |= bit;
        }
    }
    e
}

fn monte_carlo_tally(
    code: &SurfaceCode,
    decoder: &Decoder,
    noise: &NoiseModel,
    policies: &[RecoveryPolicy],
    samples: u64,
    seed: u64,
) -> Result<Vec<[u64; 4]>> {
    let probs = noise.qubit_probs();
    let cumulative = [probs[0], probs[0] + probs[1], probs[0] + probs[1] + probs[2]];
    let n = code.n_data();
    let chunks = samples.div_ceil(CHUNK);
    let partials: Result<Vec<Vec<[u64; 4]>>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = CHUNK.min(samples - chunk * CHUNK);
            let mut tally = vec![[0u64; 4]; policies.len()];
            for _ in 0..count {
                let e = sample_error(n, &cumulative, &mut rng);
                let (class, s) = if e == PauliError::identity() { (0, 0) } else { classify(code, decoder, &e)? };
                for (t, policy) in tally.iter_mut().zip(policies) {
                    t[policy.apply(class, s)] += 1;
                }
            }
            Ok(tally)
        })
        .collect();
    let mut total = vec![[0u64; 4]; policies.len()];
    for part in partials? {
        for (t, p) in total.iter_mut().zip(part) {
            for k in 0..4 {
                t[k] += p[k];
            }
        }
    }
    Ok(total)
}

/// One logical channel per policy, all estimated from the same error patterns.
pub fn logical_channel_family(
    code: &SurfaceCode,
    noise: &NoiseModel,
    estimation: Estimation,
    policies: &[RecoveryPolicy],
) -> Result<Vec<LogicalRoundChannel>> {
    if policies.is_empty() {
        return Err(Error::InvalidParameter("no recovery policies given".into()));
    }
    noise.validate()?;
    for p in policies {
        p.validate()?;
    }
    let decoder = Decoder::new(code);
    let (probs, errors): (Vec<[f64; 4]>, Vec<[f64; 4]>) = match estimation {
        Estimation::ExactEnumeration => {
            if code.distance() > EXACT_MAX_DISTANCE {
                return Err(Error::ResourceLimit(format!(
                    "exact enumeration covers 4^(d²) patterns and is limited to d ≤ {EXACT_MAX_DISTANCE}; \
                     use Monte Carlo for d = {}",
                    code.distance()
                )));
            }
            let t = exact_tally(code, &decoder, noise, policies)?;
            let zeros = vec![[0.0; 4]; t.len()];
            (t, zeros)
        }
        Estimation::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("Monte Carlo needs at least one sample".into()));
            }
            let counts = monte_carlo_tally(code, &decoder, noise, policies, samples, seed)?;
            let n = samples as f64;
            counts
                .iter()
                .map(|c| {
                    let p = c.map(|k| k as f64 / n);
                    let se = p.map(|q| (q * (1.0 - q) / n).sqrt());
                    (p, se)
                })
                .unzip()
        }
    };
    Ok(policies
        .iter()
        .zip(probs.iter().zip(&errors))
        .map(|(policy, (p, se))| LogicalRoundChannel {
            distance: code.distance(),
            noise: *noise,
            estimation,
            policy: policy.clone(),
            pauli_probs: CLASSES.iter().zip(p).map(|(l, &v)| (l.to_string(), v)).collect(),
            standard_errors: CLASSES.iter().zip(se).map(|(l, &v)| (l.to_string(), v)).collect(),
        })
        .collect())
}

/// The baseline decoder's logical channel.
pub fn extract_logical_channel(code: &SurfaceCode, noise: &NoiseModel, estimation: Estimation) -> Result<LogicalRoundChannel> {
    let mut family = logical_channel_family(code, noise, estimation, &[RecoveryPolicy::Baseline])?;
    Ok(family.remove(0))
}
