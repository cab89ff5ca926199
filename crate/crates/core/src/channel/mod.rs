//! Quantum channels in Kraus, Choi and Pauli-transfer form.
//!
//! Conventions used everywhere in the crate:
//!
//! * Choi matrix `J(E) = (E ⊗ id)(|Φ⟩⟨Φ|)` with the *unnormalized*
//!   `|Φ⟩ = Σ_j |j⟩|j⟩`, so `Tr J = dim_in`. The output factor comes first:
//!   `J[(a·dim_in + i), (b·dim_in + j)] = ⟨a| E(|i⟩⟨j|) |b⟩`.
//! * Superoperators act on column-stacked matrices.
//! * PTM entries are `R_ab = 2⁻ⁿ Tr[P_a E(P_b)]` in the lexicographic Pauli
//!   order of [`pauli::pauli_labels`].

pub mod coords;
pub mod metrics;
pub mod pauli;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, cr, frobenius, identity, kron, max_abs, min_eigenvalue, partial_trace_first,
    pauli_string, zeros, ComplexMatrix, RealMatrix,
};
use crate::weights::MixtureWeights;

pub use coords::{affine_dim, choi_coordinates, coordinates_to_choi, ChoiCoordinates, TpBasis};
pub use metrics::{choi_trace_distance, diamond_distance_bounds, state_trace_distance, DiamondBounds, DiamondOptions};
pub use pauli::PauliChannel;

/// Eigenvalues above this count towards the Kraus rank.
pub const RANK_TOL: f64 = 1e-10;
/// Choi eigenvalues in `[-CP_TOL, 0)` are rounding noise; below that the map is not CP.
pub const CP_TOL: f64 = 1e-10;
pub const TP_TOL: f64 = 1e-10;
/// Above this many pairwise products, composition goes through the superoperator.
const MAX_COMPOSED_KRAUS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationKind {
    Kraus,
    Choi,
    Ptm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Kraus(Vec<ComplexMatrix>),
    Choi(ComplexMatrix),
    Ptm(RealMatrix),
}

/// A linear map between matrix spaces, normally CPTP.
///
/// Construction only checks shapes; use [`Channel::validate`] for the CP and
/// TP conditions (first-order Kraus steps, for instance, are deliberately
/// not trace preserving).
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    repr: Representation,
}

impl Channel {
    pub fn from_kraus(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("zero-dimensional Kraus operator".into()));
        }
        if let Some(k) = ops.iter().position(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::InvalidChannel(format!(
                "Kraus operator {k} has shape {:?}, expected {:?}",
                ops[k].shape(),
                (dim_out, dim_in)
            )));
        }
        Ok(Self { dim_in, dim_out, repr: Representation::Kraus(ops) })
    }

    pub fn from_unitary(u: ComplexMatrix) -> Result<Self> {
        Self::from_kraus(vec![u])
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim_in: dim, dim_out: dim, repr: Representation::Kraus(vec![identity(dim)]) }
    }

    /// Conjugation by a Pauli string, `ρ ↦ PρP`.
    pub fn pauli_conjugation(label: &str) -> Result<Self> {
        Self::from_unitary(pauli_string(label)?)
    }

    pub fn from_choi(choi: ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if choi.shape() != (dim_in * dim_out, dim_in * dim_out) {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix of shape {:?} does not match dims in={dim_in}, out={dim_out}",
                choi.shape()
            )));
        }
        Ok(Self { dim_in, dim_out, repr: Representation::Choi(choi) })
    }

    pub fn from_ptm(ptm: RealMatrix) -> Result<Self> {
        let n = qubit_count_of_ptm(ptm.nrows())?;
        if !ptm.is_square() {
            return Err(Error::InvalidChannel("PTM must be square".into()));
        }
        let dim = 1usize << n;
        Ok(Self { dim_in: dim, dim_out: dim, repr: Representation::Ptm(ptm) })
    }

    /// Channel with column-stacking superoperator `s` (shape `dim_out² × dim_in²`).
    pub fn from_superoperator(s: &ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if s.shape() != (dim_out * dim_out, dim_in * dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "superoperator shape {:?} does not match dims in={dim_in}, out={dim_out}",
                s.shape()
            )));
        }
        let mut j = zeros(dim_out * dim_in, dim_out * dim_in);
        for a in 0..dim_out {
            for b in 0..dim_out {
                for i in 0..dim_in {
                    for k in 0..dim_in {
                        j[(a * dim_in + i, b * dim_in + k)] = s[(a + b * dim_out, i + k * dim_in)];
                    }
                }
            }
        }
        Self::from_choi(j, dim_in, dim_out)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn kind(&self) -> RepresentationKind {
        match self.repr {
            Representation::Kraus(_) => RepresentationKind::Kraus,
            Representation::Choi(_) => RepresentationKind::Choi,
            Representation::Ptm(_) => RepresentationKind::Ptm,
        }
    }

    /// Number of qubits when input and output are the same power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        (self.dim_in == self.dim_out && self.dim_in.is_power_of_two())
            .then(|| self.dim_in.trailing_zeros() as usize)
    }

    /// The Choi matrix, computed from whichever representation is held.
    pub fn choi(&self) -> ComplexMatrix {
        match &self.repr {
            Representation::Choi(j) => j.clone(),
            Representation::Kraus(ops) => {
                let n = self.dim_in * self.dim_out;
                let mut j = zeros(n, n);
                for k in ops {
                    // row-major flattening of K is (K ⊗ I)|Φ⟩
                    let v = ComplexMatrix::from_row_slice(n, 1, k.transpose().as_slice());
                    j += &v * v.adjoint();
                }
                j
            }
            Representation::Ptm(_) => {
                let s = self.superoperator();
                Channel::from_superoperator(&s, self.dim_in, self.dim_out)
                    .expect("superoperator shape is consistent")
                    .choi()
            }
        }
    }

    /// Column-stacking superoperator of shape `dim_out² × dim_in²`.
    pub fn superoperator(&self) -> ComplexMatrix {
        let (di, dout) = (self.dim_in, self.dim_out);
        match &self.repr {
            Representation::Kraus(ops) => {
                let mut s = zeros(dout * dout, di * di);
                for k in ops {
                    s += linalg::sandwich_superop(k, &k.adjoint());
                }
                s
            }
            Representation::Choi(j) => {
                let mut s = zeros(dout * dout, di * di);
                for a in 0..dout {
                    for b in 0..dout {
                        for i in 0..di {
                            for k in 0..di {
                                s[(a + b * dout, i + k * di)] = j[(a * di + i, b * di + k)];
                            }
                        }
                    }
                }
                s
            }
            Representation::Ptm(r) => {
                let n = self.n_qubits().expect("PTM channels act on qubits");
                let paulis: Vec<ComplexMatrix> = pauli::pauli_labels(n)
                    .iter()
                    .map(|l| linalg::vec_columns(&pauli_string(l).expect("valid label")))
                    .collect();
                let scale = 1.0 / di as f64;
                let mut s = zeros(dout * dout, di * di);
                for (a, pa) in paulis.iter().enumerate() {
                    for (b, pb) in paulis.iter().enumerate() {
                        let rab = r[(a, b)];
                        if rab != 0.0 {
                            s += pa * pb.adjoint() * cr(rab * scale);
                        }
                    }
                }
                s
            }
        }
    }

    /// `kraus_to_choi`: the same channel held as its Choi matrix.
    pub fn to_choi(&self) -> Channel {
        Channel { dim_in: self.dim_in, dim_out: self.dim_out, repr: Representation::Choi(self.choi()) }
    }

    /// Minimal Kraus operators from the Choi eigendecomposition.
    ///
    /// Eigenvalues in `[-1e-10, 0)` are clipped; anything more negative is
    /// reported as a CP violation.
    pub fn kraus_operators(&self) -> Result<Vec<ComplexMatrix>> {
        if let Representation::Kraus(ops) = &self.repr {
            return Ok(ops.clone());
        }
        let j = self.choi();
        let (vals, vecs) = linalg::hermitian_eigen(&j);
        if let Some(&lowest) = vals.first() {
            if lowest < -CP_TOL {
                return Err(Error::NotCompletelyPositive { min_eigenvalue: lowest });
            }
        }
        let mut ops = Vec::new();
        for (k, &lambda) in vals.iter().enumerate().rev() {
            if lambda <= RANK_TOL {
                continue;
            }
            let col = vecs.column(k);
            let op = ComplexMatrix::from_fn(self.dim_out, self.dim_in, |a, i| {
                col[a * self.dim_in + i] * lambda.sqrt()
            });
            ops.push(op);
        }
        if ops.is_empty() {
            ops.push(zeros(self.dim_out, self.dim_in));
        }
        Ok(ops)
    }

    /// `choi_to_kraus`: the same channel held as a minimal Kraus set.
    pub fn to_kraus(&self) -> Result<Channel> {
        Ok(Channel {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            repr: Representation::Kraus(self.kraus_operators()?),
        })
    }

    /// Pauli transfer matrix. Only defined for maps on `n` qubits.
    pub fn ptm(&self) -> Result<RealMatrix> {
        if let Representation::Ptm(r) = &self.repr {
            return Ok(r.clone());
        }
        let n = self.n_qubits().ok_or_else(|| {
            Error::InvalidChannel(format!(
                "PTM needs equal power-of-two dims, got in={} out={}",
                self.dim_in, self.dim_out
            ))
        })?;
        let labels = pauli::pauli_labels(n);
        let paulis: Vec<ComplexMatrix> =
            labels.iter().map(|l| pauli_string(l)).collect::<Result<_>>()?;
        let scale = 1.0 / self.dim_in as f64;
        let mut r = RealMatrix::zeros(paulis.len(), paulis.len());
        for (b, pb) in paulis.iter().enumerate() {
            let out = self.apply(pb)?;
            for (a, pa) in paulis.iter().enumerate() {
                r[(a, b)] = (pa * &out).trace().re * scale;
            }
        }
        Ok(r)
    }

    pub fn to_ptm(&self) -> Result<Channel> {
        Ok(Channel { dim_in: self.dim_in, dim_out: self.dim_out, repr: Representation::Ptm(self.ptm()?) })
    }

    /// Apply the map to an operator on the input space.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "input of shape {:?} for a channel on dimension {}",
                rho.shape(),
                self.dim_in
            )));
        }
        Ok(match &self.repr {
            Representation::Kraus(ops) => {
                let mut out = zeros(self.dim_out, self.dim_out);
                for k in ops {
                    out += k * rho * k.adjoint();
                }
                out
            }
            _ => {
                let v = self.superoperator() * linalg::vec_columns(rho);
                linalg::unvec_columns(&v, self.dim_out, self.dim_out)
            }
        })
    }

    /// `second ∘ self`.
    pub fn then(&self, second: &Channel) -> Result<Channel> {
        compose(second, self)
    }

    /// The `m`-fold composition `self ∘ … ∘ self` by repeated squaring.
    pub fn power(&self, m: usize) -> Result<Channel> {
        if self.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch("power of a non-square channel".into()));
        }
        let mut result = identity(self.dim_in * self.dim_in);
        let mut base = self.superoperator();
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                result = &base * &result;
            }
            base = &base * &base;
            e >>= 1;
        }
        Channel::from_superoperator(&result, self.dim_in, self.dim_out)
    }

    /// CP / TP diagnostics.
    pub fn validate(&self) -> CptpReport {
        let j = self.choi();
        let hermiticity_defect = max_abs(&(&j - j.adjoint()));
        let min_choi_eigenvalue = min_eigenvalue(&j);
        let pt = partial_trace_first(&j, self.dim_out, self.dim_in);
        let tp_defect = frobenius(&(pt - identity(self.dim_in)));
        let ptm_first_row = self
            .n_qubits()
            .and_then(|_| self.ptm().ok())
            .map(|r| r.row(0).iter().copied().collect());
        CptpReport { min_choi_eigenvalue, tp_defect, hermiticity_defect, ptm_first_row }
    }

    pub fn is_cptp(&self) -> bool {
        self.validate().is_cptp()
    }

    pub fn to_document(&self) -> ChannelDocument {
        let (real, imag): (Vec<_>, Vec<_>) = match &self.repr {
            Representation::Kraus(ops) => ops.iter().map(linalg::to_row_major).unzip(),
            Representation::Choi(j) => vec![linalg::to_row_major(j)].into_iter().unzip(),
            Representation::Ptm(r) => {
                let re: Vec<f64> = (0..r.nrows())
                    .flat_map(|i| (0..r.ncols()).map(move |j| (i, j)))
                    .map(|(i, j)| r[(i, j)])
                    .collect();
                let im = vec![0.0; re.len()];
                (vec![re], vec![im])
            }
        };
        ChannelDocument { dim_in: self.dim_in, dim_out: self.dim_out, representation: self.kind(), real, imag }
    }

    pub fn from_document(doc: &ChannelDocument) -> Result<Channel> {
        if doc.real.len() != doc.imag.len() {
            return Err(Error::Format("real and imag hold different matrix counts".into()));
        }
        if doc.dim_in == 0 || doc.dim_out == 0 {
            return Err(Error::Format("zero dimension".into()));
        }
        let one = |what: &str| -> Result<()> {
            if doc.real.len() == 1 {
                Ok(())
            } else {
                Err(Error::Format(format!("{what} document must hold exactly one matrix")))
            }
        };
        match doc.representation {
            RepresentationKind::Kraus => {
                let ops = doc
                    .real
                    .iter()
                    .zip(&doc.imag)
                    .map(|(re, im)| linalg::from_row_major(doc.dim_out, doc.dim_in, re, im))
                    .collect::<Result<Vec<_>>>()?;
                Channel::from_kraus(ops)
            }
            RepresentationKind::Choi => {
                one("choi")?;
                let n = doc.dim_in * doc.dim_out;
                let j = linalg::from_row_major(n, n, &doc.real[0], &doc.imag[0])?;
                Channel::from_choi(j, doc.dim_in, doc.dim_out)
            }
            RepresentationKind::Ptm => {
                one("ptm")?;
                if doc.dim_in != doc.dim_out {
                    return Err(Error::Format("PTM requires dim_in = dim_out".into()));
                }
                let n = doc.dim_in * doc.dim_in;
                if doc.real[0].len() != n * n {
                    return Err(Error::Format(format!("PTM needs {} entries", n * n)));
                }
                if doc.imag[0].iter().any(|v| v.abs() > 1e-12) {
                    return Err(Error::Format("PTM entries must be real".into()));
                }
                Channel::from_ptm(RealMatrix::from_row_slice(n, n, &doc.real[0]))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("channel documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Channel> {
        let doc: ChannelDocument =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Channel::from_document(&doc)
    }
}

fn qubit_count_of_ptm(size: usize) -> Result<usize> {
    let mut n = 0;
    let mut s = 1;
    while s < size {
        s *= 4;
        n += 1;
    }
    if s != size || n == 0 {
        return Err(Error::InvalidChannel(format!("PTM size {size} is not 4ⁿ")));
    }
    Ok(n)
}

/// Serialized form of a [`Channel`]. Each matrix is stored row-major as
/// separate real and imaginary arrays; a Kraus document holds one matrix per
/// operator, Choi and PTM documents hold exactly one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDocument {
    pub dim_in: usize,
    pub dim_out: usize,
    pub representation: RepresentationKind,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    pub min_choi_eigenvalue: f64,
    /// Frobenius norm of `Tr_out J − I`.
    pub tp_defect: f64,
    pub hermiticity_defect: f64,
    pub ptm_first_row: Option<Vec<f64>>,
}

impl CptpReport {
    pub fn is_cp(&self) -> bool {
        self.min_choi_eigenvalue >= -CP_TOL && self.hermiticity_defect <= 1e-10
    }

    pub fn is_tp(&self) -> bool {
        self.tp_defect < TP_TOL
    }

    pub fn is_cptp(&self) -> bool {
        self.is_cp() && self.is_tp()
    }
}

/// `second ∘ first`. PTMs multiply, Kraus sets take pairwise products, and
/// anything else goes through the superoperator and comes back as a Choi matrix.
pub fn compose(second: &Channel, first: &Channel) -> Result<Channel> {
    if first.dim_out != second.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose: first outputs dimension {}, second expects {}",
            first.dim_out, second.dim_in
        )));
    }
    match (&second.repr, &first.repr) {
        (Representation::Ptm(r2), Representation::Ptm(r1)) => Channel::from_ptm(r2 * r1),
        (Representation::Kraus(k2), Representation::Kraus(k1))
            if k1.len() * k2.len() <= MAX_COMPOSED_KRAUS =>
        {
            let ops = k2.iter().flat_map(|b| k1.iter().map(move |a| b * a)).collect();
            Channel::from_kraus(ops)
        }
        _ => {
            let s = second.superoperator() * first.superoperator();
            Channel::from_superoperator(&s, first.dim_in, second.dim_out)
        }
    }
}

/// Tensor product `a ⊗ b`, with `a` on the leading factor.
pub fn tensor(a: &Channel, b: &Channel) -> Result<Channel> {
    if let (Representation::Ptm(ra), Representation::Ptm(rb)) = (&a.repr, &b.repr) {
        return Channel::from_ptm(linalg::real_kron(ra, rb));
    }
    let ka = a.kraus_operators()?;
    let kb = b.kraus_operators()?;
    let ops = ka.iter().flat_map(|x| kb.iter().map(move |y| kron(x, y))).collect();
    Channel::from_kraus(ops)
}

/// Convex mixture `Σ_k r_k E_k`. With Kraus inputs the result keeps Kraus form
/// with `√r_k`-scaled operators; otherwise Choi matrices are summed.
pub fn mix(channels: &[Channel], weights: &MixtureWeights) -> Result<Channel> {
    let first = channels
        .first()
        .ok_or_else(|| Error::InvalidChannel("mixture of no channels".into()))?;
    if channels.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} channels",
            weights.len(),
            channels.len()
        )));
    }
    let sum: f64 = weights.weights().iter().sum();
    if (sum - 1.0).abs() > crate::weights::SUM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
    }
    if let Some(bad) = channels
        .iter()
        .position(|c| c.dim_in != first.dim_in || c.dim_out != first.dim_out)
    {
        return Err(Error::DimensionMismatch(format!("channel {bad} has different dimensions")));
    }
    let all_kraus = channels.iter().all(|c| c.kind() == RepresentationKind::Kraus);
    if all_kraus {
        let mut ops = Vec::new();
        for (ch, &r) in channels.iter().zip(weights.weights()) {
            if r <= 0.0 {
                continue;
            }
            let scale = cr(r.sqrt());
            if let Representation::Kraus(ks) = &ch.repr {
                ops.extend(ks.iter().map(|k| k * scale));
            }
        }
        return Channel::from_kraus(ops);
    }
    let n = first.dim_in * first.dim_out;
    let mut j = zeros(n, n);
    for (ch, &r) in channels.iter().zip(weights.weights()) {
        if r != 0.0 {
            j += ch.choi() * cr(r);
        }
    }
    Channel::from_choi(j, first.dim_in, first.dim_out)
}

/// Amplitude damping `K₀ = |0⟩⟨0| + √(1−λ)|1⟩⟨1|`, `K₁ = √λ |0⟩⟨1|`.
pub fn amplitude_damping(lambda: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("damping {lambda} outside [0, 1]")));
    }
    let k0 = ComplexMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr((1.0 - lambda).sqrt())]);
    let k1 = ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), cr(lambda.sqrt()), cr(0.0), cr(0.0)]);
    Channel::from_kraus(vec![k0, k1])
}

/// Reset to `|0⟩⟨0|` regardless of input.
pub fn reset_to_zero() -> Channel {
    amplitude_damping(1.0).expect("λ = 1 is valid")
}

/// Computational-basis measurement with the outcome discarded.
pub fn measure_z_discard() -> Channel {
    let p0 = ComplexMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(0.0)]);
    let p1 = ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
    Channel::from_kraus(vec![p0, p1]).expect("projectors have matching shapes")
}

/// Embed a single-qubit channel on qubit `target` of an `n`-qubit register.
pub fn on_qubit(channel: &Channel, target: usize, n_qubits: usize) -> Result<Channel> {
    if target >= n_qubits || channel.dim_in != 2 || channel.dim_out != 2 {
        return Err(Error::InvalidParameter(format!(
            "cannot place a single-qubit channel on qubit {target} of {n_qubits}"
        )));
    }
    let mut out = if target == 0 { channel.clone() } else { Channel::identity(2) };
    for q in 1..n_qubits {
        let factor = if q == target { channel.clone() } else { Channel::identity(2) };
        out = tensor(&out, &factor)?;
    }
    Ok(out)
}

pub fn labels_commute(a: &str, b: &str) -> bool {
    let anti = a
        .chars()
        .zip(b.chars())
        .filter(|&(p, q)| p != 'I' && q != 'I' && p != q)
        .count();
    anti % 2 == 0
}
