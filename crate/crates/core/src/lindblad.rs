//! Markovian master equations `ρ̇ = −i[H, ρ] + Σ_k r_k D[L_k]ρ` with
//! `D[L]ρ = LρL† − ½{L†L, ρ}`.
//!
//! Superoperators use column stacking: `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{
    c, cr, expm, identity, is_hermitian, kron, pauli_string, sandwich_superop, unvec_columns, vec_columns,
    zeros, ComplexMatrix, HERMITIAN_TOL,
};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub operator: ComplexMatrix,
    pub rate: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    dim: usize,
    hamiltonian: ComplexMatrix,
    jumps: Vec<JumpOperator>,
}

impl LindbladModel {
    pub fn new(hamiltonian: ComplexMatrix, jumps: Vec<JumpOperator>) -> Result<Self> {
        if !hamiltonian.is_square() || hamiltonian.nrows() == 0 {
            return Err(Error::InvalidParameter("Hamiltonian must be square".into()));
        }
        if !is_hermitian(&hamiltonian, HERMITIAN_TOL) {
            return Err(Error::InvalidParameter("Hamiltonian is not Hermitian".into()));
        }
        let dim = hamiltonian.nrows();
        for j in &jumps {
            if j.operator.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!("jump operator {} has the wrong shape", j.label)));
            }
            if !(j.rate >= 0.0 && j.rate.is_finite()) {
                return Err(Error::InvalidParameter(format!("rate of {} is {}", j.label, j.rate)));
            }
        }
        Ok(Self { dim, hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    /// The same dissipator with the Hamiltonian removed.
    pub fn dissipative_part(&self) -> LindbladModel {
        Self { dim: self.dim, hamiltonian: zeros(self.dim, self.dim), jumps: self.jumps.clone() }
    }

    /// The same Hamiltonian with every rate set to zero.
    pub fn coherent_part(&self) -> LindbladModel {
        Self { dim: self.dim, hamiltonian: self.hamiltonian.clone(), jumps: Vec::new() }
    }

    pub fn liouvillian(&self) -> ComplexMatrix {
        let d = self.dim;
        let id = identity(d);
        let minus_i = c(0.0, -1.0);
        // vec(Hρ) = (I ⊗ H) vec ρ and vec(ρH) = (Hᵀ ⊗ I) vec ρ
        let mut l = (kron(&id, &self.hamiltonian) - kron(&self.hamiltonian.transpose(), &id)) * minus_i;
        for j in &self.jumps {
            if j.rate == 0.0 {
                continue;
            }
            let op = &j.operator;
            let ldl = op.adjoint() * op;
            let term = sandwich_superop(op, &op.adjoint())
                - (kron(&id, &ldl) + kron(&ldl.transpose(), &id)) * cr(0.5);
            l += term * cr(j.rate);
        }
        l
    }

    /// `ρ̇` for one state, computed directly rather than through the superoperator.
    pub fn generator(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * c(0.0, -1.0);
        for j in &self.jumps {
            let op = &j.operator;
            let ldl = op.adjoint() * op;
            out += (op * rho * op.adjoint() - (&ldl * rho + rho * &ldl) * cr(0.5)) * cr(j.rate);
        }
        out
    }

    /// The exact propagator `exp(L τ)` as a channel.
    pub fn exact_step(&self, tau: f64) -> Result<Channel> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("step length {tau}")));
        }
        let s = expm(&(self.liouvillian() * cr(tau)))?;
        Channel::from_superoperator(&s, self.dim, self.dim)
    }

    /// The unitary step `exp(−iHτ)`.
    pub fn coherent_step(&self, tau: f64) -> Result<Channel> {
        let u = expm(&(&self.hamiltonian * c(0.0, -tau)))?;
        Channel::from_unitary(u)
    }

    /// `K₀ = I − (iH + ½Σ r L†L) dt`, `K_k = √(r dt) L_k`. Trace preservation
    /// holds only to first order in `dt`.
    pub fn first_order_kraus_step(&self, dt: f64) -> Result<KrausSet> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("step length {dt}")));
        }
        let mut b = &self.hamiltonian * c(0.0, 1.0);
        for j in &self.jumps {
            b += j.operator.adjoint() * &j.operator * cr(0.5 * j.rate);
        }
        let mut ops = vec![identity(self.dim) - b * cr(dt)];
        if dt > 0.0 {
            for j in &self.jumps {
                if j.rate > 0.0 {
                    ops.push(&j.operator * cr((j.rate * dt).sqrt()));
                }
            }
        }
        Ok(KrausSet { ops })
    }

    /// `ρ_k = exp(Lτ)^k ρ₀` for `k = 0..=steps`.
    pub fn evolve(&self, rho0: &DensityMatrix, tau: f64, steps: usize) -> Result<Vec<DensityMatrix>> {
        if rho0.dim() != self.dim {
            return Err(Error::DimensionMismatch("initial state and model differ in dimension".into()));
        }
        let s = expm(&(self.liouvillian() * cr(tau)))?;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(rho0.clone());
        let mut v = vec_columns(rho0.matrix());
        for _ in 0..steps {
            v = &s * v;
            let m = unvec_columns(&v, self.dim, self.dim);
            out.push(DensityMatrix::new(crate::linalg::hermitian_part(&m))?);
        }
        Ok(out)
    }
}

/// A Kraus list that need not be trace preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub ops: Vec<ComplexMatrix>,
}

impl KrausSet {
    /// Frobenius norm of `Σ K†K − I`.
    pub fn tp_defect(&self) -> f64 {
        let d = self.ops[0].ncols();
        let mut s = zeros(d, d);
        for k in &self.ops {
            s += k.adjoint() * k;
        }
        crate::linalg::frobenius(&(s - identity(d)))
    }

    pub fn to_channel(&self) -> Result<Channel> {
        Channel::from_kraus(self.ops.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitonParams {
    pub eps1: f64,
    pub eps2: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma12: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl Default for ExcitonParams {
    fn default() -> Self {
        Self { eps1: 1.0, eps2: 0.8, j: 0.3, gamma1: 0.05, gamma2: 0.05, gamma12: 0.02, kappa1: 0.01, kappa2: 0.01 }
    }
}

/// `σ⁻ = |0⟩⟨1|`, lowering the excited state `|1⟩`.
pub fn sigma_minus() -> ComplexMatrix {
    let mut m = zeros(2, 2);
    m[(0, 1)] = cr(1.0);
    m
}

/// Two sites as two qubits, site 1 leftmost: `|10⟩` is the excitation on site 1.
pub fn build_exciton_model(p: &ExcitonParams) -> Result<LindbladModel> {
    let z1 = pauli_string("ZI")?;
    let z2 = pauli_string("IZ")?;
    let hop = pauli_string("XX")? + pauli_string("YY")?;
    let h = &z1 * cr(-p.eps1 / 2.0) + &z2 * cr(-p.eps2 / 2.0) + hop * cr(p.j / 2.0);
    let id = identity(2);
    let jump = |operator: ComplexMatrix, rate: f64, label: &str| JumpOperator { operator, rate, label: label.into() };
    let jumps = vec![
        jump(z1, p.gamma1 / 2.0, "dephasing-1"),
        jump(z2, p.gamma2 / 2.0, "dephasing-2"),
        jump(pauli_string("ZZ")?, p.gamma12 / 2.0, "correlated-dephasing"),
        jump(kron(&sigma_minus(), &id), p.kappa1, "loss-1"),
        jump(kron(&id, &sigma_minus()), p.kappa2, "loss-2"),
    ];
    LindbladModel::new(h, jumps)
}

/// Single-qubit pure dephasing at rate `gamma`: coherences decay as `e^{−γt}`.
pub fn dephasing_model(gamma: f64) -> Result<LindbladModel> {
    LindbladModel::new(
        zeros(2, 2),
        vec![JumpOperator { operator: pauli_string("Z")?, rate: gamma / 2.0, label: "dephasing".into() }],
    )
}

/// Single-qubit decay `|1⟩ → |0⟩` at rate `kappa`.
pub fn amplitude_damping_model(kappa: f64) -> Result<LindbladModel> {
    LindbladModel::new(
        zeros(2, 2),
        vec![JumpOperator { operator: sigma_minus(), rate: kappa, label: "loss".into() }],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn liouvillian_matches_direct_generator() {
        let model = build_exciton_model(&ExcitonParams::default()).unwrap();
        let l = model.liouvillian();
        let mut rho = zeros(4, 4);
        for (i, v) in [0.4, 0.3, 0.2, 0.1].iter().enumerate() {
            rho[(i, i)] = cr(*v);
        }
        rho[(1, 2)] = c(0.05, 0.02);
        rho[(2, 1)] = c(0.05, -0.02);
        let via_super = unvec_columns(&(&l * vec_columns(&rho)), 4, 4);
        assert!(max_abs(&(via_super - model.generator(&rho))) < 1e-14);
    }

    #[test]
    fn negative_rates_are_rejected() {
        let p = ExcitonParams { kappa1: -0.1, ..Default::default() };
        assert!(build_exciton_model(&p).is_err());
        assert!(LindbladModel::new(pauli_string("Z").unwrap() * c(0.0, 1.0), vec![]).is_err());
    }

    #[test]
    fn zero_step_is_identity() {
        let model = build_exciton_model(&ExcitonParams::default()).unwrap();
        let ch = model.exact_step(0.0).unwrap();
        assert!(max_abs(&(ch.choi() - Channel::identity(4).choi())) < 1e-14);
        let k = model.first_order_kraus_step(0.0).unwrap();
        assert_eq!(k.ops.len(), 1);
        assert!(max_abs(&(&k.ops[0] - identity(4))) == 0.0);
    }
}
