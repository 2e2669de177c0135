//! Spin, collective-spin, bosonic, and full-chain operators with explicit
//! tensor-product embedding.
//!
//! Basis conventions, fixed crate-wide:
//!
//! * The pumped spin is the **left** tensor factor everywhere; composite
//!   index `s·d_J + k` with `s = 0 ↔ |↑⟩`, `s = 1 ↔ |↓⟩`.
//! * Dicke states `|J, m⟩` are indexed by `k = m + J ∈ 0..=N`, so index 0
//!   is the fully de-excited state `m = -J`.
//! * Bosonic Fock states are indexed by occupation `n ∈ 0..n_cut`.
//! * Spin-chain sites are ordered with site 0 as the leftmost factor and
//!   the **last site** as the pumped spin.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dagger, identity, kron};
use crate::C64;

/// The Hilbert spaces operators can act on. The first three are the
/// simulation spaces; the factor variants tag un-embedded building blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum HilbertSpace {
    /// Pumped spin ⊗ (N+1)-dimensional symmetric Dicke manifold, dim 2(N+1).
    PumpedSpinDicke { n: usize },
    /// Pumped spin ⊗ truncated Fock space, dim 2·n_cut.
    PumpedSpinBoson { n: usize, n_cut: usize },
    /// Full chain of `n_atoms` spins, dim 2^n_atoms; the last site is pumped.
    SpinChain { n_atoms: usize },
    /// Lone pumped spin, dim 2.
    PumpedFactor,
    /// Bare Dicke manifold of N unpumped atoms, dim N+1.
    DickeFactor { n: usize },
    /// Bare truncated Fock space, dim n_cut.
    BosonFactor { n: usize, n_cut: usize },
}

impl HilbertSpace {
    pub fn dim(&self) -> usize {
        match *self {
            HilbertSpace::PumpedSpinDicke { n } => 2 * (n + 1),
            HilbertSpace::PumpedSpinBoson { n_cut, .. } => 2 * n_cut,
            HilbertSpace::SpinChain { n_atoms } => 1 << n_atoms,
            HilbertSpace::PumpedFactor => 2,
            HilbertSpace::DickeFactor { n } => n + 1,
            HilbertSpace::BosonFactor { n_cut, .. } => n_cut,
        }
    }

    /// The collective (right) factor of a product space.
    pub fn collective_factor(&self) -> Option<HilbertSpace> {
        match *self {
            HilbertSpace::PumpedSpinDicke { n } => Some(HilbertSpace::DickeFactor { n }),
            HilbertSpace::PumpedSpinBoson { n, n_cut } => {
                Some(HilbertSpace::BosonFactor { n, n_cut })
            }
            _ => None,
        }
    }

    /// Number of unpumped atoms `N` the space represents.
    pub fn n_unpumped(&self) -> usize {
        match *self {
            HilbertSpace::PumpedSpinDicke { n } => n,
            HilbertSpace::PumpedSpinBoson { n, .. } => n,
            HilbertSpace::SpinChain { n_atoms } => n_atoms - 1,
            HilbertSpace::PumpedFactor => 0,
            HilbertSpace::DickeFactor { n } => n,
            HilbertSpace::BosonFactor { n, .. } => n,
        }
    }
}

/// A complex square matrix tagged with the space it acts on.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub space: HilbertSpace,
    pub matrix: Array2<C64>,
    pub label: String,
}

impl OperatorMatrix {
    pub fn new(space: HilbertSpace, matrix: Array2<C64>, label: impl Into<String>) -> Self {
        assert_eq!(
            matrix.nrows(),
            space.dim(),
            "operator dimension must match its space"
        );
        assert_eq!(matrix.nrows(), matrix.ncols(), "operator must be square");
        Self {
            space,
            matrix,
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Conjugate transpose, same space.
    pub fn dag(&self) -> Self {
        Self::new(self.space, dagger(&self.matrix), format!("({})†", self.label))
    }

    pub fn scaled(&self, z: C64) -> Self {
        Self::new(self.space, self.matrix.mapv(|x| x * z), self.label.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.space, other.space, "operator spaces must match");
        Self::new(
            self.space,
            &self.matrix + &other.matrix,
            format!("{}+{}", self.label, other.label),
        )
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.space, other.space, "operator spaces must match");
        Self::new(
            self.space,
            self.matrix.dot(&other.matrix),
            format!("{}·{}", self.label, other.label),
        )
    }
}

/// Ladder triple for a spin-like degree of freedom.
#[derive(Debug, Clone)]
pub struct LadderOps {
    pub plus: OperatorMatrix,
    pub minus: OperatorMatrix,
    pub z: OperatorMatrix,
}

/// Collective-spin ladder operators on the (N+1)-dimensional Dicke space:
/// `J±|m⟩ = √(J(J+1) − m(m±1)) |m±1⟩`, `Jᶻ|m⟩ = m|m⟩`, with `J = N/2`.
pub fn build_dicke_ladder(n: usize) -> Result<LadderOps> {
    if n == 0 {
        return Err(Error::InvalidModel(
            "collective spin needs N ≥ 1 unpumped atoms; use the single-atom closed forms for N = 0"
                .into(),
        ));
    }
    let dim = n + 1;
    // Ladder coefficients evaluated from integers: with q = 2m,
    // 4[J(J+1) − m(m+1)] = N(N+2) − q(q+2).
    let mut plus = Array2::<C64>::zeros((dim, dim));
    let mut z = Array2::<C64>::zeros((dim, dim));
    for k in 0..dim {
        let q = 2 * k as i64 - n as i64; // q = 2m
        z[(k, k)] = C64::new(q as f64 / 2.0, 0.0);
        if k + 1 < dim {
            let c2 = (n as i64) * (n as i64 + 2) - q * (q + 2);
            plus[(k + 1, k)] = C64::new((c2 as f64).sqrt() / 2.0, 0.0);
        }
    }
    let minus = dagger(&plus);
    let space = HilbertSpace::DickeFactor { n };
    Ok(LadderOps {
        plus: OperatorMatrix::new(space, plus, "J+"),
        minus: OperatorMatrix::new(space, minus, "J-"),
        z: OperatorMatrix::new(space, z, "Jz"),
    })
}

/// Pauli ladder operators of the pumped spin in the basis (|↑⟩, |↓⟩):
/// `σᶻ = diag(+1/2, −1/2)`.
pub fn build_pumped_spin() -> LadderOps {
    let mut plus = Array2::<C64>::zeros((2, 2));
    plus[(0, 1)] = C64::new(1.0, 0.0);
    let minus = dagger(&plus);
    let mut z = Array2::<C64>::zeros((2, 2));
    z[(0, 0)] = C64::new(0.5, 0.0);
    z[(1, 1)] = C64::new(-0.5, 0.0);
    let space = HilbertSpace::PumpedFactor;
    LadderOps {
        plus: OperatorMatrix::new(space, plus, "σ+"),
        minus: OperatorMatrix::new(space, minus, "σ-"),
        z: OperatorMatrix::new(space, z, "σz"),
    }
}

/// Which tensor factor an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// The pumped spin: left factor.
    Pumped,
    /// The collective spin or bosonic mode: right factor.
    Collective,
}

/// Embed a factor operator into a product space as `op ⊗ I` (pumped slot)
/// or `I ⊗ op` (collective slot).
pub fn embed(op: &OperatorMatrix, slot: Slot, target: HilbertSpace) -> Result<OperatorMatrix> {
    let factor = target.collective_factor().ok_or_else(|| {
        Error::DimensionMismatch("embedding requires a pumped-spin product space".into())
    })?;
    let matrix = match slot {
        Slot::Pumped => {
            if op.space != HilbertSpace::PumpedFactor {
                return Err(Error::DimensionMismatch(format!(
                    "pumped-slot operator must be 2×2 on the pumped factor, got dim {}",
                    op.dim()
                )));
            }
            kron(&op.matrix, &identity(factor.dim()))
        }
        Slot::Collective => {
            if op.dim() != factor.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "collective-slot operator has dim {}, target factor has dim {}",
                    op.dim(),
                    factor.dim()
                )));
            }
            kron(&identity(2), &op.matrix)
        }
    };
    Ok(OperatorMatrix::new(target, matrix, op.label.clone()))
}

/// Truncated Holstein-Primakoff operators: `a|n⟩ = √n |n−1⟩` on Fock
/// levels `0..n_cut` (hard cutoff, no occupation-dependent corrections),
/// with the lowest-order mapping `J⁺ ≈ √N a†`, `Jᶻ ≈ −N/2 + a†a`.
pub struct HpOps {
    pub a: OperatorMatrix,
    pub a_dag: OperatorMatrix,
    pub j_plus: OperatorMatrix,
    pub j_minus: OperatorMatrix,
    pub j_z: OperatorMatrix,
}

pub fn build_hp_operators(n: usize, n_cut: usize) -> Result<HpOps> {
    if n_cut < 2 {
        return Err(Error::InvalidModel(format!(
            "bosonic cutoff must satisfy n_cut ≥ 2, got {n_cut}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidModel("bosonization needs N ≥ 1".into()));
    }
    let mut a = Array2::<C64>::zeros((n_cut, n_cut));
    for m in 1..n_cut {
        a[(m - 1, m)] = C64::new((m as f64).sqrt(), 0.0);
    }
    let a_dag = dagger(&a);
    let sqrt_n = C64::new((n as f64).sqrt(), 0.0);
    let j_plus = a_dag.mapv(|z| z * sqrt_n);
    let j_minus = a.mapv(|z| z * sqrt_n);
    let mut j_z = Array2::<C64>::zeros((n_cut, n_cut));
    for m in 0..n_cut {
        j_z[(m, m)] = C64::new(-(n as f64) / 2.0 + m as f64, 0.0);
    }
    let space = HilbertSpace::BosonFactor { n, n_cut };
    Ok(HpOps {
        a: OperatorMatrix::new(space, a, "a"),
        a_dag: OperatorMatrix::new(space, a_dag, "a†"),
        j_plus: OperatorMatrix::new(space, j_plus, "√N a†"),
        j_minus: OperatorMatrix::new(space, j_minus, "√N a"),
        j_z: OperatorMatrix::new(space, j_z, "-N/2 + a†a"),
    })
}

/// Site-resolved operators on the full 2^n_atoms chain, used as the
/// brute-force reference for the Dicke-basis restriction.
pub struct FullChainOps {
    pub space: HilbertSpace,
    pub sigma_plus: Vec<Array2<C64>>,
    pub sigma_minus: Vec<Array2<C64>>,
    pub sigma_z: Vec<Array2<C64>>,
    /// Collective raising over the unpumped sites (all but the last).
    pub j_plus: Array2<C64>,
    pub j_minus: Array2<C64>,
    pub j_z: Array2<C64>,
}

pub fn build_full_space_operators(n_atoms: usize) -> Result<FullChainOps> {
    if !(2..=5).contains(&n_atoms) {
        return Err(Error::InvalidModel(format!(
            "full-chain reference supports 2..=5 atoms, got {n_atoms}"
        )));
    }
    let space = HilbertSpace::SpinChain { n_atoms };
    let dim = space.dim();
    let single = build_pumped_spin();

    let site = |op: &Array2<C64>, i: usize| -> Array2<C64> {
        let left = identity(1 << i);
        let right = identity(1 << (n_atoms - 1 - i));
        kron(&kron(&left, op), &right)
    };

    let mut sigma_plus = Vec::with_capacity(n_atoms);
    let mut sigma_minus = Vec::with_capacity(n_atoms);
    let mut sigma_z = Vec::with_capacity(n_atoms);
    for i in 0..n_atoms {
        sigma_plus.push(site(&single.plus.matrix, i));
        sigma_minus.push(site(&single.minus.matrix, i));
        sigma_z.push(site(&single.z.matrix, i));
    }

    let mut j_plus = Array2::<C64>::zeros((dim, dim));
    let mut j_minus = Array2::<C64>::zeros((dim, dim));
    let mut j_z = Array2::<C64>::zeros((dim, dim));
    for i in 0..n_atoms - 1 {
        j_plus += &sigma_plus[i];
        j_minus += &sigma_minus[i];
        j_z += &sigma_z[i];
    }

    Ok(FullChainOps {
        space,
        sigma_plus,
        sigma_minus,
        sigma_z,
        j_plus,
        j_minus,
        j_z,
    })
}

/// Pumped and collective ladder operators embedded into a product space,
/// ready for jump-operator composition.
pub struct EmbeddedOps {
    pub sigma_plus: OperatorMatrix,
    pub sigma_minus: OperatorMatrix,
    pub sigma_z: OperatorMatrix,
    pub j_plus: OperatorMatrix,
    pub j_minus: OperatorMatrix,
    pub j_z: OperatorMatrix,
}

/// Build the embedded operator set for either product space. For the
/// bosonic space the `J` entries are the lowest-order Holstein-Primakoff
/// images `√N a†`, `√N a`, `−N/2 + a†a`.
pub fn embedded_ops(space: HilbertSpace) -> Result<EmbeddedOps> {
    let pumped = build_pumped_spin();
    let (jp, jm, jz) = match space {
        HilbertSpace::PumpedSpinDicke { n } => {
            let j = build_dicke_ladder(n)?;
            (j.plus, j.minus, j.z)
        }
        HilbertSpace::PumpedSpinBoson { n, n_cut } => {
            let hp = build_hp_operators(n, n_cut)?;
            (hp.j_plus, hp.j_minus, hp.j_z)
        }
        _ => {
            return Err(Error::DimensionMismatch(
                "embedded_ops expects a pumped-spin product space".into(),
            ))
        }
    };
    Ok(EmbeddedOps {
        sigma_plus: embed(&pumped.plus, Slot::Pumped, space)?,
        sigma_minus: embed(&pumped.minus, Slot::Pumped, space)?,
        sigma_z: embed(&pumped.z, Slot::Pumped, space)?,
        j_plus: embed(&jp, Slot::Collective, space)?,
        j_minus: embed(&jm, Slot::Collective, space)?,
        j_z: embed(&jz, Slot::Collective, space)?,
    })
}
