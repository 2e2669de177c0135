//! Lindblad superoperators for the partially pumped emitter models.
//!
//! All superoperators use the crate-wide column-stacking vectorization
//! (`vec(XρY) = (Yᵀ ⊗ X) vec(ρ)`, see [`crate::linalg`]). A dissipator
//! `D[A]ρ = 2AρA† − {A†A, ρ}` applied with prefactor `rate/2` therefore
//! maps to
//!
//! ```text
//! (rate/2) · (2 Ā ⊗ A − I ⊗ A†A − (A†A)ᵀ ⊗ I),
//! ```
//!
//! and a Hamiltonian commutator `−i[H, ρ]` to `−i(I ⊗ H − Hᵀ ⊗ I)`.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dagger, devectorize, identity, kron, max_abs, vectorize};
use crate::operators::{embedded_ops, HilbertSpace, OperatorMatrix};
use crate::{C64, GAMMA};

/// Default cap on dense superoperator storage (entry count = dim⁴).
pub const DENSE_ENTRY_CAP: usize = 400_000_000;

/// The model families. Rates are in units of `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Collective decay of `σ + J` with relative phase `φ` in the jump
    /// operator, local incoherent pump on `σ`.
    ToyPhase,
    /// Phase fixed to zero, coherent exchange `V(J⁺σ⁻ + σ⁺J⁻)` added.
    Interacting,
    /// Collective decay with the phase on `J⁻`, incoherent pump on `J`.
    CollectivePump,
    /// Symmetric decay plus weak auxiliary readout channels on `σ⁻` and
    /// `J⁻`; the phase enters only the measured operators.
    AuxiliaryChannels,
    /// Bosonized variant of `ToyPhase`: the collective spin is replaced by
    /// a truncated mode via the lowest-order Holstein-Primakoff mapping.
    HpToy,
}

/// Full parameterization of one model instance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelSpec {
    pub model: Model,
    /// Number of unpumped atoms (N = 2J).
    pub n: usize,
    /// Pump rate in units of Γ.
    pub w: f64,
    /// Relative phase in [0, 2π).
    pub phi: f64,
    /// Coherent coupling in units of Γ (Interacting only).
    pub v: f64,
    /// Auxiliary channel rate in units of Γ (AuxiliaryChannels only).
    pub kappa: f64,
    /// Bosonic cutoff (HpToy only).
    pub n_cut: usize,
}

impl ModelSpec {
    pub fn toy_phase(n: usize, w: f64, phi: f64) -> Self {
        Self {
            model: Model::ToyPhase,
            n,
            w,
            phi: wrap_phase(phi),
            v: 0.0,
            kappa: 0.0,
            n_cut: 0,
        }
    }

    pub fn interacting(n: usize, w: f64, v: f64) -> Self {
        Self {
            model: Model::Interacting,
            n,
            w,
            phi: 0.0,
            v,
            kappa: 0.0,
            n_cut: 0,
        }
    }

    pub fn collective_pump(n: usize, w: f64, phi: f64) -> Self {
        Self {
            model: Model::CollectivePump,
            n,
            w,
            phi: wrap_phase(phi),
            v: 0.0,
            kappa: 0.0,
            n_cut: 0,
        }
    }

    pub fn auxiliary_channels(n: usize, w: f64, phi: f64, kappa: f64) -> Self {
        Self {
            model: Model::AuxiliaryChannels,
            n,
            w,
            phi: wrap_phase(phi),
            v: 0.0,
            kappa,
            n_cut: 0,
        }
    }

    pub fn hp_toy(n: usize, w: f64, phi: f64, n_cut: usize) -> Self {
        Self {
            model: Model::HpToy,
            n,
            w,
            phi: wrap_phase(phi),
            v: 0.0,
            kappa: 0.0,
            n_cut,
        }
    }

    /// Check the per-model parameter constraints.
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidModel("N ≥ 1 unpumped atoms required".into()));
        }
        if self.w < 0.0 || self.v < 0.0 || self.kappa < 0.0 {
            return Err(Error::InvalidModel("rates must be nonnegative".into()));
        }
        if !(0.0..std::f64::consts::TAU).contains(&self.phi) {
            return Err(Error::InvalidModel("phase must lie in [0, 2π)".into()));
        }
        match self.model {
            Model::ToyPhase | Model::CollectivePump => {
                if self.v != 0.0 || self.kappa != 0.0 {
                    return Err(Error::InvalidModel(
                        "dissipation-only models force V = 0 and κ = 0".into(),
                    ));
                }
            }
            Model::Interacting => {
                if self.phi != 0.0 {
                    return Err(Error::InvalidModel(
                        "the interacting model fixes the relative phase to zero".into(),
                    ));
                }
                if self.kappa != 0.0 {
                    return Err(Error::InvalidModel("interacting model has κ = 0".into()));
                }
            }
            Model::AuxiliaryChannels => {
                if self.kappa <= 0.0 {
                    return Err(Error::InvalidModel(
                        "auxiliary-channel model requires κ > 0".into(),
                    ));
                }
                if self.v != 0.0 {
                    return Err(Error::InvalidModel("auxiliary-channel model has V = 0".into()));
                }
            }
            Model::HpToy => {
                if self.n_cut < 2 {
                    return Err(Error::InvalidModel("HpToy requires n_cut ≥ 2".into()));
                }
                if self.v != 0.0 || self.kappa != 0.0 {
                    return Err(Error::InvalidModel("HpToy forces V = 0 and κ = 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn space(&self) -> HilbertSpace {
        match self.model {
            Model::HpToy => HilbertSpace::PumpedSpinBoson {
                n: self.n,
                n_cut: self.n_cut,
            },
            _ => HilbertSpace::PumpedSpinDicke { n: self.n },
        }
    }

    /// Does the phase of this model live in the jump operator (as opposed
    /// to the measured operators)?
    pub fn phase_in_jump(&self) -> bool {
        !matches!(self.model, Model::AuxiliaryChannels)
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut p = phi.rem_euclid(tau);
    if p >= tau {
        p = 0.0;
    }
    p
}

/// Dense superoperator on the vectorized density matrix.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub space: HilbertSpace,
    /// dim² × dim² matrix acting on column-stacked ρ.
    pub matrix: Array2<C64>,
}

impl Superoperator {
    pub fn zeros(space: HilbertSpace) -> Self {
        let d2 = space.dim() * space.dim();
        Self {
            space,
            matrix: Array2::zeros((d2, d2)),
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Apply to a density matrix: devec(M · vec ρ).
    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let v = self.matrix.dot(&vectorize(rho));
        devectorize(&v.view())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.space, other.space, "superoperator spaces must match");
        Self {
            space: self.space,
            matrix: &self.matrix + &other.matrix,
        }
    }

    /// Maximum absolute value of the trace-preservation defect
    /// `Σ_i L[(i,i), ·]` (the vectorized identity applied from the left).
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for b in 0..d * d {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                acc += self.matrix[(i * d + i, b)];
            }
            worst = worst.max(acc.norm());
        }
        worst
    }
}

/// Superoperator for `X ↦ A X B` under column stacking: `Bᵀ ⊗ A`.
pub fn sandwich_superop(a: &OperatorMatrix, b: &OperatorMatrix) -> Superoperator {
    assert_eq!(a.space, b.space, "operator spaces must match");
    Superoperator {
        space: a.space,
        matrix: kron(&b.matrix.t().to_owned(), &a.matrix),
    }
}

/// Superoperator for `X ↦ C X` (left multiplication): `I ⊗ C`.
pub fn left_mul_superop(c: &OperatorMatrix) -> Superoperator {
    Superoperator {
        space: c.space,
        matrix: kron(&identity(c.dim()), &c.matrix),
    }
}

/// Superoperator for `X ↦ X C` (right multiplication): `Cᵀ ⊗ I`.
pub fn right_mul_superop(c: &OperatorMatrix) -> Superoperator {
    Superoperator {
        space: c.space,
        matrix: kron(&c.matrix.t().to_owned(), &identity(c.dim())),
    }
}

/// `(rate/2) · D[A]` with `D[A]ρ = 2AρA† − {A†A, ρ}`.
pub fn dissipator_superop(a: &OperatorMatrix, rate: f64) -> Result<Superoperator> {
    if a.matrix.nrows() != a.matrix.ncols() {
        return Err(Error::DimensionMismatch("jump operator must be square".into()));
    }
    if rate < 0.0 {
        return Err(Error::InvalidModel("dissipation rate must be nonnegative".into()));
    }
    let d = a.dim();
    let a_dag = dagger(&a.matrix);
    let ada = a_dag.dot(&a.matrix);
    let a_conj = a.matrix.mapv(|z| z.conj());

    let mut m = kron(&a_conj, &a.matrix).mapv(|z| z * C64::new(2.0, 0.0));
    m = m - kron(&identity(d), &ada);
    m = m - kron(&ada.t().to_owned(), &identity(d));
    m.mapv_inplace(|z| z * C64::new(rate / 2.0, 0.0));
    Ok(Superoperator {
        space: a.space,
        matrix: m,
    })
}

/// `ρ ↦ −i[H, ρ]`; rejects H with Hermiticity defect above 1e-12
/// (relative to its largest element).
pub fn hamiltonian_superop(h: &OperatorMatrix) -> Result<Superoperator> {
    let defect = max_abs(&(&h.matrix - &dagger(&h.matrix)));
    let scale = max_abs(&h.matrix).max(1.0);
    if defect > 1e-12 * scale {
        return Err(Error::NonHermitian { deviation: defect });
    }
    let d = h.dim();
    let m = (kron(&identity(d), &h.matrix) - kron(&h.matrix.t().to_owned(), &identity(d)))
        .mapv(|z| z * C64::new(0.0, -1.0));
    Ok(Superoperator {
        space: h.space,
        matrix: m,
    })
}

/// Assemble the Liouvillian of a model under the default dense cap.
pub fn assemble(spec: &ModelSpec) -> Result<Superoperator> {
    assemble_with_cap(spec, DENSE_ENTRY_CAP)
}

/// Assemble with an explicit cap on dense superoperator entries (dim⁴).
pub fn assemble_with_cap(spec: &ModelSpec, cap: usize) -> Result<Superoperator> {
    spec.validate()?;
    let space = spec.space();
    let dim = space.dim();
    let entries = dim * dim * dim * dim;
    if entries > cap {
        return Err(Error::DimensionCap { entries, cap });
    }

    let ops = embedded_ops(space)?;
    let phase = C64::from_polar(1.0, spec.phi);

    match spec.model {
        Model::ToyPhase | Model::HpToy => {
            // Jump operator e^{iφ}σ⁻ + J⁻ at rate Γ, pump D[σ⁺] at rate w.
            // For HpToy the collective lowering is the bosonic √N a.
            let jump = ops.sigma_minus.scaled(phase).add(&ops.j_minus);
            let decay = dissipator_superop(&jump, GAMMA)?;
            let pump = dissipator_superop(&ops.sigma_plus, spec.w)?;
            Ok(decay.add(&pump))
        }
        Model::Interacting => {
            let h = ops
                .j_plus
                .matmul(&ops.sigma_minus)
                .add(&ops.sigma_plus.matmul(&ops.j_minus))
                .scaled(C64::new(spec.v, 0.0));
            let coherent = hamiltonian_superop(&h)?;
            let jump = ops.sigma_minus.add(&ops.j_minus);
            let decay = dissipator_superop(&jump, GAMMA)?;
            let pump = dissipator_superop(&ops.sigma_plus, spec.w)?;
            Ok(coherent.add(&decay).add(&pump))
        }
        Model::CollectivePump => {
            // Jump operator e^{iφ}J⁻ + σ⁻ at rate Γ, collective pump D[J⁺].
            let jump = ops.j_minus.scaled(phase).add(&ops.sigma_minus);
            let decay = dissipator_superop(&jump, GAMMA)?;
            let pump = dissipator_superop(&ops.j_plus, spec.w)?;
            Ok(decay.add(&pump))
        }
        Model::AuxiliaryChannels => {
            // Jump operators carry no phase here; φ enters the measured
            // operators only (see the observables module).
            let jump = ops.sigma_minus.add(&ops.j_minus);
            let decay = dissipator_superop(&jump, GAMMA)?;
            let pump = dissipator_superop(&ops.sigma_plus, spec.w)?;
            let aux_sigma = dissipator_superop(&ops.sigma_minus, spec.kappa)?;
            let aux_j = dissipator_superop(&ops.j_minus, spec.kappa)?;
            Ok(decay.add(&pump).add(&aux_sigma).add(&aux_j))
        }
    }
}
