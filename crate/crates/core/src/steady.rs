//! Steady states of the assembled Liouvillians.

use ndarray::prelude::*;
use ndarray_linalg::{EigValsh, UPLO};

use crate::error::{Error, Result};
use crate::linalg::{
    dagger, devectorize, inverse_iteration, null_space_svd, refine_null_vector, vec_norm,
    vectorize,
};
use crate::liouvillian::{assemble, ModelSpec, Superoperator};
use crate::sector::ExcitationStructure;
use crate::{C64, GAMMA};

/// Largest Liouvillian dimension (dim²) handled by the dense SVD null
/// space; beyond this the solver switches to shift-inverted iteration or,
/// when the excitation block structure verifies, to the q = 0 block.
const DENSE_SVD_LIMIT: usize = 1000;

/// Degeneracy threshold: the null space counts as degenerate when the two
/// smallest singular values both fall below 1e-10 · σ_max.
const DEGENERACY_RATIO: f64 = 1e-10;

/// Validated steady-state density matrix.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub spec: ModelSpec,
    pub rho: Array2<C64>,
    /// ‖L vec(ρ)‖ / ‖vec(ρ)‖ after Hermitization and normalization.
    pub residual_norm: f64,
    /// Most negative eigenvalue of the Hermitized ρ.
    pub min_eigenvalue: f64,
}

/// Assemble the model and solve for its steady state.
pub fn steady_state(spec: &ModelSpec) -> Result<SteadyState> {
    let l = assemble(spec)?;
    solve_steady_state(spec, &l)
}

/// Solve `Lρ = 0` for a pre-assembled Liouvillian.
///
/// Strategy: dense SVD of the full superoperator when dim² ≤ 1000 (robust
/// near exceptional points); otherwise the verified excitation-block
/// restriction of the q = 0 sector, falling back to shift-inverted
/// iteration when no block structure is available.
pub fn solve_steady_state(spec: &ModelSpec, l: &Superoperator) -> Result<SteadyState> {
    let n = l.matrix.nrows();
    let raw = if n <= DENSE_SVD_LIMIT {
        let ns = null_space_svd(&l.matrix)?;
        check_degeneracy(ns.sigma_min, ns.sigma_next, ns.sigma_max)?;
        refine_null_vector(&l.matrix, &ns.vector, 2)
    } else if let Some(st) = ExcitationStructure::for_space(l.space) {
        if st.is_block_structured(l) {
            let (block, idx) = st.extract_sector(l, 0);
            let ns = null_space_svd(&block)?;
            check_degeneracy(ns.sigma_min, ns.sigma_next, ns.sigma_max)?;
            let refined = refine_null_vector(&block, &ns.vector, 2);
            st.embed_vector(&refined.view(), &idx)
        } else {
            iterative_null_vector(l)?
        }
    } else {
        iterative_null_vector(l)?
    };

    finish(spec.clone(), l, raw)
}

fn iterative_null_vector(l: &Superoperator) -> Result<Array1<C64>> {
    let scale = crate::linalg::norm_one(&l.matrix).max(1.0);
    let (v, _residual) = inverse_iteration(&l.matrix, 1e-12, 1e-10 * scale, 60)?;
    Ok(v)
}

fn check_degeneracy(sigma_min: f64, sigma_next: f64, sigma_max: f64) -> Result<()> {
    if sigma_next < DEGENERACY_RATIO * sigma_max {
        return Err(Error::NullSpaceDegenerate {
            sigma_min,
            sigma_next,
        });
    }
    Ok(())
}

/// Rotate out the arbitrary global phase, Hermitize, trace-normalize, and
/// validate positivity and the residual.
fn finish(spec: ModelSpec, l: &Superoperator, raw: Array1<C64>) -> Result<SteadyState> {
    let mut rho = devectorize(&raw.view());
    let tr = rho.diag().sum();
    if tr.norm() < 1e-14 {
        return Err(Error::NoConvergence { residual: f64::NAN });
    }
    // Null vectors come with an arbitrary global phase; align it so the
    // trace is real and positive before Hermitizing.
    let phase = tr / tr.norm();
    rho.mapv_inplace(|z| z / phase);
    rho = (&rho + &dagger(&rho)).mapv(|z| z * C64::new(0.5, 0.0));
    let tr = rho.diag().sum().re;
    rho.mapv_inplace(|z| z / C64::new(tr, 0.0));

    let v = vectorize(&rho);
    let residual_norm = vec_norm(&l.matrix.dot(&v).view()) / vec_norm(&v.view());
    if residual_norm > 1e-9 {
        return Err(Error::NoConvergence {
            residual: residual_norm,
        });
    }

    let herm_defect = crate::linalg::max_abs(&(&rho - &dagger(&rho)));
    debug_assert!(herm_defect <= 1e-10);

    let evals = rho.eigvalsh(UPLO::Lower)?;
    let min_eigenvalue = evals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -1e-8 {
        return Err(Error::NotPositive { min_eigenvalue });
    }

    Ok(SteadyState {
        spec,
        rho,
        residual_norm,
        min_eigenvalue,
    })
}

/// Closed-form single-atom steady state: magnetization ⟨σᶻ⟩, emitted
/// intensity, and Lorentzian linewidth of a lone pumped spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleAtomReference {
    pub magnetization: f64,
    pub intensity: f64,
    pub linewidth: f64,
}

pub fn single_atom_reference(w: f64) -> SingleAtomReference {
    SingleAtomReference {
        magnetization: (w - GAMMA) / (2.0 * (w + GAMMA)),
        intensity: w / (w + GAMMA),
        linewidth: w + GAMMA,
    }
}
