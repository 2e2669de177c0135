//! Liouvillian eigendecomposition and the emission spectral function.
//!
//! The two-time correlator of the collective lowering operator expands
//! over Liouvillian eigenmodes,
//!
//! ```text
//! ⟨S⁺(t)S⁻(0)⟩ = Σ_k e^{λ_k t} tr(r_k S⁺) tr(l_k† S⁻ ρ_ss),
//! ```
//!
//! so the emission spectrum is a residue sum of (generally interfering)
//! Lorentzians,
//!
//! ```text
//! S(ω) = 2 Re Σ_k c_k / (−i(ω + Im λ_k) − Re λ_k).
//! ```
//!
//! Near exceptional points the eigenbasis becomes defective and the
//! residue sum is abandoned for a time-domain route: propagate
//! `vec(S⁻ρ_ss)` under `exp(𝓛t)` and Fourier transform the correlator
//! directly. The two routes agree to high accuracy away from exceptional
//! points and the time-domain one stays well-behaved across them.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eig, expm, inverse, norm_one, vec_norm, vectorize};
use crate::liouvillian::{assemble, ModelSpec, Superoperator};
use crate::operators::OperatorMatrix;
use crate::sector::ExcitationStructure;
use crate::steady::SteadyState;
use crate::{C64, GAMMA};

/// Condition-number threshold above which the eigenbasis is treated as
/// defective and the residue sum is refused.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

/// Largest Hilbert dimension accepted by the *full* dim²-sized dense
/// eigendecomposition. Larger systems must use the emission-sector
/// restriction or the bosonized model.
pub const FULL_EIG_DIM_LIMIT: usize = 64;

/// Residues below this fraction of the largest one are flagged
/// non-contributing and skipped in the mode sum.
pub const RESIDUE_FLOOR: f64 = 1e-12;

/// Biorthonormalized spectral decomposition of a Liouvillian (full or
/// restricted to one excitation sector).
#[derive(Debug, Clone)]
pub struct LiouvillianSpectrum {
    /// Hilbert-space dimension.
    pub dim: usize,
    /// Eigenvalues sorted ascending by |Re λ|, ties by ascending Im λ.
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors (columns), in the coordinates of `indices`.
    right: Array2<C64>,
    /// Inverse of the right-eigenvector matrix; row k applied to a vector
    /// gives the biorthonormal left-eigenvector overlap tr(l_k† ·).
    right_inv: Array2<C64>,
    /// Vectorized-operator indices the coordinates refer to.
    pub indices: Vec<usize>,
    /// 1-norm condition estimate of the eigenvector matrix.
    pub condition_estimate: f64,
    /// Excitation sector the decomposition was restricted to, if any.
    pub sector: Option<i64>,
}

impl LiouvillianSpectrum {
    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Right eigenvector k as a full vectorized operator.
    pub fn right_vector(&self, k: usize) -> Array1<C64> {
        let mut full = Array1::<C64>::zeros(self.dim * self.dim);
        for (r, &a) in self.indices.iter().enumerate() {
            full[a] = self.right[(r, k)];
        }
        full
    }

    /// Left eigenvector k (biorthonormal partner) as a full vectorized
    /// operator: columns of (V⁻¹)†.
    pub fn left_vector(&self, k: usize) -> Array1<C64> {
        let mut full = Array1::<C64>::zeros(self.dim * self.dim);
        for (r, &a) in self.indices.iter().enumerate() {
            full[a] = self.right_inv[(k, r)].conj();
        }
        full
    }
}

fn decompose_block(
    block: &Array2<C64>,
    indices: Vec<usize>,
    dim: usize,
    sector: Option<i64>,
) -> Result<LiouvillianSpectrum> {
    let (vals, vecs) = eig(block)?;
    // Sort ascending by |Re|, ties by ascending Im.
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| {
        let ka = (vals[a].re.abs(), vals[a].im);
        let kb = (vals[b].re.abs(), vals[b].im);
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<C64> = order.iter().map(|&k| vals[k]).collect();
    let m = order.len();
    let mut right = Array2::<C64>::zeros((block.nrows(), m));
    for (col, &k) in order.iter().enumerate() {
        right.column_mut(col).assign(&vecs.column(k));
    }
    let right_inv = inverse(&right)?;
    let condition_estimate = norm_one(&right) * norm_one(&right_inv);
    Ok(LiouvillianSpectrum {
        dim,
        eigenvalues,
        right,
        right_inv,
        indices,
        condition_estimate,
        sector,
    })
}

/// Full dense eigendecomposition of the dim² × dim² superoperator.
///
/// Errors with [`Error::DefectiveNearEp`] when the eigenvector matrix is
/// too ill-conditioned for the residue sum to mean anything; callers then
/// fall back to [`time_domain_spectrum`].
pub fn eigendecompose(l: &Superoperator) -> Result<LiouvillianSpectrum> {
    let dim = l.dim();
    if dim > FULL_EIG_DIM_LIMIT {
        return Err(Error::DimensionCap {
            entries: dim * dim * dim * dim,
            cap: FULL_EIG_DIM_LIMIT.pow(4),
        });
    }
    let indices: Vec<usize> = (0..dim * dim).collect();
    let spectrum = decompose_block(&l.matrix, indices, dim, None)?;
    if spectrum.condition_estimate > DEFECTIVE_CONDITION {
        return Err(Error::DefectiveNearEp {
            condition: spectrum.condition_estimate,
        });
    }
    Ok(spectrum)
}

/// Eigendecomposition restricted to one verified excitation sector.
/// Sector −1 carries every mode with a nonzero emission residue.
pub fn eigendecompose_sector(l: &Superoperator, q: i64) -> Result<LiouvillianSpectrum> {
    let spectrum = eigendecompose_sector_unchecked(l, q)?;
    if spectrum.condition_estimate > DEFECTIVE_CONDITION {
        return Err(Error::DefectiveNearEp {
            condition: spectrum.condition_estimate,
        });
    }
    Ok(spectrum)
}

/// Sector eigendecomposition without the defectiveness gate; used by the
/// exceptional-point scan, which needs eigenvalues arbitrarily close to
/// the coalescence.
pub fn eigendecompose_sector_unchecked(l: &Superoperator, q: i64) -> Result<LiouvillianSpectrum> {
    let st = ExcitationStructure::for_space(l.space).ok_or_else(|| {
        Error::InvalidModel("space carries no excitation-sector structure".into())
    })?;
    if !st.is_block_structured(l) {
        return Err(Error::InvalidModel(
            "superoperator does not preserve excitation sectors exactly".into(),
        ));
    }
    let (block, indices) = st.extract_sector(l, q);
    decompose_block(&block, indices, l.dim(), Some(q))
}

/// Per-mode residues for an observable pair.
#[derive(Debug, Clone)]
pub struct ResidueSet {
    pub values: Vec<C64>,
    /// Modes with |c_k| ≥ 1e-12·max|c| actually enter the spectrum.
    pub contributing: Vec<bool>,
}

impl ResidueSet {
    pub fn sum(&self) -> C64 {
        self.values.iter().sum()
    }
}

/// Residues `c_k = tr(r_k S⁺) · tr(l_k† S⁻ ρ_ss)`.
pub fn residues(
    spectrum: &LiouvillianSpectrum,
    s_plus: &OperatorMatrix,
    s_minus: &OperatorMatrix,
    state: &SteadyState,
) -> Result<ResidueSet> {
    let d = spectrum.dim;
    if s_plus.dim() != d || state.rho.nrows() != d {
        return Err(Error::DimensionMismatch(
            "observable dimensions must match the decomposed space".into(),
        ));
    }
    // vec(S⁻ρ_ss), gathered onto the decomposition support.
    let x_full = vectorize(&s_minus.matrix.dot(&state.rho));
    let x_norm = vec_norm(&x_full.view());
    let mut member = vec![false; x_full.len()];
    let mut x = Array1::<C64>::zeros(spectrum.indices.len());
    for (r, &a) in spectrum.indices.iter().enumerate() {
        x[r] = x_full[a];
        member[a] = true;
    }
    if spectrum.sector.is_some() {
        let leak: f64 = x_full
            .iter()
            .enumerate()
            .filter(|(a, _)| !member[*a])
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if leak > 1e-10 * x_norm.max(1e-300) {
            return Err(Error::InvalidModel(format!(
                "S⁻ρ_ss leaks {leak:.2e} outside the decomposed sector"
            )));
        }
    }
    // tr(l_k† S⁻ρ_ss) for all k at once: rows of V⁻¹ applied to x.
    let overlaps = spectrum.right_inv.dot(&x);
    // tr(r_k S⁺): gather vec(S⁺ᵀ) and take the plain (unconjugated) dot.
    let sp_t = vectorize(&s_plus.matrix.t().to_owned());
    let mut weights = Array1::<C64>::zeros(spectrum.indices.len());
    for (r, &a) in spectrum.indices.iter().enumerate() {
        weights[r] = sp_t[a];
    }
    let traces = weights.dot(&spectrum.right);

    let values: Vec<C64> = traces
        .iter()
        .zip(overlaps.iter())
        .map(|(t, o)| t * o)
        .collect();
    let max_mag = values.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let contributing = values
        .iter()
        .map(|c| c.norm() >= RESIDUE_FLOOR * max_mag && max_mag > 0.0)
        .collect();
    Ok(ResidueSet {
        values,
        contributing,
    })
}

/// How a set of peaks is arranged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakStructure {
    Single,
    SymmetricDouble,
    Multi,
}

impl std::fmt::Display for PeakStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PeakStructure::Single => "single",
            PeakStructure::SymmetricDouble => "symmetric-double",
            PeakStructure::Multi => "multi",
        };
        write!(f, "{s}")
    }
}

/// Which route produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    /// Residue sum over the eigendecomposition.
    Eig,
    /// Propagation of the correlator and one-sided Fourier transform.
    TimeDomain,
}

impl std::fmt::Display for SpectrumMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}",
            match self {
                SpectrumMethod::Eig => "eig",
                SpectrumMethod::TimeDomain => "time-domain",
            }
        )
    }
}

/// Sampled spectral function with extracted line parameters.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub s: Vec<f64>,
    /// FWHM of the dominant peak (per-peak for symmetric doublets).
    pub linewidth: f64,
    /// Position of the largest peak.
    pub peak_shift: f64,
    pub peak_structure: PeakStructure,
    pub method: SpectrumMethod,
    /// Condition estimate of the eigenbasis (eig route only).
    pub condition_estimate: Option<f64>,
    /// Per-mode partial spectra (eig route, on request).
    pub per_mode: Option<PerModeContributions>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PerModeContributions {
    pub eigenvalues: Vec<C64>,
    pub residues: Vec<C64>,
    /// One partial spectrum per contributing mode, same grid as `omega`.
    pub partials: Vec<Vec<f64>>,
}

/// Evaluate the residue sum on a grid. Modes flagged non-contributing are
/// skipped (this silently drops the steady-state mode, whose residue
/// vanishes because ⟨S±⟩ = 0 in every model here).
pub fn spectral_function(
    res: &ResidueSet,
    eigenvalues: &[C64],
    omega: &[f64],
) -> Vec<f64> {
    omega
        .iter()
        .map(|&om| {
            let mut acc = C64::new(0.0, 0.0);
            for ((c, lam), keep) in res
                .values
                .iter()
                .zip(eigenvalues.iter())
                .zip(res.contributing.iter())
            {
                if !keep {
                    continue;
                }
                acc += c / C64::new(-lam.re, -(om + lam.im));
            }
            2.0 * acc.re
        })
        .collect()
}

/// Symmetric grid of `points` samples covering ±half_width (odd count
/// keeps ω = 0 on the grid).
pub fn symmetric_grid(half_width: f64, points: usize) -> Vec<f64> {
    let n = if points % 2 == 0 { points + 1 } else { points };
    (0..n)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
        .collect()
}

/// Default grid half-width for a model: 5·(w + Γ(N+1)).
pub fn auto_half_width(spec: &ModelSpec) -> f64 {
    5.0 * (spec.w + GAMMA * (spec.n as f64 + 1.0))
}

/// Trapezoidal integral of a sampled spectrum (sum-rule checks).
pub fn integrate(omega: &[f64], s: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..omega.len() {
        acc += 0.5 * (s[i] + s[i - 1]) * (omega[i] - omega[i - 1]);
    }
    acc
}

/// Extracted line parameters.
#[derive(Debug, Clone, Copy)]
pub struct LinewidthReport {
    pub linewidth: f64,
    pub peak_shift: f64,
    pub structure: PeakStructure,
    /// Number of grid points the FWHM spans; < 10 earns a coarse-grid
    /// warning upstream.
    pub points_across: usize,
}

/// Locate peaks and measure the FWHM.
///
/// Local maxima above 5% of the global maximum are peak candidates.
/// Exactly two candidates symmetric about zero (positions summing to
/// within two grid steps, heights within 5%) are a symmetric doublet and
/// the FWHM of the taller peak is reported. One candidate is a single
/// line; three or more report the dominant peak. When a deep central dip
/// is absent the inner half-crossing of a doublet peak may not exist; the
/// width is then mirrored from the outer crossing.
pub fn extract_linewidth(omega: &[f64], s: &[f64]) -> Result<LinewidthReport> {
    let n = omega.len();
    if n < 5 {
        return Err(Error::GridTooNarrow("need at least 5 grid points".into()));
    }
    let global_max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(global_max > 0.0) {
        return Err(Error::GridTooNarrow(
            "spectrum is nonpositive on the whole grid".into(),
        ));
    }
    let argmax = s
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    if argmax == 0 || argmax == n - 1 {
        return Err(Error::GridTooNarrow(
            "global maximum sits on the grid edge".into(),
        ));
    }

    let mut peaks: Vec<usize> = Vec::new();
    for i in 1..n - 1 {
        if s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] >= 0.05 * global_max {
            peaks.push(i);
        }
    }
    if peaks.is_empty() {
        peaks.push(argmax);
    }

    let (structure, main) = match peaks.len() {
        1 => (PeakStructure::Single, peaks[0]),
        2 => {
            let (a, b) = (peaks[0], peaks[1]);
            let step = (omega[a + 1] - omega[a]).max(omega[b + 1] - omega[b]);
            let symmetric = (omega[a] + omega[b]).abs() <= 2.0 * step;
            let heights_close = (s[a] - s[b]).abs() <= 0.05 * s[a].max(s[b]);
            if symmetric && heights_close {
                let main = if s[a] >= s[b] {
                    if s[a] == s[b] && omega[b] > 0.0 {
                        b
                    } else {
                        a
                    }
                } else {
                    b
                };
                (PeakStructure::SymmetricDouble, main)
            } else {
                let main = if s[a] >= s[b] { a } else { b };
                (PeakStructure::Multi, main)
            }
        }
        _ => (PeakStructure::Multi, argmax),
    };

    let half = s[main] / 2.0;

    // March outward until the spectrum crosses half height, stopping at
    // the edge of this peak's basin (the first local minimum).
    let march = |dir: isize| -> Option<f64> {
        let mut i = main as isize;
        loop {
            let next = i + dir;
            if next < 0 || next as usize >= n {
                return None; // ran off the grid while above half
            }
            let (iu, nu) = (i as usize, next as usize);
            if s[nu] < half {
                // Linear interpolation between i and next.
                let t = (s[iu] - half) / (s[iu] - s[nu]);
                return Some(omega[iu] + t * (omega[nu] - omega[iu]));
            }
            if s[nu] > s[iu] && (s[iu] < s[main]) {
                // Rising again before crossing: basin edge (dip shallower
                // than half maximum).
                return Some(f64::NAN);
            }
            i = next;
        }
    };

    // None: ran off the grid while above half maximum. Some(NaN): hit the
    // basin edge first (shallow dip); that side is mirrored from the other.
    let (lo, hi) = match (march(-1), march(1)) {
        (Some(l), Some(r)) if l.is_finite() && r.is_finite() => (l, r),
        (Some(l), Some(_)) if l.is_finite() => (l, omega[main] + (omega[main] - l)),
        (Some(_), Some(r)) if r.is_finite() => (omega[main] - (r - omega[main]), r),
        _ => {
            return Err(Error::GridTooNarrow(
                "half maximum not bracketed within the grid".into(),
            ))
        }
    };

    let linewidth = hi - lo;
    let points_across = omega
        .iter()
        .filter(|&&om| om >= lo && om <= hi)
        .count();
    Ok(LinewidthReport {
        linewidth,
        peak_shift: omega[main],
        structure,
        points_across,
    })
}

/// One-sided Fourier transform of exactly sampled correlator data.
#[derive(Debug, Clone)]
pub struct CorrelatorSamples {
    pub values: Vec<C64>,
    pub dt: f64,
}

impl CorrelatorSamples {
    /// `S(ω) = 2 Re ∫₀^∞ e^{iωt} C(t) dt` by composite Boole quadrature
    /// over the sampled range.
    pub fn spectrum_at(&self, omega: &[f64]) -> Vec<f64> {
        let n = self.values.len();
        debug_assert_eq!((n - 1) % 4, 0, "sample count must be 4k+1 for Boole");
        let w = |i: usize| -> f64 {
            if i == 0 || i == n - 1 {
                7.0
            } else {
                match i % 4 {
                    0 => 14.0,
                    1 | 3 => 32.0,
                    _ => 12.0,
                }
            }
        };
        omega
            .iter()
            .map(|&om| {
                let rot = C64::from_polar(1.0, om * self.dt);
                let mut phase = C64::new(1.0, 0.0);
                let mut acc = C64::new(0.0, 0.0);
                for (i, c) in self.values.iter().enumerate() {
                    acc += phase * c * C64::new(w(i), 0.0);
                    phase *= rot;
                }
                2.0 * (acc * C64::new(2.0 * self.dt / 45.0, 0.0)).re
            })
            .collect()
    }
}

/// Propagate `vec(S⁻ρ_ss)` under `exp(𝓛t)` and sample
/// `C(t) = tr(S⁺ · e^{𝓛t}[S⁻ρ_ss])` on a uniform grid.
///
/// `t_max` defaults to adaptive: stepping continues until the correlator
/// has decayed to 1e-9 of its initial magnitude. `dt` defaults to
/// `0.12 / (‖𝓛‖₁ + ω_max)`, which resolves every mode frequency the
/// quadrature will meet.
pub fn correlation_samples(
    l: &Superoperator,
    s_plus: &OperatorMatrix,
    s_minus: &OperatorMatrix,
    state: &SteadyState,
    omega_max: f64,
    t_max: Option<f64>,
    dt: Option<f64>,
) -> Result<CorrelatorSamples> {
    let x_full = vectorize(&s_minus.matrix.dot(&state.rho));
    let sp_t = vectorize(&s_plus.matrix.t().to_owned());

    // Work in the emission sector when the structure verifies; otherwise
    // propagate the full vectorized operator.
    let (mat, x0, weights) = match ExcitationStructure::for_space(l.space) {
        Some(st) if st.is_block_structured(l) => {
            let (block, idx) = st.extract_sector(l, -1);
            let (x, leak) = st.project_vector(&x_full.view(), &idx);
            let norm = vec_norm(&x_full.view());
            if leak > 1e-10 * norm.max(1e-300) {
                return Err(Error::Integration(format!(
                    "initial correlator state leaks {leak:.2e} outside the emission sector"
                )));
            }
            let w = Array1::from_iter(idx.iter().map(|&a| sp_t[a]));
            (block, x, w)
        }
        _ => (l.matrix.clone(), x_full, sp_t),
    };

    let scale = norm_one(&mat) + omega_max;
    let dt = dt.unwrap_or_else(|| 0.12 / scale.max(1e-6));
    let step = expm(&mat.mapv(|z| z * C64::new(dt, 0.0)));

    let c0_mag = {
        let c0 = weights.dot(&x0);
        c0.norm()
    };
    if c0_mag == 0.0 {
        return Err(Error::Integration("correlator vanishes at t = 0".into()));
    }

    let hard_cap: usize = 4_000_000;
    let target_steps = t_max.map(|t| (t / dt).ceil() as usize);
    let mut samples = Vec::new();
    let mut x = x0;
    let mut quiet = 0usize;
    let mut n_steps = 0usize;
    loop {
        let c = weights.dot(&x);
        samples.push(c);
        if let Some(t) = target_steps {
            if n_steps >= t {
                break;
            }
        } else {
            if c.norm() <= 1e-9 * c0_mag {
                quiet += 1;
                if quiet >= 4 {
                    break;
                }
            } else {
                quiet = 0;
            }
            if n_steps >= hard_cap {
                return Err(Error::Integration(format!(
                    "correlator failed to decay within {hard_cap} steps (dt = {dt:.3e})"
                )));
            }
        }
        x = step.dot(&x);
        n_steps += 1;
    }
    // Pad to a 4k+1 count for Boole quadrature.
    while (samples.len() - 1) % 4 != 0 {
        let c = weights.dot(&x);
        samples.push(c);
        x = step.dot(&x);
    }
    Ok(CorrelatorSamples {
        values: samples,
        dt,
    })
}

/// Exceptional points of a one-parameter family: pump rates where the two
/// slowest emission-sector eigenvalues coalesce.
///
/// Scans `samples ≥ 200` points of `[w_min, w_max]`, brackets every
/// real ↔ complex-conjugate transition of the slow pair, bisects each
/// bracket to ±0.01Γ, and keeps the candidates where the eigenvector
/// condition number spikes above its neighborhood.
pub fn find_exceptional_points(
    template: &ModelSpec,
    w_min: f64,
    w_max: f64,
    samples: usize,
) -> Result<Vec<f64>> {
    let samples = samples.max(200);
    let slow_pair_complex = |w: f64| -> Result<bool> {
        let mut spec = template.clone();
        spec.w = w;
        let l = assemble(&spec)?;
        let s = eigendecompose_sector_unchecked(&l, -1)?;
        Ok(s.eigenvalues[0].im.abs() > 1e-7)
    };
    let condition_at = |w: f64| -> Result<f64> {
        let mut spec = template.clone();
        spec.w = w;
        let l = assemble(&spec)?;
        let s = eigendecompose_sector_unchecked(&l, -1)?;
        Ok(s.condition_estimate)
    };

    let mut points = Vec::new();
    let mut prev_w = w_min;
    let mut prev = slow_pair_complex(prev_w)?;
    for i in 1..samples {
        let w = w_min + (w_max - w_min) * i as f64 / (samples - 1) as f64;
        let here = slow_pair_complex(w)?;
        if here != prev {
            let (mut lo, mut hi) = (prev_w, w);
            let lo_state = prev;
            while hi - lo > 5e-3 {
                let mid = 0.5 * (lo + hi);
                if slow_pair_complex(mid)? == lo_state {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let w_star = 0.5 * (lo + hi);
            // Confirm the eigenvector-condition spike.
            let c_star = condition_at(w_star)?;
            let span = (w_max - w_min) * 0.05;
            let c_away = condition_at((w_star - span).max(w_min))?
                .min(condition_at((w_star + span).min(w_max))?);
            if c_star > 2.0 * c_away {
                points.push(w_star);
            }
        }
        prev = here;
        prev_w = w;
    }
    Ok(points)
}

/// Closed-form leading eigenvalue pair of the bosonized model in the
/// strong-pump cumulant limit:
/// `λ_{1,2} ≈ −¼ (X ∓ √(X² − Y))` with `X = w + Γ(N+1)`,
/// `Y = 4NΓ(w + 2Γ)`.
pub fn cumulant_reference_eigenvalues(n: usize, w: f64) -> (C64, C64) {
    let x = w + GAMMA * (n as f64 + 1.0);
    let y = 4.0 * n as f64 * GAMMA * (w + 2.0 * GAMMA);
    let disc = C64::new(x * x - y, 0.0).sqrt();
    let lam1 = (C64::new(x, 0.0) - disc) * C64::new(-0.25, 0.0);
    let lam2 = (C64::new(x, 0.0) + disc) * C64::new(-0.25, 0.0);
    (lam1, lam2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::dissipator_superop;
    use crate::observables::{evaluate, measurement_ops, PhaseConvention};
    use crate::operators::build_pumped_spin;
    use crate::steady::steady_state;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn lone_spin_eigenvalue_pattern() {
        // (Γ/2)D[σ⁻] + (w/2)D[σ⁺] at w = 0: eigenvalues {0, -Γ/2, -Γ/2, -Γ}.
        let s = build_pumped_spin();
        let l = dissipator_superop(&s.minus, GAMMA).unwrap();
        let spec = eigendecompose(&l).unwrap();
        let re: Vec<f64> = spec.eigenvalues.iter().map(|z| z.re).collect();
        assert_abs_diff_eq!(re[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(re[1], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(re[2], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(re[3], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn biorthonormality_and_stability() {
        let spec_m = ModelSpec::toy_phase(2, 1.3, 0.6);
        let l = assemble(&spec_m).unwrap();
        let s = eigendecompose(&l).unwrap();
        // tr(l_j† r_k) = δ_jk.
        for j in [0usize, 3, 7] {
            for k in [0usize, 3, 7] {
                let lj = s.left_vector(j);
                let rk = s.right_vector(k);
                let dot: C64 = lj.iter().zip(rk.iter()).map(|(a, b)| a.conj() * b).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((dot - C64::new(want, 0.0)).norm() < 1e-9, "({j},{k})");
            }
        }
        // Stability: no eigenvalue in the right half plane.
        let max_re = s.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(max_re <= 1e-10, "max Re λ = {max_re:.2e}");
        // Conjugate closure as a multiset.
        for lam in &s.eigenvalues {
            let conj = lam.conj();
            let found = s
                .eigenvalues
                .iter()
                .any(|mu| (mu - conj).norm() < 1e-8);
            assert!(found, "conjugate of {lam} missing");
        }
    }

    #[test]
    fn sector_restriction_matches_full_decomposition() {
        // The emission-sector eigenvalues coincide with full-spectrum modes
        // from the conjugate sector pair, so a degenerate eigensolve may
        // split one residue across two returned eigenvectors; the invariant
        // quantity is the residue aggregated per distinct eigenvalue.
        let spec_m = ModelSpec::toy_phase(1, 5.0, 0.0);
        let l = assemble(&spec_m).unwrap();
        let state = steady_state(&spec_m).unwrap();
        let (sp, sm, _) = measurement_ops(&spec_m, PhaseConvention::Jump, 0.0).unwrap();

        let full = eigendecompose(&l).unwrap();
        let full_res = residues(&full, &sp, &sm, &state).unwrap();
        let sector = eigendecompose_sector(&l, -1).unwrap();
        let sector_res = residues(&sector, &sp, &sm, &state).unwrap();

        let aggregate = |vals: &[C64], res: &ResidueSet| -> Vec<(C64, C64)> {
            let mut groups: Vec<(C64, C64)> = Vec::new();
            for (lam, c) in vals.iter().zip(res.values.iter()) {
                if let Some(g) = groups.iter_mut().find(|(l0, _)| (l0 - lam).norm() < 1e-8) {
                    g.1 += c;
                } else {
                    groups.push((*lam, *c));
                }
            }
            groups.retain(|(_, c)| c.norm() > 1e-10);
            groups.sort_by(|a, b| {
                (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap()
            });
            groups
        };
        let full_pairs = aggregate(&full.eigenvalues, &full_res);
        let sector_pairs = aggregate(&sector.eigenvalues, &sector_res);
        assert_eq!(full_pairs.len(), sector_pairs.len());
        for (a, b) in full_pairs.iter().zip(sector_pairs.iter()) {
            assert!((a.0 - b.0).norm() < 1e-9, "eigenvalues {} vs {}", a.0, b.0);
            assert!((a.1 - b.1).norm() < 1e-9, "residues {} vs {}", a.1, b.1);
        }

        // And the evaluated spectra agree pointwise.
        let grid = symmetric_grid(30.0, 301);
        let s_full = spectral_function(&full_res, &full.eigenvalues, &grid);
        let s_sector = spectral_function(&sector_res, &sector.eigenvalues, &grid);
        let max: f64 = s_full.iter().cloned().fold(0.0, f64::max);
        for (a, b) in s_full.iter().zip(s_sector.iter()) {
            assert!((a - b).abs() <= 1e-9 * max);
        }
    }

    #[test]
    fn residue_sum_rule() {
        // Σ_k c_k = ⟨S⁺S⁻⟩ in steady state.
        for (w, phi) in [(1.0, 0.0), (5.0, PI), (2.0, 1.1)] {
            let spec_m = ModelSpec::toy_phase(2, w, phi);
            let l = assemble(&spec_m).unwrap();
            let state = steady_state(&spec_m).unwrap();
            let (sp, sm, _) = measurement_ops(&spec_m, PhaseConvention::Jump, 0.0).unwrap();
            let spct = eigendecompose_sector(&l, -1).unwrap();
            let res = residues(&spct, &sp, &sm, &state).unwrap();
            let obs = evaluate(&state, 2, PhaseConvention::Jump, 0.0).unwrap();
            let total = res.sum();
            assert!(
                (total.re - obs.intensity).abs() <= 1e-8,
                "w={w} φ={phi}: Σc = {total}, ⟨S⁺S⁻⟩ = {}",
                obs.intensity
            );
            assert!(total.im.abs() <= 1e-10);
        }
    }

    #[test]
    fn single_atom_lorentzian() {
        // A lone pumped spin emits a Lorentzian of FWHM w + Γ.
        let w = 1.0;
        let s = build_pumped_spin();
        let decay = dissipator_superop(&s.minus, GAMMA).unwrap();
        let pump = dissipator_superop(&s.plus, w).unwrap();
        let l = decay.add(&pump);
        // Steady state of the lone spin: diag(w, Γ)/(w+Γ).
        let spec_m = ModelSpec::toy_phase(1, w, 0.0); // placeholder spec for the wrapper
        let ns = crate::linalg::null_space_svd(&l.matrix).unwrap();
        let rho = crate::linalg::devectorize(&ns.vector.view());
        let rho = (&rho + &crate::linalg::dagger(&rho)).mapv(|z| z * C64::new(0.5, 0.0));
        let tr = rho.diag().sum();
        let rho = rho.mapv(|z| z / tr);
        assert_abs_diff_eq!(rho[(0, 0)].re, w / (w + GAMMA), epsilon = 1e-12);

        let state = SteadyState {
            spec: spec_m,
            rho,
            residual_norm: 0.0,
            min_eigenvalue: 0.0,
        };
        let spct = eigendecompose(&l).unwrap();
        let res = residues(&spct, &s.plus, &s.minus, &state).unwrap();
        let grid = symmetric_grid(40.0 * (w + GAMMA), 4001);
        let sv = spectral_function(&res, &spct.eigenvalues, &grid);
        let report = extract_linewidth(&grid, &sv).unwrap();
        assert_eq!(report.structure, PeakStructure::Single);
        assert_abs_diff_eq!(report.linewidth, w + GAMMA, epsilon = 0.02 * (w + GAMMA));
        assert_abs_diff_eq!(report.peak_shift, 0.0, epsilon = 1e-9);

        // Fourier sum rule on the wide grid: ∫S dω = 2π ⟨S⁺S⁻⟩.
        let integral = integrate(&grid, &sv);
        let intensity = w / (w + GAMMA);
        assert!((integral - 2.0 * PI * intensity).abs() <= 0.02 * 2.0 * PI * intensity);
    }

    #[test]
    fn two_spin_dip_and_constructive_peak() {
        // N=1, w=5Γ: destructive dip at φ=0 (c₁ < 0), global maximum at
        // zero detuning for φ=π (c₁ > 0).
        let w = 5.0;
        let grid = symmetric_grid(60.0, 2001);

        let spec0 = ModelSpec::toy_phase(1, w, 0.0);
        let l = assemble(&spec0).unwrap();
        let state = steady_state(&spec0).unwrap();
        let (sp, sm, _) = measurement_ops(&spec0, PhaseConvention::Jump, 0.0).unwrap();
        let spct = eigendecompose_sector(&l, -1).unwrap();
        let res = residues(&spct, &sp, &sm, &state).unwrap();
        // Slowest contributing mode carries a negative residue.
        let slow = res
            .values
            .iter()
            .zip(res.contributing.iter())
            .find(|(_, &keep)| keep)
            .unwrap()
            .0;
        assert!(slow.re < 0.0, "c₁ = {slow}");
        let sv = spectral_function(&res, &spct.eigenvalues, &grid);
        let mid = grid.len() / 2;
        assert!(sv[mid] < sv[mid + 30], "dip at zero detuning");
        let report = extract_linewidth(&grid, &sv).unwrap();
        assert_eq!(report.structure, PeakStructure::SymmetricDouble);

        let spec_pi = ModelSpec::toy_phase(1, w, PI);
        let l = assemble(&spec_pi).unwrap();
        let state = steady_state(&spec_pi).unwrap();
        let spct = eigendecompose_sector(&l, -1).unwrap();
        let res = residues(&spct, &sp, &sm, &state).unwrap();
        let slow = res
            .values
            .iter()
            .zip(res.contributing.iter())
            .find(|(_, &keep)| keep)
            .unwrap()
            .0;
        assert!(slow.re > 0.0, "c₁ = {slow}");
        let sv = spectral_function(&res, &spct.eigenvalues, &grid);
        let max = sv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(sv[mid], max, epsilon = 1e-9 * max.abs());
    }

    #[test]
    fn time_domain_matches_residue_sum() {
        // Away from exceptional points the two routes agree pointwise.
        for (w, phi) in [(5.0, 0.0), (5.0, PI), (4.0, 1.3)] {
            let spec_m = ModelSpec::toy_phase(1, w, phi);
            let l = assemble(&spec_m).unwrap();
            let state = steady_state(&spec_m).unwrap();
            let (sp, sm, _) = measurement_ops(&spec_m, PhaseConvention::Jump, 0.0).unwrap();
            let spct = eigendecompose_sector(&l, -1).unwrap();
            let res = residues(&spct, &sp, &sm, &state).unwrap();
            let grid = symmetric_grid(40.0, 801);
            let s_eig = spectral_function(&res, &spct.eigenvalues, &grid);

            let samples =
                correlation_samples(&l, &sp, &sm, &state, 40.0, None, None).unwrap();
            // C(0) = ⟨S⁺S⁻⟩.
            let obs = evaluate(&state, 2, PhaseConvention::Jump, 0.0).unwrap();
            assert!((samples.values[0].re - obs.intensity).abs() < 1e-10);
            let s_td = samples.spectrum_at(&grid);

            let scale: f64 = s_eig.iter().cloned().fold(0.0, f64::max);
            let linf = s_eig
                .iter()
                .zip(s_td.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(
                linf <= 1e-6 * scale,
                "w={w} φ={phi}: L∞ {linf:.3e} vs scale {scale:.3e}"
            );
        }
    }

    #[test]
    fn exceptional_points_of_the_two_spin_model() {
        let template = ModelSpec::toy_phase(1, 1.0, 0.0);
        let eps = find_exceptional_points(&template, 0.1, 4.0, 240).unwrap();
        assert_eq!(eps.len(), 2, "found {eps:?}");
        assert!((0.5..=0.7).contains(&eps[0]), "w₁ = {}", eps[0]);
        assert!((2.4..=2.6).contains(&eps[1]), "w₂ = {}", eps[1]);

        // Between the exceptional points the slow pair shares its real
        // part with conjugate imaginary parts.
        let mid = 0.5 * (eps[0] + eps[1]);
        let mut spec_m = template.clone();
        spec_m.w = mid;
        let l = assemble(&spec_m).unwrap();
        let s = eigendecompose_sector_unchecked(&l, -1).unwrap();
        let (l1, l2) = (s.eigenvalues[0], s.eigenvalues[1]);
        assert!((l1.re - l2.re).abs() < 1e-6);
        assert!((l1.im + l2.im).abs() < 1e-9);
        assert!(l1.im.abs() > 1e-3);
    }

    #[test]
    fn slow_eigenvalue_saturates_at_strong_pump() {
        // Re λ₁ → −Γ/2 for the two-spin model as w grows. The exact value
        // at w = 50Γ is −0.5285220407 (root of the emission-sector quartic;
        // the deviation from −Γ/2 decays as ≈ 1.43Γ²/w).
        let slow = |w: f64| -> f64 {
            let l = assemble(&ModelSpec::toy_phase(1, w, 0.0)).unwrap();
            eigendecompose_sector(&l, -1).unwrap().eigenvalues[0].re
        };
        let at50 = slow(50.0);
        assert_abs_diff_eq!(at50, -0.5285220406587, epsilon = 1e-9);
        assert!((at50 + 0.5).abs() <= 0.05 * GAMMA, "Re λ₁ = {at50} at w = 50Γ");
        // Deep in the saturation regime the strict 5%-of-Γ/2 band holds too.
        let at500 = slow(500.0);
        assert!((at500 + 0.5).abs() <= 0.01 * 0.5, "Re λ₁ = {at500} at w = 500Γ");
        // Faster modes keep growing linearly with the pump.
        let l = assemble(&ModelSpec::toy_phase(1, 50.0, 0.0)).unwrap();
        let s = eigendecompose_sector(&l, -1).unwrap();
        assert!(s.eigenvalues[1].re < -20.0);
    }

    #[test]
    fn cumulant_closed_forms() {
        // Strong-pump limit of the slow pair: λ₁ → −ΓN/2 exactly in the
        // formula (−Γ(N+1)/2 to leading order in N).
        let n = 100;
        let (l1, _) = cumulant_reference_eigenvalues(n, 1e9);
        assert!((l1.re + n as f64 / 2.0).abs() < 0.1);
        // Discriminant sign flips where the pair coalesces.
        let (a, b) = cumulant_reference_eigenvalues(100, 100.0);
        assert!(a.im.abs() > 0.0 && (a.im + b.im).abs() < 1e-9);
    }

    #[test]
    fn linewidth_extraction_on_synthetic_lines() {
        // Single Lorentzian.
        let grid = symmetric_grid(50.0, 4001);
        let gamma = 2.0;
        let s: Vec<f64> = grid.iter().map(|&w| gamma / (w * w + gamma * gamma / 4.0)).collect();
        let r = extract_linewidth(&grid, &s).unwrap();
        assert_eq!(r.structure, PeakStructure::Single);
        assert_abs_diff_eq!(r.linewidth, gamma, epsilon = 0.01 * gamma);

        // Symmetric doublet with a deep dip.
        let s: Vec<f64> = grid
            .iter()
            .map(|&w| {
                let lor = |c: f64| 1.0 / ((w - c) * (w - c) + 1.0);
                lor(10.0) + lor(-10.0)
            })
            .collect();
        let r = extract_linewidth(&grid, &s).unwrap();
        assert_eq!(r.structure, PeakStructure::SymmetricDouble);
        assert_abs_diff_eq!(r.linewidth, 2.0, epsilon = 0.05 * 2.0);
        assert_abs_diff_eq!(r.peak_shift.abs(), 10.0, epsilon = 0.1);

        // Narrow line on a too-coarse grid still brackets but warns via
        // points_across.
        let coarse = symmetric_grid(50.0, 41);
        let s: Vec<f64> = coarse.iter().map(|&w| 1.0 / (w * w + 1.0)).collect();
        let r = extract_linewidth(&coarse, &s).unwrap();
        assert!(r.points_across < 10);

        // Half maximum outside the grid: error.
        let tight = symmetric_grid(0.5, 101);
        let s: Vec<f64> = tight.iter().map(|&w| 1.0 / (w * w + 100.0)).collect();
        assert!(extract_linewidth(&tight, &s).is_err());
    }
}
