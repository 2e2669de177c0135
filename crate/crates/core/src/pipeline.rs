//! End-to-end evaluation of one parameter point: assemble, solve, measure,
//! resolve the spectrum, classify.

use crate::error::{Error, Result};
use crate::liouvillian::{assemble, ModelSpec, Superoperator};
use crate::observables::{evaluate, measurement_ops, ObservableSet, PhaseConvention};
use crate::regimes::{Classifier, RegimeLabel};
use crate::spectrum::{
    auto_half_width, correlation_samples, eigendecompose, eigendecompose_sector,
    extract_linewidth, residues, spectral_function, symmetric_grid, LiouvillianSpectrum,
    PerModeContributions, SpectrumMethod, SpectrumResult, FULL_EIG_DIM_LIMIT,
};
use crate::steady::{solve_steady_state, SteadyState};

/// Spectrum evaluation controls.
#[derive(Debug, Clone)]
pub struct SpectrumOptions {
    /// Half-width of the symmetric ω grid; `None` = 5·(w + Γ(N+1)),
    /// widened further to cover every contributing mode.
    pub half_width: Option<f64>,
    /// Base grid size (forced odd so ω = 0 stays on the grid).
    pub points: usize,
    /// Insert finer samples around detected peaks until the narrowest
    /// contributing mode is resolved.
    pub refine: bool,
    /// Keep per-mode partial spectra.
    pub per_mode: bool,
    /// Time-domain overrides (fallback route only).
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            half_width: None,
            points: 4001,
            refine: true,
            per_mode: false,
            t_max: None,
            dt: None,
        }
    }
}

/// Per-point evaluation controls.
#[derive(Debug, Clone)]
pub struct PointOptions {
    pub k_max: u32,
    /// `None` skips spectra (observables-only sweeps).
    pub spectrum: Option<SpectrumOptions>,
    pub classifier: Classifier,
}

impl Default for PointOptions {
    fn default() -> Self {
        Self {
            k_max: 3,
            spectrum: Some(SpectrumOptions::default()),
            classifier: Classifier::default(),
        }
    }
}

/// Everything computed for one parameter point.
#[derive(Debug, Clone)]
pub struct PointSummary {
    pub spec: ModelSpec,
    pub observables: ObservableSet,
    pub spectrum: Option<SpectrumResult>,
    pub label: Option<RegimeLabel>,
    /// Steady-state residual ‖Lρ‖/‖ρ‖.
    pub residual: f64,
}

/// The measurement convention a model is evaluated under: models whose
/// jump operators carry the phase use bare observables; the
/// auxiliary-channel model keeps its phase in the measured operators.
pub fn default_convention(spec: &ModelSpec) -> (PhaseConvention, f64) {
    if spec.phase_in_jump() {
        (PhaseConvention::Jump, 0.0)
    } else {
        (PhaseConvention::Observable, spec.phi)
    }
}

pub fn evaluate_point(spec: &ModelSpec, opts: &PointOptions) -> Result<PointSummary> {
    spec.validate()?;
    let l = assemble(spec)?;
    let state = solve_steady_state(spec, &l)?;
    let (convention, phi) = default_convention(spec);
    let observables = evaluate(&state, opts.k_max, convention, phi)?;

    let spectrum = match &opts.spectrum {
        Some(sopts) => {
            if observables.intensity_underflow {
                None
            } else {
                Some(emission_spectrum(spec, &l, &state, sopts)?)
            }
        }
        None => None,
    };

    let label = spectrum
        .as_ref()
        .map(|sp| opts.classifier.classify(&observables, sp, spec.n));

    Ok(PointSummary {
        spec: spec.clone(),
        observables,
        spectrum,
        label,
        residual: state.residual_norm,
    })
}

/// Emission spectrum with the route selection and grid refinement wired
/// in: residue sum over the emission-sector eigendecomposition when the
/// eigenbasis is well conditioned, time-domain propagation otherwise.
pub fn emission_spectrum(
    spec: &ModelSpec,
    l: &Superoperator,
    state: &SteadyState,
    opts: &SpectrumOptions,
) -> Result<SpectrumResult> {
    let (convention, phi) = default_convention(spec);
    let (s_plus, s_minus, _) = measurement_ops(spec, convention, phi)?;

    let decomposition: Result<LiouvillianSpectrum> = match eigendecompose_sector(l, -1) {
        Ok(d) => Ok(d),
        Err(Error::InvalidModel(_)) if l.dim() <= FULL_EIG_DIM_LIMIT => eigendecompose(l),
        Err(e) => Err(e),
    };

    match decomposition {
        Ok(decomp) => {
            let res = residues(&decomp, &s_plus, &s_minus, state)?;
            let contributing: Vec<(crate::C64, f64)> = decomp
                .eigenvalues
                .iter()
                .zip(res.contributing.iter())
                .filter(|(_, &keep)| keep)
                .map(|(lam, _)| (*lam, lam.re.abs()))
                .collect();
            if contributing.is_empty() {
                return Err(Error::GridTooNarrow(
                    "no contributing modes; spectrum vanishes".into(),
                ));
            }
            let narrowest = contributing
                .iter()
                .map(|(_, w)| *w)
                .fold(f64::INFINITY, f64::min);
            let furthest = contributing
                .iter()
                .map(|(lam, w)| lam.im.abs() + 6.0 * w)
                .fold(0.0, f64::max);

            let mut half = opts.half_width.unwrap_or_else(|| auto_half_width(spec));
            if opts.half_width.is_none() {
                half = half.max(1.2 * furthest);
            }
            let mut grid = symmetric_grid(half, opts.points);
            let mut warnings = Vec::new();
            let mut s = spectral_function(&res, &decomp.eigenvalues, &grid);

            if opts.refine {
                for _round in 0..4 {
                    let report = extract_linewidth(&grid, &s);
                    let need = match &report {
                        Ok(r) => r.points_across < 20,
                        Err(_) => true,
                    };
                    if !need {
                        break;
                    }
                    let centers: Vec<f64> = match &report {
                        Ok(r) => vec![r.peak_shift, -r.peak_shift],
                        Err(_) => vec![0.0],
                    };
                    let step = narrowest / 25.0;
                    let span = 10.0 * narrowest;
                    let mut added = false;
                    for c in centers {
                        let lo = (c - span).max(-half);
                        let hi = (c + span).min(half);
                        if hi <= lo {
                            continue;
                        }
                        let count = ((hi - lo) / step).ceil() as usize + 1;
                        if count > 200_000 {
                            warnings.push("refinement window too dense; truncated".into());
                            continue;
                        }
                        for i in 0..count {
                            grid.push(lo + (hi - lo) * i as f64 / (count - 1) as f64);
                        }
                        added = true;
                    }
                    if !added {
                        break;
                    }
                    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    grid.dedup();
                    s = spectral_function(&res, &decomp.eigenvalues, &grid);
                }
            }

            let report = extract_linewidth(&grid, &s)?;
            if report.points_across < 10 {
                warnings.push(format!(
                    "FWHM spans only {} grid points",
                    report.points_across
                ));
            }

            let per_mode = if opts.per_mode {
                let mut partials = Vec::new();
                let mut lams = Vec::new();
                let mut cs = Vec::new();
                for ((lam, c), keep) in decomp
                    .eigenvalues
                    .iter()
                    .zip(res.values.iter())
                    .zip(res.contributing.iter())
                {
                    if !keep {
                        continue;
                    }
                    let single = crate::spectrum::ResidueSet {
                        values: vec![*c],
                        contributing: vec![true],
                    };
                    partials.push(spectral_function(&single, &[*lam], &grid));
                    lams.push(*lam);
                    cs.push(*c);
                }
                Some(PerModeContributions {
                    eigenvalues: lams,
                    residues: cs,
                    partials,
                })
            } else {
                None
            };

            Ok(SpectrumResult {
                omega: grid,
                s,
                linewidth: report.linewidth,
                peak_shift: report.peak_shift,
                peak_structure: report.structure,
                method: SpectrumMethod::Eig,
                condition_estimate: Some(decomp.condition_estimate),
                per_mode,
                warnings,
            })
        }
        Err(Error::DefectiveNearEp { condition }) => {
            let mut result = time_domain_route(spec, l, state, &s_plus, &s_minus, opts)?;
            result.condition_estimate = Some(condition);
            result.warnings.push(format!(
                "eigenbasis defective near an exceptional point (condition {condition:.2e}); \
                 residue sum abandoned for the time-domain route"
            ));
            Ok(result)
        }
        Err(e) => Err(e),
    }
}

fn time_domain_route(
    spec: &ModelSpec,
    l: &Superoperator,
    state: &SteadyState,
    s_plus: &crate::operators::OperatorMatrix,
    s_minus: &crate::operators::OperatorMatrix,
    opts: &SpectrumOptions,
) -> Result<SpectrumResult> {
    let half = opts.half_width.unwrap_or_else(|| auto_half_width(spec));
    let mut grid = symmetric_grid(half, opts.points);
    let samples = correlation_samples(l, s_plus, s_minus, state, half, opts.t_max, opts.dt)?;
    let mut s = samples.spectrum_at(&grid);
    let mut warnings = Vec::new();

    if opts.refine {
        for _round in 0..4 {
            let report = extract_linewidth(&grid, &s);
            let (need, center, width) = match &report {
                Ok(r) => (
                    r.points_across < 20,
                    r.peak_shift,
                    r.linewidth.max(1e-9),
                ),
                Err(_) => (true, 0.0, half / 100.0),
            };
            if !need {
                break;
            }
            let step = width / 40.0;
            let span = 5.0 * width;
            let mut added = false;
            for c in [center, -center] {
                let lo = (c - span).max(-half);
                let hi = (c + span).min(half);
                if hi <= lo {
                    continue;
                }
                let count = (((hi - lo) / step).ceil() as usize + 1).min(50_000);
                for i in 0..count {
                    grid.push(lo + (hi - lo) * i as f64 / (count - 1) as f64);
                }
                added = true;
            }
            if !added {
                break;
            }
            grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            grid.dedup();
            s = samples.spectrum_at(&grid);
        }
    }

    let report = extract_linewidth(&grid, &s)?;
    if report.points_across < 10 {
        warnings.push(format!(
            "FWHM spans only {} grid points",
            report.points_across
        ));
    }
    Ok(SpectrumResult {
        omega: grid,
        s,
        linewidth: report.linewidth,
        peak_shift: report.peak_shift,
        peak_structure: report.structure,
        method: SpectrumMethod::TimeDomain,
        condition_estimate: None,
        per_mode: None,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regimes::{Statistics, Width};
    use std::f64::consts::PI;

    #[test]
    fn point_evaluation_end_to_end() {
        let spec = ModelSpec::toy_phase(2, 1.0, 0.0);
        let summary = evaluate_point(&spec, &PointOptions::default()).unwrap();
        assert!(summary.observables.intensity > 0.0);
        let sp = summary.spectrum.unwrap();
        assert!(sp.linewidth > 0.0);
        assert!(summary.label.is_some());
        assert!(summary.residual <= 1e-9);
    }

    #[test]
    fn quantum_narrow_light_at_pi() {
        // Weak pump at φ = π: quantum statistics with an ultranarrow line.
        let spec = ModelSpec::toy_phase(10, 0.1, PI);
        let summary = evaluate_point(&spec, &PointOptions::default()).unwrap();
        let label = summary.label.unwrap();
        assert_eq!(label.statistics, Statistics::Quantum);
        assert_eq!(label.width, Width::UltraNarrow);
        assert!(summary.observables.g2() < 1.0);
    }

    #[test]
    fn observables_only_mode_skips_spectrum() {
        let spec = ModelSpec::toy_phase(2, 1.0, 0.0);
        let opts = PointOptions {
            spectrum: None,
            ..Default::default()
        };
        let summary = evaluate_point(&spec, &opts).unwrap();
        assert!(summary.spectrum.is_none());
        assert!(summary.label.is_none());
    }

    #[test]
    fn near_exceptional_point_falls_back_cleanly() {
        // Exactly at an exceptional point of the two-spin model the
        // eigenvector condition blows up; the pipeline must still return a
        // spectrum, marked as time-domain, when that happens. Slightly off
        // the point either route is fine; this exercises both branches.
        for w in [0.6, 0.6017, 0.62] {
            let spec = ModelSpec::toy_phase(1, w, 0.0);
            let summary = evaluate_point(&spec, &PointOptions::default()).unwrap();
            let sp = summary.spectrum.unwrap();
            assert!(sp.linewidth > 0.0, "w={w}");
        }
    }

    #[test]
    fn zero_pump_propagates_degeneracy() {
        // w = 0 leaves a dark state degenerate with the ground state; the
        // point evaluation must surface that instead of picking a mixture.
        let spec = ModelSpec::toy_phase(2, 0.0, 0.0);
        assert!(matches!(
            evaluate_point(&spec, &PointOptions::default()),
            Err(Error::NullSpaceDegenerate { .. })
        ));
    }
}
