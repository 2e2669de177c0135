//! Classification of parameter points by photon statistics and linewidth.
//!
//! Statistics from g⁽²⁾(0): quantum below `1 − ε_c`, coherent within
//! `±ε_c` of one, bunched above `1 + ε_c`. Linewidth classes compare Δν to
//! the single-atom scale (ultranarrow: Δν ≤ 2.5Γ) and to the collective
//! scale (broad: Δν ≥ ΓN); everything between is narrow. Boundary points
//! resolve in that order, so diagrams are reproducible bit for bit.

use crate::observables::ObservableSet;
use crate::spectrum::SpectrumResult;
use crate::{GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistics {
    Quantum,
    Coherent,
    Bunched,
    /// Intensity underflowed; g⁽²⁾ undefined.
    Unclassifiable,
}

impl std::fmt::Display for Statistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Statistics::Quantum => "quantum",
            Statistics::Coherent => "coherent",
            Statistics::Bunched => "bunched",
            Statistics::Unclassifiable => "unclassifiable",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Width {
    UltraNarrow,
    Narrow,
    Broad,
}

impl std::fmt::Display for Width {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Width::UltraNarrow => "ultranarrow",
            Width::Narrow => "narrow",
            Width::Broad => "broad",
        };
        write!(f, "{s}")
    }
}

/// Raw numbers a label was derived from.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct RawPoint {
    pub g2: f64,
    pub linewidth: f64,
    pub peak_shift: f64,
    pub sz: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct RegimeLabel {
    pub statistics: Statistics,
    pub width: Width,
    pub raw: RawPoint,
}

/// Classification thresholds.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Classifier {
    /// Half-width of the coherent band around g⁽²⁾ = 1.
    pub epsilon_c: f64,
    /// Ultranarrow cutoff in units of Γ.
    pub ultranarrow_cutoff: f64,
}

impl Default for Classifier {
    fn default() -> Self {
        Self {
            epsilon_c: 0.1,
            ultranarrow_cutoff: 2.5,
        }
    }
}

impl Classifier {
    pub fn classify_raw(&self, g2: f64, linewidth: f64, n: usize, raw: RawPoint) -> RegimeLabel {
        let statistics = if g2.is_nan() {
            Statistics::Unclassifiable
        } else if g2 < 1.0 - self.epsilon_c {
            Statistics::Quantum
        } else if g2 > 1.0 + self.epsilon_c {
            Statistics::Bunched
        } else {
            Statistics::Coherent
        };
        let width = if linewidth <= self.ultranarrow_cutoff * GAMMA {
            Width::UltraNarrow
        } else if linewidth >= GAMMA * n as f64 {
            Width::Broad
        } else {
            Width::Narrow
        };
        RegimeLabel {
            statistics,
            width,
            raw,
        }
    }

    pub fn classify(
        &self,
        obs: &ObservableSet,
        spectrum: &SpectrumResult,
        n: usize,
    ) -> RegimeLabel {
        let raw = RawPoint {
            g2: obs.g2(),
            linewidth: spectrum.linewidth,
            peak_shift: spectrum.peak_shift,
            sz: obs.sz,
            intensity: obs.intensity,
        };
        self.classify_raw(obs.g2(), spectrum.linewidth, n, raw)
    }
}

/// Predicted pump window with population inversion for the interacting
/// model: `ΓN²/2 ≤ w ≤ 4V²/Γ`. Returns `None` when the window is empty.
pub fn inversion_window(n: usize, v: f64) -> Option<(f64, f64)> {
    if v <= 0.0 {
        return None;
    }
    let w_min = GAMMA * (n as f64).powi(2) / 2.0;
    let w_max = 4.0 * v * v / GAMMA;
    if w_min > w_max {
        None
    } else {
        Some((w_min, w_max))
    }
}

/// Effective collective pump rate after adiabatic elimination of the
/// pumped spin: the strong-pump dynamics reduce to loss at Γ plus pumping
/// of `J` at `w_eff = 4V²/w`.
pub fn effective_collective_pump(w: f64, v: f64) -> f64 {
    4.0 * v * v / w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(g2: f64, lw: f64) -> RawPoint {
        RawPoint {
            g2,
            linewidth: lw,
            peak_shift: 0.0,
            sz: 0.0,
            intensity: 1.0,
        }
    }

    #[test]
    fn statistics_bands() {
        let c = Classifier::default();
        assert_eq!(c.classify_raw(0.5, 1.0, 10, raw(0.5, 1.0)).statistics, Statistics::Quantum);
        assert_eq!(c.classify_raw(1.05, 1.0, 10, raw(1.05, 1.0)).statistics, Statistics::Coherent);
        assert_eq!(c.classify_raw(2.0, 1.0, 10, raw(2.0, 1.0)).statistics, Statistics::Bunched);
        assert_eq!(
            c.classify_raw(f64::NAN, 1.0, 10, raw(f64::NAN, 1.0)).statistics,
            Statistics::Unclassifiable
        );
        // Boundaries: strict inequalities leave the band edges coherent.
        assert_eq!(c.classify_raw(0.9, 1.0, 10, raw(0.9, 1.0)).statistics, Statistics::Coherent);
        assert_eq!(c.classify_raw(1.1, 1.0, 10, raw(1.1, 1.0)).statistics, Statistics::Coherent);
    }

    #[test]
    fn width_bands() {
        let c = Classifier::default();
        assert_eq!(c.classify_raw(1.0, 2.5, 100, raw(1.0, 2.5)).width, Width::UltraNarrow);
        assert_eq!(c.classify_raw(1.0, 2.6, 100, raw(1.0, 2.6)).width, Width::Narrow);
        assert_eq!(c.classify_raw(1.0, 100.0, 100, raw(1.0, 100.0)).width, Width::Broad);
        // Small N: ultranarrow takes precedence where the classes overlap.
        assert_eq!(c.classify_raw(1.0, 2.0, 1, raw(1.0, 2.0)).width, Width::UltraNarrow);
        assert_eq!(c.classify_raw(1.0, 2.6, 1, raw(1.0, 2.6)).width, Width::Broad);
    }

    #[test]
    fn classifier_follows_the_numbers() {
        // g2 = 1.7·NΓ/w and Δν = (Γ(N+1)+w)/2 at N=100, w = 0.2ΓN = 20Γ
        // give a bunched *narrow* point (60.5Γ < ΓN).
        let c = Classifier::default();
        let n = 100;
        let w = 0.2 * n as f64;
        let g2 = 1.7 * n as f64 / w;
        let lw = ((n as f64 + 1.0) + w) / 2.0;
        let label = c.classify_raw(g2, lw, n, raw(g2, lw));
        assert_eq!(label.statistics, Statistics::Bunched);
        assert_eq!(label.width, Width::Narrow);
    }

    #[test]
    fn inversion_window_bounds() {
        // N=20, V=15Γ: window [200Γ, 900Γ].
        let (lo, hi) = inversion_window(20, 15.0).unwrap();
        assert!((lo - 200.0).abs() < 1e-12);
        assert!((hi - 900.0).abs() < 1e-12);
        // No interaction, no window.
        assert!(inversion_window(20, 0.0).is_none());
        // Window closes when V is too small.
        assert!(inversion_window(20, 5.0).is_none());
    }

    #[test]
    fn effective_pump_prefactor() {
        // At w = 2V the eliminated dissipator prefactor w_eff/2 equals V.
        let v = 3.0;
        let w_eff = effective_collective_pump(2.0 * v, v);
        assert!((w_eff - 2.0 * v).abs() < 1e-12);
        assert!((w_eff / 2.0 - v).abs() < 1e-12);
    }
}
