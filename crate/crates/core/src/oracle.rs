//! Independent reference solutions used to validate the main solver path:
//! closed forms, a brute-force full-chain Lindblad solver, and convergence
//! studies. Everything here deliberately avoids the Kronecker-product
//! superoperator assembly and the null-space machinery of the main path;
//! the Liouvillian is built column by column from the master-equation
//! right-hand side and the steady state is reached by time evolution.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dagger, expm, norm_one, trace_of_product, vec_norm, vectorize};
use crate::liouvillian::{assemble, dissipator_superop, hamiltonian_superop, ModelSpec};
use crate::observables::{evaluate, measurement_ops, PhaseConvention};
use crate::operators::{
    build_dicke_ladder, build_full_space_operators, build_hp_operators, embed, HilbertSpace, Slot,
};
use crate::spectrum::{
    correlation_samples, cumulant_reference_eigenvalues, eigendecompose_sector, residues,
    spectral_function, symmetric_grid,
};
use crate::steady::{single_atom_reference, steady_state, SteadyState};
use crate::{C64, GAMMA};

/// The two-spin steady state in closed form, normalized and expressed in
/// the solver's tensor basis (pumped spin left, collective index 0 = down).
///
/// The underlying unnormalized matrix is stated in the product basis
/// `[|↑↑⟩, |↓↑⟩, |↑↓⟩, |↓↓⟩]` where the *first* arrow is the pumped atom:
///
/// ```text
/// diag  = ( w/2Γ,  1,  (6wΓ + w² + 2Γ²)/2Γ²,  (w+4Γ)/2Γ )
/// ρ₁₂  = −(w+2Γ)/2Γ · e^{iφ}   (between |↓↑⟩ and |↑↓⟩)
/// ```
///
/// Mapping to the solver basis (σ ⊗ J with indices (s·2 + k), s = 0 ↔ σ↑,
/// k = 0 ↔ J down): solver index s takes footnote index f(s) with
/// f = [2, 0, 3, 1].
pub fn two_spin_closed_form(w: f64, phi: f64) -> Array2<C64> {
    let g = GAMMA;
    let mut f = Array2::<C64>::zeros((4, 4));
    f[(0, 0)] = C64::new(w / (2.0 * g), 0.0);
    f[(1, 1)] = C64::new(1.0, 0.0);
    f[(2, 2)] = C64::new((6.0 * w * g + w * w + 2.0 * g * g) / (2.0 * g * g), 0.0);
    f[(3, 3)] = C64::new((w + 4.0 * g) / (2.0 * g), 0.0);
    let coh = -(w + 2.0 * g) / (2.0 * g);
    f[(1, 2)] = C64::from_polar(1.0, phi) * C64::new(coh, 0.0);
    f[(2, 1)] = f[(1, 2)].conj();

    let perm = [2usize, 0, 3, 1];
    let mut rho = Array2::<C64>::zeros((4, 4));
    for s1 in 0..4 {
        for s2 in 0..4 {
            rho[(s1, s2)] = f[(perm[s1], perm[s2])];
        }
    }
    let tr = rho.diag().sum();
    rho.mapv(|z| z / tr)
}

/// Characteristic polynomial of the two-spin emission sector (the four
/// density-matrix elements one coherence quantum below the diagonal),
/// evaluated at λ:
///
/// ```text
/// p(λ) = 16λ⁴ + (64Γ + 32w)λ³ + (80Γ² + 88Γw + 20w²)λ²
///      + (32Γ³ + 80Γ²w + 32Γw² + 4w³)λ + (24Γ³w + 17Γ²w² + 2Γw³).
/// ```
///
/// Its roots are the four spectrum-carrying eigenvalues of the two-spin
/// model: at w = 0 they are {0, −Γ, −Γ, −2Γ} (the zero root is the dark
/// coherence), the slow root tends to −Γ/2 − 1.43Γ²/w + … at strong
/// pump, and the discriminant changes sign at the two exceptional points.
pub fn two_spin_sector_charpoly(w: f64, lam: C64) -> C64 {
    let g = GAMMA;
    let a4 = 16.0;
    let a3 = 64.0 * g + 32.0 * w;
    let a2 = 80.0 * g * g + 88.0 * g * w + 20.0 * w * w;
    let a1 = 32.0 * g * g * g + 80.0 * g * g * w + 32.0 * g * w * w + 4.0 * w * w * w;
    let a0 = 24.0 * g * g * g * w + 17.0 * g * g * w * w + 2.0 * g * w * w * w;
    (((C64::new(a4, 0.0) * lam + a3) * lam + a2) * lam + a1) * lam + a0
}

/// Closed-form steady state of the collectively pumped Dicke manifold
/// without the extra spin: a detailed-balance (thermal) mixture with
/// population ratio `p_{m+1}/p_m = w/Γ`, equivalently an effective inverse
/// temperature `βω₀ = ln(Γ/w)`.
#[derive(Debug, Clone)]
pub struct ThermalDicke {
    pub n: usize,
    /// Populations indexed by k = m + J, from the ground state up.
    pub populations: Vec<f64>,
    /// ⟨J⁺J⁻⟩ by direct summation.
    pub intensity: f64,
    /// g⁽²⁾(0) by direct summation.
    pub g2: f64,
}

impl ThermalDicke {
    /// k-th order coherence g⁽ᵏ⁾(0) by direct summation over the mixture.
    pub fn coherence(&self, order: u32) -> f64 {
        let num = self.moment(order);
        num / self.moment(1).powi(order as i32)
    }

    /// ⟨(J⁺)^q (J⁻)^q⟩.
    fn moment(&self, q: u32) -> f64 {
        let j = self.n as f64 / 2.0;
        self.populations
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let m = k as f64 - j;
                let mut factor = 1.0;
                for step in 0..q {
                    let mm = m - step as f64;
                    factor *= (j * (j + 1.0) - mm * (mm - 1.0)).max(0.0);
                }
                p * factor
            })
            .sum()
    }
}

pub fn thermal_dicke_distribution(n: usize, w: f64) -> Result<ThermalDicke> {
    if w <= 0.0 {
        return Err(Error::InvalidModel(
            "thermal distribution needs w > 0".into(),
        ));
    }
    let ln_r = (w / GAMMA).ln();
    let logs: Vec<f64> = (0..=n).map(|k| k as f64 * ln_r).collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logs.iter().map(|&l| (l - peak).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    let populations: Vec<f64> = unnorm.iter().map(|&p| p / total).collect();
    let mut td = ThermalDicke {
        n,
        populations,
        intensity: 0.0,
        g2: 0.0,
    };
    td.intensity = td.moment(1);
    td.g2 = td.coherence(2);
    Ok(td)
}

/// Steady populations of the collectively pumped manifold from the
/// classical rate (birth-death) equations, solved numerically on the
/// (N+1)-dimensional population sector. Independent of both the closed
/// form and the superoperator path; usable up to large N.
pub fn collective_pump_rate_equation_populations(n: usize, w: f64) -> Result<Vec<f64>> {
    let dim = n + 1;
    let j = n as f64 / 2.0;
    let lower = |k: usize| {
        let m = k as f64 - j;
        j * (j + 1.0) - m * (m - 1.0)
    };
    let raise = |k: usize| {
        let m = k as f64 - j;
        j * (j + 1.0) - m * (m + 1.0)
    };
    let mut m = Array2::<C64>::zeros((dim, dim));
    for k in 0..dim {
        if k > 0 {
            // J⁻ loss out of k feeds k-1 at rate Γ·lower(k).
            m[(k - 1, k)] += C64::new(GAMMA * lower(k), 0.0);
            m[(k, k)] -= C64::new(GAMMA * lower(k), 0.0);
        }
        if k + 1 < dim {
            // Pump out of k feeds k+1 at rate w·raise(k).
            m[(k + 1, k)] += C64::new(w * raise(k), 0.0);
            m[(k, k)] -= C64::new(w * raise(k), 0.0);
        }
    }
    let ns = crate::linalg::null_space_svd(&m)?;
    let mut p: Vec<f64> = ns.vector.iter().map(|z| z.re).collect();
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    if p.iter().any(|&v| v < -1e-10) {
        return Err(Error::NotPositive {
            min_eigenvalue: p.iter().cloned().fold(0.0, f64::min),
        });
    }
    Ok(p)
}

/// Observables from the brute-force full-chain solve.
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub n_atoms: usize,
    pub rho: Array2<C64>,
    pub sz: f64,
    pub intensity: f64,
    pub g2: f64,
    pub g3: f64,
}

/// Full 2^n-space Lindblad solve of the phase-controlled collective-decay
/// model, with the last site pumped.
///
/// The Liouvillian is assembled column by column from the master-equation
/// right-hand side (no Kronecker identities), and the steady state is
/// reached by repeated squaring of `exp(𝓛 t₀)` starting from the all-down
/// state, which selects the fully symmetric sector the Dicke solver works
/// in.
pub fn brute_force_lindblad(n_atoms: usize, w: f64, phi: f64) -> Result<BruteForceResult> {
    if !(2..=4).contains(&n_atoms) {
        return Err(Error::InvalidModel(format!(
            "brute-force path supports 2..=4 atoms, got {n_atoms}"
        )));
    }
    let ops = build_full_space_operators(n_atoms)?;
    let dim = ops.space.dim();
    let pumped = n_atoms - 1;

    // Jump operators: A = e^{iφ} σ⁻_pumped + J⁻ at rate Γ, σ⁺_pumped at w.
    let phase = C64::from_polar(1.0, phi);
    let a = ops.sigma_minus[pumped].mapv(|z| z * phase) + &ops.j_minus;
    let a_dag = dagger(&a);
    let ada = a_dag.dot(&a);
    let p = ops.sigma_plus[pumped].clone();
    let p_dag = dagger(&p);
    let pdp = p_dag.dot(&p);

    let rhs = |rho: &Array2<C64>| -> Array2<C64> {
        let mut out = a.dot(rho).dot(&a_dag).mapv(|z| z * C64::new(2.0, 0.0));
        out = out - ada.dot(rho) - rho.dot(&ada);
        out.mapv_inplace(|z| z * C64::new(GAMMA / 2.0, 0.0));
        let mut pump = p.dot(rho).dot(&p_dag).mapv(|z| z * C64::new(2.0, 0.0));
        pump = pump - pdp.dot(rho) - rho.dot(&pdp);
        out + pump.mapv(|z| z * C64::new(w / 2.0, 0.0))
    };

    // Column a = j·d + i of L is vec(RHS(|i⟩⟨j|)).
    let d2 = dim * dim;
    let mut l = Array2::<C64>::zeros((d2, d2));
    for col in 0..d2 {
        let (i, jj) = (col % dim, col / dim);
        let mut unit = Array2::<C64>::zeros((dim, dim));
        unit[(i, jj)] = C64::new(1.0, 0.0);
        let image = rhs(&unit);
        let v = vectorize(&image);
        l.column_mut(col).assign(&v);
    }

    // Steady state by exponential doubling from |↓…↓⟩⟨↓…↓|.
    let t0 = 0.5 / norm_one(&l).max(1.0);
    let mut prop = expm(&l.mapv(|z| z * C64::new(t0, 0.0)));
    let mut rho0 = Array2::<C64>::zeros((dim, dim));
    rho0[(dim - 1, dim - 1)] = C64::new(1.0, 0.0);
    let mut x = vectorize(&rho0);
    let mut residual = f64::INFINITY;
    for _ in 0..70 {
        x = prop.dot(&x);
        let nx = vec_norm(&x.view());
        x.mapv_inplace(|z| z / C64::new(nx, 0.0));
        residual = vec_norm(&l.dot(&x).view());
        if residual <= 1e-12 * norm_one(&l) {
            break;
        }
        prop = prop.dot(&prop);
    }
    if residual > 1e-10 * norm_one(&l) {
        return Err(Error::NoConvergence { residual });
    }

    let mut rho = crate::linalg::devectorize(&x.view());
    let tr = rho.diag().sum();
    rho.mapv_inplace(|z| z / tr);
    let rho = (&rho + &dagger(&rho)).mapv(|z| z * C64::new(0.5, 0.0));

    // Observables with bare S± = σ±_pumped + J± and total Sᶻ.
    let s_minus = &ops.sigma_minus[pumped] + &ops.j_minus;
    let s_plus = dagger(&s_minus);
    let mut s_z = Array2::<C64>::zeros((dim, dim));
    for site in 0..n_atoms {
        s_z += &ops.sigma_z[site];
    }
    let sz = trace_of_product(&rho, &s_z).re;
    let intensity = trace_of_product(&rho, &spsm_pow(&s_plus, &s_minus, 1)).re;
    let g2 = trace_of_product(&rho, &spsm_pow(&s_plus, &s_minus, 2)).re / intensity.powi(2);
    let g3 = trace_of_product(&rho, &spsm_pow(&s_plus, &s_minus, 3)).re / intensity.powi(3);

    Ok(BruteForceResult {
        n_atoms,
        rho,
        sz,
        intensity,
        g2,
        g3,
    })
}

fn spsm_pow(s_plus: &Array2<C64>, s_minus: &Array2<C64>, q: u32) -> Array2<C64> {
    let mut plus = s_plus.clone();
    let mut minus = s_minus.clone();
    for _ in 1..q {
        plus = plus.dot(s_plus);
        minus = minus.dot(s_minus);
    }
    plus.dot(&minus)
}

/// One row of the bosonization convergence table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HpConvergenceRow {
    pub n_cut: usize,
    pub err_sz: f64,
    pub err_intensity: f64,
    pub err_g2: f64,
    pub err_linewidth: f64,
}

/// Compare the bosonized model against the exact Dicke solve for a list
/// of cutoffs (N ≤ 60 so the exact reference is cheap).
pub fn hp_convergence_study(
    n: usize,
    w: f64,
    phi: f64,
    n_cut_list: &[usize],
) -> Result<Vec<HpConvergenceRow>> {
    if n > 60 {
        return Err(Error::InvalidModel(
            "convergence study needs the exact reference, so N ≤ 60".into(),
        ));
    }
    let exact_spec = ModelSpec::toy_phase(n, w, phi);
    let exact_state = steady_state(&exact_spec)?;
    let exact = raw_observables(&exact_spec, &exact_state)?;
    let exact_lw = model_linewidth(&exact_spec, &exact_state)?;

    let mut rows = Vec::new();
    for &n_cut in n_cut_list {
        let spec = ModelSpec::hp_toy(n, w, phi, n_cut);
        let state = steady_state(&spec)?;
        // Raw traces, bypassing the n_cut ≥ k+2 trust guard: the study is
        // precisely about how wrong the truncated values are.
        let obs = raw_observables(&spec, &state)?;
        let lw = model_linewidth(&spec, &state)?;
        let rel = |a: f64, b: f64| ((a - b) / b.abs().max(1e-300)).abs();
        rows.push(HpConvergenceRow {
            n_cut,
            err_sz: rel(obs.0, exact.0),
            err_intensity: rel(obs.1, exact.1),
            err_g2: rel(obs.2, exact.2),
            err_linewidth: rel(lw, exact_lw),
        });
    }
    Ok(rows)
}

/// (Sz, intensity, g2) by direct traces with bare measured operators.
fn raw_observables(spec: &ModelSpec, state: &SteadyState) -> Result<(f64, f64, f64)> {
    let (sp, sm, sz_op) = measurement_ops(spec, PhaseConvention::Jump, 0.0)?;
    let rho = &state.rho;
    let sz = trace_of_product(rho, &sz_op.matrix).re;
    let intensity = trace_of_product(rho, &sp.matrix.dot(&sm.matrix)).re;
    let num = trace_of_product(
        rho,
        &sp.matrix.dot(&sp.matrix).dot(&sm.matrix).dot(&sm.matrix),
    )
    .re;
    Ok((sz, intensity, num / (intensity * intensity)))
}

/// Linewidth through the standard spectrum pipeline (residue sum with the
/// time-domain fallback near ill-conditioned eigenbases).
fn model_linewidth(spec: &ModelSpec, state: &SteadyState) -> Result<f64> {
    let l = assemble(spec)?;
    let opts = crate::pipeline::SpectrumOptions::default();
    let result = crate::pipeline::emission_spectrum(spec, &l, state, &opts)?;
    Ok(result.linewidth)
}

/// Display value of a reference quantity.
#[derive(Debug, Clone, Copy, serde::Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{x:.6e}"),
            Value::Complex { re, im } => write!(f, "{re:.4e}{im:+.4e}i"),
        }
    }
}

/// One oracle comparison: pass ⟺ abs or rel error within tolerance,
/// whichever rule the case fixes.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OracleReport {
    pub case_id: String,
    pub quantity: String,
    pub reference_value: Value,
    pub computed_value: Value,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    /// "abs" or "rel": which error the tolerance applies to.
    pub rule: &'static str,
    pub passed: bool,
}

impl OracleReport {
    fn abs_rule(
        case_id: impl Into<String>,
        quantity: impl Into<String>,
        reference: f64,
        computed: f64,
        tolerance: f64,
    ) -> Self {
        let abs_error = (computed - reference).abs();
        let rel_error = abs_error / reference.abs().max(1e-300);
        Self {
            case_id: case_id.into(),
            quantity: quantity.into(),
            reference_value: Value::Real(reference),
            computed_value: Value::Real(computed),
            abs_error,
            rel_error,
            tolerance,
            rule: "abs",
            passed: abs_error <= tolerance,
        }
    }

    fn rel_rule(
        case_id: impl Into<String>,
        quantity: impl Into<String>,
        reference: f64,
        computed: f64,
        tolerance: f64,
    ) -> Self {
        let abs_error = (computed - reference).abs();
        let rel_error = abs_error / reference.abs().max(1e-300);
        Self {
            case_id: case_id.into(),
            quantity: quantity.into(),
            reference_value: Value::Real(reference),
            computed_value: Value::Real(computed),
            abs_error,
            rel_error,
            tolerance,
            rule: "rel",
            passed: rel_error <= tolerance,
        }
    }

    /// For quantities that are already deviations (a worst-case error over
    /// a grid, an L∞ distance): pass ⟺ deviation ≤ tolerance.
    fn deviation_rule(
        case_id: impl Into<String>,
        quantity: impl Into<String>,
        deviation: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            case_id: case_id.into(),
            quantity: quantity.into(),
            reference_value: Value::Real(0.0),
            computed_value: Value::Real(deviation),
            abs_error: deviation,
            rel_error: deviation,
            tolerance,
            rule: "rel",
            passed: deviation <= tolerance,
        }
    }
}

/// Run every oracle comparison; exit-code contract of the CLI: zero iff
/// all rows pass.
pub fn run_all() -> Result<Vec<OracleReport>> {
    let mut rows = Vec::new();
    two_spin_cases(&mut rows)?;
    two_spin_quartic_cases(&mut rows)?;
    brute_force_cases(&mut rows)?;
    thermal_cases(&mut rows)?;
    single_atom_cases(&mut rows)?;
    hp_cases(&mut rows)?;
    cumulant_cases(&mut rows)?;
    cross_method_cases(&mut rows)?;
    Ok(rows)
}

fn two_spin_cases(rows: &mut Vec<OracleReport>) -> Result<()> {
    let ws = [1e-6, 0.5, 1.0, 5.0, 50.0];
    let phis = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI];
    for &w in &ws {
        for &phi in &phis {
            let reference = two_spin_closed_form(w, phi);
            let state = steady_state(&ModelSpec::toy_phase(1, w, phi))?;
            let err = crate::linalg::max_abs(&(&state.rho - &reference));
            rows.push(OracleReport::abs_rule(
                format!("two-spin/w={w:.2e}/phi={phi:.3}"),
                "max element deviation of ρ_ss",
                0.0,
                err,
                1e-10,
            ));
        }
    }
    Ok(())
}

fn two_spin_quartic_cases(rows: &mut Vec<OracleReport>) -> Result<()> {
    // Numerically computed emission-sector eigenvalues must be roots of
    // the closed-form quartic, including inside the exceptional-point
    // window where they form a complex-conjugate pair.
    for &w in &[0.3, 1.0, 5.0, 50.0] {
        let l = assemble(&ModelSpec::toy_phase(1, w, 0.0))?;
        let s = eigendecompose_sector(&l, -1)?;
        let scale = 16.0 * (1.0_f64 + w).powi(4) * 64.0;
        let worst = s
            .eigenvalues
            .iter()
            .map(|&lam| two_spin_sector_charpoly(w, lam).norm())
            .fold(0.0, f64::max)
            / scale;
        rows.push(OracleReport::deviation_rule(
            format!("two-spin-quartic/w={w}"),
            "residual of the sector characteristic polynomial at eig roots",
            worst,
            1e-9,
        ));
    }
    Ok(())
}

fn brute_force_cases(rows: &mut Vec<OracleReport>) -> Result<()> {
    // Two independent oracles agree: chain solve vs closed form at N=1.
    for &(w, phi) in &[(0.5, 0.0), (2.0, std::f64::consts::PI), (1.0, 1.2)] {
        let bf = brute_force_lindblad(2, w, phi)?;
        // Map chain basis (site 0 = unpumped, site 1 = pumped; bit 1 = down,
        // site 0 = high bit) onto the solver basis: chain index
        // b = 2·(unpumped down) + (pumped down) versus solver (s·2 + k).
        let closed = two_spin_closed_form(w, phi);
        let chain_of_solver = |s: usize| -> usize {
            let sigma_down = s / 2;
            let k = s % 2; // k = 1 means unpumped up
            2 * (1 - k) + sigma_down
        };
        let mut err = 0.0_f64;
        for a in 0..4 {
            for b in 0..4 {
                let d = (bf.rho[(chain_of_solver(a), chain_of_solver(b))] - closed[(a, b)]).norm();
                err = err.max(d);
            }
        }
        rows.push(OracleReport::abs_rule(
            format!("brute-vs-closed/w={w}/phi={phi:.3}"),
            "max element deviation of ρ_ss",
            0.0,
            err,
            1e-9,
        ));
    }

    // Chain solve vs Dicke-basis solver across sizes and a small grid.
    for n_atoms in 2..=4usize {
        let n = n_atoms - 1;
        let mut worst = 0.0_f64;
        for &w in &[0.5, 2.0, 8.0] {
            for &phi in &[0.0, 1.0, std::f64::consts::PI] {
                let bf = brute_force_lindblad(n_atoms, w, phi)?;
                let state = steady_state(&ModelSpec::toy_phase(n, w, phi))?;
                let obs = evaluate(&state, 3, PhaseConvention::Jump, 0.0)?;
                let rel = |a: f64, b: f64| ((a - b) / b.abs().max(1e-300)).abs();
                worst = worst
                    .max(rel(bf.sz, obs.sz))
                    .max(rel(bf.intensity, obs.intensity))
                    .max(rel(bf.g2, obs.g2()))
                    .max(rel(bf.g3, obs.g3()));
            }
        }
        rows.push(OracleReport::deviation_rule(
            format!("brute-vs-dicke/n_atoms={n_atoms}"),
            "worst relative deviation of (Sz, I, g2, g3) over the grid",
            worst,
            1e-8,
        ));
    }
    Ok(())
}

fn thermal_cases(rows: &mut Vec<OracleReport>) -> Result<()> {
    // Rate-equation null space vs geometric law at N=100.
    let n = 100;
    let w = 0.5;
    let law = thermal_dicke_distribution(n, w)?;
    let numeric = collective_pump_rate_equation_populations(n, w)?;
    let err = law
        .populations
        .iter()
        .zip(numeric.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    rows.push(OracleReport::abs_rule(
        "thermal/rate-eq-vs-law/N=100",
        "max population deviation",
        0.0,
        err,
        1e-12,
    ));

    // Infinite-temperature coherence at w = Γ.
    let g2 = thermal_dicke_distribution(100, GAMMA)?.g2;
    rows.push(OracleReport::rel_rule(
        "thermal/g2-at-w=1/N=100",
        "g²(0) against the uniform-mixture limit 6/5",
        1.2,
        g2,
        0.02,
    ));

    // Superoperator solve of the pumped manifold (no extra spin) against
    // the law at a dense-friendly size.
    let n = 20;
    let w = 0.5;
    let j = build_dicke_ladder(n)?;
    let loss = dissipator_superop(&j.minus, GAMMA)?;
    let pump = dissipator_superop(&j.plus, w)?;
    let l = loss.add(&pump);
    let ns = crate::linalg::null_space_svd(&l.matrix)?;
    let mut rho = crate::linalg::devectorize(&ns.vector.view());
    let tr = rho.diag().sum();
    rho.mapv_inplace(|z| z / tr);
    let law = thermal_dicke_distribution(n, w)?;
    let err = (0..=n)
        .map(|k| (rho[(k, k)].re - law.populations[k]).abs())
        .fold(0.0, f64::max);
    rows.push(OracleReport::abs_rule(
        "thermal/superop-vs-law/N=20",
        "max population deviation",
        0.0,
        err,
        1e-10,
    ));

    // Detailed-balance ratio matches the effective temperature.
    let ratio = law.populations[5] / law.populations[4];
    rows.push(OracleReport::rel_rule(
        "thermal/detailed-balance",
        "population ratio e^{−βω₀} = w/Γ",
        w / GAMMA,
        ratio,
        1e-12,
    ));

    // N=4, w=Γ/2: populations proportional to (1, 1/2, 1/4, 1/8, 1/16).
    let law = thermal_dicke_distribution(4, 0.5)?;
    let expect = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let scale: f64 = expect.iter().sum();
    let err = law
        .populations
        .iter()
        .zip(expect.iter())
        .map(|(p, e)| (p - e / scale).abs())
        .fold(0.0, f64::max);
    rows.push(OracleReport::abs_rule(
        "thermal/N=4-w=0.5",
        "populations against the geometric sequence",
        0.0,
        err,
        1e-14,
    ));
    Ok(())
}

fn single_atom_cases(rows: &mut Vec<OracleReport>) -> Result<()> {
    use crate::operators::build_pumped_spin;
    for &w in &[0.3, 1.0, 10.0] {
        let reference = single_atom_reference(w);
        let s = build_pumped_spin();
        let l = dissipator_superop(&s.minus, GAMMA)?.add(&dissipator_superop(&s.plus, w)?);
        let ns = crate::linalg::null_space_svd(&l.matrix)?;
        let mut rho = crate::linalg::devectorize(&ns.vector.view());
        let tr = rho.diag().sum();
        rho.mapv_inplace(|z| z / tr);
        let sz = rho[(0, 0)].re * 0.5 - rho[(1, 1)].re * 0.5;
        let intensity = rho[(0, 0)].re;
        rows.push(OracleReport::abs_rule(
            format!("single-atom/w={w}"),
            "⟨σᶻ⟩ against (w−Γ)/2(w+Γ)",
            reference.magnetization,
            sz,
            1e-12,
        ));
        rows.push(OracleReport::abs_rule(
            format!("single-atom/w={w}"),
            "intensity against w/(w+Γ)",
            reference.intensity,
            intensity,
            1e-12,
        ));
    }
    Ok(())
}

fn hp_cases(rows: &mut Vec<OracleReport>) -> Result<()> {
    // Convergence with the cutoff at weak pump.
    // Measured truncation errors at N = 20, w = Γ, φ = 0: the two-level
    // cutoff lands within ~8% on the intensity, one more Fock level brings
    // it below 1%, and the g² error then saturates at the ~1/N floor of
    // the lowest-order bosonization itself.
    let table = hp_convergence_study(20, GAMMA, 0.0, &[2, 3, 4, 6])?;
    let first = &table[0];
    let last = &table[table.len() - 1];
    rows.push(OracleReport::deviation_rule(
        "hp/intensity-at-ncut=2",
        "bosonized intensity error against the exact solve at weak pump",
        first.err_intensity,
        0.10,
    ));
    rows.push(OracleReport::deviation_rule(
        "hp/intensity-at-ncut=3",
        "bosonized intensity error with one extra Fock level",
        table[1].err_intensity,
        0.01,
    ));
    rows.push(OracleReport {
        case_id: "hp/g2-converges".into(),
        quantity: "g² error must shrink from n_cut=2 to n_cut=6".into(),
        reference_value: Value::Real(first.err_g2),
        computed_value: Value::Real(last.err_g2),
        abs_error: last.err_g2,
        rel_error: last.err_g2 / first.err_g2.max(1e-300),
        tolerance: 1.0,
        rule: "rel",
        passed: last.err_g2 < first.err_g2,
    });

    // The bosonization must break down for strong coherent coupling: in
    // the population-inverted window (w between ΓN²/2 and 4V²/Γ) the
    // collective spin climbs far beyond any small cutoff, so a bosonized
    // interacting model has to deviate wildly from the exact one.
    let n = 10;
    let v = GAMMA * n as f64;
    let w = 100.0;
    let exact = {
        let state = steady_state(&ModelSpec::interacting(n, w, v))?;
        evaluate(&state, 2, PhaseConvention::Jump, 0.0)?
    };
    let hp = {
        let n_cut = 8;
        let hp_ops = build_hp_operators(n, n_cut)?;
        let space = HilbertSpace::PumpedSpinBoson { n, n_cut };
        let sp = crate::operators::build_pumped_spin();
        let sigma_minus = embed(&sp.minus, Slot::Pumped, space)?;
        let sigma_plus = embed(&sp.plus, Slot::Pumped, space)?;
        let a_emb = embed(&hp_ops.j_minus, Slot::Collective, space)?;
        let a_dag_emb = embed(&hp_ops.j_plus, Slot::Collective, space)?;
        let h = a_dag_emb
            .matmul(&sigma_minus)
            .add(&sigma_plus.matmul(&a_emb))
            .scaled(C64::new(v, 0.0));
        let jump = sigma_minus.add(&a_emb);
        let l = hamiltonian_superop(&h)?
            .add(&dissipator_superop(&jump, GAMMA)?)
            .add(&dissipator_superop(&sigma_plus, w)?);
        let spec = ModelSpec::hp_toy(n, w, 0.0, n_cut);
        let state = crate::steady::solve_steady_state(&spec, &l)?;
        evaluate(&state, 2, PhaseConvention::Jump, 0.0)?
    };
    let rel_dev = ((hp.intensity - exact.intensity) / exact.intensity.abs().max(1e-300)).abs();
    rows.push(OracleReport {
        case_id: "hp/invalid-at-strong-V".into(),
        quantity: "bosonized intensity must deviate > 10% at V = ΓN".into(),
        reference_value: Value::Real(exact.intensity),
        computed_value: Value::Real(hp.intensity),
        abs_error: (hp.intensity - exact.intensity).abs(),
        rel_error: rel_dev,
        tolerance: 0.10,
        rule: "rel",
        passed: rel_dev > 0.10,
    });
    Ok(())
}

fn cumulant_cases(rows: &mut Vec<OracleReport>) -> Result<()> {
    // Numeric slow pair of the bosonized model against the closed form.
    let n = 100;
    let w = 100.0;
    let spec = ModelSpec::hp_toy(n, w, 0.0, 6);
    let l = assemble(&spec)?;
    let s = eigendecompose_sector(&l, -1)?;
    let (ref1, ref2) = cumulant_reference_eigenvalues(n, w);
    let num1 = s.eigenvalues[0];
    let num2 = s.eigenvalues[1];
    // Match modes to references by distance.
    let (d1, d2) = if (num1 - ref1).norm() + (num2 - ref2).norm()
        <= (num1 - ref2).norm() + (num2 - ref1).norm()
    {
        ((num1 - ref1).norm(), (num2 - ref2).norm())
    } else {
        ((num1 - ref2).norm(), (num2 - ref1).norm())
    };
    for (idx, (d, r)) in [(d1, ref1), (d2, ref2)].iter().enumerate() {
        rows.push(OracleReport {
            case_id: format!("cumulant/lambda{}", idx + 1),
            quantity: "slow eigenvalue against the cumulant closed form".into(),
            reference_value: Value::Complex { re: r.re, im: r.im },
            computed_value: Value::Complex {
                re: if idx == 0 { num1.re } else { num2.re },
                im: if idx == 0 { num1.im } else { num2.im },
            },
            abs_error: *d,
            rel_error: d / r.norm(),
            tolerance: 0.10,
            rule: "rel",
            passed: d / r.norm() <= 0.10,
        });
    }
    Ok(())
}

fn cross_method_cases(rows: &mut Vec<OracleReport>) -> Result<()> {
    for &(n, w, phi) in &[(1usize, 5.0, 0.0), (1, 5.0, std::f64::consts::PI), (2, 4.0, 1.0)] {
        let spec = ModelSpec::toy_phase(n, w, phi);
        let l = assemble(&spec)?;
        let state = steady_state(&spec)?;
        let (sp, sm, _) = measurement_ops(&spec, PhaseConvention::Jump, 0.0)?;
        let spct = eigendecompose_sector(&l, -1)?;
        let res = residues(&spct, &sp, &sm, &state)?;
        let grid = symmetric_grid(8.0 * (w + GAMMA * (n as f64 + 1.0)), 801);
        let s_eig = spectral_function(&res, &spct.eigenvalues, &grid);
        let samples = correlation_samples(&l, &sp, &sm, &state, grid[grid.len() - 1], None, None)?;
        let s_td = samples.spectrum_at(&grid);
        let scale: f64 = s_eig.iter().cloned().fold(0.0, f64::max);
        let linf = s_eig
            .iter()
            .zip(s_td.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale;
        rows.push(OracleReport::deviation_rule(
            format!("cross-method/N={n}/w={w}/phi={phi:.3}"),
            "L∞ deviation between residue-sum and time-domain spectra",
            linf,
            1e-6,
        ));
    }
    Ok(())
}

/// Render reports as an aligned text table.
pub fn format_report_table(rows: &[OracleReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<34} {:<52} {:>13} {:>13} {:>9} {:>6}\n",
        "case", "quantity", "abs_err", "rel_err", "tol", "pass"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:<34} {:<52} {:>13.3e} {:>13.3e} {:>9.1e} {:>6}\n",
            r.case_id,
            r.quantity,
            r.abs_error,
            r.rel_error,
            r.tolerance,
            if r.passed { "ok" } else { "FAIL" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_at_unit_pump() {
        // Unnormalized entries (1/2, 1, 9/2, 5/2), coherence −3/2, trace 17/2.
        let rho = two_spin_closed_form(1.0, 0.0);
        let norm = 17.0 / 2.0;
        // Solver basis: index 0 = (σ↑, J↓) carries the 9/2 entry.
        assert_abs_diff_eq!(rho[(0, 0)].re, 4.5 / norm, epsilon = 1e-14);
        assert_abs_diff_eq!(rho[(1, 1)].re, 0.5 / norm, epsilon = 1e-14);
        assert_abs_diff_eq!(rho[(2, 2)].re, 2.5 / norm, epsilon = 1e-14);
        assert_abs_diff_eq!(rho[(3, 3)].re, 1.0 / norm, epsilon = 1e-14);
        assert_abs_diff_eq!(rho[(0, 3)].re, -1.5 / norm, epsilon = 1e-14);
        let tr = rho.diag().sum();
        assert_abs_diff_eq!(tr.re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_phase_flips_coherences() {
        let rho = two_spin_closed_form(1.0, PI);
        assert!(rho[(0, 3)].re > 0.0, "triplet-like coherence at φ=π");
        let rho_half = two_spin_closed_form(1.0, PI / 2.0);
        assert!(rho_half[(0, 3)].im.abs() > 0.0);
        assert_abs_diff_eq!(rho_half[(0, 3)].re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn solver_matches_closed_form() {
        for &w in &[1e-6, 0.5, 1.0, 5.0, 50.0] {
            for &phi in &[0.0, PI / 2.0, PI] {
                let reference = two_spin_closed_form(w, phi);
                let state = steady_state(&ModelSpec::toy_phase(1, w, phi)).unwrap();
                let err = crate::linalg::max_abs(&(&state.rho - &reference));
                assert!(err <= 1e-10, "w={w} φ={phi}: deviation {err:.2e}");
            }
        }
    }

    #[test]
    fn brute_force_reproduces_closed_form() {
        let bf = brute_force_lindblad(2, 1.0, 0.0).unwrap();
        // Dominant population: pumped excited, unpumped ground.
        // Chain basis: site 0 unpumped (high bit), site 1 pumped (low bit);
        // bit = 1 means down. Pumped ↑ unpumped ↓ = index 2.
        assert_abs_diff_eq!(bf.rho[(2, 2)].re, 4.5 / 8.5, epsilon = 1e-10);
        assert_abs_diff_eq!(bf.rho[(1, 2)].re, -1.5 / 8.5, epsilon = 1e-10);
    }

    #[test]
    fn brute_force_dark_state_without_pump() {
        // At w = 0 the all-down initial state is stationary, and the
        // time-evolution route stays on it.
        let bf = brute_force_lindblad(3, 0.0, 0.0).unwrap();
        let dim = 8;
        assert!(bf.rho[(dim - 1, dim - 1)].re > 1.0 - 1e-9);
    }

    #[test]
    fn thermal_distribution_shapes() {
        // Uniform at w = Γ.
        let td = thermal_dicke_distribution(8, GAMMA).unwrap();
        for p in &td.populations {
            assert_abs_diff_eq!(*p, 1.0 / 9.0, epsilon = 1e-14);
        }
        // Weak pump concentrates on the ground state; the summed intensity
        // matches the geometric-series closed form
        // (N+1)r/(1−r) − r(1+r)/(1−r)² + O(r^N).
        let r = 0.05;
        let weak = thermal_dicke_distribution(100, r).unwrap();
        assert!(weak.populations[0] > 0.94);
        let closed = (101.0) * r / (1.0 - r) - r * (1.0 + r) / (1.0 - r) / (1.0 - r);
        assert_abs_diff_eq!(weak.intensity, closed, epsilon = 1e-9 * closed);

        // Inverted regime concentrates at the top; intensity ≈ N.
        let inverted = thermal_dicke_distribution(100, 20.0).unwrap();
        assert!((inverted.intensity / 100.0 - 1.0).abs() < 0.06);

        // g² → 6/5 as N → ∞ at infinite temperature.
        let g2 = thermal_dicke_distribution(2000, GAMMA).unwrap().g2;
        assert_abs_diff_eq!(g2, 1.2, epsilon = 5e-3);
    }

    #[test]
    fn rate_equation_matches_law() {
        for &(n, w) in &[(10usize, 0.3), (40, 2.0), (100, 0.5)] {
            let law = thermal_dicke_distribution(n, w).unwrap();
            let num = collective_pump_rate_equation_populations(n, w).unwrap();
            for (a, b) in law.populations.iter().zip(num.iter()) {
                assert!((a - b).abs() < 1e-12, "N={n} w={w}");
            }
        }
    }

    #[test]
    fn oracle_suite_is_green() {
        let rows = run_all().unwrap();
        let failed: Vec<&OracleReport> = rows.iter().filter(|r| !r.passed).collect();
        assert!(
            failed.is_empty(),
            "failing oracle rows:\n{}",
            format_report_table(&failed.iter().map(|r| (*r).clone()).collect::<Vec<_>>())
        );
    }
}
