use emission_core::liouvillian::{assemble, ModelSpec};
use emission_core::observables::{evaluate, PhaseConvention};
use emission_core::pipeline::{evaluate_point, PointOptions};
use emission_core::spectrum::eigendecompose_sector_unchecked;
use emission_core::steady::steady_state;
use std::f64::consts::PI;

fn main() {
    // g2 scaling: exact Dicke at N=20 and N=40 vs HP at same N
    println!("== g2*w/(N G) at phi=0, exact vs HP ==");
    for n in [20usize, 40] {
        for f in [0.5, 1.0, 1.7, 2.5] {
            let w = f * n as f64;
            let exact = {
                let st = steady_state(&ModelSpec::toy_phase(n, w, 0.0)).unwrap();
                evaluate(&st, 2, PhaseConvention::Jump, 0.0).unwrap().g2()
            };
            let hp6 = {
                let st = steady_state(&ModelSpec::hp_toy(n, w, 0.0, 6)).unwrap();
                evaluate(&st, 2, PhaseConvention::Jump, 0.0).unwrap().g2()
            };
            let hp10 = {
                let st = steady_state(&ModelSpec::hp_toy(n, w, 0.0, 10)).unwrap();
                evaluate(&st, 2, PhaseConvention::Jump, 0.0).unwrap().g2()
            };
            println!("N={n} w={w:.0} (w/NG={f}): exact g2={:.4} -> c={:.4}; hp6 c={:.4}; hp10 c={:.4}",
                exact, exact * w / n as f64, hp6 * w / n as f64, hp10 * w / n as f64);
        }
    }
    // intensity ratio, exact N=20 vs HP
    println!("== intensity ratio at w=GN ==");
    for n in [20usize, 40] {
        let w = n as f64;
        let i0 = evaluate(&steady_state(&ModelSpec::toy_phase(n, w, 0.0)).unwrap(), 2, PhaseConvention::Jump, 0.0).unwrap().intensity;
        let ipi = evaluate(&steady_state(&ModelSpec::toy_phase(n, w, PI)).unwrap(), 2, PhaseConvention::Jump, 0.0).unwrap().intensity;
        println!("N={n} exact: I(pi)/I(0) = {:.4}", ipi / i0);
        let h0 = evaluate(&steady_state(&ModelSpec::hp_toy(n, w, 0.0, 8)).unwrap(), 2, PhaseConvention::Jump, 0.0).unwrap().intensity;
        let hpi = evaluate(&steady_state(&ModelSpec::hp_toy(n, w, PI, 8)).unwrap(), 2, PhaseConvention::Jump, 0.0).unwrap().intensity;
        println!("N={n} hp8:   I(pi)/I(0) = {:.4}", hpi / h0);
    }
    // linewidth vs |Re l1| at phi=pi across w
    println!("== phi=pi linewidth / |Re lambda1| ==");
    for n in [10usize, 20] {
        for w in [0.05, 0.1, 0.5, 1.0, 2.0, 5.0] {
            let spec = ModelSpec::toy_phase(n, w, PI);
            let opts = PointOptions { k_max: 2, ..Default::default() };
            let p = evaluate_point(&spec, &opts);
            let l = assemble(&spec).unwrap();
            let d = eigendecompose_sector_unchecked(&l, -1).unwrap();
            let lam1 = d.eigenvalues[0].re.abs();
            match p {
                Ok(p) => {
                    let sp = p.spectrum.unwrap();
                    println!("N={n} w={w}: lw={:.5} |Re l1|={:.5} ratio={:.3} cond={:.2e} method={}",
                        sp.linewidth, lam1, sp.linewidth / lam1, d.condition_estimate, sp.method);
                }
                Err(e) => println!("N={n} w={w}: ERROR {e} (cond={:.2e})", d.condition_estimate),
            }
        }
    }
    // conditions at phi=0 N=20 and collective pump
    println!("== condition estimates ==");
    for (label, spec) in [
        ("toy N=20 w=2", ModelSpec::toy_phase(20, 2.0, 0.0)),
        ("toy N=20 w=20", ModelSpec::toy_phase(20, 20.0, 0.0)),
        ("toy N=20 w=200", ModelSpec::toy_phase(20, 200.0, 0.0)),
        ("coll N=20 w=200 pi", ModelSpec::collective_pump(20, 200.0, PI)),
        ("coll N=20 w=1000 pi", ModelSpec::collective_pump(20, 1000.0, PI)),
        ("int N=20 w=400 V=15", ModelSpec::interacting(20, 400.0, 15.0)),
    ] {
        let l = assemble(&spec).unwrap();
        let d = eigendecompose_sector_unchecked(&l, -1).unwrap();
        let slow: Vec<String> = d.eigenvalues.iter().take(3).map(|z| format!("{:.3}{:+.3}i", z.re, z.im)).collect();
        println!("{label}: cond={:.2e} slow={:?} max|l|={:.1}",
            d.condition_estimate, slow,
            d.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
}
