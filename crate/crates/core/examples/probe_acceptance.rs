use emission_core::liouvillian::ModelSpec;
use emission_core::observables::{evaluate, PhaseConvention};
use emission_core::pipeline::{evaluate_point, PointOptions, SpectrumOptions};
use emission_core::steady::steady_state;
use std::f64::consts::PI;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    // criterion 5: linewidth law at phi=0
    println!("== crit 5: linewidth law ==");
    let cases: Vec<(usize, Box<dyn Fn(f64) -> ModelSpec>)> = vec![
        (20usize, Box::new(|w| ModelSpec::toy_phase(20, w, 0.0))),
        (100, Box::new(|w| ModelSpec::hp_toy(100, w, 0.0, 6))),
    ];
    for (n, spec_of) in &cases {
        let n = *n;
        for f in [0.1, 1.0, 10.0] {
            let w = f * n as f64;
            let spec = spec_of(w);
            let opts = PointOptions { k_max: 2, ..Default::default() };
            let t = Instant::now();
            match evaluate_point(&spec, &opts) {
                Ok(p) => {
                    let sp = p.spectrum.unwrap();
                    let law = ((n as f64 + 1.0) + w) / 2.0;
                    println!("N={n} w={w}: lw={:.3} law={:.3} ratio={:.4} structure={} method={} [{:?}]",
                        sp.linewidth, law, sp.linewidth/law, sp.peak_structure, sp.method, t.elapsed());
                }
                Err(e) => println!("N={n} w={w}: ERROR {e}"),
            }
        }
    }
    // criterion 6: g2 scaling N=100 HP
    println!("== crit 6: g2 scaling ==");
    let n = 100.0;
    for f in [0.3, 0.6, 1.0, 1.7, 3.0] {
        let w = f * 1.7 * n;
        let spec = ModelSpec::hp_toy(100, w, 0.0, 6);
        let st = steady_state(&spec).unwrap();
        let obs = evaluate(&st, 2, PhaseConvention::Jump, 0.0).unwrap();
        println!("w={w:.0}: g2={:.4} g2*w/(N)={:.4}", obs.g2(), obs.g2() * w / n);
    }
    // criterion 8: intensity ratio at w=ΓN, N=100
    println!("== crit 8: intensity ratio ==");
    let s0 = steady_state(&ModelSpec::hp_toy(100, 100.0, 0.0, 6)).unwrap();
    let spi = steady_state(&ModelSpec::hp_toy(100, 100.0, PI, 6)).unwrap();
    let i0 = evaluate(&s0, 2, PhaseConvention::Jump, 0.0).unwrap().intensity;
    let ipi = evaluate(&spi, 2, PhaseConvention::Jump, 0.0).unwrap().intensity;
    println!("I(pi)/I(0) = {:.4} (I0={i0:.4}, Ipi={ipi:.4})", ipi / i0);
    // criterion 9c: collective pump with sigma, phi=pi, N=20
    println!("== crit 9c: collective pump linewidth ==");
    for w in [200.0, 1000.0] {
        let spec = ModelSpec::collective_pump(20, w, PI);
        let opts = PointOptions { k_max: 2, ..Default::default() };
        match evaluate_point(&spec, &opts) {
            Ok(p) => {
                let sp = p.spectrum.unwrap();
                println!("w={w}: lw={:.4} structure={} method={}", sp.linewidth, sp.peak_structure, sp.method);
            }
            Err(e) => println!("w={w}: ERROR {e}"),
        }
    }
    // criterion 10: interacting inversion window
    println!("== crit 10: inversion ==");
    for w in [50.0, 200.0, 300.0, 450.0, 700.0, 900.0, 1500.0, 3000.0] {
        let spec = ModelSpec::interacting(20, w, 15.0);
        let st = steady_state(&spec).unwrap();
        let obs = evaluate(&st, 2, PhaseConvention::Jump, 0.0).unwrap();
        println!("w={w}: Sz={:+.4} I={:.3} g2={:.4}", obs.sz, obs.intensity, obs.g2());
    }
    // criterion 7 bits
    println!("== crit 7: phi=pi quantum ==");
    for n in [10usize, 20] {
        let w = n as f64;
        let st = steady_state(&ModelSpec::toy_phase(n, w, PI)).unwrap();
        let obs = evaluate(&st, 2, PhaseConvention::Jump, 0.0).unwrap();
        println!("N={n} w={w}: g2={:.5}", obs.g2());
    }
    for (n, w) in [(10usize, 0.1)] {
        let spec = ModelSpec::toy_phase(n, w, PI);
        let opts = PointOptions { k_max: 2, spectrum: Some(SpectrumOptions::default()), ..Default::default() };
        let p = evaluate_point(&spec, &opts).unwrap();
        let sp = p.spectrum.unwrap();
        let l = emission_core::liouvillian::assemble(&spec).unwrap();
        let d = emission_core::spectrum::eigendecompose_sector_unchecked(&l, -1).unwrap();
        println!("N={n} w={w}: lw={:.5} |Re l1|={:.5} ratio={:.4} method={}",
            sp.linewidth, d.eigenvalues[0].re.abs(), sp.linewidth / d.eigenvalues[0].re.abs(), sp.method);
    }
    println!("total {:?}", t0.elapsed());
}
