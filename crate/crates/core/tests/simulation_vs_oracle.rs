use erw_core::analytic::{clt_limit_law, lln_limit_law, CenteringMode};
use erw_core::engine::{simulate_ensemble, EnsembleConfig, Statistic};
use erw_core::oracle::enumerate;
use erw_core::stats::{atom_cluster_test, ks_test, AtomTestConfig};
use erw_core::{MemorySpec, WalkParams};

#[test]
fn empirical_pmf_stays_in_multinomial_bands() {
    let paths = 200_000;
    for model in ["full", "first:2", "last:2", "first:1+last:2", "skipfirst:1"] {
        let spec: MemorySpec = model.parse().unwrap();
        for params in [WalkParams::symmetric(0.7), WalkParams::new(0.3, 0.5).with_start(&[1, -1])] {
            let n = 9;
            let exact = enumerate(spec, &params, n).unwrap();
            let cfg = EnsembleConfig::new(n, paths, 17, Statistic::Raw);
            let ens = simulate_ensemble(spec, &params, &cfg).unwrap();
            for (&t, &q) in exact.support.iter().zip(&exact.probs) {
                let freq = ens.sample.iter().filter(|&&x| x == t as f64).count() as f64 / paths as f64;
                let band = 4.5 * (q * (1.0 - q) / paths as f64).sqrt() + 1e-12;
                assert!((freq - q).abs() <= band, "{model} {params:?} t={t}: {freq} vs {q}");
            }
        }
    }
}

#[test]
fn short_clt_and_atom_checks() {
    let params = WalkParams::symmetric(0.75);
    let spec = MemorySpec::LastK(1);
    let law = clt_limit_law(spec, &params, CenteringMode::Random).unwrap();
    let cfg = EnsembleConfig::new(4000, 2000, 3, Statistic::Clt(law.recipe));
    let ens = simulate_ensemble(spec, &params, &cfg).unwrap();
    assert!(ks_test(&ens.sample, &law.law, 0.001).unwrap().verdict.passed());

    let spec = MemorySpec::FirstM(1);
    let law = lln_limit_law(spec, &params).unwrap();
    let cfg = EnsembleConfig::new(20_000, 2000, 4, Statistic::OverN);
    let ens = simulate_ensemble(spec, &params, &cfg).unwrap();
    let r = atom_cluster_test(&ens.sample, &law, &AtomTestConfig::for_law(&law, 0.001)).unwrap();
    assert!(r.verdict.passed(), "{r:?}");
}
