use erw_core::analytic::{lln_limit_law, mean_formula, variance_formula};
use erw_core::oracle::{enumerate, exact_moments, MomentOptions};
use erw_core::{Error, MemorySpec, WalkParams};

const MODELS: &[&str] = &[
    "full",
    "first:1",
    "first:2",
    "first:3",
    "last:1",
    "last:2",
    "first:1+last:1",
    "first:2+last:1",
    "first:1+last:2",
    "skipfirst:2",
];

fn all_params() -> Vec<WalkParams> {
    let mut out = Vec::new();
    for p in [0.25, 0.6, 0.75, 0.9] {
        for r in [0.3, p] {
            out.push(WalkParams::new(p, r));
        }
        for s in [&[1][..], &[-1], &[1, 1], &[1, -1], &[-1, 1], &[-1, -1]] {
            out.push(WalkParams::new(p, 0.5).with_start(s));
        }
    }
    out
}

#[test]
fn every_exact_catalog_entry_matches_enumeration() {
    let mut checked = 0;
    for model in MODELS {
        let spec: MemorySpec = model.parse().unwrap();
        for params in all_params() {
            for n in [2usize, 5, 11, 16] {
                let pmf = enumerate(spec, &params, n).unwrap();
                let mean = mean_formula(spec, &params, n);
                let var = variance_formula(spec, &params, n);
                for (what, res, want) in [("mean", mean, pmf.mean()), ("variance", var, pmf.variance())] {
                    match res {
                        Ok(f) if f.is_exact() => {
                            assert!(
                                (f.value - want).abs() <= 1e-10 * want.abs().max(1.0),
                                "{model} {params:?} n={n} {what}: {} vs {want}",
                                f.value
                            );
                            checked += 1;
                        }
                        Ok(_) | Err(Error::NoFormula(_)) => {}
                        Err(e) => panic!("{model} {params:?} n={n}: {e}"),
                    }
                }
            }
        }
    }
    assert!(checked > 300, "only {checked} exact entries checked");
}

#[test]
fn asymptotic_means_are_approached_by_the_exact_recursion() {
    let cases = [
        ("first:1+last:1", WalkParams::symmetric(0.75).with_start(&[1])),
        ("first:2+last:1", WalkParams::symmetric(0.75).with_start(&[1, 1])),
        ("first:1+last:2", WalkParams::symmetric(0.75)),
        ("last:2", WalkParams::new(0.6, 0.8)),
    ];
    for (model, params) in cases {
        let spec: MemorySpec = model.parse().unwrap();
        let n = 20_000;
        let f = mean_formula(spec, &params, n).unwrap();
        let t = exact_moments(spec, &params, n, 1, &MomentOptions::default()).unwrap();
        let rel = (t.mean() - f.value).abs() / f.value.abs().max(1.0);
        assert!(rel < 1e-3, "{model}: exact {} vs formula {}", t.mean(), f.value);
    }
}

#[test]
fn atom_law_moments_match_closed_forms_on_a_grid() {
    for i in 1..=9 {
        let p = i as f64 / 10.0;
        let a = 2.0 * p - 1.0;
        let one = lln_limit_law(MemorySpec::FirstM(1), &WalkParams::symmetric(p)).unwrap();
        assert!((one.variance() - 4.0 * p * (1.0 - p) * a * a).abs() < 1e-12);
        let two = lln_limit_law(MemorySpec::FirstM(2), &WalkParams::symmetric(p)).unwrap();
        assert!((two.mean() - p * a * a).abs() < 1e-12);
        assert!((two.variance() - p * (1.0 - p) * a * a * (4.0 * p * p + 1.0)).abs() < 1e-12);
    }
}
