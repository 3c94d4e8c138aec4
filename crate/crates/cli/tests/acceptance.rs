//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS line (run with `--nocapture` to see them). Tolerances are pinned
//! here, not tuned at runtime.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tropical_sandpile::config::PointConfig;
use tropical_sandpile::coord::Coord;
use tropical_sandpile::montecarlo::{
    avalanche_samples, ccdf, fit_tail, ks_distance, ks_distance_two_sample, run_trials,
    sample_config, TrialConfig,
};
use tropical_sandpile::observables::{length_of_relaxation, mirror, n2_locus_area};
use tropical_sandpile::raster::scan;
use tropical_sandpile::relax::{relax, relax_traced, sweep, DEFAULT_MAX_SWEEPS};
use tropical_sandpile::state::{Component, SandpileState};

fn pass(line: &str) {
    println!("[acceptance] {}: PASS", line);
}

fn ratio_f64(r: num_rational::Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn area_f64(r: num_rational::Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[test]
fn criterion_1_figure_1_golden_trace() {
    // The CLI reproduces the worked relaxation verbatim.
    let out = Command::new(env!("CARGO_BIN_EXE_tsand"))
        .args(["relax", "--points", "4/9,3/9", "--trace"])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let expected = "\
points: (4/9, 3/9)
denominator: 9
step 1: topple at 4/9 -> {4/9, 5/9}
step 2: topple at 3/9 -> {1/9, 3/9, 5/9}
step 3: topple at 4/9 -> {1/9, 4/9 x2}
step 4: topple at 3/9 -> {2/9, 3/9, 4/9}
step 5: topple at 4/9 -> no change
step 6: topple at 3/9 -> no change
L = 2
final: {2/9, 3/9, 4/9}
";
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);

    // Library-level: the four intermediate states, L = 2, and well under
    // a millisecond of compute.
    let cfg = PointConfig::new(vec![Coord::new(4, 9), Coord::new(3, 9)]).unwrap();
    let started = Instant::now();
    let result = relax_traced(&cfg, DEFAULT_MAX_SWEEPS).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(result.sweeps, 2);
    let golden: Vec<SandpileState> = [
        vec![(4u64, 1u8), (5, 1)],
        vec![(1, 1), (3, 1), (5, 1)],
        vec![(1, 1), (4, 2)],
        vec![(2, 1), (3, 1), (4, 1)],
    ]
    .into_iter()
    .map(|pts| SandpileState::from_points(pts.into_iter().map(|(n, m)| (Coord::new(n, 9), m))))
    .collect();
    let changed: Vec<SandpileState> = result
        .trace
        .unwrap()
        .into_iter()
        .filter(|s| s.changed)
        .map(|s| s.state)
        .collect();
    assert_eq!(changed, golden);
    assert!(
        elapsed < Duration::from_millis(1),
        "golden relaxation took {:?}",
        elapsed
    );
    pass("criterion 1 (Figure 1 golden trace, exact states, L = 2, < 1 ms)");
}

#[test]
fn criterion_2_theorem_lemma_cross_validation() {
    // Nearly coincident grain points relax in steps proportional to their
    // gap, so on very fine grids the sweep count has no practical bound.
    // The cross-validation therefore runs on a 2^20 grid, where dyadic
    // spacing keeps every length far below the guard; agreement of the
    // two constructions is exact at any denominator.
    let den = 1u64 << 20;
    let per_n = 10_000u64;
    let started = Instant::now();
    let mut max_len = 0u64;
    for n in 1..=8usize {
        let worst = (0..per_n)
            .into_par_iter()
            .map(|trial| {
                let cfg = sample_config(n, trial, 0xC0DE + n as u64, den);
                let relaxed = relax(&cfg, DEFAULT_MAX_SWEEPS).expect("relaxation terminates");
                assert_eq!(
                    relaxed.final_state,
                    cfg.limit_state(),
                    "n = {} trial = {}",
                    n,
                    trial
                );
                assert!(relaxed.sweeps >= 1);
                relaxed.sweeps
            })
            .max()
            .unwrap();
        max_len = max_len.max(worst);
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {:?}", elapsed);
    pass(&format!(
        "criterion 2 (relax = closed-form limit, 10^4 configs for each n in 1..=8, max L = {}, {:?})",
        max_len, elapsed
    ));
}

#[test]
fn criterion_3_exact_locus_frequencies_n2() {
    let trials = 1_000_000u64;
    let hist = run_trials(&TrialConfig::new(2, trials, 42)).unwrap();
    assert_eq!(hist.trials(), trials);

    let mut checked = 0u32;
    for length in 1u64.. {
        let exact = ratio_f64(n2_locus_area(length));
        if exact * (trials as f64) < 100.0 {
            break;
        }
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
        let freq = hist.frequency(length);
        assert!(
            (freq - exact).abs() < 3.0 * sigma,
            "L = {}: freq {} vs exact {} (3 sigma = {})",
            length,
            freq,
            exact,
            3.0 * sigma
        );
        checked += 1;
    }
    // The named headline frequencies: 1/4 and 21/40.
    assert!((hist.frequency(1) - 0.25).abs() < 0.0013);
    assert!((hist.frequency(2) - 0.525).abs() < 0.0015);
    assert!(checked >= 50, "only {} lengths had expected count >= 100", checked);
    pass(&format!(
        "criterion 3 (n = 2 locus frequencies match the exact areas for {} lengths at 3 sigma)",
        checked
    ));
}

#[test]
fn criterion_4_tail_exponent_n2() {
    let hist = run_trials(&TrialConfig::new(2, 10_000_000, 1234)).unwrap();
    let fit = fit_tail(&ccdf(&hist), 10, 300).unwrap();
    assert!(
        (fit.ccdf_slope + 1.0).abs() <= 0.15,
        "ccdf slope {}",
        fit.ccdf_slope
    );
    assert!(
        (fit.pmf_exponent + 2.0).abs() <= 0.15,
        "pmf exponent {}",
        fit.pmf_exponent
    );
    // The asymptotic tail amplitude is 1/3.
    assert!(
        (fit.amplitude - 1.0 / 3.0).abs() <= 0.1,
        "amplitude {}",
        fit.amplitude
    );
    pass(&format!(
        "criterion 4 (n = 2 ccdf slope {:.3}, pmf exponent {:.3}, amplitude {:.3} at 10^7 trials)",
        fit.ccdf_slope, fit.pmf_exponent, fit.amplitude
    ));

    // Larger n: estimates are reported, not asserted — no reference values.
    for (n, trials) in [(7, 200_000u64), (8, 100_000), (16, 10_000), (20, 10_000), (30, 10_000)] {
        let hist = run_trials(&TrialConfig::new(n, trials, 7_000 + n as u64)).unwrap();
        match fit_tail(&ccdf(&hist), 10, 300) {
            Ok(f) => println!(
                "[acceptance] reported, not asserted: n = {:2} ({} trials) ccdf slope {:.3} over [10, 300] ({} support points)",
                n, trials, f.ccdf_slope, f.points_used
            ),
            Err(e) => println!(
                "[acceptance] reported, not asserted: n = {:2} ({} trials) no tail fit: {}",
                n, trials, e
            ),
        }
    }
}

#[test]
fn criterion_5_avalanche_law() {
    let trials = 100_000u64;
    let (small_n, _) = avalanche_samples(&TrialConfig::new(1, trials, 501));
    let (large_n, _) = avalanche_samples(&TrialConfig::new(5, trials, 502));

    let ks_crit = 1.63 / (trials as f64).sqrt();
    let mean_tol = 3.0 * (1.0 / 18.0f64).sqrt() / (trials as f64).sqrt();
    for (name, samples) in [("n = 1", &small_n), ("n = 5", &large_n)] {
        let d = ks_distance(samples, |x| x * x);
        assert!(d < ks_crit, "{}: KS {} >= {}", name, d, ks_crit);
        let mean = samples.iter().sum::<f64>() / trials as f64;
        assert!(
            (mean - 2.0 / 3.0).abs() < mean_tol,
            "{}: mean {}",
            name,
            mean
        );
    }
    let d2 = ks_distance_two_sample(&small_n, &large_n);
    let two_crit = 1.63 * (2.0 / trials as f64).sqrt();
    assert!(d2 < two_crit, "two-sample KS {} >= {}", d2, two_crit);
    pass(&format!(
        "criterion 5 (avalanche CDF = x^2 at KS 1%, mean = 2/3 at 3 sigma, n-independence; D2 = {:.4})",
        d2
    ));
}

#[test]
fn criterion_6_invariant_suite() {
    let cases = 10_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6_1D);
    // Full relaxations stay on grids coarse enough to bound the sweep
    // count (see criterion 2); single topples can use the finest grid.
    let relax_dens: [u64; 4] = [9, 60, 1 << 16, 1 << 20];
    let dens: [u64; 4] = [9, 60, 1 << 16, 1 << 62];

    // Validity (sortedness, interiority, multiplicity <= 2, integrality)
    // after every single toppling step of full relaxations.
    let mut step_checks = 0u64;
    for case in 0..cases {
        let den = *relax_dens.choose(&mut rng).unwrap();
        let n = rng.random_range(1..=6);
        let cfg = sample_config(n, case as u64, 0xAB0 + case as u64 % 7, den);
        let mut state = SandpileState::new();
        loop {
            let mut changed = false;
            for &p in cfg.points() {
                changed |= state.topple_in_place(p);
                assert!(state.is_valid(), "invalid state {} in cfg {}", state, cfg);
                step_checks += 1;
            }
            if !changed {
                break;
            }
        }
    }
    assert!(step_checks >= 10_000);

    // Idempotence of toppling on reachable states.
    for case in 0..cases {
        let den = *dens.choose(&mut rng).unwrap();
        let grains = rng.random_range(0..6);
        let mut state = SandpileState::new();
        for _ in 0..grains {
            state.topple_in_place(Coord::new(rng.random_range(1..den), den));
        }
        let p = Coord::new(rng.random_range(1..den), den);
        let once = state.topple(p);
        assert_eq!(once.topple(p), once, "case {}", case);
    }

    // Toppling never lowers the graph, and strictly raises it at a grain
    // dropped off the hypersurface. (The break-free component shrinks;
    // the function itself grows toward the limit.)
    for case in 0..cases {
        let den = *dens.choose(&mut rng).unwrap();
        let grains = rng.random_range(0..5);
        let mut state = SandpileState::new();
        for _ in 0..grains {
            state.topple_in_place(Coord::new(rng.random_range(1..den), den));
        }
        let p = Coord::new(rng.random_range(1..den), den);
        let next = state.topple(p);
        let mut probes = vec![
            p,
            Coord::new(rng.random_range(0..=97), 97),
            Coord::new(rng.random_range(0..=97), 97),
            Coord::new(rng.random_range(0..=den), den),
        ];
        if let Ok(Component::Interval { lo, hi }) = state.find_component(p) {
            probes.push(lo);
            probes.push(hi);
        }
        for x in probes {
            let before = state.evaluate(x);
            let after = next.evaluate(x);
            assert!(after >= before, "case {}: lowered at {}", case, x);
        }
        match state.find_component(p).unwrap() {
            Component::OnHypersurface => assert_eq!(next, state),
            Component::Interval { .. } => {
                assert!(next.evaluate(p) > state.evaluate(p), "case {}", case)
            }
        }
    }

    // Relaxation length is mirror-symmetric.
    for case in 0..cases {
        let den = *relax_dens.choose(&mut rng).unwrap();
        let n = rng.random_range(1..=8);
        let cfg = sample_config(n, case as u64, 0x513 + case as u64 % 11, den);
        assert_eq!(
            length_of_relaxation(&cfg).unwrap(),
            length_of_relaxation(&mirror(&cfg)).unwrap(),
            "cfg {}",
            cfg
        );
    }

    pass(&format!(
        "criterion 6 (validity/multiplicity/integrality on {} topples; idempotence, monotonicity, mirror symmetry on {} cases each)",
        step_checks, cases
    ));
}

#[test]
fn criterion_7_raster_fidelity() {
    let resolution = 1024u32;
    let grid = scan(resolution, DEFAULT_MAX_SWEEPS);
    assert!(grid.guard_tripped().is_empty());

    for length in 1..=6u32 {
        let estimate = area_f64(grid.area_estimate(length));
        let exact = ratio_f64(n2_locus_area(length as u64));
        assert!(
            (estimate - exact).abs() <= 0.005,
            "L = {}: pixel area {} vs exact {}",
            length,
            estimate,
            exact
        );
    }
    for row in 0..resolution {
        for col in 0..resolution {
            assert_eq!(
                grid.value(row, col),
                grid.value(resolution - 1 - row, resolution - 1 - col),
                "asymmetry at ({}, {})",
                row,
                col
            );
        }
    }
    pass("criterion 7 (1024^2 raster areas within 0.005 of the formula; exact point symmetry)");
}

/// The spec-level soundness link behind criterion 2: a change-free sweep
/// means every grain sits on the hypersurface.
#[test]
fn stability_certificate_is_honest() {
    let den = 1u64 << 30;
    for trial in 0..200 {
        let cfg = sample_config(4, trial, 77, den);
        let result = relax(&cfg, DEFAULT_MAX_SWEEPS).unwrap();
        let mut state = result.final_state.clone();
        assert!(!sweep(&mut state, &cfg));
        for &p in cfg.points() {
            assert!(matches!(
                state.find_component(p),
                Ok(Component::OnHypersurface)
            ));
        }
    }
}
