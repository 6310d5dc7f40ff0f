//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use apriesz_core::bohrint::{real_line_mean_of, Budget, RealLinePoly};
use apriesz_core::criteria::{
    bourgain_scan, cs_subsequence_bound, fejer_factorization_check, kac_clt_diagnostics,
    kac_moment_formula, kac_moment_identity, kac_moment_symbolic, klemes_inequality_check,
    ScanStrategy, GAUSS_FIRST_MOMENT,
};
use apriesz_core::flatness::local_vs_global_flatness;
use apriesz_core::riesz::{degree_report, riesz_property_check, riesz_state, RankOneParams, Stage};
use apriesz_core::{ExactComplex, Frequency, Rational, SymbolBasis};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn one() -> Rational {
    Rational::from_integer(BigInt::from(1))
}

/// Up to 3 symbols plus the unit; spacers are nonnegative integer or half
/// integer combinations, so every value is nonnegative.
fn random_params(rng: &mut ChaCha8Rng) -> RankOneParams {
    let n_symbols = rng.random_range(1..=3);
    let names = ["a", "b", "c"];
    let basis = SymbolBasis::with_unit(
        (0..n_symbols).map(|i| (names[i].to_string(), rng.random_range(0.1..2.0))),
    )
    .unwrap();
    let n_stages = rng.random_range(1..=4);
    let coeffs = [0i64, 0, 1, 2, 3];
    let stages = (0..n_stages)
        .map(|_| {
            let p = rng.random_range(2..=8);
            let mut spacers = vec![Frequency::zero(&basis)];
            for _ in 1..=p {
                let dense: Vec<Rational> = (0..basis.len())
                    .map(|_| {
                        let c = coeffs[rng.random_range(0..coeffs.len())];
                        let d = if rng.random_bool(0.3) { 2 } else { 1 };
                        Rational::new(BigInt::from(c), BigInt::from(d))
                    })
                    .collect();
                spacers.push(Frequency::from_dense(&basis, dense).unwrap());
            }
            Stage { p, spacers }
        })
        .collect();
    RankOneParams::new(&basis, stages).unwrap()
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).filter(|_| rng.random_bool(0.5)).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    for _ in 0..50 {
        let params = random_params(&mut rng);
        for k in 0..params.num_stages() {
            if params.abs2_exact(k).unwrap().mean() != ExactComplex::real(one()) {
                return outcome(false, format!("mean |P_{k}|^2 != 1 for {:?}", params.stages()[k]));
            }
            checked += 1;
        }
    }
    let took = start.elapsed();
    outcome(
        took < Duration::from_secs(5),
        format!("{checked} stages over 50 params, all exactly 1, {:.2}s (< 5s)", took.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let params = RankOneParams::independent(&[2, 3, 2, 3]).unwrap();
    let mut sets: Vec<Vec<usize>> = vec![vec![]];
    for a in 0..4 {
        sets.push(vec![a]);
        for b in a + 1..4 {
            sets.push(vec![a, b]);
            for c in b + 1..4 {
                sets.push(vec![a, b, c]);
            }
        }
    }
    for s in &sets {
        let v = riesz_property_check(&params, s).unwrap();
        if v != one() {
            return outcome(false, format!("indices {s:?} give {v}"));
        }
    }
    outcome(true, format!("{} index sets, all exactly 1", sets.len()))
}

fn criterion_3() -> Outcome {
    let mut tuples: Vec<Vec<u32>> = Vec::new();
    for k in 1..=3usize {
        let mut l = vec![0u32; k];
        loop {
            if l.iter().sum::<u32>() <= 8 {
                tuples.push(l.clone());
            }
            let mut i = 0;
            loop {
                if i == k {
                    break;
                }
                l[i] += 1;
                if l[i] <= 8 {
                    break;
                }
                l[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    let mut odd = 0;
    for l in &tuples {
        let formula = kac_moment_formula(l);
        let symbolic = kac_moment_symbolic(l).unwrap();
        if formula != symbolic || kac_moment_identity(l).is_err() {
            return outcome(false, format!("l = {l:?}: formula {formula}, expansion {symbolic}"));
        }
        if l.iter().any(|x| x % 2 == 1) {
            odd += 1;
            if formula != Rational::from_integer(BigInt::from(0)) {
                return outcome(false, format!("l = {l:?} has an odd entry but moment {formula}"));
            }
        }
    }
    outcome(true, format!("{} tuples agree exactly ({odd} with odd entries, all 0)", tuples.len()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let ps = [4usize, 16, 64, 256];
    let mut ests = Vec::new();
    for (i, &p) in ps.iter().enumerate() {
        let params = RankOneParams::independent(&[p]).unwrap();
        let pn = params.build_polynomial(0).unwrap();
        let e = apriesz_core::bohrint::mean_abs(&pn, Budget::monte_carlo(200_000, 400 + i as u64)).unwrap();
        ests.push(e);
    }
    let took = start.elapsed();
    // the values approach sqrt(pi)/2 from above
    let monotone = ests.windows(2).all(|w| {
        let tol = 3.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        w[1].value <= w[0].value + tol
    });
    let above = ests.iter().all(|e| e.value >= GAUSS_FIRST_MOMENT - 3.0 * e.std_error);
    let last = (ests[3].value - GAUSS_FIRST_MOMENT).abs();
    let values: Vec<String> = ests.iter().map(|e| format!("{:.4}±{:.4}", e.value, e.std_error)).collect();
    outcome(
        monotone && above && last <= 0.01 && took < Duration::from_secs(60),
        format!(
            "mean_abs p=4,16,64,256: [{}], monotone toward sqrt(pi)/2 (decreasing), |est(256) - 0.88623| = {last:.4} <= 0.01, {:.1}s",
            values.join(", "),
            took.as_secs_f64()
        ),
    )
}

fn criterion_5() -> Outcome {
    let params = RankOneParams::independent(&[64; 15]).unwrap();
    let rep = bourgain_scan(&params, ScanStrategy::Greedy { window: 3 }, 5, Budget::monte_carlo(200_000, 5)).unwrap();
    let i5 = &rep.i_k[5];
    let bound = rep.geometric_bound[5];
    let within = i5.value <= bound + 3.0 * i5.uncertainty();
    let all_within = rep.within_geometric_bound.iter().all(|&b| b);
    let evidence_monotone = rep.evidence_by_k.windows(2).all(|w| !w[0] || w[1]);
    let nonincreasing = rep
        .i_k
        .windows(2)
        .all(|w| w[1].value <= w[0].value + 3.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt());
    let ratios: Vec<String> = rep.decay_ratios.iter().map(|r| format!("{:.3}", r.unwrap_or(f64::NAN))).collect();
    outcome(
        within && all_within && evidence_monotone && nonincreasing,
        format!(
            "I_5 = {:.4}±{:.4} <= {bound:.4} + 3σ, ratios [{}], indices {:?}, verdict {:?}",
            i5.value,
            i5.std_error,
            ratios.join(", "),
            rep.indices,
            rep.verdict
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut checked = 0usize;
    for mask in 0..8u32 {
        let ps: Vec<usize> = (0..3).map(|i| if mask >> i & 1 == 1 { 3 } else { 2 }).collect();
        let params = RankOneParams::independent(&ps).unwrap();
        let mut prev = riesz_state(&params, 0).unwrap();
        for k in 0..3 {
            let next = prev.extend(&params, k).unwrap();
            let bad = prev.monotonicity_violations(&next);
            if !bad.is_empty() {
                return outcome(false, format!("p = {ps:?}, stage {k}: {} violations", bad.len()));
            }
            checked += prev.sigma_table().len();
            prev = next;
        }
    }
    outcome(true, format!("8 cut-number patterns, {checked} coefficient comparisons, none decrease"))
}

fn random_independent(rng: &mut ChaCha8Rng, stages: usize, max_p: usize) -> RankOneParams {
    let ps: Vec<usize> = (0..stages).map(|_| rng.random_range(2..=max_p)).collect();
    RankOneParams::independent(&ps).unwrap()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = f64::NEG_INFINITY;
    for case in 0..20 {
        let params = random_independent(&mut rng, 4, 8);
        let subset = random_subset(&mut rng, 4);
        let r = cs_subsequence_bound(&params, 3, &subset, Budget::auto(100_000, 7000 + case)).unwrap();
        worst = worst.max((r.lhs.value - r.rhs) / r.combined_error.max(1e-12));
        if !r.holds {
            return outcome(false, format!("case {case}: lhs {} > rhs {} (N = {subset:?})", r.lhs.value, r.rhs));
        }
    }
    outcome(true, format!("20 cases hold at 3σ (max (lhs - rhs)/σ = {worst:.1})"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = f64::NEG_INFINITY;
    for case in 0..20 {
        let params = random_independent(&mut rng, 5, 8);
        let m = rng.random_range(1..5);
        let indices = random_subset(&mut rng, m);
        let r = klemes_inequality_check(&params, &indices, m, Budget::auto(100_000, 8000 + case)).unwrap();
        worst = worst.max((r.lhs - r.rhs) / r.combined_error.max(1e-12));
        if !r.holds {
            return outcome(false, format!("case {case}: lhs {} > rhs {}", r.lhs, r.rhs));
        }
    }
    outcome(true, format!("20 shared-sample cases hold at 3σ (max (lhs - rhs)/σ = {worst:.1})"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut symbolic = 0;
    let mut worst: f64 = 0.0;
    for case in 0..10 {
        let params = random_independent(&mut rng, 4, 16);
        let m = rng.random_range(1..4);
        let q = random_subset(&mut rng, m);
        let r = fejer_factorization_check(&params, &q, m, Budget::auto(100_000, 9000 + case)).unwrap();
        let gap = (r.joint.value - r.product).abs();
        worst = worst.max(gap / r.combined_error.max(1e-12));
        if !r.holds {
            return outcome(false, format!("case {case}: gap {gap} > 3 x {}", r.combined_error));
        }
        match r.symbolic_holds {
            Some(true) => symbolic += 1,
            Some(false) => return outcome(false, format!("case {case}: exact factorization fails")),
            None => {}
        }
    }
    outcome(
        symbolic > 0,
        format!("10 cases within 3σ (max gap/σ = {worst:.1}); exact factorization in {symbolic} expandable cases"),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let scales = [1e2, 1e3, 1e4];
    let mut exponents = Vec::new();
    for case in 0..10 {
        let terms: Vec<(f64, Complex64)> = (0..5)
            .map(|_| {
                let w = rng.random_range(0.1..10.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (w, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            })
            .collect();
        let p = RealLinePoly::new(terms.clone());
        let c: f64 = terms.iter().map(|(w, a)| a.norm() / w.abs()).sum();
        let mut env = Vec::new();
        for &t in &scales {
            let mut e: f64 = 0.0;
            for j in 0..16 {
                let tt = t * (1.0 + j as f64 / 16.0);
                let dev = real_line_mean_of(&p, tt, 2).unwrap().norm();
                if dev > c / tt * (1.0 + 1e-9) + 1e-12 {
                    return outcome(false, format!("case {case}: deviation {dev} at T = {tt} above C/T = {}", c / tt));
                }
                e = e.max(dev);
            }
            env.push(e);
        }
        let xs: Vec<f64> = scales.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = env.iter().map(|e| e.ln()).collect();
        let slope = apriesz_core::stats::least_squares_slope(&xs, &ys).unwrap();
        exponents.push(-slope);
    }
    let min = exponents.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        min >= 0.9,
        format!("10 polynomials within C/T; fitted exponents min {min:.3} (>= 0.9)"),
    )
}

fn criterion_11() -> Outcome {
    let r = kac_clt_diagnostics(128, 100_000, 1111).unwrap();
    let m2_ok = (r.mean_abs2.value - 1.0).abs() <= 3.0 * r.mean_abs2.std_error;
    outcome(
        r.ks_distance_re <= 0.01 && m2_ok,
        format!(
            "KS(Re) = {:.4} <= 0.01, KS(Im) = {:.4}, mean|Z|^2 = {:.4}±{:.4}, mean|Z| = {:.4}",
            r.ks_distance_re, r.ks_distance_im, r.mean_abs2.value, r.mean_abs2.std_error, r.mean_abs.value
        ),
    )
}

fn criterion_12() -> Outcome {
    let start = Instant::now();
    let mut locals = Vec::new();
    let mut globals = Vec::new();
    for (i, p) in [64u64, 128, 256].into_iter().enumerate() {
        let eps = format!("16/{p}");
        let lg = local_vs_global_flatness(p / 64, p, &eps, 1.0, 2.0, Budget::monte_carlo(100_000, 1200 + i as u64)).unwrap();
        locals.push(lg.local.value);
        globals.push(lg.global_mean_abs.value);
    }
    let decreasing = locals.windows(2).all(|w| w[1] < w[0]);
    let global_ok = globals.iter().all(|g| (g - GAUSS_FIRST_MOMENT).abs() <= 0.02);
    outcome(
        decreasing && global_ok,
        format!(
            "local distortion on [1,2]: {:.4} > {:.4} > {:.4}; global mean_abs {:.4}, {:.4}, {:.4} within 0.02 of 0.88623, {:.1}s",
            locals[0], locals[1], locals[2], globals[0], globals[1], globals[2],
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_13() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1313);
    for case in 0..50 {
        let params = random_params(&mut rng);
        let mut idx: Vec<usize> = (0..params.num_stages()).collect();
        idx.shuffle(&mut rng);
        let mut chosen: Vec<usize> = idx[..rng.random_range(1..=idx.len())].to_vec();
        chosen.sort();
        let rep = degree_report(&params, &chosen).unwrap();
        if !rep.all_hold || !rep.q_from_support {
            return outcome(false, format!("case {case}: {rep:?}"));
        }
    }
    outcome(true, "50 params: d_m < h_{m+1}, h_m <= h_{m+1}/2, q_k < h_{n_k+1}, q_k from expanded supports")
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("exact probability normalization", criterion_1),
        ("Riesz property", criterion_2),
        ("Kac moment identity", criterion_3),
        ("Gaussian first-moment limit", criterion_4),
        ("Bourgain geometric decay", criterion_5),
        ("sigma-hat monotonicity", criterion_6),
        ("Cauchy-Schwarz subsequence bound", criterion_7),
        ("Klemes-type inequality", criterion_8),
        ("Fejer factorization", criterion_9),
        ("real-line mean convergence", criterion_10),
        ("Kac CLT empirics", criterion_11),
        ("Prikhod'ko local vs global contrast", criterion_12),
        ("degree bounds", criterion_13),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = f();
        let tag = if r.pass { "PASS" } else { "FAIL" };
        if !r.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{tag}] {name}: {} ({:.1}s)",
            i + 1,
            r.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
