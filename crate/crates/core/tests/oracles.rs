//! Cross-checks between the exact enumerator, quadrature, Monte Carlo, and
//! brute-force reference computations written independently here.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use recind_core::events::HTable;
use recind_core::oracle::rank_outcome_counts;
use recind_core::quadrature::{factorization_check, joint_pmf_quadrature_1d};
use recind_core::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn harmonic(n: u32) -> BigRational {
    (1..=n).map(|j| q(1, j as i64)).fold(BigRational::zero(), |a, b| a + b)
}

/// Permutations of 0..n by recursive insertion.
fn naive_perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in naive_perms(n - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

/// Outcome counts from the textbook definitions, without the detector.
fn brute_force_counts(n: usize, d: usize, chain: bool) -> Vec<u64> {
    let perms = naive_perms(n);
    let mut counts = vec![0u64; 1 << (n - 1)];
    let mut idx = vec![0usize; d];
    loop {
        let x = |j: usize, i: usize| perms[idx[i]][j];
        let beats = |a: usize, b: usize| (0..d).all(|i| x(b, i) > x(a, i));
        let mut last = 0;
        let mut outcome = 0;
        for j in 1..n {
            let rec = if chain { beats(last, j) } else { (0..j).all(|a| beats(a, j)) };
            if rec {
                last = j;
                outcome |= 1 << (j - 1);
            }
        }
        counts[outcome] += 1;
        // odometer over d permutation indices
        let mut i = 0;
        loop {
            if i == d {
                return counts;
            }
            idx[i] += 1;
            if idx[i] < perms.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn enumerator_matches_brute_force() {
    for (n, d) in [(1, 1), (2, 2), (4, 1), (5, 1), (3, 2), (4, 2), (3, 3)] {
        for (mode, chain) in [(SemanticsMode::Chain, true), (SemanticsMode::Dominance, false)] {
            let (counts, total) = rank_outcome_counts(n, d, mode, DEFAULT_STATE_CAP).unwrap();
            assert_eq!(counts, brute_force_counts(n, d, chain), "n={n} d={d} {mode}");
            assert_eq!(total, counts.iter().sum::<u64>());
        }
    }
}

#[test]
fn mean_record_count_is_the_harmonic_number() {
    // n = 10 is past the default enumeration cap
    let pmf = joint_pmf_iid(9, 1, SemanticsMode::Chain).unwrap();
    let mean = pmf.marginals().into_iter().fold(BigRational::one(), |a, b| a + b);
    assert_eq!(mean, harmonic(9));
    // H_10 from the closed-form marginals
    let h10 = (1..=10)
        .map(|j| marginal_record_prob(10, j, 1, SemanticsMode::Chain, DEFAULT_STATE_CAP).unwrap())
        .fold(BigRational::zero(), |a, b| a + b);
    assert_eq!(h10, harmonic(10));
    assert!((h10.to_f64().unwrap() - 2.928968).abs() < 1e-6);
}


#[test]
fn line_indicators_are_exactly_independent_up_to_nine() {
    for n in 1..=9 {
        let pmf = joint_pmf_iid(n, 1, SemanticsMode::Chain).unwrap();
        assert!(pmf.total().is_one());
        assert_eq!(product_of_marginals(&pmf), pmf, "n = {n}");
        for (j, p) in (2..).zip(pmf.marginals()) {
            assert_eq!(p, q(1, j));
        }
    }
}

/// d-fold AND-combination of independent copies of the 1-D law.
fn and_combination(line: &JointPmf<BigRational>, d: usize) -> Vec<BigRational> {
    let mut acc = line.probs().to_vec();
    for _ in 1..d {
        let mut next = vec![BigRational::zero(); acc.len()];
        for (a, pa) in acc.iter().enumerate() {
            for (b, pb) in line.probs().iter().enumerate() {
                next[a & b] += pa * pb;
            }
        }
        acc = next;
    }
    acc
}

#[test]
fn dominance_law_is_the_and_of_coordinate_laws() {
    for (n, d) in [(3, 2), (4, 2), (5, 2), (3, 3), (4, 3)] {
        let line = joint_pmf_iid(n, 1, SemanticsMode::Dominance).unwrap();
        let pmf = joint_pmf_iid(n, d, SemanticsMode::Dominance).unwrap();
        assert_eq!(pmf.probs(), and_combination(&line, d).as_slice(), "n={n} d={d}");
        assert_eq!(product_of_marginals(&pmf), pmf);
    }
}

/// The `2^(n-1)` tables with `h_j(b) ∈ {b, 1}`.
fn indicator_tables(n: usize) -> Vec<HTable<BigRational>> {
    (0..1u32 << (n - 1))
        .map(|mask| {
            HTable::new(
                (0..n - 1)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            (q(0, 1), q(1, 1))
                        } else {
                            (q(1, 1), q(1, 1))
                        }
                    })
                    .collect(),
            )
        })
        .collect()
}

fn satisfies_product_identity(pmf: &JointPmf<BigRational>) -> bool {
    indicator_tables(pmf.n()).iter().all(|h| {
        expectation_direct(h, pmf).unwrap() == product_of_marginal_expectations(h, pmf).unwrap()
    })
}

#[test]
fn product_identity_characterizes_independence() {
    for n in 2..=6 {
        let pmf = joint_pmf_iid(n, 1, SemanticsMode::Chain).unwrap();
        assert!(satisfies_product_identity(&pmf));
    }
    // pairwise independent but not mutually: ζ_4 = ζ_2 xor ζ_3
    let quarter = q(1, 4);
    let zero = q(0, 1);
    let xor = JointPmf::new(
        4,
        vec![quarter.clone(), zero.clone(), zero.clone(), quarter.clone(), zero.clone(), quarter.clone(), quarter, zero],
        PmfSource::Supplied,
    )
    .unwrap();
    assert!(pairwise_covariances(&xor).iter().all(|c| c.cov.is_zero()));
    assert!(!satisfies_product_identity(&xor));
    assert!(!tv_distance(&xor, &product_of_marginals(&xor)).unwrap().is_zero());
}

#[test]
fn quadrature_matches_enumeration_for_identical_laws() {
    let exact = joint_pmf_iid(5, 1, SemanticsMode::Chain).unwrap().to_f64();
    for law in [
        Marginal::uniform(0.0, 1.0).unwrap(),
        Marginal::gaussian(-1.0, 3.0).unwrap(),
        Marginal::exponential(0.5).unwrap(),
    ] {
        let spec = DistributionSpec::iid(5, 1, law).unwrap();
        let quad = joint_pmf_quadrature_1d(&spec, 512).unwrap();
        assert!(quad.error_estimate <= 1e-6);
        for (a, b) in quad.pmf.probs().iter().zip(exact.probs()) {
            assert!((a - b).abs() <= 1e-6, "{law}: {a} vs {b}");
        }
    }
}

#[test]
fn factorization_holds_for_gaussian_data() {
    let spec = DistributionSpec::from_fn(4, 1, |j, _| Marginal::gaussian(0.3 * j as f64, 1.0)).unwrap();
    for r in enumerate_patterns(4).unwrap() {
        let c = factorization_check(&spec, &r, 1024).unwrap();
        assert!(c.discrepancy() <= 1e-5, "{:?}: {c:?}", r.indices());
    }
}

#[test]
fn monte_carlo_agrees_with_the_oracle() {
    let spec = DistributionSpec::iid(3, 1, Marginal::uniform(0.0, 1.0).unwrap()).unwrap();
    let cfg = ExperimentConfig::new(spec, vec![SemanticsMode::Chain], 1_000_000, 42);
    let res = run_experiment(&cfg).unwrap();
    let emp = res.modes[0].outcomes.as_ref().unwrap();
    let p11 = emp.pmf().probs()[0b11];
    let se = emp.std_errors()[0b11];
    assert!((p11 - 1.0 / 6.0).abs() <= 3.0 * se, "{p11} ± {se}");

    let exact = joint_pmf_iid(3, 1, SemanticsMode::Chain).unwrap().to_f64();
    let rep = empirical_tv_report(emp, &exact).unwrap();
    assert!(rep.tv <= 0.005, "{rep:?}");
    let own_product = product_of_marginals(&emp.pmf());
    assert!(empirical_tv_report(emp, &own_product).unwrap().tv <= 0.005);
}

#[test]
fn mean_record_count_by_simulation() {
    let spec = DistributionSpec::iid(10, 1, Marginal::gaussian(0.0, 1.0).unwrap()).unwrap();
    let cfg = ExperimentConfig::new(spec, vec![SemanticsMode::Chain], 100_000, 7);
    let l = run_experiment(&cfg).unwrap().modes[0].l_summary;
    let h10 = harmonic(10).to_f64().unwrap();
    assert!((l.mean() - h10).abs() <= 3.0 * l.std_error(), "{} vs {h10}", l.mean());
}

#[test]
fn growing_uniform_supports_by_simulation() {
    let spec = DistributionSpec::from_fn(2, 1, |j, _| Marginal::uniform(0.0, j as f64)).unwrap();
    let cfg = ExperimentConfig::new(spec, vec![SemanticsMode::Chain], 200_000, 1);
    let m = &run_experiment(&cfg).unwrap().modes[0];
    let p = m.marginals()[1];
    let se = (0.75f64 * 0.25 / 200_000.0).sqrt();
    assert!((p - 0.75).abs() <= 3.0 * se);
}
