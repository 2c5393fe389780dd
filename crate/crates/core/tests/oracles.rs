//! End-to-end checks against independently computed values.

use num_rational::BigRational;

use dioph::badness::{estimate_omega, phi_min_profile, surd_bad_constant, surd_bad_violations};
use dioph::counting::{count_a, count_n, CountOptions};
use dioph::fracsum::{
    dyadic_profile, growth_fit, packing_bound_certified, recip_product_sum, sign_flip_majorant,
    ProfileOptions, SumOptions,
};
use dioph::matrices::{product_dist, RealMatrix, SubspaceMatrix};
use dioph::{cmp_margin, CertifiedReal, Precision, Surd};

fn sqrt(d: u64) -> Surd {
    Surd::sqrt(d).unwrap()
}

fn col(values: Vec<Surd>) -> RealMatrix {
    RealMatrix::column(values).unwrap()
}

fn test_matrices() -> Vec<(&'static str, RealMatrix)> {
    vec![
        ("sqrt2", col(vec![sqrt(2)])),
        ("sqrt3", col(vec![sqrt(3)])),
        ("sqrt2;sqrt3", col(vec![sqrt(2), sqrt(3)])),
    ]
}

#[test]
fn reciprocal_sums_match_reference_values() {
    // Reference values from 50-digit evaluation of the same sums.
    let m = col(vec![sqrt(2)]);
    for (j, want) in [(1_000u64, 32591.3595), (10_000, 384959.9219)] {
        let s = recip_product_sum(&m, j, &SumOptions::default()).unwrap();
        assert!(
            (s.mid_f64() - want).abs() < 1e-4,
            "J={j}: {}",
            s.to_decimal(6)
        );
        assert!(s.radius_f64() <= 1e-9);
    }
}

#[test]
fn reciprocal_sum_matches_double_precision() {
    let m = col(vec![sqrt(3), sqrt(5)]);
    let j = 300i64;
    let naive: f64 = (1..=j)
        .map(|k| {
            let d = |x: f64| (x - x.round()).abs();
            2.0 / (d(k as f64 * 3f64.sqrt()) * d(k as f64 * 5f64.sqrt()))
        })
        .sum();
    let s = recip_product_sum(&m, j as u64, &SumOptions::default()).unwrap();
    assert!((s.mid_f64() - naive).abs() / naive < 1e-9);
}

#[test]
fn packing_bound_with_empirical_phi() {
    for (name, m) in test_matrices() {
        for j in [10u64, 100, 1_000] {
            let p = dyadic_profile(&m, j, &ProfileOptions::default()).unwrap();
            assert!(p.packing_violations().unwrap().is_empty(), "{name} J={j}");
            assert!(p.box_index_violations().unwrap().is_empty(), "{name} J={j}");
            assert_eq!(p.total_count(), 2 * j);
            let sum = recip_product_sum(&m, j, &SumOptions::default()).unwrap();
            let bound =
                packing_bound_certified(&p.phi_min_j, &p.phi_min_2j, m.rows() as u32, 256).unwrap();
            assert!(
                cmp_margin(&CertifiedReal::BigFloat(sum), &bound)
                    .unwrap()
                    .is_le(),
                "{name} J={j}"
            );
        }
    }
}

#[test]
fn sign_flip_majorant_dominates() {
    for (name, m) in test_matrices() {
        for j in [5u64, 50, 100] {
            let sum = recip_product_sum(&m, j, &SumOptions::default()).unwrap();
            let major = sign_flip_majorant(&m, j, &SumOptions::default()).unwrap();
            assert!(sum.upper_f64() <= major.lower_f64(), "{name} J={j}");
        }
    }
}

#[test]
fn generic_row_grows_quadratically() {
    // A 1 × 2 row over a two-dimensional j-cube.
    let m = RealMatrix::from_surds(vec![vec![sqrt(2), sqrt(3)]]).unwrap();
    let report = growth_fit(&m, &[20, 40, 80, 160], &SumOptions::default()).unwrap();
    assert!(
        (report.fit.slope - 2.0).abs() <= 0.3,
        "{}",
        report.fit.slope
    );
}

#[test]
fn omega_at_large_j() {
    let e = estimate_omega(&col(vec![sqrt(2)]), 100_000, Precision::default()).unwrap();
    assert!((0.85..=1.15).contains(&e.omega_hat), "{}", e.omega_hat);
    let golden = Surd::new(1.into(), 1.into(), 5.into(), 2.into()).unwrap();
    let e = estimate_omega(&col(vec![golden]), 100_000, Precision::default()).unwrap();
    assert!((e.omega_hat - 1.0).abs() <= 0.1, "{}", e.omega_hat);
}

#[test]
fn records_match_product_dist_and_decrease() {
    let m = col(vec![sqrt(2), sqrt(3)]);
    let records = phi_min_profile(&m, 500, Precision::default()).unwrap();
    for w in records.windows(2) {
        assert!(w[1].value.to_f64() < w[0].value.to_f64());
        assert!(w[1].norm_j > w[0].norm_j);
    }
    for rec in &records {
        let again = product_dist(&m, &rec.j).unwrap();
        assert!((again.to_f64() - rec.value.to_f64()).abs() < 1e-15);
    }
}

#[test]
fn surd_constants_hold_to_ten_thousand() {
    for d in [2u64, 3, 5] {
        let c = surd_bad_constant(d).unwrap();
        assert!(
            surd_bad_violations(d, &c, 10_000).unwrap().is_empty(),
            "d={d}"
        );
    }
}

/// `#{a ≤ q : ‖qα + aβ‖ < δ}` in doubles, skipping nothing; the test data
/// keep every distance at least 1e-6 away from δ.
fn naive_count(alpha: f64, beta: f64, q: u64, delta: f64) -> (u64, bool) {
    let mut n = 0;
    let mut clear = true;
    for a in 1..=q {
        let y = q as f64 * alpha + a as f64 * beta;
        let dist = (y - y.round()).abs();
        clear &= (dist - delta).abs() > 1e-6;
        n += u64::from(dist < delta);
    }
    (n, clear)
}

#[test]
fn counts_match_naive_enumeration() {
    let cases = [
        (Surd::from_int(0), sqrt(2)),
        (sqrt(3), sqrt(2)),
        (sqrt(5), sqrt(7)),
    ];
    let opts = CountOptions::default();
    for (alpha, beta) in cases {
        let s = SubspaceMatrix::from_surds(vec![alpha.clone()], vec![vec![beta.clone()]]).unwrap();
        for q in (1..=500).step_by(7) {
            for k in [3i64, 10, 25, 40] {
                let delta = BigRational::new(k.into(), 100.into());
                let (want, clear) = naive_count(alpha.to_f64(), beta.to_f64(), q, k as f64 / 100.0);
                if clear {
                    assert_eq!(
                        count_a(&s, q, &delta, &opts).unwrap(),
                        want,
                        "q={q} delta={delta}"
                    );
                }
            }
        }
    }
}

#[test]
fn n_counts_sum_over_q() {
    // Every ã in {1..Q}² appears once, so 𝒩 sums a rectangular 𝒜-type count.
    let s = SubspaceMatrix::from_surds(vec![sqrt(3)], vec![vec![sqrt(2)]]).unwrap();
    let delta = BigRational::new(1.into(), 10.into());
    let big_q = 40u64;
    let mut direct = 0;
    for q in 1..=big_q {
        for a in 1..=big_q {
            let y = q as f64 * 3f64.sqrt() + a as f64 * 2f64.sqrt();
            direct += u64::from((y - y.round()).abs() < 0.1);
        }
    }
    assert_eq!(
        count_n(&s, big_q, &delta, &CountOptions::default()).unwrap(),
        direct
    );
}
