use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use dioph::counting::{count, CountOptions, Mode, Strategy};
use dioph::covers::dimension_bound;
use dioph::matrices::{
    parse_subspace, product_dist, psi_eval, serialize_subspace, ApproxFunction, RealMatrix,
    SubspaceMatrix,
};
use dioph::selberg::{eval_poly, exp_sum_check, selberg_pair};
use dioph::{Ball, Surd};

const RADICANDS: [u64; 8] = [2, 3, 5, 6, 7, 10, 11, 13];

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

prop_compose! {
    fn surd()(p in -20i64..=20, q in -6i64..=6, k in 0usize..RADICANDS.len(), r in 1i64..=9) -> Surd {
        Surd::new(p.into(), q.into(), RADICANDS[k].into(), r.into()).unwrap()
    }
}

prop_compose! {
    fn irrational()(p in -20i64..=20, q in prop_oneof![-6i64..=-1, 1i64..=6], k in 0usize..RADICANDS.len(), r in 1i64..=9) -> Surd {
        Surd::new(p.into(), q.into(), RADICANDS[k].into(), r.into()).unwrap()
    }
}

prop_compose! {
    fn small_ratio()(n in -1000i64..=1000, d in 1i64..=1000) -> BigRational {
        ratio(n, d)
    }
}

/// Whether the ball contains `x`.
fn encloses(b: &Ball, x: &BigRational) -> bool {
    let scaled = x * BigRational::from_integer(BigInt::one() << b.prec());
    BigRational::from_integer(b.lo()) <= scaled && scaled <= BigRational::from_integer(b.hi())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn surd_floor_brackets_value(x in surd()) {
        let f = x.floor();
        let v = x.to_f64();
        prop_assert!(f.to_f64().unwrap() <= v + 1e-9);
        prop_assert!(v < f.to_f64().unwrap() + 1.0 + 1e-9);
        let frac = x.frac().to_f64();
        prop_assert!((0.0..1.0).contains(&frac));
        let dist = x.dist_nearest().to_f64();
        prop_assert!((0.0..=0.5).contains(&dist));
    }

    #[test]
    fn surd_arithmetic_matches_floats(a in surd(), b in surd()) {
        if let Some(s) = a.checked_add(&b) {
            prop_assert!((s.to_f64() - (a.to_f64() + b.to_f64())).abs() < 1e-9);
        }
        if let Some(m) = a.checked_mul(&b) {
            prop_assert!((m.to_f64() - a.to_f64() * b.to_f64()).abs() < 1e-8);
        }
        let ord = a.cmp_value(&b);
        let diff = a.to_f64() - b.to_f64();
        if diff.abs() > 1e-9 {
            prop_assert_eq!(ord, diff.partial_cmp(&0.0).unwrap());
        }
    }

    #[test]
    fn balls_enclose_exact_results(x in small_ratio(), y in small_ratio(), prec in 64u32..256) {
        let bx = Ball::from_ratio(&x, prec);
        let by = Ball::from_ratio(&y, prec);
        prop_assert!(encloses(&bx, &x));
        prop_assert!(encloses(&bx.add(&by), &(&x + &y)));
        prop_assert!(encloses(&bx.sub(&by), &(&x - &y)));
        prop_assert!(encloses(&bx.mul(&by), &(&x * &y)));
        if !y.is_zero() {
            if let Ok(inv) = by.recip() {
                prop_assert!(encloses(&inv, &y.recip()));
            }
        }
    }

    #[test]
    fn product_dist_is_even(a in irrational(), b in irrational(), j in 1i64..500) {
        let m = RealMatrix::column(vec![a, b]).unwrap();
        let plus = product_dist(&m, &[j]).unwrap();
        let minus = product_dist(&m, &[-j]).unwrap();
        prop_assert!((plus.to_f64() - minus.to_f64()).abs() <= 1e-15 * plus.to_f64().max(1e-300));
    }

    #[test]
    fn subspace_rows_and_columns_agree(alpha in irrational(), a1 in irrational(), a2 in irrational()) {
        let s = SubspaceMatrix::from_surds(vec![alpha.clone(), a1.clone()], vec![vec![a2.clone(), alpha.clone()]]).unwrap();
        let at = s.atilde();
        prop_assert_eq!(at.rows(), s.d() + 1);
        for v in 0..s.codim() {
            let col = at.col_values(v);
            prop_assert_eq!(&col[0], s.alpha0()[v].value());
            prop_assert_eq!(&col[1], s.a().get(0, v).value());
        }
    }

    #[test]
    fn config_round_trip(alpha in surd(), a in irrational()) {
        let s = SubspaceMatrix::from_surds(vec![alpha], vec![vec![a]]).unwrap();
        let text = serialize_subspace(&s);
        let back = parse_subspace(&text).unwrap();
        prop_assert_eq!(serialize_subspace(&back), text);
    }

    #[test]
    fn truncation_dominates_power(eta_n in 1i64..=8, eta_d in 1i64..=4, q in 1u64..5000) {
        let eta = ratio(eta_n, eta_d);
        let hat = ApproxFunction::truncated(ApproxFunction::power_nu(ratio(3, 1)).unwrap(), eta.clone()).unwrap();
        let v = psi_eval(&hat, q, 128).unwrap();
        let floor = (q as f64).powf(-eta.to_f64().unwrap());
        prop_assert!(v.upper_f64() >= floor * (1.0 - 1e-12));
    }

    #[test]
    fn screened_and_exact_counts_agree(alpha in surd(), a in irrational(), q in 1u64..400, k in 1i64..=50) {
        let s = SubspaceMatrix::from_surds(vec![alpha], vec![vec![a]]).unwrap();
        let delta = ratio(k, 100);
        let screened = count(&s, Mode::A, q, &delta, &CountOptions::default()).unwrap();
        let exact = count(&s, Mode::A, q, &delta, &CountOptions { strategy: Strategy::Exact, ..CountOptions::default() }).unwrap();
        prop_assert_eq!(screened, exact);
    }

    #[test]
    fn counts_grow_with_delta(a in irrational(), q in 1u64..300, k in 1i64..49) {
        let s = SubspaceMatrix::from_surds(vec![Surd::from_int(0)], vec![vec![a]]).unwrap();
        let opts = CountOptions::default();
        let small = count(&s, Mode::A, q, &ratio(k, 100), &opts).unwrap();
        let large = count(&s, Mode::A, q, &ratio(k + 1, 100), &opts).unwrap();
        prop_assert!(small <= large && large <= q);
    }

    #[test]
    fn selberg_pair_sandwiches(delta in 0.001f64..=0.5, j in 1usize..60, y in 0.0f64..1.0) {
        let (plus, minus) = selberg_pair(delta, j).unwrap();
        let dist = y.min(1.0 - y);
        let chi = if dist < delta { 1.0 } else { 0.0 };
        prop_assert!(eval_poly(&plus, y) >= chi - 1e-9);
        prop_assert!(eval_poly(&minus, y) <= chi + 1e-9);
    }

    #[test]
    fn exponential_sum_bound(x in 0.0f64..1.0, q in 1u64..2000) {
        prop_assert!(exp_sum_check(x, q).holds);
    }

    #[test]
    fn dimension_bound_range(n in 2usize..8, d_off in 1usize..7, nu_n in 1i64..50, nu_d in 1i64..10) {
        let d = (d_off % (n - 1)) + 1;
        let nu = ratio(nu_n, nu_d);
        if let Ok(b) = dimension_bound(&nu, n, d) {
            prop_assert!(b <= BigRational::from_integer(d.into()));
            prop_assert!(b > BigRational::from_integer(d.into()) - BigRational::from_integer(n.into()));
        }
    }
}
