//! Small worked examples run by `--selftest`.

use num_rational::BigRational;

use dioph::badness::phi_min_profile;
use dioph::counting::{count_a, CountOptions};
use dioph::covers::{cover_cost, dimension_bound, subspace_constant_c, CoverStrategy};
use dioph::fracsum::{dyadic_profile, recip_product_sum, ProfileOptions, SumOptions};
use dioph::matrices::{ApproxFunction, RealMatrix, SubspaceMatrix};
use dioph::selberg::{sandwich_count, selberg_pair};
use dioph::{Error, Precision, Surd};

type Check = (&'static str, fn() -> bool);

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn sqrt2() -> Surd {
    Surd::sqrt(2).expect("2 is not a square")
}

fn sqrt2_col() -> RealMatrix {
    RealMatrix::column(vec![sqrt2()]).expect("valid column")
}

fn sqrt2_line() -> SubspaceMatrix {
    SubspaceMatrix::from_surds(vec![Surd::from_int(0)], vec![vec![sqrt2()]])
        .expect("valid subspace")
}

fn checks(command: &str) -> Vec<Check> {
    match command {
        "fracsum" => vec![
            ("sqrt2 J=1", || {
                recip_product_sum(&sqrt2_col(), 1, &SumOptions::default())
                    .is_ok_and(|b| (b.mid_f64() - 4.8284271).abs() < 1e-6)
            }),
            ("rational row hits an integer", || {
                let m = RealMatrix::column(vec![Surd::from_ratio(&r(1, 2))]).expect("valid column");
                matches!(
                    recip_product_sum(&m, 2, &SumOptions::default()),
                    Err(Error::ZeroDenominator { .. })
                )
            }),
        ],
        "profile" => vec![("sqrt2 J=3 counts six vectors", || {
            dyadic_profile(&sqrt2_col(), 3, &ProfileOptions::default())
                .is_ok_and(|p| p.total_count() == 6)
        })],
        "omega" => vec![
            ("sqrt2 records at 1, 2", || {
                phi_min_profile(&sqrt2_col(), 3, Precision::default())
                    .is_ok_and(|v| v.iter().map(|x| x.norm_j).eq([1, 2]))
            }),
            ("rational is not bad", || {
                let m = RealMatrix::column(vec![Surd::from_ratio(&r(2, 5))]).expect("valid column");
                matches!(
                    phi_min_profile(&m, 5, Precision::default()),
                    Err(Error::NotBad { .. })
                )
            }),
        ],
        "selberg-check" => vec![
            ("delta 0.1 J 9 means", || {
                selberg_pair(0.1f64, 9).is_ok_and(|(p, m)| {
                    (p.coeff(0) - 0.3).abs() < 1e-12 && (m.coeff(0) - 0.1).abs() < 1e-12
                })
            }),
            ("delta 0.6 rejected", || {
                matches!(selberg_pair(0.6f64, 3), Err(Error::DeltaOutOfRange(_)))
            }),
        ],
        "count" => vec![
            ("q=10 delta=0.2", || {
                count_a(&sqrt2_line(), 10, &r(1, 5), &CountOptions::default()).is_ok_and(|n| n == 4)
            }),
            ("q=10 delta=0.1", || {
                count_a(&sqrt2_line(), 10, &r(1, 10), &CountOptions::default())
                    .is_ok_and(|n| n == 1)
            }),
        ],
        "sandwich" => vec![("q=1 delta=0.45 J=100 brackets 1", || {
            sandwich_count(
                &sqrt2_line(),
                dioph::counting::Mode::A,
                1,
                &r(9, 20),
                100,
                &CountOptions::default(),
            )
            .is_ok_and(|b| b.lower <= 1.0 && 1.0 <= b.upper)
        })],
        "cover" => vec![
            ("zero psi costs nothing", || {
                let zero = ApproxFunction::table(vec![], true).expect("valid table");
                cover_cost(
                    &sqrt2_line(),
                    &zero,
                    0.5,
                    1..=10,
                    CoverStrategy::PerQ,
                    &CountOptions::default(),
                )
                .is_ok_and(|c| c.partial_sum == 0.0)
            }),
            ("zero matrix constant", || {
                let s = SubspaceMatrix::from_surds(
                    vec![Surd::from_int(0)],
                    vec![vec![Surd::from_int(0)]],
                )
                .expect("valid subspace");
                subspace_constant_c(&s) == r(10001, 10000)
            }),
        ],
        "dimbound" => vec![
            ("nu = 1/n gives d", || {
                dimension_bound(&r(1, 3), 3, 2).is_ok_and(|b| b == r(2, 1))
            }),
            ("n=2 d=1 nu=1", || {
                dimension_bound(&r(1, 1), 2, 1).is_ok_and(|b| b == r(1, 2))
            }),
            ("n=3 d=2 nu=2", || {
                dimension_bound(&r(2, 1), 3, 2).is_ok_and(|b| b == r(1, 3))
            }),
        ],
        _ => Vec::new(),
    }
}

/// Runs the examples for `command`; returns the report and overall status.
pub fn run(command: &str) -> (String, bool) {
    let mut out = String::new();
    let mut ok = true;
    for (label, check) in checks(command) {
        let pass = check();
        ok &= pass;
        out.push_str(&format!(
            "{command}: {label}: {}\n",
            if pass { "PASS" } else { "FAIL" }
        ));
    }
    (out, ok)
}
