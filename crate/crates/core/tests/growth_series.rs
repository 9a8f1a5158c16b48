use etale_growth::growth::{fit_certificate, root_limsup, verify_certificate, GrowthCertificate, GrowthSeries};
use etale_growth::prime_shift::{build_shifted_prime_dp, exact_language_table};
use num_bigint::BigUint;
use num_rational::BigRational;

fn complexity_series(n: usize) -> GrowthSeries {
    let dp = build_shifted_prime_dp(n);
    GrowthSeries::from(&exact_language_table(n, &dp).unwrap())
}

#[test]
fn prime_shift_complexity_fits_subexp_but_outgrows_polynomials() {
    let s = complexity_series(5000);
    assert_eq!(s.start(), 1);
    assert_eq!(s.get(4), Some(&BigUint::from(15u32)));

    let fit = fit_certificate(&s);
    let small_beta = fit
        .strong_subexp
        .iter()
        .filter(|c| matches!(c, GrowthCertificate::StrongSubexp { beta, .. } if *beta <= 0.5 + 1e-12))
        .collect::<Vec<_>>();
    assert!(!small_beta.is_empty());
    for c in small_beta {
        assert!(verify_certificate(&s, c).unwrap().holds);
    }

    // b(n)/(1+n)^d still increases across the far half of the range.
    let ratio = |n: u64, d: u32| {
        BigRational::new(
            s.get(n).unwrap().clone().into(),
            num_bigint::BigInt::from(1 + n).pow(d),
        )
    };
    for d in 0..=20 {
        assert!(ratio(5000, d) > ratio(2500, d), "d = {d}");
    }
    assert!(fit.degree_estimate.unwrap() > 20.0);

    let roots = root_limsup(&s);
    assert!(*roots.last().unwrap() < 1.05);
}

#[test]
fn complexity_series_csv_is_stable() {
    let s = complexity_series(6);
    let mut out = Vec::new();
    s.write_csv(&mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().starts_with("n,b\n1,2\n2,5\n3,9\n4,15\n"));
}
