mod common;

use common::{equation, field};
use linform_core::forge::{
    default_c, forge_freevar_odd, forge_inhom, forge_nonsidorenko_odd, forge_uncommon_even,
    nonsidorenko_odd_value, sample_commonness, verify_certificate, WITNESS_TOLERANCE,
};
use linform_core::linear::canceling_pair_partition;
use linform_core::{Certificate, Error, RhsMode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn assert_well_formed(cert: &Certificate) {
    assert!(cert.witness.is_real(WITNESS_TOLERANCE));
    for v in cert.witness.real_parts() {
        assert!(
            (-WITNESS_TOLERANCE..=1.0 + WITNESS_TOLERANCE).contains(&v),
            "{v}"
        );
    }
    assert!(cert.margin > 0.0);
    let check = verify_certificate(cert);
    assert!(check.ok, "{:?}", check.diagnostics);
}

fn coefficient_vector(q: u64, k: usize, seed: u64) -> Vec<u32> {
    (0..k)
        .map(|i| 1 + ((seed >> (7 * i)) % (q - 1)) as u32)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn uncommon_even_certificates_verify(q in prop::sample::select(vec![3u64, 4, 5, 7, 8, 9]), seed in any::<u64>(), k in prop::sample::select(vec![2usize, 4])) {
        let a = coefficient_vector(q, k, seed);
        let eq = equation(q, &a, 0, RhsMode::Zero);
        match forge_uncommon_even(&eq, seed, 10_000) {
            Ok(cert) => {
                assert_well_formed(&cert);
                prop_assert!(cert.margin >= 1e-6);
                let back = Certificate::from_json(&cert.to_json()).unwrap();
                prop_assert_eq!(back, cert);
            }
            Err(Error::NotApplicable(_)) => prop_assert!(canceling_pair_partition(&field(q), &a).is_some()),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn odd_forges_verify(q in prop::sample::select(vec![3u64, 4, 5, 7, 8, 9, 11]), seed in any::<u64>(), k in prop::sample::select(vec![1usize, 3, 5])) {
        let a = coefficient_vector(q, k, seed);
        let cert = forge_nonsidorenko_odd(&equation(q, &a, 0, RhsMode::Zero)).unwrap();
        assert_well_formed(&cert);
        prop_assert!((cert.value - nonsidorenko_odd_value(q as u32, k)).abs() <= 1e-12);
    }

    #[test]
    fn small_c_forges_verify(q in prop::sample::select(vec![3u64, 4, 5, 7]), seed in any::<u64>(), k in 1usize..5, free in 0usize..3) {
        let a = coefficient_vector(q, k, seed);
        let eq = equation(q, &a, free, RhsMode::Zero);
        if k % 2 == 1 && free > 0 {
            assert_well_formed(&forge_freevar_odd(&eq, default_c(&eq)).unwrap());
        } else {
            let is_not_applicable = matches!(forge_freevar_odd(&eq, default_c(&eq)), Err(Error::NotApplicable(_)));
            prop_assert!(is_not_applicable);
        }
        let eq = equation(q, &a, free, RhsMode::NonzeroB);
        if k % 2 == 0 || free > 0 {
            assert_well_formed(&forge_inhom(&eq, default_c(&eq)).unwrap());
        } else {
            let is_not_applicable = matches!(forge_inhom(&eq, default_c(&eq)), Err(Error::NotApplicable(_)));
            prop_assert!(is_not_applicable);
        }
    }
}

#[test]
fn sample_mean_matches_the_expectation() {
    for (q, a) in [
        (5u64, vec![1u32, 1, 1, 1]),
        (7, vec![1, 2, 3, 3]),
        (4, vec![1, 2, 2, 3]),
    ] {
        let eq = equation(q, &a, 0, RhsMode::Zero);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let samples: Vec<f64> = (0..10_000)
            .map(|_| sample_commonness(&eq, &mut rng).unwrap())
            .collect();
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let stderr = (var / n).sqrt();
        assert!(
            (mean - 0.125).abs() <= 3.0 * stderr,
            "q={q} mean={mean} se={stderr}"
        );
    }
}

#[test]
fn forges_reject_out_of_scope_equations() {
    let eq = equation(2, &[1, 1, 1, 1], 0, RhsMode::Zero);
    assert!(matches!(
        forge_uncommon_even(&eq, 0, 10),
        Err(Error::NotApplicable(_))
    ));
    let eq = equation(5, &[1, 1, 1], 0, RhsMode::Zero);
    assert!(matches!(
        forge_uncommon_even(&eq, 0, 10),
        Err(Error::NotApplicable(_))
    ));
    let eq = equation(5, &[1, 1], 0, RhsMode::Zero);
    assert!(matches!(
        forge_nonsidorenko_odd(&eq),
        Err(Error::NotApplicable(_))
    ));
    let eq = equation(5, &[1, 1, 1], 0, RhsMode::NonzeroB);
    assert!(matches!(
        forge_inhom(&eq, 0.01),
        Err(Error::NotApplicable(_))
    ));
}
