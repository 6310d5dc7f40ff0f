use std::f64::consts::PI;

use num_bigint::BigInt;
use proptest::prelude::*;

use apriesz_core::bohrint::{mean_abs, Budget};
use apriesz_core::criteria::{guenais_sum, kac_clt_diagnostics, GUENAIS_LIMIT_SQ};
use apriesz_core::flatness::{build_family, flatness_ratio, ultraflat_deviation, FamilyPoly, PolyFamilySpec};
use apriesz_core::riesz::{riesz_property_check, riesz_state, RankOneParams};
use apriesz_core::{Rational, SymbolBasis};

fn one() -> Rational {
    Rational::from_integer(BigInt::from(1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riesz_property_for_independent_stages(
        ps in prop::collection::vec(2usize..5, 1..4),
        mask in 0u32..16,
    ) {
        let params = RankOneParams::independent(&ps).unwrap();
        let idx: Vec<usize> = (0..ps.len()).filter(|i| mask >> i & 1 == 1).collect();
        prop_assert_eq!(riesz_property_check(&params, &idx).unwrap(), one());
    }

    #[test]
    fn partial_products_have_unit_mass_and_grow(ps in prop::collection::vec(2usize..4, 1..4)) {
        let params = RankOneParams::independent(&ps).unwrap();
        let mut prev = riesz_state(&params, 0).unwrap();
        for k in 0..ps.len() {
            let next = prev.extend(&params, k).unwrap();
            prop_assert_eq!(next.q().mean().re, one());
            prop_assert!(prev.monotonicity_violations(&next).is_empty());
            prev = next;
        }
    }

    #[test]
    fn flatness_ratio_at_most_one(signs in prop::collection::vec(prop::bool::ANY, 1..6)) {
        let basis = SymbolBasis::with_unit([("alpha", 2f64.sqrt())]).unwrap();
        let spec = PolyFamilySpec::Littlewood {
            signs: signs.iter().map(|&s| if s { 1 } else { -1 }).collect(),
            frequencies: None,
            symbol: "alpha".into(),
        };
        let fam = build_family(&spec, &basis, None).unwrap();
        let r = flatness_ratio(&fam, Budget::tensor()).unwrap();
        prop_assert!(r.value <= 1.0 + 3.0 * r.uncertainty() + 1e-12);
    }

    #[test]
    fn newman_ratio_is_mean_abs_over_root_k(rest in prop::collection::vec(0u8..2, 0..5)) {
        let basis = SymbolBasis::with_unit([("alpha", 3f64.sqrt())]).unwrap();
        let mut indicators = vec![1u8];
        indicators.extend(rest);
        let k = indicators.iter().filter(|&&x| x == 1).count();
        let spec = PolyFamilySpec::Newman { indicators, frequencies: None, symbol: "alpha".into() };
        let fam = build_family(&spec, &basis, None).unwrap();
        let FamilyPoly::Exact(p) = &fam else { unreachable!() };
        let r = flatness_ratio(&fam, Budget::tensor()).unwrap();
        let m = mean_abs(p, Budget::tensor()).unwrap();
        prop_assert!((r.value - m.value / (k as f64).sqrt()).abs() < 1e-12);
        if k == 1 {
            prop_assert_eq!(r.value, 1.0);
            prop_assert_eq!(ultraflat_deviation(&fam).unwrap(), 0.0);
        } else {
            prop_assert!(ultraflat_deviation(&fam).unwrap() > 0.0);
        }
    }
}

#[test]
fn ks_distance_decreases_with_q() {
    let d: Vec<f64> = [8, 32, 128]
        .iter()
        .map(|&q| kac_clt_diagnostics(q, 4_000_000, 77).unwrap().ks_distance_re)
        .collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn guenais_increment_near_gaussian_limit() {
    let params = RankOneParams::independent(&[256]).unwrap();
    let rep = guenais_sum(&params, 1, Budget::monte_carlo(200_000, 3)).unwrap();
    let limit = GUENAIS_LIMIT_SQ.sqrt();
    assert!((limit - (1.0 - PI / 4.0).sqrt()).abs() < 1e-15);
    assert!((rep.increments[0] - limit).abs() < 0.02, "{}", rep.increments[0]);
}
