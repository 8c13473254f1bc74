//! Grid and property checks for the bound evaluators.

use cf_lab_core::bounds::{
    azuma_bound, hamming_distance, kl_divergence, mcdiarmid_bound, ofdm_bounds,
    refined_azuma_bound, weighted_distance, MartingaleParams, WeightVector,
};
use proptest::prelude::*;

#[test]
fn kl_grid_nonnegative_zero_iff_equal() {
    for i in 0..=100 {
        for j in 0..=100 {
            let p = i as f64 * 0.01;
            let q = j as f64 * 0.01;
            let d = kl_divergence(p, q).unwrap();
            assert!(d >= 0.0, "D({p}||{q}) = {d} < 0");
            if i == j {
                assert_eq!(d, 0.0, "D({p}||{p}) must vanish");
            } else {
                assert!(d > 0.0, "D({p}||{q}) must be positive");
            }
        }
    }
}

#[test]
fn kl_grid_pinsker() {
    for i in 0..=100 {
        for j in 0..=100 {
            let p = i as f64 * 0.01;
            let q = j as f64 * 0.01;
            let d = kl_divergence(p, q).unwrap();
            let pinsker = 2.0 * (p - q) * (p - q);
            assert!(
                d >= pinsker - 1e-15,
                "Pinsker fails at ({p}, {q}): {d} < {pinsker}"
            );
        }
    }
}

#[test]
fn refined_below_azuma_at_gamma_one() {
    // d = 1, σ² = 1 (γ = 1): the refined exponent n·D((δ+1)/2 ‖ 1/2)
    // dominates Azuma's n·δ²/2 for the matched deviation r = αn.
    let n = 10;
    let params = MartingaleParams::new(1.0, 1.0, n).unwrap();
    let d_list = vec![1.0; n];
    for k in 1..=19 {
        let delta = k as f64 * 0.05;
        let refined = refined_azuma_bound(delta, &params).unwrap();
        let azuma = azuma_bound(delta * n as f64, &d_list).unwrap();
        assert!(
            refined.raw <= azuma.raw + 1e-15,
            "delta = {delta}: refined {} > azuma {}",
            refined.raw,
            azuma.raw
        );
    }
}

#[test]
fn refined_monotone_in_delta_and_gamma() {
    // nonincreasing in α (hence δ) for fixed γ; nondecreasing in γ for
    // fixed δ in (0, 1].
    let n = 12;
    for gamma_step in 1..=8 {
        let gamma = gamma_step as f64 * 0.25;
        let params = MartingaleParams::new(1.0, gamma, n).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..=20 {
            let alpha = k as f64 * 0.05;
            let raw = refined_azuma_bound(alpha, &params).unwrap().raw;
            assert!(raw <= last + 1e-15, "not nonincreasing in delta at γ={gamma}");
            last = raw;
        }
    }
    for k in 1..=20 {
        let delta = k as f64 * 0.05;
        let mut last = 0.0_f64;
        for gamma_step in 1..=12 {
            let gamma = gamma_step as f64 * 0.2;
            let params = MartingaleParams::new(1.0, gamma, n).unwrap();
            let raw = refined_azuma_bound(delta, &params).unwrap().raw;
            assert!(raw >= last - 1e-15, "not nondecreasing in gamma at δ={delta}");
            last = raw;
        }
    }
}

#[test]
fn ofdm_ordering_and_exponent_ratios() {
    for k in 0..=100 {
        let alpha = k as f64 * 0.1;
        let b = ofdm_bounds(alpha).unwrap();
        assert!(b.mcdiarmid.raw <= b.refined.raw + 1e-15);
        assert!(b.refined.raw <= b.azuma.raw + 1e-15);
        if alpha > 0.0 {
            // exponent improvements: factor 4 (McDiarmid vs Azuma) and
            // factor 2 (McDiarmid vs refined), exact in IEEE arithmetic
            // because the exponents only divide α² by powers of two.
            let a2 = alpha * alpha;
            assert_eq!((a2 / 2.0) / (a2 / 8.0), 4.0);
            assert_eq!((a2 / 2.0) / (a2 / 4.0), 2.0);
            // and the computed bounds recover those exponents
            let e_azuma = -(b.azuma.raw / 2.0).ln();
            let e_mcd = -(b.mcdiarmid.raw / 2.0).ln();
            if e_azuma > 1e-6 {
                assert!((e_mcd / e_azuma - 4.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn raw_bounds_at_zero_hit_leading_constants() {
    let b = ofdm_bounds(0.0).unwrap();
    assert_eq!(b.azuma.raw, 2.0);
    assert_eq!(b.refined.raw, 2.0);
    assert_eq!(b.mcdiarmid.raw, 2.0);
    assert_eq!(b.talagrand.raw, 4.0);
    assert_eq!(azuma_bound(0.0, &[0.3, 0.7]).unwrap().raw, 2.0);
    assert_eq!(mcdiarmid_bound(0.0, &[0.3]).unwrap().raw, 2.0);
}

proptest! {
    #[test]
    fn kl_nonnegative_random(p in 0.0..=1.0f64, q in 0.0..=1.0f64) {
        let d = kl_divergence(p, q).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!(d >= 2.0 * (p - q) * (p - q) - 1e-12);
    }

    #[test]
    fn uniform_weighted_distance_is_scaled_hamming(
        x in prop::collection::vec(0u8..4, 1..40),
        flips in prop::collection::vec(any::<bool>(), 1..40),
    ) {
        let n = x.len().min(flips.len());
        let x = &x[..n];
        let y: Vec<u8> = x
            .iter()
            .zip(&flips[..n])
            .map(|(v, f)| if *f { v.wrapping_add(1) % 4 } else { *v })
            .collect();
        let a = WeightVector::uniform(n).unwrap();
        let weighted = weighted_distance(&a, x, &y).unwrap();
        let hamming = hamming_distance(x, &y).unwrap();
        let expected = hamming as f64 / (n as f64).sqrt();
        prop_assert!((weighted - expected).abs() <= 1e-12);
    }
}
