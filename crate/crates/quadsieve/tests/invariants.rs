//! Cross-module invariants that do not belong to a single unit: continued
//! fraction state round-trips, the affine shift structure of the character
//! sums, unit norms against period parity, and the sibling consistency of
//! the two character representations.

use num_bigint::BigInt;
use num_traits::Zero;
use quadsieve::arith::{floor_div_big, isqrt};
use quadsieve::charmod::{a_sum, b_sum, load_stages};
use quadsieve::contfrac::{expand, fundamental_unit, QuadraticSurd};
use quadsieve::zeta::CharacterExact;
use std::path::PathBuf;

fn stages() -> Vec<quadsieve::charmod::StageConfig> {
    load_stages(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/stages.cfg")).unwrap()
}

#[test]
fn cf_state_returns_at_period_boundary() {
    // running the state recurrence from the first periodic state for one
    // period returns to that state exactly, for all nonsquare D < 2000
    for d in 2..2000u64 {
        let big_d = BigInt::from(d);
        let s = isqrt(&big_d);
        if &s * &s == big_d {
            continue;
        }
        let cf = expand(&QuadraticSurd::sqrt_of(d).unwrap()).unwrap();
        let pre = cf.preperiod.len();
        let total = pre + cf.period.len();
        // walk states alongside the expansion terms
        let mut p = BigInt::zero();
        let mut q = BigInt::from(1u32);
        let mut state_at_pre = None;
        for j in 0..=total {
            if j == pre {
                state_at_pre = Some((p.clone(), q.clone()));
            }
            if j == total {
                assert_eq!(
                    Some((p.clone(), q.clone())),
                    state_at_pre,
                    "state did not return for D = {d}"
                );
                break;
            }
            let a = floor_div_big(&(&p + &s), &q);
            assert_eq!(&a, cf.term(j), "term mismatch at D = {d}, j = {j}");
            let pn = &a * &q - &p;
            let qn = (&big_d - &pn * &pn) / &q;
            p = pn;
            q = qn;
        }
    }
}

#[test]
fn unit_norm_is_period_parity() {
    for d in [2u64, 3, 5, 10, 13, 17, 21, 26, 29, 33, 37, 41, 53, 61, 101, 130] {
        let (_, _, norm) = fundamental_unit(d).unwrap();
        let cf = if d % 4 == 1 {
            expand(&QuadraticSurd::half_plus_sqrt(&BigInt::from(d)).unwrap()).unwrap()
        } else {
            expand(&QuadraticSurd::sqrt_of(d).unwrap()).unwrap()
        };
        let expect = if cf.period.len() % 2 == 1 { -1 } else { 1 };
        assert_eq!(norm as i32, expect, "D = {d}");
    }
}

#[test]
fn b_sum_is_periodic_and_a_sum_shifts_affinely() {
    // B depends on its argument only mod q; A gains one B per q-step:
    // A(a + Pq) = A(a) + P B(a) mod r (so parity-preserving shifts add 2PB)
    let cfg = stages();
    let chi = &cfg[0].chi;
    let q = chi.conductor as i64;
    let r = chi.target_prime as i64;
    for a in [8i64, 17, 100] {
        let b0 = b_sum(chi, a).value;
        let a0 = a_sum(chi, a).value as i64;
        for p in 1..4i64 {
            assert_eq!(b_sum(chi, a + p * q).value, b0);
            assert_eq!(
                a_sum(chi, a + p * q).value as i64,
                (a0 + p * b0 as i64).rem_euclid(r)
            );
        }
    }
}

#[test]
fn exact_siblings_match_all_stage_characters() {
    // the component-image map carries each exact value to the mod-I value:
    // chi_modI(a) = img(zeta)^t(a) for every a, where img(zeta) is pinned by
    // any unit with exponent 1
    for cfg in stages() {
        let modi = &cfg.chi;
        let exact = CharacterExact::sibling_of(modi).unwrap();
        assert!(exact.is_odd());
        assert_eq!(exact.conductor, modi.conductor);
        let mut img_of_zeta = None;
        for a in 0..modi.conductor as i64 {
            if exact.exponent(a) == Some(1) {
                img_of_zeta = Some(modi.evaluate(a).value);
                break;
            }
        }
        let img = img_of_zeta.expect("a unit maps to the primitive root of unity");
        for a in 0..modi.conductor as i64 {
            match exact.exponent(a) {
                None => assert_eq!(modi.evaluate(a).value, 0),
                Some(t) => assert_eq!(
                    modi.evaluate(a).value,
                    quadsieve::arith::pow_mod(img, t, modi.target_prime),
                    "stage {} at a = {a}",
                    modi.label
                ),
            }
        }
    }
}

#[test]
fn condition_star_holds_for_every_configured_stage() {
    for cfg in stages() {
        let stage = quadsieve::sieve::SieveStage::new(cfg.chi.clone());
        assert!(
            quadsieve::sieve::condition_star(&stage),
            "condition (*) fails for {}",
            cfg.chi.label
        );
    }
}

#[test]
fn family_scan_is_reproducible() {
    let a = quadsieve::quadfield::family_scan_n2plus1(100, false).unwrap();
    let b = quadsieve::quadfield::family_scan_n2plus1(100, false).unwrap();
    assert_eq!(
        quadsieve::quadfield::scan_tsv(&a),
        quadsieve::quadfield::scan_tsv(&b)
    );
    let odd = quadsieve::quadfield::family_scan_n2plus1(100, true).unwrap();
    assert!(odd.iter().all(|r| r.n % 2 == 1));
}

#[test]
fn stage2_survivors_carry_paired_constraints() {
    // after two stages the survivor for the class 16 mod 175 carries the
    // pair (5 mod 61, 1484 mod 1861)
    let stages: Vec<quadsieve::sieve::SieveStage> = stages()
        .into_iter()
        .map(quadsieve::sieve::SieveStage::from)
        .collect();
    let result = quadsieve::sieve::run_pipeline(&stages[..2], 175).unwrap();
    assert_eq!(result.survivors.len(), 10);
    let s16 = result
        .survivors
        .iter()
        .find(|s| s.get(175) == Some(16))
        .expect("class 16 survives two stages");
    assert_eq!(s16.get(61), Some(5));
    assert_eq!(s16.get(1861), Some(1484));
    assert_eq!(s16.to_string(), "61:5;175:16;1861:1484");
}

#[test]
fn theorem2_verdict_report() {
    let stages: Vec<quadsieve::sieve::SieveStage> = stages()
        .into_iter()
        .map(quadsieve::sieve::SieveStage::from)
        .collect();
    let (ok, report) = quadsieve::sieve::theorem2_verdict(&stages).unwrap();
    assert!(ok);
    assert!(report.contains("verdict verified"));
    let (ok, report) = quadsieve::sieve::theorem2_verdict(&stages[..1]).unwrap();
    assert!(!ok);
    assert!(report.contains("20 classes survive"));
}
