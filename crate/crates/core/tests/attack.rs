use astro_float::{BigFloat, Consts, RoundingMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lora_skg::attack::{best_single_eve, collude_estimate, Averaging};
use lora_skg::channel_sim::{ProbeTrace, TraceSource};
use lora_skg::metrics::pearson;
use lora_skg::Error;

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

fn trace(rows: Vec<Vec<f64>>) -> ProbeTrace {
    let n = rows[0].len();
    ProbeTrace::new(rows, (0..n).map(|i| i as f64).collect(), TraceSource::Derived("test".into())).unwrap()
}

fn with_eves(eves: Vec<Vec<f64>>) -> ProbeTrace {
    let n = eves[0].len();
    let alice: Vec<f64> = (0..n).map(|i| -50.0 - (i % 7) as f64).collect();
    let mut rows = vec![alice.clone(), alice];
    rows.extend(eves);
    trace(rows)
}

// 10·log10(mean of 10^(x/10)) in 256-bit floats
fn linear_average_oracle(values: &[f64]) -> f64 {
    let mut cc = Consts::new().unwrap();
    let ten = BigFloat::from_f64(10.0, P);
    let mut sum = BigFloat::from_f64(0.0, P);
    for &v in values {
        let lin = ten.pow(&BigFloat::from_f64(v / 10.0, P), P, RM, &mut cc);
        sum = sum.add(&lin, P, RM);
    }
    let mean = sum.div(&BigFloat::from_f64(values.len() as f64, P), P, RM);
    let db = ten.mul(&mean.log10(P, RM, &mut cc), P, RM);
    db.to_string().parse().unwrap()
}

#[test]
fn single_eve_is_copied() {
    let t = with_eves(vec![vec![-61.0, -64.0, -58.0, -60.0]]);
    for avg in [Averaging::LinearAverage, Averaging::DbAverage] {
        let ec = collude_estimate(&t, avg).unwrap();
        assert_eq!(ec.x_ec, t.eves()[0]);
        assert_eq!(ec.m_used, 1);
    }
}

#[test]
fn equal_readings_average_to_themselves() {
    let t = with_eves(vec![vec![-50.0; 3]; 4]);
    for avg in [Averaging::LinearAverage, Averaging::DbAverage] {
        let ec = collude_estimate(&t, avg).unwrap();
        assert!(ec.x_ec.iter().all(|&v| (v + 50.0).abs() < 1e-12));
    }
}

#[test]
fn decade_spread_linear_average() {
    // frozen from a 50-digit evaluation
    let t = with_eves(vec![vec![-40.0], vec![-50.0], vec![-60.0], vec![-70.0]].into_iter().map(|r| r.repeat(2)).collect());
    let got = collude_estimate(&t, Averaging::LinearAverage).unwrap().x_ec[0];
    assert!((got + 45.563_459_323_870_95).abs() < 1e-9, "{got}");
    assert!((got - linear_average_oracle(&[-40.0, -50.0, -60.0, -70.0])).abs() < 1e-9);
    let db = collude_estimate(&t, Averaging::DbAverage).unwrap().x_ec[0];
    assert_eq!(db, -55.0);
}

#[test]
fn no_eves_is_undefined() {
    let t = trace(vec![vec![-50.0, -51.0], vec![-50.0, -52.0]]);
    assert!(matches!(collude_estimate(&t, Averaging::LinearAverage), Err(Error::AttackUndefined)));
    assert!(matches!(best_single_eve(&t), Err(Error::AttackUndefined)));
}

#[test]
fn best_single_eve_finds_copy() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let alice: Vec<f64> = (0..400).map(|_| rng.random_range(-70.0..-40.0)).collect();
    let mut rows = vec![alice.clone(), alice.clone()];
    for m in 1..=4 {
        rows.push(if m == 2 {
            alice.clone()
        } else {
            (0..400).map(|_| rng.random_range(-70.0..-40.0)).collect()
        });
    }
    let (m, rho) = best_single_eve(&trace(rows)).unwrap();
    assert_eq!(m, 2);
    assert!((rho - 1.0).abs() < 1e-12);
}

#[test]
fn best_single_eve_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let alice: Vec<f64> = (0..200).map(|_| rng.random_range(-80.0..-40.0)).collect();
        let mut rows = vec![alice.clone(), alice.clone()];
        for _ in 0..4 {
            let w: f64 = rng.random_range(-1.0..1.0);
            rows.push(alice.iter().map(|a| w * a + rng.random_range(-10.0..10.0)).collect());
        }
        let t = trace(rows);
        let want = t
            .eves()
            .iter()
            .enumerate()
            .map(|(k, e)| (k + 1, pearson(t.alice(), e).unwrap().abs()))
            .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        assert_eq!(best_single_eve(&t).unwrap(), want);
    }
}

#[test]
fn constant_alice_is_undefined_correlation() {
    let t = trace(vec![vec![-50.0; 4], vec![-50.0, -51.0, -52.0, -50.0], vec![-60.0, -61.0, -60.0, -62.0]]);
    assert!(matches!(best_single_eve(&t), Err(Error::UndefinedCorrelation(_))));
}

fn eve_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..6, 2usize..30).prop_flat_map(|(m, n)| prop::collection::vec(prop::collection::vec(-120.0f64..0.0, n), m))
}

proptest! {
    #[test]
    fn estimate_between_extremes(eves in eve_rows()) {
        let t = with_eves(eves.clone());
        for avg in [Averaging::LinearAverage, Averaging::DbAverage] {
            let ec = collude_estimate(&t, avg).unwrap();
            for (n, &v) in ec.x_ec.iter().enumerate() {
                let lo = eves.iter().map(|r| r[n]).fold(f64::INFINITY, f64::min);
                let hi = eves.iter().map(|r| r[n]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }
        // power averaging never sits below the dB average
        let lin = collude_estimate(&t, Averaging::LinearAverage).unwrap().x_ec;
        let db = collude_estimate(&t, Averaging::DbAverage).unwrap().x_ec;
        for (l, d) in lin.iter().zip(&db) {
            prop_assert!(l + 1e-9 >= *d);
        }
    }

    #[test]
    fn estimate_ignores_eve_order(eves in eve_rows(), rot in 0usize..6) {
        let mut turned = eves.clone();
        let k = rot % turned.len();
        turned.rotate_left(k);
        turned.reverse();
        for avg in [Averaging::LinearAverage, Averaging::DbAverage] {
            let a = collude_estimate(&with_eves(eves.clone()), avg).unwrap().x_ec;
            let b = collude_estimate(&with_eves(turned.clone()), avg).unwrap().x_ec;
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn linear_average_matches_high_precision(values in prop::collection::vec(-130.0f64..10.0, 1..8)) {
        let t = with_eves(values.iter().map(|&v| vec![v, v]).collect());
        let got = collude_estimate(&t, Averaging::LinearAverage).unwrap().x_ec[0];
        prop_assert!((got - linear_average_oracle(&values)).abs() < 1e-9);
    }
}
