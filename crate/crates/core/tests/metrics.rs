use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use lora_skg::attack::{collude_estimate, Averaging, CollusionEstimate};
use lora_skg::channel_sim::{ProbeTrace, TraceSource};
use lora_skg::metrics::{cond_mutual_info, entropy, mutual_info, pearson, secret_key_capacity, Correction, Estimator};
use lora_skg::runner::{simulate_cell, ExperimentConfig, ScenarioLabel};
use lora_skg::Error;

fn gauss(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap()
}

// ρ² and sign(ρ) from exact rational sums
fn pearson_squared_exact(x: &[f64], y: &[f64]) -> (BigRational, bool) {
    let n = BigRational::from_integer(BigInt::from(x.len()));
    let xs: Vec<BigRational> = x.iter().map(|&v| exact(v)).collect();
    let ys: Vec<BigRational> = y.iter().map(|&v| exact(v)).collect();
    let mx = xs.iter().fold(BigRational::from_integer(0.into()), |a, b| a + b) / &n;
    let my = ys.iter().fold(BigRational::from_integer(0.into()), |a, b| a + b) / &n;
    let zero = || BigRational::from_integer(0.into());
    let (mut sxy, mut sxx, mut syy) = (zero(), zero(), zero());
    for (a, b) in xs.iter().zip(&ys) {
        let (da, db) = (a - &mx, b - &my);
        sxy += &da * &db;
        sxx += &da * &da;
        syy += &db * &db;
    }
    let positive = sxy >= zero();
    (&sxy * &sxy / (sxx * syy), positive)
}

fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap()
}

#[test]
fn pearson_examples() {
    let x = [1.0f64, 2.0, 3.0, 4.0];
    assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
    let neg: Vec<f64> = x.iter().map(|v| -v + 7.0).collect();
    assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
    // exact: 6.5 / sqrt(5 · 8.75)
    let got = pearson(&x, &[1.0, 2.0, 3.0, 5.0]).unwrap();
    assert!((got - 0.982_707_629_823_990_8).abs() < 1e-12, "{got}");
    let (sq, pos) = pearson_squared_exact(&x, &[1.0, 2.0, 3.0, 5.0]);
    assert_eq!(sq, BigRational::new(169.into(), 175.into()));
    assert!(pos);
    assert!(matches!(pearson(&[2.0; 4], &x), Err(Error::UndefinedCorrelation(_))));
    assert!(matches!(pearson(&x, &x[..3]), Err(Error::Alignment { .. })));
}

#[test]
fn pearson_matches_rational_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.random_range(2..60);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..-20.0)).collect();
        let w: f64 = rng.random_range(-2.0..2.0);
        let y: Vec<f64> = x.iter().map(|v| w * v + rng.random_range(-30.0..30.0)).collect();
        let got = pearson(&x, &y).unwrap();
        let (sq, pos) = pearson_squared_exact(&x, &y);
        let want = to_f64(&sq).sqrt() * if pos { 1.0 } else { -1.0 };
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn entropy_examples() {
    assert_eq!(entropy(&[-55.0; 40], 1.0), 0.0);
    let half: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { -50.0 } else { -60.0 }).collect();
    assert!((entropy(&half, 1.0) - 1.0).abs() < 1e-12);
    let eight: Vec<f64> = (0..800).map(|i| -40.0 - (i % 8) as f64 * 3.0).collect();
    assert!((entropy(&eight, 1.0) - 3.0).abs() < 1e-12);
}

#[test]
fn self_information_and_shuffle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<f64> = gauss(&mut rng, 10_000).iter().map(|v| 2.0 * v).collect();
    assert_eq!(mutual_info(&x, &x, 1.0).unwrap(), entropy(&x, 1.0));
    let mut y = x.clone();
    y.shuffle(&mut rng);
    let mi = mutual_info(&x, &y, 1.0).unwrap();
    assert!(mi <= 0.05, "shuffled MI {mi}");
}

#[test]
fn shuffled_bias_at_five_db() {
    // plug-in bias is about (kx-1)(ky-1) / (2N ln 2) ≈ 0.06 bits for ~29
    // occupied bins per axis
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<f64> = gauss(&mut rng, 10_000).iter().map(|v| 5.0 * v).collect();
    let mut y = x.clone();
    y.shuffle(&mut rng);
    let plug = mutual_info(&x, &y, 1.0).unwrap();
    assert!((0.04..0.09).contains(&plug), "plug-in {plug}");
    let mm = Estimator::new(1.0).with_correction(Correction::MillerMadow).mutual_info(&x, &y).unwrap();
    assert!(mm <= 0.05, "Miller-Madow {mm}");
}

#[test]
fn gaussian_mutual_information() {
    let (rho, sigma, n) = (0.9f64, 5.0, 10_000);
    let want = -0.5 * (1.0 - rho * rho).log2();
    assert!((want - 1.198).abs() < 1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = gauss(&mut rng, n);
    let v = gauss(&mut rng, n);
    let x: Vec<f64> = u.iter().map(|a| sigma * a).collect();
    let y: Vec<f64> = u.iter().zip(&v).map(|(a, b)| sigma * (rho * a + (1.0 - rho * rho).sqrt() * b)).collect();
    let got = mutual_info(&x, &y, 1.0).unwrap();
    assert!((got - want).abs() < 0.15 * want, "{got} vs {want}");
}

#[test]
fn gaussian_conditional_mutual_information() {
    // X = Z + A, Y = Z + B with corr(A, B) = ρ, Z independent: I(X;Y|Z) = I(A;B)
    let (rho, n) = (0.8f64, 200_000);
    let want = -0.5 * (1.0 - rho * rho).log2();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let z: Vec<f64> = gauss(&mut rng, n).iter().map(|v| 4.0 * v).collect();
    let a = gauss(&mut rng, n);
    let b = gauss(&mut rng, n);
    let x: Vec<f64> = z.iter().zip(&a).map(|(z, a)| z + 5.0 * a).collect();
    let y: Vec<f64> = z
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(z, (a, b))| z + 5.0 * (rho * a + (1.0 - rho * rho).sqrt() * b))
        .collect();
    let got = cond_mutual_info(&x, &y, &z, 1.0).unwrap();
    assert!((got - want).abs() < 0.2 * want, "{got} vs {want}");
}

#[test]
fn conditioning_edge_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x: Vec<f64> = gauss(&mut rng, 2000).iter().map(|v| 4.0 * v).collect();
    let y: Vec<f64> = x.iter().zip(gauss(&mut rng, 2000)).map(|(a, b)| a + 2.0 * b).collect();
    let flat = vec![-70.0; 2000];
    assert_eq!(cond_mutual_info(&x, &y, &flat, 1.0).unwrap(), mutual_info(&x, &y, 1.0).unwrap());
    assert_eq!(cond_mutual_info(&x, &y, &x, 1.0).unwrap(), 0.0);
}

#[test]
fn miller_madow_raises_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let x: Vec<f64> = gauss(&mut rng, 500).iter().map(|v| 6.0 * v).collect();
    let plug = Estimator::new(1.0).entropy(&x);
    let mm = Estimator::new(1.0).with_correction(Correction::MillerMadow).entropy(&x);
    assert!(mm > plug);
}

fn trace(rows: Vec<Vec<f64>>) -> ProbeTrace {
    let n = rows[0].len();
    ProbeTrace::new(rows, (0..n).map(|i| i as f64).collect(), TraceSource::Derived("test".into())).unwrap()
}

#[test]
fn capacity_with_ignorant_eves() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let a: Vec<f64> = gauss(&mut rng, 3000).iter().map(|v| -60.0 + 5.0 * v).collect();
    let b: Vec<f64> = a.iter().zip(gauss(&mut rng, 3000)).map(|(x, e)| x + e).collect();
    let t = trace(vec![a, b, vec![-80.0; 3000], vec![-81.0; 3000]]);
    let ec = collude_estimate(&t, Averaging::LinearAverage).unwrap();
    let r = secret_key_capacity(&t, &ec, 1.0).unwrap();
    assert_eq!(r.c_k, r.mi_ab);
    assert_eq!(r.r_ck, Some(1.0));
    assert_eq!(r.rho_a_em, vec![None, None]);
}

#[test]
fn capacity_with_full_leakage() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let a: Vec<f64> = gauss(&mut rng, 3000).iter().map(|v| (-60.0 + 5.0 * v).round()).collect();
    let b: Vec<f64> = a.iter().zip(gauss(&mut rng, 3000)).map(|(x, e)| x + e).collect();
    let t = trace(vec![a.clone(), b, a.clone()]);
    let leaked = CollusionEstimate {
        x_ec: a,
        m_used: 1,
        domain: Averaging::DbAverage,
    };
    let r = secret_key_capacity(&t, &leaked, 1.0).unwrap();
    assert!(r.cmi_ec < 1e-12 && r.c_k < 1e-12);
    assert!(r.r_ck.unwrap() < 1e-12);
}

#[test]
fn collusion_is_smallest_in_moving_bob() {
    let cfg = ExperimentConfig::default();
    let strict = (1..=10)
        .filter(|&seed| {
            let t = simulate_cell(&cfg, ScenarioLabel::Ic, 3.0, seed).unwrap();
            let ec = collude_estimate(&t, Averaging::LinearAverage).unwrap();
            secret_key_capacity(&t, &ec, 1.0).unwrap().collusion_is_strict_min()
        })
        .count();
    assert!(strict >= 9, "strict minimum in {strict} of 10 seeds");
}

proptest! {
    #[test]
    fn pearson_affine_invariant(
        x in prop::collection::vec(-100.0f64..0.0, 3..50),
        noise in prop::collection::vec(-10.0f64..10.0, 50),
        a in 0.1f64..10.0,
        b in -50.0f64..50.0,
    ) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(v, e)| v + e).collect();
        prop_assume!(pearson(&x, &y).is_ok());
        let r = pearson(&x, &y).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!((pearson(&scaled, &y).unwrap() - r).abs() < 1e-9);
        let flipped: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
        prop_assert!((pearson(&flipped, &y).unwrap() + r).abs() < 1e-9);
        prop_assert!(r.abs() <= 1.0);
    }

    #[test]
    fn mutual_info_symmetric_and_bounded(
        x in prop::collection::vec(-80.0f64..-40.0, 2..200),
        seed in 0u64..1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(-5.0..5.0)).collect();
        let xy = mutual_info(&x, &y, 1.0).unwrap();
        let yx = mutual_info(&y, &x, 1.0).unwrap();
        prop_assert!((xy - yx).abs() < 1e-9);
        prop_assert!(xy >= 0.0);
        prop_assert!(xy <= entropy(&x, 1.0) + 1e-9 && xy <= entropy(&y, 1.0) + 1e-9);
    }

    #[test]
    fn coarser_bins_lose_information(
        x in prop::collection::vec(-80.0f64..-40.0, 50..300),
        seed in 0u64..1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(-4.0..4.0)).collect();
        // a 4 dB grid computed from the 1 dB bins
        let fine_y: Vec<f64> = y.iter().map(|v| v.round()).collect();
        let coarse: Vec<f64> = fine_y.iter().map(|v| (v / 4.0).floor() * 4.0).collect();
        let fine = mutual_info(&x, &fine_y, 1.0).unwrap();
        prop_assert!(mutual_info(&x, &coarse, 1.0).unwrap() <= fine + 0.02);
    }

    #[test]
    fn cond_mutual_info_nonnegative(
        x in prop::collection::vec(-80.0f64..-40.0, 2..100),
        seed in 0u64..1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|v| v + rng.random_range(-5.0..5.0)).collect();
        let z: Vec<f64> = x.iter().map(|v| v + rng.random_range(-5.0..5.0)).collect();
        prop_assert!(cond_mutual_info(&x, &y, &z, 1.0).unwrap() >= 0.0);
    }
}
