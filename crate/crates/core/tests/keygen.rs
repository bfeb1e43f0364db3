use num_rational::Ratio;
use proptest::prelude::*;

use lora_skg::keygen::{derive_key, downsample, kdr, quantize_mean, reconcilable, KeyBits, CORRECTION_CAPACITY};
use lora_skg::Error;

fn key(bits: &[u8]) -> KeyBits {
    KeyBits::from_bits(bits.to_vec(), "test").unwrap()
}

#[test]
fn downsample_examples() {
    let seq: Vec<f64> = (1..=10).map(f64::from).collect();
    assert_eq!(downsample(&seq, 10).unwrap(), seq);
    assert_eq!(downsample(&seq, 5).unwrap(), vec![1.0, 3.0, 5.0, 7.0, 9.0]);
    assert!(matches!(downsample(&seq, 11), Err(Error::Parameter(_))));
}

#[test]
fn downsample_stride_is_even() {
    let idx: Vec<usize> = (0..10_000).collect();
    for target in [256, 128, 333, 9_999] {
        let kept = downsample(&idx, target).unwrap();
        let gaps: Vec<usize> = kept.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps.iter().all(|&g| g > 0));
        let (lo, hi) = (gaps.iter().min().unwrap(), gaps.iter().max().unwrap());
        assert!(hi - lo <= 1, "target {target}: gaps {lo}..{hi}");
    }
}

#[test]
fn quantizer_examples() {
    let k = quantize_mean(&[-50.0, -60.0]).unwrap();
    assert_eq!(k.bits(), &[1, 0]);
    assert_eq!(k.mu, -55.0);
    let flat = quantize_mean(&[-70.0; 8]).unwrap();
    assert!(flat.bits().iter().all(|&b| b == 0));
    assert!(flat.degenerate);
    // the middle sample equals the mean
    assert_eq!(quantize_mean(&[-40.0, -50.0, -60.0]).unwrap().bits(), &[1, 0, 0]);
}

#[test]
fn derive_key_records_stride() {
    let seq: Vec<f64> = (0..1000).map(|i| -60.0 + ((i * 37) % 11) as f64).collect();
    let k = derive_key(&seq, 128, "bob").unwrap();
    assert_eq!(k.len(), 128);
    assert_eq!(k.downsample_step, 7);
    assert_eq!(k.source_party, "bob");
}

#[test]
fn kdr_examples() {
    let a = key(&[1, 0, 1, 1]);
    assert_eq!(kdr(&a, &a).unwrap(), 0.0);
    assert_eq!(kdr(&a, &key(&[0, 1, 0, 0])).unwrap(), 1.0);
    assert_eq!(kdr(&a, &key(&[1, 1, 1, 0])).unwrap(), 0.5);
    assert!(matches!(kdr(&a, &key(&[1, 0])), Err(Error::Alignment { .. })));
}

#[test]
fn reconciliation_threshold() {
    assert_eq!(CORRECTION_CAPACITY, 0.2);
    assert!(reconcilable(0.1026));
    assert!(reconcilable(0.2));
    assert!(!reconcilable(0.2001));
    assert!(!reconcilable(0.4798));
}

#[test]
fn text_formats() {
    let k = key(&[1, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1]);
    assert_eq!(k.to_ascii(), "101011110001");
    assert_eq!(k.to_hex(), "af10");
    assert_eq!(KeyBits::parse_ascii("1010 1111\n0001", "x").unwrap().bits(), k.bits());
    assert!(matches!(KeyBits::parse_ascii("10a1", "x"), Err(Error::Parameter(_))));
    assert!(matches!(KeyBits::from_bits(vec![], "x"), Err(Error::Parameter(_))));
}

fn bits(n: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, n)
}

proptest! {
    #[test]
    fn kdr_matches_rational_count(pair in (1usize..300).prop_flat_map(|n| (bits(n), bits(n)))) {
        let (a, b) = pair;
        let diff = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        let want = Ratio::new(diff as u64, a.len() as u64);
        let got = kdr(&key(&a), &key(&b)).unwrap();
        prop_assert!((got - *want.numer() as f64 / *want.denom() as f64).abs() < 1e-12);
    }

    #[test]
    fn kdr_symmetric_and_complementary(pair in (1usize..300).prop_flat_map(|n| (bits(n), bits(n)))) {
        let (a, b) = pair;
        let (ka, kb) = (key(&a), key(&b));
        prop_assert_eq!(kdr(&ka, &kb).unwrap(), kdr(&kb, &ka).unwrap());
        let not_b: Vec<u8> = b.iter().map(|x| 1 - x).collect();
        let sum = kdr(&ka, &kb).unwrap() + kdr(&ka, &key(&not_b)).unwrap();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantizer_ignores_offset(seq in prop::collection::vec(-100i32..0, 2..200), shift in -40i32..40) {
        // integer dBm keeps the mean comparison exact under the shift
        let x: Vec<f64> = seq.iter().map(|&v| f64::from(v)).collect();
        let moved: Vec<f64> = seq.iter().map(|&v| f64::from(v + shift)).collect();
        let (a, b) = (quantize_mean(&x).unwrap(), quantize_mean(&moved).unwrap());
        prop_assert_eq!(a.bits(), b.bits());
    }

    #[test]
    fn hex_roundtrips_through_bytes(b in (1usize..100).prop_flat_map(bits)) {
        let k = key(&b);
        let hex = k.to_hex();
        prop_assert_eq!(hex.len(), b.len().div_ceil(8) * 2);
        let mut back = Vec::new();
        for i in (0..hex.len()).step_by(2) {
            let byte = u8::from_str_radix(&hex[i..i + 2], 16).unwrap();
            back.extend((0..8).map(|j| (byte >> (7 - j)) & 1));
        }
        prop_assert_eq!(&back[..b.len()], &b[..]);
        prop_assert!(back[b.len()..].iter().all(|&x| x == 0));
    }
}
