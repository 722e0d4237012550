use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vmdfbd::spectral::{analytic_signal, crop_mirror_slice, dft_forward, dft_forward_real, dft_inverse, mirror_extend_slice};

/// O(N²) transform straight from the definition.
fn direct_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, v)| {
                    let ang = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    v * Complex64::new(ang.cos(), ang.sin())
                })
                .sum()
        })
        .collect()
}

fn random_complex(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn forward_and_roundtrip_match_direct_dft() {
    for (n, seed) in [(64, 1), (4096, 2)] {
        let x = random_complex(n, seed);
        let fast = dft_forward(&x).unwrap();
        let slow = direct_dft(&x, -1.0);
        // Direct summation accumulates error ~ N·ε·|x|.
        let scale = n as f64;
        assert!(max_err(&fast, &slow) < 1e-12 * scale, "n={n}");
        let back = dft_inverse(&fast).unwrap();
        assert!(max_err(&back, &x) < 1e-10, "n={n}");
        let oracle_back: Vec<Complex64> = direct_dft(&slow, 1.0).iter().map(|v| v / n as f64).collect();
        assert!(max_err(&back, &oracle_back) < 1e-10, "n={n}");
    }
}

#[test]
fn analytic_amplitude_is_flat_on_a_tone() {
    let n = 4096;
    let x: Vec<f64> = (0..n).map(|i| 0.7 * (2.0 * PI * 117.0 * i as f64 / 4096.0 + 0.3).sin()).collect();
    let z = analytic_signal(&x).unwrap();
    let interior: Vec<f64> = z[n / 20..n - n / 20].iter().map(|v| v.norm()).collect();
    let mean = interior.iter().sum::<f64>() / interior.len() as f64;
    let std = (interior.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / interior.len() as f64).sqrt();
    assert!(std / mean < 1e-4);
}

fn real_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 4..max_len)
}

proptest! {
    #[test]
    fn parseval(x in real_vec(300)) {
        let spec = dft_forward_real(&x).unwrap();
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = spec.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
        prop_assert!((time - freq).abs() <= 1e-9 * time.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn roundtrip(x in real_vec(300)) {
        let spec = dft_forward_real(&x).unwrap();
        let back = dft_inverse(&spec).unwrap();
        for (b, v) in back.iter().zip(&x) {
            prop_assert!((b.re - v).abs() < 1e-10 && b.im.abs() < 1e-10);
        }
    }

    #[test]
    fn analytic_signal_is_linear(
        pair in (4usize..200).prop_flat_map(|n| (prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-10.0f64..10.0, n))),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let (x, y) = pair;
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let zx = analytic_signal(&x).unwrap();
        let zy = analytic_signal(&y).unwrap();
        let zm = analytic_signal(&mix).unwrap();
        for i in 0..x.len() {
            prop_assert!((zm[i] - (zx[i] * a + zy[i] * b)).norm() < 1e-9);
            prop_assert!((zm[i].re - mix[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn mirror_roundtrip(x in prop::collection::vec(-10.0f64..10.0, 2..200)) {
        let ext = mirror_extend_slice(&x);
        prop_assert_eq!(ext.len(), 2 * x.len());
        prop_assert_eq!(crop_mirror_slice(&ext).unwrap(), &x[..]);
    }
}
