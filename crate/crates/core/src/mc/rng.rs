//! Keyed, splittable random streams.
//!
//! Each (master seed, purpose, family, size, replica) tuple derives its own
//! ChaCha stream, so replicas are independent and results do not depend on
//! how work is scheduled across threads.

use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::matrix::C64;

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Purpose tag separating independent uses of the same master seed.
#[derive(Clone, Copy, Debug)]
pub enum StreamPurpose {
    WignerEntries,
}

pub fn stream(
    master: u64,
    purpose: StreamPurpose,
    family: u32,
    n: u32,
    replica: u32,
) -> ChaCha8Rng {
    let mut state = master ^ 0xd1b54a32d192ed03;
    let mix = |v: u64, s: &mut u64| {
        *s ^= v.wrapping_mul(0x9e3779b97f4a7c15);
        splitmix(s)
    };
    let mut seed = [0u8; 32];
    let words = [
        mix(purpose as u64 + 1, &mut state),
        mix(family as u64, &mut state),
        mix(n as u64, &mut state),
        mix(replica as u64, &mut state),
    ];
    for (i, w) in words.iter().enumerate() {
        seed[i * 8..(i + 1) * 8].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Uniform in (0, 1].
#[inline]
pub fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
}

/// A pair of independent standard normals by the polar (Marsaglia)
/// method: rejection on the unit disk, no trigonometry.
#[inline]
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    loop {
        let u = 2.0 * uniform01(rng) - 1.0;
        let v = 2.0 * uniform01(rng) - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// Standard real normal.
#[inline]
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    normal_pair(rng).0
}

/// Standard complex normal: independent real and imaginary parts of
/// variance 1/2, so `E|z|^2 = 1` and `E[z^2] = 0`.
#[inline]
pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let (g1, g2) = normal_pair(rng);
    Complex::new(g1 * std::f64::consts::FRAC_1_SQRT_2, g2 * std::f64::consts::FRAC_1_SQRT_2)
}

/// Uniform on the fourth roots of unity.
#[inline]
pub fn quaternary(rng: &mut ChaCha8Rng) -> C64 {
    match rng.next_u64() & 3 {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, 1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, -1.0),
    }
}

#[inline]
pub fn rademacher(rng: &mut ChaCha8Rng) -> f64 {
    if rng.next_u64() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}
