#![allow(dead_code)]

use mbe_core::{GridSpec, RealField, Spectral};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_field(grid: GridSpec, seed: u64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    RealField::from_values(grid, v).unwrap()
}

/// Random field whose modes satisfy `|k1| <= kmax`, `|k2| <= kmax`.
pub fn band_limited(sp: &Spectral, seed: u64, kmax: i64) -> RealField {
    let g = sp.grid();
    let mut c = sp.forward_transform(&random_field(g, seed)).unwrap();
    for i in 0..g.nx() {
        for j in 0..g.ny() {
            let k1 = GridSpec::wavenumber(i, g.nx());
            let k2 = GridSpec::wavenumber(j, g.ny());
            if k1.abs() > kmax || k2.abs() > kmax {
                c.set_coeff(k1, k2, num_complex::Complex64::new(0.0, 0.0));
            }
        }
    }
    sp.inverse_transform(&c).unwrap()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
