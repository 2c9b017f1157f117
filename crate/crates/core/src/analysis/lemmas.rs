use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::exec::{self, Exec};
use crate::models::{hessian_quadratic_form, ModelKind, ModelParams};

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    pub samples: usize,
    /// `max hessian_quadratic_form(z, x) / |x|^2`.
    pub max_hessian_ratio: f64,
    /// `max |g(x) - g(y)| / |x - y|` for the unit sinc flux `g`.
    pub max_lipschitz_ratio: f64,
    /// Pairs skipped because the ratio is 0/0.
    pub skipped: usize,
}

impl LemmaReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_hessian_ratio <= 1.0 + tol && self.max_lipschitz_ratio <= 1.0 + tol
    }
}

fn in_ball(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let a = rng.random_range(0.0..2.0 * PI);
    [r * a.cos(), r * a.sin()]
}

#[derive(Default)]
struct Partial {
    hess: f64,
    lip: f64,
    skipped: usize,
}

fn hessian_ratio(z: [f64; 2], x: [f64; 2]) -> Option<f64> {
    let xx = x[0] * x[0] + x[1] * x[1];
    (xx > 0.0).then(|| hessian_quadratic_form(z, x) / xx)
}

fn lipschitz_ratio(g: &ModelParams, x: [f64; 2], y: [f64; 2]) -> Option<f64> {
    let d = (x[0] - y[0]).hypot(x[1] - y[1]);
    if d == 0.0 {
        return None;
    }
    let (a0, a1) = g.flux_at(x[0], x[1]);
    let (b0, b1) = g.flux_at(y[0], y[1]);
    Some((a0 - b0).hypot(a1 - b1) / d)
}

/// Samples the Hessian bound for `G(z) = cos |z|` and the Lipschitz bound for
/// the unit sinc flux over a ball of the given radius.
///
/// Half of the Lipschitz pairs are independent points, the other half are
/// close pairs separated by `10^u`, `u` uniform in `[-3, 0]`. The attaining
/// configuration `z = (pi, 0), x = (1, 0)` is always included.
pub fn lemma_sampler(n_samples: usize, radius: f64, seed: u64, exec: Exec) -> Result<LemmaReport> {
    if n_samples < 1 {
        return Err(invalid("n_samples", "must be >= 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("radius", "must be finite and > 0"));
    }
    let g = ModelParams::new(ModelKind::SincIsotropic, 1.0)?;
    let chunks = n_samples.div_ceil(CHUNK);
    let parts = exec::map_indexed(exec, chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = CHUNK.min(n_samples - c * CHUNK);
        let mut p = Partial {
            hess: f64::NEG_INFINITY,
            lip: f64::NEG_INFINITY,
            skipped: 0,
        };
        for s in 0..count {
            let z = in_ball(&mut rng, radius);
            let x = in_ball(&mut rng, radius);
            match hessian_ratio(z, x) {
                Some(q) => p.hess = p.hess.max(q),
                None => p.skipped += 1,
            }
            let a = in_ball(&mut rng, radius);
            let b = if s % 2 == 0 {
                in_ball(&mut rng, radius)
            } else {
                let step = 10f64.powf(rng.random_range(-3.0..=0.0));
                let t = rng.random_range(0.0..2.0 * PI);
                [a[0] + step * t.cos(), a[1] + step * t.sin()]
            };
            match lipschitz_ratio(&g, a, b) {
                Some(q) => p.lip = p.lip.max(q),
                None => p.skipped += 1,
            }
        }
        p
    });

    let mut hess = hessian_ratio([PI, 0.0], [1.0, 0.0]).expect("nonzero x");
    let mut lip = f64::NEG_INFINITY;
    let mut skipped = 0;
    // x = y is the degenerate 0/0 pair
    if lipschitz_ratio(&g, [1.0, 2.0], [1.0, 2.0]).is_none() {
        skipped += 1;
    }
    for p in parts {
        hess = hess.max(p.hess);
        lip = lip.max(p.lip);
        skipped += p.skipped;
    }
    Ok(LemmaReport {
        samples: n_samples,
        max_hessian_ratio: hess,
        max_lipschitz_ratio: lip,
        skipped,
    })
}
