//! Green functions, potentials of pulled-back curves, equidistribution
//! distances, Lelong and Kiselman numbers and Monte Carlo volume experiments.

pub mod equidist;
mod ext;
pub mod fit;
pub mod green;
pub mod lelong;
pub mod volume;

pub use equidist::{equidist_distance, EquidistReport, EquidistRow, CLIP_FLOOR};
pub use green::{curve_potential, curve_potentials, green, green_lift, GreenEval};
pub use lelong::{
    default_r_grid, kiselman_decay_scan, kiselman_estimate, lelong_estimate, DecayRow, KiselmanEstimate,
    LelongEstimate,
};
pub use volume::{
    inner_rate, sublevel_volume, volume_decay, ChartBall, ChartBox, SublevelRow, SublevelTable, VolumeDecay,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Samples per shard. Fixed so that results depend on the seed only.
pub const SHARD: usize = 1024;

/// Runs `body` on each shard of `samples` draws with its own ChaCha stream
/// and adds the accumulators by pairwise summation in shard order.
pub(crate) fn sharded<F>(samples: usize, seed: u64, width: usize, body: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Vec<f64> + Sync,
{
    let shards = samples.div_ceil(SHARD);
    let parts: Vec<Vec<f64>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let count = SHARD.min(samples - s * SHARD);
            let acc = body(&mut rng, count);
            debug_assert_eq!(acc.len(), width);
            acc
        })
        .collect();
    pairwise(&parts, width)
}

fn pairwise(parts: &[Vec<f64>], width: usize) -> Vec<f64> {
    match parts.len() {
        0 => vec![0.0; width],
        1 => parts[0].clone(),
        n => {
            let (a, b) = parts.split_at(n / 2);
            let (a, b) = (pairwise(a, width), pairwise(b, width));
            a.iter().zip(&b).map(|(x, y)| x + y).collect()
        }
    }
}

/// Mean and standard error from a count, a sum and a sum of squares.
pub(crate) fn mean_stderr(n: f64, sum: f64, sumsq: f64) -> (f64, f64) {
    if n == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = sum / n;
    let var = if n > 1.0 { ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn shards_are_thread_independent() {
        let run = || {
            sharded(5000, 3, 2, |rng, n| {
                let s: f64 = (0..n).map(|_| rng.gen::<f64>()).sum();
                vec![s, n as f64]
            })
        };
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(run);
        assert_eq!(a, b);
        assert_eq!(a[1], 5000.0);
    }
}
