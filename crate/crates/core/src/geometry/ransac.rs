use alloc::vec;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_CONFIDENCE: f64 = 0.9999;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// Adaptive RANSAC settings. Every call owns its generator, seeded from
/// `seed`, so concurrent callers never share state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    pub threshold_px: f64,
    pub confidence: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl RansacConfig {
    pub fn new(threshold_px: f64, seed: u64) -> Self {
        Self { threshold_px, confidence: DEFAULT_CONFIDENCE, max_iterations: DEFAULT_MAX_ITERATIONS, seed }
    }
}

pub(crate) struct Consensus<M> {
    pub model: M,
    pub inliers: Vec<bool>,
    pub count: usize,
}

/// Hypothesize-and-verify loop. `fit` returns `None` for degenerate
/// samples; `residual` is in the same units as the threshold.
pub(crate) fn ransac<M>(
    n: usize,
    sample_size: usize,
    config: &RansacConfig,
    mut fit: impl FnMut(&[usize]) -> Option<M>,
    mut residual: impl FnMut(&M, usize) -> f64,
) -> Option<Consensus<M>> {
    if n < sample_size {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let thr2 = config.threshold_px * config.threshold_px;
    let mut best: Option<(M, usize, f64)> = None;
    let mut needed = config.max_iterations;
    let mut sample = vec![0usize; sample_size];
    let mut iteration = 0;
    while iteration < needed.min(config.max_iterations) {
        iteration += 1;
        let picked = rand::seq::index::sample(&mut rng, n, sample_size);
        for (slot, idx) in sample.iter_mut().zip(picked.iter()) {
            *slot = idx;
        }
        let Some(model) = fit(&sample) else { continue };
        let mut count = 0;
        let mut cost = 0.0;
        for i in 0..n {
            let r = residual(&model, i);
            if r < config.threshold_px {
                count += 1;
                cost += r * r;
            } else {
                cost += thr2;
            }
        }
        let better = match &best {
            None => true,
            Some((_, c, s)) => count > *c || (count == *c && cost < *s),
        };
        if better {
            best = Some((model, count, cost));
            needed = adaptive_iterations(count, n, sample_size, config.confidence);
        }
    }
    let (model, _, _) = best?;
    let inliers: Vec<bool> = (0..n).map(|i| residual(&model, i) < config.threshold_px).collect();
    let count = inliers.iter().filter(|&&b| b).count();
    Some(Consensus { model, inliers, count })
}

fn adaptive_iterations(inliers: usize, n: usize, sample_size: usize, confidence: f64) -> usize {
    let w = inliers as f64 / n as f64;
    let p_good = libm::pow(w, sample_size as f64);
    if p_good >= 1.0 {
        return 1;
    }
    if p_good <= 0.0 {
        return usize::MAX;
    }
    let k = libm::log(1.0 - confidence) / libm::log(1.0 - p_good);
    if k.is_finite() {
        libm::ceil(k).max(1.0) as usize
    } else {
        usize::MAX
    }
}
