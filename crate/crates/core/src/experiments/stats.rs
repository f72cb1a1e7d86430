use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Linear-interpolation quantile of unsorted data (NaN when empty).
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Result of a two-sided bootstrap test on a difference of means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapTest {
    pub diff: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
}

fn empty() -> BootstrapTest {
    BootstrapTest {
        diff: f64::NAN,
        ci_low: f64::NAN,
        ci_high: f64::NAN,
        p_value: 1.0,
    }
}

fn resample_mean(xs: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let n = xs.len();
    (0..n).map(|_| xs[rng.gen_range(0..n)]).sum::<f64>() / n as f64
}

fn finish(observed: f64, null: &[f64], shifted: &mut [f64]) -> BootstrapTest {
    let extreme = null
        .iter()
        .filter(|d| d.abs() >= observed.abs() - 1e-12)
        .count();
    shifted.sort_by(f64::total_cmp);
    BootstrapTest {
        diff: observed,
        ci_low: quantile(shifted, 0.025),
        ci_high: quantile(shifted, 0.975),
        p_value: (extreme + 1) as f64 / (null.len() + 1) as f64,
    }
}

/// Paired test of mean(a − b) = 0; resamples the centred differences.
pub fn paired_bootstrap(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> BootstrapTest {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    if a.is_empty() {
        return empty();
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let observed = mean(&d);
    let centred: Vec<f64> = d.iter().map(|x| x - observed).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut null = Vec::with_capacity(resamples);
    let mut raw = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        null.push(resample_mean(&centred, &mut rng));
        raw.push(resample_mean(&d, &mut rng));
    }
    finish(observed, &null, &mut raw)
}

/// Unpaired test of mean(a) = mean(b); each group is centred and resampled.
pub fn unpaired_bootstrap(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> BootstrapTest {
    if a.is_empty() || b.is_empty() {
        return empty();
    }
    let (ma, mb) = (mean(a), mean(b));
    let observed = ma - mb;
    let ca: Vec<f64> = a.iter().map(|x| x - ma).collect();
    let cb: Vec<f64> = b.iter().map(|x| x - mb).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut null = Vec::with_capacity(resamples);
    let mut raw = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        null.push(resample_mean(&ca, &mut rng) - resample_mean(&cb, &mut rng));
        raw.push(resample_mean(a, &mut rng) - resample_mean(b, &mut rng));
    }
    finish(observed, &null, &mut raw)
}
