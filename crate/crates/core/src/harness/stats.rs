//! Small-sample summary statistics with normal-approximation intervals.

pub const Z_TWO_SIDED_95: f64 = 1.959_963_984_540_054;
pub const Z_ONE_SIDED_95: f64 = 1.644_853_626_951_472_2;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample standard deviation (0 for fewer than two points).
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub sd: f64,
    pub n: usize,
}

/// Two-sided 95% normal interval for the mean.
pub fn mean_ci95(xs: &[f64]) -> MeanCi {
    let m = mean(xs);
    let sd = sample_sd(xs);
    let half = Z_TWO_SIDED_95 * sd / (xs.len() as f64).sqrt();
    MeanCi {
        mean: m,
        lo: m - half,
        hi: m + half,
        sd,
        n: xs.len(),
    }
}

/// One-sided lower 95% bound on the mean.
pub fn one_sided_lower95(xs: &[f64]) -> f64 {
    mean(xs) - Z_ONE_SIDED_95 * sample_sd(xs) / (xs.len() as f64).sqrt()
}
