pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

pub fn standard_error(xs: &[f64]) -> f64 {
    std_dev(xs) / (xs.len() as f64).sqrt()
}

/// Welch-style pooled standard error of the difference of two means.
pub fn pooled_se(sd1: f64, n1: usize, sd2: f64, n2: usize) -> f64 {
    (sd1 * sd1 / n1 as f64 + sd2 * sd2 / n2 as f64).sqrt()
}
