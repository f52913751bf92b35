//! Aligned text tables and the quadratic trend fit.

use nalgebra::{DMatrix, DVector};

/// Left-aligns the first column and right-aligns the rest.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(k, (c, &w))| if k == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(headers.to_vec());
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct QuadraticFit {
    /// `c0 + c1·n + c2·n²`.
    pub coefficients: [f64; 3],
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

/// Least-squares quadratic through `(x, y)`; `None` with fewer than three points.
pub fn fit_quadratic(x: &[f64], y: &[f64]) -> Option<QuadraticFit> {
    if x.len() < 3 || x.len() != y.len() {
        return None;
    }
    let a = DMatrix::from_fn(x.len(), 3, |i, j| x[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let c = a.clone().svd(true, true).solve(&b, 1e-12).ok()?;
    let fitted = &a * &c;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(y, f)| y - f).collect();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let total: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if total > 0.0 { 1.0 - rss / total } else { 1.0 };
    Some(QuadraticFit {
        coefficients: [c[0], c[1], c[2]],
        r_squared,
        residuals,
    })
}

pub fn fmt_num(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e6) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}
