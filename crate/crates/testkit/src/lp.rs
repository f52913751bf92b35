//! Brute-force LP oracle: enumerate every vertex of
//! `{w : a_k·w >= b_k, lo <= w <= hi}` and keep the cheapest feasible one.

/// Returns `(objective, w)` of the best vertex, or `None` if no vertex is feasible.
pub fn vertex_enumeration(
    c: &[f64],
    rows: &[(Vec<f64>, f64)],
    lo: &[f64],
    hi: &[f64],
) -> Option<(f64, Vec<f64>)> {
    let n = c.len();
    let mut all: Vec<(Vec<f64>, f64)> = rows.to_vec();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        all.push((e.clone(), lo[j]));
        e[j] = -1.0;
        all.push((e, -hi[j]));
    }
    let m = all.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let mat: Vec<Vec<f64>> = idx.iter().map(|&i| all[i].0.clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| all[i].1).collect();
        if let Some(w) = solve_dense(mat, rhs) {
            let feasible = all
                .iter()
                .all(|(a, b)| dot(a, &w) >= b - 1e-9 * (1.0 + b.abs()));
            if feasible {
                let obj = dot(c, &w);
                if best.as_ref().is_none_or(|(o, _)| obj < *o) {
                    best = Some((obj, w));
                }
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for k in i + 1..n {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}
