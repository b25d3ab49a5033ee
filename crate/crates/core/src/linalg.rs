//! Small dense and banded kernels shared by the solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Sign and log-magnitude of the determinant after scaling each row to unit
/// 2-norm. `None` when a pivot vanishes.
pub(crate) fn equilibrated_log_det(m: &DMatrix<f64>) -> Option<(f64, f64)> {
    let mut a = m.clone();
    for mut row in a.row_iter_mut() {
        let norm = row.norm();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        row /= norm;
    }
    let lu = a.lu();
    let mut sign: f64 = lu.p().determinant();
    let mut log_abs = 0.0;
    let u = lu.u();
    for i in 0..u.nrows() {
        let p = u[(i, i)];
        if p == 0.0 || !p.is_finite() {
            return None;
        }
        if p < 0.0 {
            sign = -sign;
        }
        log_abs += p.abs().ln();
    }
    Some((sign, log_abs))
}

/// Right singular vector of the smallest singular value, together with the
/// two smallest singular values in ascending order.
pub(crate) fn null_vector(m: &DMatrix<f64>) -> Result<(DVector<f64>, f64, f64)> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::NoConvergence {
        what: "singular value decomposition".into(),
        iterations: 0,
    })?;
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&x, &y| s[x].total_cmp(&s[y]));
    let smallest = order[0];
    let second = order.get(1).map(|&i| s[i]).unwrap_or(f64::INFINITY);
    let v = vt.row(smallest).transpose();
    Ok((v, s[smallest], second))
}

/// Lower band of a symmetric positive definite matrix with half-bandwidth
/// `bw`. Row `i` stores `A[i][i-bw..=i]` in `data[i*(bw+1)..]`, with the
/// diagonal last.
#[derive(Debug, Clone)]
pub(crate) struct BandedSpd {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Sets `A[i][j] = A[j][i] = v` for `j <= i`, `i - j <= bw`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i && i - j <= self.bw);
        self.data[i * (self.bw + 1) + self.bw - (i - j)] = v;
    }

    #[cfg(test)]
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let w = self.bw + 1;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let row = &self.data[i * w..(i + 1) * w];
            let j0 = i.saturating_sub(self.bw);
            let off = self.bw - (i - j0);
            let mut acc = row[self.bw] * x[i];
            for (t, j) in (j0..i).enumerate() {
                let a = row[off + t];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc;
        }
    }

    /// In-place Cholesky factorization `A - shift I = L L^T`.
    pub fn cholesky(mut self, shift: f64) -> Result<BandCholesky> {
        let w = self.bw + 1;
        let bw = self.bw;
        for i in 0..self.n {
            self.data[i * w + bw] -= shift;
        }
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut sum = self.data[i * w + bw - (i - j)];
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                for k in k0..j {
                    sum -= self.data[ri + k] * self.data[rj + k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::Domain(format!(
                            "banded matrix is not positive definite after shift {shift}"
                        )));
                    }
                    self.data[i * w + bw] = sum.sqrt();
                } else {
                    self.data[i * w + bw - (i - j)] = sum / self.data[j * w + bw];
                }
            }
        }
        Ok(BandCholesky { band: self })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    band: BandedSpd,
}

impl BandCholesky {
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let bw = self.band.bw;
        let w = bw + 1;
        let d = &self.band.data;
        let n = self.band.n;
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let ri = i * w + bw - i;
            let mut s = x[i];
            for k in j0..i {
                s -= d[ri + k] * x[k];
            }
            x[i] = s / d[i * w + bw];
        }
        for i in (0..n).rev() {
            x[i] /= d[i * w + bw];
            let xi = x[i];
            let j0 = i.saturating_sub(bw);
            let ri = i * w + bw - i;
            for k in j0..i {
                x[k] -= d[ri + k] * xi;
            }
        }
    }
}

/// Largest eigenvalues of the symmetric operator `op` by Lanczos with full
/// reorthogonalization. Returns `(ritz_value, residual_bound)` in descending
/// order; at most `want` pairs.
pub(crate) fn lanczos_largest<F>(
    n: usize,
    want: usize,
    max_steps: usize,
    rel_tol: f64,
    mut op: F,
) -> Vec<(f64, f64)>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let steps_cap = max_steps.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps_cap);
    let mut alpha = Vec::with_capacity(steps_cap);
    let mut beta: Vec<f64> = Vec::with_capacity(steps_cap);

    let mut q: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i.wrapping_mul(7919) % 1009) as f64) / 1009.0)
        .collect();
    normalize(&mut q);
    let mut w = vec![0.0; n];
    let mut result = Vec::new();

    for step in 0..steps_cap {
        op(&q, &mut w);
        let a = dot(&q, &w);
        axpy(-a, &q, &mut w);
        if let Some(prev) = basis.last() {
            axpy(-beta[beta.len() - 1], prev, &mut w);
        }
        basis.push(q.clone());
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        alpha.push(a);
        let b = norm(&w);

        let k = alpha.len();
        let check = k >= want && (k % 5 == 0 || k == steps_cap || b < 1e-14);
        if check {
            let ritz = tridiagonal_ritz(&alpha, &beta, b);
            let done = ritz
                .iter()
                .take(want)
                .all(|&(theta, res)| res <= rel_tol * theta.abs());
            result = ritz.into_iter().take(want).collect();
            if done || b < 1e-14 || step + 1 == steps_cap {
                break;
            }
        }
        beta.push(b);
        q.iter_mut().zip(&w).for_each(|(qi, wi)| *qi = wi / b);
    }
    result
}

fn tridiagonal_ritz(alpha: &[f64], beta: &[f64], next_beta: f64) -> Vec<(f64, f64)> {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let last = eig.eigenvectors[(k - 1, i)];
            (eig.eigenvalues[i], (next_beta * last).abs())
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    pairs
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a);
    a.iter_mut().for_each(|v| *v /= n);
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Least-squares coefficients of `y ~ sum_k c_k * basis_k(x)`.
pub(crate) fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    let p = rows.first().map(|r| r.len()).unwrap_or(0);
    if n < p || p == 0 {
        return Err(Error::Fit(format!("{n} samples for {p} parameters")));
    }
    let a = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::Fit(e.to_string()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite coefficients".into()));
    }
    Ok(x.iter().copied().collect())
}

/// Slope and intercept of the straight-line fit `y ~ slope * x + intercept`.
pub(crate) fn line_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![v, 1.0]).collect();
    let c = least_squares(&rows, y)?;
    Ok((c[0], c[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_det_matches_dense() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, -3.0]);
        let (sign, log_abs) = equilibrated_log_det(&m).unwrap();
        let scale: f64 = m.row_iter().map(|r| r.norm()).product();
        assert_relative_eq!(sign * log_abs.exp() * scale, m.determinant(), epsilon = 1e-12);
        assert!(equilibrated_log_det(&DMatrix::zeros(2, 2)).is_none());
    }

    #[test]
    fn band_cholesky_solves() {
        let n = 40;
        let bw = 3;
        let mut a = BandedSpd::zeros(n, bw);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let v = if i == j { 10.0 + i as f64 * 0.1 } else { -1.0 / (1 + i - j) as f64 };
                a.set(i, j, v);
                dense[(i, j)] = v;
                dense[(j, i)] = v;
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; n];
        a.matvec(&x, &mut y);
        let yd = &dense * DVector::from_column_slice(&x);
        for i in 0..n {
            assert_relative_eq!(y[i], yd[i], epsilon = 1e-12);
        }
        let chol = a.cholesky(0.0).unwrap();
        chol.solve_in_place(&mut y);
        for i in 0..n {
            assert_relative_eq!(y[i], x[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn lanczos_finds_top_eigenvalues() {
        let n = 300;
        let diag: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let top = lanczos_largest(n, 3, 200, 1e-10, |x, y| {
            for i in 0..n {
                y[i] = diag[i] * x[i];
            }
        });
        assert_eq!(top.len(), 3);
        assert_relative_eq!(top[0].0, 1.0, epsilon = 1e-9);
        assert_relative_eq!(top[1].0, 0.5, epsilon = 1e-9);
        assert_relative_eq!(top[2].0, 1.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn line_fit_exact() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, c) = line_fit(&x, &y).unwrap();
        assert_relative_eq!(s, 2.5, epsilon = 1e-12);
        assert_relative_eq!(c, -1.0, epsilon = 1e-12);
        assert!(line_fit(&[1.0], &[1.0]).is_err());
    }
}
