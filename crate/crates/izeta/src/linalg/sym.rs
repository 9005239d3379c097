use crate::{Error, Result};

/// Dense real symmetric matrix, full square row-major storage. Mutators keep
/// the two triangles in sync; the eigensolver reads only the lower one.
#[derive(Debug, Clone)]
pub struct SymMatrixReal {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrixReal {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParam("matrix dimension must be positive".into()));
        }
        Ok(SymMatrixReal {
            dim,
            data: vec![0.0; dim * dim],
        })
    }

    /// Builds from the lower triangle of `f(i, j)`, `j <= i`, mirroring the
    /// upper triangle. Rejects non-finite entries.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::InvalidParam(format!(
                        "non-finite matrix entry at ({i}, {j})"
                    )));
                }
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] += v;
        if i != j {
            self.data[j * self.dim + i] += v;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn ensure_finite(&self) -> Result<()> {
        if let Some(pos) = self.data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "non-finite matrix entry at ({}, {})",
                pos / self.dim,
                pos % self.dim
            )));
        }
        Ok(())
    }
}

/// Spectral decomposition of a symmetric matrix: eigenvalues in ascending
/// order, matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SymEigen {
    dim: usize,
    pub values: Vec<f64>,
    vectors: Vec<f64>,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Eigenvector paired with `values[j]`, unit length.
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }
}

const MAX_QL_ITERS: usize = 50;

/// Full spectral decomposition by Householder tridiagonalization and
/// implicit-shift QL. Reports `NoConvergence` with the offending eigenvalue
/// index if a rotation sweep stalls; in exact arithmetic QL needs only a
/// handful of sweeps per eigenvalue.
pub fn sym_eigen(m: &SymMatrixReal) -> Result<SymEigen> {
    m.ensure_finite()?;
    let n = m.dim;
    let mut a = m.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut hs = vec![0.0; n];
    tridiagonalize(&mut a, n, &mut d, &mut e, &mut hs);
    accumulate_q_transpose(&mut a, n, &hs);
    ql_implicit(&mut d, &mut e, n, Some(&mut a))?;

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&p, &q| d[p].total_cmp(&d[q]));
    let values: Vec<f64> = idx.iter().map(|&j| d[j]).collect();
    let mut vectors = vec![0.0; n * n];
    for (r, &j) in idx.iter().enumerate() {
        vectors[r * n..(r + 1) * n].copy_from_slice(&a[j * n..(j + 1) * n]);
    }
    Ok(SymEigen {
        dim: n,
        values,
        vectors,
    })
}

/// Eigenvalues only, ascending. Skips the transform accumulation, so the
/// iteration after tridiagonalization is quadratic rather than cubic.
pub fn sym_eigenvalues(m: &SymMatrixReal) -> Result<Vec<f64>> {
    m.ensure_finite()?;
    let n = m.dim;
    let mut a = m.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut hs = vec![0.0; n];
    tridiagonalize(&mut a, n, &mut d, &mut e, &mut hs);
    ql_implicit(&mut d, &mut e, n, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Householder reduction to tridiagonal form, lower triangle only.
///
/// On return `d` holds the diagonal, `e[1..]` the subdiagonal (`e[0] = 0`),
/// row `i` of `a` the scaled reflector of stage `i` wherever `hs[i] > 0`.
/// All inner loops run over contiguous row slices.
fn tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], hs: &mut [f64]) {
    let mut p = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        if l == 0 {
            e[i] = a[i * n];
            hs[i] = 0.0;
            continue;
        }
        let (head, tail) = a.split_at_mut(i * n);
        let u = &mut tail[..=l];
        let scale: f64 = u.iter().map(|x| x.abs()).sum();
        if scale == 0.0 {
            // row already reduced; subdiagonal entry is whatever sits there
            e[i] = u[l];
            hs[i] = 0.0;
            continue;
        }
        let mut h = 0.0;
        for x in u.iter_mut() {
            *x /= scale;
            h += *x * *x;
        }
        let f = u[l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        u[l] = f - g;
        hs[i] = h;

        // p = A u restricted to the leading block, two fused contiguous
        // passes per row instead of a strided column walk
        let p = &mut p[..=l];
        p.fill(0.0);
        for j in 0..=l {
            let row = &head[j * n..j * n + j + 1];
            let uj = u[j];
            let mut dot = 0.0;
            for k in 0..j {
                dot += row[k] * u[k];
                p[k] += row[k] * uj;
            }
            p[j] += dot + row[j] * uj;
        }

        // w = p/h - (u'p / 2h^2) u, then rank-two update A -= u w' + w u'
        let mut f = 0.0;
        for (pk, uk) in p.iter_mut().zip(u.iter()) {
            *pk /= h;
            f += *pk * *uk;
        }
        let hh = f / (h + h);
        for (pk, uk) in p.iter_mut().zip(u.iter()) {
            *pk -= hh * *uk;
        }
        for j in 0..=l {
            let uj = u[j];
            let wj = p[j];
            let row = &mut head[j * n..j * n + j + 1];
            for k in 0..=j {
                row[k] -= uj * p[k] + wj * u[k];
            }
        }
    }
    e[0] = 0.0;
    if n > 0 {
        hs[0] = 0.0;
    }
    for j in 0..n {
        d[j] = a[j * n + j];
    }
}

/// Overwrites `a` with the transpose of the accumulated Householder product:
/// row r ends up holding the r-th transform row, so later rotation sweeps
/// touch two contiguous rows at a time.
///
/// Stage reflectors are consumed ascending; the stage-i reflector lives in
/// row i, which the growing product block reaches only after stage i has been
/// applied, so the accumulation is safely in place.
fn accumulate_q_transpose(a: &mut [f64], n: usize, hs: &[f64]) {
    a[0] = 1.0;
    for i in 2..n {
        // extend the product block with a unit row and column at index i-1
        let ri = (i - 1) * n;
        for k in &mut a[ri..ri + i - 1] {
            *k = 0.0;
        }
        a[ri + i - 1] = 1.0;
        for r in 0..i - 1 {
            a[r * n + i - 1] = 0.0;
        }
        if hs[i] > 0.0 {
            let h = hs[i];
            let (head, tail) = a.split_at_mut(i * n);
            let u = &tail[..i];
            for r in 0..i {
                let row = &mut head[r * n..r * n + i];
                let mut s = 0.0;
                for (rk, uk) in row.iter().zip(u) {
                    s += rk * uk;
                }
                let s = s / h;
                if s != 0.0 {
                    for (rk, uk) in row.iter_mut().zip(u) {
                        *rk -= s * uk;
                    }
                }
            }
        }
    }
    if n > 1 {
        let rn = (n - 1) * n;
        for k in &mut a[rn..rn + n - 1] {
            *k = 0.0;
        }
        a[rn + n - 1] = 1.0;
        for r in 0..n - 1 {
            a[r * n + n - 1] = 0.0;
        }
    }
}

/// Implicit-shift QL iteration on the tridiagonal (d, e), rotations applied
/// to rows of `m` when present. Ported from the classic Handbook routine;
/// the only change is the hard sweep cap per eigenvalue.
fn ql_implicit(d: &mut [f64], e: &mut [f64], n: usize, mut m: Option<&mut [f64]>) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f_acc = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut seg = l;
        while seg < n && e[seg].abs() > eps * tst1 {
            seg += 1;
        }
        if seg > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERS {
                    return Err(Error::NoConvergence {
                        index: l,
                        sweeps: iter,
                    });
                }

                // shift from the 2x2 leading corner
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f_acc += h;

                // chase the bulge from seg down to l
                p = d[seg];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..seg).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let hh = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = hh + s * (c * g + s * d[i]);
                    if let Some(mat) = m.as_deref_mut() {
                        let (top, bot) = mat.split_at_mut((i + 1) * n);
                        let row_i = &mut top[i * n..];
                        let row_j = &mut bot[..n];
                        for (xi, xj) in row_i.iter_mut().zip(row_j.iter_mut()) {
                            let hv = *xj;
                            *xj = s * *xi + c * hv;
                            *xi = c * *xi - s * hv;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f_acc;
        e[l] = 0.0;
    }
    Ok(())
}
