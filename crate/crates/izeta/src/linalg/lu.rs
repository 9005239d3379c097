use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Dense complex square matrix, row-major.
#[derive(Debug, Clone)]
pub struct ComplexSquareMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexSquareMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParam("matrix dimension must be positive".into()));
        }
        Ok(ComplexSquareMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                let v = f(i, j);
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::InvalidParam(format!(
                        "non-finite matrix entry at ({i}, {j})"
                    )));
                }
                m.data[i * dim + j] = v;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }
}

/// Principal-value logarithm of a determinant: `log_modulus` is ln|det|,
/// `arg` the argument wrapped to (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_modulus: f64,
    pub arg: f64,
}

impl LogDet {
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.log_modulus, self.arg)
    }
}

fn wrap_angle(t: f64) -> f64 {
    let w = (t + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Log-determinant by partially pivoted LU, accumulated in log space so the
/// result stays finite where the determinant itself would overflow.
///
/// A pivot below eps * n * (largest entry magnitude) is reported as
/// `SingularMatrix` with the elimination step that found it.
pub fn complex_logdet(m: &ComplexSquareMatrix) -> Result<LogDet> {
    let n = m.dim;
    let mut a = m.data.clone();
    let max_abs = a.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let tol = f64::EPSILON * max_abs * n as f64;

    let mut log_mod = 0.0;
    let mut arg = 0.0;
    let mut flips = 0usize;
    for col in 0..n {
        let mut pr = col;
        let mut pv = a[col * n + col].norm();
        for r in col + 1..n {
            let v = a[r * n + col].norm();
            if v > pv {
                pv = v;
                pr = r;
            }
        }
        if pv <= tol {
            return Err(Error::SingularMatrix { pivot_index: col });
        }
        if pr != col {
            for k in 0..n {
                a.swap(col * n + k, pr * n + k);
            }
            flips += 1;
        }
        let p = a[col * n + col];
        log_mod += p.norm().ln();
        arg += p.arg();
        let (pivot_row, rest) = a[col * n..].split_at_mut(n);
        for r in rest.chunks_exact_mut(n) {
            let factor = r[col] / p;
            if factor != Complex64::new(0.0, 0.0) {
                for k in col + 1..n {
                    r[k] -= factor * pivot_row[k];
                }
            }
        }
    }
    if flips % 2 == 1 {
        arg += PI;
    }
    Ok(LogDet {
        log_modulus: log_mod,
        arg: wrap_angle(arg),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_relative_eq!(wrap_angle(3.0 * PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI);
        assert_relative_eq!(wrap_angle(PI + 0.1), -PI + 0.1, epsilon = 1e-12);
        assert_relative_eq!(wrap_angle(-7.0), -7.0 + 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn one_by_one() {
        let m = ComplexSquareMatrix::from_fn(1, |_, _| c(0.0, 2.0)).unwrap();
        let ld = complex_logdet(&m).unwrap();
        assert_relative_eq!(ld.log_modulus, 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(ld.arg, PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn diagonal_product() {
        let diag = [c(2.0, 0.0), c(0.0, -3.0), c(-1.0, 1.0)];
        let m = ComplexSquareMatrix::from_fn(3, |i, j| {
            if i == j {
                diag[i]
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        let ld = complex_logdet(&m).unwrap();
        let det: Complex64 = diag.iter().product();
        assert_relative_eq!(ld.log_modulus, det.norm().ln(), epsilon = 1e-14);
        assert_relative_eq!(ld.arg, det.arg(), epsilon = 1e-14);
    }

    #[test]
    fn two_by_two_known_det() {
        // det = (1+i)(3) - (2)(1-i) = 1 + 5i
        let rows = [[c(1.0, 1.0), c(2.0, 0.0)], [c(1.0, -1.0), c(3.0, 0.0)]];
        let m = ComplexSquareMatrix::from_fn(2, |i, j| rows[i][j]).unwrap();
        let ld = complex_logdet(&m).unwrap();
        let det = c(1.0, 5.0);
        assert_relative_eq!(ld.log_modulus, det.norm().ln(), epsilon = 1e-14);
        assert_relative_eq!(ld.arg, det.arg(), epsilon = 1e-14);
    }

    #[test]
    fn permutation_sign() {
        // odd permutation: det = -1
        let m = ComplexSquareMatrix::from_fn(3, |i, j| {
            let p = [1usize, 0, 2];
            if p[i] == j {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        let ld = complex_logdet(&m).unwrap();
        assert_relative_eq!(ld.log_modulus, 0.0, epsilon = 1e-15);
        assert_relative_eq!(ld.arg, PI, epsilon = 1e-15);
    }

    #[test]
    fn triangular_factor_oracle() {
        // M = L U with unit-free known diagonals; det M = prod(l_ii) prod(u_ii)
        let n = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut rnd = |scale: f64| c(rng.random_range(-scale..scale), rng.random_range(-scale..scale));
        let mut low = vec![c(0.0, 0.0); n * n];
        let mut up = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..i {
                low[i * n + j] = rnd(1.0);
                up[j * n + i] = rnd(1.0);
            }
            low[i * n + i] = rnd(2.0) + c(3.0, 0.0);
            up[i * n + i] = rnd(2.0) + c(3.0, 0.0);
        }
        let m = ComplexSquareMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| low[i * n + k] * up[k * n + j]).sum()
        })
        .unwrap();
        let ld = complex_logdet(&m).unwrap();
        let mut det = c(1.0, 0.0);
        for i in 0..n {
            det *= low[i * n + i] * up[i * n + i];
        }
        assert_relative_eq!(ld.log_modulus, det.norm().ln(), max_relative = 1e-12);
        assert_relative_eq!(ld.arg, det.arg(), epsilon = 1e-12);
    }

    #[test]
    fn scaling_law() {
        let n = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = ComplexSquareMatrix::from_fn(n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .unwrap();
        let scaled = ComplexSquareMatrix::from_fn(n, |i, j| base.get(i, j) * 2.0).unwrap();
        let a = complex_logdet(&base).unwrap();
        let b = complex_logdet(&scaled).unwrap();
        assert_relative_eq!(
            b.log_modulus - a.log_modulus,
            n as f64 * 2f64.ln(),
            epsilon = 1e-12
        );
        assert_relative_eq!(b.arg, a.arg, epsilon = 1e-12);
    }

    #[test]
    fn singular_reports_pivot() {
        let m = ComplexSquareMatrix::from_fn(3, |i, j| {
            // row 2 = row 0 + row 1
            let base = [[1.0, 2.0, 0.5], [0.0, 1.0, -1.0]];
            let v = match i {
                0 | 1 => base[i][j],
                _ => base[0][j] + base[1][j],
            };
            c(v, 0.0)
        })
        .unwrap();
        match complex_logdet(&m) {
            Err(Error::SingularMatrix { pivot_index }) => assert_eq!(pivot_index, 2),
            other => panic!("expected singular, got {other:?}"),
        }
        let zero = ComplexSquareMatrix::zeros(2).unwrap();
        assert!(matches!(
            complex_logdet(&zero),
            Err(Error::SingularMatrix { pivot_index: 0 })
        ));
    }

    #[test]
    fn log_space_survives_large_dimension() {
        // det = 3^200 overflows f64; its log must not
        let m = ComplexSquareMatrix::from_fn(200, |i, j| {
            if i == j {
                c(0.0, 3.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        let ld = complex_logdet(&m).unwrap();
        assert_relative_eq!(ld.log_modulus, 200.0 * 3f64.ln(), max_relative = 1e-14);
        // 200 quarter-turns = 50 full turns: argument 0
        assert_relative_eq!(ld.arg, 0.0, epsilon = 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn prop_row_swap_flips_sign_only(seed in 0u64..1 << 40) {
            let n = 5;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = ComplexSquareMatrix::from_fn(n, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }).unwrap();
            let swapped = ComplexSquareMatrix::from_fn(n, |i, j| {
                let r = match i { 0 => 1, 1 => 0, _ => i };
                m.get(r, j)
            }).unwrap();
            let a = complex_logdet(&m).unwrap();
            let b = complex_logdet(&swapped).unwrap();
            prop_assert!((a.log_modulus - b.log_modulus).abs() < 1e-10);
            let diff = super::wrap_angle(a.arg - b.arg).abs();
            prop_assert!((diff - PI).abs() < 1e-10);
        }
    }
}
