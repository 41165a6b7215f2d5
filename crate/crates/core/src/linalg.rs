//! Dense symmetric linear algebra for small scatter matrices (d <= 50):
//! cyclic Jacobi eigendecomposition and Cholesky factorization.

use crate::error::{Error, Result};

const SYM_TOL: f64 = 1e-12;
const JACOBI_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-12;

/// Symmetric matrix stored dense row-major; construction symmetrizes the
/// input after checking the asymmetry is within tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat {
    n: usize,
    data: Vec<f64>,
}

impl SymMat {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("matrix dimension must be positive".into()));
        }
        if data.len() != n * n {
            return Err(Error::Domain(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        let scale = data.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1.0);
        let mut sym = data;
        for i in 0..n {
            for j in (i + 1)..n {
                let a = sym[i * n + j];
                let b = sym[j * n + i];
                if (a - b).abs() > SYM_TOL * scale {
                    return Err(Error::Domain(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                let avg = 0.5 * (a + b);
                sym[i * n + j] = avg;
                sym[j * n + i] = avg;
            }
        }
        Ok(SymMat { n, data: sym })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        SymMat { n, data }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut data = vec![0.0; n * n];
        for (i, &e) in entries.iter().enumerate() {
            data[i * n + i] = e;
        }
        SymMat { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    /// Eigendecomposition by cyclic Jacobi rotations. Fails if the
    /// off-diagonal norm does not fall below tolerance within the sweep cap.
    pub fn jacobi_eigen(&self) -> Result<Eigen> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut v = SymMat::identity(n).data;
        let scale = self
            .data
            .iter()
            .fold(0.0f64, |m, &x| m.max(x.abs()))
            .max(1.0);
        let tol = JACOBI_OFF_TOL * scale;

        let off_norm = |a: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    s += 2.0 * a[i * n + j] * a[i * n + j];
                }
            }
            s.sqrt()
        };

        let mut off = off_norm(&a);
        let mut sweeps = 0;
        while off > tol {
            if sweeps >= JACOBI_SWEEPS {
                return Err(Error::EigenFailure { sweeps, off });
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= tol / (n as f64) {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
            sweeps += 1;
            off = off_norm(&a);
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
        let values: Vec<f64> = order.iter().map(|&k| a[k * n + k]).collect();
        let vectors: Vec<Vec<f64>> = order
            .iter()
            .map(|&k| {
                let mut col: Vec<f64> = (0..n).map(|r| v[r * n + k]).collect();
                fix_sign(&mut col);
                col
            })
            .collect();
        Ok(Eigen { values, vectors })
    }

    /// Lower-triangular `L` with `L L^T = A` (row-major, upper entries zero).
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::Domain(format!(
                            "matrix is not positive definite (pivot {s:e} at {i})"
                        )));
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(l)
    }
}

/// Eigenpairs sorted by descending eigenvalue; `vectors[k]` is the unit
/// eigenvector for `values[k]`, sign fixed so its first nonzero entry is
/// positive (reproducible outputs).
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

fn fix_sign(v: &mut [f64]) {
    for &x in v.iter() {
        if x.abs() > 1e-12 {
            if x < 0.0 {
                for y in v.iter_mut() {
                    *y = -*y;
                }
            }
            return;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Unit vector in the direction of `a`; rejects (near-)zero input.
pub fn normalized(a: &[f64]) -> Result<Vec<f64>> {
    let n = norm(a);
    if !(n > 1e-300) || !n.is_finite() {
        return Err(Error::Domain(format!(
            "cannot normalize a vector of length {n:e}"
        )));
    }
    Ok(a.iter().map(|x| x / n).collect())
}
