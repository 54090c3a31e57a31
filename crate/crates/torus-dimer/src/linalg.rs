//! Dense matrix helpers sized for exact small-system work: LU determinant,
//! Pfaffian of antisymmetric matrices, and a symmetric eigensolver
//! (Householder tridiagonalization followed by implicit QL).

use crate::error::{numerical, precondition, Result};
use crate::scalar::Scalar;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(precondition("linalg", "matrix rows must all have length n"));
        }
        Ok(Matrix { n, data: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = self.data[i * self.n + j] + v;
    }

    pub fn is_antisymmetric(&self, tol: T) -> bool {
        (0..self.n).all(|i| {
            (i..self.n).all(|j| (self.get(i, j) + self.get(j, i)).abs() <= tol)
        })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.n {
            self.data.swap(a * self.n + j, b * self.n + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.n {
            self.data.swap(i * self.n + a, i * self.n + b);
        }
    }
}

/// Determinant by LU with partial pivoting.
pub fn determinant<T: Scalar>(m: &Matrix<T>) -> T {
    let n = m.dim();
    if n == 0 {
        return T::one();
    }
    let mut a = m.clone();
    let mut det = T::one();
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if a.get(i, k).abs() > a.get(piv, k).abs() {
                piv = i;
            }
        }
        if a.get(piv, k) == T::zero() {
            return T::zero();
        }
        if piv != k {
            a.swap_rows(piv, k);
            det = -det;
        }
        let pivot = a.get(k, k);
        det = det * pivot;
        for i in k + 1..n {
            let f = a.get(i, k) / pivot;
            if f == T::zero() {
                continue;
            }
            for j in k + 1..n {
                let v = a.get(i, j) - f * a.get(k, j);
                a.set(i, j, v);
            }
        }
    }
    det
}

/// Pfaffian of an antisymmetric matrix of even dimension, by skew Gaussian
/// elimination with row-and-column pivoting.
pub fn pfaffian<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let n = m.dim();
    if n % 2 != 0 {
        return Err(precondition("linalg", "pfaffian needs even dimension"));
    }
    if n == 0 {
        return Ok(T::one());
    }
    let mut a = m.clone();
    let mut pf = T::one();
    for k in (0..n - 1).step_by(2) {
        let mut piv = k + 1;
        for i in k + 2..n {
            if a.get(i, k).abs() > a.get(piv, k).abs() {
                piv = i;
            }
        }
        if a.get(piv, k) == T::zero() {
            return Ok(T::zero());
        }
        if piv != k + 1 {
            a.swap_rows(piv, k + 1);
            a.swap_cols(piv, k + 1);
            pf = -pf;
        }
        let pivot = a.get(k, k + 1);
        pf = pf * pivot;
        // Schur update of the trailing block: eliminating the k, k+1 pair
        // subtracts (mu_i nu_j - mu_j nu_i) / pivot with mu the k-th row and
        // nu the (k+1)-th row.
        for i in k + 2..n {
            let mu_i = a.get(k, i);
            let nu_i = a.get(k + 1, i);
            for j in i + 1..n {
                let mu_j = a.get(k, j);
                let nu_j = a.get(k + 1, j);
                let delta = (mu_i * nu_j - mu_j * nu_i) / pivot;
                let v = a.get(i, j) - delta;
                a.set(i, j, v);
                a.set(j, i, -v);
            }
        }
    }
    Ok(pf)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// symmetric matrix.
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

pub fn symmetric_eigen<T: Scalar>(m: &Matrix<T>) -> Result<SymmetricEigen<T>> {
    let n = m.dim();
    if n == 0 {
        return Ok(SymmetricEigen { values: Vec::new(), vectors: Matrix::zeros(0) });
    }
    let mut z = m.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut z, &mut d, &mut e);
    tql2(&mut z, &mut d, &mut e)?;
    // Sort ascending, permuting vector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("eigenvalues are finite"));
    let values: Vec<T> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Matrix::zeros(n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, new_j, z.get(i, old_j));
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Householder reduction of a symmetric matrix to tridiagonal form with
/// accumulated transformations.
fn tred2<T: Scalar>(a: &mut Matrix<T>, d: &mut [T], e: &mut [T]) {
    let n = a.dim();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let mut scale = T::zero();
            for k in 0..=l {
                scale = scale + a.get(i, k).abs();
            }
            if scale == T::zero() {
                e[i] = a.get(i, l);
            } else {
                for k in 0..=l {
                    let v = a.get(i, k) / scale;
                    a.set(i, k, v);
                    h = h + v * v;
                }
                let f = a.get(i, l);
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h = h - f * g;
                a.set(i, l, f - g);
                let mut f_acc = T::zero();
                for j in 0..=l {
                    a.set(j, i, a.get(i, j) / h);
                    let mut g_acc = T::zero();
                    for k in 0..=j {
                        g_acc = g_acc + a.get(j, k) * a.get(i, k);
                    }
                    for k in j + 1..=l {
                        g_acc = g_acc + a.get(k, j) * a.get(i, k);
                    }
                    e[j] = g_acc / h;
                    f_acc = f_acc + e[j] * a.get(i, j);
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let fj = a.get(i, j);
                    let gj = e[j] - hh * fj;
                    e[j] = gj;
                    for k in 0..=j {
                        let v = a.get(j, k) - fj * e[k] - gj * a.get(i, k);
                        a.set(j, k, v);
                    }
                }
            }
        } else {
            e[i] = a.get(i, l);
        }
        d[i] = h;
    }
    d[0] = T::zero();
    e[0] = T::zero();
    for i in 0..n {
        if d[i] != T::zero() {
            for j in 0..i {
                let mut g = T::zero();
                for k in 0..i {
                    g = g + a.get(i, k) * a.get(k, j);
                }
                for k in 0..i {
                    let v = a.get(k, j) - g * a.get(k, i);
                    a.set(k, j, v);
                }
            }
        }
        d[i] = a.get(i, i);
        a.set(i, i, T::one());
        for j in 0..i {
            a.set(j, i, T::zero());
            a.set(i, j, T::zero());
        }
    }
}

/// QL with implicit shifts on a tridiagonal matrix, rotating the accumulated
/// transformation matrix into the eigenvector matrix.
fn tql2<T: Scalar>(z: &mut Matrix<T>, d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = z.dim();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(numerical("linalg", "eigen iteration failed to converge"));
            }
            let two = T::of(2.0);
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let sign_r = if g >= T::zero() { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z.get(k, i + 1);
                    z.set(k, i + 1, s * z.get(k, i) + c * f);
                    z.set(k, i, c * z.get(k, i) - s * f);
                }
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}
