//! Compressed sparse row matrices, just enough for symmetric FEM pencils.

use nalgebra::DMatrix;

/// Symmetric sparse matrix in CSR form (the full pattern is stored, not just
/// a triangle).
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl CsrMatrix {
    /// Build from unsorted (i, j, v) triplets; duplicate entries are summed.
    pub fn from_triplets(n: usize, triplets: &mut Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_counts = vec![0usize; n];
        let mut col = Vec::with_capacity(triplets.len());
        let mut val = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in triplets.iter() {
            debug_assert!(i < n && j < n);
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_counts[i] += 1;
                last = Some((i, j));
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + row_counts[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            col,
            val,
        }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col[a..b], &self.val[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let (cols, vals) = (
                &self.col[self.row_ptr[i]..self.row_ptr[i + 1]],
                &self.val[self.row_ptr[i]..self.row_ptr[i + 1]],
            );
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[i] = acc;
        }
    }

    pub fn mul_vec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// A + c B over the union pattern.
    pub fn add_scaled(&self, other: &CsrMatrix, c: f64) -> CsrMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..n {
            let (ca, va) = self.row(i);
            for (j, v) in ca.iter().zip(va) {
                triplets.push((i, *j, *v));
            }
            let (cb, vb) = other.row(i);
            for (j, v) in cb.iter().zip(vb) {
                triplets.push((i, *j, c * v));
            }
        }
        CsrMatrix::from_triplets(n, &mut triplets)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                m[(i, *j)] += v;
            }
        }
        m
    }

    /// Largest absolute asymmetry |A_ij - A_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(*j, i)).abs());
            }
        }
        worst
    }

    /// True if the pattern is tridiagonal (|i - j| <= 1 for every entry).
    pub fn is_tridiagonal(&self) -> bool {
        for i in 0..self.n {
            let (cols, _) = self.row(i);
            for &j in cols {
                if i.abs_diff(j) > 1 {
                    return false;
                }
            }
        }
        true
    }

    /// B^T A B where the columns of B are given as sparse vectors
    /// (index, value) pairs. Result is dense m x m.
    pub fn triple_product_sparse(&self, basis: &[Vec<(usize, f64)>]) -> DMatrix<f64> {
        let m = basis.len();
        let mut out = DMatrix::zeros(m, m);
        let mut work = vec![0.0f64; self.n];
        let mut touched: Vec<usize> = Vec::new();
        for (jcol, bj) in basis.iter().enumerate() {
            // work = A * b_j  (only rows reachable from b_j's support)
            for &(idx, v) in bj {
                let (cols, vals) = self.row(idx);
                for (c, av) in cols.iter().zip(vals) {
                    if work[*c] == 0.0 {
                        touched.push(*c);
                    }
                    // A symmetric: accumulate column product via row access
                    work[*c] += av * v;
                }
            }
            for (icol, bi) in basis.iter().enumerate() {
                let mut acc = 0.0;
                for &(idx, v) in bi {
                    acc += work[idx] * v;
                }
                out[(icol, jcol)] = acc;
            }
            for &t in &touched {
                work[t] = 0.0;
            }
            touched.clear();
        }
        // enforce exact symmetry against roundoff in the accumulation order
        for i in 0..m {
            for j in (i + 1)..m {
                let s = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }
}

/// Solve A x = b for symmetric positive definite tridiagonal A via LDL^T.
pub struct TridiagFactor {
    d: Vec<f64>,
    l: Vec<f64>, // subdiagonal multipliers
}

impl TridiagFactor {
    pub fn new(a: &CsrMatrix) -> Option<Self> {
        let n = a.n;
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let diag = a.get(i, i);
            let di = if i == 0 {
                diag
            } else {
                let li = a.get(i, i - 1) / d[i - 1];
                l[i - 1] = li;
                diag - li * li * d[i - 1]
            };
            if di <= 0.0 || !di.is_finite() {
                return None;
            }
            d[i] = di;
        }
        Some(TridiagFactor { d, l })
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.d.len();
        x.copy_from_slice(b);
        for i in 1..n {
            let li = self.l[i - 1];
            x[i] -= li * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let li = self.l[i];
            x[i] -= li * x[i + 1];
        }
    }
}

/// Jacobi-preconditioned conjugate gradient for SPD systems.
/// Returns the iteration count, or None if the tolerance was not reached.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Option<usize> {
    let n = a.n;
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d.max(1e-300)).collect();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Some(0);
    }
    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut zv: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, d)| ri * d).collect();
    let mut p = zv.clone();
    let mut rz: f64 = r.iter().zip(&zv).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= rel_tol * b_norm {
            return Some(it);
        }
        a.mul_vec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            // not positive definite along p
            return None;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            zv[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&zv).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = zv[i] + beta * p[i];
        }
    }
    let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r_norm <= rel_tol * b_norm {
        Some(max_iter)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &mut t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let mut t = vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 0.5), (0, 1, 0.5)];
        let a = CsrMatrix::from_triplets(2, &mut t);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(0, 1), 0.5);
        assert_eq!(a.symmetry_defect(), 0.0);
    }

    #[test]
    fn cg_solves_spd_system() {
        let a = laplace_1d(50);
        let b = vec![1.0; 50];
        let mut x = vec![0.0; 50];
        let its = pcg(&a, &b, &mut x, 1e-12, 10_000).expect("cg converged");
        assert!(its <= 10_000);
        let mut ax = vec![0.0; 50];
        a.mul_vec(&x, &mut ax);
        for i in 0..50 {
            assert!((ax[i] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tridiag_factor_matches_cg() {
        let a = laplace_1d(64);
        assert!(a.is_tridiagonal());
        let b: Vec<f64> = (0..64).map(|i| (i as f64).sin()).collect();
        let f = TridiagFactor::new(&a).expect("spd");
        let mut x = vec![0.0; 64];
        f.solve(&b, &mut x);
        let mut ax = vec![0.0; 64];
        a.mul_vec(&x, &mut ax);
        for i in 0..64 {
            assert!((ax[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn triple_product_matches_dense() {
        let a = laplace_1d(10);
        // two sparse basis vectors
        let basis = vec![vec![(0usize, 1.0), (5, 2.0)], vec![(3usize, -1.0), (4, 1.0)]];
        let red = a.triple_product_sparse(&basis);
        let ad = a.to_dense();
        let mut b = DMatrix::zeros(10, 2);
        b[(0, 0)] = 1.0;
        b[(5, 0)] = 2.0;
        b[(3, 1)] = -1.0;
        b[(4, 1)] = 1.0;
        let expect = b.transpose() * ad * b;
        assert!((red - expect).abs().max() < 1e-12);
    }
}
