//! Exact linear algebra over the rational backend: row reduction, rank,
//! nullspace. Matrices here are small (at most a few hundred columns from
//! monomial bases), so dense fraction-free-ish Gaussian elimination with
//! largest-pivot selection is plenty.

use crate::scalar::Scalar;

/// Dense matrix as rows of equal length.
#[derive(Clone, Debug)]
pub struct Mat<S> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Reduced row echelon form in place; returns pivot column indices.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            // pick the largest-magnitude pivot for float stability; for
            // rationals any nonzero pivot is exact and this just bounds blowup
            let mut best: Option<(usize, f64)> = None;
            for r in row..self.rows {
                let v = self.get(r, col);
                if !v.is_zero() {
                    let mag = v.abs_f64();
                    if best.map_or(true, |(_, m)| mag > m) {
                        best = Some((r, mag));
                    }
                }
            }
            let Some((pr, _)) = best else { continue };
            self.swap_rows(row, pr);
            let inv = S::one() / self.get(row, col).clone();
            for c in col..self.cols {
                let v = self.get(row, c).clone() * inv.clone();
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r != row && !self.get(r, col).is_zero() {
                    let f = self.get(r, col).clone();
                    for c in col..self.cols {
                        let v = self.get(r, c).clone() - f.clone() * self.get(row, c).clone();
                        self.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    /// Basis of the right nullspace, one column vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<S>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![S::zero(); self.cols];
            v[free] = S::one();
            for (prow, &pcol) in pivots.iter().enumerate() {
                v[pcol] = -m.get(prow, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = S::zero();
                for c in 0..self.cols {
                    let a = self.get(r, c);
                    if !a.is_zero() && !v[c].is_zero() {
                        acc = acc + a.clone() * v[c].clone();
                    }
                }
                acc
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// f64 frame helpers
// ---------------------------------------------------------------------------

use crate::forms::VecN;
use rand::Rng;

/// Gram-Schmidt orthonormalization; `None` when the input is linearly
/// dependent within `eps`.
pub fn gram_schmidt(vectors: &[VecN<f64>], eps: f64) -> Option<Vec<VecN<f64>>> {
    let mut out: Vec<VecN<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let c = w.dot(u);
            w = w.sub(&u.scale(&c));
        }
        let n = w.dot(&w).sqrt();
        if n < eps {
            return None;
        }
        out.push(w.scale(&(1.0 / n)));
    }
    Some(out)
}

/// Extend an orthonormal family to an orthonormal basis of ℝⁿ; returns the
/// complementary vectors, built deterministically from the standard basis.
pub fn orthonormal_complement(frame: &[VecN<f64>], dim: usize) -> Vec<VecN<f64>> {
    let mut basis: Vec<VecN<f64>> = frame.to_vec();
    let mut complement = Vec::new();
    for i in 1..=dim {
        if basis.len() == dim {
            break;
        }
        let cand: VecN<f64> = VecN::basis(dim, i);
        let mut w = cand.clone();
        for u in &basis {
            let c = w.dot(u);
            w = w.sub(&u.scale(&c));
        }
        let n = w.dot(&w).sqrt();
        if n > 1e-8 {
            let unit = w.scale(&(1.0 / n));
            basis.push(unit.clone());
            complement.push(unit);
        }
    }
    complement
}

/// `k` random orthonormal vectors in ℝⁿ from Gaussian sampling.
pub fn random_orthonormal<R: Rng>(rng: &mut R, dim: usize, k: usize) -> Vec<VecN<f64>> {
    loop {
        let raw: Vec<VecN<f64>> = (0..k)
            .map(|_| {
                VecN::from_f64(
                    &(0..dim)
                        .map(|_| {
                            // Box-Muller gaussian from two uniforms
                            let u1: f64 = rng.gen_range(1e-12..1.0);
                            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                            (-2.0 * u1.ln()).sqrt() * u2.cos()
                        })
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        if let Some(on) = gram_schmidt(&raw, 1e-6) {
            return on;
        }
    }
}

/// Apply a square matrix (rows) to a vector.
pub fn apply_matrix(m: &[Vec<f64>], v: &VecN<f64>) -> VecN<f64> {
    let comps: Vec<f64> = m
        .iter()
        .map(|row| row.iter().zip(v.components()).map(|(a, b)| a * b).sum())
        .collect();
    VecN::from_f64(&comps)
}
