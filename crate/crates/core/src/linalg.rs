//! Small dense symmetric-matrix algebra.
//!
//! Everything here works on row-major `d x d` storage and factorizes with
//! Cholesky. The matrices in this crate are covariance-sized (d is the data
//! dimension), so no blocking or BLAS is involved.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot floor below which a matrix is treated as singular.
const PIVOT_TOLERANCE: f64 = 1e-12;

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, averaging `a[i][j]` and
    /// `a[j][i]` so the result is exactly symmetric.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let mut data = entries.to_vec();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (entries[i * dim + j] + entries[j * dim + i]);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut flat = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_row_major(dim, &flat)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for (i, v) in diag.iter().enumerate() {
            data[i * dim + i] = *v;
        }
        Self { dim, data }
    }

    /// Outer product `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        let dim = v.len();
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = v[i] * v[j];
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Plain (non-symmetric-aware) matrix product, returned row-major.
    pub fn matmul(&self, other: &Self) -> Result<Vec<f64>> {
        self.check_dim(other.dim)?;
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                for j in 0..d {
                    out[i * d + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim == other {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other,
            })
        }
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        cholesky(self)
    }

    pub fn determinant(&self) -> Result<f64> {
        determinant(self)
    }

    pub fn inverse(&self) -> Result<SymMatrix> {
        inverse(self)
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.lower[i * self.dim + j]
        }
    }

    /// Full row-major copy of `L` including the zero upper triangle.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.lower.clone()
    }

    /// `ln |A| = 2 Σ ln L_ii`.
    pub fn log_determinant(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.lower[i * self.dim + i].ln()).sum::<f64>()
    }

    /// Solves `L z = b` in place.
    #[inline]
    pub fn forward_solve(&self, b: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let row = &self.lower[i * d..i * d + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(l, z)| l * z).sum();
            b[i] = (b[i] - s) / self.lower[i * d + i];
        }
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn backward_solve(&self, b: &mut [f64]) {
        let d = self.dim;
        for i in (0..d).rev() {
            let mut s = b[i];
            for k in (i + 1)..d {
                s -= self.lower[k * d + i] * b[k];
            }
            b[i] = s / self.lower[i * d + i];
        }
    }

    /// Squared Mahalanobis norm `xᵀ A⁻¹ x`, using `scratch` as workspace.
    #[inline]
    pub fn quad_form(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        scratch.copy_from_slice(x);
        self.forward_solve(scratch);
        scratch.iter().map(|z| z * z).sum()
    }

    /// `L z`, used to colour standard-normal draws.
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|i| (0..=i).map(|k| self.lower[i * d + k] * z[k]).sum())
            .collect()
    }
}

pub fn cholesky(m: &SymMatrix) -> Result<Cholesky> {
    let d = m.dim;
    let max_diag = (0..d).map(|i| m.get(i, i).abs()).fold(0.0, f64::max);
    if !(max_diag.is_finite()) || max_diag <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let floor = PIVOT_TOLERANCE * max_diag;
    let mut lower = vec![0.0; d * d];
    for j in 0..d {
        let mut pivot = m.get(j, j);
        for k in 0..j {
            pivot -= lower[j * d + k] * lower[j * d + k];
        }
        if !(pivot > floor) {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = pivot.sqrt();
        lower[j * d + j] = ljj;
        for i in (j + 1)..d {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= lower[i * d + k] * lower[j * d + k];
            }
            lower[i * d + j] = s / ljj;
        }
    }
    Ok(Cholesky { dim: d, lower })
}

/// Product of squared Cholesky pivots.
pub fn determinant(m: &SymMatrix) -> Result<f64> {
    let l = cholesky(m)?;
    Ok((0..l.dim).map(|i| l.get(i, i) * l.get(i, i)).product())
}

pub fn inverse(m: &SymMatrix) -> Result<SymMatrix> {
    let l = cholesky(m)?;
    let d = l.dim;
    let mut out = vec![0.0; d * d];
    let mut col = vec![0.0; d];
    for j in 0..d {
        col.iter_mut().for_each(|v| *v = 0.0);
        col[j] = 1.0;
        l.forward_solve(&mut col);
        l.backward_solve(&mut col);
        for i in 0..d {
            out[i * d + j] = col[i];
        }
    }
    SymMatrix::from_row_major(d, &out)
}

/// `R = diag(C)^{-1/2} C diag(C)^{-1/2}`.
pub fn correlation_from_covariance(c: &SymMatrix) -> Result<SymMatrix> {
    let d = c.dim;
    let mut scale = Vec::with_capacity(d);
    for i in 0..d {
        let v = c.get(i, i);
        if !(v > 0.0) {
            return Err(Error::ZeroVariance(i));
        }
        scale.push(v.sqrt());
    }
    let mut r = SymMatrix::zeros(d);
    for i in 0..d {
        r.set(i, i, 1.0);
        for j in (i + 1)..d {
            let rho = (c.get(i, j) / (scale[i] * scale[j])).clamp(-1.0, 1.0);
            r.set(i, j, rho);
        }
    }
    Ok(r)
}

/// `Σ = diag(σ²)^{1/2} R diag(σ²)^{1/2}`.
pub fn covariance_from_correlation(r: &SymMatrix, sigma_sq: &[f64]) -> Result<SymMatrix> {
    let d = r.dim;
    if sigma_sq.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: sigma_sq.len(),
        });
    }
    let sd: Vec<f64> = sigma_sq.iter().map(|v| v.sqrt()).collect();
    let mut out = SymMatrix::zeros(d);
    for i in 0..d {
        out.set(i, i, sigma_sq[i] * r.get(i, i));
        for j in (i + 1)..d {
            out.set(i, j, sd[i] * sd[j] * r.get(i, j));
        }
    }
    Ok(out)
}

/// Orthonormal `d x d` frame, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl OrthonormalMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `P diag(lambda) Pᵀ`.
    pub fn conjugate_diagonal(&self, lambda: &[f64]) -> Result<SymMatrix> {
        let d = self.dim;
        if lambda.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: lambda.len(),
            });
        }
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = (0..d).map(|k| self.get(i, k) * lambda[k] * self.get(j, k)).sum();
            }
        }
        SymMatrix::from_row_major(d, &out)
    }
}

/// Left singular frame of a `d x d` matrix of uniform(-1, 1) draws.
pub fn random_orthonormal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> OrthonormalMatrix {
    assert!(d >= 1, "dimension must be positive");
    loop {
        // R fills matrices column by column; keep the same draw order.
        let draws: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = DMatrix::from_column_slice(d, d, &draws);
        let svd = m.svd(true, false);
        let smallest = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smallest > 1e-10) {
            continue;
        }
        let Some(u) = svd.u else { continue };
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = u[(i, j)];
            }
        }
        return OrthonormalMatrix { dim: d, data };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn cholesky_examples() {
        let l = cholesky(&SymMatrix::identity(2)).unwrap();
        assert_eq!(l.to_row_major(), vec![1.0, 0.0, 0.0, 1.0]);
        let l = cholesky(&m(&[&[4.0, 0.0], &[0.0, 9.0]])).unwrap();
        assert_eq!(l.to_row_major(), vec![2.0, 0.0, 0.0, 3.0]);
        let l = cholesky(&m(&[&[4.0, 2.0], &[2.0, 5.0]])).unwrap();
        assert_eq!(l.to_row_major(), vec![2.0, 0.0, 1.0, 2.0]);
        // L Lᵀ by direct multiplication
        let lm = l.to_row_major();
        let prod = [
            lm[0] * lm[0],
            lm[0] * lm[2],
            lm[2] * lm[0],
            lm[2] * lm[2] + lm[3] * lm[3],
        ];
        assert_eq!(prod, [4.0, 2.0, 2.0, 5.0]);
    }

    #[test]
    fn cholesky_rejects_indefinite_and_near_singular() {
        assert_eq!(
            cholesky(&m(&[&[1.0, 2.0], &[2.0, 1.0]])),
            Err(Error::NotPositiveDefinite)
        );
        assert_eq!(
            cholesky(&m(&[&[1.0, 1.0], &[1.0, 1.0]])),
            Err(Error::NotPositiveDefinite)
        );
        assert_eq!(cholesky(&SymMatrix::zeros(2)), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(determinant(&SymMatrix::identity(3)).unwrap(), 1.0);
        assert_eq!(determinant(&m(&[&[4.0, 0.0], &[0.0, 9.0]])).unwrap(), 36.0);
        assert_abs_diff_eq!(
            determinant(&m(&[&[4.0, 2.0], &[2.0, 5.0]])).unwrap(),
            16.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(&SymMatrix::identity(2)).unwrap(), SymMatrix::identity(2));
        let inv = inverse(&SymMatrix::diagonal(&[4.0, 9.0])).unwrap();
        assert_abs_diff_eq!(inv.get(0, 0), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.get(1, 1), 1.0 / 9.0, epsilon = 1e-15);
        let a = m(&[&[4.0, 2.0], &[2.0, 5.0]]);
        let inv = inverse(&a).unwrap();
        let expected = [5.0 / 16.0, -2.0 / 16.0, -2.0 / 16.0, 4.0 / 16.0];
        for (got, want) in inv.as_slice().iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let prod = a.matmul(&inv).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(prod[i * 2 + j], want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn correlation_examples() {
        let r = correlation_from_covariance(&SymMatrix::diagonal(&[4.0, 9.0])).unwrap();
        assert_eq!(r, SymMatrix::identity(2));
        let r = correlation_from_covariance(&m(&[&[4.0, 2.0], &[2.0, 4.0]])).unwrap();
        assert_eq!(r.get(0, 1), 0.5);
        let r = correlation_from_covariance(&m(&[&[9.0, -3.0], &[-3.0, 4.0]])).unwrap();
        assert_eq!(r.get(0, 1), -0.5);
        assert_eq!(
            correlation_from_covariance(&SymMatrix::diagonal(&[1.0, 0.0])),
            Err(Error::ZeroVariance(1))
        );
    }

    #[test]
    fn covariance_examples() {
        let c = covariance_from_correlation(&SymMatrix::identity(2), &[4.0, 9.0]).unwrap();
        assert_eq!(c, SymMatrix::diagonal(&[4.0, 9.0]));
        let c = covariance_from_correlation(&m(&[&[1.0, 0.5], &[0.5, 1.0]]), &[4.0, 4.0]).unwrap();
        assert_eq!(c, m(&[&[4.0, 2.0], &[2.0, 4.0]]));
        let c = covariance_from_correlation(&m(&[&[1.0, -0.5], &[-0.5, 1.0]]), &[9.0, 4.0]).unwrap();
        assert_eq!(c, m(&[&[9.0, -3.0], &[-3.0, 4.0]]));
        assert!(matches!(
            covariance_from_correlation(&SymMatrix::identity(2), &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_orthonormal_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_orthonormal(1, &mut rng);
        assert_abs_diff_eq!(p.get(0, 0).abs(), 1.0, epsilon = 1e-12);

        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_orthonormal(2, &mut rng);
            let dot = p.get(0, 0) * p.get(0, 1) + p.get(1, 0) * p.get(1, 1);
            assert_abs_diff_eq!(dot, 0.0, epsilon = 1e-10);
            for j in 0..2 {
                let norm = p.get(0, j).powi(2) + p.get(1, j).powi(2);
                assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
            }
        }

        let a = random_orthonormal(3, &mut ChaCha8Rng::seed_from_u64(11));
        let b = random_orthonormal(3, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| a.get(k, i) * a.get(k, j)).sum();
                assert_abs_diff_eq!(dot, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn isotropic_eigenvalues_commute_with_any_frame() {
        let p = random_orthonormal(2, &mut ChaCha8Rng::seed_from_u64(5));
        let s = p.conjugate_diagonal(&[5.0, 5.0]).unwrap();
        assert_abs_diff_eq!(s.get(0, 0), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.get(1, 1), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.get(0, 1), 0.0, epsilon = 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spd(d: usize) -> impl Strategy<Value = SymMatrix> {
            proptest::collection::vec(-2.0f64..2.0, d * d).prop_map(move |a| {
                // A Aᵀ + d I is comfortably positive definite.
                let mut out = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..d {
                        out[i * d + j] = (0..d).map(|k| a[i * d + k] * a[j * d + k]).sum::<f64>()
                            + if i == j { d as f64 * 0.5 } else { 0.0 };
                    }
                }
                SymMatrix::from_row_major(d, &out).unwrap()
            })
        }

        proptest! {
            #[test]
            fn log_det_matches_det(m in (1usize..6).prop_flat_map(spd)) {
                let det = determinant(&m).unwrap();
                prop_assert!(det > 0.0);
                let logdet = m.cholesky().unwrap().log_determinant();
                prop_assert!((logdet.exp() - det).abs() <= 1e-10 * det);
            }

            #[test]
            fn correlation_round_trip(m in (1usize..6).prop_flat_map(spd)) {
                let r = correlation_from_covariance(&m).unwrap();
                let sig = m.diag();
                let back = covariance_from_correlation(&r, &sig).unwrap();
                let r2 = correlation_from_covariance(&back).unwrap();
                for (a, b) in r.as_slice().iter().zip(r2.as_slice()) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
                for i in 0..m.dim() {
                    prop_assert!((back.get(i, i) - sig[i]).abs() <= 1e-12 * sig[i]);
                }
            }

            #[test]
            fn diagonal_rescale_by_inverse_correlation(m in (2usize..6).prop_flat_map(spd)) {
                let r = correlation_from_covariance(&m).unwrap();
                let g = inverse(&r).unwrap();
                let sig = m.diag();
                let scaled: Vec<f64> = (0..m.dim()).map(|i| g.get(i, i) * sig[i]).collect();
                let out = covariance_from_correlation(&r, &scaled).unwrap();
                for i in 0..m.dim() {
                    prop_assert!((out.get(i, i) - scaled[i]).abs() <= 1e-12 * scaled[i]);
                }
            }

            #[test]
            fn inverse_is_inverse(m in (1usize..6).prop_flat_map(spd)) {
                let inv = inverse(&m).unwrap();
                let prod = m.matmul(&inv).unwrap();
                let d = m.dim();
                for i in 0..d {
                    for j in 0..d {
                        let want = if i == j { 1.0 } else { 0.0 };
                        prop_assert!((prod[i * d + j] - want).abs() <= 1e-10);
                    }
                }
            }
        }
    }
}
