//! Small dense helpers over nalgebra: rank-revealing bases, least squares, principal angles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Columns as a matrix; shorter columns are zero-padded to the longest.
pub fn columns_to_matrix(cols: &[Vec<Complex64>]) -> CMatrix {
    let n = cols.iter().map(Vec::len).max().unwrap_or(0);
    let mut m = CMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    m
}

/// Orthonormal basis of the column span. Columns are normalized first; singular
/// directions below `rank_tol` times the largest are dropped.
#[derive(Clone, Debug)]
pub struct RankRevealed {
    pub basis: CMatrix,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

pub fn orthonormal_basis(a: &CMatrix, rank_tol: f64) -> Result<RankRevealed> {
    let mut a = a.clone();
    for mut col in a.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= Complex64::new(n, 0.0);
        }
    }
    let nrows = a.nrows();
    let svd = a.svd(true, false);
    let u = svd.u.ok_or(Error::RankCollapse("SVD without left vectors"))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(Error::RankCollapse("zero column span"));
    }
    let keep: Vec<usize> = order.iter().copied().filter(|&i| svd.singular_values[i] > rank_tol * smax).collect();
    let mut basis = CMatrix::zeros(nrows, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        basis.set_column(k, &u.column(i));
    }
    Ok(RankRevealed { basis, rank: keep.len(), singular_values: sv })
}

/// Principal angles between span(qa) and span(qb) (both orthonormal), one per
/// column of qa, ascending. Uses atan2(sin, cos) so both ends are accurate.
pub fn principal_angles(qa: &CMatrix, qb: &CMatrix) -> Vec<f64> {
    let r = qa.ncols();
    if r == 0 {
        return Vec::new();
    }
    let proj = qb.adjoint() * qa;
    let resid = qa - qb * &proj;
    let mut sines: Vec<f64> = resid.svd(false, false).singular_values.iter().copied().collect();
    sines.resize(r, 1.0);
    sines.sort_by(f64::total_cmp);
    let mut cosines: Vec<f64> = if proj.nrows() == 0 {
        vec![0.0; r]
    } else {
        proj.svd(false, false).singular_values.iter().copied().collect()
    };
    cosines.resize(r, 0.0);
    cosines.sort_by(|a, b| b.total_cmp(a));
    sines.iter().zip(&cosines).map(|(s, c)| s.min(1.0).atan2(c.min(1.0))).collect()
}

/// Least-squares coefficients x minimizing |A x - b| with rank threshold `rank_tol`
/// relative to the largest singular value.
pub fn least_squares(a: &CMatrix, b: &CMatrix, rank_tol: f64) -> Result<(CMatrix, usize)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Err(Error::RankCollapse("least-squares matrix is zero"));
    }
    let rank = svd.singular_values.iter().filter(|s| **s > rank_tol * smax).count();
    let x = svd
        .solve(b, rank_tol * smax)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    Ok((x, rank))
}
