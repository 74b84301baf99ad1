use crate::error::{Error, Result};

use super::Jet;

pub type JetMatrix = Vec<Vec<Jet>>;

/// Relative pivot size below which a jet matrix is treated as singular.
pub const PIVOT_TOL: f64 = 1e-13;

/// Inverse and determinant of a square jet matrix, by Gauss-Jordan
/// elimination pivoting on the point values.
pub fn inverse_det(m: &[Vec<Jet>]) -> Result<(JetMatrix, Jet)> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Dimension {
            expected: 1,
            found: 0,
        });
    }
    let layout = m[0][0].layout().clone();
    let scale = m
        .iter()
        .flatten()
        .map(|j| j.value().norm())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Err(Error::SingularMetric("zero matrix".into()));
    }
    let mut a: JetMatrix = m.to_vec();
    let mut inv: JetMatrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(&layout, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    let mut det = Jet::constant(&layout, 1.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r][col].value().norm().total_cmp(&a[s][col].value().norm()))
            .unwrap();
        if a[piv][col].value().norm() <= PIVOT_TOL * scale {
            return Err(Error::SingularMetric(format!(
                "pivot {:.3e} in column {col}",
                a[piv][col].value().norm()
            )));
        }
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = &det * &p;
        let r = p.recip()?;
        for j in 0..n {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row][col].clone();
            if f.coeffs().iter().all(|c| c.norm() == 0.0) {
                continue;
            }
            for j in 0..n {
                a[row][j] = &a[row][j] - &(&f * &a[col][j]);
                inv[row][j] = &inv[row][j] - &(&f * &inv[col][j]);
            }
        }
    }
    Ok((inv, det))
}

pub fn inverse(m: &[Vec<Jet>]) -> Result<JetMatrix> {
    inverse_det(m).map(|(inv, _)| inv)
}

pub fn mat_vec(m: &[Vec<Jet>], v: &[Jet]) -> Vec<Jet> {
    m.iter()
        .map(|row| {
            let mut acc = Jet::zero(v[0].layout());
            for (a, b) in row.iter().zip(v) {
                acc += &(a * b);
            }
            acc
        })
        .collect()
}

pub fn truncate_matrix(m: &[Vec<Jet>], order: usize) -> JetMatrix {
    m.iter()
        .map(|row| row.iter().map(|j| j.truncate(order)).collect())
        .collect()
}
