//! Central finite differences. This is the independent oracle against which
//! the jet arithmetic is validated, so it only ever calls `f` on plain points.

use crate::algebra::Complex;
use crate::error::Result;

pub const DEFAULT_STEP: f64 = 1e-5;

pub type Gradient = Vec<Complex>;
pub type Hessian = Vec<Vec<Complex>>;

/// Gradient and Hessian of every output of `f` at `p`.
///
/// Step for coordinate `i` is `h * max(1, |p_i|)`. The Hessian uses the
/// four-point stencil `p ± h_i e_i ± h_j e_j` for every pair, the diagonal
/// included.
pub fn fd_derivatives_vec<F>(f: F, p: &[f64], h: f64) -> Result<Vec<(Gradient, Hessian)>>
where
    F: Fn(&[f64]) -> Result<Vec<Complex>>,
{
    let n = p.len();
    let steps: Vec<f64> = p.iter().map(|x| h * x.abs().max(1.0)).collect();
    let at = |offsets: &[(usize, f64)]| -> Result<Vec<Complex>> {
        let mut q = p.to_vec();
        for &(i, d) in offsets {
            q[i] += d;
        }
        f(&q)
    };

    let m = f(p)?.len();
    let mut grads = vec![vec![Complex::new(0.0, 0.0); n]; m];
    let mut hess = vec![vec![vec![Complex::new(0.0, 0.0); n]; n]; m];

    for i in 0..n {
        let hi = steps[i];
        let fp = at(&[(i, hi)])?;
        let fm = at(&[(i, -hi)])?;
        for k in 0..m {
            grads[k][i] = (fp[k] - fm[k]) / (2.0 * hi);
        }
    }
    for i in 0..n {
        for j in i..n {
            let (hi, hj) = (steps[i], steps[j]);
            let fpp = at(&[(i, hi), (j, hj)])?;
            let fpm = at(&[(i, hi), (j, -hj)])?;
            let fmp = at(&[(i, -hi), (j, hj)])?;
            let fmm = at(&[(i, -hi), (j, -hj)])?;
            for k in 0..m {
                let v = (fpp[k] - fpm[k] - fmp[k] + fmm[k]) / (4.0 * hi * hj);
                hess[k][i][j] = v;
                hess[k][j][i] = v;
            }
        }
    }
    Ok(grads.into_iter().zip(hess).collect())
}

/// Scalar version of [`fd_derivatives_vec`].
pub fn fd_derivatives<F>(f: F, p: &[f64], h: f64) -> Result<(Gradient, Hessian)>
where
    F: Fn(&[f64]) -> Result<Complex>,
{
    let mut out = fd_derivatives_vec(|q| Ok(vec![f(q)?]), p, h)?;
    Ok(out.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn c(x: f64) -> Complex {
        Complex::new(x, 0.0)
    }

    #[test]
    fn square_at_three() {
        let (g, _) = fd_derivatives(|q| Ok(c(q[0] * q[0])), &[3.0], DEFAULT_STEP).unwrap();
        // central difference is exact for quadratics up to roundoff
        assert!((g[0] - 6.0).norm() < 1e-9);
    }

    #[test]
    fn constant_function() {
        let (g, h) = fd_derivatives(|_| Ok(c(4.2)), &[1.0, -2.0], DEFAULT_STEP).unwrap();
        assert!(g.iter().all(|z| z.norm() < 1e-12));
        assert!(h.iter().flatten().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn mixed_stencil() {
        let (_, h) = fd_derivatives(|q| Ok(c(q[0] * q[1])), &[0.7, -1.3], DEFAULT_STEP).unwrap();
        assert!((h[0][1] - 1.0).norm() < 1e-6);
        assert!((h[1][0] - 1.0).norm() < 1e-6);
        assert!(h[0][0].norm() < 1e-6);
    }

    #[test]
    fn evaluation_errors_propagate() {
        let r = fd_derivatives(
            |q| {
                if q[0] > 1.0 {
                    Err(Error::Evaluation("outside".into()))
                } else {
                    Ok(c(q[0]))
                }
            },
            &[1.0],
            DEFAULT_STEP,
        );
        assert!(matches!(r, Err(Error::Evaluation(_))));
    }
}
