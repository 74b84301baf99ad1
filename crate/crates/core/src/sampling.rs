//! Deterministic low-discrepancy sampling of coordinate boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

pub fn radical_inverse(base: u64, mut index: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// The Halton point with the given index in `[0, 1)^dim`.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "Halton sampling supports up to {} dimensions", PRIMES.len());
    PRIMES[..dim].iter().map(|&b| radical_inverse(b, index)).collect()
}

/// An axis-aligned box `lo <= x <= hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Dimension {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.len() > PRIMES.len() {
            return Err(Error::Config(format!("boxes of dimension {} are not supported", lo.len())));
        }
        if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] <= hi[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
            return Err(Error::Config(format!(
                "box coordinate {i} has bounds [{}, {}]",
                lo[i], hi[i]
            )));
        }
        Ok(DomainBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.lo).zip(&self.hi).all(|((x, l), h)| l <= x && x <= h)
    }

    /// `count` points; point `i` is Halton point `seed + i + 1` mapped into the box.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..count as u64)
            .map(|i| {
                let u = halton(seed.wrapping_add(i).wrapping_add(1), self.dim());
                u.iter()
                    .zip(self.lo.iter().zip(&self.hi))
                    .map(|(t, (l, h))| l + t * (h - l))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_corput() {
        let v: Vec<f64> = (1..=4).map(|i| radical_inverse(2, i)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
        assert_eq!(radical_inverse(3, 1), 1.0 / 3.0);
    }

    #[test]
    fn box_sampling_is_deterministic_and_inside() {
        let b = DomainBox::new(vec![0.1, -1.0], vec![1.0, 1.0]).unwrap();
        let a = b.sample(50, 7);
        assert_eq!(a, b.sample(50, 7));
        assert_ne!(a, b.sample(50, 8));
        assert!(a.iter().all(|p| b.contains(p)));
        // distinct points
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                assert_ne!(a[i], a[j]);
            }
        }
    }

    #[test]
    fn bad_boxes() {
        assert!(DomainBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(DomainBox::new(vec![0.0], vec![f64::NAN]).is_err());
        assert!(DomainBox::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }
}
