//! Small exact-arithmetic kernel: complex numbers, real quaternions and
//! homogeneous coordinates on CP³.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

/// Quaternions with norm at or below this are refused by [`Quaternion::inv`].
pub const EPS_SINGULAR: f64 = 1e-14;

/// Hamilton product on raw components `(a, b, c, d) = a + b i + c j + d k`.
///
/// Generic so that the same table drives both plain reals and jets.
pub fn hamilton<T>(p: &[T; 4], q: &[T; 4]) -> [T; 4]
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let [a1, b1, c1, d1] = p.clone();
    let [a2, b2, c2, d2] = q.clone();
    [
        a1.clone() * a2.clone() - b1.clone() * b2.clone() - c1.clone() * c2.clone() - d1.clone() * d2.clone(),
        a1.clone() * b2.clone() + b1.clone() * a2.clone() + c1.clone() * d2.clone() - d1.clone() * c2.clone(),
        a1.clone() * c2.clone() - b1.clone() * d2.clone() + c1.clone() * a2.clone() + d1.clone() * b2.clone(),
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion { a, b, c, d }
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Quaternion::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Multiplicative inverse, `conj(q) / |q|²`.
    pub fn inv(self) -> Result<Self> {
        let n = self.norm();
        if n <= EPS_SINGULAR {
            return Err(Error::NearZeroQuaternion(n));
        }
        Ok(self.conj().scale(1.0 / self.norm_sqr()))
    }

    /// `re(z1) + im(z1) i + re(z2) j + im(z2) k`, i.e. the quaternion `z1 + z2 j`.
    pub fn from_complex_pair(z1: Complex, z2: Complex) -> Self {
        Quaternion::new(z1.re, z1.im, z2.re, z2.im)
    }

    /// Inverse of [`Quaternion::from_complex_pair`].
    pub fn to_complex_pair(self) -> (Complex, Complex) {
        (Complex::new(self.a, self.b), Complex::new(self.c, self.d))
    }
}

pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    p * q
}

pub fn quat_inv(q: Quaternion) -> Result<Quaternion> {
    q.inv()
}

pub fn embed_complex_pair(z1: Complex, z2: Complex) -> Quaternion {
    Quaternion::from_complex_pair(z1, z2)
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        Quaternion::from_array(hamilton(&self.to_array(), &rhs.to_array()))
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i + {}j + {}k", self.a, self.b, self.c, self.d)
    }
}

/// A point of CP³ in homogeneous coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectivePoint {
    pub z: [Complex; 4],
}

impl ProjectivePoint {
    pub fn new(z: [Complex; 4]) -> Result<Self> {
        if z.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::Domain("all homogeneous coordinates vanish".into()));
        }
        Ok(ProjectivePoint { z })
    }

    /// Representative whose entry of largest modulus is real and equal to 1.
    /// Ties go to the lowest index.
    pub fn normalize(&self) -> ProjectivePoint {
        let mut best = 0;
        for k in 1..4 {
            if self.z[k].norm() > self.z[best].norm() {
                best = k;
            }
        }
        let s = self.z[best];
        ProjectivePoint {
            z: self.z.map(|c| c / s),
        }
    }

    /// Distance between normalized representatives; zero iff the points agree.
    pub fn distance(&self, other: &ProjectivePoint) -> f64 {
        let a = self.normalize();
        let b = other.normalize();
        a.z.iter()
            .zip(b.z.iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(p: Quaternion, q: Quaternion, tol: f64) -> bool {
        (p - q).norm() < tol
    }

    #[test]
    fn multiplication_table() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(j * i, -k);
        assert_eq!(i * i, -Quaternion::ONE);
        assert_eq!(i * j * k, -Quaternion::ONE);
    }

    #[test]
    fn one_plus_j_times_one_minus_j() {
        let p = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        let q = Quaternion::new(1.0, 0.0, -1.0, 0.0);
        assert_eq!(p * q, Quaternion::new(2.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn inverses() {
        assert_eq!(Quaternion::ONE.inv().unwrap(), Quaternion::ONE);
        let q = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        assert!(close(q.inv().unwrap(), Quaternion::new(0.5, 0.0, -0.5, 0.0), 1e-15));
        assert!(close(Quaternion::I.inv().unwrap(), -Quaternion::I, 1e-15));
        assert!(matches!(
            Quaternion::new(1e-15, 0.0, 0.0, 0.0).inv(),
            Err(Error::NearZeroQuaternion(_))
        ));
    }

    #[test]
    fn complex_pair_embedding() {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        assert_eq!(embed_complex_pair(one, zero), Quaternion::ONE);
        assert_eq!(embed_complex_pair(Complex::i(), zero), Quaternion::I);
        let w = Complex::new(2.5, -1.5);
        let e = embed_complex_pair(zero, w);
        assert_eq!(e, Quaternion::new(0.0, 0.0, 2.5, -1.5));
        // (c + d i) j = c j + d k
        assert_eq!(e, embed_complex_pair(w, zero) * Quaternion::J);
    }

    #[test]
    fn projective_normalization() {
        let z = [
            Complex::new(1.0, 2.0),
            Complex::new(-3.0, 0.5),
            Complex::new(0.0, 0.0),
            Complex::new(0.25, 0.0),
        ];
        let p = ProjectivePoint::new(z).unwrap();
        let lambda = Complex::new(-0.7, 3.1);
        let q = ProjectivePoint::new(z.map(|c| c * lambda)).unwrap();
        assert!(p.distance(&q) < 1e-15);
        let n = p.normalize();
        assert_eq!(n.z[1], Complex::new(1.0, 0.0));
        assert!(ProjectivePoint::new([Complex::new(0.0, 0.0); 4]).is_err());
    }
}
