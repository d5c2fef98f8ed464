//! Exact arithmetic in the cyclotomic field Q(ζ), ζ = exp(iπ/4).
//!
//! Elements are stored in the power basis `c0 + c1·ζ + c2·ζ² + c3·ζ³` with
//! the relation ζ⁴ = −1 applied after every product, so i = ζ² and the
//! primitive eighth roots of unity are ±ζ, ±ζ³.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An exact element of Q(ζ₈).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CycloRat {
    c: [BigRational; 4],
}

impl CycloRat {
    pub fn new(c0: BigRational, c1: BigRational, c2: BigRational, c3: BigRational) -> Self {
        CycloRat {
            c: [c0, c1, c2, c3],
        }
    }

    pub fn zero() -> Self {
        CycloRat::from_integer(0)
    }

    pub fn one() -> Self {
        CycloRat::from_integer(1)
    }

    pub fn from_integer(n: i64) -> Self {
        CycloRat::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        CycloRat::new(r, BigRational::zero(), BigRational::zero(), BigRational::zero())
    }

    /// `num/den` as a rational element. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        CycloRat::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Element with small integer coordinates in the power basis.
    pub fn from_coords(coords: [i64; 4]) -> Self {
        CycloRat {
            c: coords.map(|x| BigRational::from_integer(BigInt::from(x))),
        }
    }

    pub fn zeta() -> Self {
        CycloRat::zeta_pow(1)
    }

    /// The imaginary unit, ζ².
    pub fn i() -> Self {
        CycloRat::zeta_pow(2)
    }

    /// ζ^k for any integer k (negative powers included).
    pub fn zeta_pow(k: i64) -> Self {
        let k = k.rem_euclid(8) as usize;
        let mut coords = [0i64; 4];
        if k < 4 {
            coords[k] = 1;
        } else {
            coords[k - 4] = -1;
        }
        CycloRat::from_coords(coords)
    }

    pub fn coords(&self) -> &[BigRational; 4] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(Zero::is_zero)
    }

    /// True when the element lies in Q.
    pub fn is_rational(&self) -> bool {
        self.c[1..].iter().all(Zero::is_zero)
    }

    /// Galois automorphism σ_k : ζ ↦ ζ^k, k odd.
    pub fn galois(&self, k: i64) -> Self {
        assert!(k.rem_euclid(2) == 1, "galois automorphism needs odd k");
        let mut out = CycloRat::zero();
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            out += CycloRat::zeta_pow(j as i64 * k).scale(cj);
        }
        out
    }

    fn scale(&self, r: &BigRational) -> Self {
        CycloRat {
            c: [&self.c[0] * r, &self.c[1] * r, &self.c[2] * r, &self.c[3] * r],
        }
    }

    /// Field norm down to Q: the product of all four conjugates.
    pub fn norm(&self) -> BigRational {
        let prod = self * &self.galois(3) * self.galois(5) * self.galois(7);
        debug_assert!(prod.is_rational());
        prod.c[0].clone()
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let cofactor = self.galois(3) * self.galois(5) * self.galois(7);
        let n = self.norm();
        Some(cofactor.scale(&n.recip()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|r| self * &r)
    }

    pub fn pow(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = CycloRat::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Some(acc)
    }

    /// Complex value under ζ ↦ exp(iπ/4).
    pub fn to_complex(&self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let basis = [
            Complex64::new(1.0, 0.0),
            Complex64::new(s, s),
            Complex64::new(0.0, 1.0),
            Complex64::new(-s, s),
        ];
        self.c
            .iter()
            .zip(basis)
            .map(|(r, b)| b * r.to_f64().unwrap_or(f64::NAN))
            .sum()
    }
}

impl Default for CycloRat {
    fn default() -> Self {
        CycloRat::zero()
    }
}

impl From<i64> for CycloRat {
    fn from(n: i64) -> Self {
        CycloRat::from_integer(n)
    }
}

impl From<BigRational> for CycloRat {
    fn from(r: BigRational) -> Self {
        CycloRat::from_rational(r)
    }
}

impl Add<&CycloRat> for &CycloRat {
    type Output = CycloRat;
    fn add(self, rhs: &CycloRat) -> CycloRat {
        CycloRat {
            c: [
                &self.c[0] + &rhs.c[0],
                &self.c[1] + &rhs.c[1],
                &self.c[2] + &rhs.c[2],
                &self.c[3] + &rhs.c[3],
            ],
        }
    }
}

impl Add for CycloRat {
    type Output = CycloRat;
    fn add(self, rhs: CycloRat) -> CycloRat {
        &self + &rhs
    }
}

impl AddAssign for CycloRat {
    fn add_assign(&mut self, rhs: CycloRat) {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
    }
}

impl AddAssign<&CycloRat> for CycloRat {
    fn add_assign(&mut self, rhs: &CycloRat) {
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl Sub<&CycloRat> for &CycloRat {
    type Output = CycloRat;
    fn sub(self, rhs: &CycloRat) -> CycloRat {
        self + &(-rhs)
    }
}

impl Sub for CycloRat {
    type Output = CycloRat;
    fn sub(self, rhs: CycloRat) -> CycloRat {
        &self - &rhs
    }
}

impl Neg for &CycloRat {
    type Output = CycloRat;
    fn neg(self) -> CycloRat {
        CycloRat {
            c: [-&self.c[0], -&self.c[1], -&self.c[2], -&self.c[3]],
        }
    }
}

impl Neg for CycloRat {
    type Output = CycloRat;
    fn neg(self) -> CycloRat {
        -&self
    }
}

impl Mul<&CycloRat> for &CycloRat {
    type Output = CycloRat;
    fn mul(self, rhs: &CycloRat) -> CycloRat {
        let mut wide: [BigRational; 7] = Default::default();
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                wide[i + j] += a * b;
            }
        }
        // ζ⁴ = −1
        let [w0, w1, w2, w3, w4, w5, w6] = wide;
        CycloRat {
            c: [w0 - w4, w1 - w5, w2 - w6, w3],
        }
    }
}

impl Mul for CycloRat {
    type Output = CycloRat;
    fn mul(self, rhs: CycloRat) -> CycloRat {
        &self * &rhs
    }
}

impl Mul<CycloRat> for &CycloRat {
    type Output = CycloRat;
    fn mul(self, rhs: CycloRat) -> CycloRat {
        self * &rhs
    }
}

impl Mul<&CycloRat> for CycloRat {
    type Output = CycloRat;
    fn mul(self, rhs: &CycloRat) -> CycloRat {
        &self * rhs
    }
}

/// Canonical text: `a+b*z+c*z^2+d*z^3` with zero components dropped.
impl fmt::Display for CycloRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, r) in self.c.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            let sign = if r.is_negative() { "-" } else { "+" };
            if first {
                if r.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{sign}")?;
            }
            first = false;
            write!(f, "{}", r.abs())?;
            match k {
                0 => {}
                1 => write!(f, "*z")?,
                _ => write!(f, "*z^{k}")?,
            }
        }
        Ok(())
    }
}
