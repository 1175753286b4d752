//! The cyclotomic field Q(zeta_7) on the power basis 1, z, ..., z^5, where z
//! is a primitive 7th root of unity. The relation 1 + z + ... + z^6 = 0 is
//! applied eagerly, so every element has a unique coordinate vector.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use super::{ExactError, ExactResult};

/// Exact rational scalar. Kept reduced with a positive denominator by the
/// backing implementation.
pub type Rational = num_rational::BigRational;

/// Formats a rational as `p/q` with the denominator always written out.
pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().ok()?;
            Some(Rational::from_integer(p))
        }
    }
}

/// An element of Q(zeta_7).
///
/// Internally the six coordinates share one positive denominator and the
/// content is reduced, which keeps the frequent products cheap; the public
/// view is the vector of six rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloNum {
    num: [BigInt; 6],
    den: BigInt,
}

impl CycloNum {
    pub fn zero() -> Self {
        CycloNum {
            num: Default::default(),
            den: BigInt::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        let mut num: [BigInt; 6] = Default::default();
        num[0] = BigInt::from(n);
        CycloNum {
            num,
            den: BigInt::one(),
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        let mut num: [BigInt; 6] = Default::default();
        num[0] = r.numer().clone();
        CycloNum {
            num,
            den: r.denom().clone(),
        }
        .reduced()
    }

    pub fn from_coeffs(coeffs: [Rational; 6]) -> Self {
        let mut den = BigInt::one();
        for c in &coeffs {
            den = den.lcm(c.denom());
        }
        let num = std::array::from_fn(|i| {
            let c = &coeffs[i];
            c.numer() * (&den / c.denom())
        });
        CycloNum { num, den }.reduced()
    }

    /// zeta_7 itself.
    pub fn zeta() -> Self {
        Self::zeta_pow(1)
    }

    /// zeta_7^k for any integer k, reduced to canonical form.
    pub fn zeta_pow(k: i64) -> Self {
        let e = k.rem_euclid(7) as usize;
        let mut c7 = [0i64; 7];
        c7[e] = 1;
        Self::from_exponent_counts(&c7)
    }

    /// Builds sum_{e=0}^{6} c_e * zeta^e and eliminates zeta^6.
    fn from_exponent_counts(c7: &[i64; 7]) -> Self {
        let num = std::array::from_fn(|i| BigInt::from(c7[i] - c7[6]));
        CycloNum {
            num,
            den: BigInt::one(),
        }
    }

    /// The Gauss sum z + z^2 + z^4 - z^3 - z^5 - z^6, a square root of -7.
    pub fn sqrt_minus_seven() -> Self {
        let mut c7 = [0i64; 7];
        for r in [1, 2, 4] {
            c7[r] = 1;
        }
        for n in [3, 5, 6] {
            c7[n] = -1;
        }
        Self::from_exponent_counts(&c7)
    }

    fn reduced(mut self) -> Self {
        debug_assert!(self.den.is_positive());
        let mut g = self.den.clone();
        for n in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(n);
        }
        if !g.is_one() {
            for n in &mut self.num {
                *n /= &g;
            }
            self.den /= &g;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|n| n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one()
            && self.num[0].is_one()
            && self.num[1..].iter().all(|n| n.is_zero())
    }

    /// True when the element lies in Q, i.e. the coordinates on z..z^5 vanish.
    pub fn is_rational(&self) -> bool {
        self.num[1..].iter().all(|n| n.is_zero())
    }

    /// The rational coordinate on basis vector z^i.
    pub fn coeff(&self, i: usize) -> Rational {
        Rational::new(self.num[i].clone(), self.den.clone())
    }

    pub fn coeffs(&self) -> [Rational; 6] {
        std::array::from_fn(|i| self.coeff(i))
    }

    /// The element as a rational, if it lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coeff(0))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let num = std::array::from_fn(|i| &self.num[i] * r.numer());
        CycloNum {
            num,
            den: &self.den * r.denom(),
        }
        .reduced()
    }

    /// The Galois automorphism z -> z^k, for k not divisible by 7.
    pub fn galois(&self, k: i64) -> Self {
        let k = k.rem_euclid(7);
        assert!(k != 0, "z -> z^0 is not a field automorphism");
        let mut c7: [BigInt; 7] = Default::default();
        for (i, n) in self.num.iter().enumerate() {
            let e = (i as i64 * k).rem_euclid(7) as usize;
            c7[e] += n;
        }
        let num = std::array::from_fn(|i| &c7[i] - &c7[6]);
        CycloNum {
            num,
            den: self.den.clone(),
        }
        .reduced()
    }

    /// Complex conjugation, z -> z^6.
    pub fn conj(&self) -> Self {
        self.galois(6)
    }

    /// Multiplicative inverse via the product of Galois conjugates.
    pub fn inv(&self) -> ExactResult<Self> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let mut cofactor = self.galois(2);
        for k in 3..=6 {
            cofactor *= self.galois(k);
        }
        let norm = self.clone() * cofactor.clone();
        let norm = norm
            .as_rational()
            .expect("product of all Galois conjugates is rational");
        debug_assert!(!norm.is_zero());
        Ok(cofactor.scale(&norm.recip()))
    }

    pub fn div(&self, other: &Self) -> ExactResult<Self> {
        Ok(self.clone() * other.inv()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = CycloNum::one();
        for _ in 0..e {
            acc *= self.clone();
        }
        acc
    }
}

impl Zero for CycloNum {
    fn zero() -> Self {
        CycloNum::zero()
    }
    fn is_zero(&self) -> bool {
        CycloNum::is_zero(self)
    }
}

impl Add for CycloNum {
    type Output = CycloNum;
    fn add(mut self, rhs: CycloNum) -> CycloNum {
        self += rhs;
        self
    }
}

impl AddAssign for CycloNum {
    fn add_assign(&mut self, rhs: CycloNum) {
        if self.den == rhs.den {
            for (a, b) in self.num.iter_mut().zip(rhs.num.iter()) {
                *a += b;
            }
        } else {
            for (a, b) in self.num.iter_mut().zip(rhs.num.iter()) {
                *a = &*a * &rhs.den + b * &self.den;
            }
            self.den = &self.den * &rhs.den;
        }
        let out = std::mem::replace(self, CycloNum::zero());
        *self = out.reduced();
    }
}

impl Sub for CycloNum {
    type Output = CycloNum;
    fn sub(mut self, rhs: CycloNum) -> CycloNum {
        self -= rhs;
        self
    }
}

impl SubAssign for CycloNum {
    fn sub_assign(&mut self, rhs: CycloNum) {
        *self += -rhs;
    }
}

impl Neg for CycloNum {
    type Output = CycloNum;
    fn neg(mut self) -> CycloNum {
        for n in &mut self.num {
            *n = -n.clone();
        }
        self
    }
}

impl Mul for CycloNum {
    type Output = CycloNum;
    fn mul(mut self, rhs: CycloNum) -> CycloNum {
        self *= rhs;
        self
    }
}

impl MulAssign for CycloNum {
    fn mul_assign(&mut self, rhs: CycloNum) {
        if self.is_zero() || rhs.is_zero() {
            *self = CycloNum::zero();
            return;
        }
        let mut c: [BigInt; 11] = Default::default();
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.num.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                c[i + j] += a * b;
            }
        }
        // z^7 = 1, then z^6 = -(1 + z + ... + z^5).
        for e in 7..11 {
            let carry = std::mem::take(&mut c[e]);
            c[e - 7] += carry;
        }
        let num = std::array::from_fn(|i| &c[i] - &c[6]);
        let den = &self.den * &rhs.den;
        *self = CycloNum { num, den }.reduced();
    }
}

impl<'a> Mul<&'a CycloNum> for CycloNum {
    type Output = CycloNum;
    fn mul(mut self, rhs: &'a CycloNum) -> CycloNum {
        self *= rhs.clone();
        self
    }
}

impl fmt::Display for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, n) in self.num.iter().enumerate() {
            if n.is_zero() {
                continue;
            }
            if first {
                first = false;
                if n.is_negative() {
                    write!(f, "-")?;
                }
            } else if n.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = n.abs();
            let is_unit_coeff = mag.is_one() && self.den.is_one();
            if !is_unit_coeff || i == 0 {
                write!(f, "{}", mag)?;
                if !self.den.is_one() {
                    write!(f, "/{}", self.den)?;
                }
                if i > 0 {
                    write!(f, "*")?;
                }
            }
            match i {
                0 => {}
                1 => write!(f, "z")?,
                _ => write!(f, "z^{}", i)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for CycloNum {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(6))?;
        for i in 0..6 {
            seq.serialize_element(&rational_string(&self.coeff(i)))?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Independent schoolbook oracle: multiply two coefficient vectors as
    /// plain exponent arithmetic mod 7, then eliminate z^6 by hand.
    fn naive_mul(a: &[i64; 6], b: &[i64; 6]) -> [i64; 6] {
        let mut c = [0i64; 7];
        for i in 0..6 {
            for j in 0..6 {
                c[(i + j) % 7] += a[i] * b[j];
            }
        }
        std::array::from_fn(|i| c[i] - c[6])
    }

    fn from_ints(v: [i64; 6]) -> CycloNum {
        CycloNum::from_coeffs(std::array::from_fn(|i| q(v[i], 1)))
    }

    #[test]
    fn zeta_times_zeta6_is_one() {
        let p = CycloNum::zeta() * CycloNum::zeta_pow(6);
        assert!(p.is_one());
    }

    #[test]
    fn minimal_polynomial_sums_to_zero() {
        let mut acc = CycloNum::zero();
        for e in 0..7 {
            acc += CycloNum::zeta_pow(e);
        }
        assert!(acc.is_zero());
        // z^3 + (-1 - z - z^2 - z^3 - z^4 - z^5) is the reduced form of z^6.
        let reduced_z6 = from_ints([-1, -1, -1, -1, -1, -1]);
        assert_eq!(CycloNum::zeta_pow(6), reduced_z6);
    }

    #[test]
    fn gauss_sum_squares_to_minus_seven() {
        // Oracle: expand the 36-term product over raw exponents mod 7, then
        // eliminate z^6 by hand.
        let mut c = [0i64; 7];
        for (i, si) in [(1, 1), (2, 1), (4, 1), (3, -1), (5, -1), (6, -1)] {
            for (j, sj) in [(1, 1), (2, 1), (4, 1), (3, -1), (5, -1), (6, -1)] {
                c[(i + j) % 7] += si * sj;
            }
        }
        let raw_oracle: [i64; 6] = std::array::from_fn(|i| c[i] - c[6]);
        assert_eq!(raw_oracle, [-7, 0, 0, 0, 0, 0]);

        let s_elt = CycloNum::sqrt_minus_seven();
        // Folding -z^6 into the basis gives 1 + 2z + 2z^2 + 2z^4.
        assert_eq!(s_elt, from_ints([1, 2, 2, 0, 2, 0]));
        let sq_oracle = naive_mul(&[1, 2, 2, 0, 2, 0], &[1, 2, 2, 0, 2, 0]);
        assert_eq!(sq_oracle, raw_oracle);
        assert_eq!(s_elt.clone() * s_elt, CycloNum::from_int(-7));
    }

    fn random_cyclo(rng: &mut ChaCha8Rng) -> CycloNum {
        CycloNum::from_coeffs(std::array::from_fn(|_| {
            q(rng.gen_range(-9..=9), rng.gen_range(1..=4))
        }))
    }

    #[test]
    fn field_axioms_on_seeded_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let a = random_cyclo(&mut rng);
            let b = random_cyclo(&mut rng);
            let c = random_cyclo(&mut rng);
            assert_eq!(
                (a.clone() + b.clone()) + c.clone(),
                a.clone() + (b.clone() + c.clone())
            );
            assert_eq!(
                a.clone() * (b.clone() + c.clone()),
                a.clone() * b.clone() + a.clone() * c.clone()
            );
            if !a.is_zero() {
                assert!((a.clone() * a.inv().unwrap()).is_one());
            }
        }
    }

    #[test]
    fn conjugation_is_an_involution_and_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_cyclo(&mut rng);
            let b = random_cyclo(&mut rng);
            assert_eq!(a.conj().conj(), a);
            assert_eq!((a.clone() * b.clone()).conj(), a.conj() * b.conj());
            assert_eq!((a.clone() + b.clone()).conj(), a.conj() + b.conj());
        }
    }

    #[test]
    fn conjugation_fixes_the_real_subfield() {
        // z + z^6 lies in the real subfield and is fixed by conjugation.
        let real = CycloNum::zeta() + CycloNum::zeta_pow(6);
        assert_eq!(real.conj(), real);
        // For a rational element a, a * conj(a) = a^2 stays rational.
        let a = CycloNum::from_rational(&q(3, 2));
        assert_eq!(a.clone() * a.conj(), CycloNum::from_rational(&q(9, 4)));
        // For 1 + z it does not: (1 + z)(1 + z^6) = 2 + z + z^6.
        let b = CycloNum::one() + CycloNum::zeta();
        let bb = b.clone() * b.conj();
        assert!(!bb.is_rational());
        let expected = CycloNum::from_int(2) + CycloNum::zeta() + CycloNum::zeta_pow(6);
        assert_eq!(bb, expected);
        // A generic element is not fixed by conjugation.
        let generic = CycloNum::zeta() + CycloNum::from_int(2) * CycloNum::zeta_pow(3);
        assert_ne!(generic.conj(), generic);
    }

    #[test]
    fn inverse_of_zero_is_an_error() {
        assert!(matches!(
            CycloNum::zero().inv(),
            Err(ExactError::DivisionByZero)
        ));
    }

    #[test]
    fn rational_string_roundtrip() {
        let r = q(-22, 8);
        assert_eq!(rational_string(&r), "-11/4");
        assert_eq!(parse_rational("-11/4"), Some(r));
        assert_eq!(parse_rational("5"), Some(q(5, 1)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
