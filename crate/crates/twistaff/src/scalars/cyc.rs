//! Exact arithmetic in the cyclotomic field Q(zeta_M).
//!
//! An element is stored as a coefficient vector of length phi(M) over the
//! power basis 1, zeta, ..., zeta^(phi(M)-1) of Q[x]/(Phi_M(x)).  Every value
//! carries its conductor M; mixing conductors is a programming error and
//! panics.  The per-conductor reduction data (the cyclotomic polynomial and
//! the expansions of high powers of zeta) is computed once and cached
//! process-wide.

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Euler totient.
fn phi(n: u32) -> u32 {
    let mut result = n;
    let mut n = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Integer polynomial helpers (coefficient vectors, low degree first).
fn poly_trim(p: &mut Vec<BigInt>) {
    while p.len() > 1 && p.last().map(|c| c.is_zero()) == Some(true) {
        p.pop();
    }
}

/// Exact division of monic-divisor integer polynomials; panics on a nonzero
/// remainder.
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    assert!(den.last().map(|c| c.is_one()) == Some(true), "divisor must be monic");
    let mut rem: Vec<BigInt> = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        assert!(rem.iter().all(|c| c.is_zero()), "inexact polynomial division");
        return vec![BigInt::zero()];
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i].clone();
        if c.is_zero() {
            continue;
        }
        quot[i - dd] = c.clone();
        for (j, dc) in den.iter().enumerate() {
            let idx = i - dd + j;
            let sub = &c * dc;
            rem[idx] -= sub;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "inexact polynomial division");
    poly_trim(&mut quot);
    quot
}

/// The M-th cyclotomic polynomial with integer coefficients, computed as
/// (x^M - 1) divided by the product of Phi_d over proper divisors d of M.
fn cyclotomic_poly(m: u32) -> Vec<BigInt> {
    if m == 1 {
        return vec![-BigInt::one(), BigInt::one()];
    }
    let mut num = vec![BigInt::zero(); m as usize + 1];
    num[0] = -BigInt::one();
    num[m as usize] = BigInt::one();
    let mut result = num;
    for d in 1..m {
        if m % d == 0 {
            let phi_d = cyclotomic_poly(d);
            result = poly_div_exact(&result, &phi_d);
        }
    }
    result
}

struct FieldData {
    phi: usize,
    /// powers[j] expands zeta^j over the power basis, for 0 <= j < 2*M.
    powers: Vec<Vec<Rat>>,
    /// Phi_M as rational coefficients (monic), for the extended Euclid in
    /// inversion.
    modulus: Vec<Rat>,
}

fn field_data(m: u32) -> Arc<FieldData> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<FieldData>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(m)
        .or_insert_with(|| {
            assert!(m >= 1, "conductor must be positive");
            let cyc = cyclotomic_poly(m);
            let deg = cyc.len() - 1;
            assert_eq!(deg as u32, phi(m));
            let modulus: Vec<Rat> = cyc.iter().map(|c| Rat::from_integer(c.clone())).collect();
            // zeta^j for j < deg is a basis vector; for higher j reduce the
            // previous power shifted by one using x^deg = -(lower part of Phi).
            let mut powers: Vec<Vec<Rat>> = Vec::with_capacity(2 * m as usize);
            for j in 0..deg {
                let mut v = vec![Rat::zero(); deg];
                v[j] = Rat::one();
                powers.push(v);
            }
            for _ in deg..2 * m as usize {
                let prev = powers.last().unwrap();
                let mut next = vec![Rat::zero(); deg];
                // shift up by one
                let top = prev[deg - 1].clone();
                for k in (1..deg).rev() {
                    next[k] = prev[k - 1].clone();
                }
                if !top.is_zero() {
                    for k in 0..deg {
                        next[k] -= &top * &modulus[k];
                    }
                }
                powers.push(next);
            }
            Arc::new(FieldData { phi: deg, powers, modulus })
        })
        .clone()
}

/// Smallest conductor containing both the m-th roots of unity and a square
/// root of -1 (the latter is needed by order-4 automorphisms and by complex
/// conjugation-aware constructions throughout the toolkit).
pub fn conductor_for_order(m: u32) -> u32 {
    num::integer::lcm(m, 4)
}

/// An element of Q(zeta_M).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyc {
    m: u32,
    c: Vec<Rat>,
}

impl Cyc {
    pub fn zero(m: u32) -> Self {
        let fd = field_data(m);
        Cyc { m, c: vec![Rat::zero(); fd.phi] }
    }

    pub fn one(m: u32) -> Self {
        Self::from_rat(m, Rat::one())
    }

    pub fn from_rat(m: u32, q: Rat) -> Self {
        let mut x = Self::zero(m);
        x.c[0] = q;
        x
    }

    pub fn from_i64(m: u32, n: i64) -> Self {
        Self::from_rat(m, rat_i64(n))
    }

    /// zeta_M^k.
    pub fn zeta_pow(m: u32, k: i64) -> Self {
        let fd = field_data(m);
        let j = k.rem_euclid(m as i64) as usize;
        Cyc { m, c: fd.powers[j].clone() }
    }

    /// A chosen primitive `order`-th root of unity, zeta_M^(M/order);
    /// requires order | M.
    pub fn root_of_unity(m: u32, order: u32) -> Self {
        assert!(m % order == 0, "order {order} does not divide conductor {m}");
        Self::zeta_pow(m, (m / order) as i64)
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    /// Coordinates over the power basis of the field (length phi(M)); used
    /// for serialization.
    pub fn coords(&self) -> &[Rat] {
        &self.c
    }

    /// Inverse of [`Cyc::coords`].
    pub fn from_coords(m: u32, c: Vec<Rat>) -> Self {
        let fd = field_data(m);
        assert_eq!(c.len(), fd.phi, "wrong coordinate length for conductor {m}");
        Cyc { m, c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.c[1..].iter().all(|x| x.is_zero())
    }

    pub fn to_rat(&self) -> Option<Rat> {
        if self.is_rational() {
            Some(self.c[0].clone())
        } else {
            None
        }
    }

    pub fn rat_part(&self) -> &Rat {
        &self.c[0]
    }

    /// Complex conjugation, the field automorphism zeta -> zeta^(M-1).
    pub fn conj(&self) -> Self {
        let fd = field_data(self.m);
        let mut out = vec![Rat::zero(); fd.phi];
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            let e = ((self.m as usize - j) % self.m as usize) as usize;
            for (k, p) in fd.powers[e].iter().enumerate() {
                if !p.is_zero() {
                    out[k] += cj * p;
                }
            }
        }
        Cyc { m: self.m, c: out }
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    fn assert_same(&self, other: &Self) {
        assert_eq!(self.m, other.m, "conductor mismatch: {} vs {}", self.m, other.m);
    }

    pub fn mul_rat(&self, q: &Rat) -> Self {
        Cyc { m: self.m, c: self.c.iter().map(|x| x * q).collect() }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x]
    /// against Phi_M.  Panics on zero.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero in Q(zeta_{})", self.m);
        let fd = field_data(self.m);
        if self.is_rational() {
            return Self::from_rat(self.m, self.c[0].recip());
        }
        let a: Vec<Rat> = self.c.clone();
        let (g, u) = ext_gcd_mod(&a, &fd.modulus);
        // g is a nonzero constant: u * a = g (mod Phi), so a^{-1} = u / g.
        let ginv = g.recip();
        let mut out = vec![Rat::zero(); fd.phi];
        for (j, uj) in u.iter().enumerate() {
            if uj.is_zero() {
                continue;
            }
            let coeff = uj * &ginv;
            if j < fd.phi {
                out[j] += coeff;
            } else {
                for (k, p) in fd.powers[j].iter().enumerate() {
                    out[k] += &coeff * p;
                }
            }
        }
        Cyc { m: self.m, c: out }
    }

    /// Numerical embedding sending zeta_M to exp(2 pi i / M).
    pub fn embed(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            let theta = 2.0 * std::f64::consts::PI * j as f64 / self.m as f64;
            let cf = rat_to_f64(cj);
            acc += Complex64::new(theta.cos(), theta.sin()) * cf;
        }
        acc
    }
}

pub(crate) fn rat_to_f64(q: &Rat) -> f64 {
    use num::ToPrimitive;
    q.to_f64().unwrap_or_else(|| {
        // fall back on a scaled division for extreme numerators/denominators
        let n = q.numer();
        let d = q.denom();
        let bits = n.bits().max(d.bits()) as i64 - 500;
        if bits > 0 {
            let shift = BigInt::one() << bits as usize;
            let nn = n / &shift;
            let dd = d / &shift;
            nn.to_f64().unwrap() / dd.to_f64().unwrap()
        } else {
            f64::NAN
        }
    })
}

/// Extended gcd of a against the monic modulus: returns (g, u) with
/// u*a = g (mod modulus) and g a nonzero rational constant (a is invertible
/// since the modulus is irreducible and a is nonzero of lower degree).
fn ext_gcd_mod(a: &[Rat], modulus: &[Rat]) -> (Rat, Vec<Rat>) {
    // r0 = modulus, r1 = a; track only the coefficient of `a`.
    let mut r0: Vec<Rat> = modulus.to_vec();
    let mut r1: Vec<Rat> = a.to_vec();
    qtrim(&mut r1);
    let mut u0: Vec<Rat> = vec![Rat::zero()];
    let mut u1: Vec<Rat> = vec![Rat::one()];
    loop {
        qtrim(&mut r1);
        if qdeg(&r1) == 0 && r1[0].is_zero() {
            panic!("element not invertible modulo cyclotomic polynomial");
        }
        if qdeg(&r1) == 0 {
            return (r1[0].clone(), u1);
        }
        let (q, r) = qdivmod(&r0, &r1);
        // u_next = u0 - q*u1
        let qu1 = qmul(&q, &u1);
        let u_next = qsub(&u0, &qu1);
        r0 = std::mem::replace(&mut r1, r);
        u0 = std::mem::replace(&mut u1, u_next);
    }
}

fn qdeg(p: &[Rat]) -> usize {
    let mut d = p.len() - 1;
    while d > 0 && p[d].is_zero() {
        d -= 1;
    }
    d
}

fn qtrim(p: &mut Vec<Rat>) {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
}

fn qmul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

fn qsub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut out = vec![Rat::zero(); n];
    for (i, ai) in a.iter().enumerate() {
        out[i] += ai;
    }
    for (i, bi) in b.iter().enumerate() {
        out[i] -= bi;
    }
    out
}

fn qdivmod(num: &[Rat], den: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let dd = qdeg(den);
    let lead = den[dd].clone();
    let mut rem = num.to_vec();
    qtrim(&mut rem);
    if qdeg(&rem) < dd || (qdeg(&rem) == 0 && rem[0].is_zero()) {
        return (vec![Rat::zero()], rem);
    }
    let mut quot = vec![Rat::zero(); qdeg(&rem) - dd + 1];
    for i in (dd..=qdeg(&rem)).rev() {
        let c = &rem[i] / &lead;
        if c.is_zero() {
            continue;
        }
        quot[i - dd] = c.clone();
        for j in 0..=dd {
            let sub = &c * &den[j];
            rem[i - dd + j] -= sub;
        }
    }
    qtrim(&mut rem);
    (quot, rem)
}

impl fmt::Debug for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if j == 0 {
                write!(f, "{cj}")?;
            } else if j == 1 {
                write!(f, "{cj}*z{}", self.m)?;
            } else {
                write!(f, "{cj}*z{}^{j}", self.m)?;
            }
        }
        Ok(())
    }
}

macro_rules! binop_impl {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl std::ops::$trait<&Cyc> for &Cyc {
            type Output = Cyc;
            fn $method(self, rhs: &Cyc) -> Cyc {
                Cyc::$impl_fn(self, rhs)
            }
        }
        impl std::ops::$trait<Cyc> for Cyc {
            type Output = Cyc;
            fn $method(self, rhs: Cyc) -> Cyc {
                Cyc::$impl_fn(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Cyc> for Cyc {
            type Output = Cyc;
            fn $method(self, rhs: &Cyc) -> Cyc {
                Cyc::$impl_fn(&self, rhs)
            }
        }
        impl std::ops::$trait<Cyc> for &Cyc {
            type Output = Cyc;
            fn $method(self, rhs: Cyc) -> Cyc {
                Cyc::$impl_fn(self, &rhs)
            }
        }
    };
}

impl Cyc {
    fn add_impl(&self, rhs: &Cyc) -> Cyc {
        self.assert_same(rhs);
        Cyc {
            m: self.m,
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }

    fn sub_impl(&self, rhs: &Cyc) -> Cyc {
        self.assert_same(rhs);
        Cyc {
            m: self.m,
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }

    fn mul_impl(&self, rhs: &Cyc) -> Cyc {
        self.assert_same(rhs);
        let fd = field_data(self.m);
        let deg = fd.phi;
        let mut out = vec![Rat::zero(); deg];
        for (i, ai) in self.c.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in rhs.c.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let prod = ai * bj;
                let e = i + j;
                if e < deg {
                    out[e] += prod;
                } else {
                    for (k, p) in fd.powers[e].iter().enumerate() {
                        if !p.is_zero() {
                            out[k] += &prod * p;
                        }
                    }
                }
            }
        }
        Cyc { m: self.m, c: out }
    }

    fn div_impl(&self, rhs: &Cyc) -> Cyc {
        self.mul_impl(&rhs.inv())
    }
}

binop_impl!(Add, add, add_impl);
binop_impl!(Sub, sub, sub_impl);
binop_impl!(Mul, mul, mul_impl);
binop_impl!(Div, div, div_impl);

impl std::ops::Neg for &Cyc {
    type Output = Cyc;
    fn neg(self) -> Cyc {
        Cyc { m: self.m, c: self.c.iter().map(|x| -x).collect() }
    }
}

impl std::ops::Neg for Cyc {
    type Output = Cyc;
    fn neg(self) -> Cyc {
        -&self
    }
}

impl std::ops::AddAssign<&Cyc> for Cyc {
    fn add_assign(&mut self, rhs: &Cyc) {
        self.assert_same(rhs);
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl std::ops::SubAssign<&Cyc> for Cyc {
    fn sub_assign(&mut self, rhs: &Cyc) {
        self.assert_same(rhs);
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polys() {
        // Phi_4 = x^2 + 1, Phi_12 = x^4 - x^2 + 1
        let p4 = cyclotomic_poly(4);
        assert_eq!(p4, vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)]);
        let p12 = cyclotomic_poly(12);
        assert_eq!(
            p12,
            vec![
                BigInt::from(1),
                BigInt::from(0),
                BigInt::from(-1),
                BigInt::from(0),
                BigInt::from(1)
            ]
        );
    }

    #[test]
    fn roots_of_unity_orders() {
        for m in [1u32, 2, 3, 4, 6, 8, 12] {
            let big = conductor_for_order(m);
            let z = Cyc::root_of_unity(big, m);
            let mut p = Cyc::one(big);
            for k in 1..=m {
                p = &p * &z;
                if k < m {
                    assert!(p != Cyc::one(big), "order of zeta_{m} too small at {k}");
                }
            }
            assert_eq!(p, Cyc::one(big));
        }
    }

    #[test]
    fn conj_and_inverse() {
        let m = 12;
        let z = Cyc::zeta_pow(m, 1);
        // z * conj(z) = 1 for a root of unity
        assert_eq!(&z * &z.conj(), Cyc::one(m));
        let x = &Cyc::from_i64(m, 3) + &Cyc::zeta_pow(m, 5).mul_rat(&rat_i64(7).recip());
        let xi = x.inv();
        assert_eq!(&x * &xi, Cyc::one(m));
        // conj is an involution and a ring homomorphism
        assert_eq!(x.conj().conj(), x);
        let y = &Cyc::zeta_pow(m, 7) - &Cyc::from_i64(m, 2);
        assert_eq!((&x * &y).conj(), &x.conj() * &y.conj());
    }

    #[test]
    fn i_squared_is_minus_one() {
        for m in [4u32, 12] {
            let i = Cyc::root_of_unity(m, 4);
            assert_eq!(&i * &i, Cyc::from_i64(m, -1));
            assert_eq!(i.conj(), -&i);
        }
    }

    #[test]
    fn embed_matches_algebra() {
        let m = 12;
        let x = &Cyc::zeta_pow(m, 1) + &Cyc::from_i64(m, 2);
        let y = &Cyc::zeta_pow(m, 7) - &Cyc::zeta_pow(m, 2);
        let lhs = (&x * &y).embed();
        let rhs = x.embed() * y.embed();
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
