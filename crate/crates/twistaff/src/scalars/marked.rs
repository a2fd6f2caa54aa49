//! Degree-truncated polynomials in formal marked-point variables.
//!
//! For s+1 marked points there are variables z_0, ..., z_s and their formal
//! conjugates zbar_0, ..., zbar_s.  Coefficients are cyclotomic numbers and
//! every monomial of total degree above the context cap is discarded, so the
//! ring is Q(zeta_M)[z, zbar] / (degree > cap).  Conjugation swaps z_k with
//! zbar_k and conjugates coefficients.

use super::cyc::{Cyc, Rat};
use num::complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// Shared shape information: conductor of the coefficients, number of marked
/// points, and the total-degree truncation cap.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MarkedCtx {
    pub conductor: u32,
    pub points: usize,
    pub cap: u32,
}

/// Monomial exponents: index 2k is z_k, index 2k+1 is zbar_k.
type Mono = Vec<u16>;

#[derive(Clone, PartialEq, Eq)]
pub struct Marked {
    ctx: MarkedCtx,
    terms: BTreeMap<Mono, Cyc>,
}

fn mono_degree(m: &Mono) -> u32 {
    m.iter().map(|&e| e as u32).sum()
}

impl Marked {
    pub fn zero(ctx: MarkedCtx) -> Self {
        Marked { ctx, terms: BTreeMap::new() }
    }

    pub fn constant(ctx: MarkedCtx, c: Cyc) -> Self {
        assert_eq!(c.conductor(), ctx.conductor);
        let mut out = Self::zero(ctx);
        if !c.is_zero() {
            out.terms.insert(vec![0; 2 * ctx.points], c);
        }
        out
    }

    pub fn one(ctx: MarkedCtx) -> Self {
        Self::constant(ctx, Cyc::one(ctx.conductor))
    }

    pub fn from_rat(ctx: MarkedCtx, q: Rat) -> Self {
        Self::constant(ctx, Cyc::from_rat(ctx.conductor, q))
    }

    pub fn from_i64(ctx: MarkedCtx, n: i64) -> Self {
        Self::from_rat(ctx, Rat::from_integer(n.into()))
    }

    /// The variable z_k.
    pub fn z(ctx: MarkedCtx, k: usize) -> Self {
        Self::z_pow(ctx, k, 1)
    }

    /// The variable zbar_k.
    pub fn zbar(ctx: MarkedCtx, k: usize) -> Self {
        Self::zbar_pow(ctx, k, 1)
    }

    pub fn z_pow(ctx: MarkedCtx, k: usize, e: u32) -> Self {
        Self::var_pow(ctx, 2 * k, e)
    }

    pub fn zbar_pow(ctx: MarkedCtx, k: usize, e: u32) -> Self {
        Self::var_pow(ctx, 2 * k + 1, e)
    }

    fn var_pow(ctx: MarkedCtx, slot: usize, e: u32) -> Self {
        assert!(slot < 2 * ctx.points, "marked point index out of range");
        let mut out = Self::zero(ctx);
        if e <= ctx.cap {
            let mut mono = vec![0u16; 2 * ctx.points];
            mono[slot] = e as u16;
            out.terms.insert(mono, Cyc::one(ctx.conductor));
        }
        out
    }

    pub fn ctx(&self) -> MarkedCtx {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The coefficient of the constant monomial.
    pub fn constant_term(&self) -> Cyc {
        let key = vec![0u16; 2 * self.ctx.points];
        self.terms.get(&key).cloned().unwrap_or_else(|| Cyc::zero(self.ctx.conductor))
    }

    /// The coefficient of a given monomial, exponents listed as
    /// (z_0, zbar_0, z_1, zbar_1, ...).
    pub fn coeff(&self, mono: &[u16]) -> Cyc {
        assert_eq!(mono.len(), 2 * self.ctx.points);
        self.terms
            .get(&mono.to_vec())
            .cloned()
            .unwrap_or_else(|| Cyc::zero(self.ctx.conductor))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], &Cyc)> {
        self.terms.iter().map(|(m, c)| (m.as_slice(), c))
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(mono_degree).max().unwrap_or(0)
    }

    fn insert_term(&mut self, mono: Mono, c: Cyc) {
        if c.is_zero() || mono_degree(&mono) > self.ctx.cap {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Marked, scale: &Cyc) {
        assert_eq!(self.ctx, other.ctx, "marked-scalar context mismatch");
        for (m, c) in &other.terms {
            self.insert_term(m.clone(), c * scale);
        }
    }

    pub fn scale(&self, c: &Cyc) -> Marked {
        let mut out = Self::zero(self.ctx);
        for (m, x) in &self.terms {
            out.insert_term(m.clone(), x * c);
        }
        out
    }

    pub fn scale_rat(&self, q: &Rat) -> Marked {
        self.scale(&Cyc::from_rat(self.ctx.conductor, q.clone()))
    }

    /// Swap z_k with zbar_k and conjugate the coefficients.
    pub fn conj(&self) -> Marked {
        let mut out = Self::zero(self.ctx);
        for (m, c) in &self.terms {
            let mut mm = m.clone();
            for k in 0..self.ctx.points {
                mm.swap(2 * k, 2 * k + 1);
            }
            out.insert_term(mm, c.conj());
        }
        out
    }

    /// Numerical embedding: z_k goes to pts[k] and zbar_k to its complex
    /// conjugate.
    pub fn embed(&self, pts: &[Complex64]) -> Complex64 {
        assert_eq!(pts.len(), self.ctx.points);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = c.embed();
            for k in 0..self.ctx.points {
                v *= pts[k].powu(m[2 * k] as u32);
                v *= pts[k].conj().powu(m[2 * k + 1] as u32);
            }
            acc += v;
        }
        acc
    }

    /// Numerical embedding of a single coefficient-size proxy: the sum of
    /// absolute values of all rational coefficient embeddings (used for
    /// crude magnitude reporting only).
    pub fn l1_size(&self) -> f64 {
        self.terms.values().map(|c| c.embed().norm()).sum()
    }
}

impl std::ops::Add<&Marked> for &Marked {
    type Output = Marked;
    fn add(self, rhs: &Marked) -> Marked {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, &Cyc::one(self.ctx.conductor));
        out
    }
}

impl std::ops::Sub<&Marked> for &Marked {
    type Output = Marked;
    fn sub(self, rhs: &Marked) -> Marked {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, &Cyc::from_i64(self.ctx.conductor, -1));
        out
    }
}

impl std::ops::Mul<&Marked> for &Marked {
    type Output = Marked;
    fn mul(self, rhs: &Marked) -> Marked {
        assert_eq!(self.ctx, rhs.ctx, "marked-scalar context mismatch");
        let mut out = Marked::zero(self.ctx);
        for (ma, ca) in &self.terms {
            let da = mono_degree(ma);
            for (mb, cb) in &rhs.terms {
                if da + mono_degree(mb) > self.ctx.cap {
                    continue;
                }
                let mono: Mono = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.insert_term(mono, ca * cb);
            }
        }
        out
    }
}

impl std::ops::Neg for &Marked {
    type Output = Marked;
    fn neg(self) -> Marked {
        self.scale(&Cyc::from_i64(self.ctx.conductor, -1))
    }
}

impl std::ops::AddAssign<&Marked> for Marked {
    fn add_assign(&mut self, rhs: &Marked) {
        let one = Cyc::one(self.ctx.conductor);
        self.add_assign_scaled(rhs, &one);
    }
}

impl std::ops::SubAssign<&Marked> for Marked {
    fn sub_assign(&mut self, rhs: &Marked) {
        let minus_one = Cyc::from_i64(self.ctx.conductor, -1);
        self.add_assign_scaled(rhs, &minus_one);
    }
}

impl fmt::Debug for Marked {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for k in 0..self.ctx.points {
                if m[2 * k] > 0 {
                    write!(f, "*z{}^{}", k, m[2 * k])?;
                }
                if m[2 * k + 1] > 0 {
                    write!(f, "*zb{}^{}", k, m[2 * k + 1])?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> MarkedCtx {
        MarkedCtx { conductor: 4, points: 2, cap: 6 }
    }

    #[test]
    fn ring_axioms_and_truncation() {
        let c = ctx();
        let z0 = Marked::z(c, 0);
        let zb1 = Marked::zbar(c, 1);
        let a = &(&z0 * &z0) + &zb1;
        let b = &z0 - &Marked::one(c);
        assert_eq!(&a * &b, &b * &a);
        // (z0^2)^4 has degree 8 > 6, truncated away
        let z2 = &z0 * &z0;
        let z4 = &z2 * &z2;
        let z8 = &z4 * &z4;
        assert!(z8.is_zero());
        // distributivity
        let lhs = &a * &(&b + &zb1);
        let rhs = &(&a * &b) + &(&a * &zb1);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn conj_is_ring_involution() {
        let c = ctx();
        let i = Cyc::root_of_unity(4, 4);
        let a = &Marked::z(c, 0).scale(&i) + &Marked::zbar(c, 1);
        let b = &Marked::z(c, 1) * &Marked::z(c, 1);
        assert_eq!(a.conj().conj(), a);
        assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
    }

    #[test]
    fn embedding_is_multiplicative() {
        let c = ctx();
        let a = &Marked::z(c, 0) + &Marked::zbar_pow(c, 1, 2);
        let b = &Marked::z(c, 1) - &Marked::one(c);
        let pts = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.25)];
        let lhs = (&a * &b).embed(&pts);
        let rhs = a.embed(&pts) * b.embed(&pts);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
