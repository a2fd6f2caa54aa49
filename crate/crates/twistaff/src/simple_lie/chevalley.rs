//! Chevalley basis of a simple Lie algebra with exact integer structure
//! constants, the invariant bilinear form normalized so that long roots have
//! squared length 2, and the standard involutions (Chevalley involution,
//! coefficient conjugation, and their composite).
//!
//! Structure constant signs are fixed by extraspecial pairs: positive roots
//! are ordered by height then lexicographically; for each non-simple
//! positive root gamma the minimal epsilon with gamma - epsilon positive
//! determines the extraspecial pair, whose constant is declared positive.
//! All remaining constants follow from the two standard identities relating
//! constants around closed root triples and quadruples.

use super::root_system::{LieType, Rat, Root, RootSystem};
use crate::scalars::Cyc;
use num::{BigInt, Zero};
use std::collections::BTreeMap;

/// Sparse element of the algebra over Q(zeta_M), indexed by Chevalley basis
/// slots: [0, npos) are e_alpha, [npos, 2 npos) are e_{-alpha}, and the last
/// `rank` slots are the simple coroots.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Elt {
    pub conductor: u32,
    pub terms: BTreeMap<usize, Cyc>,
}

impl Elt {
    pub fn zero(conductor: u32) -> Self {
        Elt { conductor, terms: BTreeMap::new() }
    }

    pub fn basis(conductor: u32, idx: usize) -> Self {
        let mut e = Self::zero(conductor);
        e.terms.insert(idx, Cyc::one(conductor));
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn insert(&mut self, idx: usize, c: Cyc) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(idx) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Elt, c: &Cyc) {
        for (&i, x) in &other.terms {
            self.insert(i, x * c);
        }
    }

    pub fn add(&self, other: &Elt) -> Elt {
        let mut out = self.clone();
        out.add_scaled(other, &Cyc::one(self.conductor));
        out
    }

    pub fn sub(&self, other: &Elt) -> Elt {
        let mut out = self.clone();
        out.add_scaled(other, &Cyc::from_i64(self.conductor, -1));
        out
    }

    pub fn scale(&self, c: &Cyc) -> Elt {
        let mut out = Elt::zero(self.conductor);
        for (&i, x) in &self.terms {
            out.insert(i, x * c);
        }
        out
    }

    pub fn neg(&self) -> Elt {
        self.scale(&Cyc::from_i64(self.conductor, -1))
    }

    /// Conjugate all coefficients (the antilinear map fixing the Chevalley
    /// basis).
    pub fn conj_coeffs(&self) -> Elt {
        let mut out = Elt::zero(self.conductor);
        for (&i, x) in &self.terms {
            out.insert(i, x.conj());
        }
        out
    }

    pub fn coeff(&self, idx: usize) -> Cyc {
        self.terms.get(&idx).cloned().unwrap_or_else(|| Cyc::zero(self.conductor))
    }

    pub fn to_dense(&self, dim: usize) -> Vec<Cyc> {
        let mut v = vec![Cyc::zero(self.conductor); dim];
        for (&i, x) in &self.terms {
            v[i] = x.clone();
        }
        v
    }

    pub fn from_dense(conductor: u32, v: &[Cyc]) -> Elt {
        let mut e = Elt::zero(conductor);
        for (i, x) in v.iter().enumerate() {
            if !x.is_zero() {
                e.terms.insert(i, x.clone());
            }
        }
        e
    }
}

pub struct ChevalleyAlgebra {
    pub rs: RootSystem,
    pub conductor: u32,
    pub npos: usize,
    pub dim: usize,
    /// Structure constants N for pairs of signed roots whose sum is a root.
    /// Indexed by signed-root slots (same convention as Elt).
    root_n: Vec<Vec<i64>>,
    /// Bracket table over all basis pairs: list of (basis index, integer
    /// coefficient).
    table: Vec<Vec<Vec<(usize, i64)>>>,
    /// form value <e_alpha, e_{-alpha}> = 2/(alpha,alpha) per positive root.
    pub root_pair_form: Vec<Rat>,
    /// Gram of simple coroots <h_i, h_j>.
    pub coroot_gram: Vec<Vec<Rat>>,
}

impl ChevalleyAlgebra {
    pub fn new(t: LieType, conductor: u32) -> Self {
        let rs = RootSystem::new(t);
        let npos = rs.num_positive();
        let rank = rs.rank;
        let dim = 2 * npos + rank;

        let pos_n = positive_structure_constants(&rs);

        // form normalization per positive root and coroot Gram
        let two = Rat::from_integer(2.into());
        let root_pair_form: Vec<Rat> =
            rs.positive.iter().map(|a| &two / rs.length_sq(a)).collect();
        let mut coroot_gram = vec![vec![Rat::zero(); rank]; rank];
        for i in 0..rank {
            for j in 0..rank {
                coroot_gram[i][j] =
                    &rs.gram[i][j] / (&rs.half_lengths[i] * &rs.half_lengths[j]);
            }
        }

        let mut alg = ChevalleyAlgebra {
            rs,
            conductor,
            npos,
            dim,
            root_n: vec![vec![0; 2 * npos]; 2 * npos],
            table: Vec::new(),
            root_pair_form,
            coroot_gram,
        };
        alg.fill_signed_constants(&pos_n);
        alg.build_table();
        alg
    }

    /// The signed root at slot idx < 2*npos.
    pub fn slot_root(&self, idx: usize) -> Root {
        if idx < self.npos {
            self.rs.positive[idx].clone()
        } else {
            self.rs.positive[idx - self.npos].neg()
        }
    }

    pub fn slot_of_root(&self, r: &Root) -> Option<usize> {
        if let Some(i) = self.rs.positive_index(r) {
            Some(i)
        } else {
            self.rs.positive_index(&r.neg()).map(|i| i + self.npos)
        }
    }

    pub fn rank(&self) -> usize {
        self.rs.rank
    }

    pub fn h_slot(&self, i: usize) -> usize {
        2 * self.npos + i
    }

    pub fn e_simple(&self, i: usize) -> Elt {
        let mut v = vec![0i16; self.rs.rank];
        v[i] = 1;
        Elt::basis(self.conductor, self.rs.positive_index(&Root(v)).unwrap())
    }

    pub fn f_simple(&self, i: usize) -> Elt {
        let mut v = vec![0i16; self.rs.rank];
        v[i] = 1;
        Elt::basis(self.conductor, self.npos + self.rs.positive_index(&Root(v)).unwrap())
    }

    pub fn h_simple(&self, i: usize) -> Elt {
        Elt::basis(self.conductor, self.h_slot(i))
    }

    /// The coroot of a signed root, as integer coordinates on simple
    /// coroots.
    pub fn coroot_coords(&self, r: &Root) -> Vec<i64> {
        let d_r = self.rs.length_sq(r) / Rat::from_integer(2.into());
        (0..self.rs.rank)
            .map(|i| {
                let q = Rat::from_integer(BigInt::from(r.0[i] as i64))
                    * &self.rs.half_lengths[i]
                    / &d_r;
                assert!(q.is_integer(), "non-integral coroot coordinate");
                int_val(&q)
            })
            .collect()
    }

    fn fill_signed_constants(&mut self, pos_n: &[Vec<i64>]) {
        let npos = self.npos;
        for a in 0..2 * npos {
            for b in 0..2 * npos {
                let ra = self.slot_root(a);
                let rb = self.slot_root(b);
                let sum = ra.add(&rb);
                if sum.0.iter().all(|&x| x == 0) || !self.rs.is_root(&sum) {
                    continue;
                }
                let v = n_signed(&self.rs, pos_n, &ra, &rb);
                self.root_n[a][b] = v;
            }
        }
    }

    /// Structure constant for signed-root slots with root sum; zero
    /// otherwise.
    pub fn n_const(&self, a: usize, b: usize) -> i64 {
        self.root_n[a][b]
    }

    fn build_table(&mut self) {
        let dim = self.dim;
        let mut table: Vec<Vec<Vec<(usize, i64)>>> = vec![vec![Vec::new(); dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                table[a][b] = self.bracket_basis(a, b);
            }
        }
        self.table = table;
    }

    fn bracket_basis(&self, a: usize, b: usize) -> Vec<(usize, i64)> {
        let npos = self.npos;
        let root_slots = 2 * npos;
        if a >= root_slots && b >= root_slots {
            return Vec::new(); // Cartan is abelian
        }
        if a >= root_slots {
            // [h_i, e_beta] = <beta, alpha_i_check> e_beta
            let i = a - root_slots;
            let beta = self.slot_root(b);
            let c = self.rs.pairing_simple_coroot(&beta, i);
            return if c == 0 { Vec::new() } else { vec![(b, c)] };
        }
        if b >= root_slots {
            let mut out = self.bracket_basis(b, a);
            for t in &mut out {
                t.1 = -t.1;
            }
            return out;
        }
        let ra = self.slot_root(a);
        let rb = self.slot_root(b);
        let sum = ra.add(&rb);
        if sum.0.iter().all(|&x| x == 0) {
            // [e_alpha, e_{-alpha}] = coroot of alpha (for alpha the root in
            // slot a)
            let co = self.coroot_coords(&ra);
            return co
                .into_iter()
                .enumerate()
                .filter(|(_, c)| *c != 0)
                .map(|(i, c)| (root_slots + i, c))
                .collect();
        }
        if let Some(slot) = self.slot_of_root(&sum) {
            let n = self.root_n[a][b];
            debug_assert!(n != 0, "vanishing constant on a root sum");
            vec![(slot, n)]
        } else {
            Vec::new()
        }
    }

    pub fn bracket(&self, x: &Elt, y: &Elt) -> Elt {
        let mut out = Elt::zero(self.conductor);
        for (&a, ca) in &x.terms {
            for (&b, cb) in &y.terms {
                let entries = &self.table[a][b];
                if entries.is_empty() {
                    continue;
                }
                let prod = ca * cb;
                for &(idx, n) in entries {
                    out.insert(idx, prod.mul_rat(&Rat::from_integer(n.into())));
                }
            }
        }
        out
    }

    /// Invariant form normalized so <e_theta, e_{-theta}> = 1 for the
    /// highest root theta.
    pub fn form(&self, x: &Elt, y: &Elt) -> Cyc {
        let npos = self.npos;
        let mut acc = Cyc::zero(self.conductor);
        for (&a, ca) in &x.terms {
            for (&b, cb) in &y.terms {
                let v: Option<Rat> = if a < npos && (npos..2 * npos).contains(&b) && b - npos == a
                {
                    Some(self.root_pair_form[a].clone())
                } else if b < npos && (npos..2 * npos).contains(&a) && a - npos == b {
                    Some(self.root_pair_form[b].clone())
                } else if a >= 2 * npos && b >= 2 * npos {
                    Some(self.coroot_gram[a - 2 * npos][b - 2 * npos].clone())
                } else {
                    None
                };
                if let Some(q) = v {
                    if !q.is_zero() {
                        let p = ca * cb;
                        acc += &p.mul_rat(&q);
                    }
                }
            }
        }
        acc
    }

    /// Chevalley involution: e_alpha -> -e_{-alpha}, h -> -h (linear).
    pub fn omega(&self, x: &Elt) -> Elt {
        let npos = self.npos;
        let m1 = Cyc::from_i64(self.conductor, -1);
        let mut out = Elt::zero(self.conductor);
        for (&i, c) in &x.terms {
            let j = if i < npos {
                i + npos
            } else if i < 2 * npos {
                i - npos
            } else {
                i
            };
            out.insert(j, c * &m1);
        }
        out
    }

    /// The antilinear involution kappa = omega composed with coefficient
    /// conjugation; the fixed points form the compact real form.
    pub fn kappa(&self, x: &Elt) -> Elt {
        self.omega(&x.conj_coeffs())
    }

    /// The positive-definite Hermitian form {x, y} = -<x, kappa(y)>.
    pub fn herm(&self, x: &Elt, y: &Elt) -> Cyc {
        -self.form(x, &self.kappa(y))
    }

    /// Rescale root vectors: e_{+-alpha} -> signs[alpha] * e_{+-alpha}.
    /// Signs must be +-1; the Cartan and the form are unchanged.
    pub fn rescale_root_vectors(&mut self, signs: &[i64]) {
        assert_eq!(signs.len(), self.npos);
        assert!(signs.iter().all(|&s| s == 1 || s == -1));
        let sign_of = |slot: usize| -> i64 {
            if slot < self.npos {
                signs[slot]
            } else if slot < 2 * self.npos {
                signs[slot - self.npos]
            } else {
                1
            }
        };
        for a in 0..2 * self.npos {
            for b in 0..2 * self.npos {
                if self.root_n[a][b] != 0 {
                    let ra = self.slot_root(a);
                    let rb = self.slot_root(b);
                    let s = self.slot_of_root(&ra.add(&rb)).unwrap();
                    self.root_n[a][b] *= sign_of(a) * sign_of(b) * sign_of(s);
                }
            }
        }
        self.build_table();
    }
}

fn int_val(q: &Rat) -> i64 {
    use num::ToPrimitive;
    q.to_integer().to_i64().expect("structure constant overflow")
}

/// Structure constants on ordered pairs of positive roots (by positive-root
/// index), via the extraspecial-pair algorithm.
fn positive_structure_constants(rs: &RootSystem) -> Vec<Vec<i64>> {
    let npos = rs.num_positive();
    let mut n = vec![vec![0i64; npos]; npos];
    for gamma in rs.positive.iter() {
        if gamma.height() < 2 {
            continue;
        }
        // extraspecial pair: minimal eps with gamma - eps a positive root
        let eps_i = (0..npos)
            .find(|&i| {
                let diff = gamma.sub(&rs.positive[i]);
                rs.is_positive_root(&diff)
            })
            .expect("no extraspecial decomposition");
        let eps = rs.positive[eps_i].clone();
        let eta = gamma.sub(&eps);
        let eta_i = rs.positive_index(&eta).unwrap();
        // string down: p = max k with eta - k*eps a root
        let mut p = 0i64;
        let mut cur = eta.clone();
        loop {
            let nxt = cur.sub(&eps);
            if nxt.0.iter().all(|&x| x == 0) || !rs.is_root(&nxt) {
                break;
            }
            p += 1;
            cur = nxt;
        }
        n[eps_i][eta_i] = p + 1;
        n[eta_i][eps_i] = -(p + 1);

        // remaining special pairs for gamma via the four-root identity
        for ai in 0..npos {
            let alpha = &rs.positive[ai];
            let beta = gamma.sub(alpha);
            if !rs.is_positive_root(&beta) {
                continue;
            }
            let bi = rs.positive_index(&beta).unwrap();
            if ai > bi || (ai == eps_i && bi == eta_i) {
                continue;
            }
            let gg = rs.length_sq(gamma);
            let mut acc = Rat::zero();
            // term 1: N(eps,-alpha) N(eta,-beta) / (eps-alpha, eps-alpha)
            let d1 = eps.sub(alpha);
            if rs.is_root(&d1) {
                let t = Rat::from_integer(BigInt::from(
                    n_signed(rs, &n, &eps, &alpha.neg()) * n_signed(rs, &n, &eta, &beta.neg()),
                ));
                acc += t / rs.length_sq(&d1);
            }
            // term 2: N(-alpha,eta) N(eps,-beta) / (eta-alpha, eta-alpha)
            let d2 = eta.sub(alpha);
            if rs.is_root(&d2) {
                let t = Rat::from_integer(BigInt::from(
                    n_signed(rs, &n, &alpha.neg(), &eta) * n_signed(rs, &n, &eps, &beta.neg()),
                ));
                acc += t / rs.length_sq(&d2);
            }
            let val = -(gg * acc) / Rat::from_integer(BigInt::from(n[eps_i][eta_i]));
            assert!(val.is_integer(), "non-integral structure constant");
            let v = int_val(&val);
            assert!(v != 0, "special-pair constant vanished for root sum");
            n[ai][bi] = v;
            n[bi][ai] = -v;
        }
    }
    n
}

/// Structure constant for an arbitrary pair of signed roots whose sum is a
/// nonzero root, derived from the positive-pair table by the closed-triple
/// identity N(a,b)/(c,c) = N(b,c)/(a,a) for a + b + c = 0 and by
/// N(-a,-b) = -N(a,b).
fn n_signed(rs: &RootSystem, pos_n: &[Vec<i64>], ra: &Root, rb: &Root) -> i64 {
    let sum = ra.add(rb);
    debug_assert!(rs.is_root(&sum));
    let ap = ra.is_positive();
    let bp = rb.is_positive();
    if ap && bp {
        return pos_n[rs.positive_index(ra).unwrap()][rs.positive_index(rb).unwrap()];
    }
    if !ap && !bp {
        return -n_signed(rs, pos_n, &ra.neg(), &rb.neg());
    }
    if !ap {
        // reduce to (positive, negative)
        return -n_signed(rs, pos_n, rb, ra);
    }
    // ra positive, rb negative; let y = -rb (positive), x = ra
    let x = ra;
    let y = rb.neg();
    let diff = x.sub(&y);
    if diff.is_positive() {
        // triple (x, -y, -delta), delta = x - y positive:
        // N(x,-y)/(delta,delta) = N(-y,-delta)/(x,x) = -N(y,delta)/(x,x)
        let delta = diff;
        let q = rs.length_sq(&delta)
            * Rat::from_integer(BigInt::from(-n_signed(rs, pos_n, &y, &delta)))
            / rs.length_sq(x);
        assert!(q.is_integer());
        int_val(&q)
    } else {
        // triple (x, -y, delta'), delta' = y - x positive:
        // N(x,-y)/(delta',delta') = N(delta',x)/(y,y)
        let delta = diff.neg();
        let q = rs.length_sq(&delta)
            * Rat::from_integer(BigInt::from(n_signed(rs, pos_n, &delta, x)))
            / rs.length_sq(&y);
        assert!(q.is_integer());
        int_val(&q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Signed;

    fn algebras() -> Vec<ChevalleyAlgebra> {
        [
            LieType::A(2),
            LieType::A(3),
            LieType::A(4),
            LieType::D(4),
            LieType::B(2),
            LieType::C(3),
            LieType::G2,
        ]
        .into_iter()
        .map(|t| ChevalleyAlgebra::new(t, 4))
        .collect()
    }

    #[test]
    fn jacobi_identity_all_basis_triples() {
        for g in algebras() {
            for a in 0..g.dim {
                let ea = Elt::basis(g.conductor, a);
                for b in 0..g.dim {
                    let eb = Elt::basis(g.conductor, b);
                    let ab = g.bracket(&ea, &eb);
                    for c in 0..g.dim {
                        let ec = Elt::basis(g.conductor, c);
                        let bc = g.bracket(&eb, &ec);
                        let ca = g.bracket(&ec, &ea);
                        let mut acc = g.bracket(&ab, &ec);
                        acc = acc.add(&g.bracket(&bc, &ea));
                        acc = acc.add(&g.bracket(&ca, &eb));
                        assert!(
                            acc.is_zero(),
                            "Jacobi fails for {} at ({a},{b},{c})",
                            g.rs.lie_type
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn form_is_invariant_and_omega_is_automorphism() {
        for g in algebras() {
            for a in 0..g.dim {
                let ea = Elt::basis(g.conductor, a);
                for b in 0..g.dim {
                    let eb = Elt::basis(g.conductor, b);
                    // omega respects brackets
                    let lhs = g.omega(&g.bracket(&ea, &eb));
                    let rhs = g.bracket(&g.omega(&ea), &g.omega(&eb));
                    assert_eq!(lhs, rhs, "{}", g.rs.lie_type);
                    for c in 0..g.dim {
                        let ec = Elt::basis(g.conductor, c);
                        let l = g.form(&g.bracket(&ea, &eb), &ec);
                        let r = g.form(&ea, &g.bracket(&eb, &ec));
                        assert_eq!(l, r, "form invariance fails {}", g.rs.lie_type);
                    }
                }
            }
        }
    }

    #[test]
    fn herm_form_is_positive_on_basis() {
        for g in algebras() {
            for a in 0..g.dim {
                let ea = Elt::basis(g.conductor, a);
                let v = g.herm(&ea, &ea);
                let q = v.to_rat().expect("diagonal herm value must be rational");
                assert!(q.is_positive(), "{} slot {a}", g.rs.lie_type);
            }
            // kappa is an involutive antilinear map
            let i = Cyc::root_of_unity(g.conductor, 4);
            let x = Elt::basis(g.conductor, 0).scale(&i).add(&Elt::basis(g.conductor, g.dim - 1));
            assert_eq!(g.kappa(&g.kappa(&x)), x);
        }
    }

    #[test]
    fn sl2_subalgebras_from_simple_roots() {
        for g in algebras() {
            for i in 0..g.rank() {
                let e = g.e_simple(i);
                let f = g.f_simple(i);
                let h = g.h_simple(i);
                assert_eq!(g.bracket(&e, &f), h);
                assert_eq!(g.bracket(&h, &e), e.scale(&Cyc::from_i64(g.conductor, 2)));
                assert_eq!(g.bracket(&h, &f), f.scale(&Cyc::from_i64(g.conductor, -2)));
            }
        }
    }

    #[test]
    fn known_sl3_constants() {
        // In A2 the only non-simple positive root is theta = a1 + a2 with
        // extraspecial pair (a1, a2): N = 1, and N(a2,a1) = -1.
        let g = ChevalleyAlgebra::new(LieType::A(2), 4);
        let a1 = 0;
        let a2 = 1;
        assert_eq!(g.n_const(a1, a2), 1);
        assert_eq!(g.n_const(a2, a1), -1);
        // theta-pair form value is 1 (long root)
        assert_eq!(g.root_pair_form[2], Rat::from_integer(1.into()));
    }

    #[test]
    fn rescale_preserves_axioms() {
        let mut g = ChevalleyAlgebra::new(LieType::A(3), 4);
        let mut signs = vec![1i64; g.npos];
        signs[2] = -1;
        signs[4] = -1;
        g.rescale_root_vectors(&signs);
        for a in 0..g.dim {
            let ea = Elt::basis(g.conductor, a);
            for b in 0..g.dim {
                let eb = Elt::basis(g.conductor, b);
                let ab = g.bracket(&ea, &eb);
                for c in 0..g.dim {
                    let ec = Elt::basis(g.conductor, c);
                    let mut acc = g.bracket(&ab, &ec);
                    acc = acc.add(&g.bracket(&g.bracket(&eb, &ec), &ea));
                    acc = acc.add(&g.bracket(&g.bracket(&ec, &ea), &eb));
                    assert!(acc.is_zero());
                }
            }
        }
    }
}
