//! Finite-order automorphisms of a simple Lie algebra and the resulting
//! cyclic grading.
//!
//! Supported automorphisms: the identity, diagram automorphisms lifted to
//! the Chevalley basis (including the order-3 rotation of D4), and the
//! order-4 automorphisms of A_{2n} obtained by composing the diagram flip
//! with exp(ad of a quarter-period torus element).
//!
//! The module produces, exactly over Q(zeta_M):
//!   * a basis-to-basis description of sigma after rescaling root vectors so
//!     that the diagram symmetry permutes basis vectors on-the-nose wherever
//!     the orbit structure allows it (flip-fixed roots of A_{2n} carry an
//!     unavoidable sign, which is recorded);
//!   * an orthogonal eigenbasis of sigma graded by eigenvalue, with
//!     positive rational norms under the contravariant Hermitian form and
//!     dual vectors;
//!   * the fixed subalgebra: its Cartan, simple restricted roots with sl2
//!     triples, its Cartan type recognized against the root-system tables,
//!     and the scale relating the induced invariant form to the normalized
//!     one;
//!   * the highest weight of each nonzero graded piece as a module over the
//!     fixed subalgebra.

use crate::linalg::CycMat;
use crate::scalars::{conductor_for_order, Cyc, Rat};
use crate::simple_lie::{ChevalleyAlgebra, Elt, LieType, Root, RootSystem, Weight};
use num::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutKind {
    Identity,
    /// Permutation of the simple-root nodes (0-based Bourbaki numbering).
    Diagram(Vec<usize>),
    /// The order-4 automorphism of A_{2n}.
    OrderFour,
}

impl AutKind {
    /// The standard automorphism of the stated order for the given type:
    /// identity for m = 1, the diagram symmetry for m = 2 or 3, and the
    /// order-4 construction on A_{2n}.
    pub fn standard(t: LieType, m: u32) -> AutKind {
        match (t, m) {
            (_, 1) => AutKind::Identity,
            (LieType::A(n), 2) => AutKind::Diagram((0..n).rev().collect()),
            (LieType::A(n), 4) => {
                assert!(n % 2 == 0, "order-4 automorphisms require A_2n");
                AutKind::OrderFour
            }
            (LieType::D(n), 2) => {
                let mut p: Vec<usize> = (0..n).collect();
                p.swap(n - 2, n - 1);
                AutKind::Diagram(p)
            }
            (LieType::D(4), 3) => AutKind::Diagram(vec![2, 1, 3, 0]),
            (LieType::E(6), 2) => AutKind::Diagram(vec![5, 1, 4, 3, 2, 0]),
            _ => panic!("no standard automorphism of order {m} on {t}"),
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            AutKind::Identity => 1,
            AutKind::OrderFour => 4,
            AutKind::Diagram(p) => {
                let mut ord = 1u32;
                for start in 0..p.len() {
                    let mut len = 1u32;
                    let mut cur = p[start];
                    while cur != start {
                        cur = p[cur];
                        len += 1;
                    }
                    ord = num::integer::lcm(ord, len);
                }
                ord
            }
        }
    }

    fn node_perm(&self, rank: usize) -> Vec<usize> {
        match self {
            AutKind::Identity => (0..rank).collect(),
            AutKind::Diagram(p) => {
                assert_eq!(p.len(), rank);
                p.clone()
            }
            AutKind::OrderFour => (0..rank).rev().collect(),
        }
    }
}

/// Expected fixed-subalgebra types for the standard automorphisms.
pub fn expected_fixed_type(t: LieType, m: u32) -> LieType {
    match (t, m) {
        (t, 1) => t,
        (LieType::A(n), 2) if n % 2 == 1 => LieType::C((n + 1) / 2),
        (LieType::A(n), 2) => LieType::B(n / 2),
        (LieType::A(n), 4) => LieType::C(n / 2),
        (LieType::D(n), 2) => LieType::B(n - 1),
        (LieType::D(4), 3) => LieType::G2,
        (LieType::E(6), 2) => LieType::F4,
        _ => panic!("no fixed-type entry for {t} with order {m}"),
    }
}

/// One element of the sigma-eigenbasis.
#[derive(Clone, Debug)]
pub struct GradedBasisElt {
    pub vec: Elt,
    /// -kappa(vec); pairs to {b,b} against vec under the invariant form.
    pub dual: Elt,
    /// sigma-eigenvalue exponent: sigma(vec) = epsilon^grade vec.
    pub grade: u32,
    /// {b, b}, positive rational.
    pub norm: Rat,
    /// Values of the weight on the orbit-sum Cartan elements of the fixed
    /// subalgebra (zero vector for Cartan-derived elements).
    pub raw_weight: Vec<i64>,
}

/// An sl2 triple for a simple restricted root of the fixed subalgebra.
#[derive(Clone, Debug)]
pub struct Sl2 {
    pub e: Elt,
    pub f: Elt,
    pub h: Elt,
    pub raw_weight: Vec<i64>,
}

pub struct FixedAlgebra {
    /// Node-orbit sums of simple coroots: the canonical basis of the fixed
    /// Cartan used for raw weight vectors.
    pub raw_cartan: Vec<Elt>,
    pub simple: Vec<Sl2>,
    pub lie_type: LieType,
    /// Abstract root system of the fixed type (normalized form).
    pub rs: RootSystem,
    /// node_perm[i] = abstract node index of the i-th simple restricted
    /// root.
    pub node_perm: Vec<usize>,
    /// The induced invariant form on fixed weights equals form_scale times
    /// the normalized form of `rs`.
    pub form_scale: Rat,
    /// raw_to_fund[i][k]: value row expressing lambda(h_i) from raw weight
    /// values, giving fundamental-weight coordinates.
    raw_to_fund: Vec<Vec<Rat>>,
}

impl FixedAlgebra {
    pub fn rank(&self) -> usize {
        self.simple.len()
    }

    /// Convert a raw weight vector to fundamental-weight coordinates of the
    /// abstract root system (abstract node ordering).
    pub fn fund_coords(&self, raw: &[i64]) -> Weight {
        let rank = self.rank();
        let mut out = vec![Rat::zero(); rank];
        for i in 0..rank {
            let mut acc = Rat::zero();
            for (k, &w) in raw.iter().enumerate() {
                acc += &self.raw_to_fund[i][k] * Rat::from_integer(w.into());
            }
            out[self.node_perm[i]] = acc;
        }
        Weight(out)
    }

    /// Inverse of [`FixedAlgebra::fund_coords`]: recover the raw weight
    /// vector (values on the orbit-sum Cartan basis) from fundamental
    /// coordinates.
    pub fn raw_coords(&self, w: &Weight) -> Vec<Rat> {
        let rank = self.rank();
        let mut aug: Vec<Vec<Rat>> = (0..rank)
            .map(|i| {
                let mut row = self.raw_to_fund[i].clone();
                row.push(w.0[self.node_perm[i]].clone());
                row
            })
            .collect();
        crate::simple_lie::rat_solve(&mut aug)
    }

    /// Induced invariant form on weights in fundamental coordinates.
    pub fn form_weights(&self, a: &Weight, b: &Weight) -> Rat {
        &self.form_scale * self.rs.form_weights(a, b)
    }

    pub fn rho(&self) -> Weight {
        self.rs.rho()
    }
}

/// Highest-weight data of one graded piece as a module for the fixed
/// subalgebra.
#[derive(Clone, Debug)]
pub struct GradeTopWeight {
    pub grade: u32,
    /// The unique nonzero dominant highest weight (fundamental
    /// coordinates), when the graded piece has a nontrivial part.
    pub theta: Option<Weight>,
    /// Multiplicity of the trivial summand.
    pub trivial_mult: usize,
}

pub struct GradedAlgebra {
    pub g: ChevalleyAlgebra,
    pub kind: AutKind,
    pub m: u32,
    pub conductor: u32,
    /// sigma image of each Chevalley basis slot.
    sigma_images: Vec<Elt>,
    /// Residual sign of the diagram symmetry on each flip-fixed positive
    /// root after normalization (always +1 on moved roots).
    pub residual_signs: Vec<i64>,
    pub basis: Vec<GradedBasisElt>,
    pub by_grade: Vec<Vec<usize>>,
    pub fixed: FixedAlgebra,
    pub top_weights: Vec<GradeTopWeight>,
}

impl GradedAlgebra {
    pub fn new(t: LieType, kind: AutKind) -> Self {
        let m = kind.order();
        let conductor = conductor_for_order(m);
        let mut g = ChevalleyAlgebra::new(t, conductor);
        let rank = g.rank();
        let perm = kind.node_perm(rank);
        // the node permutation must preserve the Cartan matrix
        for i in 0..rank {
            for j in 0..rank {
                assert_eq!(
                    g.rs.cartan[i][j],
                    g.rs.cartan[perm[i]][perm[j]],
                    "node permutation is not a diagram symmetry of {t}"
                );
            }
        }

        let residual_signs = if matches!(kind, AutKind::Identity) {
            vec![1; g.npos]
        } else {
            normalize_tau_signs(&mut g, &perm)
        };

        let sigma_images = build_sigma_images(&g, &kind, &perm, &residual_signs, conductor);

        let mut alg = GradedAlgebra {
            g,
            kind,
            m,
            conductor,
            sigma_images,
            residual_signs,
            basis: Vec::new(),
            by_grade: vec![Vec::new(); m as usize],
            fixed: FixedAlgebra {
                raw_cartan: Vec::new(),
                simple: Vec::new(),
                lie_type: t,
                rs: RootSystem::new(t),
                node_perm: Vec::new(),
                form_scale: Rat::one(),
                raw_to_fund: Vec::new(),
            },
            top_weights: Vec::new(),
        };
        alg.build_graded_basis(&perm);
        alg.build_fixed_algebra(t, &perm);
        alg.build_top_weights();
        alg
    }

    pub fn standard(t: LieType, m: u32) -> Self {
        Self::new(t, AutKind::standard(t, m))
    }

    pub fn sigma(&self, x: &Elt) -> Elt {
        let mut out = Elt::zero(self.conductor);
        for (&i, c) in &x.terms {
            out.add_scaled(&self.sigma_images[i], c);
        }
        out
    }

    pub fn epsilon(&self) -> Cyc {
        Cyc::root_of_unity(self.conductor, self.m)
    }

    /// Basis indices of the graded piece for an arbitrary integer exponent
    /// (taken mod m).
    pub fn grade_indices(&self, n: i64) -> &[usize] {
        let k = n.rem_euclid(self.m as i64) as usize;
        &self.by_grade[k]
    }

    pub fn dim_grade(&self, n: i64) -> usize {
        self.grade_indices(n).len()
    }

    /// Raw weight of an arbitrary Cartan-normalizing weight vector is not
    /// defined; this evaluates the raw Cartan elements against an element
    /// of the fixed Cartan span expressed in basis slots.
    pub fn dual_coxeter(&self) -> i64 {
        self.g.rs.dual_coxeter()
    }

    fn build_graded_basis(&mut self, perm: &[usize]) {
        let g = &self.g;
        let conductor = self.conductor;
        let m = self.m;
        let npos = g.npos;
        let dim = g.dim;

        // permutation of basis slots induced by the root permutation
        let root_perm_slot = |slot: usize| -> usize {
            if slot < 2 * npos {
                let r = g.slot_root(slot);
                let tr = apply_perm_root(&r, perm);
                g.slot_of_root(&tr).unwrap()
            } else {
                2 * npos + perm[slot - 2 * npos]
            }
        };

        // node orbits (for raw weights) in first-seen order
        let node_orbits = orbits_of(perm);

        let mut raw = Vec::new(); // (vec, grade, raw_weight)
        let mut seen = vec![false; dim];
        for s0 in 0..dim {
            if seen[s0] {
                continue;
            }
            // slot orbit
            let mut orbit = vec![s0];
            let mut cur = root_perm_slot(s0);
            while cur != s0 {
                orbit.push(cur);
                cur = root_perm_slot(cur);
            }
            for &s in &orbit {
                seen[s] = true;
            }
            let l = orbit.len() as u32;
            // iterated sigma images of the representative
            let mut powers: Vec<Elt> = vec![Elt::basis(conductor, s0)];
            for _ in 0..l {
                powers.push(self_sigma(&self.sigma_images, powers.last().unwrap()));
            }
            // sigma^l on the line through slot s0 is the scalar chi
            let last = &powers[l as usize];
            assert_eq!(last.terms.len(), 1);
            let chi = last.coeff(s0);
            assert!(!chi.is_zero());
            let raw_weight: Vec<i64> = if s0 < 2 * npos {
                let alpha = g.slot_root(s0);
                node_orbits
                    .iter()
                    .map(|o| o.iter().map(|&i| g.rs.pairing_simple_coroot(&alpha, i)).sum())
                    .collect()
            } else {
                vec![0; node_orbits.len()]
            };
            let mut found = 0;
            for n in 0..m {
                let xi = Cyc::zeta_pow(conductor, (conductor / m) as i64 * n as i64);
                // xi^l must equal chi
                let mut xl = Cyc::one(conductor);
                for _ in 0..l {
                    xl = &xl * &xi;
                }
                if xl != chi {
                    continue;
                }
                found += 1;
                let mut v = Elt::zero(conductor);
                let xinv = xi.inv();
                let mut f = Cyc::one(conductor);
                for j in 0..l {
                    v.add_scaled(&powers[j as usize], &f);
                    f = &f * &xinv;
                }
                assert!(!v.is_zero());
                // eigen check
                let sv = self_sigma(&self.sigma_images, &v);
                assert_eq!(sv, v.scale(&xi), "eigenvector construction failed");
                raw.push((v, n, raw_weight.clone()));
            }
            assert_eq!(found, l as usize, "wrong eigenvalue count on slot orbit");
        }
        assert_eq!(raw.len(), dim);

        // Gram-Schmidt (no normalization) per graded piece under the
        // contravariant Hermitian form; vectors of distinct weights are
        // already orthogonal so only equal-weight corrections occur.
        let mut basis: Vec<GradedBasisElt> = Vec::with_capacity(dim);
        let mut by_grade = vec![Vec::new(); m as usize];
        for n in 0..m {
            let mut block: Vec<(Elt, Vec<i64>)> = raw
                .iter()
                .filter(|(_, gn, _)| *gn == n)
                .map(|(v, _, w)| (v.clone(), w.clone()))
                .collect();
            // Cartan-derived (zero-weight) vectors first for determinism
            block.sort_by_key(|(_, w)| w.iter().all(|&x| x == 0));
            block.reverse();
            let mut done: Vec<usize> = Vec::new(); // indices into `basis`
            for (mut v, w) in block {
                for &bi in &done {
                    let b = &basis[bi];
                    let c = self.g.herm(&v, &b.vec);
                    if !c.is_zero() {
                        let coef = -(&c * &Cyc::from_rat(self.conductor, b.norm.recip()));
                        v.add_scaled(&b.vec, &coef);
                    }
                }
                let norm = self
                    .g
                    .herm(&v, &v)
                    .to_rat()
                    .expect("non-rational norm in Gram-Schmidt");
                assert!(norm.is_positive(), "non-positive norm in Gram-Schmidt");
                let dual = self.g.kappa(&v).neg();
                let idx = basis.len();
                basis.push(GradedBasisElt { vec: v, dual, grade: n, norm, raw_weight: w });
                by_grade[n as usize].push(idx);
                done.push(idx);
            }
        }
        self.basis = basis;
        self.by_grade = by_grade;
    }

    fn build_fixed_algebra(&mut self, t: LieType, perm: &[usize]) {
        let conductor = self.conductor;
        let node_orbits = orbits_of(perm);
        let raw_cartan: Vec<Elt> = node_orbits
            .iter()
            .map(|o| {
                let mut v = Elt::zero(conductor);
                for &i in o {
                    v.add_scaled(&self.g.h_simple(i), &Cyc::one(conductor));
                }
                v
            })
            .collect();

        // positive restricted roots: grade-0 basis vectors with a nonzero
        // raw weight whose first nonzero entry is positive
        let mut pos: Vec<(usize, Vec<i64>)> = Vec::new();
        for &bi in &self.by_grade[0] {
            let w = &self.basis[bi].raw_weight;
            if w.iter().any(|&x| x != 0) {
                let first = w.iter().find(|&&x| x != 0).unwrap();
                if *first > 0 {
                    pos.push((bi, w.clone()));
                }
            }
        }
        // restricted root spaces in the fixed part must be one-dimensional
        {
            let mut ws: Vec<&Vec<i64>> = pos.iter().map(|(_, w)| w).collect();
            ws.sort();
            ws.dedup();
            assert_eq!(ws.len(), pos.len(), "restricted root multiplicity > 1");
        }
        let wset: std::collections::HashSet<Vec<i64>> =
            pos.iter().map(|(_, w)| w.clone()).collect();
        let mut simples: Vec<(usize, Vec<i64>)> = pos
            .iter()
            .filter(|(_, w)| {
                !wset.iter().any(|w1| {
                    let w2: Vec<i64> = w.iter().zip(w1).map(|(a, b)| a - b).collect();
                    wset.contains(&w2) && w1 != w
                })
            })
            .cloned()
            .collect();
        simples.sort_by_key(|(_, w)| w.clone());

        // sl2 triples
        let mut triples: Vec<Sl2> = Vec::new();
        for (bi, w) in &simples {
            let x = self.basis[*bi].vec.clone();
            let y0 = self.g.kappa(&x).neg();
            let h0 = self.g.bracket(&x, &y0);
            let val = self.eval_weight_on(&h0, *bi);
            let valq = val.to_rat().expect("weight value not rational");
            assert!(valq.is_positive());
            let y = y0.scale(&Cyc::from_rat(conductor, Rat::from_integer(2.into()) / &valq));
            let h = self.g.bracket(&x, &y);
            triples.push(Sl2 { e: x, f: y, h, raw_weight: w.clone() });
        }

        // Cartan matrix of the fixed algebra: a[i][j] = alpha_j(h_i)
        let rank = triples.len();
        let mut cartan = vec![vec![0i64; rank]; rank];
        for i in 0..rank {
            for j in 0..rank {
                let v = self.eval_weight_on(&triples[i].h, simples[j].0);
                let q = v.to_rat().expect("Cartan entry not rational");
                assert!(q.is_integer(), "Cartan entry not integral");
                cartan[i][j] = int_val(&q);
            }
        }

        // recognize the type against the expected table entry
        let expect = match &self.kind {
            AutKind::Identity => t,
            _ => expected_fixed_type(t, self.m),
        };
        let node_perm = match_cartan(&cartan, &RootSystem::new(expect).cartan)
            .expect("fixed-subalgebra Cartan matrix does not match the expected type");

        // induced form scale: (alpha_i, alpha_i) = 4 / <h_i, h_i>
        let abstract_rs = RootSystem::new(expect);
        let mut form_scale = Rat::zero();
        for i in 0..rank {
            let hh = self
                .g
                .form(&triples[i].h, &self.g.kappa(&triples[i].h).neg())
                .to_rat()
                .expect("coroot norm not rational");
            // h_i is fixed by kappa up to sign conventions; use the
            // Hermitian norm which agrees with <h_i, h_i> for real h
            let len_sq = Rat::from_integer(4.into()) / hh;
            let mut vi = vec![0i16; rank];
            vi[node_perm[i]] = 1;
            let normalized = abstract_rs.length_sq(&Root(vi));
            let scale = len_sq / normalized;
            if form_scale.is_zero() {
                form_scale = scale;
            } else {
                assert_eq!(form_scale, scale, "induced form is not a uniform rescaling");
            }
        }

        // raw -> fundamental conversion: express each h_i over raw_cartan
        let cartan_slots: Vec<usize> = (2 * self.g.npos..self.g.dim).collect();
        let a = CycMat::from_rows(
            conductor,
            cartan_slots
                .iter()
                .map(|&s| raw_cartan.iter().map(|v| v.coeff(s)).collect())
                .collect(),
        );
        let mut raw_to_fund = Vec::with_capacity(rank);
        for i in 0..rank {
            let b: Vec<Cyc> = cartan_slots.iter().map(|&s| triples[i].h.coeff(s)).collect();
            let sol = a.solve(&b).expect("fixed coroot not in fixed Cartan span");
            let row: Vec<Rat> = sol
                .iter()
                .map(|c| c.to_rat().expect("non-rational coroot expansion"))
                .collect();
            raw_to_fund.push(row);
        }

        self.fixed = FixedAlgebra {
            raw_cartan,
            simple: triples,
            lie_type: expect,
            rs: abstract_rs,
            node_perm,
            form_scale,
            raw_to_fund,
        };
    }

    /// Evaluate the defining weight of graded-basis element bi on a Cartan
    /// element h (only the raw weight is stored; this recomputes the value
    /// by linearity through the raw Cartan expansion of h).
    fn eval_weight_on(&self, h: &Elt, bi: usize) -> Cyc {
        // [h, b] = lambda(h) b for a weight vector b
        let b = &self.basis[bi].vec;
        let hb = self.g.bracket(h, b);
        if hb.is_zero() {
            return Cyc::zero(self.conductor);
        }
        // take the ratio on any supporting slot
        let (&slot, c) = b.terms.iter().next().unwrap();
        let num = hb.coeff(slot);
        let lambda = &num / c;
        // consistency: hb must equal lambda * b
        assert_eq!(hb, b.scale(&lambda), "not a weight vector");
        lambda
    }

    fn build_top_weights(&mut self) {
        let mut out = Vec::new();
        // grade 0 is the fixed subalgebra itself: top weight is its highest
        // root, no trivial summand
        let theta0 = self.fixed.rs.root_to_weight(&self.fixed.rs.highest_root());
        out.push(GradeTopWeight { grade: 0, theta: Some(theta0), trivial_mult: 0 });
        for n in 1..self.m {
            let idxs: Vec<usize> = self.by_grade[n as usize].clone();
            // group by raw weight
            let mut by_w: std::collections::BTreeMap<Vec<i64>, Vec<usize>> = Default::default();
            for &bi in &idxs {
                by_w.entry(self.basis[bi].raw_weight.clone()).or_default().push(bi);
            }
            let mut theta: Option<Weight> = None;
            let mut trivial = 0usize;
            let mut total_dim_check = 0usize;
            for (w, bis) in &by_w {
                // highest-weight space within this weight block
                let cols = bis.len();
                let mut rows: Vec<Vec<Cyc>> = Vec::new();
                for t in &self.fixed.simple {
                    // components of [e_t, b] for each b
                    let imgs: Vec<Elt> =
                        bis.iter().map(|&bi| self.g.bracket(&t.e, &self.basis[bi].vec)).collect();
                    let mut slots: std::collections::BTreeSet<usize> = Default::default();
                    for im in &imgs {
                        slots.extend(im.terms.keys());
                    }
                    for s in slots {
                        rows.push(imgs.iter().map(|im| im.coeff(s)).collect());
                    }
                }
                let hw_dim = if rows.is_empty() {
                    cols
                } else {
                    let a = CycMat::from_rows(self.conductor, rows);
                    a.nullspace().len()
                };
                if hw_dim == 0 {
                    continue;
                }
                if w.iter().all(|&x| x == 0) {
                    trivial += hw_dim;
                    total_dim_check += hw_dim;
                } else {
                    assert!(hw_dim == 1, "unexpected highest-weight multiplicity");
                    let fw = self.fixed.fund_coords(w);
                    assert!(fw.is_dominant() && fw.is_integral());
                    assert!(theta.is_none(), "multiple nontrivial components in a graded piece");
                    use num::ToPrimitive;
                    total_dim_check +=
                        self.fixed.rs.weyl_dim(&fw).to_usize().expect("dimension overflow");
                    theta = Some(fw);
                }
            }
            assert_eq!(
                total_dim_check,
                idxs.len(),
                "graded piece is not (theta-part + trivials) at grade {n}"
            );
            out.push(GradeTopWeight { grade: n, theta, trivial_mult: trivial });
        }
        self.top_weights = out;
    }
}

fn self_sigma(images: &[Elt], x: &Elt) -> Elt {
    let conductor = x.conductor;
    let mut out = Elt::zero(conductor);
    for (&i, c) in &x.terms {
        out.add_scaled(&images[i], c);
    }
    out
}

fn int_val(q: &Rat) -> i64 {
    use num::ToPrimitive;
    q.to_integer().to_i64().unwrap()
}

fn orbits_of(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut orbit = vec![s];
        seen[s] = true;
        let mut cur = perm[s];
        while cur != s {
            seen[cur] = true;
            orbit.push(cur);
            cur = perm[cur];
        }
        out.push(orbit);
    }
    out
}

fn apply_perm_root(r: &Root, perm: &[usize]) -> Root {
    let mut out = vec![0i16; r.0.len()];
    for (i, &c) in r.0.iter().enumerate() {
        out[perm[i]] = c;
    }
    Root(out)
}

/// Sign of the naive lift of the diagram symmetry on each positive root
/// vector, computed recursively through bracket decompositions.
fn naive_tau_signs(g: &ChevalleyAlgebra, perm: &[usize]) -> Vec<i64> {
    let npos = g.npos;
    let mut c = vec![0i64; npos];
    for gi in 0..npos {
        let gamma = g.rs.positive[gi].clone();
        if gamma.height() == 1 {
            c[gi] = 1;
            continue;
        }
        let ai = (0..npos)
            .find(|&i| g.rs.is_positive_root(&gamma.sub(&g.rs.positive[i])))
            .unwrap();
        let alpha = g.rs.positive[ai].clone();
        let di = g.rs.positive_index(&gamma.sub(&alpha)).unwrap();
        let ta = g.rs.positive_index(&apply_perm_root(&alpha, perm)).unwrap();
        let td = g.rs.positive_index(&apply_perm_root(&g.rs.positive[di], perm)).unwrap();
        let num = c[ai] * c[di] * g.n_const(ta, td);
        let den = g.n_const(ai, di);
        assert!(num % den == 0 && (num / den).abs() == 1);
        c[gi] = num / den;
    }
    c
}

/// Rescale root vectors so the lifted diagram symmetry permutes basis
/// vectors exactly along every moved orbit; returns the residual signs
/// (+-1 on symmetry-fixed roots, +1 elsewhere).
fn normalize_tau_signs(g: &mut ChevalleyAlgebra, perm: &[usize]) -> Vec<i64> {
    let npos = g.npos;
    let c = naive_tau_signs(g, perm);
    // orbits of the symmetry on positive-root indices
    let root_perm: Vec<usize> = (0..npos)
        .map(|i| g.rs.positive_index(&apply_perm_root(&g.rs.positive[i], perm)).unwrap())
        .collect();
    let mut d = vec![1i64; npos];
    for orbit in orbits_of(&root_perm) {
        if orbit.len() == 1 {
            continue;
        }
        let mut acc = 1i64;
        for w in 0..orbit.len() {
            let cur = orbit[w];
            let nxt = root_perm[cur];
            if w + 1 < orbit.len() {
                d[nxt] = d[cur] * c[cur];
            } else {
                acc = d[cur] * c[cur];
            }
        }
        assert_eq!(acc, d[orbit[0]], "orbit sign obstruction on a moved orbit");
    }
    g.rescale_root_vectors(&d);
    let c2 = naive_tau_signs(g, perm);
    for i in 0..npos {
        if root_perm[i] != i {
            assert_eq!(c2[i], 1, "sign normalization failed on a moved root");
        } else {
            assert!(c2[i] == 1 || c2[i] == -1);
        }
    }
    c2
}

fn build_sigma_images(
    g: &ChevalleyAlgebra,
    kind: &AutKind,
    perm: &[usize],
    residual: &[i64],
    conductor: u32,
) -> Vec<Elt> {
    let npos = g.npos;
    let dim = g.dim;
    let mut images = Vec::with_capacity(dim);
    for slot in 0..dim {
        if slot >= 2 * npos {
            let i = slot - 2 * npos;
            images.push(Elt::basis(conductor, 2 * npos + perm[i]));
            continue;
        }
        let r = g.slot_root(slot);
        let pos_idx = if slot < npos { slot } else { slot - npos };
        let sign = residual[pos_idx];
        let target = g.slot_of_root(&apply_perm_root(&r, perm)).unwrap();
        let mut coeff = Cyc::from_i64(conductor, sign);
        if matches!(kind, AutKind::OrderFour) {
            // torus element h with alpha_i(h) = 1 exactly on the two middle
            // nodes of A_2n
            let rank = g.rank();
            let n = rank / 2;
            let rh: i64 = r.0[n - 1] as i64 + r.0[n] as i64;
            let phase = Cyc::zeta_pow(conductor, (conductor / 4) as i64 * rh);
            coeff = &coeff * &phase;
        }
        images.push(Elt::basis(conductor, target).scale(&coeff));
    }
    images
}

/// Search for a permutation matching two integer Cartan matrices.
fn match_cartan(a: &[Vec<i64>], b: &[Vec<i64>]) -> Option<Vec<usize>> {
    let n = a.len();
    if b.len() != n {
        return None;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    // brute force over permutations (ranks here are at most 8)
    fn heap(perm: &mut Vec<usize>, k: usize, a: &[Vec<i64>], b: &[Vec<i64>]) -> Option<Vec<usize>> {
        let n = perm.len();
        if k == n {
            let ok = (0..n).all(|i| (0..n).all(|j| a[i][j] == b[perm[i]][perm[j]]));
            return if ok { Some(perm.clone()) } else { None };
        }
        for i in k..n {
            perm.swap(k, i);
            if let Some(p) = heap(perm, k + 1, a, b) {
                return Some(p);
            }
            perm.swap(k, i);
        }
        None
    }
    heap(&mut perm, 0, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn suite() -> Vec<(LieType, u32)> {
        vec![
            (LieType::A(2), 1),
            (LieType::A(2), 2),
            (LieType::A(3), 2),
            (LieType::A(4), 2),
            (LieType::A(2), 4),
            (LieType::A(4), 4),
            (LieType::D(4), 2),
            (LieType::D(4), 3),
        ]
    }

    #[test]
    fn sigma_is_an_automorphism_of_stated_order() {
        for (t, m) in suite() {
            let a = GradedAlgebra::standard(t, m);
            let g = &a.g;
            // order
            for slot in 0..g.dim {
                let mut x = Elt::basis(a.conductor, slot);
                for _ in 0..m {
                    x = a.sigma(&x);
                }
                assert_eq!(x, Elt::basis(a.conductor, slot), "{t} m={m} slot {slot}");
            }
            // bracket preservation and form invariance on basis pairs
            for s1 in 0..g.dim {
                let x = Elt::basis(a.conductor, s1);
                for s2 in 0..g.dim {
                    let y = Elt::basis(a.conductor, s2);
                    assert_eq!(a.sigma(&g.bracket(&x, &y)), g.bracket(&a.sigma(&x), &a.sigma(&y)));
                    assert_eq!(g.form(&a.sigma(&x), &a.sigma(&y)), g.form(&x, &y));
                }
            }
            // sigma commutes with kappa
            for s in 0..g.dim {
                let x = Elt::basis(a.conductor, s).scale(&Cyc::root_of_unity(a.conductor, 4));
                assert_eq!(a.sigma(&g.kappa(&x)), g.kappa(&a.sigma(&x)));
            }
        }
    }

    #[test]
    fn graded_basis_is_orthogonal_with_positive_norms() {
        for (t, m) in suite() {
            let a = GradedAlgebra::standard(t, m);
            let n = a.basis.len();
            assert_eq!(n, a.g.dim);
            for i in 0..n {
                let bi = &a.basis[i];
                // sigma eigenvector of the recorded grade
                let eps_pow =
                    Cyc::zeta_pow(a.conductor, (a.conductor / a.m) as i64 * bi.grade as i64);
                assert_eq!(a.sigma(&bi.vec), bi.vec.scale(&eps_pow));
                // dual pairing <b, dual b'> = delta {b,b}
                for j in 0..n {
                    let bj = &a.basis[j];
                    let v = a.g.form(&bi.vec, &bj.dual);
                    if i == j {
                        assert_eq!(v.to_rat().unwrap(), bi.norm);
                    } else {
                        assert!(v.is_zero(), "{t} m={m}: non-orthogonal pair {i},{j}");
                    }
                }
            }
        }
    }

    #[test]
    fn fixed_types_match_table() {
        let cases = vec![
            (LieType::A(3), 2, LieType::C(2)),
            (LieType::A(5), 2, LieType::C(3)),
            (LieType::A(2), 2, LieType::B(1)),
            (LieType::A(4), 2, LieType::B(2)),
            (LieType::A(2), 4, LieType::C(1)),
            (LieType::A(4), 4, LieType::C(2)),
            (LieType::D(4), 2, LieType::B(3)),
            (LieType::D(5), 2, LieType::B(4)),
            (LieType::D(4), 3, LieType::G2),
            (LieType::E(6), 2, LieType::F4),
        ];
        for (t, m, fix) in cases {
            let a = GradedAlgebra::standard(t, m);
            assert_eq!(a.fixed.lie_type, fix, "{t} m={m}");
            // fixed dimension = rank contribution + root vectors
            let fixed_dim = a.dim_grade(0);
            assert_eq!(fixed_dim, RootSystem::new(fix).dim(), "{t} m={m}");
        }
    }

    #[test]
    fn sl2_triples_of_fixed_algebra() {
        for (t, m) in suite() {
            let a = GradedAlgebra::standard(t, m);
            let two = Cyc::from_i64(a.conductor, 2);
            for s in &a.fixed.simple {
                assert_eq!(a.g.bracket(&s.e, &s.f), s.h);
                assert_eq!(a.g.bracket(&s.h, &s.e), s.e.scale(&two));
                assert_eq!(a.g.bracket(&s.h, &s.f), s.f.scale(&two).neg());
                // fixed by sigma
                assert_eq!(a.sigma(&s.e), s.e);
                assert_eq!(a.sigma(&s.f), s.f);
                assert_eq!(a.sigma(&s.h), s.h);
            }
        }
    }

    #[test]
    fn order_four_defining_relations() {
        // sigma fixes e_theta and f_theta, and sigma^2 is not the identity
        // on the flip-fixed middle root vectors
        for n in [1usize, 2] {
            let a = GradedAlgebra::standard(LieType::A(2 * n), 4);
            let theta_slot = a.g.npos - 1;
            let e_theta = Elt::basis(a.conductor, theta_slot);
            let f_theta = Elt::basis(a.conductor, a.g.npos + theta_slot);
            assert_eq!(a.sigma(&e_theta), e_theta);
            assert_eq!(a.sigma(&f_theta), f_theta);
        }
    }

    #[test]
    fn flip_fixed_roots_of_a2n_carry_minus_one() {
        for n in [1usize, 2] {
            let t = LieType::A(2 * n);
            let a = GradedAlgebra::standard(t, 2);
            let rs = &a.g.rs;
            let mut fixed_count = 0;
            for (i, r) in rs.positive.iter().enumerate() {
                let flipped = apply_perm_root(r, &(0..2 * n).rev().collect::<Vec<_>>());
                if &flipped == r {
                    assert_eq!(a.residual_signs[i], -1, "{t} root {r:?}");
                    fixed_count += 1;
                } else {
                    assert_eq!(a.residual_signs[i], 1);
                }
            }
            assert_eq!(fixed_count, n);
        }
    }

    #[test]
    fn grade_dimensions_sum_to_dim() {
        for (t, m) in suite() {
            let a = GradedAlgebra::standard(t, m);
            let total: usize = (0..m as i64).map(|n| a.dim_grade(n)).sum();
            assert_eq!(total, a.g.dim, "{t} m={m}");
        }
    }

    #[test]
    fn top_weights_are_consistent() {
        for (t, m) in suite() {
            let a = GradedAlgebra::standard(t, m);
            for tw in &a.top_weights {
                if let Some(th) = &tw.theta {
                    assert!(th.is_dominant());
                }
            }
            // m=2 flip on A2: the nonzero grade is irreducible of dim 5
            if t == LieType::A(2) && m == 2 {
                let tw = &a.top_weights[1];
                assert_eq!(tw.trivial_mult, 0);
                let th = tw.theta.as_ref().unwrap();
                use num::ToPrimitive;
                assert_eq!(a.fixed.rs.weyl_dim(th).to_usize().unwrap(), 5);
            }
        }
    }
}
