//! Finite-dimensional irreducible highest-weight modules, built uniformly
//! for the full simple algebra and for the fixed subalgebra of a graded
//! automorphism.
//!
//! The module with dominant integral highest weight mu is realized as the
//! quotient of the depth-bounded span of lowering words by the radical of
//! the contravariant form.  The contravariant form is computed layer by
//! layer through the adjointness relation between raising and lowering
//! generators; a maximal subset of lowering candidates with nondegenerate
//! Gram matrix is kept as the basis of each layer, and every other
//! candidate is re-expressed through the form.  The construction also
//! yields exact representing matrices for the whole acting algebra via
//! bracket closure of the generator matrices.

use std::collections::BTreeMap;

use num::{BigInt, One, Signed, Zero};

use crate::graded_aut::GradedAlgebra;
use crate::linalg::{CycMat, SparseMat, SpanTracker};
use crate::scalars::{Cyc, Marked, MarkedCtx, Rat};
use crate::simple_lie::{Elt, Weight};

/// Which algebra acts: the full simple algebra or the fixed subalgebra of
/// the automorphism.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RepScope {
    Full,
    Fixed,
}

/// One raising/lowering/coweight triple of the acting algebra, together
/// with the abstract node it corresponds to and the adjointness constant
/// `adj` with `{f u, w} = adj * {u, e w}`.
struct Triple {
    e: Elt,
    f: Elt,
    h: Elt,
    node: usize,
    adj: Rat,
}

/// An irreducible module with exact representing matrices and the
/// contravariant Hermitian form.
pub struct Irrep {
    pub conductor: u32,
    pub scope: RepScope,
    /// Highest weight in fundamental coordinates of the acting algebra's
    /// abstract root system.
    pub highest: Weight,
    pub dim: usize,
    /// Weight of each basis vector in fundamental coordinates.
    pub fund_weights: Vec<Weight>,
    /// Weight of each basis vector as values on the raw Cartan basis
    /// (orbit sums of coroots for the fixed scope, simple coroots for the
    /// full scope).  Half-integral values occur for short restricted
    /// roots, so these stay rational.
    pub raw_weights: Vec<Vec<Rat>>,
    /// Contravariant Gram matrix, block diagonal over weights.
    pub gram: CycMat,
    /// Lowering depth of each basis vector.
    pub layer_of: Vec<usize>,
    /// Basis of the acting subalgebra in ambient coordinates.
    sub_elts: Vec<Elt>,
    /// Representing matrix of each subalgebra basis element.
    sub_mats: Vec<SparseMat>,
    /// Columns are the dense ambient coordinates of `sub_elts`.
    sub_dense: CycMat,
}

impl Irrep {
    pub fn new(alg: &GradedAlgebra, scope: RepScope, mu: &Weight) -> Irrep {
        assert!(mu.is_dominant() && mu.is_integral(), "highest weight must be dominant integral");
        let conductor = alg.conductor;
        let triples = collect_triples(alg, scope);
        let rs = match scope {
            RepScope::Full => &alg.g.rs,
            RepScope::Fixed => &alg.fixed.rs,
        };
        let rank = triples.len();
        assert_eq!(rank, rs.rank);

        // depth bound: height of mu - w0(mu) in simple-root coordinates
        let depth_bound = {
            let diff = mu.sub(&rs.antidominant(mu));
            let coords = rs.weight_to_root_coords(&diff);
            let mut h = Rat::zero();
            for c in &coords {
                h += c;
            }
            assert!(h.is_integer() && !h.is_negative());
            h.to_integer().try_into().unwrap()
        };

        // per-layer data
        let mut layer_weights: Vec<Vec<Weight>> = vec![vec![mu.clone()]];
        let mut layer_grams: Vec<CycMat> = vec![{
            let mut g = CycMat::zeros(conductor, 1, 1);
            *g.at_mut(0, 0) = Cyc::one(conductor);
            g
        }];
        // f_mats[i][d]: layer d -> layer d+1, e_mats[i][d]: layer d -> layer d-1
        let mut f_mats: Vec<Vec<CycMat>> = vec![Vec::new(); rank];
        let mut e_mats: Vec<Vec<CycMat>> =
            (0..rank).map(|_| vec![CycMat::zeros(conductor, 0, 1)]).collect();

        for depth in 0..=depth_bound {
            let cur = layer_weights[depth].len();
            // candidates: (generator, source vector)
            let cands: Vec<(usize, usize)> =
                (0..rank).flat_map(|i| (0..cur).map(move |j| (i, j))).collect();
            let cand_weight = |&(i, j): &(usize, usize)| -> Weight {
                let mut w = layer_weights[depth][j].clone();
                let node = triples[i].node;
                for k in 0..rank {
                    w.0[k] -= Rat::from_integer(rs.cartan[k][node].into());
                }
                w
            };

            // pairing of two candidates through the adjointness relation:
            // {f_i u_j, f_k u_l} = adj_i ({u_j, f_k e_i u_l} + d_ik h_i(u_l) {u_j, u_l})
            let pair = |a: &(usize, usize), b: &(usize, usize)| -> Cyc {
                let (i, j) = *a;
                let (k, l) = *b;
                let gram = &layer_grams[depth];
                let mut acc = Cyc::zero(conductor);
                if depth > 0 {
                    let up = e_mats[i][depth].clone();
                    let mut v = vec![Cyc::zero(conductor); up.rows];
                    for t in 0..up.rows {
                        v[t] = up.at(t, l).clone();
                    }
                    let down = f_mats[k][depth - 1].mul_vec(&v);
                    for (t, c) in down.iter().enumerate() {
                        if !c.is_zero() {
                            let term = gram.at(j, t) * &c.conj();
                            acc += &term;
                        }
                    }
                }
                if i == k {
                    let hval = layer_weights[depth][l].0[triples[i].node].clone();
                    let term = gram.at(j, l).mul_rat(&hval);
                    acc += &term;
                }
                acc.mul_rat(&triples[i].adj)
            };

            // group candidates by target weight, deterministically
            let mut blocks: BTreeMap<Vec<Rat>, Vec<usize>> = BTreeMap::new();
            for (ci, c) in cands.iter().enumerate() {
                blocks.entry(cand_weight(c).0).or_default().push(ci);
            }

            let mut selected: Vec<usize> = Vec::new();
            let mut sel_weights: Vec<Weight> = Vec::new();
            // expression of every candidate in the selected basis
            let mut expr: Vec<Vec<Cyc>> = vec![Vec::new(); cands.len()];
            // (offset, Gram block) of the kept vectors, per weight block
            let mut gram_blocks: Vec<(usize, CycMat)> = Vec::new();

            for (wkey, idxs) in &blocks {
                // Gram of the block's candidates
                let n = idxs.len();
                let mut g = CycMat::zeros(conductor, n, n);
                for (a, &ca) in idxs.iter().enumerate() {
                    for (b, &cb) in idxs.iter().enumerate() {
                        *g.at_mut(a, b) = pair(&cands[ca], &cands[cb]);
                    }
                }
                // greedy principal-submatrix selection
                let mut keep: Vec<usize> = Vec::new();
                for a in 0..n {
                    let mut trial = keep.clone();
                    trial.push(a);
                    let mut sub = CycMat::zeros(conductor, trial.len(), trial.len());
                    for (x, &tx) in trial.iter().enumerate() {
                        for (y, &ty) in trial.iter().enumerate() {
                            *sub.at_mut(x, y) = g.at(tx, ty).clone();
                        }
                    }
                    if sub.rank() == trial.len() {
                        keep = trial;
                    }
                }
                let base = selected.len();
                for &a in &keep {
                    selected.push(idxs[a]);
                    sel_weights.push(Weight(wkey.clone()));
                }
                // express all block candidates through the kept Gram
                let mut kg = CycMat::zeros(conductor, keep.len(), keep.len());
                for (x, &tx) in keep.iter().enumerate() {
                    for (y, &ty) in keep.iter().enumerate() {
                        *kg.at_mut(x, y) = g.at(tx, ty).clone();
                    }
                }
                let kgt = kg.transpose();
                for (a, &ca) in idxs.iter().enumerate() {
                    let rhs: Vec<Cyc> = keep.iter().map(|&t| g.at(a, t).clone()).collect();
                    let x = kgt.solve(&rhs).expect("candidate outside the span of the kept set");
                    let mut full = vec![Cyc::zero(conductor); base];
                    full.extend(x);
                    expr[ca] = full;
                }
                gram_blocks.push((base, kg));
            }
            // pad expressions of earlier blocks to the final selected count
            let nsel = selected.len();
            for e in expr.iter_mut() {
                e.resize(nsel, Cyc::zero(conductor));
            }

            if nsel == 0 {
                break;
            }
            assert!(depth < depth_bound, "lowering continues past the depth bound");

            // f matrices layer depth -> depth+1
            for i in 0..rank {
                let mut mat = CycMat::zeros(conductor, nsel, cur);
                for (ci, &(gi, j)) in cands.iter().enumerate() {
                    if gi != i {
                        continue;
                    }
                    for (t, c) in expr[ci].iter().enumerate() {
                        *mat.at_mut(t, j) = c.clone();
                    }
                }
                f_mats[i].push(mat);
            }
            // e matrices layer depth+1 -> depth:
            // e_k f_i u_j = f_i e_k u_j + d_ki h_i(u_j) u_j
            for k in 0..rank {
                let mut mat = CycMat::zeros(conductor, cur, nsel);
                for (t, &ci) in selected.iter().enumerate() {
                    let (i, j) = cands[ci];
                    if depth > 0 {
                        let up = &e_mats[k][depth];
                        let mut v = vec![Cyc::zero(conductor); up.rows];
                        for s in 0..up.rows {
                            v[s] = up.at(s, j).clone();
                        }
                        let down = f_mats[i][depth - 1].mul_vec(&v);
                        for (s, c) in down.iter().enumerate() {
                            *mat.at_mut(s, t) = c.clone();
                        }
                    }
                    if k == i {
                        let hval = layer_weights[depth][j].0[triples[i].node].clone();
                        *mat.at_mut(j, t) += &Cyc::from_rat(conductor, hval);
                    }
                }
                e_mats[k].push(mat);
            }
            // Gram of the new layer: block diagonal from the kept blocks
            let mut g = CycMat::zeros(conductor, nsel, nsel);
            for (base, kg) in &gram_blocks {
                for a in 0..kg.rows {
                    for b in 0..kg.cols {
                        *g.at_mut(base + a, base + b) = kg.at(a, b).clone();
                    }
                }
            }
            layer_grams.push(g);
            layer_weights.push(sel_weights);
        }

        // assemble global data
        let layer_sizes: Vec<usize> = layer_weights.iter().map(|l| l.len()).collect();
        let offsets: Vec<usize> = layer_sizes
            .iter()
            .scan(0usize, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        let dim: usize = layer_sizes.iter().sum();
        assert_eq!(
            BigInt::from(dim),
            rs.weyl_dim(mu),
            "constructed dimension disagrees with the Weyl dimension formula"
        );

        let mut fund_weights = Vec::with_capacity(dim);
        let mut layer_of = Vec::with_capacity(dim);
        for (d, lw) in layer_weights.iter().enumerate() {
            for w in lw {
                fund_weights.push(w.clone());
                layer_of.push(d);
            }
        }
        let raw_weights: Vec<Vec<Rat>> = fund_weights
            .iter()
            .map(|w| match scope {
                RepScope::Full => w.0.clone(),
                RepScope::Fixed => alg.fixed.raw_coords(w),
            })
            .collect();

        let mut gram = CycMat::zeros(conductor, dim, dim);
        for (d, g) in layer_grams.iter().enumerate() {
            for a in 0..g.rows {
                for b in 0..g.cols {
                    *gram.at_mut(offsets[d] + a, offsets[d] + b) = g.at(a, b).clone();
                }
            }
        }

        // global generator matrices, column-sparse
        let nlayers = layer_sizes.len();
        let mut gen_elts: Vec<Elt> = Vec::new();
        let mut gen_mats: Vec<SparseMat> = Vec::new();
        for (i, t) in triples.iter().enumerate() {
            let mut fm = SparseMat::zeros(conductor, dim, dim);
            let mut em = SparseMat::zeros(conductor, dim, dim);
            for d in 0..nlayers {
                if d + 1 < nlayers {
                    let blk = &f_mats[i][d];
                    for b in 0..blk.cols {
                        let entries: Vec<(usize, Cyc)> = (0..blk.rows)
                            .filter(|&a| !blk.at(a, b).is_zero())
                            .map(|a| (offsets[d + 1] + a, blk.at(a, b).clone()))
                            .collect();
                        fm.set_col(offsets[d] + b, entries);
                    }
                }
                if d > 0 {
                    let blk = &e_mats[i][d];
                    for b in 0..blk.cols {
                        let entries: Vec<(usize, Cyc)> = (0..blk.rows)
                            .filter(|&a| !blk.at(a, b).is_zero())
                            .map(|a| (offsets[d - 1] + a, blk.at(a, b).clone()))
                            .collect();
                        em.set_col(offsets[d] + b, entries);
                    }
                }
            }
            let mut hm = SparseMat::zeros(conductor, dim, dim);
            for (v, w) in fund_weights.iter().enumerate() {
                hm.set_col(v, vec![(v, Cyc::from_rat(conductor, w.0[t.node].clone()))]);
            }
            gen_elts.push(t.e.clone());
            gen_mats.push(em);
            gen_elts.push(t.f.clone());
            gen_mats.push(fm);
            gen_elts.push(t.h.clone());
            gen_mats.push(hm);
        }

        // bracket closure of the generators inside the ambient algebra
        let ambient = alg.g.dim;
        let mut tracker = SpanTracker::new(conductor, ambient);
        let mut sub_elts: Vec<Elt> = Vec::new();
        let mut sub_mats: Vec<SparseMat> = Vec::new();
        for (x, m) in gen_elts.iter().zip(&gen_mats) {
            if tracker.insert(&x.to_dense(ambient)) {
                sub_elts.push(x.clone());
                sub_mats.push(m.clone());
            }
        }
        let mut frontier = 0;
        while frontier < sub_elts.len() {
            let cur_elt = sub_elts[frontier].clone();
            let cur_mat = sub_mats[frontier].clone();
            for gi in 0..gen_elts.len() {
                let br = alg.g.bracket(&gen_elts[gi], &cur_elt);
                if br.is_zero() {
                    continue;
                }
                if tracker.insert(&br.to_dense(ambient)) {
                    sub_elts.push(br);
                    sub_mats.push(gen_mats[gi].commutator(&cur_mat));
                }
            }
            frontier += 1;
        }
        let expected_dim = rs.dim();
        assert_eq!(sub_elts.len(), expected_dim, "bracket closure misses part of the algebra");

        let mut sub_dense = CycMat::zeros(conductor, ambient, sub_elts.len());
        for (k, x) in sub_elts.iter().enumerate() {
            for (slot, c) in x.to_dense(ambient).into_iter().enumerate() {
                *sub_dense.at_mut(slot, k) = c;
            }
        }

        Irrep {
            conductor,
            scope,
            highest: mu.clone(),
            dim,
            fund_weights,
            raw_weights,
            gram,
            layer_of,
            sub_elts,
            sub_mats,
            sub_dense,
        }
    }

    /// Column-sparse representing matrix of an arbitrary element of the
    /// acting subalgebra; panics when x lies outside it.
    pub fn act_sparse(&self, x: &Elt) -> SparseMat {
        let coords = self
            .sub_dense
            .solve(&x.to_dense(self.sub_dense.rows))
            .expect("element outside the acting subalgebra");
        debug_assert!({
            let back = self.sub_dense.mul_vec(&coords);
            back == x.to_dense(self.sub_dense.rows)
        });
        let mut out = SparseMat::zeros(self.conductor, self.dim, self.dim);
        for (k, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                out = out.add_scaled(&self.sub_mats[k], c);
            }
        }
        out
    }

    /// Dense representing matrix (small modules only).
    pub fn act_matrix(&self, x: &Elt) -> CycMat {
        self.act_sparse(x).to_dense()
    }

    /// Contravariant form {v, w} (antilinear in the second argument).
    pub fn form(&self, v: &[Cyc], w: &[Cyc]) -> Cyc {
        assert_eq!(v.len(), self.dim);
        assert_eq!(w.len(), self.dim);
        let mut acc = Cyc::zero(self.conductor);
        for a in 0..self.dim {
            if v[a].is_zero() {
                continue;
            }
            for b in 0..self.dim {
                if w[b].is_zero() {
                    continue;
                }
                let t = &(&v[a] * self.gram.at(a, b)) * &w[b].conj();
                acc += &t;
            }
        }
        acc
    }

    /// Casimir eigenvalue oracle input: the basis of the acting algebra.
    pub fn sub_basis(&self) -> &[Elt] {
        &self.sub_elts
    }

    pub fn highest_vector(&self) -> Vec<Cyc> {
        let mut v = vec![Cyc::zero(self.conductor); self.dim];
        v[0] = Cyc::one(self.conductor);
        v
    }
}

fn collect_triples(alg: &GradedAlgebra, scope: RepScope) -> Vec<Triple> {
    match scope {
        RepScope::Full => (0..alg.g.rank())
            .map(|i| Triple {
                e: alg.g.e_simple(i),
                f: alg.g.f_simple(i),
                h: alg.g.h_simple(i),
                node: i,
                adj: Rat::one(),
            })
            .collect(),
        RepScope::Fixed => alg
            .fixed
            .simple
            .iter()
            .enumerate()
            .map(|(i, t)| {
                // f = -adj * kappa(e) with adj a positive rational
                let ke = alg.g.kappa(&t.e);
                let adj = scalar_ratio(&t.f, &ke.neg());
                assert!(adj.is_positive(), "lowering generator has the wrong reality structure");
                Triple {
                    e: t.e.clone(),
                    f: t.f.clone(),
                    h: t.h.clone(),
                    node: alg.fixed.node_perm[i],
                    adj,
                }
            })
            .collect(),
    }
}

/// The rational r with x = r * y; panics when x is not a rational multiple
/// of y.
fn scalar_ratio(x: &Elt, y: &Elt) -> Rat {
    let (&slot, c) = y.terms.iter().next().expect("ratio against zero");
    let r = x.coeff(slot) / c.clone();
    let r = r.to_rat().expect("ratio is not rational");
    let check = y.scale(&Cyc::from_rat(y.conductor, r.clone()));
    assert_eq!(&check, x, "elements are not proportional");
    r
}

/// The marked-scalar factor carried by a loop generator x(n) acting on an
/// evaluation module attached to point k: z_k^n for n > 0, zbar_k^{-n} for
/// n < 0, and 1 for n = 0.  Point 0 is the distinguished specialization
/// z_0 = 0, where every nonzero loop exponent acts as zero.
pub fn loop_monomial(ctx: MarkedCtx, point: usize, n: i64) -> Marked {
    if n == 0 {
        Marked::one(ctx)
    } else if point == 0 {
        Marked::zero(ctx)
    } else if n > 0 {
        Marked::z_pow(ctx, point, n as u32)
    } else {
        Marked::zbar_pow(ctx, point, (-n) as u32)
    }
}

/// Apply the evaluation action of x(n) at a marked point to a vector of
/// marked coefficients over the module basis.
pub fn evaluation_apply(
    rep: &Irrep,
    mat: &SparseMat,
    ctx: MarkedCtx,
    point: usize,
    n: i64,
    coeffs: &[Marked],
) -> Vec<Marked> {
    assert_eq!(coeffs.len(), rep.dim);
    let factor = loop_monomial(ctx, point, n);
    let mut out = vec![Marked::zero(ctx); rep.dim];
    for (j, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let dressed = c * &factor;
        for (i, a) in mat.col(j) {
            let t = &dressed * &Marked::constant(ctx, a.clone());
            out[*i] = &out[*i] + &t;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_aut::GradedAlgebra;
    use crate::simple_lie::LieType;

    fn elt_ratio_check(rep: &Irrep, alg: &GradedAlgebra) {
        // homomorphism property on all pairs of subalgebra basis elements
        let n = rep.sub_elts.len();
        for a in 0..n {
            for b in (a + 1)..n {
                let br = alg.g.bracket(&rep.sub_elts[a], &rep.sub_elts[b]);
                let lhs = rep.act_sparse(&br);
                let rhs = rep.sub_mats[a].commutator(&rep.sub_mats[b]);
                assert_eq!(lhs, rhs, "representation fails the bracket on pair ({a},{b})");
            }
        }
    }

    fn contravariance_check(rep: &Irrep, alg: &GradedAlgebra) {
        // {x v, w} = -{v, kappa(x) w} for every subalgebra basis element
        for x in rep.sub_elts.clone() {
            let mx = rep.act_matrix(&x);
            let mk = rep.act_matrix(&alg.g.kappa(&x));
            // matrix identity: mx^T G = -G conj(mk)
            let lhs = mx.transpose().mul(&rep.gram);
            let rhs = rep.gram.mul(&mk.conj()).scale(&-Cyc::one(rep.conductor));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn full_scope_dimensions_and_structure() {
        let alg = GradedAlgebra::standard(LieType::A(2), 1);
        for (mu, d) in [
            (Weight::from_ints(&[0, 0]), 1usize),
            (Weight::from_ints(&[1, 0]), 3),
            (Weight::from_ints(&[1, 1]), 8),
            (Weight::from_ints(&[2, 0]), 6),
        ] {
            let rep = Irrep::new(&alg, RepScope::Full, &mu);
            assert_eq!(rep.dim, d);
            elt_ratio_check(&rep, &alg);
            contravariance_check(&rep, &alg);
            // Gram is Hermitian, block diagonal over weights, diag positive
            for a in 0..rep.dim {
                assert!(rep.gram.at(a, a).to_rat().unwrap().is_positive());
                for b in 0..rep.dim {
                    assert_eq!(rep.gram.at(a, b), &rep.gram.at(b, a).conj());
                    if rep.fund_weights[a] != rep.fund_weights[b] {
                        assert!(rep.gram.at(a, b).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_module_matches_adjoint_action() {
        // the 8-dimensional module of A_2 has the same weights as the roots
        let alg = GradedAlgebra::standard(LieType::A(2), 1);
        let rep = Irrep::new(&alg, RepScope::Full, &Weight::from_ints(&[1, 1]));
        let mut zero_wt = 0;
        for w in &rep.raw_weights {
            if w.iter().all(|x| x.is_zero()) {
                zero_wt += 1;
            }
        }
        assert_eq!(zero_wt, 2);
    }

    #[test]
    fn fixed_scope_suite_dimensions() {
        // (A_3, 2): fixed algebra C_2
        let alg = GradedAlgebra::standard(LieType::A(3), 2);
        for i in 0..2 {
            let mu = Weight::fundamental(2, i);
            let rep = Irrep::new(&alg, RepScope::Fixed, &mu);
            assert_eq!(BigInt::from(rep.dim), alg.fixed.rs.weyl_dim(&mu));
            elt_ratio_check(&rep, &alg);
            contravariance_check(&rep, &alg);
        }
    }

    #[test]
    fn fixed_scope_graded_piece_weight() {
        // (D_4, 3): g_1 is the 7-dimensional module of G_2
        let alg = GradedAlgebra::standard(LieType::D(4), 3);
        let theta = alg.top_weights[1].theta.clone().unwrap();
        let rep = Irrep::new(&alg, RepScope::Fixed, &theta);
        assert_eq!(rep.dim, alg.dim_grade(1));
        contravariance_check(&rep, &alg);
    }

    #[test]
    fn fixed_scope_order_four() {
        // (A_4, 4): fixed algebra C_2, conductor 4 scalars
        let alg = GradedAlgebra::standard(LieType::A(4), 4);
        let mu = Weight::fundamental(2, 0);
        let rep = Irrep::new(&alg, RepScope::Fixed, &mu);
        assert_eq!(BigInt::from(rep.dim), alg.fixed.rs.weyl_dim(&mu));
        elt_ratio_check(&rep, &alg);
        contravariance_check(&rep, &alg);
    }

    #[test]
    fn evaluation_action_mixed_bracket_witness() {
        // On a nontrivial evaluation module the mixed bracket relation
        // [x(1), y(-1)] = [x,y](0) fails: the left side carries z zbar.
        let alg = GradedAlgebra::standard(LieType::A(2), 2);
        let mu = Weight::from_ints(&[1, 0]);
        let rep = Irrep::new(&alg, RepScope::Full, &mu);
        let ctx = MarkedCtx { conductor: alg.conductor, points: 2, cap: 8 };
        let x = alg.g.e_simple(0);
        let y = alg.g.f_simple(0);
        let h = alg.g.bracket(&x, &y);
        let mx = rep.act_sparse(&x);
        let my = rep.act_sparse(&y);
        let mh = rep.act_sparse(&h);

        let mut v = vec![Marked::zero(ctx); rep.dim];
        v[0] = Marked::one(ctx);
        // commutator of x(1) and y(-1) at point 1
        let a = evaluation_apply(&rep, &mx, ctx, 1, 1, &evaluation_apply(&rep, &my, ctx, 1, -1, &v));
        let b = evaluation_apply(&rep, &my, ctx, 1, -1, &evaluation_apply(&rep, &mx, ctx, 1, 1, &v));
        let comm: Vec<Marked> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
        // the naive right side [x,y](0)
        let naive = evaluation_apply(&rep, &mh, ctx, 1, 0, &v);
        assert_ne!(comm, naive, "mixed bracket compatibility should fail on a nontrivial module");
        // the commutator equals z zbar [x,y] instead
        let dressed: Vec<Marked> = naive
            .iter()
            .map(|c| &(c * &Marked::z(ctx, 1)) * &Marked::zbar(ctx, 1))
            .collect();
        assert_eq!(comm, dressed);
    }

    #[test]
    fn point_zero_specialization() {
        let alg = GradedAlgebra::standard(LieType::A(2), 2);
        let ctx = MarkedCtx { conductor: alg.conductor, points: 2, cap: 8 };
        assert_eq!(loop_monomial(ctx, 0, 3), Marked::zero(ctx));
        assert_eq!(loop_monomial(ctx, 0, 0), Marked::one(ctx));
        assert_eq!(loop_monomial(ctx, 1, -2), Marked::zbar_pow(ctx, 1, 2));
    }
}
