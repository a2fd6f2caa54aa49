//! Finite root systems in Bourbaki numbering: Cartan matrices, the full set
//! of positive roots, the invariant form normalized so long roots have
//! squared length 2, weight-coordinate conversions, Weyl reflections, and
//! the Weyl dimension formula.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;

pub type Rat = BigRational;

fn rq(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LieType {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    E(usize),
    F4,
    G2,
}

impl fmt::Display for LieType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieType::A(n) => write!(f, "A{n}"),
            LieType::B(n) => write!(f, "B{n}"),
            LieType::C(n) => write!(f, "C{n}"),
            LieType::D(n) => write!(f, "D{n}"),
            LieType::E(n) => write!(f, "E{n}"),
            LieType::F4 => write!(f, "F4"),
            LieType::G2 => write!(f, "G2"),
        }
    }
}

impl LieType {
    pub fn rank(&self) -> usize {
        match *self {
            LieType::A(n) | LieType::B(n) | LieType::C(n) | LieType::D(n) | LieType::E(n) => n,
            LieType::F4 => 4,
            LieType::G2 => 2,
        }
    }

    /// Undirected Dynkin edges (0-based node pairs) in Bourbaki numbering.
    fn edges(&self) -> Vec<(usize, usize)> {
        let chain = |n: usize| (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect::<Vec<_>>();
        match *self {
            LieType::A(n) | LieType::B(n) | LieType::C(n) => chain(n),
            LieType::G2 => vec![(0, 1)],
            LieType::F4 => chain(4),
            LieType::D(n) => {
                assert!(n >= 3);
                let mut e = chain(n - 1);
                e.push((n - 3, n - 1));
                e
            }
            LieType::E(n) => {
                assert!((6..=8).contains(&n));
                // Bourbaki: chain 1-3-4-5-...-n with node 2 hanging off node 4
                let mut e = vec![(0, 2), (1, 3)];
                for i in 2..n - 1 {
                    e.push((i, i + 1));
                }
                e
            }
        }
    }

    /// Half squared lengths d_i = (alpha_i, alpha_i)/2 with long roots
    /// normalized to squared length 2.
    fn half_lengths(&self) -> Vec<Rat> {
        let rank = self.rank();
        match *self {
            LieType::A(_) | LieType::D(_) | LieType::E(_) => vec![Rat::one(); rank],
            LieType::B(n) => {
                let mut d = vec![Rat::one(); n];
                d[n - 1] = rq(1, 2);
                d
            }
            LieType::C(n) => {
                let mut d = vec![rq(1, 2); n];
                d[n - 1] = Rat::one();
                d
            }
            LieType::F4 => vec![Rat::one(), Rat::one(), rq(1, 2), rq(1, 2)],
            LieType::G2 => vec![rq(1, 3), Rat::one()],
        }
    }
}

/// A root in simple-root coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Root(pub Vec<i16>);

impl Root {
    pub fn height(&self) -> i32 {
        self.0.iter().map(|&x| x as i32).sum()
    }

    pub fn neg(&self) -> Root {
        Root(self.0.iter().map(|&x| -x).collect())
    }

    pub fn add(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&x| x >= 0) && self.0.iter().any(|&x| x > 0)
    }
}

/// A weight in fundamental-weight coordinates (values on simple coroots).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Weight(pub Vec<Rat>);

impl Weight {
    pub fn zero(rank: usize) -> Weight {
        Weight(vec![Rat::zero(); rank])
    }

    pub fn fundamental(rank: usize, i: usize) -> Weight {
        let mut w = Self::zero(rank);
        w.0[i] = Rat::one();
        w
    }

    pub fn from_ints(v: &[i64]) -> Weight {
        Weight(v.iter().map(|&x| Rat::from_integer(x.into())).collect())
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|x| !x.is_negative())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }
}

pub struct RootSystem {
    pub lie_type: LieType,
    pub rank: usize,
    /// cartan[i][j] = <alpha_j, alpha_i_check> = 2(alpha_i,alpha_j)/(alpha_i,alpha_i)
    pub cartan: Vec<Vec<i64>>,
    /// gram[i][j] = (alpha_i, alpha_j), long roots squared length 2
    pub gram: Vec<Vec<Rat>>,
    pub half_lengths: Vec<Rat>,
    /// positive roots sorted by height then lexicographically
    pub positive: Vec<Root>,
    index: HashMap<Vec<i16>, usize>,
}

impl RootSystem {
    pub fn new(t: LieType) -> Self {
        let rank = t.rank();
        let d = t.half_lengths();
        let mut gram = vec![vec![Rat::zero(); rank]; rank];
        for i in 0..rank {
            gram[i][i] = rq(2, 1) * &d[i];
        }
        for (i, j) in t.edges() {
            let v = -std::cmp::max(d[i].clone(), d[j].clone());
            gram[i][j] = v.clone();
            gram[j][i] = v;
        }
        let mut cartan = vec![vec![0i64; rank]; rank];
        for i in 0..rank {
            for j in 0..rank {
                let q = &gram[i][j] / &d[i];
                assert!(q.is_integer(), "non-integral Cartan entry for {t}");
                cartan[i][j] = int_val(&q);
            }
        }
        let mut rs = RootSystem {
            lie_type: t,
            rank,
            cartan,
            gram,
            half_lengths: d,
            positive: Vec::new(),
            index: HashMap::new(),
        };
        rs.generate_positive_roots();
        rs
    }

    /// Root-string generation by height: beta + alpha_i is a root iff the
    /// string length on the downward side exceeds <beta, alpha_i_check>.
    fn generate_positive_roots(&mut self) {
        let rank = self.rank;
        let mut by_height: Vec<Vec<Root>> = Vec::new();
        let simples: Vec<Root> = (0..rank)
            .map(|i| {
                let mut v = vec![0i16; rank];
                v[i] = 1;
                Root(v)
            })
            .collect();
        by_height.push(simples);
        let mut all: std::collections::HashSet<Vec<i16>> =
            by_height[0].iter().map(|r| r.0.clone()).collect();
        loop {
            let last = by_height.last().unwrap().clone();
            let mut next: Vec<Root> = Vec::new();
            for beta in &last {
                for i in 0..rank {
                    let cand = {
                        let mut v = beta.0.clone();
                        v[i] += 1;
                        Root(v)
                    };
                    if all.contains(&cand.0) || next.iter().any(|r| r == &cand) {
                        continue;
                    }
                    // p = max k with beta - k*alpha_i a root
                    let mut p = 0i64;
                    let mut cur = beta.clone();
                    loop {
                        let mut v = cur.0.clone();
                        v[i] -= 1;
                        if v.iter().all(|&x| x == 0) {
                            // beta - (p+1) alpha_i = 0 means beta is a
                            // multiple of alpha_i; strings stop at 0
                            break;
                        }
                        if all.contains(&v) {
                            p += 1;
                            cur = Root(v);
                        } else {
                            break;
                        }
                    }
                    let pairing: i64 = (0..rank)
                        .map(|j| beta.0[j] as i64 * self.cartan[i][j])
                        .sum();
                    if p - pairing >= 1 {
                        next.push(cand);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort_by(|a, b| a.0.cmp(&b.0));
            for r in &next {
                all.insert(r.0.clone());
            }
            by_height.push(next);
        }
        self.positive = by_height.into_iter().flatten().collect();
        self.positive
            .sort_by(|a, b| a.height().cmp(&b.height()).then(a.0.cmp(&b.0)));
        self.index = self
            .positive
            .iter()
            .enumerate()
            .map(|(i, r)| (r.0.clone(), i))
            .collect();
    }

    pub fn num_positive(&self) -> usize {
        self.positive.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.positive.len() + self.rank
    }

    pub fn is_positive_root(&self, r: &Root) -> bool {
        self.index.contains_key(&r.0)
    }

    pub fn is_root(&self, r: &Root) -> bool {
        self.is_positive_root(r) || self.index.contains_key(&r.neg().0)
    }

    pub fn positive_index(&self, r: &Root) -> Option<usize> {
        self.index.get(&r.0).copied()
    }

    /// Invariant form on root coordinates.
    pub fn form_roots(&self, a: &Root, b: &Root) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..self.rank {
            if a.0[i] == 0 {
                continue;
            }
            for j in 0..self.rank {
                if b.0[j] != 0 {
                    acc += &self.gram[i][j] * rq((a.0[i] as i64) * (b.0[j] as i64), 1);
                }
            }
        }
        acc
    }

    pub fn length_sq(&self, r: &Root) -> Rat {
        self.form_roots(r, r)
    }

    /// <beta, alpha_i_check>
    pub fn pairing_simple_coroot(&self, beta: &Root, i: usize) -> i64 {
        (0..self.rank).map(|j| beta.0[j] as i64 * self.cartan[i][j]).sum()
    }

    /// The highest root.
    pub fn highest_root(&self) -> Root {
        self.positive.last().unwrap().clone()
    }

    /// Half the sum of positive roots, in root coordinates.
    pub fn rho_root_coords(&self) -> Vec<Rat> {
        let mut acc = vec![Rat::zero(); self.rank];
        for r in &self.positive {
            for i in 0..self.rank {
                acc[i] += rq(r.0[i] as i64, 2);
            }
        }
        acc
    }

    /// Convert fundamental-weight coordinates to simple-root coordinates.
    pub fn weight_to_root_coords(&self, w: &Weight) -> Vec<Rat> {
        // solve cartan * c = w
        let n = self.rank;
        let mut aug: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                let mut row: Vec<Rat> =
                    (0..n).map(|j| Rat::from_integer(self.cartan[i][j].into())).collect();
                row.push(w.0[i].clone());
                row
            })
            .collect();
        rat_solve(&mut aug)
    }

    pub fn root_to_weight(&self, r: &Root) -> Weight {
        Weight((0..self.rank).map(|i| rq(self.pairing_simple_coroot(r, i), 1)).collect())
    }

    /// Invariant form on weights (fundamental-weight coordinates).
    pub fn form_weights(&self, a: &Weight, b: &Weight) -> Rat {
        let ca = self.weight_to_root_coords(a);
        let cb = self.weight_to_root_coords(b);
        let mut acc = Rat::zero();
        for i in 0..self.rank {
            if ca[i].is_zero() {
                continue;
            }
            for j in 0..self.rank {
                if !cb[j].is_zero() {
                    acc += &ca[i] * &cb[j] * &self.gram[i][j];
                }
            }
        }
        acc
    }

    pub fn rho(&self) -> Weight {
        Weight(vec![Rat::one(); self.rank])
    }

    /// Simple reflection acting on fundamental-weight coordinates.
    pub fn reflect(&self, w: &Weight, i: usize) -> Weight {
        let c = w.0[i].clone();
        let mut out = w.clone();
        for j in 0..self.rank {
            out.0[j] -= &c * Rat::from_integer(self.cartan[j][i].into());
        }
        out
    }

    /// The unique antidominant element of the Weyl orbit; for dominant mu
    /// this is w_0(mu).
    pub fn antidominant(&self, w: &Weight) -> Weight {
        let mut cur = w.clone();
        loop {
            match cur.0.iter().position(|x| x.is_positive()) {
                Some(i) => cur = self.reflect(&cur, i),
                None => return cur,
            }
        }
    }

    /// Weyl dimension formula for a dominant integral weight.
    pub fn weyl_dim(&self, mu: &Weight) -> BigInt {
        assert!(mu.is_dominant() && mu.is_integral(), "weight not dominant integral");
        let rho = self.rho();
        let mu_rho = mu.add(&rho);
        let cm = self.weight_to_root_coords(&mu_rho);
        let cr = self.weight_to_root_coords(&rho);
        let mut num = Rat::one();
        let mut den = Rat::one();
        for alpha in &self.positive {
            let mut a = Rat::zero();
            let mut b = Rat::zero();
            for i in 0..self.rank {
                for j in 0..self.rank {
                    if alpha.0[j] != 0 {
                        let g = &self.gram[i][j] * rq(alpha.0[j] as i64, 1);
                        a += &cm[i] * &g;
                        b += &cr[i] * &g;
                    }
                }
            }
            num *= a;
            den *= b;
        }
        let q = num / den;
        assert!(q.is_integer(), "Weyl dimension not integral");
        q.to_integer()
    }

    /// Dual Coxeter number, computed as <theta, theta + 2 rho> / 2 in the
    /// normalized form.
    pub fn dual_coxeter(&self) -> i64 {
        let theta = self.highest_root();
        let tw = self.root_to_weight(&theta);
        let two_rho = Weight(vec![rq(2, 1); self.rank]);
        let v = self.form_weights(&tw, &tw.add(&two_rho)) / rq(2, 1);
        assert!(v.is_integer());
        int_val(&v)
    }
}

fn int_val(q: &Rat) -> i64 {
    use num::ToPrimitive;
    q.to_integer().to_i64().expect("value does not fit in i64")
}

/// Solve a square rational system given as augmented rows; panics if
/// singular.
pub(crate) fn rat_solve(aug: &mut [Vec<Rat>]) -> Vec<Rat> {
    let n = aug.len();
    for col in 0..n {
        let p = (col..n).find(|&i| !aug[i][col].is_zero()).expect("singular system");
        aug.swap(col, p);
        let inv = aug[col][col].recip();
        for j in col..=n {
            let v = &aug[col][j] * &inv;
            aug[col][j] = v;
        }
        for i in 0..n {
            if i != col && !aug[i][col].is_zero() {
                let f = aug[i][col].clone();
                for j in col..=n {
                    let sub = &f * &aug[col][j];
                    aug[i][j] -= sub;
                }
            }
        }
    }
    (0..n).map(|i| aug[i][n].clone()).collect()
}
