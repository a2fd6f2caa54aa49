//! Exact dense linear algebra over Q(zeta_M): row reduction, rank,
//! nullspace, linear solves and inverses.  Sizes in this crate stay in the
//! low hundreds, so fraction-exact Gaussian elimination is adequate.

use crate::scalars::Cyc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Cyc>, // row-major
    pub conductor: u32,
}

impl CycMat {
    pub fn zeros(conductor: u32, rows: usize, cols: usize) -> Self {
        CycMat {
            rows,
            cols,
            data: vec![Cyc::zero(conductor); rows * cols],
            conductor,
        }
    }

    pub fn identity(conductor: u32, n: usize) -> Self {
        let mut m = Self::zeros(conductor, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Cyc::one(conductor);
        }
        m
    }

    pub fn from_rows(conductor: u32, rows: Vec<Vec<Cyc>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        CycMat { rows: r, cols: c, data, conductor }
    }

    pub fn at(&self, i: usize, j: usize) -> &Cyc {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Cyc {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Cyc] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> CycMat {
        let mut out = CycMat::zeros(self.conductor, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        out
    }

    pub fn conj(&self) -> CycMat {
        CycMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.conj()).collect(),
            conductor: self.conductor,
        }
    }

    pub fn mul(&self, rhs: &CycMat) -> CycMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = CycMat::zeros(self.conductor, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.at(k, j);
                    if !b.is_zero() {
                        let prod = a * b;
                        *out.at_mut(i, j) += &prod;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Cyc]) -> Vec<Cyc> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Cyc::zero(self.conductor);
                for j in 0..self.cols {
                    let a = self.at(i, j);
                    if !a.is_zero() && !v[j].is_zero() {
                        let prod = a * &v[j];
                        acc += &prod;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn sub(&self, rhs: &CycMat) -> CycMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CycMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
            conductor: self.conductor,
        }
    }

    pub fn scale(&self, c: &Cyc) -> CycMat {
        CycMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
            conductor: self.conductor,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// self + c * other.
    pub fn add_scaled(&self, other: &CycMat, c: &Cyc) -> CycMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                let t = b * c;
                *a += &t;
            }
        }
        out
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            // find pivot
            let Some(p) = (r..self.rows).find(|&i| !self.at(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    let a = p * self.cols + j;
                    let b = r * self.cols + j;
                    self.data.swap(a, b);
                }
            }
            let inv = self.at(r, c).inv();
            for j in c..self.cols {
                let v = self.at(r, j) * &inv;
                *self.at_mut(r, j) = v;
            }
            for i in 0..self.rows {
                if i == r || self.at(i, c).is_zero() {
                    continue;
                }
                let f = self.at(i, c).clone();
                for j in c..self.cols {
                    let sub = &f * self.at(r, j);
                    *self.at_mut(i, j) -= &sub;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// A basis of the right nullspace.
    pub fn nullspace(&self) -> Vec<Vec<Cyc>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![Cyc::zero(self.conductor); self.cols];
            v[fc] = Cyc::one(self.conductor);
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.at(ri, fc).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve self * x = b; returns None when inconsistent.  When the system
    /// is underdetermined, free variables are set to zero.
    pub fn solve(&self, b: &[Cyc]) -> Option<Vec<Cyc>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = CycMat::zeros(self.conductor, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *aug.at_mut(i, j) = self.at(i, j).clone();
            }
            *aug.at_mut(i, self.cols) = b[i].clone();
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // pivot in the augmented column: inconsistent
        }
        let mut x = vec![Cyc::zero(self.conductor); self.cols];
        for (ri, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.at(ri, self.cols).clone();
        }
        Some(x)
    }

    /// Inverse of a square matrix; panics if singular.
    pub fn inverse(&self) -> CycMat {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = CycMat::zeros(self.conductor, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                *aug.at_mut(i, j) = self.at(i, j).clone();
            }
            *aug.at_mut(i, n + i) = Cyc::one(self.conductor);
        }
        let pivots = aug.rref();
        assert_eq!(pivots, (0..n).collect::<Vec<_>>(), "matrix is singular");
        let mut out = CycMat::zeros(self.conductor, n, n);
        for i in 0..n {
            for j in 0..n {
                *out.at_mut(i, j) = aug.at(i, n + j).clone();
            }
        }
        out
    }
}

/// Column-sparse matrix over Q(zeta_M).  Representation matrices of root
/// vectors and their products stay extremely sparse, and the big modules in
/// the verification suites make dense storage prohibitive.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    pub conductor: u32,
    /// per column: (row, value) pairs, sorted by row, values nonzero
    cols_data: Vec<Vec<(usize, Cyc)>>,
}

impl SparseMat {
    pub fn zeros(conductor: u32, rows: usize, cols: usize) -> Self {
        SparseMat { rows, cols, conductor, cols_data: vec![Vec::new(); cols] }
    }

    pub fn identity(conductor: u32, n: usize) -> Self {
        let mut m = Self::zeros(conductor, n, n);
        for j in 0..n {
            m.cols_data[j].push((j, Cyc::one(conductor)));
        }
        m
    }

    pub fn from_dense(d: &CycMat) -> Self {
        let mut m = Self::zeros(d.conductor, d.rows, d.cols);
        for j in 0..d.cols {
            for i in 0..d.rows {
                if !d.at(i, j).is_zero() {
                    m.cols_data[j].push((i, d.at(i, j).clone()));
                }
            }
        }
        m
    }

    pub fn to_dense(&self) -> CycMat {
        let mut out = CycMat::zeros(self.conductor, self.rows, self.cols);
        for (j, col) in self.cols_data.iter().enumerate() {
            for (i, c) in col {
                *out.at_mut(*i, j) = c.clone();
            }
        }
        out
    }

    pub fn col(&self, j: usize) -> &[(usize, Cyc)] {
        &self.cols_data[j]
    }

    /// Replace a column; entries need not be sorted but must have distinct
    /// rows.
    pub fn set_col(&mut self, j: usize, mut entries: Vec<(usize, Cyc)>) {
        entries.retain(|(_, c)| !c.is_zero());
        entries.sort_by_key(|(i, _)| *i);
        self.cols_data[j] = entries;
    }

    pub fn nnz(&self) -> usize {
        self.cols_data.iter().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols_data.iter().all(|c| c.is_empty())
    }

    pub fn apply(&self, v: &[Cyc]) -> Vec<Cyc> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Cyc::zero(self.conductor); self.rows];
        for (j, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, c) in &self.cols_data[j] {
                let t = c * x;
                out[*i] += &t;
            }
        }
        out
    }

    pub fn mul(&self, rhs: &SparseMat) -> SparseMat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = SparseMat::zeros(self.conductor, self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let mut acc: std::collections::BTreeMap<usize, Cyc> = std::collections::BTreeMap::new();
            for (k, c) in &rhs.cols_data[j] {
                for (i, a) in &self.cols_data[*k] {
                    let t = a * c;
                    match acc.entry(*i) {
                        std::collections::btree_map::Entry::Vacant(e) => {
                            e.insert(t);
                        }
                        std::collections::btree_map::Entry::Occupied(mut e) => {
                            *e.get_mut() += &t;
                        }
                    }
                }
            }
            out.cols_data[j] =
                acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        }
        out
    }

    pub fn add_scaled(&self, other: &SparseMat, f: &Cyc) -> SparseMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = SparseMat::zeros(self.conductor, self.rows, self.cols);
        for j in 0..self.cols {
            let mut acc: std::collections::BTreeMap<usize, Cyc> = std::collections::BTreeMap::new();
            for (i, c) in &self.cols_data[j] {
                acc.insert(*i, c.clone());
            }
            for (i, c) in &other.cols_data[j] {
                let t = c * f;
                match acc.entry(*i) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(t);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() += &t;
                    }
                }
            }
            out.cols_data[j] = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        }
        out
    }

    pub fn sub(&self, other: &SparseMat) -> SparseMat {
        self.add_scaled(other, &-Cyc::one(self.conductor))
    }

    pub fn scale(&self, f: &Cyc) -> SparseMat {
        if f.is_zero() {
            return SparseMat::zeros(self.conductor, self.rows, self.cols);
        }
        let mut out = self.clone();
        for col in out.cols_data.iter_mut() {
            for (_, c) in col.iter_mut() {
                *c = &*c * f;
            }
        }
        out
    }

    pub fn commutator(&self, other: &SparseMat) -> SparseMat {
        self.mul(other).sub(&other.mul(self))
    }
}

/// Row-span membership tracker: incrementally accepts vectors and reports
/// whether each enlarges the span.  Used for pivot-style selection of
/// independent subsets without re-running elimination from scratch.
pub struct SpanTracker {
    conductor: u32,
    dim: usize,
    /// reduced rows, each with its leading column
    rows: Vec<(usize, Vec<Cyc>)>,
}

impl SpanTracker {
    pub fn new(conductor: u32, dim: usize) -> Self {
        SpanTracker { conductor, dim, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce v against the current span; returns the residual and its
    /// leading column if nonzero.
    fn reduce(&self, v: &[Cyc]) -> Option<(usize, Vec<Cyc>)> {
        let mut v = v.to_vec();
        for (lead, row) in &self.rows {
            if !v[*lead].is_zero() {
                let f = v[*lead].clone();
                for j in *lead..self.dim {
                    if !row[j].is_zero() {
                        let sub = &f * &row[j];
                        v[j] -= &sub;
                    }
                }
            }
        }
        let lead = v.iter().position(|x| !x.is_zero())?;
        Some((lead, v))
    }

    /// Returns true (and absorbs the vector) when v is independent of the
    /// vectors added so far.
    pub fn insert(&mut self, v: &[Cyc]) -> bool {
        assert_eq!(v.len(), self.dim);
        match self.reduce(v) {
            None => false,
            Some((lead, mut row)) => {
                let inv = row[lead].inv();
                for x in row.iter_mut() {
                    if !x.is_zero() {
                        *x = &*x * &inv;
                    }
                }
                self.rows.push((lead, row));
                self.rows.sort_by_key(|(l, _)| *l);
                self.conductor_check();
                true
            }
        }
    }

    pub fn contains(&self, v: &[Cyc]) -> bool {
        self.reduce(v).is_none()
    }

    fn conductor_check(&self) {
        debug_assert!(self
            .rows
            .iter()
            .all(|(_, r)| r.iter().all(|c| c.conductor() == self.conductor)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Cyc;

    fn c(m: u32, n: i64) -> Cyc {
        Cyc::from_i64(m, n)
    }

    #[test]
    fn solve_and_inverse() {
        let m = 4;
        let a = CycMat::from_rows(
            m,
            vec![
                vec![c(m, 2), Cyc::root_of_unity(m, 4)],
                vec![c(m, 1), c(m, -1)],
            ],
        );
        let inv = a.inverse();
        assert_eq!(a.mul(&inv), CycMat::identity(m, 2));
        let b = vec![c(m, 3), c(m, 0)];
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul_vec(&x), b);
    }

    #[test]
    fn nullspace_dimension() {
        let m = 4;
        // rank-1 3x3 matrix
        let a = CycMat::from_rows(
            m,
            vec![
                vec![c(m, 1), c(m, 2), c(m, 3)],
                vec![c(m, 2), c(m, 4), c(m, 6)],
                vec![c(m, -1), c(m, -2), c(m, -3)],
            ],
        );
        assert_eq!(a.rank(), 1);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(a.mul_vec(&v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn span_tracker() {
        let m = 4;
        let mut t = SpanTracker::new(m, 3);
        assert!(t.insert(&[c(m, 1), c(m, 0), c(m, 1)]));
        assert!(t.insert(&[c(m, 0), c(m, 1), c(m, 1)]));
        assert!(!t.insert(&[c(m, 1), c(m, 1), c(m, 2)]));
        assert_eq!(t.rank(), 2);
        assert!(t.contains(&[c(m, 2), c(m, -1), c(m, 1)]));
        assert!(!t.contains(&[c(m, 0), c(m, 0), c(m, 1)]));
    }
}
