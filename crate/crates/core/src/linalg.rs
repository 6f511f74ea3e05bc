//! Exact sparse integer linear algebra.
//!
//! Elimination is fraction-free: a row is reduced by a pivot row through
//! `row·(p/g) − pivot·(r/g)` with `g = gcd(p, r)`, then divided by its
//! content. Arithmetic first runs on `i64` (checked through `i128`) and
//! restarts on arbitrary-precision integers if anything overflows.

use std::fmt::{self, Debug, Write as _};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Row-major sparse integer matrix; rows sorted by column, no stored zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseIntMatrix {
    ncols: usize,
    rows: Vec<Vec<(usize, i64)>>,
}

impl SparseIntMatrix {
    pub fn new(ncols: usize) -> Self {
        SparseIntMatrix {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseIntMatrix::new(n);
        for i in 0..n {
            m.rows.push(vec![(i, 1)]);
        }
        m
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseIntMatrix {
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn from_dense(ncols: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let mut m = SparseIntMatrix::new(ncols);
        for r in rows {
            if r.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} in a matrix with {ncols} columns",
                    r.len()
                )));
            }
            m.push_row(r.iter().copied().enumerate().collect())?;
        }
        Ok(m)
    }

    /// Adds a row given as `(column, value)` pairs in any order; repeated
    /// columns are summed and zeros dropped.
    pub fn push_row(&mut self, mut entries: Vec<(usize, i64)>) -> Result<()> {
        if let Some(&(c, _)) = entries.iter().find(|e| e.0 >= self.ncols) {
            return Err(Error::DimensionMismatch(format!(
                "column {c} out of range 0..{}",
                self.ncols
            )));
        }
        entries.sort_unstable_by_key(|e| e.0);
        let mut row: Vec<(usize, i64)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match row.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => row.push((c, v)),
            }
        }
        row.retain(|e| e.1 != 0);
        self.rows.push(row);
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<(usize, i64)>] {
        &self.rows
    }

    pub fn mul_vec(&self, v: &RationalVector) -> Result<RationalVector> {
        if v.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.ncols
            )));
        }
        Ok(RationalVector(
            self.rows
                .iter()
                .map(|r| {
                    r.iter().fold(BigRational::zero(), |acc, &(c, x)| {
                        acc + &v.0[c] * BigInt::from(x)
                    })
                })
                .collect(),
        ))
    }

    /// One `row col value` line per stored entry, zero-based.
    pub fn to_triplets(&self) -> String {
        let mut out = format!("% {} {}\n", self.nrows(), self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for &(c, v) in r {
                writeln!(out, "{i} {c} {v}").expect("write to String");
            }
        }
        out
    }
}

/// Exact rational vector; entries kept in lowest terms by `BigRational`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct RationalVector(pub Vec<BigRational>);

impl RationalVector {
    pub fn zeros(n: usize) -> Self {
        RationalVector(vec![BigRational::zero(); n])
    }

    pub fn from_integers(v: &[BigInt]) -> Self {
        RationalVector(
            v.iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Integer entries, if every entry has denominator 1.
    pub fn as_integers(&self) -> Option<Vec<BigInt>> {
        self.0
            .iter()
            .map(|x| x.is_integer().then(|| x.to_integer()))
            .collect()
    }

    /// Nonzero entries as `(index, value)`.
    pub fn support(&self) -> impl Iterator<Item = (usize, &BigRational)> {
        self.0.iter().enumerate().filter(|(_, x)| !x.is_zero())
    }
}

impl Debug for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.0.iter().map(|x| x.to_string()))
            .finish()
    }
}

trait Scalar: Clone + PartialEq + Debug {
    fn from_i64(v: i64) -> Self;
    fn from_big(v: &BigInt) -> Option<Self>;
    fn is_nil(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn negated(&self) -> Self;
    fn gcd_with(&self, other: &Self) -> Self;
    fn div_exact(&self, g: &Self) -> Self;
    /// `a·x − b·y`, or `None` on overflow.
    fn combine(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn is_unit(&self) -> bool;
}

impl Scalar for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i64().filter(|v| v.unsigned_abs() < 1 << 62)
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn is_neg(&self) -> bool {
        *self < 0
    }
    fn negated(&self) -> Self {
        -*self
    }
    fn gcd_with(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, g: &Self) -> Self {
        self / g
    }
    fn combine(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        let v = i128::from(*a) * i128::from(*x) - i128::from(*b) * i128::from(*y);
        // Keep headroom so negation and later gcds stay in range.
        i64::try_from(v).ok().filter(|v| v.unsigned_abs() < 1 << 62)
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn is_unit(&self) -> bool {
        *self == 1
    }
}

impl Scalar for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_neg(&self) -> bool {
        Signed::is_negative(self)
    }
    fn negated(&self) -> Self {
        -self
    }
    fn gcd_with(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, g: &Self) -> Self {
        self / g
    }
    fn combine(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        Some(a * x - b * y)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn is_unit(&self) -> bool {
        One::is_one(self)
    }
}

struct Overflow;

type Row<T> = Vec<(usize, T)>;

/// Echelon form built one row at a time.
struct Echelon<T> {
    ncols: usize,
    /// Column that may never become a pivot (the right-hand side).
    forbidden: Option<usize>,
    weight: Vec<usize>,
    pivot_of_col: Vec<Option<usize>>,
    pivots: Vec<(usize, Row<T>)>,
    inconsistent: bool,
}

fn make_primitive<T: Scalar>(row: &mut Row<T>) {
    let Some(first) = row.first() else { return };
    let mut g = first.1.gcd_with(&first.1);
    for (_, v) in row.iter().skip(1) {
        if g.is_unit() {
            break;
        }
        g = g.gcd_with(v);
    }
    if !g.is_unit() && !g.is_nil() {
        for (_, v) in row.iter_mut() {
            *v = v.div_exact(&g);
        }
    }
}

/// `row·(p/g) − pivot·(r/g)` where `p`, `r` are the entries at `col`.
fn eliminate<T: Scalar>(row: &Row<T>, pivot: &Row<T>, col: usize) -> Result<Row<T>, Overflow> {
    let r = &row.iter().find(|e| e.0 == col).expect("entry at col").1;
    let p = &pivot.iter().find(|e| e.0 == col).expect("pivot entry").1;
    let g = p.gcd_with(r);
    let (ps, rs) = (p.div_exact(&g), r.div_exact(&g));
    let zero = T::from_i64(0);
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let (c, v) = match (row.get(i), pivot.get(j)) {
            (Some(a), Some(b)) if a.0 == b.0 => {
                i += 1;
                j += 1;
                (a.0, T::combine(&a.1, &ps, &b.1, &rs))
            }
            (Some(a), b) if b.map_or(true, |b| a.0 < b.0) => {
                i += 1;
                (a.0, T::combine(&a.1, &ps, &zero, &zero))
            }
            (_, Some(b)) => {
                j += 1;
                (b.0, T::combine(&zero, &zero, &b.1, &rs))
            }
            _ => unreachable!(),
        };
        let v = v.ok_or(Overflow)?;
        if !v.is_nil() {
            out.push((c, v));
        }
    }
    make_primitive(&mut out);
    Ok(out)
}

impl<T: Scalar> Echelon<T> {
    fn new(ncols: usize, forbidden: Option<usize>, weight: Vec<usize>) -> Self {
        Echelon {
            ncols,
            forbidden,
            weight,
            pivot_of_col: vec![None; ncols],
            pivots: Vec::new(),
            inconsistent: false,
        }
    }

    fn reduce(&self, mut row: Row<T>) -> Result<Row<T>, Overflow> {
        loop {
            let next = row
                .iter()
                .filter_map(|&(c, _)| self.pivot_of_col[c].map(|p| (p, c)))
                .min();
            let Some((p, c)) = next else { return Ok(row) };
            row = eliminate(&row, &self.pivots[p].1, c)?;
        }
    }

    fn insert(&mut self, row: Row<T>) -> Result<(), Overflow> {
        let mut row = self.reduce(row)?;
        let choice = row
            .iter()
            .map(|e| e.0)
            .filter(|&c| Some(c) != self.forbidden)
            .min_by_key(|&c| (self.weight[c], c));
        match choice {
            Some(c) => {
                if row.iter().find(|e| e.0 == c).expect("pivot").1.is_neg() {
                    for (_, v) in row.iter_mut() {
                        *v = v.negated();
                    }
                }
                self.pivot_of_col[c] = Some(self.pivots.len());
                self.pivots.push((c, row));
            }
            None if !row.is_empty() => self.inconsistent = true,
            None => {}
        }
        Ok(())
    }

    /// Reduces every pivot row so it holds only its pivot and non-pivot columns.
    fn back_substitute(&mut self) -> Result<(), Overflow> {
        for i in (0..self.pivots.len()).rev() {
            let mut row = std::mem::take(&mut self.pivots[i].1);
            let own = self.pivots[i].0;
            loop {
                let next = row
                    .iter()
                    .filter(|e| e.0 != own)
                    .filter_map(|&(c, _)| self.pivot_of_col[c].map(|p| (p, c)))
                    .min();
                let Some((p, c)) = next else { break };
                row = eliminate(&row, &self.pivots[p].1, c)?;
            }
            self.pivots[i].1 = row;
        }
        Ok(())
    }
}

fn run<T: Scalar>(
    m: &SparseIntMatrix,
    rhs: Option<&[BigInt]>,
    backsub: bool,
) -> Result<Echelon<T>, Overflow> {
    let ncols = m.ncols + usize::from(rhs.is_some());
    let mut weight = vec![0usize; ncols];
    for r in &m.rows {
        for &(c, _) in r {
            weight[c] += 1;
        }
    }
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by_key(|&i| m.rows[i].len());
    let mut ech = Echelon::new(ncols, rhs.map(|_| m.ncols), weight);
    for i in order {
        let mut row: Row<T> = m.rows[i]
            .iter()
            .map(|&(c, v)| (c, T::from_i64(v)))
            .collect();
        if let Some(b) = rhs {
            if !b[i].is_nil() {
                row.push((m.ncols, T::from_big(&b[i]).ok_or(Overflow)?));
            }
        }
        if row.is_empty() {
            continue;
        }
        make_primitive(&mut row);
        ech.insert(row)?;
    }
    if backsub {
        ech.back_substitute()?;
    }
    Ok(ech)
}

/// Result in arbitrary precision, with all pivot rows in reduced form.
struct Reduced {
    pivots: Vec<(usize, Vec<(usize, BigInt)>)>,
    pivot_cols: Vec<bool>,
    inconsistent: bool,
}

fn reduced(m: &SparseIntMatrix, rhs: Option<&[BigInt]>, backsub: bool) -> Reduced {
    fn convert<T: Scalar>(e: Echelon<T>) -> Reduced {
        let mut pivot_cols = vec![false; e.ncols];
        for (c, _) in &e.pivots {
            pivot_cols[*c] = true;
        }
        Reduced {
            pivots: e
                .pivots
                .into_iter()
                .map(|(c, r)| (c, r.into_iter().map(|(k, v)| (k, v.to_big())).collect()))
                .collect(),
            pivot_cols,
            inconsistent: e.inconsistent,
        }
    }
    match run::<i64>(m, rhs, backsub) {
        Ok(e) => convert(e),
        Err(Overflow) => match run::<BigInt>(m, rhs, backsub) {
            Ok(e) => convert(e),
            Err(Overflow) => unreachable!("BigInt arithmetic does not overflow"),
        },
    }
}

pub fn rank(m: &SparseIntMatrix) -> usize {
    reduced(m, None, false).pivots.len()
}

/// Rational kernel basis: one vector per non-pivot column (ascending), each a
/// primitive integer vector whose first nonzero entry is positive.
pub fn kernel_basis(m: &SparseIntMatrix) -> Vec<RationalVector> {
    let red = reduced(m, None, true);
    let mut by_free: Vec<Vec<usize>> = vec![Vec::new(); m.ncols];
    for (i, (_, row)) in red.pivots.iter().enumerate() {
        for (c, _) in row {
            if !red.pivot_cols[*c] {
                by_free[*c].push(i);
            }
        }
    }
    (0..m.ncols)
        .filter(|&f| !red.pivot_cols[f])
        .map(|f| {
            let mut v = vec![BigRational::zero(); m.ncols];
            v[f] = BigRational::one();
            for &i in &by_free[f] {
                let (pc, row) = &red.pivots[i];
                let a_f = &row.iter().find(|e| e.0 == f).expect("free entry").1;
                let a_p = &row.iter().find(|e| e.0 == *pc).expect("pivot entry").1;
                v[*pc] = -BigRational::new(a_f.clone(), a_p.clone());
            }
            primitive(RationalVector(v))
        })
        .collect()
}

/// Scales to a primitive integer vector with positive leading entry.
pub fn primitive(v: RationalVector) -> RationalVector {
    let lcm = v.0.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.0.iter().map(|x| (x * &lcm).to_integer()).collect();
    let mut g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v;
    }
    if ints
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative())
    {
        g = -g;
    }
    RationalVector(
        ints.into_iter()
            .map(|x| BigRational::from_integer(x / &g))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Solved(RationalVector),
    Infeasible,
}

/// Some `v` with `M·v = b` (free variables set to zero), or `Infeasible`.
pub fn solve_particular(m: &SparseIntMatrix, b: &[BigInt]) -> Result<Solution> {
    if b.len() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            m.nrows()
        )));
    }
    let red = reduced(m, Some(b), true);
    if red.inconsistent {
        return Ok(Solution::Infeasible);
    }
    let aug = m.ncols;
    let mut v = vec![BigRational::zero(); m.ncols];
    for (pc, row) in &red.pivots {
        let a_p = &row.iter().find(|e| e.0 == *pc).expect("pivot entry").1;
        if let Some((_, rhs)) = row.iter().find(|e| e.0 == aug) {
            v[*pc] = BigRational::new(rhs.clone(), a_p.clone());
        }
    }
    Ok(Solution::Solved(RationalVector(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Oracle: dense Gaussian elimination over rationals.
    fn dense_rank(rows: &[Vec<i64>], ncols: usize) -> usize {
        let mut a: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| BigRational::from_integer(x.into()))
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for c in 0..ncols {
            let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            for i in 0..a.len() {
                if i != rank && !a[i][c].is_zero() {
                    let f = &a[i][c] / &a[rank][c];
                    for k in 0..ncols {
                        let d = &f * &a[rank][k];
                        a[i][k] -= d;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&SparseIntMatrix::identity(3)).is_empty());
        assert_eq!(kernel_basis(&SparseIntMatrix::zeros(2, 5)).len(), 5);
        let m = SparseIntMatrix::from_dense(3, &[vec![1, 1, 1]]).unwrap();
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).unwrap().is_zero());
        }
        assert_eq!(k[0], RationalVector(vec![int(1), int(-1), int(0)]));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&SparseIntMatrix::identity(4)), 4);
        assert_eq!(rank(&SparseIntMatrix::zeros(3, 3)), 0);
        let m = SparseIntMatrix::from_dense(2, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn solve_examples() {
        let b: Vec<BigInt> = [3, -7, 11].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(
            solve_particular(&SparseIntMatrix::identity(3), &b).unwrap(),
            Solution::Solved(RationalVector::from_integers(&b))
        );
        let zero = SparseIntMatrix::zeros(1, 2);
        assert_eq!(
            solve_particular(&zero, &[BigInt::from(1)]).unwrap(),
            Solution::Infeasible
        );
        let m = SparseIntMatrix::from_dense(2, &[vec![2, 0], vec![0, 3]]).unwrap();
        let Solution::Solved(v) = solve_particular(&m, &[1.into(), 1.into()]).unwrap() else {
            panic!()
        };
        assert_eq!(
            v.0,
            vec![
                BigRational::new(1.into(), 2.into()),
                BigRational::new(1.into(), 3.into())
            ]
        );
        assert!(solve_particular(&m, &[1.into()]).is_err());
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        // Entries near 2^40 force products beyond i64 during elimination.
        let big = 1i64 << 40;
        let rows = vec![
            vec![big + 1, big - 1, 3, 0],
            vec![big - 3, big + 7, 0, 5],
            vec![big + 11, 13, big - 17, 1],
        ];
        let m = SparseIntMatrix::from_dense(4, &rows).unwrap();
        assert_eq!(rank(&m), dense_rank(&rows, 4));
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).unwrap().is_zero());
    }

    #[test]
    fn triplet_dump() {
        let m = SparseIntMatrix::from_dense(2, &[vec![0, -2], vec![1, 0]]).unwrap();
        assert_eq!(m.to_triplets(), "% 2 2\n0 1 -2\n1 0 1\n");
    }

    proptest! {
        #[test]
        fn kernel_is_a_basis(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 6), 0..6)) {
            let m = SparseIntMatrix::from_dense(6, &rows).unwrap();
            let r = rank(&m);
            prop_assert_eq!(r, dense_rank(&rows, 6));
            let k = kernel_basis(&m);
            prop_assert_eq!(r + k.len(), 6);
            for v in &k {
                prop_assert!(m.mul_vec(v).unwrap().is_zero());
                let ints = v.as_integers().unwrap();
                let g = ints.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
                prop_assert!(g.is_one());
                prop_assert!(ints.iter().find(|x| !x.is_zero()).unwrap().is_positive());
            }
            // Independence: stacked kernel has full rank.
            let stacked: Vec<Vec<i64>> = k.iter().map(|v| v.as_integers().unwrap().iter().map(|x| x.to_i64().unwrap()).collect()).collect();
            prop_assert_eq!(dense_rank(&stacked, 6), k.len());
        }

        #[test]
        fn particular_solutions_solve(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..5),
                                      x in prop::collection::vec(-5i64..=5, 4)) {
            let m = SparseIntMatrix::from_dense(4, &rows).unwrap();
            let xv = RationalVector(x.iter().map(|&v| int(v)).collect());
            let b: Vec<BigInt> = m.mul_vec(&xv).unwrap().0.iter().map(|v| v.to_integer()).collect();
            match solve_particular(&m, &b).unwrap() {
                Solution::Solved(v) => prop_assert_eq!(m.mul_vec(&v).unwrap(), RationalVector::from_integers(&b)),
                Solution::Infeasible => prop_assert!(false, "consistent system reported infeasible"),
            }
        }
    }
}
