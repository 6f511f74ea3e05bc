//! Subdiagram expansions, the pairing, relation matrices of the quotients
//! `O(n,k)`, `E(n)` and `GPV(n)`, and formula bases.
//!
//! Relations are the images of Reidemeister moves: for an instance with
//! context `C` the row is `Σ_{∅≠S⊆A_lhs} [C∪S] − Σ_{∅≠S⊆A_rhs} [C∪S]`,
//! projected onto the quotient's variables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::{
    enumerate_diagrams, Ambient, CanonicalKey, EnumerationOptions, GaussDiagram, MarkChoice,
    MarkedDiagram, Sign, SignChoice,
};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, rank, SparseIntMatrix};
use crate::moves::{contexts, local_moves, placements, MarkMode, MoveKind};
use crate::parity::ParityRule;

/// Whether the keys of a formal sum carry marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoration {
    Marked,
    Unmarked,
}

/// Integer combination of canonical diagrams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSum {
    ambient: Ambient,
    decoration: Decoration,
    terms: BTreeMap<CanonicalKey, BigInt>,
}

impl FormalSum {
    pub fn new(ambient: Ambient, decoration: Decoration) -> Self {
        FormalSum {
            ambient,
            decoration,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(d: &MarkedDiagram, decoration: Decoration) -> Self {
        let mut s = FormalSum::new(d.ambient(), decoration);
        s.add(key_of(d, decoration), BigInt::one());
        s
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn decoration(&self) -> Decoration {
        self.decoration
    }

    pub fn add(&mut self, key: CanonicalKey, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_default();
        *slot += coeff;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add_sum(&mut self, other: &FormalSum, scale: &BigInt) -> Result<()> {
        self.compatible(other)?;
        for (k, v) in &other.terms {
            self.add(k.clone(), v * scale);
        }
        Ok(())
    }

    pub fn get(&self, key: &CanonicalKey) -> BigInt {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> &BTreeMap<CanonicalKey, BigInt> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The supported diagrams, decoded from their keys.
    pub fn diagrams(&self) -> impl Iterator<Item = (MarkedDiagram, &BigInt)> {
        self.terms.iter().map(|(k, v)| {
            let d = MarkedDiagram::parse(k.as_str(), self.ambient).expect("keys are valid codes");
            (d, v)
        })
    }

    fn compatible(&self, other: &FormalSum) -> Result<()> {
        if self.ambient != other.ambient {
            Err(Error::AmbientMismatch)
        } else if self.decoration != other.decoration {
            Err(Error::DecorationMismatch)
        } else {
            Ok(())
        }
    }
}

pub fn key_of(d: &MarkedDiagram, decoration: Decoration) -> CanonicalKey {
    match decoration {
        Decoration::Marked => d.canonical_key(),
        Decoration::Unmarked => d.base.canonical_key(),
    }
}

/// `⟨F, S⟩ = Σ` over shared keys of the products of coefficients.
pub fn pairing(f: &FormalSum, s: &FormalSum) -> Result<BigInt> {
    f.compatible(s)?;
    let (small, large) = if f.len() <= s.len() { (f, s) } else { (s, f) };
    Ok(small
        .terms
        .iter()
        .filter_map(|(k, v)| large.terms.get(k).map(|w| v * w))
        .sum())
}

/// Sum over arrow subsets of size ≤ `max_size`; marks are computed once on
/// the whole diagram and restricted.
pub fn expand_i(d: &GaussDiagram, rule: ParityRule, max_size: usize) -> Result<FormalSum> {
    let marked = MarkedDiagram::new(d.clone(), rule.marks(d)?)?;
    let mut out = FormalSum::new(d.ambient(), Decoration::Marked);
    for sub in marked.subdiagrams(0, max_size) {
        out.add(sub.canonical_key(), BigInt::one());
    }
    Ok(out)
}

pub fn expand_i_gpv(d: &GaussDiagram, max_size: usize) -> FormalSum {
    let marked = d.clone().all_ones();
    let mut out = FormalSum::new(d.ambient(), Decoration::Unmarked);
    for sub in marked.subdiagrams(0, max_size) {
        out.add(sub.base.canonical_key(), BigInt::one());
    }
    out
}

/// `A ↦ Σ_{A'⊆A} (−1)^{|A−A'|} A'`, extended linearly.
pub fn inverse_i_gpv(a: &FormalSum) -> Result<FormalSum> {
    if a.decoration != Decoration::Unmarked {
        return Err(Error::DecorationMismatch);
    }
    let mut out = FormalSum::new(a.ambient, Decoration::Unmarked);
    for (d, c) in a.diagrams() {
        let m = d.len();
        for sub in d.subdiagrams(0, m) {
            let coeff = if (m - sub.len()) % 2 == 0 {
                c.clone()
            } else {
                -c
            };
            out.add(sub.base.canonical_key(), coeff);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Quotient {
    O { n: usize, k: usize },
    E { n: usize },
    Gpv { n: usize },
}

impl Quotient {
    pub fn new(kind: &str, n: usize, k: usize) -> Result<Self> {
        let q = match kind.to_ascii_lowercase().as_str() {
            "o" => Quotient::O { n, k },
            "e" => Quotient::E { n },
            "gpv" => Quotient::Gpv { n },
            other => {
                return Err(Error::InvalidParameters(format!(
                    "unknown quotient {other:?}"
                )))
            }
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Quotient::O { n, k } if k < 1 || k > n => Err(Error::InvalidParameters(format!(
                "O(n,k) needs 1 ≤ k ≤ n, got n={n}, k={k}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Quotient::O { n, .. } | Quotient::E { n } | Quotient::Gpv { n } => n,
        }
    }

    pub fn decoration(&self) -> Decoration {
        match self {
            Quotient::Gpv { .. } => Decoration::Unmarked,
            _ => Decoration::Marked,
        }
    }

    /// Smallest arrow count in the support.
    pub fn min_arrows(&self) -> usize {
        match *self {
            Quotient::O { k, .. } => k,
            _ => 0,
        }
    }

    /// Whether a diagram with `arrows` arrows, `zeros` of them marked 0,
    /// survives in the quotient.
    pub fn admits(&self, arrows: usize, zeros: usize) -> bool {
        match *self {
            Quotient::O { n, k } => k <= arrows && arrows <= n && zeros < k,
            Quotient::E { n } => arrows <= n && zeros == arrows,
            Quotient::Gpv { n } => arrows <= n,
        }
    }
}

impl fmt::Display for Quotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quotient::O { n, k } => write!(f, "O({n},{k})"),
            Quotient::E { n } => write!(f, "E({n})"),
            Quotient::Gpv { n } => write!(f, "GPV({n})"),
        }
    }
}

/// A formal sum together with the quotient whose relations it annihilates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub sum: FormalSum,
    pub quotient: Quotient,
}

impl Formula {
    pub fn ambient(&self) -> Ambient {
        self.sum.ambient
    }

    /// Support within the arrow window and mark bounds of the quotient.
    pub fn check_support(&self) -> Result<()> {
        if self.sum.decoration != self.quotient.decoration() {
            return Err(Error::DecorationMismatch);
        }
        for (d, _) in self.sum.diagrams() {
            let zeros = match self.quotient {
                Quotient::Gpv { .. } => 0,
                _ => d.zero_count(),
            };
            if !self.quotient.admits(d.len(), zeros) {
                return Err(Error::QuotientViolation(format!(
                    "{} is outside {}",
                    d.to_gauss_code(),
                    self.quotient
                )));
            }
        }
        Ok(())
    }

    /// `⟨F, M⟩` for every relation row; all zero for a genuine formula.
    pub fn annihilates(&self, rel: &RelationMatrix) -> bool {
        let coeff: Vec<BigInt> = rel.columns.iter().map(|k| self.sum.get(k)).collect();
        let off_support = self.sum.terms.keys().any(|k| !rel.index.contains_key(k));
        !off_support
            && rel.matrix.rows().par_iter().all(|row| {
                row.iter()
                    .map(|&(c, v)| &coeff[c] * BigInt::from(v))
                    .sum::<BigInt>()
                    .is_zero()
            })
    }

    pub fn scaled(&self, s: &BigInt) -> Formula {
        let mut sum = FormalSum::new(self.ambient(), self.sum.decoration);
        for (k, v) in &self.sum.terms {
            sum.add(k.clone(), v * s);
        }
        Formula {
            sum,
            quotient: self.quotient,
        }
    }

    pub fn plus(&self, other: &Formula) -> Result<Formula> {
        let mut sum = self.sum.clone();
        sum.add_sum(&other.sum, &BigInt::one())?;
        let quotient = match (self.quotient, other.quotient) {
            (Quotient::O { n: a, k }, Quotient::O { n: b, k: k2 }) if k == k2 => {
                Quotient::O { n: a.max(b), k }
            }
            (Quotient::E { n: a }, Quotient::E { n: b }) => Quotient::E { n: a.max(b) },
            (Quotient::Gpv { n: a }, Quotient::Gpv { n: b }) => Quotient::Gpv { n: a.max(b) },
            _ => {
                return Err(Error::InvalidParameters(
                    "formulas over different quotients".into(),
                ))
            }
        };
        Ok(Formula { sum, quotient })
    }
}

/// `⟨F, I[P](D)⟩` (or `⟨F, I_GPV(D)⟩` for GPV formulas), summing only over
/// subdiagrams the quotient can support.
pub fn evaluate(f: &Formula, rule: ParityRule, d: &GaussDiagram) -> Result<BigInt> {
    if f.ambient() != d.ambient() {
        return Err(Error::AmbientMismatch);
    }
    let q = f.quotient;
    let marks = match q {
        Quotient::Gpv { .. } => vec![1; d.len()],
        _ => rule.marks(d)?,
    };
    let zero_cap = match q {
        Quotient::O { k, .. } => k - 1,
        _ => usize::MAX,
    };
    let marked = MarkedDiagram::new(d.clone(), marks)?;
    let mut total = BigInt::zero();
    let mut chosen = Vec::new();
    subsets_rec(&marked, &q, zero_cap, 0, 0, &mut chosen, &mut |s| {
        let sub = marked.subdiagram(s);
        if let Some(c) = f.sum.terms.get(&key_of(&sub, q.decoration())) {
            total += c;
        }
    });
    Ok(total)
}

fn subsets_rec(
    d: &MarkedDiagram,
    q: &Quotient,
    zero_cap: usize,
    next: usize,
    zeros: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    let zeros_here = if matches!(q, Quotient::Gpv { .. }) {
        0
    } else {
        zeros
    };
    if q.admits(chosen.len(), zeros_here) {
        visit(chosen);
    }
    if chosen.len() == q.n() {
        return;
    }
    for x in next..d.len() {
        let z = zeros + usize::from(d.marks[x] == 0);
        let allowed = match q {
            Quotient::O { .. } => z <= zero_cap,
            Quotient::E { .. } => d.marks[x] == 0,
            Quotient::Gpv { .. } => true,
        };
        if allowed {
            chosen.push(x);
            subsets_rec(d, q, zero_cap, x + 1, z, chosen, visit);
            chosen.pop();
        }
    }
}

/// Where a relation row came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowOrigin {
    pub kind: MoveKind,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone)]
pub struct RelationMatrix {
    pub quotient: Quotient,
    pub ambient: Ambient,
    pub matrix: SparseIntMatrix,
    pub columns: Vec<CanonicalKey>,
    pub index: HashMap<CanonicalKey, usize>,
    pub provenance: Vec<RowOrigin>,
    pub options: RelationOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RelationOptions {
    /// Keep only all-plus diagrams of top degree, substituting
    /// `D = (−1)^{#minus} D⁺`, a consequence of the R2 relations.
    pub top_degree_plus_only: bool,
    /// All-ones contexts, R2 with both marks 1 and R3 with one 0 mark: the
    /// reduced presentation of `O(n,1)`.
    pub reduced_on1: bool,
}

/// Variables of the quotient, ordered by arrow count then key.
pub fn quotient_columns(q: Quotient, ambient: Ambient, opts: RelationOptions) -> Vec<CanonicalKey> {
    let n = q.n();
    let mut cols = Vec::new();
    for m in q.min_arrows()..=n {
        let marks = match q {
            Quotient::O { k: 1, .. } | Quotient::E { .. } | Quotient::Gpv { .. } => {
                MarkChoice::OnesOnly
            }
            Quotient::O { .. } => MarkChoice::All,
        };
        let signs = if opts.top_degree_plus_only && m == n {
            SignChoice::PlusOnly
        } else {
            SignChoice::All
        };
        let mut keys: Vec<CanonicalKey> =
            enumerate_diagrams(m, ambient, EnumerationOptions::new(signs, marks))
                .into_iter()
                .filter_map(|d| match q {
                    Quotient::O { .. } => q.admits(m, d.zero_count()).then(|| d.canonical_key()),
                    Quotient::E { .. } => Some(
                        MarkedDiagram {
                            marks: vec![0; m],
                            base: d.base,
                        }
                        .canonical_key(),
                    ),
                    Quotient::Gpv { .. } => Some(d.base.canonical_key()),
                })
                .collect();
        keys.sort();
        cols.extend(keys);
    }
    cols
}

/// Column and coefficient for a term, honouring the top-degree substitution.
fn project(
    d: &MarkedDiagram,
    q: Quotient,
    opts: RelationOptions,
    index: &HashMap<CanonicalKey, usize>,
) -> Option<(usize, i64)> {
    let zeros = if q.decoration() == Decoration::Unmarked {
        0
    } else {
        d.zero_count()
    };
    if !q.admits(d.len(), zeros) {
        return None;
    }
    let (key, sign) = if opts.top_degree_plus_only && d.len() == q.n() {
        let minus = d
            .base
            .arrows()
            .iter()
            .filter(|a| a.sign == Sign::Minus)
            .count();
        (
            key_of(&all_plus(d), q.decoration()),
            if minus % 2 == 0 { 1 } else { -1 },
        )
    } else {
        (key_of(d, q.decoration()), 1)
    };
    let col = *index
        .get(&key)
        .unwrap_or_else(|| panic!("term {key} missing from {q}"));
    Some((col, sign))
}

fn all_plus(d: &MarkedDiagram) -> MarkedDiagram {
    let arrows = d
        .base
        .arrows()
        .iter()
        .map(|a| crate::diagram::Arrow::new(a.tail, a.head, Sign::Plus))
        .collect();
    MarkedDiagram {
        base: GaussDiagram::from_parts(d.ambient(), arrows),
        marks: d.marks.clone(),
    }
}

/// Largest context for each move: R1/R2 terms use one local arrow, R3
/// singletons cancel so its surviving terms use two.
fn context_budget(kind: MoveKind, n: usize) -> Option<usize> {
    match kind {
        MoveKind::R1 | MoveKind::R2 => n.checked_sub(1),
        MoveKind::R3 => n.checked_sub(2),
    }
}

pub fn generate_relation_matrix(
    n: usize,
    k: usize,
    ambient: Ambient,
    quotient: &str,
) -> Result<RelationMatrix> {
    relation_matrix(
        Quotient::new(quotient, n, k)?,
        ambient,
        RelationOptions::default(),
    )
}

pub fn relation_matrix(
    q: Quotient,
    ambient: Ambient,
    opts: RelationOptions,
) -> Result<RelationMatrix> {
    q.validate()?;
    if opts.reduced_on1 && !matches!(q, Quotient::O { k: 1, .. }) {
        return Err(Error::InvalidParameters(
            "the reduced presentation is for O(n,1)".into(),
        ));
    }
    let n = q.n();
    let columns = quotient_columns(q, ambient, opts);
    let index: HashMap<CanonicalKey, usize> = columns
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();
    let mode = match q {
        _ if opts.reduced_on1 => MarkMode::AllOnes,
        Quotient::Gpv { .. } => MarkMode::Unmarked,
        _ => MarkMode::ParityLabeled,
    };
    let kinds: Vec<MoveKind> = if opts.reduced_on1 {
        vec![MoveKind::R2, MoveKind::R3]
    } else {
        vec![MoveKind::R1, MoveKind::R2, MoveKind::R3]
    };
    let top = kinds.iter().filter_map(|&kd| context_budget(kd, n)).max();
    let ctxs: Vec<MarkedDiagram> = match top {
        Some(top) => (0..=top).flat_map(|m| contexts(m, ambient, mode)).collect(),
        None => Vec::new(),
    };
    let mut rows: Vec<(Vec<(usize, i64)>, RowOrigin)> = ctxs
        .par_iter()
        .filter(|ctx| match q {
            Quotient::O { k, .. } => ctx.zero_count() < k,
            Quotient::E { .. } => ctx.zero_count() == ctx.len(),
            Quotient::Gpv { .. } => true,
        })
        .flat_map_iter(|ctx| {
            let mut out = Vec::new();
            for &kind in &kinds {
                if context_budget(kind, n).map_or(true, |cap| ctx.len() > cap) {
                    continue;
                }
                for mv in local_moves(kind) {
                    let labels = mv.admissible_marks(mode);
                    for gaps in placements(ctx.len(), mv.lhs.len(), ambient) {
                        for marks in &labels {
                            let inst = mv.instantiate(ctx, &gaps, marks);
                            let mut row = Vec::new();
                            for (side, affected, sign) in [
                                (&inst.lhs, &inst.affected_lhs, 1),
                                (&inst.rhs, &inst.affected_rhs, -1),
                            ] {
                                let c = ctx.len();
                                let mut subset: Vec<usize> = (0..c).collect();
                                for bits in 1u32..1 << affected.len() {
                                    subset.truncate(c);
                                    subset.extend(
                                        affected
                                            .iter()
                                            .enumerate()
                                            .filter(|(i, _)| bits >> i & 1 == 1)
                                            .map(|(_, &a)| a),
                                    );
                                    let zeros = ctx.zero_count()
                                        + subset[c..]
                                            .iter()
                                            .filter(|&&a| side.marks[a] == 0)
                                            .count();
                                    let z = if q.decoration() == Decoration::Unmarked {
                                        0
                                    } else {
                                        zeros
                                    };
                                    if !q.admits(subset.len(), z) {
                                        continue;
                                    }
                                    if let Some((col, s)) =
                                        project(&side.subdiagram(&subset), q, opts, &index)
                                    {
                                        row.push((col, sign * s));
                                    }
                                }
                            }
                            if let Some(row) = normalize_row(row) {
                                out.push((
                                    row,
                                    RowOrigin {
                                        kind,
                                        lhs: inst.lhs.to_gauss_code(),
                                        rhs: inst.rhs.to_gauss_code(),
                                    },
                                ));
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    rows.par_sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| (&a.1.lhs, &a.1.rhs).cmp(&(&b.1.lhs, &b.1.rhs)))
    });
    rows.dedup_by(|a, b| a.0 == b.0);
    let mut matrix = SparseIntMatrix::new(columns.len());
    let mut provenance = Vec::with_capacity(rows.len());
    for (row, origin) in rows {
        matrix.push_row(row)?;
        provenance.push(origin);
    }
    Ok(RelationMatrix {
        quotient: q,
        ambient,
        matrix,
        columns,
        index,
        provenance,
        options: opts,
    })
}

/// Sorted, merged, primitive, leading entry positive; `None` when zero.
fn normalize_row(mut row: Vec<(usize, i64)>) -> Option<Vec<(usize, i64)>> {
    row.sort_unstable();
    let mut out: Vec<(usize, i64)> = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|e| e.1 != 0);
    let first = out.first()?.1;
    let g = out.iter().fold(0i64, |g, e| g.gcd(&e.1)) * first.signum();
    for e in &mut out {
        e.1 /= g;
    }
    Some(out)
}

pub fn reduced_on1_matrix(n: usize, ambient: Ambient) -> Result<RelationMatrix> {
    relation_matrix(
        Quotient::O { n, k: 1 },
        ambient,
        RelationOptions {
            reduced_on1: true,
            ..Default::default()
        },
    )
}

impl RelationMatrix {
    pub fn dimension(&self) -> usize {
        self.columns.len() - rank(&self.matrix)
    }

    /// Kernel vectors as formulas, with the top-degree substitution undone.
    pub fn formulas(&self) -> Result<Vec<Formula>> {
        kernel_basis(&self.matrix)
            .into_iter()
            .map(|v| {
                let ints = v.as_integers().expect("kernel vectors are integral");
                let mut sum = FormalSum::new(self.ambient, self.quotient.decoration());
                for (c, x) in ints.into_iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    if self.options.top_degree_plus_only {
                        let d = MarkedDiagram::parse(self.columns[c].as_str(), self.ambient)?;
                        if d.len() == self.quotient.n() {
                            for (variant, sign) in sign_variants(&d) {
                                sum.add(key_of(&variant, self.quotient.decoration()), &x * sign);
                            }
                            continue;
                        }
                    }
                    sum.add(self.columns[c].clone(), x);
                }
                Ok(Formula {
                    sum,
                    quotient: self.quotient,
                })
            })
            .collect()
    }
}

/// Every sign pattern of an all-plus diagram with coefficient `(−1)^{#minus}`;
/// patterns that coincide up to symmetry appear once.
fn sign_variants(d: &MarkedDiagram) -> Vec<(MarkedDiagram, i64)> {
    let mut seen = BTreeMap::new();
    for bits in 0u32..1 << d.len() {
        let arrows = d
            .base
            .arrows()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let s = if bits >> i & 1 == 1 {
                    Sign::Minus
                } else {
                    Sign::Plus
                };
                crate::diagram::Arrow::new(a.tail, a.head, s)
            })
            .collect();
        let v = MarkedDiagram {
            base: GaussDiagram::from_parts(d.ambient(), arrows),
            marks: d.marks.clone(),
        };
        let sign = if bits.count_ones() % 2 == 0 { 1 } else { -1 };
        seen.entry(v.canonical_key()).or_insert((v, sign));
    }
    seen.into_values().collect()
}

pub fn formula_basis(n: usize, k: usize, ambient: Ambient, quotient: &str) -> Result<Vec<Formula>> {
    generate_relation_matrix(n, k, ambient, quotient)?.formulas()
}

pub fn dimension(n: usize, k: usize, ambient: Ambient, quotient: &str) -> Result<usize> {
    Ok(generate_relation_matrix(n, k, ambient, quotient)?.dimension())
}

/// Whether every formula lies in the rational span of `basis`.
pub fn in_span(basis: &[Formula], formulas: &[Formula]) -> bool {
    let mut keys: BTreeMap<&CanonicalKey, usize> = BTreeMap::new();
    for f in basis.iter().chain(formulas) {
        for k in f.sum.terms.keys() {
            let next = keys.len();
            keys.entry(k).or_insert(next);
        }
    }
    let as_matrix = |fs: &[&Formula]| -> Option<SparseIntMatrix> {
        let mut m = SparseIntMatrix::new(keys.len());
        for f in fs {
            let row = f
                .sum
                .terms
                .iter()
                .map(|(k, v)| v.to_i64().map(|v| (keys[k], v)))
                .collect::<Option<Vec<_>>>()?;
            m.push_row(row).ok()?;
        }
        Some(m)
    };
    let b: Vec<&Formula> = basis.iter().collect();
    let all: Vec<&Formula> = basis.iter().chain(formulas).collect();
    match (as_matrix(&b), as_matrix(&all)) {
        (Some(mb), Some(ma)) => rank(&mb) == rank(&ma),
        _ => false,
    }
}

/// Rank of a family of formulas viewed as coefficient vectors.
pub fn formula_rank(formulas: &[Formula]) -> usize {
    let mut keys: BTreeMap<&CanonicalKey, usize> = BTreeMap::new();
    for f in formulas {
        for k in f.sum.terms.keys() {
            let next = keys.len();
            keys.entry(k).or_insert(next);
        }
    }
    let mut m = SparseIntMatrix::new(keys.len());
    for f in formulas {
        let row = f
            .sum
            .terms
            .iter()
            .map(|(k, v)| (keys[k], v.to_i64().expect("small coefficients")))
            .collect();
        m.push_row(row).expect("columns in range");
    }
    rank(&m)
}
