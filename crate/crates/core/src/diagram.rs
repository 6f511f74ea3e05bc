//! Signed, directed chord diagrams on an oriented line or circle.
//!
//! Endpoints are numbered `0..2m` along the Wilson line (or loop). An arrow
//! points from its tail (overpass) to its head (underpass). The textual code
//! writes one token per endpoint: `O<id><sign>` for a tail, `U<id><sign>` for
//! a head, with an optional `:0`/`:1` mark suffix (default 1).

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    Line,
    Loop,
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ambient::Line => "line",
            Ambient::Loop => "loop",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrow {
    pub tail: usize,
    pub head: usize,
    pub sign: Sign,
}

impl Arrow {
    pub fn new(tail: usize, head: usize, sign: Sign) -> Self {
        Arrow { tail, head, sign }
    }

    pub fn lo(&self) -> usize {
        self.tail.min(self.head)
    }

    pub fn hi(&self) -> usize {
        self.tail.max(self.head)
    }

    /// True when the arrow points in the direction of the Wilson line.
    pub fn points_right(&self) -> bool {
        self.tail < self.head
    }

    /// True when `pos` lies strictly between the two endpoints.
    pub fn spans(&self, pos: usize) -> bool {
        self.lo() < pos && pos < self.hi()
    }

    pub fn reversed(&self) -> Arrow {
        Arrow {
            tail: self.head,
            head: self.tail,
            sign: self.sign,
        }
    }
}

/// The four arrow classes counted by the count polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArrowClass {
    RightPlus,
    RightMinus,
    LeftPlus,
    LeftMinus,
}

impl ArrowClass {
    pub fn of(arrow: &Arrow) -> Self {
        match (arrow.points_right(), arrow.sign) {
            (true, Sign::Plus) => ArrowClass::RightPlus,
            (true, Sign::Minus) => ArrowClass::RightMinus,
            (false, Sign::Plus) => ArrowClass::LeftPlus,
            (false, Sign::Minus) => ArrowClass::LeftMinus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussDiagram {
    ambient: Ambient,
    arrows: Vec<Arrow>,
}

impl GaussDiagram {
    pub fn new(ambient: Ambient, arrows: Vec<Arrow>) -> Result<Self> {
        let n = 2 * arrows.len();
        let mut used = vec![false; n];
        for (i, a) in arrows.iter().enumerate() {
            if a.tail == a.head {
                return Err(Error::InvalidDiagram(format!(
                    "arrow {i} has tail and head at the same endpoint"
                )));
            }
            for p in [a.tail, a.head] {
                if p >= n {
                    return Err(Error::InvalidDiagram(format!(
                        "endpoint {p} of arrow {i} out of range 0..{n}"
                    )));
                }
                if std::mem::replace(&mut used[p], true) {
                    return Err(Error::InvalidDiagram(format!("endpoint {p} used twice")));
                }
            }
        }
        Ok(GaussDiagram { ambient, arrows })
    }

    /// Caller guarantees the endpoint invariants.
    pub(crate) fn from_parts(ambient: Ambient, arrows: Vec<Arrow>) -> Self {
        debug_assert!(GaussDiagram::new(ambient, arrows.clone()).is_ok());
        GaussDiagram { ambient, arrows }
    }

    pub fn empty(ambient: Ambient) -> Self {
        GaussDiagram {
            ambient,
            arrows: Vec::new(),
        }
    }

    pub fn parse(text: &str, ambient: Ambient) -> Result<Self> {
        Ok(MarkedDiagram::parse(text, ambient)?.base)
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow(&self, x: usize) -> Result<&Arrow> {
        self.arrows.get(x).ok_or(Error::UnknownArrow {
            arrow: x,
            count: self.arrows.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    /// `(arrow, is_tail)` for every endpoint position.
    pub fn endpoints(&self) -> Vec<(usize, bool)> {
        let mut ends = vec![(0, false); 2 * self.arrows.len()];
        for (i, a) in self.arrows.iter().enumerate() {
            ends[a.tail] = (i, true);
            ends[a.head] = (i, false);
        }
        ends
    }

    pub fn with_ambient(&self, ambient: Ambient) -> GaussDiagram {
        GaussDiagram {
            ambient,
            arrows: self.arrows.clone(),
        }
    }

    pub fn with_marks(self, marks: Vec<u8>) -> Result<MarkedDiagram> {
        MarkedDiagram::new(self, marks)
    }

    pub fn all_ones(self) -> MarkedDiagram {
        let marks = vec![1; self.arrows.len()];
        MarkedDiagram { base: self, marks }
    }

    pub fn linked(&self, a: usize, b: usize) -> Result<bool> {
        self.arrow(a)?;
        self.arrow(b)?;
        if a == b {
            return Err(Error::SameArrow(a));
        }
        Ok(self.linked_unchecked(a, b))
    }

    /// Chord crossing does not depend on where a loop is cut, so the same test
    /// serves both ambients.
    pub(crate) fn linked_unchecked(&self, a: usize, b: usize) -> bool {
        let (x, y) = (&self.arrows[a], &self.arrows[b]);
        x.spans(y.lo()) != x.spans(y.hi())
    }

    pub fn intersection_graph(&self) -> IntersectionGraph {
        let m = self.arrows.len();
        let mut adjacency = vec![Vec::new(); m];
        for a in 0..m {
            for b in a + 1..m {
                if self.linked_unchecked(a, b) {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
        }
        IntersectionGraph { adjacency }
    }

    pub fn is_classical_candidate(&self) -> bool {
        self.intersection_graph()
            .degrees()
            .into_iter()
            .all(|d| d % 2 == 0)
    }

    /// True when the endpoints of arrow `x` are neighbours (cyclically on a loop).
    pub fn is_isolated(&self, x: usize) -> bool {
        let a = &self.arrows[x];
        a.hi() - a.lo() == 1
            || (self.ambient == Ambient::Loop && a.lo() == 0 && a.hi() == 2 * self.len() - 1)
    }

    /// Keeps the listed arrows (in the given order) and re-compacts endpoints.
    pub fn subdiagram(&self, subset: &[usize]) -> GaussDiagram {
        let mut positions: Vec<usize> = subset
            .iter()
            .flat_map(|&i| [self.arrows[i].tail, self.arrows[i].head])
            .collect();
        positions.sort_unstable();
        let rank = |p: usize| positions.binary_search(&p).expect("endpoint of subset");
        let arrows = subset
            .iter()
            .map(|&i| {
                let a = &self.arrows[i];
                Arrow::new(rank(a.tail), rank(a.head), a.sign)
            })
            .collect();
        GaussDiagram {
            ambient: self.ambient,
            arrows,
        }
    }

    pub fn to_gauss_code(&self) -> String {
        let mut out = String::new();
        write_code(&self.endpoints(), &self.arrows, None, 0, &mut out);
        out
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        canonical(&self.endpoints(), &self.arrows, None, self.ambient)
    }
}

impl fmt::Display for GaussDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_gauss_code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionGraph {
    adjacency: Vec<Vec<usize>>,
}

impl IntersectionGraph {
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }
}

/// A diagram with a 0/1 mark on every arrow.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarkedDiagram {
    pub base: GaussDiagram,
    pub marks: Vec<u8>,
}

impl MarkedDiagram {
    pub fn new(base: GaussDiagram, marks: Vec<u8>) -> Result<Self> {
        if marks.len() != base.len() {
            return Err(Error::InvalidDiagram(format!(
                "{} marks for {} arrows",
                marks.len(),
                base.len()
            )));
        }
        if marks.iter().any(|&m| m > 1) {
            return Err(Error::InvalidDiagram("marks must be 0 or 1".into()));
        }
        Ok(MarkedDiagram { base, marks })
    }

    pub fn empty(ambient: Ambient) -> Self {
        MarkedDiagram {
            base: GaussDiagram::empty(ambient),
            marks: Vec::new(),
        }
    }

    pub fn parse(text: &str, ambient: Ambient) -> Result<Self> {
        parse_gauss_code(text, ambient)
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn ambient(&self) -> Ambient {
        self.base.ambient
    }

    pub fn zero_count(&self) -> usize {
        self.marks.iter().filter(|&&m| m == 0).count()
    }

    pub fn subdiagram(&self, subset: &[usize]) -> MarkedDiagram {
        MarkedDiagram {
            base: self.base.subdiagram(subset),
            marks: subset.iter().map(|&i| self.marks[i]).collect(),
        }
    }

    /// Every arrow subset with `min_size ≤ |S| ≤ max_size`, by size then lexicographically.
    pub fn subdiagrams(
        &self,
        min_size: usize,
        max_size: usize,
    ) -> impl Iterator<Item = MarkedDiagram> + '_ {
        let m = self.len();
        (min_size..=max_size.min(m))
            .flat_map(move |k| (0..m).combinations(k))
            .map(move |s| self.subdiagram(&s))
    }

    pub fn to_gauss_code(&self) -> String {
        let mut out = String::new();
        write_code(
            &self.base.endpoints(),
            &self.base.arrows,
            Some(&self.marks),
            0,
            &mut out,
        );
        out
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        canonical(
            &self.base.endpoints(),
            &self.base.arrows,
            Some(&self.marks),
            self.base.ambient,
        )
    }

    pub fn export(&self) -> DiagramExport {
        DiagramExport {
            ambient: self.ambient(),
            tokens: self
                .to_gauss_code()
                .split_whitespace()
                .map(str::to_owned)
                .collect(),
        }
    }
}

impl fmt::Display for MarkedDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_gauss_code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramExport {
    pub ambient: Ambient,
    pub tokens: Vec<String>,
}

/// Renumbered Gauss code; minimal over rotations for loops.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalKey(pub String);

impl CanonicalKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn write_code(
    ends: &[(usize, bool)],
    arrows: &[Arrow],
    marks: Option<&[u8]>,
    start: usize,
    out: &mut String,
) {
    let n = ends.len();
    let mut ids = vec![0u32; arrows.len()];
    let mut next = 0;
    for step in 0..n {
        let (a, is_tail) = ends[(start + step) % n];
        if ids[a] == 0 {
            next += 1;
            ids[a] = next;
        }
        if step > 0 {
            out.push(' ');
        }
        out.push(if is_tail { 'O' } else { 'U' });
        write!(out, "{}", ids[a]).expect("write to String");
        out.push(arrows[a].sign.symbol());
        if marks.is_some_and(|m| m[a] == 0) {
            out.push_str(":0");
        }
    }
}

fn canonical(
    ends: &[(usize, bool)],
    arrows: &[Arrow],
    marks: Option<&[u8]>,
    ambient: Ambient,
) -> CanonicalKey {
    let mut best = String::new();
    write_code(ends, arrows, marks, 0, &mut best);
    if ambient == Ambient::Loop {
        let mut candidate = String::with_capacity(best.len());
        for start in 1..ends.len() {
            candidate.clear();
            write_code(ends, arrows, marks, start, &mut candidate);
            if candidate < best {
                std::mem::swap(&mut candidate, &mut best);
            }
        }
    }
    CanonicalKey(best)
}

pub fn parse_gauss_code(text: &str, ambient: Ambient) -> Result<MarkedDiagram> {
    struct Pending {
        arrow: usize,
        kind: char,
    }
    let mut tokens = Vec::new();
    for (position, token) in text.split_whitespace().enumerate() {
        tokens.push(parse_token(position, token)?);
    }
    let mut seen: HashMap<&str, Pending> = HashMap::new();
    let mut arrows: Vec<(Option<usize>, Option<usize>, Sign, u8)> = Vec::new();
    for (position, t) in tokens.iter().enumerate() {
        let slot = match seen.get(t.id) {
            None => {
                seen.insert(
                    t.id,
                    Pending {
                        arrow: arrows.len(),
                        kind: t.kind,
                    },
                );
                arrows.push((None, None, t.sign, t.mark));
                arrows.len() - 1
            }
            Some(first) => {
                let id = t.id.to_owned();
                if first.kind == t.kind
                    || arrows[first.arrow].0.and(arrows[first.arrow].1).is_some()
                {
                    return Err(ParseError::DuplicateEndpoint {
                        position,
                        id,
                        kind: t.kind,
                    }
                    .into());
                }
                let (_, _, sign, mark) = arrows[first.arrow];
                if sign != t.sign {
                    return Err(ParseError::SignMismatch { position, id }.into());
                }
                if mark != t.mark {
                    return Err(ParseError::MarkMismatch { position, id }.into());
                }
                first.arrow
            }
        };
        let entry = &mut arrows[slot];
        if t.kind == 'O' {
            entry.0 = Some(position);
        } else {
            entry.1 = Some(position);
        }
    }
    let mut out = Vec::with_capacity(arrows.len());
    let mut marks = Vec::with_capacity(arrows.len());
    for (tail, head, sign, mark) in arrows {
        match (tail, head) {
            (Some(tail), Some(head)) => {
                out.push(Arrow::new(tail, head, sign));
                marks.push(mark);
            }
            (Some(p), None) | (None, Some(p)) => {
                return Err(ParseError::UnpairedEndpoint {
                    position: p,
                    id: tokens[p].id.to_owned(),
                }
                .into());
            }
            (None, None) => unreachable!("every arrow entry has an endpoint"),
        }
    }
    Ok(MarkedDiagram {
        base: GaussDiagram::from_parts(ambient, out),
        marks,
    })
}

struct Token<'a> {
    kind: char,
    id: &'a str,
    sign: Sign,
    mark: u8,
}

fn parse_token(position: usize, token: &str) -> Result<Token<'_>, ParseError> {
    let malformed = || ParseError::MalformedToken {
        position,
        token: token.to_owned(),
    };
    let (body, mark) = match token.split_once(':') {
        None => (token, 1),
        Some((body, "0")) => (body, 0),
        Some((body, "1")) => (body, 1),
        Some(_) => return Err(malformed()),
    };
    let kind = match body.as_bytes().first() {
        Some(b'O') => 'O',
        Some(b'U') => 'U',
        _ => return Err(malformed()),
    };
    let sign = match body.as_bytes().last() {
        Some(b'+') => Sign::Plus,
        Some(b'-') => Sign::Minus,
        _ => return Err(malformed()),
    };
    if body.len() < 3 {
        return Err(malformed());
    }
    let id = &body[1..body.len() - 1];
    if !id.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    Ok(Token {
        kind,
        id,
        sign,
        mark,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignChoice {
    All,
    PlusOnly,
}

/// `Unmarked` yields all-ones marks whose keys coincide with the unmarked keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkChoice {
    All,
    OnesOnly,
    Unmarked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub signs: SignChoice,
    pub marks: MarkChoice,
    pub forbid_isolated_zero: bool,
}

impl EnumerationOptions {
    pub fn new(signs: SignChoice, marks: MarkChoice) -> Self {
        EnumerationOptions {
            signs,
            marks,
            forbid_isolated_zero: false,
        }
    }
}

/// All perfect matchings of `0..2m`, each as pairs `(lo, hi)` sorted by `lo`.
pub fn perfect_matchings(m: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        free: &mut Vec<usize>,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let first = free.remove(0);
        for j in 0..free.len() {
            let partner = free.remove(j);
            cur.push((first, partner));
            rec(free, cur, out);
            cur.pop();
            free.insert(j, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    rec(&mut (0..2 * m).collect(), &mut Vec::new(), &mut out);
    out
}

/// One representative per canonical key, sorted by key.
pub fn enumerate_diagrams(
    m: usize,
    ambient: Ambient,
    opts: EnumerationOptions,
) -> Vec<MarkedDiagram> {
    let sign_masks: u32 = match opts.signs {
        SignChoice::All => 1 << m,
        SignChoice::PlusOnly => 1,
    };
    let mark_masks: u32 = match opts.marks {
        MarkChoice::All => 1 << m,
        MarkChoice::OnesOnly | MarkChoice::Unmarked => 1,
    };
    let all_ones = (1u32 << m) - 1;
    let found: Vec<(CanonicalKey, MarkedDiagram)> = perfect_matchings(m)
        .into_par_iter()
        .flat_map_iter(|matching| {
            let mut local = BTreeMap::new();
            for dirs in 0..1u32 << m {
                for signs in 0..sign_masks {
                    let arrows: Vec<Arrow> = matching
                        .iter()
                        .enumerate()
                        .map(|(i, &(lo, hi))| {
                            let sign = if signs >> i & 1 == 1 {
                                Sign::Minus
                            } else {
                                Sign::Plus
                            };
                            if dirs >> i & 1 == 0 {
                                Arrow::new(lo, hi, sign)
                            } else {
                                Arrow::new(hi, lo, sign)
                            }
                        })
                        .collect();
                    let base = GaussDiagram::from_parts(ambient, arrows);
                    for mk in 0..mark_masks {
                        let bits = if opts.marks == MarkChoice::All {
                            mk
                        } else {
                            all_ones
                        };
                        let marks: Vec<u8> = (0..m).map(|i| (bits >> i & 1) as u8).collect();
                        if opts.forbid_isolated_zero
                            && (0..m).any(|i| marks[i] == 0 && base.is_isolated(i))
                        {
                            continue;
                        }
                        let d = MarkedDiagram {
                            base: base.clone(),
                            marks,
                        };
                        local.entry(d.canonical_key()).or_insert(d);
                    }
                }
            }
            local.into_iter()
        })
        .collect();
    let mut unique: BTreeMap<CanonicalKey, MarkedDiagram> = BTreeMap::new();
    for (k, d) in found {
        unique.entry(k).or_insert(d);
    }
    unique.into_values().collect()
}

pub fn enumerate_unmarked(m: usize, ambient: Ambient, signs: SignChoice) -> Vec<GaussDiagram> {
    enumerate_diagrams(
        m,
        ambient,
        EnumerationOptions::new(signs, MarkChoice::Unmarked),
    )
    .into_iter()
    .map(|d| d.base)
    .collect()
}

/// `O1+ O2+ … Ok+ U1+ … Uk+`: k pairwise-linked right-pointing positive arrows.
pub fn fan(k: usize, ambient: Ambient) -> GaussDiagram {
    let arrows = (0..k).map(|i| Arrow::new(i, k + i, Sign::Plus)).collect();
    GaussDiagram::from_parts(ambient, arrows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(code: &str) -> MarkedDiagram {
        MarkedDiagram::parse(code, Ambient::Line).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert!(line("").is_empty());
        let d = line("O1+ U1+");
        assert_eq!(d.base.arrows(), &[Arrow::new(0, 1, Sign::Plus)]);
        let d = line("O1+ O2+ U1+ U2+");
        assert_eq!(
            d.base.arrows(),
            &[Arrow::new(0, 2, Sign::Plus), Arrow::new(1, 3, Sign::Plus)]
        );
        assert!(d.base.linked(0, 1).unwrap());
    }

    #[test]
    fn parse_errors_report_positions() {
        let err = |s| match MarkedDiagram::parse(s, Ambient::Line) {
            Err(Error::Parse(e)) => e,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(err("O1+ X1+").position(), 1);
        assert!(matches!(
            err("O1+ O1+"),
            ParseError::DuplicateEndpoint { position: 1, .. }
        ));
        assert!(matches!(
            err("O1+ U1+ U1+"),
            ParseError::DuplicateEndpoint { position: 2, .. }
        ));
        assert!(matches!(
            err("O1+ U1-"),
            ParseError::SignMismatch { position: 1, .. }
        ));
        assert!(matches!(
            err("O1+:0 U1+"),
            ParseError::MarkMismatch { position: 1, .. }
        ));
        assert!(matches!(
            err("O1+ O2+ U1+"),
            ParseError::UnpairedEndpoint { position: 1, .. }
        ));
        assert!(matches!(
            err("O1+:2 U1+"),
            ParseError::MalformedToken { position: 0, .. }
        ));
        assert!(matches!(
            err("O+ U+"),
            ParseError::MalformedToken { position: 0, .. }
        ));
        assert!(matches!(err("O1 U1"), ParseError::MalformedToken { .. }));
    }

    #[test]
    fn serialization_renumbers() {
        assert_eq!(line("").to_gauss_code(), "");
        assert_eq!(line("O1+ U1+").to_gauss_code(), "O1+ U1+");
        assert_eq!(line("U7- O7-").to_gauss_code(), "U1- O1-");
        assert_eq!(
            line("O5+:0 O2- U5+:0 U2-").to_gauss_code(),
            "O1+:0 O2- U1+:0 U2-"
        );
        assert_eq!(line("O1+:1 U1+:1").to_gauss_code(), "O1+ U1+");
    }

    #[test]
    fn canonical_key_examples() {
        assert_eq!(
            line("O1+ U1+").canonical_key(),
            line("O9+ U9+").canonical_key()
        );
        let a = MarkedDiagram::parse("O1+ U2+ U1+ O2+", Ambient::Loop).unwrap();
        let b = MarkedDiagram::parse("U2+ U1+ O2+ O1+", Ambient::Loop).unwrap();
        assert_eq!(a.canonical_key(), b.canonical_key());
        assert_ne!(
            line("O1+ U1+ O2+ U2+").canonical_key(),
            line("O1+ O2+ U1+ U2+").canonical_key()
        );
        // Rotation is not an equivalence on the line.
        let a = line("O1+ U2+ U1+ O2+");
        let b = line("U2+ U1+ O2+ O1+");
        assert_ne!(a.canonical_key(), b.canonical_key());
        // Marks are part of the key.
        assert_ne!(
            line("O1+:0 U1+:0").canonical_key(),
            line("O1+ U1+").canonical_key()
        );
    }

    #[test]
    fn linked_examples() {
        let d = line("O1+ O2+ U1+ U2+").base;
        assert!(d.linked(0, 1).unwrap() && d.linked(1, 0).unwrap());
        assert!(!line("O1+ U1+ O2+ U2+").base.linked(0, 1).unwrap());
        assert!(!line("O1+ O2+ U2+ U1+").base.linked(0, 1).unwrap());
        assert_eq!(d.linked(0, 0), Err(Error::SameArrow(0)));
        assert!(matches!(d.linked(0, 2), Err(Error::UnknownArrow { .. })));
    }

    #[test]
    fn intersection_graph_examples() {
        let g = line("O1+ U1+").base.intersection_graph();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));
        let g = line("O1+ O2+ U1+ U2+").base.intersection_graph();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        for k in 1..7 {
            let g = fan(k, Ambient::Line).intersection_graph();
            assert_eq!(g.edge_count(), k * (k - 1) / 2);
            assert!(g.degrees().iter().all(|&d| d == k - 1));
        }
    }

    #[test]
    fn classical_candidate_examples() {
        assert!(GaussDiagram::empty(Ambient::Line).is_classical_candidate());
        assert!(!line("O1+ O2+ U1+ U2+").base.is_classical_candidate());
        assert!(line("O1+ O2+ O3+ U1+ U2+ U3+")
            .base
            .is_classical_candidate());
    }

    #[test]
    fn subdiagram_counts() {
        assert_eq!(
            MarkedDiagram::empty(Ambient::Line)
                .subdiagrams(0, usize::MAX)
                .count(),
            1
        );
        let one = line("O1+ U1+");
        let subs: Vec<_> = one.subdiagrams(0, usize::MAX).collect();
        assert_eq!(subs.len(), 2);
        assert!(subs[0].is_empty() && subs[1] == one);
        let d = line("O1+ O2- U1+ O3+:0 U2- U3+:0");
        assert_eq!(d.subdiagrams(0, 3).count(), 8);
        assert_eq!(d.subdiagrams(1, 2).count(), 6);
        let sub = d.subdiagram(&[0, 2]);
        assert_eq!(sub.to_gauss_code(), "O1+ U1+ O2+:0 U2+:0");
    }

    #[test]
    fn enumeration_counts() {
        let ones = |s| EnumerationOptions::new(s, MarkChoice::OnesOnly);
        assert_eq!(
            enumerate_diagrams(0, Ambient::Line, ones(SignChoice::All)).len(),
            1
        );
        assert_eq!(
            enumerate_diagrams(1, Ambient::Line, ones(SignChoice::PlusOnly)).len(),
            2
        );
        assert_eq!(
            enumerate_diagrams(1, Ambient::Loop, ones(SignChoice::PlusOnly)).len(),
            1
        );
        assert_eq!(
            enumerate_diagrams(2, Ambient::Line, ones(SignChoice::All)).len(),
            48
        );
        let all = EnumerationOptions::new(SignChoice::All, MarkChoice::All);
        assert_eq!(enumerate_diagrams(1, Ambient::Line, all).len(), 8);
        let mut opts = all;
        opts.forbid_isolated_zero = true;
        assert_eq!(enumerate_diagrams(1, Ambient::Line, opts).len(), 4);
    }

    /// Independent oracle: brute force over all endpoint words with a set for dedup.
    #[test]
    fn enumeration_matches_brute_force() {
        for ambient in [Ambient::Line, Ambient::Loop] {
            for m in 0..=3 {
                let mut keys = std::collections::BTreeSet::new();
                let ends = 2 * m;
                // assign each endpoint a (arrow, role) by permuting the 2m labels
                for perm in (0..ends).permutations(ends) {
                    for signs in 0..1u32 << m {
                        let arrows: Vec<Arrow> = (0..m)
                            .map(|i| {
                                let s = if signs >> i & 1 == 1 {
                                    Sign::Minus
                                } else {
                                    Sign::Plus
                                };
                                Arrow::new(perm[2 * i], perm[2 * i + 1], s)
                            })
                            .collect();
                        keys.insert(GaussDiagram::new(ambient, arrows).unwrap().canonical_key());
                    }
                }
                let got = enumerate_unmarked(m, ambient, SignChoice::All);
                assert_eq!(got.len(), keys.len(), "{ambient} m={m}");
                let got_keys: std::collections::BTreeSet<_> =
                    got.iter().map(GaussDiagram::canonical_key).collect();
                assert_eq!(got_keys, keys);
            }
        }
    }

    #[test]
    fn loop_key_rotation_invariant() {
        for d in enumerate_unmarked(3, Ambient::Loop, SignChoice::All) {
            let n = 2 * d.len();
            let key = d.canonical_key();
            for r in 0..n {
                let arrows = d
                    .arrows()
                    .iter()
                    .map(|a| Arrow::new((a.tail + r) % n, (a.head + r) % n, a.sign))
                    .collect();
                assert_eq!(
                    GaussDiagram::new(Ambient::Loop, arrows)
                        .unwrap()
                        .canonical_key(),
                    key
                );
            }
        }
    }

    #[test]
    fn invalid_diagrams_rejected() {
        assert!(GaussDiagram::new(Ambient::Line, vec![Arrow::new(0, 0, Sign::Plus)]).is_err());
        assert!(GaussDiagram::new(Ambient::Line, vec![Arrow::new(0, 2, Sign::Plus)]).is_err());
        let d = GaussDiagram::new(Ambient::Line, vec![Arrow::new(0, 1, Sign::Plus)]).unwrap();
        assert!(d.with_marks(vec![2]).is_err());
    }
}
