//! Reidemeister moves on Gauss diagrams, plus switch/virtualization surgery,
//! the rotation action and closure.
//!
//! A move is described by a *local picture*: a list of segments, each a short
//! run of consecutive endpoints, together with the signs of the local arrows.
//! Instances arise by dropping the segments into gaps of a context diagram.
//! R1 and R2 pictures delete to nothing; the two sides of an R3 picture have
//! the same three segments with each segment's two endpoints transposed.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::OnceLock;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::{
    enumerate_diagrams, Ambient, Arrow, EnumerationOptions, GaussDiagram, MarkChoice,
    MarkedDiagram, Sign, SignChoice,
};
use crate::error::{Error, Result};
use crate::parity::zero_index_check;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    R1,
    R2,
    R3,
}

impl MoveKind {
    /// Number of arrows on the larger side of the move.
    pub fn size(self) -> usize {
        match self {
            MoveKind::R1 => 1,
            MoveKind::R2 => 2,
            MoveKind::R3 => 3,
        }
    }
}

/// One endpoint inside a local picture: `(local arrow, is_tail)`.
pub type Event = (usize, bool);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalMove {
    pub kind: MoveKind,
    pub signs: Vec<Sign>,
    pub lhs: Vec<Vec<Event>>,
    /// Empty for R1/R2: the right-hand side is the bare context.
    pub rhs: Vec<Vec<Event>>,
}

impl LocalMove {
    pub fn arrow_count(&self) -> usize {
        self.signs.len()
    }

    /// Mark labelings of the local arrows allowed by the parity axioms.
    pub fn admissible_marks(&self, mode: MarkMode) -> Vec<Vec<u8>> {
        match (self.kind, mode) {
            (MoveKind::R1, MarkMode::Unmarked) => vec![vec![1]],
            (MoveKind::R1, _) => vec![vec![0]],
            (MoveKind::R2, MarkMode::Unmarked | MarkMode::AllOnes) => vec![vec![1, 1]],
            (MoveKind::R2, MarkMode::ParityLabeled) => vec![vec![0, 0], vec![1, 1]],
            (MoveKind::R3, MarkMode::Unmarked) => vec![vec![1, 1, 1]],
            (MoveKind::R3, mode) => {
                let mut out = vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]];
                if mode == MarkMode::ParityLabeled {
                    out.insert(0, vec![0, 0, 0]);
                }
                out
            }
        }
    }

    /// Drops the segments into the given (non-decreasing) gaps of `context`.
    pub fn instantiate(
        &self,
        context: &MarkedDiagram,
        gaps: &[usize],
        marks: &[u8],
    ) -> MoveInstance {
        let c = context.len();
        let lhs = insert_segments(context, &self.lhs, &self.signs, marks, gaps);
        let rhs = if self.rhs.is_empty() {
            context.clone()
        } else {
            insert_segments(context, &self.rhs, &self.signs, marks, gaps)
        };
        let local: Vec<usize> = (c..c + self.arrow_count()).collect();
        MoveInstance {
            kind: self.kind,
            lhs,
            rhs,
            context: (0..c).map(|i| (i, i)).collect(),
            affected_rhs: if self.rhs.is_empty() {
                Vec::new()
            } else {
                local.clone()
            },
            affected_lhs: local,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkMode {
    Unmarked,
    ParityLabeled,
    AllOnes,
}

/// A move between two diagrams. Context arrows are paired by `context`;
/// for R3, `affected_lhs[i]` corresponds to `affected_rhs[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoveInstance {
    pub kind: MoveKind,
    #[serde(serialize_with = "serialize_marked")]
    pub lhs: MarkedDiagram,
    #[serde(serialize_with = "serialize_marked")]
    pub rhs: MarkedDiagram,
    pub context: Vec<(usize, usize)>,
    pub affected_lhs: Vec<usize>,
    pub affected_rhs: Vec<usize>,
}

fn serialize_marked<S: serde::Serializer>(
    d: &MarkedDiagram,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&d.to_gauss_code())
}

impl MoveInstance {
    pub fn reversed(&self) -> MoveInstance {
        MoveInstance {
            kind: self.kind,
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            context: self.context.iter().map(|&(a, b)| (b, a)).collect(),
            affected_lhs: self.affected_rhs.clone(),
            affected_rhs: self.affected_lhs.clone(),
        }
    }

    /// Both sides agree exactly on the context arrows, and the bookkeeping
    /// covers every arrow once.
    pub fn is_consistent(&self) -> bool {
        let (l, r): (Vec<usize>, Vec<usize>) = self.context.iter().copied().unzip();
        let sizes_ok = match self.kind {
            MoveKind::R1 | MoveKind::R2 => {
                let k = self.kind.size();
                (self.affected_lhs.len(), self.affected_rhs.len()) == (k, 0)
                    || (self.affected_lhs.len(), self.affected_rhs.len()) == (0, k)
            }
            MoveKind::R3 => self.affected_lhs.len() == 3 && self.affected_rhs.len() == 3,
        };
        let covers = |side: &[usize], ctx: &[usize], total: usize| {
            let all: BTreeSet<usize> = side.iter().chain(ctx).copied().collect();
            all.len() == total && side.len() + ctx.len() == total
        };
        sizes_ok
            && covers(&self.affected_lhs, &l, self.lhs.len())
            && covers(&self.affected_rhs, &r, self.rhs.len())
            && self.lhs.subdiagram(&l) == self.rhs.subdiagram(&r)
    }
}

fn insert_segments(
    context: &MarkedDiagram,
    segments: &[Vec<Event>],
    signs: &[Sign],
    marks: &[u8],
    gaps: &[usize],
) -> MarkedDiagram {
    let c = context.len();
    let ends = context.base.endpoints();
    let mut ctx_pos = vec![[0usize; 2]; c];
    let mut loc_pos = vec![[0usize; 2]; signs.len()];
    let mut pos = 0;
    let mut si = 0;
    for g in 0..=2 * c {
        while si < segments.len() && gaps[si] == g {
            for &(a, tail) in &segments[si] {
                loc_pos[a][usize::from(!tail)] = pos;
                pos += 1;
            }
            si += 1;
        }
        if g < 2 * c {
            let (a, tail) = ends[g];
            ctx_pos[a][usize::from(!tail)] = pos;
            pos += 1;
        }
    }
    debug_assert_eq!(si, segments.len(), "gaps must be non-decreasing and ≤ 2c");
    let arrows = context
        .base
        .arrows()
        .iter()
        .zip(&ctx_pos)
        .map(|(a, p)| Arrow::new(p[0], p[1], a.sign))
        .chain(
            loc_pos
                .iter()
                .zip(signs)
                .map(|(p, &s)| Arrow::new(p[0], p[1], s)),
        )
        .collect();
    MarkedDiagram {
        base: GaussDiagram::from_parts(context.ambient(), arrows),
        marks: context.marks.iter().chain(marks).copied().collect(),
    }
}

/// Non-decreasing gap sequences for `segments` segments in a context with
/// `context_arrows` arrows. On a loop the gap after the last endpoint is the
/// gap before the first, so it is skipped.
pub fn placements(context_arrows: usize, segments: usize, ambient: Ambient) -> Vec<Vec<usize>> {
    let gaps = match ambient {
        Ambient::Line => 2 * context_arrows + 1,
        Ambient::Loop => (2 * context_arrows).max(1),
    };
    if segments == 0 {
        return vec![Vec::new()];
    }
    (0..gaps).combinations_with_replacement(segments).collect()
}

pub fn r1_moves() -> &'static [LocalMove] {
    static TABLE: OnceLock<Vec<LocalMove>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::new();
        for tail_first in [true, false] {
            for sign in [Sign::Plus, Sign::Minus] {
                out.push(LocalMove {
                    kind: MoveKind::R1,
                    signs: vec![sign],
                    lhs: vec![vec![(0, tail_first), (0, !tail_first)]],
                    rhs: Vec::new(),
                });
            }
        }
        out
    })
}

/// Tails of both arrows on one strand, heads on the other; parallel or
/// antiparallel, either strand first, opposite signs.
pub fn r2_moves() -> &'static [LocalMove] {
    static TABLE: OnceLock<Vec<LocalMove>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::new();
        for tails_first in [true, false] {
            for parallel in [true, false] {
                for signs in [[Sign::Plus, Sign::Minus], [Sign::Minus, Sign::Plus]] {
                    let tails = vec![(0, true), (1, true)];
                    let heads = if parallel {
                        vec![(0, false), (1, false)]
                    } else {
                        vec![(1, false), (0, false)]
                    };
                    let lhs = if tails_first {
                        vec![tails, heads]
                    } else {
                        vec![heads, tails]
                    };
                    out.push(LocalMove {
                        kind: MoveKind::R2,
                        signs: signs.to_vec(),
                        lhs,
                        rhs: Vec::new(),
                    });
                }
            }
        }
        out
    })
}

/// R3 pictures read off the planar move.
///
/// Three straight strands: `y = c` (horizontal), `y = x + 1` and `y = 1 - x`.
/// The horizontal strand moves from `c = 0` (below the triple point `(0, 1)`)
/// to `c = 2` (above it). Every orientation, height order and order of
/// traversal of the three strands is tried; each crossing becomes an arrow
/// from the upper to the lower strand, signed by the cross product of the
/// strand directions.
pub fn r3_moves() -> &'static [LocalMove] {
    static TABLE: OnceLock<Vec<LocalMove>> = OnceLock::new();
    TABLE.get_or_init(|| {
        const BASE: [(i64, i64); 3] = [(1, 0), (1, 1), (1, -1)];
        const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
        let crossing = |pair: usize, c: i64| -> (i64, i64) {
            match PAIRS[pair] {
                (0, 1) => (c - 1, c),
                (0, 2) => (1 - c, c),
                _ => (0, 1),
            }
        };
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for orient in 0..8u32 {
            let dir: Vec<(i64, i64)> = (0..3)
                .map(|i| {
                    let s = if orient >> i & 1 == 1 { -1 } else { 1 };
                    (s * BASE[i].0, s * BASE[i].1)
                })
                .collect();
            for heights in (0..3).permutations(3) {
                let signs: Vec<Sign> = PAIRS
                    .iter()
                    .map(|&(i, j)| {
                        let (over, under) = if heights[i] > heights[j] {
                            (i, j)
                        } else {
                            (j, i)
                        };
                        let (a, b) = (dir[over], dir[under]);
                        if a.0 * b.1 - a.1 * b.0 > 0 {
                            Sign::Plus
                        } else {
                            Sign::Minus
                        }
                    })
                    .collect();
                // The two crossings on strand `line`, in the order it meets them.
                let segment = |line: usize, c: i64| -> Vec<Event> {
                    let mut evs: Vec<(i64, Event)> = PAIRS
                        .iter()
                        .enumerate()
                        .filter(|(_, &(i, j))| i == line || j == line)
                        .map(|(p, &(i, j))| {
                            let other = if i == line { j } else { i };
                            let pt = crossing(p, c);
                            let t = pt.0 * dir[line].0 + pt.1 * dir[line].1;
                            (t, (p, heights[line] > heights[other]))
                        })
                        .collect();
                    evs.sort();
                    evs.into_iter().map(|(_, e)| e).collect()
                };
                for order in (0..3).permutations(3) {
                    let lhs: Vec<Vec<Event>> = order.iter().map(|&l| segment(l, 0)).collect();
                    let rhs: Vec<Vec<Event>> = order.iter().map(|&l| segment(l, 2)).collect();
                    let mv = normalize_local(LocalMove {
                        kind: MoveKind::R3,
                        signs: signs.clone(),
                        lhs,
                        rhs,
                    });
                    let flipped = normalize_local(LocalMove {
                        kind: MoveKind::R3,
                        signs: mv.signs.clone(),
                        lhs: mv.rhs.clone(),
                        rhs: mv.lhs.clone(),
                    });
                    let key =
                        side_key(&mv.lhs, &mv.signs).min(side_key(&flipped.lhs, &flipped.signs));
                    if seen.insert(key) {
                        out.push(mv);
                    }
                }
            }
        }
        out
    })
}

/// Renumbers local arrows by first occurrence on the left-hand side.
fn normalize_local(mv: LocalMove) -> LocalMove {
    let mut ids = vec![usize::MAX; mv.signs.len()];
    let mut next = 0;
    for &(a, _) in mv.lhs.iter().flatten() {
        if ids[a] == usize::MAX {
            ids[a] = next;
            next += 1;
        }
    }
    let remap = |segs: &[Vec<Event>]| -> Vec<Vec<Event>> {
        segs.iter()
            .map(|s| s.iter().map(|&(a, t)| (ids[a], t)).collect())
            .collect()
    };
    let mut signs = vec![Sign::Plus; mv.signs.len()];
    for (a, &s) in mv.signs.iter().enumerate() {
        signs[ids[a]] = s;
    }
    LocalMove {
        kind: mv.kind,
        signs,
        lhs: remap(&mv.lhs),
        rhs: remap(&mv.rhs),
    }
}

/// Text key of one side of a local picture, arrows numbered by first occurrence.
fn side_key(segments: &[Vec<Event>], signs: &[Sign]) -> String {
    let mut ids = vec![0usize; signs.len()];
    let mut next = 0;
    let mut out = String::new();
    for seg in segments {
        out.push('|');
        for &(a, tail) in seg {
            if ids[a] == 0 {
                next += 1;
                ids[a] = next;
            }
            out.push(if tail { 'O' } else { 'U' });
            out.push(char::from(b'0' + ids[a] as u8));
            out.push(signs[a].symbol());
        }
    }
    out
}

/// Keys of every realizable R3 side (either side of any picture).
fn r3_side_keys() -> &'static HashSet<String> {
    static KEYS: OnceLock<HashSet<String>> = OnceLock::new();
    KEYS.get_or_init(|| {
        r3_moves()
            .iter()
            .flat_map(|m| [side_key(&m.lhs, &m.signs), side_key(&m.rhs, &m.signs)])
            .collect()
    })
}

pub fn local_moves(kind: MoveKind) -> &'static [LocalMove] {
    match kind {
        MoveKind::R1 => r1_moves(),
        MoveKind::R2 => r2_moves(),
        MoveKind::R3 => r3_moves(),
    }
}

/// A move applicable to a particular diagram, before materialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveSpec {
    Insert {
        kind: MoveKind,
        variant: usize,
        gaps: Vec<usize>,
    },
    RemoveR1(usize),
    RemoveR2(usize, usize),
    /// Three arrows and the first endpoint of each of their three adjacent pairs.
    SlideR3 {
        arrows: [usize; 3],
        starts: [usize; 3],
    },
}

fn adjacent(n: usize, p: usize, q: usize, ambient: Ambient) -> bool {
    let (lo, hi) = (p.min(q), p.max(q));
    hi - lo == 1 || (ambient == Ambient::Loop && n > 2 && lo == 0 && hi == n - 1)
}

pub fn move_specs(d: &GaussDiagram) -> Vec<MoveSpec> {
    let m = d.len();
    let n = 2 * m;
    let ambient = d.ambient();
    let mut out = Vec::new();
    for kind in [MoveKind::R1, MoveKind::R2] {
        let segs = local_moves(kind)[0].lhs.len();
        for gaps in placements(m, segs, ambient) {
            for variant in 0..local_moves(kind).len() {
                out.push(MoveSpec::Insert {
                    kind,
                    variant,
                    gaps: gaps.clone(),
                });
            }
        }
    }
    for x in 0..m {
        if d.is_isolated(x) {
            out.push(MoveSpec::RemoveR1(x));
        }
    }
    let arrows = d.arrows();
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (&arrows[i], &arrows[j]);
            if a.sign != b.sign
                && adjacent(n, a.tail, b.tail, ambient)
                && adjacent(n, a.head, b.head, ambient)
            {
                out.push(MoveSpec::RemoveR2(i, j));
            }
        }
    }
    out.extend(r3_slides(d));
    out
}

fn r3_slides(d: &GaussDiagram) -> Vec<MoveSpec> {
    let n = 2 * d.len();
    if n < 6 {
        return Vec::new();
    }
    let ends = d.endpoints();
    let limit = if d.ambient() == Ambient::Loop {
        n
    } else {
        n - 1
    };
    let mut pairs: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for p in 0..limit {
        let (a, b) = (ends[p].0, ends[(p + 1) % n].0);
        if a != b {
            pairs.entry((a.min(b), a.max(b))).or_default().push(p);
        }
    }
    let mut keys: Vec<(usize, usize)> = pairs.keys().copied().collect();
    keys.sort_unstable();
    let mut out = Vec::new();
    for &(a, b) in &keys {
        for c in b + 1..d.len() {
            let (Some(ab), Some(ac), Some(bc)) =
                (pairs.get(&(a, b)), pairs.get(&(a, c)), pairs.get(&(b, c)))
            else {
                continue;
            };
            for (&p, &q, &r) in itertools::iproduct!(ab, ac, bc) {
                let touched: BTreeSet<usize> =
                    [p, q, r].iter().flat_map(|&s| [s, (s + 1) % n]).collect();
                if touched.len() != 6 {
                    continue;
                }
                let mut starts = [p, q, r];
                starts.sort_unstable();
                let segments: Vec<Vec<Event>> = starts
                    .iter()
                    .map(|&s| vec![ends[s], ends[(s + 1) % n]])
                    .collect();
                let signs: Vec<Sign> = d.arrows().iter().map(|x| x.sign).collect();
                if r3_side_keys().contains(&side_key(&segments, &signs)) {
                    out.push(MoveSpec::SlideR3 {
                        arrows: [a, b, c],
                        starts,
                    });
                }
            }
        }
    }
    out
}

/// Materializes a spec on `d`. Inserted arrows receive the admissible labels
/// 0 (R1) and 1 (R2); existing marks travel with their arrows.
pub fn apply_spec(d: &MarkedDiagram, spec: &MoveSpec) -> MoveInstance {
    let m = d.len();
    match spec {
        MoveSpec::Insert {
            kind,
            variant,
            gaps,
        } => {
            let mv = &local_moves(*kind)[*variant];
            let marks = if *kind == MoveKind::R1 {
                vec![0]
            } else {
                vec![1; mv.arrow_count()]
            };
            mv.instantiate(d, gaps, &marks).reversed()
        }
        MoveSpec::RemoveR1(x) => removal(d, MoveKind::R1, &[*x]),
        MoveSpec::RemoveR2(i, j) => removal(d, MoveKind::R2, &[*i, *j]),
        MoveSpec::SlideR3 { arrows, starts } => {
            let n = 2 * m;
            let mut swap: Vec<usize> = (0..n).collect();
            for &s in starts {
                swap.swap(s, (s + 1) % n);
            }
            let moved = d
                .base
                .arrows()
                .iter()
                .map(|a| Arrow::new(swap[a.tail], swap[a.head], a.sign))
                .collect();
            let rhs = MarkedDiagram {
                base: GaussDiagram::from_parts(d.ambient(), moved),
                marks: d.marks.clone(),
            };
            MoveInstance {
                kind: MoveKind::R3,
                lhs: d.clone(),
                rhs,
                context: (0..m)
                    .filter(|i| !arrows.contains(i))
                    .map(|i| (i, i))
                    .collect(),
                affected_lhs: arrows.to_vec(),
                affected_rhs: arrows.to_vec(),
            }
        }
    }
}

fn removal(d: &MarkedDiagram, kind: MoveKind, gone: &[usize]) -> MoveInstance {
    let keep: Vec<usize> = (0..d.len()).filter(|i| !gone.contains(i)).collect();
    MoveInstance {
        kind,
        lhs: d.clone(),
        rhs: d.subdiagram(&keep),
        context: keep
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect(),
        affected_lhs: gone.to_vec(),
        affected_rhs: Vec::new(),
    }
}

/// Every R1/R2 insertion and removal and every realizable R3 slide on `d`.
pub fn enumerate_moves(d: &MarkedDiagram) -> Vec<MoveInstance> {
    move_specs(&d.base)
        .iter()
        .map(|s| apply_spec(d, s))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkConstraint {
    None,
    ZeroIndex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    /// Start diagram followed by the diagram after each step taken.
    pub trajectory: Vec<GaussDiagram>,
    pub kinds: Vec<MoveKind>,
    pub stalled: bool,
}

impl Walk {
    pub fn end(&self) -> &GaussDiagram {
        self.trajectory.last().expect("trajectory holds the start")
    }
}

/// `steps` uniformly chosen applicable moves. Under `ZeroIndex` only moves
/// whose result has zero index are eligible; with none eligible the walk
/// stops early and reports `stalled`.
pub fn apply_random_walk(
    d: &GaussDiagram,
    steps: usize,
    seed: u64,
    constraint: WalkConstraint,
) -> Result<Walk> {
    if constraint == WalkConstraint::ZeroIndex && d.ambient() != Ambient::Line {
        return Err(Error::WrongAmbient {
            operation: "a zero-index walk",
            expected: Ambient::Line,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = d.clone().all_ones();
    let mut walk = Walk {
        trajectory: vec![d.clone()],
        kinds: Vec::new(),
        stalled: false,
    };
    for _ in 0..steps {
        let mut specs = move_specs(&cur.base);
        let next = match constraint {
            WalkConstraint::None => {
                let i = rng.gen_range(0..specs.len());
                Some(apply_spec(&cur, &specs[i]))
            }
            WalkConstraint::ZeroIndex => {
                specs.shuffle(&mut rng);
                specs
                    .iter()
                    .map(|s| apply_spec(&cur, s))
                    .find(|inst| zero_index_check(&inst.rhs.base).expect("line diagram"))
            }
        };
        match next {
            Some(inst) => {
                walk.kinds.push(inst.kind);
                walk.trajectory.push(inst.rhs.base.clone());
                cur = inst.rhs;
            }
            None => {
                walk.stalled = true;
                break;
            }
        }
    }
    Ok(walk)
}

/// Reverses arrow `x` and negates its sign.
pub fn switch_crossing(d: &GaussDiagram, x: usize) -> Result<GaussDiagram> {
    d.arrow(x)?;
    let mut arrows = d.arrows().to_vec();
    arrows[x] = Arrow::new(arrows[x].head, arrows[x].tail, arrows[x].sign.flip());
    Ok(GaussDiagram::from_parts(d.ambient(), arrows))
}

/// Reverses arrow `x`, keeping its sign.
pub fn virtualize_arrow(d: &GaussDiagram, x: usize) -> Result<GaussDiagram> {
    d.arrow(x)?;
    let mut arrows = d.arrows().to_vec();
    arrows[x] = arrows[x].reversed();
    Ok(GaussDiagram::from_parts(d.ambient(), arrows))
}

/// Action of `k ∈ Z_{2n}`; the generator moves the last endpoint to the front.
pub fn rotation_act(d: &GaussDiagram, k: i64) -> Result<GaussDiagram> {
    if d.ambient() != Ambient::Line {
        return Err(Error::WrongAmbient {
            operation: "the rotation action",
            expected: Ambient::Line,
        });
    }
    if d.is_empty() {
        return Err(Error::EmptyDiagram("the rotation action"));
    }
    let n = 2 * d.len() as i64;
    let shift = k.rem_euclid(n) as usize;
    let n = n as usize;
    let arrows = d
        .arrows()
        .iter()
        .map(|a| Arrow::new((a.tail + shift) % n, (a.head + shift) % n, a.sign))
        .collect();
    Ok(GaussDiagram::from_parts(Ambient::Line, arrows))
}

pub fn closure(d: &GaussDiagram) -> Result<GaussDiagram> {
    if d.ambient() != Ambient::Line {
        return Err(Error::WrongAmbient {
            operation: "closure",
            expected: Ambient::Line,
        });
    }
    Ok(d.with_ambient(Ambient::Loop))
}

/// Context diagrams with exactly `m` arrows carrying the marks of `mode`.
pub fn contexts(m: usize, ambient: Ambient, mode: MarkMode) -> Vec<MarkedDiagram> {
    let marks = match mode {
        MarkMode::ParityLabeled => MarkChoice::All,
        MarkMode::AllOnes => MarkChoice::OnesOnly,
        MarkMode::Unmarked => MarkChoice::Unmarked,
    };
    enumerate_diagrams(m, ambient, EnumerationOptions::new(SignChoice::All, marks))
}

/// All instances with at most `max_context[kind]` context arrows, in parallel.
pub fn move_instances_par(
    ambient: Ambient,
    mode: MarkMode,
    max_context: impl Fn(MoveKind) -> Option<usize> + Sync + Send,
) -> impl ParallelIterator<Item = MoveInstance> {
    let budget: Vec<(MoveKind, usize)> = [MoveKind::R1, MoveKind::R2, MoveKind::R3]
        .into_iter()
        .filter_map(|k| max_context(k).map(|c| (k, c)))
        .collect();
    let top = budget.iter().map(|&(_, c)| c).max();
    let ctxs: Vec<MarkedDiagram> = top
        .map(|top| (0..=top).flat_map(|m| contexts(m, ambient, mode)).collect())
        .unwrap_or_default();
    ctxs.into_par_iter().flat_map_iter(move |ctx| {
        let mut out = Vec::new();
        for &(kind, cap) in &budget {
            if ctx.len() > cap {
                continue;
            }
            for mv in local_moves(kind) {
                let labels = mv.admissible_marks(mode);
                for gaps in placements(ctx.len(), mv.lhs.len(), ambient) {
                    for marks in &labels {
                        out.push(mv.instantiate(&ctx, &gaps, marks));
                    }
                }
            }
        }
        out
    })
}

/// Every instance whose larger side has at most `max_total_arrows` arrows.
pub fn move_instance_pairs(
    max_total_arrows: usize,
    ambient: Ambient,
    mode: MarkMode,
) -> Vec<MoveInstance> {
    let mut out: Vec<MoveInstance> =
        move_instances_par(ambient, mode, |k| max_total_arrows.checked_sub(k.size())).collect();
    out.sort_by_cached_key(|i| {
        (
            i.kind,
            i.lhs.canonical_key(),
            i.rhs.canonical_key(),
            i.lhs.to_gauss_code(),
        )
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parity::{arrow_index, indices};

    fn line(code: &str) -> GaussDiagram {
        GaussDiagram::parse(code, Ambient::Line).unwrap()
    }

    #[test]
    fn empty_line_has_only_insertions() {
        let moves = enumerate_moves(&MarkedDiagram::empty(Ambient::Line));
        let r1 = moves.iter().filter(|m| m.kind == MoveKind::R1).count();
        let r2 = moves.iter().filter(|m| m.kind == MoveKind::R2).count();
        assert_eq!((r1, r2, moves.len()), (4, 8, 12));
        // Brute-force oracle: all 1-arrow diagrams are R1 results, and the
        // R2 results are exactly the 2-arrow diagrams with adjacent tails,
        // adjacent heads and opposite signs.
        let r1_keys: BTreeSet<_> = moves
            .iter()
            .filter(|m| m.kind == MoveKind::R1)
            .map(|m| m.rhs.base.canonical_key())
            .collect();
        assert_eq!(r1_keys.len(), 4);
        let r2_keys: BTreeSet<_> = moves
            .iter()
            .filter(|m| m.kind == MoveKind::R2)
            .map(|m| m.rhs.base.canonical_key())
            .collect();
        let oracle: BTreeSet<_> =
            crate::diagram::enumerate_unmarked(2, Ambient::Line, SignChoice::All)
                .into_iter()
                .filter(|d| {
                    let (a, b) = (d.arrows()[0], d.arrows()[1]);
                    a.sign != b.sign && a.tail.abs_diff(b.tail) == 1 && a.head.abs_diff(b.head) == 1
                })
                .map(|d| d.canonical_key())
                .collect();
        assert_eq!(r2_keys, oracle);
    }

    #[test]
    fn single_arrow_can_be_removed() {
        let d = line("O1+ U1+").all_ones();
        let moves = enumerate_moves(&d);
        assert!(moves
            .iter()
            .any(|m| m.kind == MoveKind::R1 && m.rhs.is_empty()));
    }

    #[test]
    fn instances_are_consistent_and_reversible() {
        for code in ["", "O1+ U1+", "O1+ O2- U1+ U2-", "O1+ O2+ U1+ O3- U2+ U3-"] {
            let d = line(code).all_ones();
            for inst in enumerate_moves(&d) {
                assert!(inst.is_consistent(), "{inst:?}");
                assert!(inst.reversed().is_consistent());
            }
        }
        for inst in move_instance_pairs(4, Ambient::Loop, MarkMode::ParityLabeled) {
            assert!(inst.is_consistent() && inst.reversed().is_consistent());
        }
    }

    #[test]
    fn r3_table_is_closed_and_swaps_pairs() {
        let table = r3_moves();
        assert!(!table.is_empty());
        for mv in table {
            assert_eq!(mv.lhs.len(), 3);
            for (l, r) in mv.lhs.iter().zip(&mv.rhs) {
                assert_eq!(l.len(), 2);
                assert_eq!((l[0], l[1]), (r[1], r[0]));
            }
            // Strands: one with two tails, one with two heads, one mixed.
            let mut kinds: Vec<usize> = mv
                .lhs
                .iter()
                .map(|s| s.iter().filter(|e| e.1).count())
                .collect();
            kinds.sort();
            assert_eq!(kinds, vec![0, 1, 2]);
        }
        let keys = r3_side_keys();
        for mv in table {
            assert!(keys.contains(&side_key(&mv.rhs, &mv.signs)));
        }
        // Mirror images (all signs flipped) are realizable too.
        for mv in table {
            let flipped: Vec<Sign> = mv.signs.iter().map(|s| s.flip()).collect();
            assert!(keys.contains(&side_key(&mv.lhs, &flipped)));
        }
    }

    /// Every R3 picture preserves arrow indices (inside any small context).
    #[test]
    fn r3_table_respects_index_lemma() {
        for inst in move_instance_pairs(4, Ambient::Line, MarkMode::Unmarked) {
            if inst.kind != MoveKind::R3 {
                continue;
            }
            let (li, ri) = (
                indices(&inst.lhs.base).unwrap(),
                indices(&inst.rhs.base).unwrap(),
            );
            for (&a, &b) in inst.affected_lhs.iter().zip(&inst.affected_rhs) {
                assert_eq!(li[a], ri[b]);
            }
            for &(a, b) in &inst.context {
                assert_eq!(li[a], ri[b]);
            }
        }
    }

    #[test]
    fn r3_slides_found_and_reversible() {
        // Any instantiated R3 picture must be detected as a slide on its lhs,
        // and sliding it must reach its rhs.
        let ctx = line("O1- U1-").all_ones();
        for mv in r3_moves() {
            for gaps in placements(1, 3, Ambient::Line) {
                let inst = mv.instantiate(&ctx, &gaps, &[1, 1, 1]);
                let found = enumerate_moves(&inst.lhs);
                assert!(found
                    .iter()
                    .any(|f| f.kind == MoveKind::R3
                        && f.rhs.canonical_key() == inst.rhs.canonical_key()));
                let back = enumerate_moves(&inst.rhs);
                assert!(back
                    .iter()
                    .any(|f| f.kind == MoveKind::R3
                        && f.rhs.canonical_key() == inst.lhs.canonical_key()));
            }
        }
    }

    #[test]
    fn small_instance_sets() {
        let only_r1 = move_instance_pairs(1, Ambient::Line, MarkMode::Unmarked);
        assert!(!only_r1.is_empty() && only_r1.iter().all(|i| i.kind == MoveKind::R1));
        let two = move_instance_pairs(2, Ambient::Line, MarkMode::AllOnes);
        let r2: Vec<_> = two.iter().filter(|i| i.kind == MoveKind::R2).collect();
        assert_eq!(r2.len(), 8);
        assert!(r2.iter().all(|i| i.lhs.marks == [1, 1] && i.rhs.is_empty()));
        for inst in move_instance_pairs(4, Ambient::Line, MarkMode::ParityLabeled) {
            if inst.kind == MoveKind::R3 {
                let s: u8 = inst.affected_lhs.iter().map(|&a| inst.lhs.marks[a]).sum();
                assert_eq!(s % 2, 0);
            }
        }
    }

    #[test]
    fn surgery_examples() {
        let d = line("O1+ U1+");
        let s = switch_crossing(&d, 0).unwrap();
        assert_eq!(s.to_gauss_code(), "U1- O1-");
        assert_eq!(switch_crossing(&s, 0).unwrap(), d);
        let v = virtualize_arrow(&d, 0).unwrap();
        assert_eq!(v.to_gauss_code(), "U1+ O1+");
        assert_eq!(virtualize_arrow(&v, 0).unwrap(), d);
        assert!(switch_crossing(&d, 1).is_err());
        let sign_product =
            |g: &GaussDiagram| g.arrows().iter().map(|a| a.sign.value()).product::<i64>();
        let d3 = line("O1+ O2- U1+ U2- O3+ U3+");
        assert_eq!(
            sign_product(&switch_crossing(&d3, 1).unwrap()),
            -sign_product(&d3)
        );
        assert_eq!(
            sign_product(&virtualize_arrow(&d3, 1).unwrap()),
            sign_product(&d3)
        );
    }

    #[test]
    fn rotation_and_closure() {
        let d = line("O1+ O2- U1+ U2-");
        assert_eq!(rotation_act(&d, 0).unwrap(), d);
        assert_eq!(rotation_act(&d, 4).unwrap(), d);
        assert_eq!(rotation_act(&d, -1).unwrap(), rotation_act(&d, 3).unwrap());
        assert_eq!(
            rotation_act(&d, 1).unwrap().to_gauss_code(),
            "U1- O2+ O1- U2+"
        );
        let key = closure(&d).unwrap().canonical_key();
        for k in 0..8 {
            assert_eq!(
                closure(&rotation_act(&d, k).unwrap())
                    .unwrap()
                    .canonical_key(),
                key
            );
        }
        assert!(rotation_act(&GaussDiagram::empty(Ambient::Line), 1).is_err());
        assert!(closure(&GaussDiagram::empty(Ambient::Line))
            .unwrap()
            .is_empty());
        assert!(closure(&closure(&d).unwrap()).is_err());
    }

    #[test]
    fn walks_are_reproducible() {
        let d = line("O1+ O2+ U1+ U2+");
        assert_eq!(
            apply_random_walk(&d, 0, 1, WalkConstraint::None)
                .unwrap()
                .end(),
            &d
        );
        let a = apply_random_walk(&d, 6, 42, WalkConstraint::None).unwrap();
        let b = apply_random_walk(&d, 6, 42, WalkConstraint::None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trajectory.len(), 7);
    }

    #[test]
    fn walk_steps_are_moves() {
        let w = apply_random_walk(&line("O1+ O2- U1+ U2-"), 12, 3, WalkConstraint::None).unwrap();
        assert!(w.trajectory.windows(2).any(|p| p[0] != p[1]));
        for (pair, kind) in w.trajectory.windows(2).zip(&w.kinds) {
            let delta = pair[1].len() as i64 - pair[0].len() as i64;
            let expected: &[i64] = match kind {
                MoveKind::R1 => &[-1, 1],
                MoveKind::R2 => &[-2, 2],
                MoveKind::R3 => &[0],
            };
            assert!(
                expected.contains(&delta),
                "{kind:?} changed {} -> {}",
                pair[0],
                pair[1]
            );
            let targets: BTreeSet<_> = enumerate_moves(&pair[0].clone().all_ones())
                .into_iter()
                .map(|m| m.rhs.base.canonical_key())
                .collect();
            assert!(targets.contains(&pair[1].canonical_key()));
        }
    }

    #[test]
    fn zero_index_walk_stays_in_class() {
        for seed in 0..20 {
            let w = apply_random_walk(
                &GaussDiagram::empty(Ambient::Line),
                5,
                seed,
                WalkConstraint::ZeroIndex,
            )
            .unwrap();
            for d in &w.trajectory {
                assert!((0..d.len()).all(|x| arrow_index(d, x).unwrap() == 0));
            }
        }
    }
}
