//! Parities on Gauss diagrams, the arrow index, axiom checks and the
//! functorial map that deletes odd arrows.

use serde::{Deserialize, Serialize};

use crate::diagram::{Ambient, GaussDiagram};
use crate::error::{Error, Result};
use crate::moves::{switch_crossing, MoveInstance, MoveKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityRule {
    /// Intersection-graph degree mod 2.
    Gaussian,
    /// Level `t` of the index hierarchy; level 0 is Gaussian.
    Hierarchy(u32),
    /// Not a parity: odd iff the sign is minus. Negative control.
    MinusSign,
    /// Not a parity: odd iff the index is nonzero. Drives the zero-index projection.
    NonzeroIndex,
}

impl ParityRule {
    pub fn marks(&self, d: &GaussDiagram) -> Result<Vec<u8>> {
        match *self {
            ParityRule::Gaussian => Ok(gaussian_parity(d)),
            ParityRule::Hierarchy(t) => hierarchy_parity(d, t),
            ParityRule::MinusSign => Ok(d
                .arrows()
                .iter()
                .map(|a| u8::from(a.sign.value() < 0))
                .collect()),
            ParityRule::NonzeroIndex => {
                Ok(indices(d)?.into_iter().map(|i| u8::from(i != 0)).collect())
            }
        }
    }

    pub fn applies_to(&self, ambient: Ambient) -> bool {
        match self {
            ParityRule::Gaussian | ParityRule::MinusSign | ParityRule::Hierarchy(0) => true,
            ParityRule::Hierarchy(_) | ParityRule::NonzeroIndex => ambient == Ambient::Line,
        }
    }
}

pub fn gaussian_parity(d: &GaussDiagram) -> Vec<u8> {
    d.intersection_graph()
        .degrees()
        .into_iter()
        .map(|deg| (deg % 2) as u8)
        .collect()
}

fn require_line(d: &GaussDiagram, operation: &'static str) -> Result<()> {
    if d.ambient() == Ambient::Line {
        Ok(())
    } else {
        Err(Error::WrongAmbient {
            operation,
            expected: Ambient::Line,
        })
    }
}

/// `I(x) = Σ δ(x,y)·σ(x)·σ(y)` over arrows `y` linked with `x`, where
/// `δ = +1` if the head of `y` lies strictly inside the span of `x`.
pub fn arrow_index(d: &GaussDiagram, x: usize) -> Result<i64> {
    require_line(d, "the arrow index")?;
    d.arrow(x)?;
    Ok(index_unchecked(d, x))
}

fn index_unchecked(d: &GaussDiagram, x: usize) -> i64 {
    let a = &d.arrows()[x];
    let mut total = 0;
    for (y, b) in d.arrows().iter().enumerate() {
        if y != x && d.linked_unchecked(x, y) {
            let delta = if a.spans(b.head) { 1 } else { -1 };
            total += delta * a.sign.value() * b.sign.value();
        }
    }
    total
}

pub fn indices(d: &GaussDiagram) -> Result<Vec<i64>> {
    require_line(d, "the arrow index")?;
    Ok((0..d.len()).map(|x| index_unchecked(d, x)).collect())
}

/// Literal inductive rule: if any arrow is odd at level `t − 1` the marks are
/// inherited unchanged; otherwise arrow `x` is odd iff `I(x) ≡ 2^t (mod 2^{t+1})`.
///
/// This fails the R2 context condition (see the `literal_hierarchy_*` test):
/// adding a Gaussian-odd R2 pair to an all-even diagram switches every
/// context arrow back to its Gaussian mark.
pub fn hierarchy_parity(d: &GaussDiagram, level: u32) -> Result<Vec<u8>> {
    let base = gaussian_parity(d);
    if level == 0 || base.contains(&1) {
        if level > 0 {
            require_line(d, "hierarchy parity above level 0")?;
        }
        return Ok(base);
    }
    let idx = indices(d)?;
    for t in 1..=level {
        let modulus = 1i64 << (t + 1);
        let marks: Vec<u8> = idx
            .iter()
            .map(|i| u8::from(i.rem_euclid(modulus) == 1 << t))
            .collect();
        if marks.contains(&1) || t == level {
            return Ok(marks);
        }
    }
    unreachable!("loop returns at t == level")
}

pub fn zero_index_check(d: &GaussDiagram) -> Result<bool> {
    Ok(indices(d)?.iter().all(|&i| i == 0))
}

/// Deletes every arrow the rule marks odd.
pub fn functorial_map_f(d: &GaussDiagram, rule: ParityRule) -> Result<GaussDiagram> {
    let marks = rule.marks(d)?;
    let keep: Vec<usize> = (0..d.len()).filter(|&i| marks[i] == 0).collect();
    Ok(d.subdiagram(&keep))
}

/// Iterates the map until nothing changes; returns the result and the number
/// of deleting rounds.
pub fn f_fixpoint(d: &GaussDiagram, rule: ParityRule) -> Result<(GaussDiagram, usize)> {
    let mut cur = d.clone();
    let mut rounds = 0;
    loop {
        let next = functorial_map_f(&cur, rule)?;
        if next.len() == cur.len() {
            return Ok((cur, rounds));
        }
        cur = next;
        rounds += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub instance: usize,
    pub kind: MoveKind,
    pub lhs: String,
    pub rhs: String,
    pub reason: String,
}

fn violation(index: usize, inst: &MoveInstance, reason: String) -> Violation {
    Violation {
        instance: index,
        kind: inst.kind,
        lhs: inst.lhs.to_gauss_code(),
        rhs: inst.rhs.to_gauss_code(),
        reason,
    }
}

/// Checks the three parity axioms on one instance.
pub fn check_axioms(
    rule: ParityRule,
    index: usize,
    inst: &MoveInstance,
) -> Result<Option<Violation>> {
    let l = rule.marks(&inst.lhs.base)?;
    let r = rule.marks(&inst.rhs.base)?;
    for &(a, b) in &inst.context {
        if l[a] != r[b] {
            return Ok(Some(violation(
                index,
                inst,
                format!("context arrow {a} changes mark"),
            )));
        }
    }
    let (side, marks) = if inst.affected_lhs.is_empty() {
        (&inst.affected_rhs, &r)
    } else {
        (&inst.affected_lhs, &l)
    };
    let reason = match inst.kind {
        MoveKind::R1 if marks[side[0]] != 0 => Some("R1 arrow is odd".to_owned()),
        MoveKind::R2 if marks[side[0]] != marks[side[1]] => Some("R2 pair marks differ".to_owned()),
        MoveKind::R3 => {
            let sum: u8 = inst.affected_lhs.iter().map(|&a| l[a]).sum();
            if sum % 2 != 0 {
                Some("R3 marks have odd sum".to_owned())
            } else if inst
                .affected_lhs
                .iter()
                .zip(&inst.affected_rhs)
                .any(|(&a, &b)| l[a] != r[b])
            {
                Some("R3 marks do not correspond".to_owned())
            } else {
                None
            }
        }
        _ => None,
    };
    Ok(reason.map(|r| violation(index, inst, r)))
}

pub fn verify_parity_axioms(
    rule: ParityRule,
    instances: &[MoveInstance],
) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        out.extend(check_axioms(rule, i, inst)?);
    }
    Ok(out)
}

/// The index lemma on one Line instance: context arrows keep their index,
/// an R1 arrow has index 0, an R2 pair has opposite indices, R3 arrows
/// keep their indices.
pub fn check_index_lemma(index: usize, inst: &MoveInstance) -> Result<Option<Violation>> {
    let l = indices(&inst.lhs.base)?;
    let r = indices(&inst.rhs.base)?;
    if let Some(&(a, _)) = inst.context.iter().find(|&&(a, b)| l[a] != r[b]) {
        return Ok(Some(violation(
            index,
            inst,
            format!("context arrow {a} changes index"),
        )));
    }
    let (side, idx) = if inst.affected_lhs.is_empty() {
        (&inst.affected_rhs, &r)
    } else {
        (&inst.affected_lhs, &l)
    };
    let bad = match inst.kind {
        MoveKind::R1 => idx[side[0]] != 0,
        MoveKind::R2 => idx[side[0]] != -idx[side[1]],
        MoveKind::R3 => inst
            .affected_lhs
            .iter()
            .zip(&inst.affected_rhs)
            .any(|(&a, &b)| l[a] != r[b]),
    };
    Ok(bad.then(|| violation(index, inst, "index lemma fails".to_owned())))
}

/// Marks agree on every arrow after switching any single crossing.
pub fn is_switch_symmetric(rule: ParityRule, sample: &[GaussDiagram]) -> Result<bool> {
    for d in sample {
        let marks = rule.marks(d)?;
        for x in 0..d.len() {
            if rule.marks(&switch_crossing(d, x)?)? != marks {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{enumerate_unmarked, fan, SignChoice};
    use crate::moves::{move_instance_pairs, MarkMode};

    fn line(code: &str) -> GaussDiagram {
        GaussDiagram::parse(code, Ambient::Line).unwrap()
    }

    /// Oracle: index computed from the Gauss word directly, scanning the
    /// positions between the endpoints of x for heads of other arrows.
    fn index_oracle(d: &GaussDiagram, x: usize) -> i64 {
        let ends = d.endpoints();
        let a = d.arrows()[x];
        let inside: Vec<usize> = (a.lo() + 1..a.hi()).map(|p| ends[p].0).collect();
        let mut total = 0;
        for y in 0..d.len() {
            let count = inside.iter().filter(|&&z| z == y).count();
            if y == x || count != 1 {
                continue;
            }
            let head_inside = (a.lo() + 1..a.hi()).any(|p| ends[p] == (y, false));
            let delta = if head_inside { 1 } else { -1 };
            total += delta * a.sign.value() * d.arrows()[y].sign.value();
        }
        total
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian_parity(&line("O1+ U1+")), vec![0]);
        assert_eq!(gaussian_parity(&line("O1+ O2+ U1+ U2+")), vec![1, 1]);
        assert_eq!(gaussian_parity(&fan(3, Ambient::Line)), vec![0, 0, 0]);
    }

    #[test]
    fn index_examples() {
        assert_eq!(arrow_index(&line("O1+ U1+"), 0).unwrap(), 0);
        let d = line("O1+ O2+ U1+ U2+");
        assert_eq!(arrow_index(&d, 0).unwrap(), -1);
        assert_eq!(arrow_index(&d, 1).unwrap(), 1);
        let lp = GaussDiagram::parse("O1+ U1+", Ambient::Loop).unwrap();
        assert!(arrow_index(&lp, 0).is_err());
        assert!(zero_index_check(&lp).is_err());
    }

    #[test]
    fn index_matches_oracle() {
        for m in 0..=4 {
            for d in enumerate_unmarked(m, Ambient::Line, SignChoice::All) {
                for x in 0..m {
                    assert_eq!(arrow_index(&d, x).unwrap(), index_oracle(&d, x), "{d}");
                }
            }
        }
    }

    #[test]
    fn hierarchy_examples() {
        assert_eq!(hierarchy_parity(&line("O1+ U1+"), 3).unwrap(), vec![0]);
        assert_eq!(
            hierarchy_parity(&line("O1+ O2+ U1+ U2+"), 1).unwrap(),
            vec![1, 1]
        );
        let lp = GaussDiagram::parse("O1+ O2+ U1+ U2+", Ambient::Loop).unwrap();
        assert_eq!(hierarchy_parity(&lp, 0).unwrap(), vec![1, 1]);
        assert!(hierarchy_parity(&lp, 1).is_err());
    }

    #[test]
    fn hierarchy_inherits_odd_gaussian_marks() {
        for d in enumerate_unmarked(3, Ambient::Line, SignChoice::All) {
            let g = gaussian_parity(&d);
            if g.contains(&1) {
                for n in 1..4 {
                    assert_eq!(hierarchy_parity(&d, n).unwrap(), g);
                }
            }
        }
    }

    /// A witness that is Gaussian-even yet odd at level 1.
    #[test]
    fn hierarchy_level_one_is_new() {
        let witness = (0..=5)
            .flat_map(|m| enumerate_unmarked(m, Ambient::Line, SignChoice::PlusOnly))
            .find(|d| {
                !gaussian_parity(d).contains(&1) && hierarchy_parity(d, 1).unwrap().contains(&1)
            })
            .expect("a level-1 witness with at most 5 arrows");
        let idx = indices(&witness).unwrap();
        assert!(idx.iter().any(|i| i.rem_euclid(4) == 2));
    }

    #[test]
    fn f_map_examples() {
        let d = line("O1+ U1+");
        assert_eq!(functorial_map_f(&d, ParityRule::Gaussian).unwrap(), d);
        assert_eq!(f_fixpoint(&d, ParityRule::Gaussian).unwrap(), (d, 0));
        let d = line("O1+ O2+ U1+ U2+");
        assert!(functorial_map_f(&d, ParityRule::Gaussian)
            .unwrap()
            .is_empty());
        assert_eq!(f_fixpoint(&d, ParityRule::Gaussian).unwrap().1, 1);
        let k3 = fan(3, Ambient::Line);
        assert_eq!(f_fixpoint(&k3, ParityRule::Gaussian).unwrap(), (k3, 0));
    }

    #[test]
    fn f_strictly_shrinks_unless_all_even() {
        for d in enumerate_unmarked(3, Ambient::Line, SignChoice::PlusOnly) {
            let f = functorial_map_f(&d, ParityRule::Gaussian).unwrap();
            if gaussian_parity(&d).contains(&1) {
                assert!(f.len() < d.len());
            } else {
                assert_eq!(f, d);
            }
        }
    }

    #[test]
    fn axioms_hold_on_small_instances() {
        let instances = move_instance_pairs(4, Ambient::Line, MarkMode::Unmarked);
        for rule in [
            ParityRule::Gaussian,
            ParityRule::Hierarchy(1),
            ParityRule::Hierarchy(2),
        ] {
            assert!(
                verify_parity_axioms(rule, &instances).unwrap().is_empty(),
                "{rule:?}"
            );
        }
        let bad = verify_parity_axioms(ParityRule::MinusSign, &instances).unwrap();
        assert!(bad.iter().any(|v| v.kind == MoveKind::R2));
        for (i, inst) in instances.iter().enumerate() {
            assert_eq!(check_index_lemma(i, inst).unwrap(), None);
        }
        let loops = move_instance_pairs(4, Ambient::Loop, MarkMode::Unmarked);
        assert!(verify_parity_axioms(ParityRule::Gaussian, &loops)
            .unwrap()
            .is_empty());
    }

    /// Smallest failure of the literal hierarchy rule: a 5-arrow R2 instance.
    #[test]
    fn literal_hierarchy_breaks_r2_context() {
        let small = fan(3, Ambient::Line);
        let big = line("O1+ O2+ O3+ O4+ O5- U1+ U2+ U3+ U5- U4+");
        assert_eq!(big.subdiagram(&[0, 1, 2]), small);
        let inst = move_instance_pairs(5, Ambient::Line, MarkMode::Unmarked)
            .into_iter()
            .find(|i| i.kind == MoveKind::R2 && i.lhs.base == big && i.rhs.base == small)
            .expect("an R2 instance");
        assert_eq!(gaussian_parity(&small), vec![0, 0, 0]);
        assert_eq!(gaussian_parity(&big), vec![0, 0, 0, 1, 1]);
        assert_eq!(indices(&small).unwrap()[0], -2);
        assert_eq!(hierarchy_parity(&small, 1).unwrap()[0], 1);
        assert_eq!(hierarchy_parity(&big, 1).unwrap()[0], 0);
        assert!(check_axioms(ParityRule::Hierarchy(1), 0, &inst)
            .unwrap()
            .is_some());
        assert!(check_axioms(ParityRule::Gaussian, 0, &inst)
            .unwrap()
            .is_none());
    }

    #[test]
    fn switch_symmetry() {
        let sample: Vec<GaussDiagram> = (0..=4)
            .flat_map(|m| enumerate_unmarked(m, Ambient::Line, SignChoice::All))
            .collect();
        assert!(is_switch_symmetric(ParityRule::Gaussian, &sample).unwrap());
        assert!(is_switch_symmetric(ParityRule::Hierarchy(1), &sample).unwrap());
        assert!(!is_switch_symmetric(ParityRule::MinusSign, &sample).unwrap());
    }

    #[test]
    fn zero_index_examples() {
        assert!(zero_index_check(&GaussDiagram::empty(Ambient::Line)).unwrap());
        assert!(zero_index_check(&line("O1+ U1+")).unwrap());
        assert!(!zero_index_check(&line("O1+ O2+ U1+ U2+")).unwrap());
    }
}
