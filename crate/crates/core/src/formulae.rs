//! Closed-form formulae: count polynomials and their compiler, the
//! generator system for `R^{n1} L^{n2}`, products, the even/odd split of
//! homogeneous GPV formulae, and the finite-type and virtualization probes.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::diagram::{
    enumerate_diagrams, fan, Ambient, ArrowClass, EnumerationOptions, GaussDiagram, MarkChoice,
    MarkedDiagram, Sign, SignChoice,
};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, solve_particular, Solution, SparseIntMatrix};
use crate::moves::{rotation_act, switch_crossing, virtualize_arrow};
use crate::parity::{zero_index_check, ParityRule};
use crate::polyak::{
    evaluate, expand_i, expand_i_gpv, pairing, relation_matrix, Decoration, FormalSum, Formula,
    Quotient, RelationOptions,
};

/// Exponents `(w, x, y, z)` = `(R⊕, R⊖, L⊕, L⊖)` on the line; on the loop
/// only the first two are used, as `(N⊕, N⊖)`.
pub type Monomial = [usize; 4];

/// A linear combination of subdiagram counts. The "monomial" `w^2 x` counts
/// odd subdiagrams with two right ⊕ arrows and one right ⊖ arrow, so its
/// value is a product of binomials, not of powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountPolynomial {
    pub ambient: Ambient,
    pub terms: BTreeMap<Monomial, BigInt>,
}

impl CountPolynomial {
    pub fn new(ambient: Ambient) -> Self {
        CountPolynomial {
            ambient,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(ambient: Ambient, terms: &[(Monomial, i64)]) -> Self {
        let mut p = CountPolynomial::new(ambient);
        for &(m, c) in terms {
            p.add(m, BigInt::from(c));
        }
        p
    }

    pub fn add(&mut self, m: Monomial, c: BigInt) {
        let slot = self.terms.entry(m).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.terms.keys().map(|m| m.iter().sum()).min().unwrap_or(0)
    }

    fn variables(ambient: Ambient) -> &'static [char] {
        match ambient {
            Ambient::Line => &['w', 'x', 'y', 'z'],
            Ambient::Loop => &['a', 'b'],
        }
    }

    /// Parses e.g. `2w^2 - 2wx + 2x^2 + w + x`; the loop uses `a` (⊕) and `b` (⊖).
    pub fn parse(text: &str, ambient: Ambient) -> Result<Self> {
        let vars = Self::variables(ambient);
        let bad = |msg: &str| Error::InvalidParameters(format!("count polynomial {text:?}: {msg}"));
        let mut p = CountPolynomial::new(ambient);
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Ok(p);
        }
        let chars: Vec<char> = compact.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let mut sign = BigInt::one();
            if chars[i] == '+' || chars[i] == '-' {
                if chars[i] == '-' {
                    sign = -sign;
                }
                i += 1;
            } else if i > 0 {
                return Err(bad("expected + or -"));
            }
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let coeff: BigInt = if i > start {
                chars[start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| bad("bad coefficient"))?
            } else {
                BigInt::one()
            };
            if i < chars.len() && chars[i] == '*' {
                i += 1;
            }
            let mut m = [0usize; 4];
            let mut any = i > start;
            while i < chars.len() && chars[i] != '+' && chars[i] != '-' {
                let v = vars
                    .iter()
                    .position(|&v| v == chars[i])
                    .ok_or_else(|| bad("unknown variable"))?;
                i += 1;
                let mut e = 1;
                if i < chars.len() && chars[i] == '^' {
                    i += 1;
                    let s = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    e = chars[s..i]
                        .iter()
                        .collect::<String>()
                        .parse()
                        .map_err(|_| bad("bad exponent"))?;
                }
                if i < chars.len() && chars[i] == '*' {
                    i += 1;
                }
                m[v] += e;
                any = true;
            }
            if !any {
                return Err(bad("empty term"));
            }
            p.add(m, sign * coeff);
        }
        Ok(p)
    }

    /// Value on a marked diagram: counts of 1-marked subdiagrams by class.
    pub fn evaluate_counts(&self, d: &MarkedDiagram) -> BigInt {
        let counts = class_counts(d, true);
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .zip(counts)
                    .map(|(&e, n)| binomial(BigInt::from(n), BigInt::from(e)))
                    .product::<BigInt>()
                    * c
            })
            .sum()
    }
}

impl fmt::Display for CountPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let vars = Self::variables(self.ambient);
        // highest degree first, then lexicographically descending exponents
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: usize = a.0.iter().sum();
            let db: usize = b.0.iter().sum();
            db.cmp(&da).then(b.0.cmp(a.0))
        });
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let mono: String = m
                .iter()
                .zip(vars)
                .filter(|(e, _)| **e > 0)
                .map(|(&e, v)| {
                    if e == 1 {
                        v.to_string()
                    } else {
                        format!("{v}^{e}")
                    }
                })
                .collect();
            let mag = c.abs();
            let sep = match (i, c.is_negative()) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            if mono.is_empty() || !mag.is_one() {
                write!(f, "{sep}{mag}{mono}")?;
            } else {
                write!(f, "{sep}{mono}")?;
            }
        }
        Ok(())
    }
}

/// Arrow counts by class; with `odd_only`, 0-marked arrows are skipped.
fn class_counts(d: &MarkedDiagram, odd_only: bool) -> [usize; 4] {
    let mut counts = [0; 4];
    for (a, &mark) in d.base.arrows().iter().zip(&d.marks) {
        if odd_only && mark == 0 {
            continue;
        }
        counts[monomial_slot(a, d.ambient())] += 1;
    }
    counts
}

fn monomial_slot(a: &crate::diagram::Arrow, ambient: Ambient) -> usize {
    match ambient {
        Ambient::Loop => usize::from(a.sign == Sign::Minus),
        Ambient::Line => match ArrowClass::of(a) {
            ArrowClass::RightPlus => 0,
            ArrowClass::RightMinus => 1,
            ArrowClass::LeftPlus => 2,
            ArrowClass::LeftMinus => 3,
        },
    }
}

/// Every all-ones diagram whose class counts match a monomial, with that
/// monomial's coefficient.
pub fn compile_count_polynomial(p: &CountPolynomial, quotient: Quotient) -> Result<Formula> {
    if quotient.decoration() != Decoration::Marked {
        return Err(Error::DecorationMismatch);
    }
    for m in p.terms.keys() {
        let deg: usize = m.iter().sum();
        if !quotient.admits(deg, 0) {
            return Err(Error::QuotientViolation(format!(
                "a degree {deg} term is outside {quotient}"
            )));
        }
        if p.ambient == Ambient::Loop && (m[2] > 0 || m[3] > 0) {
            return Err(Error::InvalidParameters(
                "loop polynomials use two variables".into(),
            ));
        }
    }
    let mut by_degree: BTreeMap<usize, HashMap<Monomial, &BigInt>> = BTreeMap::new();
    for (m, c) in &p.terms {
        by_degree.entry(m.iter().sum()).or_default().insert(*m, c);
    }
    let mut sum = FormalSum::new(p.ambient, Decoration::Marked);
    for (deg, wanted) in by_degree {
        let opts = EnumerationOptions::new(SignChoice::All, MarkChoice::OnesOnly);
        for d in enumerate_diagrams(deg, p.ambient, opts) {
            if let Some(c) = wanted.get(&class_counts(&d, false)) {
                sum.add(d.canonical_key(), (*c).clone());
            }
        }
    }
    Ok(Formula { sum, quotient })
}

/// Integer solution of the generator system for `R^{n1} L^{n2}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorSolution {
    pub n1: usize,
    pub n2: usize,
    #[serde(serialize_with = "crate::formulae::ser_big")]
    pub c0: BigInt,
    /// `c_{ij}^{kl}` keyed by `(i, j, k, l)`, below the top block.
    #[serde(serialize_with = "crate::formulae::ser_coeffs")]
    pub coefficients: BTreeMap<Monomial, BigInt>,
}

pub(crate) fn ser_big<S: serde::Serializer>(
    v: &BigInt,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_coeffs<S: serde::Serializer>(
    v: &BTreeMap<Monomial, BigInt>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (m, c) in v {
        seq.serialize_element(&(m, c.to_string()))?;
    }
    seq.end()
}

impl GeneratorSolution {
    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    fn is_top(&self, m: &Monomial) -> bool {
        m[0] + m[1] == self.n1 && m[2] + m[3] == self.n2
    }

    /// Coefficient of any monomial, the top block included.
    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        if m[0] + m[1] > self.n1 || m[2] + m[3] > self.n2 {
            BigInt::zero()
        } else if self.is_top(m) {
            if (m[1] + m[3]) % 2 == 0 {
                self.c0.clone()
            } else {
                -self.c0.clone()
            }
        } else {
            self.coefficients.get(m).cloned().unwrap_or_default()
        }
    }

    pub fn to_polynomial(&self, ambient: Ambient) -> CountPolynomial {
        let mut p = CountPolynomial::new(ambient);
        for m in monomials(self.n1, self.n2) {
            let c = self.coefficient(&m);
            if !c.is_zero() {
                p.add(m, c);
            }
        }
        p
    }

    /// Substitutes into every equation of the system.
    pub fn satisfies_system(&self) -> bool {
        !self.c0.is_zero()
            && system_equations(self.n1, self.n2).iter().all(|eq| {
                eq.iter()
                    .map(|m| self.coefficient(m))
                    .sum::<BigInt>()
                    .is_zero()
            })
    }

    pub fn formula(&self, ambient: Ambient) -> Result<Formula> {
        if ambient == Ambient::Loop && self.n2 > 0 {
            return Err(Error::InvalidParameters(
                "loop generators have a single variable pair".into(),
            ));
        }
        compile_count_polynomial(
            &self.to_polynomial(ambient),
            Quotient::O { n: self.n(), k: 1 },
        )
    }
}

/// Nonzero monomials with `i+j ≤ n1`, `k+l ≤ n2`.
fn monomials(n1: usize, n2: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for r in 0..=n1 {
        for j in 0..=r {
            for s in 0..=n2 {
                for l in 0..=s {
                    let m = [r - j, j, s - l, l];
                    if m != [0; 4] {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

/// Each equation lists the monomials whose coefficients sum to zero: the
/// all-ones Q2 relation `A± + A+ + A−` for a right or left pair.
fn system_equations(n1: usize, n2: usize) -> Vec<Vec<Monomial>> {
    let mut eqs = Vec::new();
    for r in 2..=n1 + 1 {
        for j in 1..r {
            for s in 0..=n2 {
                for l in 0..=s {
                    let m = [r - j, j, s - l, l];
                    eqs.push(vec![
                        m,
                        [m[0] - 1, m[1], m[2], m[3]],
                        [m[0], m[1] - 1, m[2], m[3]],
                    ]);
                }
            }
        }
    }
    for s in 2..=n2 + 1 {
        for l in 1..s {
            for r in 0..=n1 {
                for j in 0..=r {
                    let m = [r - j, j, s - l, l];
                    eqs.push(vec![
                        m,
                        [m[0], m[1], m[2] - 1, m[3]],
                        [m[0], m[1], m[2], m[3] - 1],
                    ]);
                }
            }
        }
    }
    eqs
}

/// Pins of a pure generator in the pair `(p, q)` (`p` ⊕, `q` ⊖) of degree `n`.
fn pure_pins(
    n: usize,
) -> (
    Vec<((usize, usize), (usize, usize), i64)>,
    Vec<((usize, usize), i64)>,
) {
    // (a, b, s): c_a = s·c_b ; (a, v): c_a = v
    let mut rel = Vec::new();
    let mut fixed = Vec::new();
    let sign = |e: usize| if e % 2 == 0 { 1 } else { -1 };
    for t in 1..n {
        for j in 0..=t {
            let i = t - j;
            if i > j {
                rel.push(((i, j), (j, i), if n % 2 == 0 { 1 } else { -1 }));
            } else if i == j && n % 2 == 1 {
                fixed.push(((i, j), 0));
            }
        }
    }
    if n == 1 {
        return (rel, fixed);
    }
    if n % 2 == 0 {
        let h = n / 2;
        fixed.push(((h - 1, h), sign(h - 1)));
        for k in 1..h {
            fixed.push(((k, k - 1), 1));
        }
    } else {
        fixed.push((((n + 1) / 2, (n - 3) / 2), sign((n + 1) / 2)));
        for j in 2..=(n - 1) / 2 {
            fixed.push(((j, j - 1), sign(j - 1)));
        }
        fixed.push(((1, 0), 0));
        fixed.push(((0, 1), 0));
    }
    (rel, fixed)
}

pub fn solve_generator_system(n1: usize, n2: usize) -> Result<GeneratorSolution> {
    if n1 + n2 == 0 {
        return Err(Error::InvalidParameters(
            "the generator system needs n1 + n2 ≥ 1".into(),
        ));
    }
    let top = |m: &Monomial| m[0] + m[1] == n1 && m[2] + m[3] == n2;
    let vars: Vec<Monomial> = monomials(n1, n2).into_iter().filter(|m| !top(m)).collect();
    let col: HashMap<Monomial, usize> = vars.iter().enumerate().map(|(i, m)| (*m, i + 1)).collect();
    let ncols = vars.len() + 1;
    let mut mat = SparseIntMatrix::new(ncols);
    let mut rhs = Vec::new();
    let mut push = |mat: &mut SparseIntMatrix, row: Vec<(usize, i64)>, b: i64| -> Result<()> {
        let mut merged: BTreeMap<usize, i64> = BTreeMap::new();
        for (c, v) in row {
            *merged.entry(c).or_default() += v;
        }
        let row: Vec<_> = merged.into_iter().filter(|e| e.1 != 0).collect();
        if row.is_empty() {
            if b != 0 {
                return Err(Error::Infeasible("contradictory pin".into()));
            }
            return Ok(());
        }
        mat.push_row(row)?;
        rhs.push(BigInt::from(b));
        Ok(())
    };
    let term = |m: &Monomial| -> Option<(usize, i64)> {
        if m[0] + m[1] > n1 || m[2] + m[3] > n2 || *m == [0; 4] {
            None
        } else if top(m) {
            Some((0, if (m[1] + m[3]) % 2 == 0 { 1 } else { -1 }))
        } else {
            Some((col[m], 1))
        }
    };
    for eq in system_equations(n1, n2) {
        push(&mut mat, eq.iter().filter_map(term).collect(), 0)?;
    }
    // pins of a pure generator, transported to the (w,x) or (y,z) slots
    let embed = |(p, q): (usize, usize)| -> Monomial {
        if n2 == 0 {
            [p, q, 0, 0]
        } else {
            [0, 0, p, q]
        }
    };
    if n1 == 0 || n2 == 0 {
        let n = n1 + n2;
        let (rel, fixed) = pure_pins(n);
        for (a, b, s) in rel {
            let (ta, tb) = (term(&embed(a)), term(&embed(b)));
            if let (Some((ca, va)), Some((cb, vb))) = (ta, tb) {
                push(&mut mat, vec![(ca, va), (cb, -s * vb)], 0)?;
            }
        }
        for (a, v) in fixed {
            if let Some((c, s)) = term(&embed(a)) {
                push(&mut mat, vec![(c, s)], v)?;
            }
        }
        if n == 1 {
            push(&mut mat, vec![(0, 1)], 1)?;
        }
    } else {
        let c0 = solve_generator_system(n1, 0)?.c0 * solve_generator_system(0, n2)?.c0;
        let c0 = i64::try_from(c0).map_err(|_| Error::Infeasible("c0 out of range".into()))?;
        push(&mut mat, vec![(0, 1)], c0)?;
        // only terms involving both directions, as in the product
        for m in &vars {
            if m[0] + m[1] == 0 || m[2] + m[3] == 0 {
                push(&mut mat, vec![(col[m], 1)], 0)?;
            }
        }
    }
    let x = match solve_particular(&mat, &rhs)? {
        Solution::Solved(x) => x,
        Solution::Infeasible => {
            return Err(Error::Infeasible(format!("generator system ({n1},{n2})")))
        }
    };
    let ints = x.as_integers().ok_or_else(|| {
        Error::Infeasible(format!(
            "generator system ({n1},{n2}) has no integer solution"
        ))
    })?;
    let coefficients = vars
        .iter()
        .zip(&ints[1..])
        .filter(|(_, v)| !v.is_zero())
        .map(|(m, v)| (*m, v.clone()))
        .collect();
    let sol = GeneratorSolution {
        n1,
        n2,
        c0: ints[0].clone(),
        coefficients,
    };
    if !sol.satisfies_system() {
        return Err(Error::Infeasible(format!("generator system ({n1},{n2})")));
    }
    Ok(sol)
}

/// `f_{n1}(w,x) · f_{n2}(y,z)`.
pub fn product_formula(
    s1: &GeneratorSolution,
    s2: &GeneratorSolution,
) -> Result<GeneratorSolution> {
    if s1.n2 != 0 || s2.n1 != 0 {
        return Err(Error::InvalidParameters(
            "the product takes a right generator and a left generator".into(),
        ));
    }
    let mut out = GeneratorSolution {
        n1: s1.n1,
        n2: s2.n2,
        c0: &s1.c0 * &s2.c0,
        coefficients: BTreeMap::new(),
    };
    for a in monomials(s1.n1, 0) {
        for b in monomials(0, s2.n2) {
            let m = [a[0], a[1], b[2], b[3]];
            if out.is_top(&m) {
                continue;
            }
            let c = s1.coefficient(&a) * s2.coefficient(&b);
            if !c.is_zero() {
                out.coefficients.insert(m, c);
            }
        }
    }
    assert!(
        out.satisfies_system(),
        "products of generators solve the system"
    );
    Ok(out)
}

/// Names accepted by [`builtin_formula`].
pub const BUILTIN_NAMES: &[&str] = &[
    "F_l", "F_r", "F_lr", "F_rl", "F_ll", "F_rr", "F_lll", "F_rrr", "F_lrr", "F_rll", "F_n",
    "F_nn", "F_nnn", "v21", "v22",
];

pub fn builtin_polynomial(name: &str) -> Result<CountPolynomial> {
    let line = |t: &str| CountPolynomial::parse(t, Ambient::Line);
    let lp = |t: &str| CountPolynomial::parse(t, Ambient::Loop);
    match name {
        "F_r" => line("w - x"),
        "F_l" => line("y - z"),
        "F_lr" | "F_rl" => line("yw - yx - zw + zx"),
        "F_rr" => line("2w^2 - 2wx + 2x^2 + w + x"),
        "F_ll" => line("2y^2 - 2yz + 2z^2 + y + z"),
        "F_rrr" => line("w^3 - w^2x + wx^2 - x^3 + w^2 - x^2"),
        "F_lll" => line("y^3 - y^2z + yz^2 - z^3 + y^2 - z^2"),
        "F_lrr" => line("2yw^2 - 2zw^2 - 2ywx + 2zwx + 2yx^2 - 2zx^2 + yw + yx - zw - zx"),
        "F_rll" => line("2y^2w - 2y^2x - 2yzw + 2yzx + 2z^2w - 2z^2x + yw + zw - yx - zx"),
        "F_n" => lp("a - b"),
        "F_nn" => lp("2a^2 - 2ab + 2b^2 + a + b"),
        "F_nnn" => lp("a^3 - a^2b + ab^2 - b^3 + a^2 - b^2"),
        other => Err(Error::UnknownFormula(other.to_string())),
    }
}

/// Sign-weighted single-diagram GPV formula of order 2.
fn order_two_gpv(code: &str) -> Formula {
    let mut sum = FormalSum::new(Ambient::Line, Decoration::Unmarked);
    for (s1, s2) in [("+", "+"), ("+", "-"), ("-", "+"), ("-", "-")] {
        let text = code
            .replace("1", &format!("1{s1}"))
            .replace("2", &format!("2{s2}"));
        let d = GaussDiagram::parse(&text, Ambient::Line).expect("valid pattern");
        sum.add(
            d.canonical_key(),
            BigInt::from(if s1 == s2 { 1 } else { -1 }),
        );
    }
    Formula {
        sum,
        quotient: Quotient::Gpv { n: 2 },
    }
}

pub fn builtin_formula(name: &str) -> Result<Formula> {
    match name {
        "v21" => Ok(order_two_gpv("U1 O2 O1 U2")),
        "v22" => Ok(order_two_gpv("O1 U2 U1 O2")),
        _ => {
            let p = builtin_polynomial(name)?;
            compile_count_polynomial(
                &p,
                Quotient::O {
                    n: p.degree(),
                    k: 1,
                },
            )
        }
    }
}

fn homogeneous_order(f: &Formula) -> Result<usize> {
    if f.sum.decoration() != Decoration::Unmarked {
        return Err(Error::DecorationMismatch);
    }
    let mut orders = f.sum.diagrams().map(|(d, _)| d.len());
    let n = orders.next().unwrap_or(0);
    if orders.any(|m| m != n) {
        return Err(Error::NotHomogeneous(format!(
            "mixed orders in {}",
            f.quotient
        )));
    }
    Ok(n)
}

/// `F^o`: every summand with each marking that has at least one 1.
pub fn homogeneous_odd_part(f: &Formula) -> Result<Formula> {
    let n = homogeneous_order(f)?;
    let mut terms = BTreeMap::new();
    if n > 0 {
        for (d, c) in f.sum.diagrams() {
            for bits in 1u32..1 << n {
                let marks = (0..n).map(|i| (bits >> i & 1) as u8).collect();
                let m = MarkedDiagram {
                    base: d.base.clone(),
                    marks,
                };
                terms.insert(m.canonical_key(), c.clone());
            }
        }
    }
    let mut sum = FormalSum::new(f.ambient(), Decoration::Marked);
    for (k, c) in terms {
        sum.add(k, c);
    }
    Ok(Formula {
        sum,
        quotient: Quotient::O {
            n: n.max(1),
            k: n.max(1),
        },
    })
}

/// `F^e`: every arrow of every summand marked 0.
pub fn even_part(f: &Formula) -> Result<Formula> {
    if f.sum.decoration() != Decoration::Unmarked {
        return Err(Error::DecorationMismatch);
    }
    let mut sum = FormalSum::new(f.ambient(), Decoration::Marked);
    let mut top = 0;
    for (d, c) in f.sum.diagrams() {
        top = top.max(d.len());
        let m = MarkedDiagram {
            marks: vec![0; d.len()],
            base: d.base,
        };
        sum.add(m.canonical_key(), c.clone());
    }
    Ok(Formula {
        sum,
        quotient: Quotient::E { n: top },
    })
}

/// `⟨F, I_GPV(D)⟩ = ⟨F^o, I[P](D)⟩ + ⟨F^e, I[P](D)⟩`.
pub fn decomposition_check(f: &Formula, rule: ParityRule, d: &GaussDiagram) -> Result<bool> {
    let n = homogeneous_order(f)?;
    let whole = pairing(&f.sum, &expand_i_gpv(d, n))?;
    let expansion = expand_i(d, rule, n)?;
    let odd = pairing(&homogeneous_odd_part(f)?.sum, &expansion)?;
    let even = pairing(&even_part(f)?.sum, &expansion)?;
    Ok(whole == odd + even)
}

/// Homogeneous order-`n` GPV formulae: kernel elements vanishing below order `n`.
pub fn homogeneous_gpv_basis(n: usize, ambient: Ambient) -> Result<Vec<Formula>> {
    let mut rel = relation_matrix(Quotient::Gpv { n }, ambient, RelationOptions::default())?;
    let lower: Vec<usize> = rel
        .columns
        .iter()
        .enumerate()
        .filter(|(_, k)| GaussDiagram::parse(k.as_str(), ambient).map_or(true, |d| d.len() < n))
        .map(|(i, _)| i)
        .collect();
    for c in lower {
        rel.matrix.push_row(vec![(c, 1)])?;
    }
    kernel_basis(&rel.matrix)
        .into_iter()
        .map(|v| {
            let mut sum = FormalSum::new(ambient, Decoration::Unmarked);
            for (c, x) in v.support() {
                sum.add(rel.columns[c].clone(), x.to_integer());
            }
            Ok(Formula {
                sum,
                quotient: Quotient::Gpv { n },
            })
        })
        .collect()
}

/// `Σ_{T ⊆ singular} (−1)^{|T|} F(D with T switched)`.
pub fn kauffman_vanishing_probe(
    f: &Formula,
    rule: ParityRule,
    d: &GaussDiagram,
    singular: &[usize],
) -> Result<BigInt> {
    for &x in singular {
        d.arrow(x)?;
    }
    let mut total = BigInt::zero();
    for bits in 0u32..1 << singular.len() {
        let mut e = d.clone();
        for (i, &x) in singular.iter().enumerate() {
            if bits >> i & 1 == 1 {
                e = switch_crossing(&e, x)?;
            }
        }
        let v = evaluate(f, rule, &e)?;
        if bits.count_ones() % 2 == 0 {
            total += v;
        } else {
            total -= v;
        }
    }
    Ok(total)
}

/// Whether reversing the listed arrows (signs kept) leaves the value unchanged.
pub fn virtualization_check(
    f: &Formula,
    rule: ParityRule,
    d: &GaussDiagram,
    flips: &[usize],
) -> Result<bool> {
    let mut e = d.clone();
    for &x in flips {
        e = virtualize_arrow(&e, x)?;
    }
    Ok(evaluate(f, rule, d)? == evaluate(f, rule, &e)?)
}

/// `F_rr` under the Gaussian parity on `k` pairwise-linked right ⊕ arrows.
pub fn linked_fan_evaluation(k: usize) -> Result<BigInt> {
    if k == 0 {
        return Err(Error::InvalidParameters("the fan needs k ≥ 1".into()));
    }
    evaluate(
        &builtin_formula("F_rr")?,
        ParityRule::Gaussian,
        &fan(k, Ambient::Line),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroIndexReport {
    pub bound: usize,
    pub diagrams_checked: usize,
    pub zero_index_diagrams: usize,
    pub violations: Vec<String>,
}

/// On zero-index line diagrams up to `bound` arrows: `v21 = v22`, and
/// both are constant along the rotation action.
pub fn zero_index_invariant_checks(bound: usize) -> Result<ZeroIndexReport> {
    if bound == 0 {
        return Err(Error::InvalidParameters("bound must be at least 1".into()));
    }
    let v21 = builtin_formula("v21")?;
    let v22 = builtin_formula("v22")?;
    let mut report = ZeroIndexReport {
        bound,
        diagrams_checked: 0,
        zero_index_diagrams: 0,
        violations: Vec::new(),
    };
    for m in 0..=bound {
        for d in enumerate_diagrams(
            m,
            Ambient::Line,
            EnumerationOptions::new(SignChoice::All, MarkChoice::Unmarked),
        ) {
            let d = d.base;
            report.diagrams_checked += 1;
            if !zero_index_check(&d)? {
                continue;
            }
            report.zero_index_diagrams += 1;
            let a = evaluate(&v21, ParityRule::Gaussian, &d)?;
            let b = evaluate(&v22, ParityRule::Gaussian, &d)?;
            if a != b {
                report
                    .violations
                    .push(format!("{}: v21 = {a}, v22 = {b}", d.to_gauss_code()));
            }
            for z in 1..2 * m as i64 {
                let r = rotation_act(&d, z)?;
                for (name, f, before) in [("v21", &v21, &a), ("v22", &v22, &b)] {
                    let c = evaluate(f, ParityRule::Gaussian, &r)?;
                    if &c != before {
                        report.violations.push(format!(
                            "{}: {name} changes to {c} under rotation by {z}",
                            d.to_gauss_code()
                        ));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Keys of a formula's support paired with decimal coefficients.
pub fn formula_terms(f: &Formula) -> Vec<(String, String)> {
    f.sum
        .terms()
        .iter()
        .map(|(k, v)| (k.as_str().to_string(), v.to_string()))
        .collect()
}

/// Restricted to all-ones diagrams, the formula as a count polynomial, if it is one.
pub fn as_count_polynomial(f: &Formula) -> Option<CountPolynomial> {
    let mut p = CountPolynomial::new(f.ambient());
    let mut seen: HashMap<Monomial, BigInt> = HashMap::new();
    for (d, c) in f.sum.diagrams() {
        if d.zero_count() > 0 {
            return None;
        }
        let m = class_counts(&d, false);
        match seen.get(&m) {
            Some(prev) if prev != c => return None,
            Some(_) => {}
            None => {
                seen.insert(m, c.clone());
                p.add(m, c.clone());
            }
        }
    }
    let back = compile_count_polynomial(&p, f.quotient).ok()?;
    (back.sum == f.sum).then_some(p)
}
