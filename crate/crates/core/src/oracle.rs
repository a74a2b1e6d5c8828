//! Classical mod-p Steenrod operations on polynomial test algebras, Adem
//! normal forms and a composition checker.
//!
//! At p = 2 the test algebra is F_2[x_1..x_N] with |x_i| = 1 and
//! Sq(x) = x + x². At odd p it is Λ(y_1..y_N) ⊗ F_p[u_1..u_N] with
//! |y_i| = 1, |u_i| = 2, β(y_i) = u_i, P(u) = u + u^p and P(y) = y.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::{Error, Fp, Result};

/// Largest degree any computation may reach.
pub const DEGREE_BOUND: u32 = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Letter {
    Sq(u32),
    Beta,
    P(u32),
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Sq(a) => write!(f, "Sq{a}"),
            Letter::Beta => write!(f, "b"),
            Letter::P(a) => write!(f, "P{a}"),
        }
    }
}

/// A composite of Steenrod generators; the rightmost letter acts first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SteenrodWord {
    pub p: u32,
    pub letters: Vec<Letter>,
}

impl fmt::Display for SteenrodWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.letters.iter().map(Letter::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl SteenrodWord {
    pub fn new(p: u32, letters: Vec<Letter>) -> Result<SteenrodWord> {
        let w = SteenrodWord { p, letters };
        w.check()?;
        Ok(w)
    }

    pub fn sq(a: u32) -> SteenrodWord {
        SteenrodWord {
            p: 2,
            letters: vec![Letter::Sq(a)],
        }
    }

    pub fn identity(p: u32) -> SteenrodWord {
        SteenrodWord {
            p,
            letters: Vec::new(),
        }
    }

    fn check(&self) -> Result<()> {
        if Fp::new(self.p).is_none() {
            return Err(Error::Precondition(format!("{} is not prime", self.p)));
        }
        for l in &self.letters {
            let ok = match l {
                Letter::Sq(_) => self.p == 2,
                Letter::Beta | Letter::P(_) => self.p != 2,
            };
            if !ok {
                return Err(Error::Precondition(format!(
                    "letter {l} does not exist at p = {}",
                    self.p
                )));
            }
        }
        Ok(())
    }

    /// Parses words such as `Sq2 Sq1`, `Sq^2Sq^1`, `b P1` or `beta P^3 P1`.
    pub fn parse(p: u32, s: &str) -> Result<SteenrodWord> {
        let bad = |m: &str| Error::Parse {
            source_name: "word".into(),
            line: 1,
            column: 0,
            message: format!("{m} in {s:?}"),
        };
        let mut letters = Vec::new();
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || c == '*' || c == '.' {
                i += 1;
                continue;
            }
            let rest: String = chars[i..].iter().collect();
            let (kind, skip) = if rest.starts_with("Sq") {
                ('S', 2)
            } else if rest.starts_with("beta") {
                ('b', 4)
            } else if c == 'b' || c == 'β' {
                ('b', 1)
            } else if c == 'P' {
                ('P', 1)
            } else {
                return Err(bad(&format!("unexpected {c:?}")));
            };
            i += skip;
            if kind == 'b' {
                letters.push(Letter::Beta);
                continue;
            }
            if i < chars.len() && chars[i] == '^' {
                i += 1;
            }
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let n: u32 = chars[start..i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| bad("missing exponent"))?;
            letters.push(if kind == 'S' {
                Letter::Sq(n)
            } else {
                Letter::P(n)
            });
        }
        SteenrodWord::new(p, letters)
    }

    pub fn degree(&self) -> u32 {
        self.letters
            .iter()
            .map(|l| match l {
                Letter::Sq(a) => *a,
                Letter::Beta => 1,
                Letter::P(a) => 2 * a * (self.p - 1),
            })
            .sum()
    }

    /// Admissible: `a_i ≥ 2 a_{i+1}` at p = 2; `s_i ≥ p s_{i+1} + ε_i` at
    /// odd p, with no repeated Bockstein and no zero exponents.
    pub fn is_admissible(&self) -> bool {
        let l = &self.letters;
        if l.iter().any(|x| matches!(x, Letter::Sq(0) | Letter::P(0))) {
            return false;
        }
        for i in 0..l.len() {
            match (l[i], l.get(i + 1), l.get(i + 2)) {
                (Letter::Sq(a), Some(Letter::Sq(b)), _) if a < 2 * b => return false,
                (Letter::Beta, Some(Letter::Beta), _) => return false,
                (Letter::P(a), Some(Letter::P(b)), _) if a < self.p * b => return false,
                (Letter::P(a), Some(Letter::Beta), Some(Letter::P(b))) if a < self.p * b + 1 => {
                    return false
                }
                _ => {}
            }
        }
        true
    }
}

/// Formal F_p-combination of words.
pub type Combination = BTreeMap<Vec<Letter>, u32>;

fn add_to(f: Fp, c: &mut Combination, w: Vec<Letter>, x: u32) {
    let x = x % f.p();
    if x == 0 {
        return;
    }
    let e = c.entry(w.clone()).or_insert(0);
    *e = f.add(*e, x);
    if *e == 0 {
        c.remove(&w);
    }
}

pub fn format_combination(p: u32, c: &Combination) -> String {
    if c.is_empty() {
        return "0".into();
    }
    c.iter()
        .map(|(w, &x)| {
            let body = SteenrodWord {
                p,
                letters: w.clone(),
            }
            .to_string();
            if x == 1 {
                body
            } else {
                format!("{x}*{body}")
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// One Adem rewrite of an inadmissible adjacent pattern starting at `i`, or
/// `None` when the pattern there is admissible.
fn rewrite_at(f: Fp, l: &[Letter], i: usize) -> Option<(usize, Combination)> {
    let p = f.p();
    let mut out = Combination::new();
    match (l[i], l.get(i + 1).copied(), l.get(i + 2).copied()) {
        (Letter::Sq(0) | Letter::P(0), _, _) => {
            out.insert(Vec::new(), 1);
            Some((1, out))
        }
        (Letter::Beta, Some(Letter::Beta), _) => Some((2, out)),
        (Letter::Sq(a), Some(Letter::Sq(b)), _) if b > 0 && a < 2 * b => {
            for j in 0..=a / 2 {
                let c = f.binomial(b as i64 - 1 - j as i64, a as i64 - 2 * j as i64);
                add_to(f, &mut out, vec![Letter::Sq(a + b - j), Letter::Sq(j)], c);
            }
            Some((2, out))
        }
        (Letter::P(a), Some(Letter::P(b)), _) if b > 0 && a < p * b => {
            for j in 0..=a / p {
                let sign = if (a + j) % 2 == 1 { p - 1 } else { 1 };
                let c = f.binomial(
                    (p as i64 - 1) * (b as i64 - j as i64) - 1,
                    a as i64 - (p * j) as i64,
                );
                add_to(
                    f,
                    &mut out,
                    vec![Letter::P(a + b - j), Letter::P(j)],
                    f.mul(sign, c),
                );
            }
            Some((2, out))
        }
        (Letter::P(a), Some(Letter::Beta), Some(Letter::P(b))) if b > 0 && a <= p * b => {
            for j in 0..=a / p {
                let sign = if (a + j) % 2 == 1 { p - 1 } else { 1 };
                let c = f.binomial(
                    (p as i64 - 1) * (b as i64 - j as i64),
                    a as i64 - (p * j) as i64,
                );
                add_to(
                    f,
                    &mut out,
                    vec![Letter::Beta, Letter::P(a + b - j), Letter::P(j)],
                    f.mul(sign, c),
                );
                let c2 = f.binomial(
                    (p as i64 - 1) * (b as i64 - j as i64) - 1,
                    a as i64 - (p * j) as i64 - 1,
                );
                add_to(
                    f,
                    &mut out,
                    vec![Letter::P(a + b - j), Letter::Beta, Letter::P(j)],
                    f.mul(p - sign, c2),
                );
            }
            Some((3, out))
        }
        _ => None,
    }
}

/// Expansion of a word in admissible words, by repeatedly rewriting the
/// leftmost inadmissible pattern.
pub fn adem_normal_form(w: &SteenrodWord) -> Result<Combination> {
    w.check()?;
    if w.degree() > DEGREE_BOUND {
        return Err(Error::Size(format!(
            "word of degree {} exceeds {DEGREE_BOUND}",
            w.degree()
        )));
    }
    let f = Fp::new(w.p).expect("checked");
    let mut done = Combination::new();
    let mut todo: Combination = Combination::new();
    add_to(f, &mut todo, w.letters.clone(), 1);
    while let Some((word, c)) = todo.pop_first() {
        let hit = (0..word.len()).find_map(|i| rewrite_at(f, &word, i).map(|r| (i, r)));
        match hit {
            None => add_to(f, &mut done, word, c),
            Some((i, (len, repl))) => {
                for (mid, x) in repl {
                    let mut nw = word[..i].to_vec();
                    nw.extend(mid);
                    nw.extend_from_slice(&word[i + len..]);
                    add_to(f, &mut todo, nw, f.mul(c, x));
                }
            }
        }
    }
    Ok(done)
}

/// Monomial: exponents of the even generators and a bitmask of exterior
/// generators (always empty at p = 2).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub ext: u32,
}

/// Element of the test algebra in `nvars` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyElement {
    pub p: u32,
    pub nvars: usize,
    pub terms: BTreeMap<Monomial, u32>,
}

impl PolyElement {
    pub fn zero(p: u32, nvars: usize) -> PolyElement {
        PolyElement {
            p,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(p: u32, exps: Vec<u32>, ext: u32) -> PolyElement {
        let nvars = exps.len();
        let mut e = PolyElement::zero(p, nvars);
        e.terms.insert(Monomial { exps, ext }, 1);
        e
    }

    pub fn one(p: u32, nvars: usize) -> PolyElement {
        PolyElement::monomial(p, vec![0; nvars], 0)
    }

    fn field(&self) -> Fp {
        Fp::new(self.p).expect("prime")
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: u32) {
        let f = self.field();
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert(0);
        *e = f.add(*e, c);
        if *e == 0 {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &PolyElement) -> PolyElement {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: u32) -> PolyElement {
        let mut out = PolyElement::zero(self.p, self.nvars);
        for (m, &x) in &self.terms {
            out.add_term(m.clone(), self.field().mul(x, c));
        }
        out
    }

    pub fn mul(&self, other: &PolyElement) -> PolyElement {
        let f = self.field();
        let mut out = PolyElement::zero(self.p, self.nvars);
        for (a, &x) in &self.terms {
            for (b, &y) in &other.terms {
                if let Some((m, s)) = mono_mul(a, b) {
                    out.add_term(m, f.mul(f.mul(x, y), if s { self.p - 1 } else { 1 }));
                }
            }
        }
        out
    }

    pub fn monomial_degree(&self, m: &Monomial) -> u32 {
        let even = if self.p == 2 { 1 } else { 2 };
        m.exps.iter().sum::<u32>() * even + m.ext.count_ones()
    }

    /// Degree when homogeneous; `None` for zero or mixed degrees.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| self.monomial_degree(m));
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    /// Parses `x1*x2^2 + x3` at p = 2 or `2*u1^2*y1*y2 + u3` at odd p.
    pub fn parse(p: u32, nvars: usize, s: &str) -> Result<PolyElement> {
        let bad = |m: String| Error::Parse {
            source_name: "polynomial".into(),
            line: 1,
            column: 0,
            message: m,
        };
        let f = Fp::new(p).ok_or_else(|| bad(format!("{p} is not prime")))?;
        let mut out = PolyElement::zero(p, nvars);
        let s = s.replace(' ', "");
        if s == "0" {
            return Ok(out);
        }
        for term in s.split('+') {
            if term.is_empty() {
                return Err(bad(format!("empty term in {s:?}")));
            }
            let mut acc = PolyElement::one(p, nvars);
            for factor in term.split('*') {
                if let Ok(c) = factor.parse::<i64>() {
                    acc = acc.scale(f.reduce(c));
                    continue;
                }
                let (var, exp) = match factor.split_once('^') {
                    Some((v, e)) => (
                        v,
                        e.parse::<u32>()
                            .map_err(|_| bad(format!("bad exponent in {factor:?}")))?,
                    ),
                    None => (factor, 1),
                };
                let (kind, idx) = var.split_at(1);
                let i: usize = idx
                    .parse()
                    .map_err(|_| bad(format!("bad variable {var:?}")))?;
                if i == 0 || i > nvars {
                    return Err(bad(format!("variable {var:?} outside 1..={nvars}")));
                }
                let mut exps = vec![0; nvars];
                let m = match (kind, p) {
                    ("x", 2) | ("u", 3..) => {
                        exps[i - 1] = exp;
                        Monomial { exps, ext: 0 }
                    }
                    ("y", q) if q != 2 => {
                        if exp > 1 {
                            acc = PolyElement::zero(p, nvars);
                            continue;
                        }
                        Monomial {
                            exps,
                            ext: 1 << (i - 1),
                        }
                    }
                    _ => return Err(bad(format!("variable {var:?} does not exist at p = {p}"))),
                };
                let mut v = PolyElement::zero(p, nvars);
                v.terms.insert(m, 1);
                acc = acc.mul(&v);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// Every monomial of degree exactly `d`.
    pub fn monomials_of_degree(p: u32, nvars: usize, d: u32) -> Vec<PolyElement> {
        let even = if p == 2 { 1 } else { 2 };
        let masks: Vec<u32> = if p == 2 {
            vec![0]
        } else {
            (0..1u32 << nvars).collect()
        };
        let mut out = Vec::new();
        for ext in masks {
            let odd = ext.count_ones();
            if odd > d || (d - odd) % even != 0 {
                continue;
            }
            for exps in compositions((d - odd) / even, nvars) {
                out.push(PolyElement::monomial(p, exps, ext));
            }
        }
        out
    }
}

/// Product of monomials with the sign from reordering exterior generators.
fn mono_mul(a: &Monomial, b: &Monomial) -> Option<(Monomial, bool)> {
    if a.ext & b.ext != 0 {
        return None;
    }
    // Each generator of b passes the generators of a with larger index.
    let mut swaps = 0;
    for i in 0..32 {
        if b.ext >> i & 1 == 1 {
            swaps += (a.ext >> (i + 1)).count_ones();
        }
    }
    let exps = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
    Some((
        Monomial {
            exps,
            ext: a.ext | b.ext,
        },
        swaps % 2 == 1,
    ))
}

/// All ways to write `k` as an ordered sum of `n` non-negative parts.
fn compositions(k: u32, n: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return if k == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=k {
        for mut rest in compositions(k - first, n - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl fmt::Display for PolyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let even = if self.p == 2 { "x" } else { "u" };
        let mut first = true;
        for (m, &c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut factors = Vec::new();
            if c != 1 {
                factors.push(c.to_string());
            }
            for (i, &e) in m.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("{even}{}", i + 1)),
                    _ => factors.push(format!("{even}{}^{e}", i + 1)),
                }
            }
            for i in 0..self.nvars {
                if m.ext >> i & 1 == 1 {
                    factors.push(format!("y{}", i + 1));
                }
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// `Sq^k` or `P^k` on a monomial via the Cartan formula on each variable.
fn power_on_monomial(f: Fp, m: &Monomial, k: u32, out: &mut PolyElement) {
    let step = if f.p() == 2 { 1 } else { f.p() - 1 };
    fn rec(
        f: Fp,
        step: u32,
        m: &Monomial,
        i: usize,
        left: u32,
        exps: &mut Vec<u32>,
        c: u32,
        out: &mut PolyElement,
    ) {
        if i == m.exps.len() {
            if left == 0 {
                out.add_term(
                    Monomial {
                        exps: exps.clone(),
                        ext: m.ext,
                    },
                    c,
                );
            }
            return;
        }
        let e = m.exps[i];
        for j in 0..=left.min(e) {
            let b = f.binomial(e as i64, j as i64);
            if b == 0 {
                continue;
            }
            exps[i] = e + j * step;
            rec(f, step, m, i + 1, left - j, exps, f.mul(c, b), out);
        }
        exps[i] = e;
    }
    let mut exps = m.exps.clone();
    rec(f, step, m, 0, k, &mut exps, 1, out);
}

fn bockstein_on_monomial(f: Fp, m: &Monomial, out: &mut PolyElement) {
    let mut pos = 0;
    for i in 0..m.exps.len() {
        if m.ext >> i & 1 == 0 {
            continue;
        }
        let mut exps = m.exps.clone();
        exps[i] += 1;
        let sign = if pos % 2 == 1 { f.p() - 1 } else { 1 };
        out.add_term(
            Monomial {
                exps,
                ext: m.ext & !(1 << i),
            },
            sign,
        );
        pos += 1;
    }
}

fn apply_letter(l: Letter, x: &PolyElement) -> Result<PolyElement> {
    let f = x.field();
    let mut out = PolyElement::zero(x.p, x.nvars);
    for (m, &c) in &x.terms {
        let mut part = PolyElement::zero(x.p, x.nvars);
        match l {
            Letter::Sq(k) | Letter::P(k) => power_on_monomial(f, m, k, &mut part),
            Letter::Beta => bockstein_on_monomial(f, m, &mut part),
        }
        for (mm, &cc) in &part.terms {
            if x.monomial_degree(mm) > DEGREE_BOUND {
                return Err(Error::Size(format!("result degree exceeds {DEGREE_BOUND}")));
            }
            out.add_term(mm.clone(), f.mul(c, cc));
        }
    }
    Ok(out)
}

/// Applies a word, rightmost letter first.
pub fn apply(w: &SteenrodWord, x: &PolyElement) -> Result<PolyElement> {
    w.check()?;
    if w.p != x.p {
        return Err(Error::Precondition(format!(
            "word at p = {} applied to an element at p = {}",
            w.p, x.p
        )));
    }
    let mut acc = x.clone();
    for &l in w.letters.iter().rev() {
        acc = apply_letter(l, &acc)?;
    }
    Ok(acc)
}

pub fn apply_combination(p: u32, c: &Combination, x: &PolyElement) -> Result<PolyElement> {
    let mut out = PolyElement::zero(x.p, x.nvars);
    for (w, &k) in c {
        out = out.add(
            &apply(
                &SteenrodWord {
                    p,
                    letters: w.clone(),
                },
                x,
            )?
            .scale(k),
        );
    }
    Ok(out)
}

/// Outcome of [`compose_check`].
#[derive(Clone, Debug, Serialize)]
pub struct ComposeReport {
    pub holds: bool,
    pub monomials_checked: usize,
    /// A monomial on which the two sides differ.
    pub witness: Option<String>,
}

/// Compares `w1 ∘ w2` with the normal form of `w1 · w2` (computed by
/// `normal_form`) on every monomial in `n` variables of degree ≤ `d`.
pub fn compose_check(
    w1: &SteenrodWord,
    w2: &SteenrodWord,
    n: usize,
    d: u32,
    normal_form: &dyn Fn(&SteenrodWord) -> Result<Combination>,
) -> Result<ComposeReport> {
    if w1.p != w2.p {
        return Err(Error::Precondition("words at different primes".into()));
    }
    let mut joined = w1.letters.clone();
    joined.extend_from_slice(&w2.letters);
    let word = SteenrodWord::new(w1.p, joined)?;
    let nf = normal_form(&word)?;
    let mut checked = 0;
    for deg in 0..=d {
        for m in PolyElement::monomials_of_degree(w1.p, n, deg) {
            checked += 1;
            let direct = apply(w1, &apply(w2, &m)?)?;
            let via = apply_combination(w1.p, &nf, &m)?;
            if direct != via {
                return Ok(ComposeReport {
                    holds: false,
                    monomials_checked: checked,
                    witness: Some(m.to_string()),
                });
            }
        }
    }
    Ok(ComposeReport {
        holds: true,
        monomials_checked: checked,
        witness: None,
    })
}

/// `ν(q) = ((p−1)/2)!^q · (−1)^{(p−1)(q²+q)/4}` in F_p, for even `q`.
pub fn nu(q: i64, p: u32) -> Result<u32> {
    let f = Fp::new(p)
        .filter(|_| p != 2)
        .ok_or_else(|| Error::Precondition(format!("nu needs an odd prime, got {p}")))?;
    if q % 2 != 0 {
        return Err(Error::Precondition(format!("nu needs an even q, got {q}")));
    }
    let half = (p - 1) / 2;
    let fact = (1..=half).fold(1u32, |a, k| f.mul(a, k));
    let base = if q >= 0 {
        f.pow(fact, q as u64)
    } else {
        f.pow(f.inv(fact), q.unsigned_abs())
    };
    let e = (p as i64 - 1) * (q * q + q) / 4;
    Ok(if e.rem_euclid(2) == 1 {
        f.neg(base)
    } else {
        base
    })
}
