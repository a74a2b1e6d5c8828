//! Character bookkeeping over tabulated characters: RO(G) degrees, the
//! one-dimensional characters, restriction and fixed-point degree maps,
//! and the small arithmetic facts (ε, orientability fold, Euler degree,
//! fixed components) that feed the operation catalog.
//!
//! Real irreducible characters are integer valued. Complex characters are
//! either integer valued or linear with values in the roots of unity; those
//! are handled exactly in `Z[x]/Φ_N`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fingroup::{self, FiniteGroup, GroupHom, Subgroup, WeylGroup};
use crate::rodegree::{RODegree, TRIVIAL};
use crate::{Error, Result};

/// Label used for the regular representation in degree expressions.
pub const RHO: &str = "rho";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealIrrep {
    pub label: String,
    pub dim: i64,
    /// Character value per class.
    pub values: Vec<i64>,
    /// `<χ, χ>`: 1, 2 or 4 for real, complex or quaternionic type.
    pub norm: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComplexValues {
    Integer(Vec<i64>),
    /// Value `exp(2πi e / order)` on each class.
    Roots {
        order: u32,
        exponents: Vec<u32>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexIrrep {
    pub label: String,
    pub dim: i64,
    pub values: ComplexValues,
}

/// A validated character table bound to a concrete group.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub group: Arc<FiniteGroup>,
    /// Members of each class, in table order.
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    pub real: Vec<RealIrrep>,
    pub complex: Option<Vec<ComplexIrrep>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ElementRef {
    Index(usize),
    Cycles(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassEntry {
    representative: ElementRef,
    size: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RealEntry {
    label: String,
    values: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexEntry {
    label: String,
    values: Option<Vec<i64>>,
    order: Option<u32>,
    exponents: Option<Vec<u32>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    group: String,
    classes: Vec<ClassEntry>,
    real: Vec<RealEntry>,
    complex: Option<Vec<ComplexEntry>>,
}

impl CharacterTable {
    /// Parses a table file against an already loaded group.
    pub fn parse(source_name: &str, text: &str, group: Arc<FiniteGroup>) -> Result<CharacterTable> {
        let file: TableFile =
            serde_json::from_str(text).map_err(|e| Error::from_json(source_name, e))?;
        if file.group != group.name() {
            return Err(Error::Table(format!(
                "{source_name}: table is for {} but the group is {}",
                file.group,
                group.name()
            )));
        }
        let elem_classes = group.conjugacy_classes();
        let mut class_of_elem = vec![0; group.order()];
        for (i, c) in elem_classes.iter().enumerate() {
            for &x in c {
                class_of_elem[x] = i;
            }
        }
        let mut classes = Vec::new();
        let mut used = vec![false; elem_classes.len()];
        for (i, c) in file.classes.iter().enumerate() {
            let rep = match &c.representative {
                ElementRef::Index(x) if *x < group.order() => *x,
                ElementRef::Index(x) => {
                    return Err(Error::Table(format!(
                        "{source_name}: class {i}: no element {x}"
                    )))
                }
                ElementRef::Cycles(s) => {
                    let degree = group.perm_degree().ok_or_else(|| {
                        Error::Table(format!(
                            "{source_name}: cycle notation needs a permutation group"
                        ))
                    })?;
                    let p = fingroup::parse_cycles(s, degree)
                        .map_err(|m| Error::Table(format!("{source_name}: class {i}: {m}")))?;
                    group.index_of_perm(&p).ok_or_else(|| {
                        Error::Table(format!(
                            "{source_name}: class {i}: {s} is not in {}",
                            group.name()
                        ))
                    })?
                }
            };
            let k = class_of_elem[rep];
            if used[k] {
                return Err(Error::Table(format!(
                    "{source_name}: class {i} repeats an earlier class"
                )));
            }
            used[k] = true;
            if elem_classes[k].len() != c.size {
                return Err(Error::Table(format!(
                    "{source_name}: class {i} has size {}, file says {}",
                    elem_classes[k].len(),
                    c.size
                )));
            }
            classes.push(elem_classes[k].clone());
        }
        if used.iter().any(|u| !u) {
            return Err(Error::Table(format!(
                "{source_name}: table misses a conjugacy class"
            )));
        }
        let nc = classes.len();
        let id_class = classes
            .iter()
            .position(|c| c.contains(&group.identity()))
            .unwrap();
        let check_len = |label: &str, n: usize| {
            if n != nc {
                Err(Error::Table(format!(
                    "{source_name}: {label} has {n} values for {nc} classes"
                )))
            } else {
                Ok(())
            }
        };
        let mut real = Vec::new();
        for r in file.real {
            check_len(&r.label, r.values.len())?;
            real.push(RealIrrep {
                dim: r.values[id_class],
                label: r.label,
                values: r.values,
                norm: 0,
            });
        }
        let complex = match file.complex {
            None => None,
            Some(entries) => {
                let mut out = Vec::new();
                for c in entries {
                    let values = match (c.values, c.order, c.exponents) {
                        (Some(v), None, None) => {
                            check_len(&c.label, v.len())?;
                            ComplexValues::Integer(v)
                        }
                        (None, Some(order), Some(e)) if order > 0 => {
                            check_len(&c.label, e.len())?;
                            ComplexValues::Roots { order, exponents: e.into_iter().map(|x| x % order).collect() }
                        }
                        _ => {
                            return Err(Error::Table(format!(
                                "{source_name}: complex character {} needs either values or order+exponents",
                                c.label
                            )))
                        }
                    };
                    let dim = match &values {
                        ComplexValues::Integer(v) => v[id_class],
                        ComplexValues::Roots { exponents, .. } => {
                            if exponents[id_class] != 0 {
                                return Err(Error::Table(format!(
                                    "{source_name}: {} is not 1 at the identity",
                                    c.label
                                )));
                            }
                            1
                        }
                    };
                    out.push(ComplexIrrep {
                        label: c.label,
                        dim,
                        values,
                    });
                }
                Some(out)
            }
        };
        let mut class_of = vec![0; group.order()];
        for (i, c) in classes.iter().enumerate() {
            for &x in c {
                class_of[x] = i;
            }
        }
        let mut t = CharacterTable {
            group,
            classes,
            class_of,
            real,
            complex,
        };
        t.validate().map_err(|e| match e {
            Error::Table(m) => Error::Table(format!("{source_name}: {m}")),
            other => other,
        })?;
        Ok(t)
    }

    pub fn load(path: &Path, group: Arc<FiniteGroup>) -> Result<CharacterTable> {
        let text = crate::read_file(path)?;
        Self::parse(&path.display().to_string(), &text, group)
    }

    /// Orthogonality, norms and the dimension count of the regular
    /// representation. Fills in the real norms.
    fn validate(&mut self) -> Result<()> {
        let mut labels: Vec<&str> = self.real.iter().map(|r| r.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Table("duplicate real label".into()));
        }
        if !labels.contains(&TRIVIAL) {
            return Err(Error::Table(format!(
                "no trivial character labelled {TRIVIAL:?}"
            )));
        }
        if labels.contains(&RHO) {
            return Err(Error::Table(format!(
                "{RHO:?} is reserved for the regular representation"
            )));
        }
        for r in &self.real {
            if r.label == TRIVIAL && r.values.iter().any(|&v| v != 1) {
                return Err(Error::Table(format!(
                    "{TRIVIAL:?} is not the trivial character"
                )));
            }
        }
        let n = self.real.len();
        let mut norms = vec![0; n];
        for i in 0..n {
            for j in 0..=i {
                let ip = self.inner_times_order(&self.real[i].values, &self.real[j].values);
                let order = self.group.order() as i64;
                if i == j {
                    if ip % order != 0 || ![1, 2, 4].contains(&(ip / order)) {
                        return Err(Error::Table(format!(
                            "<{0},{0}> = {ip}/{order} is not 1, 2 or 4",
                            self.real[i].label
                        )));
                    }
                    norms[i] = ip / order;
                } else if ip != 0 {
                    return Err(Error::Table(format!(
                        "{} and {} are not orthogonal",
                        self.real[i].label, self.real[j].label
                    )));
                }
            }
        }
        for (r, nm) in self.real.iter_mut().zip(norms) {
            r.norm = nm;
        }
        let total: i64 = self.real.iter().map(|r| r.dim * r.dim / r.norm).sum();
        if total != self.group.order() as i64 {
            return Err(Error::Table(format!(
                "real irreducibles account for dimension {total} of the regular representation, expected {}",
                self.group.order()
            )));
        }
        if let Some(cx) = &self.complex {
            let nn = self.cyclotomic_order();
            let cvals: Vec<Vec<Vec<i64>>> = cx.iter().map(|c| self.cyclo_values(c, nn)).collect();
            for i in 0..cx.len() {
                for j in 0..=i {
                    let ip = self.complex_inner_times_order(&cvals[i], &cvals[j], nn);
                    let expect = if i == j { self.group.order() as i64 } else { 0 };
                    if ip != Some(expect) {
                        return Err(Error::Table(format!(
                            "complex characters {} and {} fail orthogonality",
                            cx[i].label, cx[j].label
                        )));
                    }
                }
            }
            let total: i64 = cx.iter().map(|c| c.dim * c.dim).sum();
            if total != self.group.order() as i64 {
                return Err(Error::Table(format!(
                    "complex irreducibles have Σ dim² = {total}, expected {}",
                    self.group.order()
                )));
            }
        }
        Ok(())
    }

    fn class_sizes(&self) -> impl Iterator<Item = i64> + '_ {
        self.classes.iter().map(|c| c.len() as i64)
    }

    /// `|G| <a, b>` for integer-valued class functions.
    pub fn inner_times_order(&self, a: &[i64], b: &[i64]) -> i64 {
        self.class_sizes()
            .zip(a)
            .zip(b)
            .map(|((s, x), y)| s * x * y)
            .sum()
    }

    fn cyclotomic_order(&self) -> u32 {
        let mut n = 1u32;
        for c in self.complex.iter().flatten() {
            if let ComplexValues::Roots { order, .. } = c.values {
                n = lcm(n, order);
            }
        }
        n
    }

    /// Values as coefficient vectors in `Z[x]/(x^n - 1)`.
    fn cyclo_values(&self, c: &ComplexIrrep, n: u32) -> Vec<Vec<i64>> {
        (0..self.classes.len())
            .map(|k| {
                let mut v = vec![0i64; n as usize];
                match &c.values {
                    ComplexValues::Integer(x) => v[0] = x[k],
                    ComplexValues::Roots { order, exponents } => {
                        v[(exponents[k] * (n / order)) as usize % n as usize] = 1
                    }
                }
                v
            })
            .collect()
    }

    /// `|G| <a, b>` for cyclotomic-valued class functions, `None` when the
    /// result is not rational.
    fn complex_inner_times_order(&self, a: &[Vec<i64>], b: &[Vec<i64>], n: u32) -> Option<i64> {
        let n = n as usize;
        let mut acc = vec![0i64; n];
        for ((s, x), y) in self.class_sizes().zip(a).zip(b) {
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0 {
                    continue;
                }
                for (j, &yj) in y.iter().enumerate() {
                    if yj != 0 {
                        // conj(ζ^j) = ζ^{-j}
                        acc[(i + n - j) % n] += s * xi * yj;
                    }
                }
            }
        }
        let r = reduce_mod_cyclotomic(&acc, n);
        if r.iter().skip(1).any(|&c| c != 0) {
            None
        } else {
            Some(r.first().copied().unwrap_or(0))
        }
    }

    pub fn real_label(&self, label: &str) -> Option<&RealIrrep> {
        self.real.iter().find(|r| r.label == label)
    }

    /// Character of a degree, one value per class.
    pub fn character(&self, v: &RODegree) -> Result<Vec<i64>> {
        let mut out = vec![0i64; self.classes.len()];
        for (l, c) in v.terms() {
            let r = self.real_label(l).ok_or_else(|| {
                Error::Data(format!(
                    "{l:?} is not a real irreducible of {}",
                    self.group.name()
                ))
            })?;
            for (o, x) in out.iter_mut().zip(&r.values) {
                *o += c * x;
            }
        }
        Ok(out)
    }

    /// Decomposes an integer class function into real irreducibles.
    pub fn decompose(&self, values: &[i64]) -> Result<RODegree> {
        let order = self.group.order() as i64;
        let mut out = RODegree::zero();
        for r in &self.real {
            let ip = self.inner_times_order(values, &r.values);
            if ip % (order * r.norm) != 0 {
                return Err(Error::Table(format!(
                    "non-integral multiplicity {ip}/{} of {} in {}",
                    order * r.norm,
                    r.label,
                    self.group.name()
                )));
            }
            out.add_term(&r.label, ip / (order * r.norm));
        }
        if self.character(&out)? != values {
            return Err(Error::Table(format!(
                "class function is not a combination of the real irreducibles of {}",
                self.group.name()
            )));
        }
        Ok(out)
    }

    /// The regular representation: each irreducible with multiplicity
    /// `dim / <χ, χ>`.
    pub fn rho(&self) -> RODegree {
        let mut d = RODegree::zero();
        for r in &self.real {
            d.add_term(&r.label, r.dim / r.norm);
        }
        d
    }

    pub fn dimension(&self, v: &RODegree) -> Result<i64> {
        let id_class = self.class_of[self.group.identity()];
        Ok(self.character(v)?[id_class])
    }

    /// Parses expressions such as `2*rho - sigma` or `3 + rho`; bare integers
    /// are multiples of the trivial representation.
    pub fn parse_degree(&self, expr: &str) -> Result<RODegree> {
        parse_degree_with(expr, |name| {
            if name == RHO {
                Some(self.rho())
            } else {
                self.real_label(name).map(|r| RODegree::term(&r.label, 1))
            }
        })
    }

    /// Transports this table to a group isomorphic to ours; `iso` maps the
    /// new group's elements to ours.
    pub fn transport(&self, group: Arc<FiniteGroup>, iso: &[usize]) -> CharacterTable {
        let mut classes = vec![Vec::new(); self.classes.len()];
        let mut class_of = vec![0; group.order()];
        for x in 0..group.order() {
            let c = self.class_of[iso[x]];
            classes[c].push(x);
            class_of[x] = c;
        }
        CharacterTable {
            group,
            classes,
            class_of,
            real: self.real.clone(),
            complex: self.complex.clone(),
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

/// Integer coefficients of the n-th cyclotomic polynomial, lowest first.
pub fn cyclotomic_poly(n: usize) -> Vec<i64> {
    // x^n - 1 divided by Φ_d for every proper divisor d.
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = poly_div_exact(&num, &cyclotomic_poly(d));
        }
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dl = den.len() - 1;
    let mut q = vec![0i64; num.len() - dl];
    for i in (0..q.len()).rev() {
        let c = rem[i + dl];
        q[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    q
}

/// Remainder of a polynomial (length n, lowest first) modulo Φ_n.
fn reduce_mod_cyclotomic(a: &[i64], n: usize) -> Vec<i64> {
    let phi = cyclotomic_poly(n);
    let deg = phi.len() - 1;
    let mut r = a.to_vec();
    for i in (deg..r.len()).rev() {
        let c = r[i];
        if c != 0 {
            for (j, &d) in phi.iter().enumerate() {
                r[i - deg + j] -= c * d;
            }
        }
    }
    r.truncate(deg.max(1));
    r
}

/// Parses `a*name + b*name - ...` with a resolver for names.
pub fn parse_degree_with(
    expr: &str,
    resolve: impl Fn(&str) -> Option<RODegree>,
) -> Result<RODegree> {
    let bad = |m: String| Error::Data(format!("degree expression {expr:?}: {m}"));
    let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad("empty".into()));
    }
    let mut out = RODegree::zero();
    let mut rest = s.as_str();
    let mut first = true;
    while !rest.is_empty() {
        let sign = if let Some(r) = rest.strip_prefix('+') {
            rest = r;
            1
        } else if let Some(r) = rest.strip_prefix('-') {
            rest = r;
            -1
        } else if first {
            1
        } else {
            return Err(bad(format!("expected + or - before {rest:?}")));
        };
        first = false;
        let end = rest.find(['+', '-']).unwrap_or(rest.len());
        let term = &rest[..end];
        rest = &rest[end..];
        let (coef, name) = match term.split_once('*') {
            Some((c, n)) => (
                c.parse::<i64>()
                    .map_err(|_| bad(format!("bad coefficient {c:?}")))?,
                Some(n),
            ),
            None => match term.parse::<i64>() {
                Ok(c) => (c, None),
                Err(_) => (1, Some(term)),
            },
        };
        match name {
            None => out.add_term(TRIVIAL, sign * coef),
            Some(n) => {
                let d = resolve(n).ok_or_else(|| bad(format!("unknown representation {n:?}")))?;
                out += &(&d * (sign * coef));
            }
        }
    }
    Ok(out)
}

/// One-dimensional characters as homomorphisms to `Z/modulus`, recorded by
/// their exponent on each class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Irr1Set {
    pub modulus: u32,
    pub characters: Vec<(String, Vec<u32>)>,
}

impl Irr1Set {
    pub fn labels(&self) -> Vec<&str> {
        self.characters.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.characters.iter().any(|(l, _)| l == label)
    }

    /// Pointwise product of two members, if it is again a member.
    pub fn product(&self, a: &str, b: &str) -> Option<&str> {
        let va = &self.characters.iter().find(|(l, _)| l == a)?.1;
        let vb = &self.characters.iter().find(|(l, _)| l == b)?.1;
        let prod: Vec<u32> = va
            .iter()
            .zip(vb)
            .map(|(x, y)| (x + y) % self.modulus)
            .collect();
        self.characters
            .iter()
            .find(|(_, v)| *v == prod)
            .map(|(l, _)| l.as_str())
    }

    /// Closed under pointwise products and contains the trivial character.
    pub fn is_group(&self) -> bool {
        let has_unit = self
            .characters
            .iter()
            .any(|(_, v)| v.iter().all(|&x| x == 0));
        has_unit
            && self.characters.iter().all(|(a, _)| {
                self.characters
                    .iter()
                    .all(|(b, _)| self.product(a, b).is_some())
            })
    }
}

/// Real one-dimensional irreducibles, i.e. the homomorphisms `G -> {±1}`.
pub fn irr1(t: &CharacterTable) -> Irr1Set {
    let characters = t
        .real
        .iter()
        .filter(|r| r.dim == 1)
        .map(|r| {
            (
                r.label.clone(),
                r.values.iter().map(|&v| u32::from(v < 0)).collect(),
            )
        })
        .collect();
    Irr1Set {
        modulus: 2,
        characters,
    }
}

/// Complex linear characters with values in the p-th roots of unity,
/// including the trivial character.
pub fn tilde_irr1(t: &CharacterTable, p: u32) -> Result<Irr1Set> {
    let cx = t
        .complex
        .as_ref()
        .ok_or_else(|| Error::Data(format!("no complex character table for {}", t.group.name())))?;
    let mut characters = Vec::new();
    for c in cx.iter().filter(|c| c.dim == 1) {
        let exps: Option<Vec<u32>> = match &c.values {
            ComplexValues::Integer(v) => v
                .iter()
                .map(|&x| match x {
                    1 => Some(0),
                    -1 if p == 2 => Some(1),
                    _ => None,
                })
                .collect(),
            ComplexValues::Roots { order, exponents } => exponents
                .iter()
                .map(|&e| {
                    ((e as u64 * p as u64) % *order as u64 == 0)
                        .then(|| (e as u64 * p as u64 / *order as u64) as u32)
                })
                .collect(),
        };
        if let Some(e) = exps {
            characters.push((c.label.clone(), e));
        }
    }
    Ok(Irr1Set {
        modulus: p,
        characters,
    })
}

/// Multiplicity of each complex linear character of `set` in `V ⊗ C`.
fn complex_multiplicities(
    t: &CharacterTable,
    v: &RODegree,
    set: &Irr1Set,
) -> Result<Vec<(String, i64)>> {
    let chi = t.character(v)?;
    let cx = t
        .complex
        .as_ref()
        .ok_or_else(|| Error::Data("no complex table".into()))?;
    let n = t.cyclotomic_order();
    let mut out = Vec::new();
    for (label, _) in &set.characters {
        let c = cx.iter().find(|c| &c.label == label).unwrap();
        let lam = t.cyclo_values(c, n);
        let chi_c: Vec<Vec<i64>> = chi
            .iter()
            .map(|&x| {
                let mut v = vec![0i64; n as usize];
                v[0] = x;
                v
            })
            .collect();
        let ip = t
            .complex_inner_times_order(&chi_c, &lam, n)
            .ok_or_else(|| Error::Table(format!("irrational multiplicity of {label}")))?;
        let order = t.group.order() as i64;
        if ip % order != 0 {
            return Err(Error::Table(format!(
                "non-integral multiplicity of {label}"
            )));
        }
        out.push((label.clone(), ip / order));
    }
    Ok(out)
}

/// Restriction along an inclusion `K -> G`, decomposed over K's table.
pub fn restrict_deg(
    g: &CharacterTable,
    k: &CharacterTable,
    inclusion: &GroupHom,
    v: &RODegree,
) -> Result<RODegree> {
    if inclusion.source.order() != k.group.order() || inclusion.target.order() != g.group.order() {
        return Err(Error::Structure(
            "inclusion does not match the tables".into(),
        ));
    }
    let chi = g.character(v)?;
    let values: Vec<i64> = k
        .classes
        .iter()
        .map(|c| chi[g.class_of[inclusion.apply(c[0])]])
        .collect();
    k.decompose(&values)
}

/// `V^K` as a representation of `W(K)`; the character at `nK` is the
/// average of `χ_V` over the coset.
pub fn fixed_deg(
    g: &CharacterTable,
    w: &CharacterTable,
    weyl: &WeylGroup,
    k: &Subgroup,
    v: &RODegree,
) -> Result<RODegree> {
    if w.group.order() != weyl.group.order() {
        return Err(Error::Structure(
            "Weyl table does not match the Weyl group".into(),
        ));
    }
    let chi = g.character(v)?;
    let mut coset_rep = vec![usize::MAX; weyl.group.order()];
    for &x in weyl.normalizer.members() {
        let c = weyl.coset_of[x].unwrap();
        if coset_rep[c] == usize::MAX {
            coset_rep[c] = x;
        }
    }
    let grp = &g.group;
    let mut values = Vec::new();
    for class in &w.classes {
        let n = coset_rep[class[0]];
        let sum: i64 = k
            .members()
            .iter()
            .map(|&y| chi[g.class_of[grp.mul(n, y)]])
            .sum();
        if sum % k.order() as i64 != 0 {
            return Err(Error::Table(format!(
                "fixed-point character is not integral ({sum}/{})",
                k.order()
            )));
        }
        values.push(sum / k.order() as i64);
    }
    w.decompose(&values)
}

/// Dimension of `V^K` straight from the character: `(1/|K|) Σ χ_V(k)`.
pub fn fixed_dimension(g: &CharacterTable, k: &Subgroup, v: &RODegree) -> Result<i64> {
    let chi = g.character(v)?;
    let sum: i64 = k.members().iter().map(|&y| chi[g.class_of[y]]).sum();
    if sum % k.order() as i64 != 0 {
        return Err(Error::Table(format!(
            "fixed dimension {sum}/{} is not integral",
            k.order()
        )));
    }
    Ok(sum / k.order() as i64)
}

/// `(p-1)/2` for even `|G|`, `p-1` for odd `|G|`; 1 when `p = 2`.
pub fn epsilon(group_order: usize, p: u32) -> u32 {
    if p == 2 {
        1
    } else if group_order % 2 == 0 {
        (p - 1) / 2
    } else {
        p - 1
    }
}

/// 2 exactly when p is odd and `|G|` is odd.
pub fn orientability_fold(group_order: usize, p: u32) -> u32 {
    if p != 2 && group_order % 2 == 1 {
        2
    } else {
        1
    }
}

/// Degree of the Euler class: ρ at p = 2, `fold·(p-1)·ρ = 2ε·ρ` otherwise.
pub fn euler_degree(t: &CharacterTable, p: u32) -> RODegree {
    let rho = t.rho();
    if p == 2 {
        rho
    } else {
        &rho * (orientability_fold(t.group.order(), p) * (p - 1)) as i64
    }
}

/// Whether every irreducible in `w` occurs in `vgen`.
pub fn ro_subring_member(vgen: &RODegree, w: &RODegree) -> Result<bool> {
    if vgen.is_virtual() {
        return Err(Error::Precondition(format!("generator {vgen} is virtual")));
    }
    Ok(w.labels().all(|l| vgen.coeff(l) > 0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Projective,
    Lens(u32),
}

/// The one-dimensional characters with a nonzero isotypic part in `V`
/// (real, for projective spaces) or in `V ⊗ C` (lens spaces), each giving
/// one path component of the fixed points.
pub fn fixed_components(
    t: &CharacterTable,
    v: &RODegree,
    space: Space,
) -> Result<Vec<(String, i64)>> {
    if v.is_virtual() {
        return Err(Error::Precondition(format!("{v} is virtual")));
    }
    match space {
        Space::Projective => {
            let set = irr1(t);
            Ok(set
                .characters
                .iter()
                .map(|(l, _)| (l.clone(), v.coeff(l)))
                .filter(|(_, m)| *m != 0)
                .collect())
        }
        Space::Lens(p) => {
            if p == 2 || !crate::fp::is_prime(p as u64) {
                return Err(Error::Precondition(format!(
                    "lens spaces need an odd prime, got {p}"
                )));
            }
            let set = tilde_irr1(t, p)?;
            Ok(complex_multiplicities(t, v, &set)?
                .into_iter()
                .filter(|(_, m)| *m != 0)
                .collect())
        }
    }
}

/// `dim H_0` of the fixed points: one per component, plus one when the
/// transfer from the underlying space is injective.
pub fn h0_dimension(fixed_components: usize, transfer_injective: bool) -> usize {
    fixed_components + usize::from(transfer_injective)
}

/// Shipped groups with their tables, used to recognise subgroups and Weyl
/// groups up to isomorphism.
#[derive(Clone, Debug, Default)]
pub struct Library {
    pub groups: Vec<Arc<FiniteGroup>>,
    pub tables: BTreeMap<String, Arc<CharacterTable>>,
}

impl Library {
    /// Loads `groups/*.json` and, where present, `tables/<name>.json`.
    pub fn load(dir: &Path) -> Result<Library> {
        let gdir = dir.join("groups");
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&gdir)
            .map_err(|source| Error::Io {
                path: gdir.display().to_string(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut lib = Library::default();
        for p in paths {
            let g = Arc::new(fingroup::load_group(&p)?);
            let tp = dir.join("tables").join(format!("{}.json", g.name()));
            if tp.exists() {
                let t = CharacterTable::load(&tp, g.clone())?;
                lib.tables.insert(g.name().to_string(), Arc::new(t));
            }
            lib.groups.push(g);
        }
        Ok(lib)
    }

    pub fn load_default() -> Result<Library> {
        Self::load(&crate::instances::data_dir())
    }

    pub fn group(&self, name: &str) -> Result<Arc<FiniteGroup>> {
        self.groups
            .iter()
            .find(|g| g.name() == name)
            .cloned()
            .ok_or_else(|| Error::Data(format!("no shipped group named {name:?}")))
    }

    pub fn table(&self, name: &str) -> Result<Arc<CharacterTable>> {
        self.tables
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Data(format!("no character table for {name:?}")))
    }

    /// A table for an arbitrary group, transported from an isomorphic
    /// shipped group. The returned name is that shipped group's.
    pub fn identify(&self, h: &Arc<FiniteGroup>) -> Result<(String, CharacterTable)> {
        for (name, t) in &self.tables {
            if let Some(iso) = fingroup::isomorphism(h, &t.group) {
                return Ok((name.clone(), t.transport(h.clone(), &iso)));
            }
        }
        Err(Error::Data(format!(
            "no shipped table for a group of order {}",
            h.order()
        )))
    }
}

/// A subgroup of a tabulated group with everything needed to move degrees
/// and labels down to it and to its Weyl group.
#[derive(Clone, Debug)]
pub struct SubgroupData {
    pub subgroup: Subgroup,
    /// Name of the shipped group K is isomorphic to.
    pub name: String,
    pub table: CharacterTable,
    pub inclusion: GroupHom,
    pub weyl: WeylGroup,
    pub weyl_name: String,
    pub weyl_table: CharacterTable,
}

impl SubgroupData {
    pub fn new(lib: &Library, k: &Subgroup) -> Result<SubgroupData> {
        let (kg, inclusion) = k.as_group("K")?;
        let (name, table) = lib.identify(&kg)?;
        let weyl = fingroup::weyl(k)?;
        let (weyl_name, weyl_table) = lib.identify(&weyl.group)?;
        Ok(SubgroupData {
            subgroup: k.clone(),
            name,
            table,
            inclusion,
            weyl,
            weyl_name,
            weyl_table,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lib() -> Library {
        Library::load_default().unwrap()
    }

    fn sub(lib: &Library, g: &str, order: usize) -> SubgroupData {
        let t = lib.table(g).unwrap();
        let k = fingroup::subgroups_up_to_conjugacy(&t.group)
            .unwrap()
            .into_iter()
            .find(|s| s.order() == order)
            .unwrap();
        SubgroupData::new(lib, &k).unwrap()
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
    }

    #[test]
    fn irr1_examples() {
        let lib = lib();
        assert_eq!(irr1(&lib.table("C2").unwrap()).len(), 2);
        assert_eq!(irr1(&lib.table("C3").unwrap()).len(), 1);
        let v4 = irr1(&lib.table("C2xC2").unwrap());
        assert_eq!(v4.len(), 4);
        assert!(v4.is_group());
    }

    #[test]
    fn tilde_irr1_examples() {
        let lib = lib();
        assert_eq!(tilde_irr1(&lib.table("C3").unwrap(), 3).unwrap().len(), 3);
        assert_eq!(
            tilde_irr1(&lib.table("C2").unwrap(), 3).unwrap().labels(),
            vec!["1"]
        );
        assert_eq!(
            tilde_irr1(&lib.table("S3").unwrap(), 3).unwrap().labels(),
            vec!["1"]
        );
        assert!(tilde_irr1(&lib.table("C3").unwrap(), 3).unwrap().is_group());
    }

    #[test]
    fn restriction_examples() {
        let lib = lib();
        let c4 = lib.table("C4").unwrap();
        let k = sub(&lib, "C4", 2);
        let r = restrict_deg(&c4, &k.table, &k.inclusion, &c4.rho()).unwrap();
        assert_eq!(r, &k.table.rho() * 2);
        let s3 = lib.table("S3").unwrap();
        let c3 = sub(&lib, "S3", 3);
        let r = restrict_deg(&s3, &c3.table, &c3.inclusion, &RODegree::term("sgn", 1)).unwrap();
        assert_eq!(r, RODegree::trivial(1));
        let e = sub(&lib, "S3", 1);
        let r = restrict_deg(&s3, &e.table, &e.inclusion, &(&s3.rho() * 3)).unwrap();
        assert_eq!(r, RODegree::trivial(18));
    }

    #[test]
    fn fixed_examples() {
        let lib = lib();
        let c2 = lib.table("C2").unwrap();
        let k = sub(&lib, "C2", 2);
        let f = fixed_deg(
            &c2,
            &k.weyl_table,
            &k.weyl,
            &k.subgroup,
            &RODegree::term("sigma", 1),
        )
        .unwrap();
        assert!(f.is_zero());
        let s3 = lib.table("S3").unwrap();
        for order in [1, 2, 3, 6] {
            let k = sub(&lib, "S3", order);
            let f = fixed_deg(&s3, &k.weyl_table, &k.weyl, &k.subgroup, &s3.rho()).unwrap();
            let index = 6 / k.weyl.normalizer.order() as i64;
            assert_eq!(f, &k.weyl_table.rho() * index, "K of order {order}");
        }
    }

    #[test]
    fn parse_degrees() {
        let lib = lib();
        let c2 = lib.table("C2").unwrap();
        assert_eq!(
            c2.parse_degree("2*rho - sigma").unwrap(),
            RODegree::from_terms([("1", 2), ("sigma", 1)])
        );
        assert_eq!(c2.parse_degree("3").unwrap(), RODegree::trivial(3));
        assert!(c2.parse_degree("tau").is_err());
    }

    #[test]
    fn euler_degrees() {
        let lib = lib();
        let c2 = lib.table("C2").unwrap();
        let c3 = lib.table("C3").unwrap();
        assert_eq!(euler_degree(&c2, 2), c2.rho());
        assert_eq!(euler_degree(&c2, 3), &c2.rho() * 2);
        assert_eq!(euler_degree(&c3, 3), &c3.rho() * 4);
    }

    #[test]
    fn components() {
        let lib = lib();
        let c2 = lib.table("C2").unwrap();
        let c3 = lib.table("C3").unwrap();
        assert_eq!(
            fixed_components(&c2, &c2.rho(), Space::Projective)
                .unwrap()
                .len(),
            2
        );
        assert_eq!(
            fixed_components(&c3, &c3.rho(), Space::Projective)
                .unwrap()
                .len(),
            1
        );
        let v = &c3.rho() * epsilon(3, 3) as i64;
        assert_eq!(fixed_components(&c3, &v, Space::Lens(3)).unwrap().len(), 3);
        assert!(fixed_components(&c3, &v, Space::Lens(2)).is_err());
    }

    #[test]
    fn bad_table_is_rejected() {
        let g = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let text = r#"{"group":"C2","classes":[{"representative":0,"size":1},{"representative":1,"size":1}],
            "real":[{"label":"1","values":[1,1]},{"label":"sigma","values":[1,1]}]}"#;
        assert!(matches!(
            CharacterTable::parse("t", text, g),
            Err(Error::Table(_))
        ));
    }
}
