//! RO(G)-graded basis modules over F_p with cup, cap and Kronecker pairings.
//!
//! A module is a finite list of labelled basis elements, each with a degree.
//! Pairings are partial: a missing table entry means "not known inside the
//! window" and surfaces as [`Error::Window`], while an entry with an empty
//! result is a genuine zero.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::{Matrix, Solver};
use crate::repring::parse_degree_with;
use crate::rodegree::RODegree;
use crate::{Error, Fp, Result};

/// Sparse vector over a module basis; coefficients are nonzero.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Element(BTreeMap<usize, u32>);

impl Element {
    pub fn zero() -> Element {
        Element(BTreeMap::new())
    }

    pub fn basis(i: usize) -> Element {
        Element(BTreeMap::from([(i, 1)]))
    }

    pub fn from_terms(f: Fp, terms: impl IntoIterator<Item = (usize, u32)>) -> Element {
        let mut e = Element::zero();
        for (i, c) in terms {
            e.add_term(f, i, c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.0.get(&i).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|(&i, &c)| (i, c))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, f: Fp, i: usize, c: u32) {
        let c = c % f.p();
        if c == 0 {
            return;
        }
        let e = self.0.entry(i).or_insert(0);
        *e = f.add(*e, c);
        if *e == 0 {
            self.0.remove(&i);
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, f: Fp, other: &Element, c: u32) {
        if c % f.p() == 0 {
            return;
        }
        for (i, x) in other.terms() {
            self.add_term(f, i, f.mul(x, c));
        }
    }

    pub fn scaled(&self, f: Fp, c: u32) -> Element {
        let mut out = Element::zero();
        out.add_scaled(f, self, c);
        out
    }

    pub fn plus(&self, f: Fp, other: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(f, other, 1);
        out
    }

    pub fn minus(&self, f: Fp, other: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(f, other, f.p() - 1);
        out
    }

    /// Dense coordinates along `slice`; entries off the slice are dropped.
    pub fn to_dense(&self, slice: &[usize]) -> Vec<u32> {
        slice.iter().map(|&i| self.coeff(i)).collect()
    }

    pub fn from_dense(f: Fp, slice: &[usize], v: &[u32]) -> Element {
        Element::from_terms(f, slice.iter().copied().zip(v.iter().copied()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElement {
    pub label: String,
    pub degree: RODegree,
}

/// Which degrees are completely present in a truncated module.
#[derive(Clone, Default)]
pub enum Window {
    /// Every degree is complete.
    #[default]
    All,
    /// Complete exactly when the coefficient of `label` is at most `max`.
    UpTo { label: String, max: i64 },
    Predicate {
        description: String,
        test: Arc<dyn Fn(&RODegree) -> bool + Send + Sync>,
    },
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::All => write!(f, "all"),
            Window::UpTo { label, max } => write!(f, "degree[{label}] <= {max}"),
            Window::Predicate { description, .. } => write!(f, "{description}"),
        }
    }
}

impl Window {
    pub fn contains(&self, d: &RODegree) -> bool {
        match self {
            Window::All => true,
            Window::UpTo { label, max } => d.coeff(label) <= *max,
            Window::Predicate { test, .. } => test(d),
        }
    }
}

/// Behaviour on degree mismatches in Kronecker pairings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    Lenient,
}

/// A finite graded basis over F_p.
#[derive(Clone, Debug)]
pub struct GradedModule {
    name: String,
    field: Fp,
    basis: Vec<BasisElement>,
    index: HashMap<String, usize>,
    slices: BTreeMap<RODegree, Vec<usize>>,
    pub window: Window,
}

impl GradedModule {
    pub fn new(
        name: &str,
        field: Fp,
        basis: Vec<BasisElement>,
        window: Window,
    ) -> Result<GradedModule> {
        let mut index = HashMap::with_capacity(basis.len());
        let mut slices: BTreeMap<RODegree, Vec<usize>> = BTreeMap::new();
        for (i, b) in basis.iter().enumerate() {
            if index.insert(b.label.clone(), i).is_some() {
                return Err(Error::Data(format!(
                    "{name}: duplicate basis label {:?}",
                    b.label
                )));
            }
            slices.entry(b.degree.clone()).or_default().push(i);
        }
        Ok(GradedModule {
            name: name.to_string(),
            field,
            basis,
            index,
            slices,
            window,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn label(&self, i: usize) -> &str {
        &self.basis[i].label
    }

    pub fn degree(&self, i: usize) -> &RODegree {
        &self.basis[i].degree
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::Data(format!("{}: no basis element {label:?}", self.name)))
    }

    /// Basis indices of one degree, in basis order.
    pub fn slice(&self, d: &RODegree) -> &[usize] {
        self.slices.get(d).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degrees(&self) -> impl Iterator<Item = &RODegree> {
        self.slices.keys()
    }

    pub fn in_window(&self, d: &RODegree) -> bool {
        self.window.contains(d)
    }

    pub fn element(&self, terms: &[(&str, i64)]) -> Result<Element> {
        let f = self.field;
        let mut e = Element::zero();
        for &(l, c) in terms {
            e.add_term(f, self.require(l)?, f.reduce(c));
        }
        Ok(e)
    }

    pub fn element_owned(&self, terms: &[(String, i64)]) -> Result<Element> {
        let borrowed: Vec<(&str, i64)> = terms.iter().map(|(l, c)| (l.as_str(), *c)).collect();
        self.element(&borrowed)
    }

    /// Degree of a homogeneous element; `None` for zero.
    pub fn degree_of(&self, e: &Element) -> Result<Option<RODegree>> {
        let mut it = e.support();
        let Some(first) = it.next() else {
            return Ok(None);
        };
        let d = self.degree(first);
        for i in it {
            if self.degree(i) != d {
                return Err(Error::Degree(format!(
                    "{}: inhomogeneous element {} mixes degrees {} and {}",
                    self.name,
                    self.format(e),
                    d,
                    self.degree(i)
                )));
            }
        }
        Ok(Some(d.clone()))
    }

    /// Human-readable form such as `b3 + 2*c5`, with `0` for zero.
    pub fn format(&self, e: &Element) -> String {
        if e.is_zero() {
            return "0".into();
        }
        e.terms()
            .map(|(i, c)| {
                if c == 1 {
                    self.label(i).to_string()
                } else {
                    format!("{c}*{}", self.label(i))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn to_pairs(&self, e: &Element) -> Vec<(String, i64)> {
        e.terms()
            .map(|(i, c)| (self.label(i).to_string(), c as i64))
            .collect()
    }
}

/// Parses a degree written with plain representation labels.
pub fn parse_plain_degree(expr: &str) -> Result<RODegree> {
    parse_degree_with(expr, |name| {
        (name != crate::repring::RHO).then(|| RODegree::term(name, 1))
    })
}

/// Degree of the slant product of a class in cohomological degree `w` by a
/// class in homological degree `v`. The engine's convention is `W - V`.
pub fn slant_degree(w: &RODegree, v: &RODegree) -> RODegree {
    w - v
}

/// A homology module and its partner cohomology module with their pairings.
pub trait Pairing: Send + Sync {
    fn homology(&self) -> &GradedModule;
    fn cohomology(&self) -> &GradedModule;
    /// `b_x ⌢ b_e`, `None` when unknown.
    fn cap_basis(&self, x: usize, e: usize) -> Option<Element>;
    /// `b_a ⌣ b_b` in the cohomology module, `None` when unknown.
    fn cup_basis(&self, a: usize, b: usize) -> Option<Element>;
    /// `<b_ξ, b_x>`; zero off the table.
    fn kron_basis(&self, xi: usize, x: usize) -> u32;
    /// Unit of the cohomology ring, when it is in the basis.
    fn unit(&self) -> Option<usize>;

    fn mode(&self) -> Mode {
        Mode::Strict
    }

    fn field(&self) -> Fp {
        self.homology().field()
    }

    fn cap(&self, x: &Element, e: &Element) -> Result<Element> {
        let f = self.field();
        let mut out = Element::zero();
        for (i, a) in x.terms() {
            for (j, b) in e.terms() {
                let r = self.cap_basis(i, j).ok_or_else(|| {
                    Error::Window(format!(
                        "{} ⌢ {} is not determined by the presented data",
                        self.homology().label(i),
                        self.cohomology().label(j)
                    ))
                })?;
                out.add_scaled(f, &r, f.mul(a, b));
            }
        }
        Ok(out)
    }

    fn cup(&self, a: &Element, b: &Element) -> Result<Element> {
        let f = self.field();
        let mut out = Element::zero();
        for (i, x) in a.terms() {
            for (j, y) in b.terms() {
                let r = self.cup_basis(i, j).ok_or_else(|| {
                    Error::Window(format!(
                        "{} ⌣ {} is not determined by the presented data",
                        self.cohomology().label(i),
                        self.cohomology().label(j)
                    ))
                })?;
                out.add_scaled(f, &r, f.mul(x, y));
            }
        }
        Ok(out)
    }

    fn kron(&self, xi: &Element, x: &Element) -> Result<u32> {
        let (dxi, dx) = (
            self.cohomology().degree_of(xi)?,
            self.homology().degree_of(x)?,
        );
        if let (Some(a), Some(b)) = (&dxi, &dx) {
            if a != b {
                return match self.mode() {
                    Mode::Strict => Err(Error::Degree(format!(
                        "Kronecker pairing of degree {a} with degree {b}"
                    ))),
                    Mode::Lenient => Ok(0),
                };
            }
        }
        let f = self.field();
        let mut acc = 0;
        for (i, a) in xi.terms() {
            for (j, b) in x.terms() {
                acc = f.add(acc, f.mul(f.mul(a, b), self.kron_basis(i, j)));
            }
        }
        Ok(acc)
    }

    /// `e ⌣ e ⌣ ... ⌣ e` (k factors); the unit when k = 0.
    fn cup_power(&self, e: &Element, k: usize) -> Result<Element> {
        if k == 0 {
            let u = self
                .unit()
                .ok_or_else(|| Error::Data("cohomology has no unit in its basis".into()))?;
            return Ok(Element::basis(u));
        }
        let mut acc = e.clone();
        for _ in 1..k {
            acc = self.cup(&acc, e)?;
        }
        Ok(acc)
    }
}

/// Pairings given by explicit tables.
#[derive(Clone, Debug)]
pub struct TablePresentation {
    pub homology: GradedModule,
    pub cohomology: GradedModule,
    pub unit: Option<usize>,
    pub cup: HashMap<(usize, usize), Element>,
    pub cap: HashMap<(usize, usize), Element>,
    pub kron: HashMap<(usize, usize), u32>,
    pub mode: Mode,
}

impl Pairing for TablePresentation {
    fn homology(&self) -> &GradedModule {
        &self.homology
    }
    fn cohomology(&self) -> &GradedModule {
        &self.cohomology
    }
    fn cap_basis(&self, x: usize, e: usize) -> Option<Element> {
        self.cap.get(&(x, e)).cloned()
    }
    fn cup_basis(&self, a: usize, b: usize) -> Option<Element> {
        self.cup.get(&(a, b)).cloned()
    }
    fn kron_basis(&self, xi: usize, x: usize) -> u32 {
        self.kron.get(&(xi, x)).copied().unwrap_or(0)
    }
    fn unit(&self) -> Option<usize> {
        self.unit
    }
    fn mode(&self) -> Mode {
        self.mode
    }
}

/// JSON form of a basis element.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub label: String,
    pub degree: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub result: Vec<(String, i64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KronEntry {
    pub left: String,
    pub right: String,
    pub value: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSpec {
    All,
    UpTo { label: String, max: i64 },
}

/// JSON form of a [`TablePresentation`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuleFile {
    pub name: String,
    pub prime: u32,
    pub window: WindowSpec,
    #[serde(default)]
    pub mode: Mode,
    pub homology: Vec<BasisEntry>,
    pub cohomology: Vec<BasisEntry>,
    pub unit: Option<String>,
    #[serde(default)]
    pub cup: Vec<ProductEntry>,
    #[serde(default)]
    pub cap: Vec<ProductEntry>,
    #[serde(default)]
    pub kron: Vec<KronEntry>,
}

impl ModuleFile {
    /// Builds the presentation and runs the hard load-time checks:
    /// labels resolve and every table entry is degree homogeneous.
    pub fn build(&self) -> Result<TablePresentation> {
        let field = Fp::new(self.prime)
            .ok_or_else(|| Error::Data(format!("{}: {} is not prime", self.name, self.prime)))?;
        let window = match &self.window {
            WindowSpec::All => Window::All,
            WindowSpec::UpTo { label, max } => Window::UpTo {
                label: label.clone(),
                max: *max,
            },
        };
        let basis = |entries: &[BasisEntry]| -> Result<Vec<BasisElement>> {
            entries
                .iter()
                .map(|b| {
                    Ok(BasisElement {
                        label: b.label.clone(),
                        degree: parse_plain_degree(&b.degree)?,
                    })
                })
                .collect()
        };
        let homology = GradedModule::new(
            &format!("{}:H_*", self.name),
            field,
            basis(&self.homology)?,
            window.clone(),
        )?;
        let cohomology = GradedModule::new(
            &format!("{}:H^*", self.name),
            field,
            basis(&self.cohomology)?,
            window,
        )?;
        let unit = self
            .unit
            .as_deref()
            .map(|u| cohomology.require(u))
            .transpose()?;
        let mut cup = HashMap::new();
        for t in &self.cup {
            let (a, b) = (cohomology.require(&t.left)?, cohomology.require(&t.right)?);
            let r = cohomology.element_owned(&t.result)?;
            let expect = cohomology.degree(a) + cohomology.degree(b);
            check_homogeneous(&cohomology, &r, &expect, || {
                format!("cup {} ⌣ {}", t.left, t.right)
            })?;
            cup.insert((a, b), r);
        }
        let mut cap = HashMap::new();
        for t in &self.cap {
            let (x, e) = (homology.require(&t.left)?, cohomology.require(&t.right)?);
            let r = homology.element_owned(&t.result)?;
            let expect = homology.degree(x) - cohomology.degree(e);
            check_homogeneous(&homology, &r, &expect, || {
                format!("cap {} ⌢ {}", t.left, t.right)
            })?;
            cap.insert((x, e), r);
        }
        let mut kron = HashMap::new();
        for t in &self.kron {
            let (xi, x) = (cohomology.require(&t.left)?, homology.require(&t.right)?);
            let v = field.reduce(t.value);
            if v != 0 && cohomology.degree(xi) != homology.degree(x) {
                return Err(Error::Degree(format!(
                    "{}: kron <{}, {}> is nonzero across degrees",
                    self.name, t.left, t.right
                )));
            }
            if v != 0 {
                kron.insert((xi, x), v);
            }
        }
        Ok(TablePresentation {
            homology,
            cohomology,
            unit,
            cup,
            cap,
            kron,
            mode: self.mode,
        })
    }

    /// Serializes a presentation back into file form, tables sorted.
    pub fn from_presentation(name: &str, p: &TablePresentation, window: WindowSpec) -> ModuleFile {
        let entries = |m: &GradedModule| -> Vec<BasisEntry> {
            m.basis()
                .iter()
                .map(|b| BasisEntry {
                    label: b.label.clone(),
                    degree: b.degree.to_string(),
                })
                .collect()
        };
        let products = |t: &HashMap<(usize, usize), Element>,
                        lm: &GradedModule,
                        rm: &GradedModule,
                        om: &GradedModule| {
            let mut keys: Vec<&(usize, usize)> = t.keys().collect();
            keys.sort();
            keys.into_iter()
                .map(|&(a, b)| ProductEntry {
                    left: lm.label(a).to_string(),
                    right: rm.label(b).to_string(),
                    result: om.to_pairs(&t[&(a, b)]),
                })
                .collect::<Vec<_>>()
        };
        let mut kk: Vec<&(usize, usize)> = p.kron.keys().collect();
        kk.sort();
        ModuleFile {
            name: name.to_string(),
            prime: p.homology.field().p(),
            window,
            mode: p.mode,
            homology: entries(&p.homology),
            cohomology: entries(&p.cohomology),
            unit: p.unit.map(|u| p.cohomology.label(u).to_string()),
            cup: products(&p.cup, &p.cohomology, &p.cohomology, &p.cohomology),
            cap: products(&p.cap, &p.homology, &p.cohomology, &p.homology),
            kron: kk
                .into_iter()
                .map(|&(a, b)| KronEntry {
                    left: p.cohomology.label(a).to_string(),
                    right: p.homology.label(b).to_string(),
                    value: p.kron[&(a, b)] as i64,
                })
                .collect(),
        }
    }
}

fn check_homogeneous(
    m: &GradedModule,
    r: &Element,
    expect: &RODegree,
    what: impl Fn() -> String,
) -> Result<()> {
    for i in r.support() {
        if m.degree(i) != expect {
            return Err(Error::Degree(format!(
                "{}: {} has a term {} in degree {}, expected {expect}",
                m.name(),
                what(),
                m.label(i),
                m.degree(i)
            )));
        }
    }
    Ok(())
}

/// Outcome of the algebraic consistency checks on a presentation.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub associativity_checked: usize,
    pub adjunction_checked: usize,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `(x ⌢ e1) ⌢ e2 = x ⌢ (e1 ⌣ e2)` and `<ξ ⌣ η, x> = <ξ, x ⌢ η>`
/// wherever every ingredient is defined. `probes` restricts the cohomology
/// elements used as `e1, e2, η`; `None` uses the whole basis.
pub fn validate_pairing(p: &dyn Pairing, probes: Option<&[usize]>) -> ValidationReport {
    let h = p.homology();
    let c = p.cohomology();
    let all: Vec<usize> = (0..c.len()).collect();
    let probes = probes.unwrap_or(&all);
    let f = p.field();
    let mut report = ValidationReport::default();
    for x in 0..h.len() {
        for &e1 in probes {
            let Some(xe1) = p.cap_basis(x, e1) else {
                continue;
            };
            for &e2 in probes {
                let Some(prod) = p.cup_basis(e1, e2) else {
                    continue;
                };
                let Ok(lhs) = p.cap(&xe1, &Element::basis(e2)) else {
                    continue;
                };
                let Ok(rhs) = p.cap(&Element::basis(x), &prod) else {
                    continue;
                };
                report.associativity_checked += 1;
                if lhs != rhs && report.failures.len() < 20 {
                    report.failures.push(format!(
                        "({} ⌢ {}) ⌢ {} = {} but {} ⌢ ({} ⌣ {}) = {}",
                        h.label(x),
                        c.label(e1),
                        c.label(e2),
                        h.format(&lhs),
                        h.label(x),
                        c.label(e1),
                        c.label(e2),
                        h.format(&rhs)
                    ));
                }
            }
        }
    }
    for &eta in probes {
        for xi in 0..c.len() {
            let Some(prod) = p.cup_basis(xi, eta) else {
                continue;
            };
            let Some(d) = c
                .degree_of(&prod)
                .ok()
                .flatten()
                .or_else(|| Some(c.degree(xi) + c.degree(eta)))
            else {
                continue;
            };
            for &x in h.slice(&d) {
                let Some(xe) = p.cap_basis(x, eta) else {
                    continue;
                };
                let lhs = prod
                    .terms()
                    .fold(0, |acc, (i, a)| f.add(acc, f.mul(a, p.kron_basis(i, x))));
                let rhs = xe
                    .terms()
                    .fold(0, |acc, (j, b)| f.add(acc, f.mul(b, p.kron_basis(xi, j))));
                report.adjunction_checked += 1;
                if lhs != rhs && report.failures.len() < 20 {
                    report.failures.push(format!(
                        "<{} ⌣ {}, {}> = {lhs} but <{}, {} ⌢ {}> = {rhs}",
                        c.label(xi),
                        c.label(eta),
                        h.label(x),
                        c.label(xi),
                        h.label(x),
                        c.label(eta)
                    ));
                }
            }
        }
    }
    report
}

/// A linear map between graded modules, stored by columns. `degree_map`
/// rewrites source labels when the target is graded over another group;
/// the target degree of a source element of degree `d` is
/// `degree_map(d) + shift`.
#[derive(Clone, Debug)]
pub struct LinearMap {
    pub source: String,
    pub target: String,
    pub shift: RODegree,
    pub degree_map: Option<BTreeMap<String, RODegree>>,
    /// One entry per source basis element; `None` when unknown.
    pub columns: Vec<Option<Element>>,
    field: Fp,
}

impl LinearMap {
    pub fn new(
        source: &GradedModule,
        target: &GradedModule,
        shift: RODegree,
        degree_map: Option<BTreeMap<String, RODegree>>,
        columns: Vec<Option<Element>>,
    ) -> Result<LinearMap> {
        if source.field() != target.field() {
            return Err(Error::Precondition(format!(
                "map from F_{} to F_{}: mixed primes are not supported",
                source.field().p(),
                target.field().p()
            )));
        }
        if columns.len() != source.len() {
            return Err(Error::Data(format!(
                "map {} -> {}: wrong number of columns",
                source.name(),
                target.name()
            )));
        }
        let m = LinearMap {
            source: source.name().to_string(),
            target: target.name().to_string(),
            shift,
            degree_map,
            columns,
            field: source.field(),
        };
        for (i, c) in m.columns.iter().enumerate() {
            if let Some(c) = c {
                let expect = m.target_degree(source.degree(i))?;
                check_homogeneous(target, c, &expect, || {
                    format!("image of {}", source.label(i))
                })?;
            }
        }
        Ok(m)
    }

    /// Right capping with a fixed cohomology element.
    pub fn cap_with(p: &dyn Pairing, e: &Element) -> Result<LinearMap> {
        let h = p.homology();
        let de = p.cohomology().degree_of(e)?.unwrap_or_default();
        let columns = (0..h.len())
            .map(|i| {
                let mut out = Element::zero();
                for (j, c) in e.terms() {
                    out.add_scaled(p.field(), &p.cap_basis(i, j)?, c);
                }
                Some(out)
            })
            .collect();
        LinearMap::new(h, h, -de, None, columns)
    }

    pub fn identity(m: &GradedModule) -> LinearMap {
        let columns = (0..m.len()).map(|i| Some(Element::basis(i))).collect();
        LinearMap::new(m, m, RODegree::zero(), None, columns).expect("identity map")
    }

    pub fn zero(
        source: &GradedModule,
        target: &GradedModule,
        shift: RODegree,
    ) -> Result<LinearMap> {
        LinearMap::new(
            source,
            target,
            shift,
            None,
            vec![Some(Element::zero()); source.len()],
        )
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn target_degree(&self, d: &RODegree) -> Result<RODegree> {
        let base = match &self.degree_map {
            None => d.clone(),
            Some(m) => d.map_labels(m).map_err(|l| {
                Error::Data(format!(
                    "map {} -> {}: no degree image for {l:?}",
                    self.source, self.target
                ))
            })?,
        };
        Ok(&base + &self.shift)
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        let mut out = Element::zero();
        for (i, c) in x.terms() {
            let col = self.columns[i].as_ref().ok_or_else(|| {
                Error::Window(format!(
                    "map {} -> {} is not known on basis element {i}",
                    self.source, self.target
                ))
            })?;
            out.add_scaled(self.field, col, c);
        }
        Ok(out)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &LinearMap) -> Result<LinearMap> {
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                None => Ok(None),
                Some(c) => match other.apply(c) {
                    Ok(v) => Ok(Some(v)),
                    Err(Error::Window(_)) => Ok(None),
                    Err(e) => Err(e),
                },
            })
            .collect::<Result<Vec<_>>>()?;
        let degree_map = match (&self.degree_map, &other.degree_map) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => Some(
                a.iter()
                    .map(|(l, d)| {
                        Ok((
                            l.clone(),
                            d.map_labels(b)
                                .map_err(|l| Error::Data(format!("no degree image for {l}")))?,
                        ))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?,
            ),
        };
        let shift = match &other.degree_map {
            None => &self.shift + &other.shift,
            Some(b) => {
                &self
                    .shift
                    .map_labels(b)
                    .map_err(|l| Error::Data(format!("no degree image for {l}")))?
                    + &other.shift
            }
        };
        Ok(LinearMap {
            source: self.source.clone(),
            target: other.target.clone(),
            shift,
            degree_map,
            columns,
            field: self.field,
        })
    }

    /// Dense matrix of the map from the source slice of degree `d` to the
    /// matching target slice.
    pub fn slice_matrix(
        &self,
        source: &GradedModule,
        target: &GradedModule,
        d: &RODegree,
    ) -> Result<(Vec<usize>, Vec<usize>, Matrix)> {
        let src = source.slice(d).to_vec();
        let tgt = target.slice(&self.target_degree(d)?).to_vec();
        let mut cols = Vec::with_capacity(src.len());
        for &i in &src {
            let c = self.columns[i].as_ref().ok_or_else(|| {
                Error::Window(format!(
                    "map {} -> {} is not known on {}",
                    self.source,
                    self.target,
                    source.label(i)
                ))
            })?;
            cols.push(c.to_dense(&tgt));
        }
        Ok((src, tgt.clone(), Matrix::from_columns(&cols, tgt.len())))
    }

    /// Basis of the kernel in degree `d`, as elements of the source.
    pub fn kernel(
        &self,
        source: &GradedModule,
        target: &GradedModule,
        d: &RODegree,
    ) -> Result<Vec<Element>> {
        if !source.in_window(d) {
            return Err(Error::Window(format!(
                "degree {d} is outside the window of {}",
                source.name()
            )));
        }
        let (src, _, m) = self.slice_matrix(source, target, d)?;
        Ok(m.kernel(self.field)
            .iter()
            .map(|v| Element::from_dense(self.field, &src, v))
            .collect())
    }

    /// A particular preimage of `y` together with the kernel basis, or
    /// `None` when `y` is not in the image. Every solution is checked by
    /// substituting back.
    pub fn preimage(
        &self,
        source: &GradedModule,
        target: &GradedModule,
        d: &RODegree,
        y: &Element,
    ) -> Result<Option<(Element, Vec<Element>)>> {
        if let Some(dy) = target.degree_of(y)? {
            if dy != self.target_degree(d)? {
                return Err(Error::Degree(format!(
                    "preimage in degree {d} of an element of degree {dy}"
                )));
            }
        }
        let (src, tgt, m) = self.slice_matrix(source, target, d)?;
        let s = Solver::new(self.field, &m);
        let Some(x) = s.solve(&y.to_dense(&tgt)) else {
            return Ok(None);
        };
        let x = Element::from_dense(self.field, &src, &x);
        if self.apply(&x)? != *y {
            return Err(Error::Internal("preimage failed back-substitution".into()));
        }
        let kernel = s
            .kernel()
            .iter()
            .map(|v| Element::from_dense(self.field, &src, v))
            .collect();
        Ok(Some((x, kernel)))
    }
}

/// JSON form of a [`LinearMap`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub source: String,
    pub target: String,
    pub shift: String,
    #[serde(default)]
    pub degree_map: Option<BTreeMap<String, String>>,
    pub entries: Vec<MapEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapEntry {
    pub source: String,
    pub image: Vec<(String, i64)>,
}

impl MapFile {
    pub fn build(&self, source: &GradedModule, target: &GradedModule) -> Result<LinearMap> {
        let mut columns = vec![None; source.len()];
        for e in &self.entries {
            let i = source.require(&e.source)?;
            columns[i] = Some(target.element_owned(&e.image)?);
        }
        let degree_map = self
            .degree_map
            .as_ref()
            .map(|m| {
                m.iter()
                    .map(|(k, v)| Ok((k.clone(), parse_plain_degree(v)?)))
                    .collect::<Result<BTreeMap<_, _>>>()
            })
            .transpose()?;
        LinearMap::new(
            source,
            target,
            parse_plain_degree(&self.shift)?,
            degree_map,
            columns,
        )
    }

    pub fn from_map(map: &LinearMap, source: &GradedModule, target: &GradedModule) -> MapFile {
        MapFile {
            source: map.source.clone(),
            target: map.target.clone(),
            shift: map.shift.to_string(),
            degree_map: map
                .degree_map
                .as_ref()
                .map(|m| m.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()),
            entries: map
                .columns
                .iter()
                .enumerate()
                .filter_map(|(i, c)| {
                    c.as_ref().map(|c| MapEntry {
                        source: source.label(i).to_string(),
                        image: target.to_pairs(c),
                    })
                })
                .collect(),
        }
    }
}

/// Elements of a tensor power, keyed by tuples of basis indices.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct TensorElement(BTreeMap<Vec<usize>, u32>);

impl TensorElement {
    pub fn zero() -> TensorElement {
        TensorElement(BTreeMap::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, f: Fp, key: Vec<usize>, c: u32) {
        let c = c % f.p();
        if c == 0 {
            return;
        }
        let e = self.0.entry(key.clone()).or_insert(0);
        *e = f.add(*e, c);
        if *e == 0 {
            self.0.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], u32)> {
        self.0.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn coeff(&self, key: &[usize]) -> u32 {
        self.0.get(key).copied().unwrap_or(0)
    }

    /// Factorwise cap with an external product `e_1 × ... × e_k`. Signs from
    /// reordering are included for odd p using integer degrees.
    pub fn cap_external(&self, p: &dyn Pairing, es: &[Element]) -> Result<TensorElement> {
        let f = p.field();
        let mut out = TensorElement::zero();
        for (key, c) in self.terms() {
            if key.len() != es.len() {
                return Err(Error::Structure(
                    "tensor arity does not match the external product".into(),
                ));
            }
            // Expand the product of the factorwise caps.
            let mut partial: Vec<(Vec<usize>, u32)> = vec![(Vec::new(), c)];
            for (slot, (&x, e)) in key.iter().zip(es).enumerate() {
                let r = p.cap(&Element::basis(x), e)?;
                let mut sign = 1u32;
                if f.p() != 2 {
                    // Moving e_slot past x_{slot+1..} costs (-1)^{|e| Σ|x_j|}.
                    let de = p.cohomology().degree_of(e)?.map(|d| total(&d)).unwrap_or(0);
                    let later: i64 = key[slot + 1..]
                        .iter()
                        .map(|&j| total(p.homology().degree(j)))
                        .sum();
                    if (de * later).rem_euclid(2) == 1 {
                        sign = f.p() - 1;
                    }
                }
                let mut next = Vec::new();
                for (k, a) in &partial {
                    for (i, b) in r.terms() {
                        let mut k2 = k.clone();
                        k2.push(i);
                        next.push((k2, f.mul(f.mul(*a, b), sign)));
                    }
                }
                partial = next;
            }
            for (k, a) in partial {
                out.add_term(f, k, a);
            }
        }
        Ok(out)
    }

    pub fn format(&self, m: &GradedModule) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms()
            .map(|(k, c)| {
                let body = k.iter().map(|&i| m.label(i)).collect::<Vec<_>>().join("⊗");
                if c == 1 {
                    body
                } else {
                    format!("{c}*{body}")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Sum of the coefficients, i.e. the underlying integer dimension.
pub fn total(d: &RODegree) -> i64 {
    d.terms().map(|(_, c)| c).sum()
}

/// Dual basis of the Kronecker pairing on the homology slice of degree `d`:
/// for each cohomology basis element `ξ` of that degree, the homology element
/// `x` with `<ξ', x> = δ(ξ, ξ')`. Fails when the pairing is degenerate.
pub fn dual_basis(p: &dyn Pairing, d: &RODegree) -> Result<Vec<(usize, Element)>> {
    let f = p.field();
    let cs = p.cohomology().slice(d).to_vec();
    let hs = p.homology().slice(d).to_vec();
    if cs.len() != hs.len() {
        return Err(Error::Data(format!(
            "Kronecker pairing in degree {d} pairs {} cohomology with {} homology classes",
            cs.len(),
            hs.len()
        )));
    }
    let rows: Vec<Vec<u32>> = cs
        .iter()
        .map(|&xi| hs.iter().map(|&x| p.kron_basis(xi, x)).collect())
        .collect();
    let m = Matrix::from_rows(&rows, hs.len());
    let s = Solver::new(f, &m);
    if s.rank() != cs.len() {
        return Err(Error::Data(format!(
            "Kronecker pairing is degenerate in degree {d}"
        )));
    }
    let mut out = Vec::new();
    for (k, &xi) in cs.iter().enumerate() {
        let mut target = vec![0u32; cs.len()];
        target[k] = 1;
        let x = s
            .solve(&target)
            .ok_or_else(|| Error::Internal("dual basis solve".into()))?;
        out.push((xi, Element::from_dense(f, &hs, &x)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// H_*(BΣ_2) truncated at degree 6, built directly.
    fn toy() -> TablePresentation {
        let t = 6;
        let basis = |prefix: &str| -> Vec<BasisEntry> {
            (0..=t)
                .map(|k| BasisEntry {
                    label: format!("{prefix}{k}"),
                    degree: k.to_string(),
                })
                .collect()
        };
        let mut cup = Vec::new();
        let mut cap = Vec::new();
        let mut kron = Vec::new();
        for i in 0..=t {
            kron.push(KronEntry {
                left: format!("e{i}"),
                right: format!("b{i}"),
                value: 1,
            });
            for j in 0..=t {
                if i + j <= t {
                    cup.push(ProductEntry {
                        left: format!("e{i}"),
                        right: format!("e{j}"),
                        result: vec![(format!("e{}", i + j), 1)],
                    });
                }
                let r = if j >= i {
                    vec![(format!("b{}", j - i), 1)]
                } else {
                    vec![]
                };
                cap.push(ProductEntry {
                    left: format!("b{j}"),
                    right: format!("e{i}"),
                    result: r,
                });
            }
        }
        ModuleFile {
            name: "toy".into(),
            prime: 2,
            window: WindowSpec::UpTo {
                label: "1".into(),
                max: t as i64,
            },
            mode: Mode::Strict,
            homology: basis("b"),
            cohomology: basis("e"),
            unit: Some("e0".into()),
            cup,
            cap,
            kron,
        }
        .build()
        .unwrap()
    }

    #[test]
    fn cap_examples() {
        let p = toy();
        let b3 = p.homology.element(&[("b3", 1)]).unwrap();
        let e1 = p.cohomology.element(&[("e1", 1)]).unwrap();
        assert_eq!(
            p.cap(&b3, &e1).unwrap(),
            p.homology.element(&[("b2", 1)]).unwrap()
        );
        assert!(p.cap(&b3, &Element::zero()).unwrap().is_zero());
        assert_eq!(
            p.kron(
                &p.cohomology.element(&[("e2", 1)]).unwrap(),
                &p.homology.element(&[("b2", 1)]).unwrap()
            )
            .unwrap(),
            1
        );
    }

    #[test]
    fn kron_mismatch_respects_mode() {
        let mut p = toy();
        let e2 = p.cohomology.element(&[("e2", 1)]).unwrap();
        let b3 = p.homology.element(&[("b3", 1)]).unwrap();
        assert!(matches!(p.kron(&e2, &b3), Err(Error::Degree(_))));
        p.mode = Mode::Lenient;
        assert_eq!(p.kron(&e2, &b3).unwrap(), 0);
    }

    #[test]
    fn validation_passes_and_catches_corruption() {
        let mut p = toy();
        let r = validate_pairing(&p, None);
        assert!(r.ok(), "{:?}", r.failures);
        assert!(r.associativity_checked > 0 && r.adjunction_checked > 0);
        let (b4, e1) = (
            p.homology.index_of("b4").unwrap(),
            p.cohomology.index_of("e1").unwrap(),
        );
        p.cap.insert((b4, e1), Element::zero());
        assert!(!validate_pairing(&p, None).ok());
    }

    #[test]
    fn cap_kernel_and_preimage() {
        let p = toy();
        let e = p.cohomology.element(&[("e1", 1)]).unwrap();
        let l = LinearMap::cap_with(&p, &e).unwrap();
        let k0 = l
            .kernel(&p.homology, &p.homology, &RODegree::zero())
            .unwrap();
        assert_eq!(k0, vec![p.homology.element(&[("b0", 1)]).unwrap()]);
        for d in 1..=6 {
            assert!(l
                .kernel(&p.homology, &p.homology, &RODegree::trivial(d))
                .unwrap()
                .is_empty());
        }
        let b2 = p.homology.element(&[("b2", 1)]).unwrap();
        let (x, k) = l
            .preimage(&p.homology, &p.homology, &RODegree::trivial(3), &b2)
            .unwrap()
            .unwrap();
        assert_eq!(x, p.homology.element(&[("b3", 1)]).unwrap());
        assert!(k.is_empty());
        let (x0, _) = l
            .preimage(
                &p.homology,
                &p.homology,
                &RODegree::trivial(3),
                &Element::zero(),
            )
            .unwrap()
            .unwrap();
        assert!(x0.is_zero());
    }

    #[test]
    fn inhomogeneous_table_entry_is_rejected() {
        let mut f = ModuleFile::from_presentation("toy", &toy(), WindowSpec::All);
        f.cap[0].result = vec![("b5".into(), 1)];
        assert!(matches!(f.build(), Err(Error::Degree(_))));
    }

    #[test]
    fn module_file_round_trip() {
        let p = toy();
        let f = ModuleFile::from_presentation(
            "toy",
            &p,
            WindowSpec::UpTo {
                label: "1".into(),
                max: 6,
            },
        );
        let q = f.build().unwrap();
        assert_eq!(q.cap, p.cap);
        assert_eq!(q.cup, p.cup);
    }

    #[test]
    fn mixed_primes_rejected() {
        let p = toy();
        let other = GradedModule::new("x", Fp::new(3).unwrap(), vec![], Window::All).unwrap();
        assert!(matches!(
            LinearMap::new(&p.homology, &other, RODegree::zero(), None, vec![None; 7]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn slant_convention() {
        let w = RODegree::trivial(5);
        assert_eq!(slant_degree(&w, &RODegree::zero()), w);
        assert!(slant_degree(&w, &w).is_zero());
    }

    #[test]
    fn dual_basis_of_toy() {
        let p = toy();
        let d = dual_basis(&p, &RODegree::trivial(2)).unwrap();
        assert_eq!(
            d,
            vec![(
                p.cohomology.index_of("e2").unwrap(),
                p.homology.element(&[("b2", 1)]).unwrap()
            )]
        );
    }
}
