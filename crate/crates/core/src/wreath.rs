//! The ⊙ product of integral Eulerian sequences over supplied wreath data
//! `(H(B_n), H(B_m), H(D_n(B_m)), H(B_{nm}), ∘, ι_*, e_xy)`, with checks of
//! the axioms the product relies on.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eulerian::{enumerate, EulerianSequence, Verdict};
use crate::falg::{
    BasisEntry, Element, GradedModule, KronEntry, LinearMap, MapFile, Mode, ModuleFile, Pairing,
    ProductEntry, WindowSpec,
};
use crate::fingroup::{wreath_embedding, FiniteGroup};
use crate::grouphom::{induced, GroupHomology};
use crate::linalg::Matrix;
use crate::rodegree::RODegree;
use crate::{Error, Result};

#[derive(Clone)]
pub struct WreathData {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub stability: RODegree,
    pub bn: Arc<dyn Pairing>,
    pub bm: Arc<dyn Pairing>,
    pub d: Arc<dyn Pairing>,
    pub bnm: Arc<dyn Pairing>,
    /// `b_x ∘ b_y` on homology bases of `B_n` and `B_m`.
    pub circ: HashMap<(usize, usize), Element>,
    /// `ι_*: H(D) → H(B_{nm})`.
    pub iota: LinearMap,
    pub e_n: Element,
    pub e_m: Element,
    pub e_nm: Element,
    pub e_xy: Element,
    /// `ι^*: H^(B_{nm}) → H^(D)`, when supplied.
    pub pullback: Option<LinearMap>,
}

impl fmt::Debug for WreathData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WreathData({}, n={}, m={})", self.name, self.n, self.m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Axiom {
    /// `e_xy` is the pullback of `e_{nm}`, with the projection formula.
    PullbackEuler,
    /// `(x_{m(k+1)} ∘ y_{k+1}) ⌢ e_xy = x_{mk} ∘ y_k`.
    CapRecursion,
    /// `|x ∘ y| = |x| + |y|` for every table entry.
    DegreeAdditivity,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomFailure {
    pub axiom: Axiom,
    pub witness: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct WreathReport {
    pub checked: [usize; 3],
    pub failures: Vec<AxiomFailure>,
}

impl WreathReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed(&self, axiom: Axiom) -> bool {
        self.failures.iter().any(|f| f.axiom == axiom)
    }

    fn fail(&mut self, axiom: Axiom, witness: String) {
        if self.failures.iter().filter(|f| f.axiom == axiom).count() < 10 {
            self.failures.push(AxiomFailure { axiom, witness });
        }
    }
}

impl WreathData {
    /// Bilinear extension of the ∘ table.
    pub fn circ(&self, x: &Element, y: &Element) -> Result<Element> {
        let f = self.d.field();
        let mut out = Element::zero();
        for (i, a) in x.terms() {
            for (j, b) in y.terms() {
                let r = self.circ.get(&(i, j)).ok_or_else(|| {
                    Error::Window(format!(
                        "{} ∘ {} is not in the table",
                        self.bn.homology().label(i),
                        self.bm.homology().label(j)
                    ))
                })?;
                out.add_scaled(f, r, f.mul(a, b));
            }
        }
        Ok(out)
    }

    fn pair_horizon(&self, x: &EulerianSequence, y: &EulerianSequence) -> usize {
        (x.horizon() / self.m).min(y.horizon())
    }
}

/// Runs the three axiom checks; `samples` are Eulerian pairs `(χ1, χ2)` of
/// weights `n` and `m` used for the cap recursion.
pub fn validate(w: &WreathData, samples: &[(EulerianSequence, EulerianSequence)]) -> WreathReport {
    let mut report = WreathReport::default();
    let dh = w.d.homology();
    // (a) Pullback of the Euler element and its consequences on homology.
    if let Some(pb) = &w.pullback {
        report.checked[0] += 1;
        match pb.apply(&w.e_nm) {
            Ok(img) if img == w.e_xy => {}
            Ok(img) => report.fail(
                Axiom::PullbackEuler,
                format!(
                    "ι^*(e_nm) = {} but e_xy = {}",
                    w.d.cohomology().format(&img),
                    w.d.cohomology().format(&w.e_xy)
                ),
            ),
            Err(e) => report.fail(Axiom::PullbackEuler, format!("ι^*(e_nm) is undefined: {e}")),
        }
        let c = w.bnm.cohomology();
        for xi in 0..c.len() {
            let Ok(pxi) = pb.apply(&Element::basis(xi)) else {
                continue;
            };
            for &x in dh.slice(c.degree(xi)) {
                let Ok(ix) = w.iota.apply(&Element::basis(x)) else {
                    continue;
                };
                let (Ok(l), Ok(r)) = (
                    w.d.kron(&pxi, &Element::basis(x)),
                    w.bnm.kron(&Element::basis(xi), &ix),
                ) else {
                    continue;
                };
                report.checked[0] += 1;
                if l != r {
                    report.fail(
                        Axiom::PullbackEuler,
                        format!(
                            "<ι^*{}, {}> = {l} but <{}, ι_*{}> = {r}",
                            c.label(xi),
                            dh.label(x),
                            c.label(xi),
                            dh.label(x)
                        ),
                    );
                }
            }
        }
    }
    for x in 0..dh.len() {
        let xe = Element::basis(x);
        let Ok(capped) = w.d.cap(&xe, &w.e_xy) else {
            continue;
        };
        let (Ok(lhs), Ok(ix)) = (w.iota.apply(&capped), w.iota.apply(&xe)) else {
            continue;
        };
        let Ok(rhs) = w.bnm.cap(&ix, &w.e_nm) else {
            continue;
        };
        report.checked[0] += 1;
        if lhs != rhs {
            report.fail(
                Axiom::PullbackEuler,
                format!(
                    "ι_*({} ⌢ e_xy) = {} but ι_*({}) ⌢ e_nm = {}",
                    dh.label(x),
                    w.bnm.homology().format(&lhs),
                    dh.label(x),
                    w.bnm.homology().format(&rhs)
                ),
            );
        }
    }
    // (b) Cap recursion on the samples, including x_0 ∘ y_0 ⌢ e_xy = 0 when
    // the product has weight above one.
    for (s, (x, y)) in samples.iter().enumerate() {
        let top = w.pair_horizon(x, y);
        for k in 0..=top {
            let Ok(z) = w.circ(&x.entries[w.m * k], &y.entries[k]) else {
                continue;
            };
            let Ok(lhs) = w.d.cap(&z, &w.e_xy) else {
                continue;
            };
            let rhs = if k == 0 {
                if w.n * w.m == 1 {
                    continue;
                }
                Element::zero()
            } else {
                match w.circ(&x.entries[w.m * (k - 1)], &y.entries[k - 1]) {
                    Ok(r) => r,
                    Err(_) => continue,
                }
            };
            report.checked[1] += 1;
            if lhs != rhs {
                report.fail(
                    Axiom::CapRecursion,
                    format!(
                        "sample {s}, k = {k}: (x_{} ∘ y_{k}) ⌢ e_xy = {} but expected {}",
                        w.m * k,
                        dh.format(&lhs),
                        dh.format(&rhs)
                    ),
                );
            }
        }
    }
    // (c) Degree additivity of the table.
    let mut keys: Vec<_> = w.circ.keys().copied().collect();
    keys.sort_unstable();
    for (i, j) in keys {
        let r = &w.circ[&(i, j)];
        let expect = w.bn.homology().degree(i) + w.bm.homology().degree(j);
        report.checked[2] += 1;
        match dh.degree_of(r) {
            Ok(Some(d)) if d != expect => report.fail(
                Axiom::DegreeAdditivity,
                format!(
                    "{} ∘ {} = {} has degree {d}, expected {expect}",
                    w.bn.homology().label(i),
                    w.bm.homology().label(j),
                    dh.format(r)
                ),
            ),
            Err(e) => report.fail(
                Axiom::DegreeAdditivity,
                format!(
                    "{} ∘ {}: {e}",
                    w.bn.homology().label(i),
                    w.bm.homology().label(j)
                ),
            ),
            _ => {}
        }
    }
    report
}

/// `χ1 ⊙ χ2 = (ι_*(x_0 ∘ y_0), ι_*(x_m ∘ y_1), ι_*(x_{2m} ∘ y_2), …)`.
pub fn product(
    x: &EulerianSequence,
    y: &EulerianSequence,
    w: &WreathData,
) -> Result<EulerianSequence> {
    if x.weight != w.n || y.weight != w.m {
        return Err(Error::Structure(format!(
            "weights ({}, {}) do not match wreath data ({}, {})",
            x.weight, y.weight, w.n, w.m
        )));
    }
    if x.homology().name() != w.bn.homology().name()
        || y.homology().name() != w.bm.homology().name()
    {
        return Err(Error::Structure(
            "sequences do not live in the wreath data's modules".into(),
        ));
    }
    if !x.is_integral() || !y.is_integral() {
        return Err(Error::Precondition(
            "the product is defined on integral sequences only".into(),
        ));
    }
    let top = w.pair_horizon(x, y);
    let entries = (0..=top)
        .map(|k| w.iota.apply(&w.circ(&x.entries[w.m * k], &y.entries[k])?))
        .collect::<Result<Vec<_>>>()?;
    let expect = match (x.degree(), y.degree()) {
        (Ok(a), Ok(b)) => Some(&a + &b),
        _ => None,
    };
    let z = EulerianSequence::new(
        w.bnm.clone(),
        w.n * w.m,
        w.stability.clone(),
        w.e_nm.clone(),
        entries,
        None,
    )?;
    if let Verdict::Fails { index, reason } = z.verify() {
        return Err(Error::Data(format!(
            "product is not Eulerian at index {index}: {reason}"
        )));
    }
    if let (Ok(d), Some(e)) = (z.degree(), &expect) {
        if &d != e {
            return Err(Error::Data(format!("product has degree {d}, expected {e}")));
        }
    }
    Ok(EulerianSequence {
        declared: if z.is_zero() { expect } else { None },
        ..z
    })
}

/// The constant weight-1 sequence `(a, a, …)` against the unit.
pub fn constant(
    ambient: Arc<dyn Pairing>,
    a: Element,
    horizon: usize,
    stability: RODegree,
) -> Result<EulerianSequence> {
    let unit = ambient
        .unit()
        .ok_or_else(|| Error::Data("weight-1 ambient needs a unit".into()))?;
    let declared = match ambient.homology().degree_of(&a)? {
        Some(d) if d.is_virtual() => {
            return Err(Error::Precondition(format!(
                "constant sequence of virtual degree {d}"
            )));
        }
        Some(d) => Some(-d),
        None => None,
    };
    EulerianSequence::new(
        ambient,
        1,
        stability,
        Element::basis(unit),
        vec![a; horizon + 1],
        declared,
    )
}

fn entry(l: String, r: String, result: Vec<(String, i64)>) -> ProductEntry {
    ProductEntry {
        left: l,
        right: r,
        result,
    }
}

/// `b_0..b_top` with `b_d ⌢ e^k = b_{d - k·step}` and cohomology the powers
/// of `e` dual to `b_{k·step}`.
pub fn ladder_module(name: &str, p: u32, step: usize, top: usize) -> ModuleFile {
    let powers = if step == 0 { 0 } else { top / step };
    let mut cap = Vec::new();
    let mut cup = Vec::new();
    let mut kron = Vec::new();
    for k in 0..=powers {
        kron.push(KronEntry {
            left: format!("e{k}"),
            right: format!("b{}", k * step),
            value: 1,
        });
        for j in 0..=powers {
            if j + k <= powers {
                cup.push(entry(
                    format!("e{k}"),
                    format!("e{j}"),
                    vec![(format!("e{}", j + k), 1)],
                ));
            }
        }
        for d in 0..=top {
            let r = if d >= k * step {
                vec![(format!("b{}", d - k * step), 1)]
            } else {
                Vec::new()
            };
            cap.push(entry(format!("b{d}"), format!("e{k}"), r));
        }
    }
    ModuleFile {
        name: name.to_string(),
        prime: p,
        window: WindowSpec::UpTo {
            label: "1".into(),
            max: top as i64,
        },
        mode: Mode::Strict,
        homology: (0..=top)
            .map(|d| BasisEntry {
                label: format!("b{d}"),
                degree: d.to_string(),
            })
            .collect(),
        cohomology: (0..=powers)
            .map(|k| BasisEntry {
                label: format!("e{k}"),
                degree: (k * step).to_string(),
            })
            .collect(),
        unit: Some("e0".into()),
        cup,
        cap,
        kron,
    }
}

fn built(file: &ModuleFile) -> Result<Arc<dyn Pairing>> {
    Ok(Arc::new(file.build()?))
}

/// Synthetic ladder data for weights `n, m ≥ 2`, sized for products through
/// `horizon`. `D = L_n ⊗ L_m` with `x ∘ y = x ⊗ y`, `e_xy` shifting the
/// factors by `m(n−1)` and `m−1`, and
/// `ι_*(b_{α m(n−1) + r} ⊗ b_{α'(m−1) + r'}) = b_{α(nm−1) + r + r'}` when
/// `α = α'`, zero otherwise.
pub fn synthetic(n: usize, m: usize, horizon: usize) -> Result<WreathData> {
    if n < 2 || m < 2 {
        return Err(Error::Precondition(
            "synthetic wreath data needs n, m ≥ 2".into(),
        ));
    }
    let p = 2;
    let (sn, sm, snm) = (n - 1, m - 1, n * m - 1);
    let tm = (horizon + 3) * sm + sm;
    let tn = m * (horizon + 3) * sn + sn;
    let tnm = tn + tm;
    let bn = built(&ladder_module(&format!("L{n}"), p, sn, tn))?;
    let bm = built(&ladder_module(&format!("L{m}"), p, sm, tm))?;
    let bnm = built(&ladder_module(&format!("L{}", n * m), p, snm, tnm))?;
    let big = m * sn;
    let powers = (tn / big).min(tm / sm);
    let label = |d: usize, e: usize| format!("b{d}|b{e}");
    let mut homology = Vec::new();
    let mut cap = Vec::new();
    for d in 0..=tn {
        for e in 0..=tm {
            homology.push(BasisEntry {
                label: label(d, e),
                degree: (d + e).to_string(),
            });
            for k in 0..=powers {
                let r = if d >= k * big && e >= k * sm {
                    vec![(label(d - k * big, e - k * sm), 1)]
                } else {
                    Vec::new()
                };
                cap.push(entry(label(d, e), format!("exy{k}"), r));
            }
        }
    }
    let mut cup = Vec::new();
    let mut kron = Vec::new();
    for k in 0..=powers {
        kron.push(KronEntry {
            left: format!("exy{k}"),
            right: label(k * big, k * sm),
            value: 1,
        });
        for j in 0..=powers - k {
            cup.push(entry(
                format!("exy{k}"),
                format!("exy{j}"),
                vec![(format!("exy{}", j + k), 1)],
            ));
        }
    }
    let dfile = ModuleFile {
        name: format!("D{n}(L{m})"),
        prime: p,
        window: WindowSpec::UpTo {
            label: "1".into(),
            max: tn.min(tm) as i64,
        },
        mode: Mode::Strict,
        homology,
        cohomology: (0..=powers)
            .map(|k| BasisEntry {
                label: format!("exy{k}"),
                degree: (k * snm).to_string(),
            })
            .collect(),
        unit: Some("exy0".into()),
        cup,
        cap,
        kron,
    };
    let d = built(&dfile)?;
    let (hn, hm, hd, hnm) = (bn.homology(), bm.homology(), d.homology(), bnm.homology());
    let mut circ = HashMap::new();
    for i in 0..=tn {
        for j in 0..=tm {
            circ.insert(
                (hn.require(&format!("b{i}"))?, hm.require(&format!("b{j}"))?),
                Element::basis(hd.require(&label(i, j))?),
            );
        }
    }
    let mut columns = Vec::with_capacity(hd.len());
    for x in 0..hd.len() {
        let l = hd.label(x);
        let (a, b) = l.split_once('|').expect("pair label");
        let (dd, ee): (usize, usize) = (
            a[1..].parse().expect("index"),
            b[1..].parse().expect("index"),
        );
        let (alpha, r) = (dd / big, dd % big);
        let (alpha2, r2) = (ee / sm, ee % sm);
        columns.push(Some(if alpha == alpha2 {
            Element::basis(hnm.require(&format!("b{}", alpha * snm + r + r2))?)
        } else {
            Element::zero()
        }));
    }
    let iota = LinearMap::new(hd, hnm, RODegree::zero(), None, columns)?;
    let (cnm, cd) = (bnm.cohomology(), d.cohomology());
    let pb_cols = (0..cnm.len())
        .map(|k| cd.index_of(&format!("exy{k}")).map(Element::basis))
        .collect();
    let pullback = LinearMap::new(cnm, cd, RODegree::zero(), None, pb_cols)?;
    Ok(WreathData {
        name: format!("synthetic({n},{m})"),
        n,
        m,
        stability: RODegree::trivial(1),
        e_n: Element::basis(bn.cohomology().require("e1")?),
        e_m: Element::basis(bm.cohomology().require("e1")?),
        e_nm: Element::basis(cnm.require("e1")?),
        e_xy: Element::basis(cd.require("exy1")?),
        bn,
        bm,
        d,
        bnm,
        circ,
        iota,
        pullback: Some(pullback),
    })
}

/// The ladder family `(b_r, b_{r+s}, b_{r+2s}, …)` shifted by `shift`.
pub fn ladder_sequence(
    ambient: &Arc<dyn Pairing>,
    weight: usize,
    r: usize,
    shift: usize,
) -> Result<EulerianSequence> {
    let h = ambient.homology();
    let step = weight - 1;
    let euler = Element::basis(ambient.cohomology().require("e1")?);
    let mut entries = vec![Element::zero(); shift];
    let mut d = r;
    while let Some(i) = h.index_of(&format!("b{d}")) {
        entries.push(Element::basis(i));
        d += step;
    }
    let declared = Some(&RODegree::trivial((shift * step) as i64) - &RODegree::trivial(r as i64));
    EulerianSequence::new(
        ambient.clone(),
        weight,
        RODegree::trivial(1),
        euler,
        entries,
        declared,
    )
}

/// Residue families with small shifts on both sides of synthetic data.
pub fn synthetic_samples(w: &WreathData) -> Result<Vec<(EulerianSequence, EulerianSequence)>> {
    let mut xs = Vec::new();
    for r in 0..w.n - 1 {
        for s in 0..3 {
            xs.push(ladder_sequence(&w.bn, w.n, r, s)?);
        }
    }
    let mut ys = Vec::new();
    for r in 0..w.m - 1 {
        for s in 0..3 {
            ys.push(ladder_sequence(&w.bm, w.m, r, s)?);
        }
    }
    Ok(xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
        .collect())
}

/// `F_p[t]/(t^N)` as a weight-1 instance: homology `t^k` in degree `k`,
/// cohomology the unit, `∘` the multiplication and `ι_*` the identity.
pub fn weight_one(p: u32, top: usize) -> Result<WreathData> {
    let file = ModuleFile {
        name: format!("F{p}[t]/(t^{})", top + 1),
        prime: p,
        window: WindowSpec::All,
        mode: Mode::Strict,
        homology: (0..=top)
            .map(|k| BasisEntry {
                label: format!("t{k}"),
                degree: k.to_string(),
            })
            .collect(),
        cohomology: vec![BasisEntry {
            label: "1".into(),
            degree: "0".into(),
        }],
        unit: Some("1".into()),
        cup: vec![entry("1".into(), "1".into(), vec![("1".into(), 1)])],
        cap: (0..=top)
            .map(|k| entry(format!("t{k}"), "1".into(), vec![(format!("t{k}"), 1)]))
            .collect(),
        kron: vec![KronEntry {
            left: "1".into(),
            right: "t0".into(),
            value: 1,
        }],
    };
    let a = built(&file)?;
    let h = a.homology();
    let mut circ = HashMap::new();
    for i in 0..=top {
        for j in 0..=top {
            let r = if i + j <= top {
                Element::basis(h.require(&format!("t{}", i + j))?)
            } else {
                Element::zero()
            };
            circ.insert((i, j), r);
        }
    }
    let unit = Element::basis(a.unit().expect("unit"));
    Ok(WreathData {
        name: file.name.clone(),
        n: 1,
        m: 1,
        stability: RODegree::trivial(1),
        iota: LinearMap::identity(h),
        pullback: Some(LinearMap::identity(a.cohomology())),
        circ,
        e_n: unit.clone(),
        e_m: unit.clone(),
        e_nm: unit.clone(),
        e_xy: unit,
        bn: a.clone(),
        bm: a.clone(),
        d: a.clone(),
        bnm: a,
    })
}

fn point(p: u32) -> Result<Arc<dyn Pairing>> {
    built(&ModuleFile {
        name: "pt".into(),
        prime: p,
        window: WindowSpec::All,
        mode: Mode::Strict,
        homology: vec![BasisEntry {
            label: "pt".into(),
            degree: "0".into(),
        }],
        cohomology: vec![BasisEntry {
            label: "1".into(),
            degree: "0".into(),
        }],
        unit: Some("1".into()),
        cup: vec![entry("1".into(), "1".into(), vec![("1".into(), 1)])],
        cap: vec![entry("pt".into(), "1".into(), vec![("pt".into(), 1)])],
        kron: vec![KronEntry {
            left: "1".into(),
            right: "pt".into(),
            value: 1,
        }],
    })
}

/// Data with `B_1 = pt` on the left: `pt ∘ y = y`, `D = B_m`.
pub fn left_unit(
    ambient: Arc<dyn Pairing>,
    euler: Element,
    weight: usize,
    stability: RODegree,
) -> Result<WreathData> {
    let pt = point(ambient.field().p())?;
    let mut circ = HashMap::new();
    for j in 0..ambient.homology().len() {
        circ.insert((0, j), Element::basis(j));
    }
    let unit = Element::basis(pt.unit().expect("unit"));
    Ok(WreathData {
        name: format!("unit ⊙ {}", ambient.homology().name()),
        n: 1,
        m: weight,
        stability,
        iota: LinearMap::identity(ambient.homology()),
        pullback: Some(LinearMap::identity(ambient.cohomology())),
        circ,
        e_n: unit,
        e_m: euler.clone(),
        e_nm: euler.clone(),
        e_xy: euler,
        bn: pt,
        bm: ambient.clone(),
        d: ambient.clone(),
        bnm: ambient,
    })
}

/// Data with `B_1 = pt` on the right: `x ∘ pt = x`, `D = B_n`.
pub fn right_unit(
    ambient: Arc<dyn Pairing>,
    euler: Element,
    weight: usize,
    stability: RODegree,
) -> Result<WreathData> {
    let pt = point(ambient.field().p())?;
    let mut circ = HashMap::new();
    for i in 0..ambient.homology().len() {
        circ.insert((i, 0), Element::basis(i));
    }
    let unit = Element::basis(pt.unit().expect("unit"));
    Ok(WreathData {
        name: format!("{} ⊙ unit", ambient.homology().name()),
        n: weight,
        m: 1,
        stability,
        iota: LinearMap::identity(ambient.homology()),
        pullback: Some(LinearMap::identity(ambient.cohomology())),
        circ,
        e_n: euler.clone(),
        e_m: unit,
        e_nm: euler.clone(),
        e_xy: euler,
        bn: ambient.clone(),
        bm: pt,
        d: ambient.clone(),
        bnm: ambient,
    })
}

/// The constant unit sequence of the point module.
pub fn unit_sequence(w: &WreathData, horizon: usize) -> Result<EulerianSequence> {
    let side = if w.n == 1 { &w.bn } else { &w.bm };
    constant(
        side.clone(),
        Element::basis(0),
        horizon,
        w.stability.clone(),
    )
}

/// Eulerian sequences of `B_n` and `B_m` found by enumeration, starting in
/// each homology degree and shifted up to twice when the shift still
/// verifies; used when no samples are supplied.
pub fn default_samples(
    w: &WreathData,
    limit: usize,
) -> Result<Vec<(EulerianSequence, EulerianSequence)>> {
    let side =
        |p: &Arc<dyn Pairing>, e: &Element, weight: usize| -> Result<Vec<EulerianSequence>> {
            let degrees: Vec<RODegree> = p.homology().degrees().cloned().collect();
            let targets: Vec<(RODegree, usize)> =
                degrees.iter().map(|d| (-d.clone(), 64)).collect();
            let mut out = Vec::new();
            for s in enumerate(p.clone(), e, weight, &w.stability, &targets)? {
                for b in s.basis {
                    for k in 0..3 {
                        let s = b.shift(k);
                        if s.verify().holds() {
                            out.push(s);
                        }
                    }
                }
                if out.len() >= limit {
                    break;
                }
            }
            out.truncate(limit);
            Ok(out)
        };
    let xs = side(&w.bn, &w.e_n, w.n)?;
    let ys = side(&w.bm, &w.e_m, w.m)?;
    Ok(xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
        .collect())
}

/// `ι_*: H_*(Σ_2 ≀ Σ_2) → H_*(Σ_4)` at p = 2 through `max_degree`, computed
/// from free resolutions. No ∘ table is shipped for this pair.
pub fn classical_22_pushforward(
    max_degree: usize,
) -> Result<(GroupHomology, GroupHomology, Vec<Matrix>)> {
    let hom = wreath_embedding(2, 2, 4)?;
    let s4 = Arc::new(FiniteGroup::symmetric(4)?);
    if s4.order() != hom.target.order() {
        return Err(Error::Internal(
            "wreath embedding does not land in S4".into(),
        ));
    }
    let src = GroupHomology::compute(hom.source.clone(), 2, max_degree)?;
    let tgt = GroupHomology::compute(hom.target.clone(), 2, max_degree)?;
    let maps = induced(&hom, &src, &tgt)?;
    Ok((src, tgt, maps))
}

/// JSON form of wreath data.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WreathFile {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub stability: String,
    pub bn: ModuleFile,
    pub bm: ModuleFile,
    pub d: ModuleFile,
    pub bnm: ModuleFile,
    pub circ: Vec<ProductEntry>,
    pub iota: MapFile,
    pub e_n: Vec<(String, i64)>,
    pub e_m: Vec<(String, i64)>,
    pub e_nm: Vec<(String, i64)>,
    pub e_xy: Vec<(String, i64)>,
    #[serde(default)]
    pub pullback: Option<MapFile>,
}

impl WreathFile {
    pub fn parse(source_name: &str, text: &str) -> Result<WreathFile> {
        serde_json::from_str(text).map_err(|e| Error::from_json(source_name, e))
    }

    pub fn build(&self) -> Result<WreathData> {
        let (bn, bm, d, bnm) = (
            built(&self.bn)?,
            built(&self.bm)?,
            built(&self.d)?,
            built(&self.bnm)?,
        );
        let mut circ = HashMap::new();
        for t in &self.circ {
            let i = bn.homology().require(&t.left)?;
            let j = bm.homology().require(&t.right)?;
            circ.insert((i, j), d.homology().element_owned(&t.result)?);
        }
        let iota = self.iota.build(d.homology(), bnm.homology())?;
        let pullback = self
            .pullback
            .as_ref()
            .map(|f| f.build(bnm.cohomology(), d.cohomology()))
            .transpose()?;
        Ok(WreathData {
            name: self.name.clone(),
            n: self.n,
            m: self.m,
            stability: crate::falg::parse_plain_degree(&self.stability)?,
            e_n: bn.cohomology().element_owned(&self.e_n)?,
            e_m: bm.cohomology().element_owned(&self.e_m)?,
            e_nm: bnm.cohomology().element_owned(&self.e_nm)?,
            e_xy: d.cohomology().element_owned(&self.e_xy)?,
            bn,
            bm,
            d,
            bnm,
            circ,
            iota,
            pullback,
        })
    }
}

fn module_file_of(p: &Arc<dyn Pairing>, name: &str) -> Result<ModuleFile> {
    let h: &GradedModule = p.homology();
    let c: &GradedModule = p.cohomology();
    let basis = |m: &GradedModule| {
        m.basis()
            .iter()
            .map(|b| BasisEntry {
                label: b.label.clone(),
                degree: b.degree.to_string(),
            })
            .collect()
    };
    let mut cup = Vec::new();
    let mut cap = Vec::new();
    let mut kron = Vec::new();
    for a in 0..c.len() {
        for b in 0..c.len() {
            if let Some(r) = p.cup_basis(a, b) {
                cup.push(entry(c.label(a).into(), c.label(b).into(), c.to_pairs(&r)));
            }
        }
        for x in 0..h.len() {
            if let Some(r) = p.cap_basis(x, a) {
                cap.push(entry(h.label(x).into(), c.label(a).into(), h.to_pairs(&r)));
            }
            let v = p.kron_basis(a, x);
            if v != 0 {
                kron.push(KronEntry {
                    left: c.label(a).into(),
                    right: h.label(x).into(),
                    value: v as i64,
                });
            }
        }
    }
    let window = match &h.window {
        crate::falg::Window::All => WindowSpec::All,
        crate::falg::Window::UpTo { label, max } => WindowSpec::UpTo {
            label: label.clone(),
            max: *max,
        },
        crate::falg::Window::Predicate { .. } => {
            return Err(Error::Data(format!(
                "{name}: predicate windows have no file form"
            )));
        }
    };
    Ok(ModuleFile {
        name: name.to_string(),
        prime: p.field().p(),
        window,
        mode: p.mode(),
        homology: basis(h),
        cohomology: basis(c),
        unit: p.unit().map(|u| c.label(u).to_string()),
        cup,
        cap,
        kron,
    })
}

impl WreathFile {
    pub fn from_data(w: &WreathData) -> Result<WreathFile> {
        let mut keys: Vec<_> = w.circ.keys().copied().collect();
        keys.sort_unstable();
        let circ = keys
            .into_iter()
            .map(|(i, j)| {
                entry(
                    w.bn.homology().label(i).into(),
                    w.bm.homology().label(j).into(),
                    w.d.homology().to_pairs(&w.circ[&(i, j)]),
                )
            })
            .collect();
        Ok(WreathFile {
            name: w.name.clone(),
            n: w.n,
            m: w.m,
            stability: w.stability.to_string(),
            bn: module_file_of(&w.bn, "bn")?,
            bm: module_file_of(&w.bm, "bm")?,
            d: module_file_of(&w.d, "d")?,
            bnm: module_file_of(&w.bnm, "bnm")?,
            circ,
            iota: MapFile::from_map(&w.iota, w.d.homology(), w.bnm.homology()),
            e_n: w.bn.cohomology().to_pairs(&w.e_n),
            e_m: w.bm.cohomology().to_pairs(&w.e_m),
            e_nm: w.bnm.cohomology().to_pairs(&w.e_nm),
            e_xy: w.d.cohomology().to_pairs(&w.e_xy),
            pullback: w
                .pullback
                .as_ref()
                .map(|pb| MapFile::from_map(pb, w.bnm.cohomology(), w.d.cohomology())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_validates_and_products_verify() {
        let w = synthetic(3, 2, 4).unwrap();
        let samples = synthetic_samples(&w).unwrap();
        let report = validate(&w, &samples);
        assert!(report.ok(), "{:?}", report.failures);
        assert!(report.checked.iter().all(|&c| c > 0));
        for (x, y) in &samples {
            let z = product(x, y, &w).unwrap();
            assert_eq!(z.weight, 6);
            assert_eq!(
                z.degree().unwrap(),
                &x.degree().unwrap() + &y.degree().unwrap()
            );
        }
    }

    #[test]
    fn corrupted_entry_is_caught() {
        let mut w = synthetic(2, 3, 3).unwrap();
        let samples = synthetic_samples(&w).unwrap();
        let key = (
            w.bn.homology().require("b3").unwrap(),
            w.bm.homology().require("b2").unwrap(),
        );
        w.circ.insert(key, Element::zero());
        let report = validate(&w, &samples);
        assert!(report.failed(Axiom::CapRecursion));
        assert!(
            report.failures[0].witness.contains("k = 1"),
            "{}",
            report.failures[0].witness
        );
        let mut w2 = synthetic(2, 3, 3).unwrap();
        let wrong = Element::basis(w2.d.homology().require("b0|b0").unwrap());
        w2.circ.insert(key, wrong);
        assert!(validate(&w2, &[]).failed(Axiom::DegreeAdditivity));
    }

    #[test]
    fn weight_one_products() {
        let w = weight_one(3, 6).unwrap();
        let h = w.bn.homology();
        let t = |k: usize| Element::basis(h.require(&format!("t{k}")).unwrap());
        let c = |a: Element| constant(w.bn.clone(), a, 5, w.stability.clone()).unwrap();
        assert!(c(t(2)).verify().holds());
        assert_eq!(c(t(2)).degree().unwrap(), RODegree::trivial(-2));
        let ab = product(&c(t(1)), &c(t(2)), &w).unwrap();
        assert_eq!(ab.entries, c(t(3)).entries);
        let one = product(&c(t(0)), &c(t(4)), &w).unwrap();
        assert_eq!(one.entries, c(t(4)).entries);
        let zero = c(Element::zero());
        assert!(zero.verify().holds());
        let report = validate(&w, &[(c(t(1)), c(t(2)))]);
        assert!(report.ok());
    }

    #[test]
    fn unit_laws_on_a_ladder() {
        let l = built(&ladder_module("L2", 2, 1, 12)).unwrap();
        let e = Element::basis(l.cohomology().require("e1").unwrap());
        let chi = ladder_sequence(&l, 2, 0, 2).unwrap();
        let left = left_unit(l.clone(), e.clone(), 2, RODegree::trivial(1)).unwrap();
        let z = product(&unit_sequence(&left, 20).unwrap(), &chi, &left).unwrap();
        assert!(z.agrees_with(&chi));
        let right = right_unit(l.clone(), e, 2, RODegree::trivial(1)).unwrap();
        let z = product(&chi, &unit_sequence(&right, 20).unwrap(), &right).unwrap();
        assert!(z.agrees_with(&chi));
        assert!(validate(&left, &[]).ok());
    }

    #[test]
    fn file_round_trip() {
        let w = synthetic(2, 2, 1).unwrap();
        let f = WreathFile::from_data(&w).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let back = WreathFile::parse("w.json", &text).unwrap().build().unwrap();
        let samples = synthetic_samples(&back).unwrap();
        assert!(validate(&back, &samples).ok());
        assert_eq!(back.circ.len(), w.circ.len());
    }

    #[test]
    fn pushforward_from_sylow_is_onto() {
        // Σ2 ≀ Σ2 has odd index in Σ4, so ι_* is onto at p = 2.
        let (_, tgt, maps) = classical_22_pushforward(5).unwrap();
        for (n, m) in maps.iter().enumerate() {
            assert_eq!(m.rank(tgt.field()), tgt.dim(n), "degree {n}");
        }
    }
}
