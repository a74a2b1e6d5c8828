//! Eulerian sequences: finite truncations `(x_0, …, x_T)` of homology
//! classes with `x_{i+1} ⌢ e = x_i` and `x_0 ⌢ e = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::falg::{dual_basis, total, Element, GradedModule, LinearMap, Pairing, TensorElement};
use crate::linalg::{Echelon, Matrix};
use crate::rodegree::RODegree;
use crate::{Error, Fp, Result};

/// Outcome of a finite verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Holds {
        horizon: usize,
    },
    Fails {
        index: usize,
        reason: String,
    },
    /// The presented data cannot decide the question.
    Inconclusive {
        index: usize,
        reason: String,
    },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds { horizon } => write!(f, "holds through index {horizon}"),
            Verdict::Fails { index, reason } => write!(f, "fails at index {index}: {reason}"),
            Verdict::Inconclusive { index, reason } => {
                write!(f, "inconclusive at index {index}: {reason}")
            }
        }
    }
}

#[derive(Clone)]
pub struct EulerianSequence {
    pub ambient: Arc<dyn Pairing>,
    pub weight: usize,
    pub stability: RODegree,
    pub euler: Element,
    pub entries: Vec<Element>,
    /// Degree recorded with the sequence; needed when every entry is zero.
    pub declared: Option<RODegree>,
}

impl fmt::Debug for EulerianSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "EulerianSequence(n={}, V={}, {})",
            self.weight,
            self.stability,
            self.format()
        )
    }
}

impl EulerianSequence {
    pub fn new(
        ambient: Arc<dyn Pairing>,
        weight: usize,
        stability: RODegree,
        euler: Element,
        entries: Vec<Element>,
        declared: Option<RODegree>,
    ) -> Result<EulerianSequence> {
        if weight == 0 {
            return Err(Error::Precondition("weight must be at least 1".into()));
        }
        if entries.is_empty() {
            return Err(Error::Precondition(
                "a sequence needs at least one entry".into(),
            ));
        }
        let s = EulerianSequence {
            ambient,
            weight,
            stability,
            euler,
            entries,
            declared,
        };
        let de = s
            .ambient
            .cohomology()
            .degree_of(&s.euler)?
            .unwrap_or_default();
        if !s.euler.is_zero() && de != s.euler_degree() {
            return Err(Error::Degree(format!(
                "Euler element has degree {de}, expected (n-1)V = {}",
                s.euler_degree()
            )));
        }
        for x in &s.entries {
            s.ambient.homology().degree_of(x)?;
        }
        Ok(s)
    }

    pub fn homology(&self) -> &GradedModule {
        self.ambient.homology()
    }

    pub fn field(&self) -> Fp {
        self.ambient.field()
    }

    pub fn horizon(&self) -> usize {
        self.entries.len() - 1
    }

    /// `(n − 1) V`.
    pub fn euler_degree(&self) -> RODegree {
        &self.stability * (self.weight as i64 - 1)
    }

    pub fn format(&self) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|x| self.homology().format(x))
            .collect();
        format!("({})", parts.join(", "))
    }

    fn like(&self, entries: Vec<Element>, declared: Option<RODegree>) -> EulerianSequence {
        EulerianSequence {
            entries,
            declared,
            ..self.clone()
        }
    }

    /// Checks both defining conditions through the horizon. Weight-1
    /// sequences are constant against the unit, so the `x_0` condition is
    /// not imposed on them.
    pub fn verify(&self) -> Verdict {
        let h = self.homology();
        for (i, x) in self.entries.iter().enumerate() {
            if let Ok(Some(d)) = h.degree_of(x) {
                if !h.in_window(&d) {
                    return Verdict::Inconclusive {
                        index: i,
                        reason: format!("degree {d} is outside the window"),
                    };
                }
            }
            if i == 0 && self.weight == 1 {
                continue;
            }
            let capped = match self.ambient.cap(x, &self.euler) {
                Ok(c) => c,
                Err(Error::Window(m)) => {
                    return Verdict::Inconclusive {
                        index: i,
                        reason: m,
                    }
                }
                Err(e) => {
                    return Verdict::Fails {
                        index: i,
                        reason: e.to_string(),
                    }
                }
            };
            let expect = if i == 0 {
                Element::zero()
            } else {
                self.entries[i - 1].clone()
            };
            if capped != expect {
                let reason = if i == 0 {
                    format!("x_0 ⌢ e = {} is not zero", h.format(&capped))
                } else {
                    format!(
                        "x_{i} ⌢ e = {} but x_{} = {}",
                        h.format(&capped),
                        i - 1,
                        h.format(&expect)
                    )
                };
                return Verdict::Fails { index: i, reason };
            }
        }
        Verdict::Holds {
            horizon: self.horizon(),
        }
    }

    /// `t (n−1) V − |x_t|`, checked to be independent of `t` and to agree
    /// with the declared degree.
    pub fn degree(&self) -> Result<RODegree> {
        let step = self.euler_degree();
        let mut found: Option<(usize, RODegree)> = None;
        for (t, x) in self.entries.iter().enumerate() {
            let Some(dx) = self.homology().degree_of(x)? else {
                continue;
            };
            let d = &(&step * t as i64) - &dx;
            match &found {
                None => found = Some((t, d)),
                Some((t0, d0)) if *d0 != d => {
                    return Err(Error::Degree(format!(
                        "degree is {d0} at index {t0} but {d} at index {t}"
                    )));
                }
                _ => {}
            }
        }
        match (found, &self.declared) {
            (Some((t, d)), Some(dec)) if &d != dec => Err(Error::Degree(format!(
                "entries give degree {d} (index {t}) but {dec} was declared"
            ))),
            (Some((_, d)), _) => Ok(d),
            (None, Some(dec)) => Ok(dec.clone()),
            (None, None) => Err(Error::Degree(
                "the zero sequence carries no declared degree".into(),
            )),
        }
    }

    /// Prepends `k` zeros.
    pub fn shift(&self, k: usize) -> EulerianSequence {
        let mut entries = vec![Element::zero(); k];
        entries.extend(self.entries.iter().cloned());
        let declared = self
            .degree()
            .ok()
            .map(|d| &d + &(&self.euler_degree() * k as i64));
        self.like(entries, declared)
    }

    /// `(x_0, x_k, x_{2k}, …)` against `e^{⌣k}` with stability `kV`.
    pub fn reindex(&self, k: usize) -> Result<EulerianSequence> {
        if k == 0 {
            return Err(Error::Precondition(
                "reindexing step must be positive".into(),
            ));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let euler = self.ambient.cup_power(&self.euler, k)?;
        let entries = self.entries.iter().step_by(k).cloned().collect();
        // (n-1)kV equals the degree of e^k only for weight 2 in general; the
        // new sequence keeps weight n with stability kV.
        Ok(EulerianSequence {
            ambient: self.ambient.clone(),
            weight: self.weight,
            stability: &self.stability * k as i64,
            euler,
            entries,
            declared: self.degree().ok(),
        })
    }

    pub fn truncate(&self, horizon: usize) -> EulerianSequence {
        let n = (horizon + 1).min(self.entries.len());
        self.like(
            self.entries[..n].to_vec(),
            self.declared.clone().or_else(|| self.degree().ok()),
        )
    }

    /// Entrywise equality through the shorter horizon.
    pub fn agrees_with(&self, other: &EulerianSequence) -> bool {
        self.entries.iter().zip(&other.entries).all(|(a, b)| a == b)
    }

    fn check_shape(&self, other: &EulerianSequence) -> Result<()> {
        if self.weight != other.weight
            || self.stability != other.stability
            || self.euler != other.euler
        {
            return Err(Error::Structure(
                "sequences differ in weight, stability or Euler element".into(),
            ));
        }
        if !Arc::ptr_eq(&self.ambient, &other.ambient)
            && self.homology().name() != other.homology().name()
        {
            return Err(Error::Structure(
                "sequences live in different modules".into(),
            ));
        }
        Ok(())
    }

    /// Pointwise sum through the shorter horizon.
    pub fn add(&self, other: &EulerianSequence) -> Result<EulerianSequence> {
        self.check_shape(other)?;
        let f = self.field();
        let entries: Vec<Element> = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.plus(f, b))
            .collect();
        let declared = match (self.degree().ok(), other.degree().ok()) {
            (Some(a), Some(b)) if a == b => Some(a),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
            (Some(a), Some(b)) => {
                return Err(Error::Degree(format!(
                    "cannot add sequences of degrees {a} and {b}"
                )));
            }
        };
        Ok(self.like(entries, declared))
    }

    pub fn scale(&self, c: u32) -> EulerianSequence {
        let f = self.field();
        self.like(
            self.entries.iter().map(|x| x.scaled(f, c)).collect(),
            self.degree().ok(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Element::is_zero)
    }

    /// Every nonzero entry sits in a non-virtual degree.
    pub fn is_integral(&self) -> bool {
        self.entries
            .iter()
            .all(|x| match self.homology().degree_of(x) {
                Ok(Some(d)) => !d.is_virtual(),
                Ok(None) => true,
                Err(_) => false,
            })
    }
}

/// Pushes a sequence through a structure map (restriction, geometric or
/// modified geometric fixed points) and re-verifies it against the supplied
/// Euler element. A failed re-verification is a data inconsistency.
pub fn map_sequence(
    chi: &EulerianSequence,
    map: &LinearMap,
    target: Arc<dyn Pairing>,
    euler: Element,
    stability: RODegree,
) -> Result<EulerianSequence> {
    if map.field() != target.field() {
        return Err(Error::Precondition(
            "structure map and target differ in prime".into(),
        ));
    }
    let entries = chi
        .entries
        .iter()
        .map(|x| map.apply(x))
        .collect::<Result<Vec<_>>>()?;
    let declared = match chi.degree() {
        Ok(d) => Some(&map.target_degree(&d)? - &(&map.shift * 2)),
        Err(_) => None,
    };
    let out = EulerianSequence::new(target, chi.weight, stability, euler, entries, None)?;
    let out = EulerianSequence {
        declared: if out.is_zero() { declared } else { None },
        ..out
    };
    if let Verdict::Fails { index, reason } = out.verify() {
        return Err(Error::Data(format!(
            "image sequence is not Eulerian at index {index}: {reason}"
        )));
    }
    Ok(out)
}

/// Restriction to a subgroup along `res_map`, with the restricted Euler
/// element (for example `ẽ_K^{|G:K|}`).
pub fn restrict(
    chi: &EulerianSequence,
    res_map: &LinearMap,
    target: Arc<dyn Pairing>,
    res_euler: Element,
    res_stability: RODegree,
) -> Result<EulerianSequence> {
    map_sequence(chi, res_map, target, res_euler, res_stability)
}

/// Geometric fixed points along supplied structure data; the stability of
/// the result is `V^K`.
pub fn geo_fix(
    chi: &EulerianSequence,
    fix_map: &LinearMap,
    target: Arc<dyn Pairing>,
    fix_euler: Element,
    fixed_stability: RODegree,
) -> Result<EulerianSequence> {
    map_sequence(chi, fix_map, target, fix_euler, fixed_stability)
}

/// Modified geometric fixed points along supplied structure data, which
/// must send the Euler class of G to that of W(K).
pub fn mod_geo_fix(
    chi: &EulerianSequence,
    fix_map: &LinearMap,
    target: Arc<dyn Pairing>,
    fix_euler: Element,
    fixed_stability: RODegree,
) -> Result<EulerianSequence> {
    map_sequence(chi, fix_map, target, fix_euler, fixed_stability)
}

/// The k-fold coproduct of a homogeneous class, dual to the iterated cup
/// product: the coefficient of `ξ_1^∨ ⊗ … ⊗ ξ_k^∨` is `<ξ_1 ⌣ … ⌣ ξ_k, x>`,
/// with Koszul signs at odd p.
pub fn coproduct(p: &dyn Pairing, x: &Element, k: usize) -> Result<TensorElement> {
    let f = p.field();
    let mut out = TensorElement::zero();
    let Some(d) = p.homology().degree_of(x)? else {
        return Ok(out);
    };
    if k == 0 {
        return Err(Error::Precondition(
            "coproduct arity must be positive".into(),
        ));
    }
    let degrees: Vec<RODegree> = p.cohomology().degrees().cloned().collect();
    let mut duals: BTreeMap<RODegree, Vec<(usize, Element)>> = BTreeMap::new();
    for dg in &degrees {
        if p.homology().slice(dg).is_empty() {
            continue;
        }
        duals.insert(dg.clone(), dual_basis(p, dg)?);
    }
    // Choose degrees d_1..d_{k-1}; the last one is forced.
    let mut stack: Vec<(Vec<RODegree>, RODegree)> = vec![(Vec::new(), d.clone())];
    while let Some((chosen, rest)) = stack.pop() {
        if chosen.len() + 1 == k {
            let mut all = chosen.clone();
            all.push(rest);
            if all.iter().any(|g| !duals.contains_key(g)) {
                continue;
            }
            expand(p, f, &all, &duals, x, &mut out)?;
            continue;
        }
        for dg in duals.keys() {
            let r = &rest - dg;
            if r.is_virtual() && !d.is_virtual() {
                continue;
            }
            let mut c = chosen.clone();
            c.push(dg.clone());
            stack.push((c, r));
        }
    }
    Ok(out)
}

fn expand(
    p: &dyn Pairing,
    f: Fp,
    degrees: &[RODegree],
    duals: &BTreeMap<RODegree, Vec<(usize, Element)>>,
    x: &Element,
    out: &mut TensorElement,
) -> Result<()> {
    let slots: Vec<&Vec<(usize, Element)>> = degrees.iter().map(|d| &duals[d]).collect();
    let mut idx = vec![0usize; slots.len()];
    loop {
        let mut prod = Element::basis(slots[0][idx[0]].0);
        for s in 1..slots.len() {
            prod = p.cup(&prod, &Element::basis(slots[s][idx[s]].0))?;
        }
        let c = p.kron(&prod, x)?;
        if c != 0 {
            let mut sign_odd = 0i64;
            if f.p() != 2 {
                let ints: Vec<i64> = degrees.iter().map(total).collect();
                for i in 0..ints.len() {
                    for j in i + 1..ints.len() {
                        sign_odd += ints[i] * ints[j];
                    }
                }
            }
            let c = if sign_odd.rem_euclid(2) == 1 {
                f.neg(c)
            } else {
                c
            };
            // Expand the tensor product of the dual homology elements.
            let mut partial: Vec<(Vec<usize>, u32)> = vec![(Vec::new(), c)];
            for s in 0..slots.len() {
                let mut next = Vec::new();
                for (key, a) in &partial {
                    for (i, b) in slots[s][idx[s]].1.terms() {
                        let mut k2 = key.clone();
                        k2.push(i);
                        next.push((k2, f.mul(*a, b)));
                    }
                }
                partial = next;
            }
            for (key, a) in partial {
                out.add_term(f, key, a);
            }
        }
        // Odometer over the slot choices.
        let mut s = 0;
        loop {
            if s == slots.len() {
                return Ok(());
            }
            idx[s] += 1;
            if idx[s] < slots[s].len() {
                break;
            }
            idx[s] = 0;
            s += 1;
        }
    }
}

/// Image of a sequence under the diagonal: entries `Δ_k(x_0), Δ_k(x_k), …`
/// tested against the k-fold external Euler element.
#[derive(Clone)]
pub struct PseudoSequence {
    pub ambient: Arc<dyn Pairing>,
    pub fold: usize,
    pub euler: Element,
    pub entries: Vec<TensorElement>,
}

impl fmt::Debug for PseudoSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|x| x.format(self.ambient.homology()))
            .collect();
        write!(f, "PseudoSequence(k={}, ({}))", self.fold, parts.join(", "))
    }
}

pub fn diagonal(chi: &EulerianSequence, k: usize) -> Result<PseudoSequence> {
    let entries = chi
        .entries
        .iter()
        .step_by(k.max(1))
        .map(|x| coproduct(chi.ambient.as_ref(), x, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudoSequence {
        ambient: chi.ambient.clone(),
        fold: k,
        euler: chi.euler.clone(),
        entries,
    })
}

impl PseudoSequence {
    pub fn verify(&self) -> Verdict {
        let es = vec![self.euler.clone(); self.fold];
        for (i, x) in self.entries.iter().enumerate() {
            let capped = match x.cap_external(self.ambient.as_ref(), &es) {
                Ok(c) => c,
                Err(Error::Window(m)) => {
                    return Verdict::Inconclusive {
                        index: i,
                        reason: m,
                    }
                }
                Err(e) => {
                    return Verdict::Fails {
                        index: i,
                        reason: e.to_string(),
                    }
                }
            };
            let expect = if i == 0 {
                TensorElement::zero()
            } else {
                self.entries[i - 1].clone()
            };
            if capped != expect {
                let h = self.ambient.homology();
                return Verdict::Fails {
                    index: i,
                    reason: format!(
                        "x̂_{i} ⌢ e^×{} = {} but expected {}",
                        self.fold,
                        capped.format(h),
                        expect.format(h)
                    ),
                };
            }
        }
        Verdict::Holds {
            horizon: self.entries.len().saturating_sub(1),
        }
    }
}

/// Solutions for one base degree `D`: entries `x_t` live in degree
/// `t (n−1) V − D` for `t ≤ horizon`.
#[derive(Clone, Debug)]
pub struct EnumerationSlice {
    pub base_degree: RODegree,
    pub horizon: usize,
    pub basis: Vec<EulerianSequence>,
}

/// All sequences with the requested base degrees, each up to the largest
/// horizon (at most the requested one) for which every entry degree lies in
/// the window. Degrees whose first slice is outside the window are skipped.
/// The basis of each slice is in reduced echelon form over the concatenated
/// entry coordinates.
pub fn enumerate(
    ambient: Arc<dyn Pairing>,
    euler: &Element,
    weight: usize,
    stability: &RODegree,
    targets: &[(RODegree, usize)],
) -> Result<Vec<EnumerationSlice>> {
    let f = ambient.field();
    let h = ambient.homology();
    let step = stability * (weight as i64 - 1);
    let cap = LinearMap::cap_with(ambient.as_ref(), euler)?;
    let mut out = Vec::new();
    for (d, max_t) in targets {
        let degree_at = |t: usize| &(&step * t as i64) - d;
        let mut horizon = None;
        for t in 0..=*max_t {
            if !h.in_window(&degree_at(t)) {
                break;
            }
            horizon = Some(t);
        }
        let Some(horizon) = horizon else { continue };
        let slices: Vec<Vec<usize>> = (0..=horizon)
            .map(|t| h.slice(&degree_at(t)).to_vec())
            .collect();
        let offsets: Vec<usize> = slices
            .iter()
            .scan(0, |acc, s| {
                let o = *acc;
                *acc += s.len();
                Some(o)
            })
            .collect();
        let unknowns: usize = slices.iter().map(Vec::len).sum();
        let mut rows: Vec<Vec<u32>> = Vec::new();
        for t in 0..=horizon {
            if t == 0 && weight == 1 {
                continue;
            }
            let (src, tgt, m) = cap.slice_matrix(h, h, &degree_at(t))?;
            debug_assert_eq!(src, slices[t]);
            // Rows: (x_t ⌢ e) − x_{t−1} = 0, coordinates along the target slice.
            for (r, &ti) in tgt.iter().enumerate() {
                let mut row = vec![0u32; unknowns];
                for c in 0..src.len() {
                    row[offsets[t] + c] = m.get(r, c);
                }
                if t > 0 {
                    if let Some(pos) = slices[t - 1].iter().position(|&i| i == ti) {
                        row[offsets[t - 1] + pos] = f.neg(1);
                    }
                }
                rows.push(row);
            }
            if t > 0 && degree_at(t - 1) != cap.target_degree(&degree_at(t))? {
                return Err(Error::Internal("cap target slice mismatch".into()));
            }
        }
        let sys = Matrix::from_rows(&rows, unknowns);
        let mut kernel = Matrix::from_rows(&sys.kernel(f), unknowns);
        let pivots = kernel.rref(f);
        let mut basis = Vec::new();
        for r in 0..pivots.len() {
            let v = kernel.row(r);
            let entries = (0..=horizon)
                .map(|t| {
                    Element::from_dense(f, &slices[t], &v[offsets[t]..offsets[t] + slices[t].len()])
                })
                .collect();
            basis.push(EulerianSequence::new(
                ambient.clone(),
                weight,
                stability.clone(),
                euler.clone(),
                entries,
                Some(d.clone()),
            )?);
        }
        out.push(EnumerationSlice {
            base_degree: d.clone(),
            horizon,
            basis,
        });
    }
    Ok(out)
}

/// Flattened coordinates of a sequence truncated to `horizon`, indexed by
/// `(t, basis index)`.
fn flatten(
    chi: &EulerianSequence,
    horizon: usize,
    index: &mut BTreeMap<(usize, usize), usize>,
) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    for t in 0..=horizon.min(chi.horizon()) {
        for (i, c) in chi.entries[t].terms() {
            let n = index.len();
            let k = *index.entry((t, i)).or_insert(n);
            out.push((k, c));
        }
    }
    out
}

/// True when `a` and `b` span the same space of truncated sequences.
pub fn same_span(a: &[EulerianSequence], b: &[EulerianSequence], horizon: usize) -> bool {
    let Some(f) = a.first().or(b.first()).map(|s| s.field()) else {
        return true;
    };
    let mut index = BTreeMap::new();
    let fa: Vec<_> = a.iter().map(|s| flatten(s, horizon, &mut index)).collect();
    let fb: Vec<_> = b.iter().map(|s| flatten(s, horizon, &mut index)).collect();
    let dense = |v: &Vec<(usize, u32)>| {
        let mut d = vec![0u32; index.len()];
        for &(k, c) in v {
            d[k] = c;
        }
        d
    };
    let mut ea = Echelon::new(f, index.len());
    for v in &fa {
        ea.insert(&dense(v));
    }
    let mut eb = Echelon::new(f, index.len());
    for v in &fb {
        eb.insert(&dense(v));
    }
    ea.len() == eb.len() && fb.iter().all(|v| ea.contains(&dense(v)))
}

/// A named sequence together with the shifts used for denotation.
#[derive(Clone, Debug)]
pub struct Named {
    pub name: String,
    pub sequence: EulerianSequence,
}

/// Coordinates of a sequence in the span of shifted named sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Denotation {
    /// `(name, shift, coefficient)` triples; empty for the zero operation.
    Named {
        terms: Vec<(String, usize, u32)>,
    },
    Unnamed {
        residual: Vec<String>,
    },
}

pub fn denote(chi: &EulerianSequence, catalog: &[Named]) -> Result<Denotation> {
    if chi.is_zero() {
        return Ok(Denotation::Named { terms: Vec::new() });
    }
    let d = chi.degree()?;
    let step = chi.euler_degree();
    let mut candidates: Vec<(String, usize, EulerianSequence)> = Vec::new();
    for n in catalog {
        if n.sequence.weight != chi.weight || n.sequence.stability != chi.stability {
            continue;
        }
        let base = n.sequence.degree()?;
        for k in 0..=chi.horizon() {
            if &base + &(&step * k as i64) == d {
                candidates.push((n.name.clone(), k, n.sequence.shift(k)));
            }
            if step.is_zero() {
                break;
            }
        }
    }
    let horizon = candidates
        .iter()
        .map(|c| c.2.horizon())
        .chain([chi.horizon()])
        .min()
        .unwrap_or(0);
    let f = chi.field();
    let mut index = BTreeMap::new();
    let target = flatten(chi, horizon, &mut index);
    let cols: Vec<_> = candidates
        .iter()
        .map(|c| flatten(&c.2, horizon, &mut index))
        .collect();
    let dense = |v: &Vec<(usize, u32)>| {
        let mut out = vec![0u32; index.len()];
        for &(k, c) in v {
            out[k] = c;
        }
        out
    };
    let m = Matrix::from_columns(&cols.iter().map(dense).collect::<Vec<_>>(), index.len());
    let solver = crate::linalg::Solver::new(f, &m);
    match solver.solve(&dense(&target)) {
        Some(x) => Ok(Denotation::Named {
            terms: candidates
                .iter()
                .zip(x)
                .filter(|(_, c)| *c != 0)
                .map(|((name, k, _), c)| (name.clone(), *k, c))
                .collect(),
        }),
        None => {
            let mut span = Echelon::new(f, index.len());
            for c in &cols {
                span.insert(&dense(c));
            }
            let r = span.reduce(&dense(&target));
            let inv: BTreeMap<usize, (usize, usize)> =
                index.iter().map(|(&k, &v)| (v, k)).collect();
            let mut per_t: BTreeMap<usize, Element> = BTreeMap::new();
            for (k, &c) in r.iter().enumerate() {
                if c != 0 {
                    let (t, i) = inv[&k];
                    per_t.entry(t).or_default().add_term(f, i, c);
                }
            }
            Ok(Denotation::Unnamed {
                residual: per_t
                    .iter()
                    .map(|(t, e)| format!("x_{t}: {}", chi.homology().format(e)))
                    .collect(),
            })
        }
    }
}

/// JSON form of a sequence.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub weight: usize,
    pub stability: String,
    pub euler: Vec<(String, i64)>,
    pub entries: Vec<Vec<(String, i64)>>,
    #[serde(default)]
    pub degree: Option<String>,
}

impl SequenceFile {
    pub fn parse(source_name: &str, text: &str) -> Result<SequenceFile> {
        serde_json::from_str(text).map_err(|e| Error::from_json(source_name, e))
    }

    /// Resolves labels against an ambient presentation. `parse_degree`
    /// reads the stability and declared degree.
    pub fn build(
        &self,
        ambient: Arc<dyn Pairing>,
        parse_degree: &dyn Fn(&str) -> Result<RODegree>,
    ) -> Result<EulerianSequence> {
        let euler = ambient.cohomology().element_owned(&self.euler)?;
        let entries = self
            .entries
            .iter()
            .map(|e| ambient.homology().element_owned(e))
            .collect::<Result<Vec<_>>>()?;
        let declared = self.degree.as_deref().map(parse_degree).transpose()?;
        EulerianSequence::new(
            ambient,
            self.weight,
            parse_degree(&self.stability)?,
            euler,
            entries,
            declared,
        )
    }

    pub fn from_sequence(chi: &EulerianSequence) -> SequenceFile {
        SequenceFile {
            weight: chi.weight,
            stability: chi.stability.to_string(),
            euler: chi.ambient.cohomology().to_pairs(&chi.euler),
            entries: chi
                .entries
                .iter()
                .map(|x| chi.homology().to_pairs(x))
                .collect(),
            degree: chi.degree().ok().map(|d| d.to_string()),
        }
    }
}
