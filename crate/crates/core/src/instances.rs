//! Shipped instance data: H_*(BΣ_2; F_2), H_*(BC_p; F_p) at odd p and the
//! C2-equivariant ring `M_2[[y, e_ρ]]/(y² = ay + ue_ρ)` over a box of
//! coefficient monomials, with their named sequences and structure maps.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eulerian::{EulerianSequence, Named, Verdict};
use crate::falg::{
    validate_pairing, BasisElement, BasisEntry, Element, GradedModule, KronEntry, LinearMap, Mode,
    ModuleFile, Pairing, ProductEntry, Window, WindowSpec,
};
use crate::fingroup::Subgroup;
use crate::repring::{self, parse_degree_with, CharacterTable, Library, SubgroupData};
use crate::rodegree::RODegree;
use crate::{Error, Fp, Result};

/// Data directory: `EULERCALC_DATA_DIR` when set, else the crate's `data/`.
pub fn data_dir() -> PathBuf {
    match std::env::var_os("EULERCALC_DATA_DIR") {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"),
    }
}

/// Names accepted by [`load`].
pub const NAMES: &[&str] = &[
    "classical2",
    "classical_p3",
    "classical_p5",
    "c2equivariant",
];

/// Top degree of the shipped classical2 module.
pub const CLASSICAL2_TOP: usize = 40;
/// Top power of `u` in the shipped classical_p modules.
pub const CLASSICAL_P_TOP: usize = 30;

/// How a named sequence and its shifts are reported as operations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationTemplate {
    pub bockstein: bool,
    pub twist: String,
}

#[derive(Clone, Debug)]
pub struct NamedSequence {
    pub name: String,
    pub sequence: EulerianSequence,
    pub operation: OperationTemplate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Restriction,
    ModifiedFixedPoints,
}

/// A structure map from this bundle to another bundle.
#[derive(Clone)]
pub struct StructureMap {
    pub kind: MapKind,
    /// Name of the subgroup K (restriction) or of W(K) (fixed points).
    pub group: String,
    pub target: Arc<InstanceBundle>,
    pub map: LinearMap,
    /// Image of the Euler element in the target.
    pub euler: Element,
    pub stability: RODegree,
}

#[derive(Clone)]
pub struct InstanceBundle {
    pub name: String,
    pub prime: u32,
    pub group: String,
    pub table: Arc<CharacterTable>,
    pub pairing: Arc<dyn Pairing>,
    pub euler: Element,
    pub weight: usize,
    pub stability: RODegree,
    pub named: Vec<NamedSequence>,
    pub maps: Vec<StructureMap>,
}

impl std::fmt::Debug for InstanceBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "InstanceBundle({}, F_{}, G={})",
            self.name, self.prime, self.group
        )
    }
}

impl InstanceBundle {
    pub fn field(&self) -> Fp {
        self.pairing.field()
    }

    /// Degree expressions over this bundle's group, `rho` included.
    pub fn parse_degree(&self, expr: &str) -> Result<RODegree> {
        self.table.parse_degree(expr)
    }

    pub fn named(&self, name: &str) -> Result<&NamedSequence> {
        self.named
            .iter()
            .find(|n| n.name == name)
            .ok_or_else(|| Error::Data(format!("{} has no named sequence {name:?}", self.name)))
    }

    pub fn catalog(&self) -> Vec<Named> {
        self.named
            .iter()
            .map(|n| Named {
                name: n.name.clone(),
                sequence: n.sequence.clone(),
            })
            .collect()
    }

    pub fn structure_map(&self, kind: MapKind, group: &str) -> Result<&StructureMap> {
        self.maps
            .iter()
            .find(|m| m.kind == kind && m.group == group)
            .ok_or_else(|| Error::Data(format!("{} ships no {kind:?} map for {group}", self.name)))
    }

    /// A sequence in this bundle's ambient with its Euler element.
    pub fn sequence(
        &self,
        entries: Vec<Element>,
        declared: Option<RODegree>,
    ) -> Result<EulerianSequence> {
        EulerianSequence::new(
            self.pairing.clone(),
            self.weight,
            self.stability.clone(),
            self.euler.clone(),
            entries,
            declared,
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub name: String,
    pub degree: String,
    pub entries: Vec<Vec<(String, i64)>>,
    pub operation: OperationTemplate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableInstance {
    pub name: String,
    pub group: String,
    pub euler: Vec<(String, i64)>,
    pub weight: usize,
    pub stability: String,
    pub module: ModuleFile,
    pub sequences: Vec<SequenceSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    /// Exponents of `a` and of `u` range over `0..width`.
    pub width: usize,
    /// Largest power of `e_ρ` (and index of `b`, `c`).
    pub ladder: usize,
}

/// A named family in the C2 file: entries `X_{t - offset}` for `t ≥ offset`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    pub generator: String,
    pub offset: usize,
    pub operation: OperationTemplate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionSpec {
    pub subgroup: String,
    pub target: String,
    pub degree_map: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HuKrizInstance {
    pub name: String,
    pub prime: u32,
    pub group: String,
    /// Degrees of `y` and `e_rho`; those of `a` and `u` follow from the relation.
    pub degrees: BTreeMap<String, String>,
    pub relation: String,
    #[serde(rename = "box")]
    pub coefficient_box: BoxSpec,
    pub euler: String,
    pub weight: usize,
    pub stability: String,
    pub sequences: Vec<FamilySpec>,
    pub restriction: RestrictionSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceFile {
    Table(TableInstance),
    HuKriz(HuKrizInstance),
}

impl InstanceFile {
    pub fn parse(source_name: &str, text: &str) -> Result<InstanceFile> {
        serde_json::from_str(text).map_err(|e| Error::from_json(source_name, e))
    }
}

fn pairs(label: &str) -> Vec<(String, i64)> {
    vec![(label.to_string(), 1)]
}

/// H_*(BΣ_2; F_2) through degree `top`: `b_k` dual to `e_1^k`.
pub fn classical2_file(top: usize) -> InstanceFile {
    let basis = |prefix: &str| -> Vec<BasisEntry> {
        (0..=top)
            .map(|k| BasisEntry {
                label: format!("{prefix}{k}"),
                degree: k.to_string(),
            })
            .collect()
    };
    let mut cup = Vec::new();
    let mut cap = Vec::new();
    let mut kron = Vec::new();
    for i in 0..=top {
        kron.push(KronEntry {
            left: format!("e{i}"),
            right: format!("b{i}"),
            value: 1,
        });
        for j in 0..=top {
            if i + j <= top {
                cup.push(ProductEntry {
                    left: format!("e{i}"),
                    right: format!("e{j}"),
                    result: pairs(&format!("e{}", i + j)),
                });
            }
            let result = if j >= i {
                pairs(&format!("b{}", j - i))
            } else {
                Vec::new()
            };
            cap.push(ProductEntry {
                left: format!("b{j}"),
                right: format!("e{i}"),
                result,
            });
        }
    }
    let module = ModuleFile {
        name: "classical2".into(),
        prime: 2,
        window: WindowSpec::UpTo {
            label: "1".into(),
            max: top as i64,
        },
        mode: Mode::Strict,
        homology: basis("b"),
        cohomology: basis("e"),
        unit: Some("e0".into()),
        cup,
        cap,
        kron,
    };
    InstanceFile::Table(TableInstance {
        name: "classical2".into(),
        group: "e".into(),
        euler: pairs("e1"),
        weight: 2,
        stability: "1".into(),
        module,
        sequences: vec![SequenceSpec {
            name: "beta".into(),
            degree: "0".into(),
            entries: (0..=top).map(|k| pairs(&format!("b{k}"))).collect(),
            operation: OperationTemplate {
                bockstein: false,
                twist: "1".into(),
            },
        }],
    })
}

/// H_*(BC_p; F_p) for odd p through `u^top`: cohomology `Λ(y) ⊗ F_p[u]` with
/// `|y| = 1`, `|u| = 2`; `b_j` is dual to `u^j` and `c_j` to `y u^{j-1}`.
pub fn classical_p_file(p: u32, top: usize) -> InstanceFile {
    let name = format!("classical_p{p}");
    let mut homology = Vec::new();
    let mut cohomology = Vec::new();
    for j in 0..=top {
        homology.push(BasisEntry {
            label: format!("b{j}"),
            degree: (2 * j).to_string(),
        });
        if j >= 1 {
            homology.push(BasisEntry {
                label: format!("c{j}"),
                degree: (2 * j - 1).to_string(),
            });
        }
        cohomology.push(BasisEntry {
            label: format!("u{j}"),
            degree: (2 * j).to_string(),
        });
        if j < top {
            cohomology.push(BasisEntry {
                label: format!("yu{j}"),
                degree: (2 * j + 1).to_string(),
            });
        }
    }
    let mut cup = Vec::new();
    let mut cap = Vec::new();
    let mut kron = Vec::new();
    let entry = |l: String, r: String, result: Vec<(String, i64)>| ProductEntry {
        left: l,
        right: r,
        result,
    };
    for i in 0..=top {
        kron.push(KronEntry {
            left: format!("u{i}"),
            right: format!("b{i}"),
            value: 1,
        });
        if i >= 1 {
            kron.push(KronEntry {
                left: format!("yu{}", i - 1),
                right: format!("c{i}"),
                value: 1,
            });
        }
        for j in 0..=top {
            if i + j <= top {
                cup.push(entry(
                    format!("u{i}"),
                    format!("u{j}"),
                    pairs(&format!("u{}", i + j)),
                ));
            }
            if i + j < top {
                cup.push(entry(
                    format!("u{i}"),
                    format!("yu{j}"),
                    pairs(&format!("yu{}", i + j)),
                ));
                cup.push(entry(
                    format!("yu{i}"),
                    format!("u{j}"),
                    pairs(&format!("yu{}", i + j)),
                ));
                cup.push(entry(format!("yu{i}"), format!("yu{j}"), Vec::new()));
            }
            // Caps of b_j and c_j by u^i and y u^i.
            let b = if j >= i {
                pairs(&format!("b{}", j - i))
            } else {
                Vec::new()
            };
            cap.push(entry(format!("b{j}"), format!("u{i}"), b));
            if i < top {
                cap.push(entry(format!("b{j}"), format!("yu{i}"), Vec::new()));
            }
            if j >= 1 {
                let c = if j > i {
                    pairs(&format!("c{}", j - i))
                } else {
                    Vec::new()
                };
                cap.push(entry(format!("c{j}"), format!("u{i}"), c));
                if i < top {
                    let r = if j > i {
                        pairs(&format!("b{}", j - 1 - i))
                    } else {
                        Vec::new()
                    };
                    cap.push(entry(format!("c{j}"), format!("yu{i}"), r));
                }
            }
        }
    }
    let module = ModuleFile {
        name: name.clone(),
        prime: p,
        window: WindowSpec::UpTo {
            label: "1".into(),
            max: 2 * top as i64,
        },
        mode: Mode::Strict,
        homology,
        cohomology,
        unit: Some("u0".into()),
        cup,
        cap,
        kron,
    };
    let step = (p - 1) as usize;
    let horizon = top / step;
    let beta = (0..=horizon)
        .map(|t| pairs(&format!("b{}", t * step)))
        .collect();
    let zeta = (0..=horizon)
        .map(|t| {
            if t == 0 {
                Vec::new()
            } else {
                pairs(&format!("c{}", t * step))
            }
        })
        .collect();
    InstanceFile::Table(TableInstance {
        name,
        group: "e".into(),
        euler: pairs(&format!("u{step}")),
        weight: p as usize,
        stability: "2".into(),
        module,
        sequences: vec![
            SequenceSpec {
                name: "beta".into(),
                degree: "0".into(),
                entries: beta,
                operation: OperationTemplate {
                    bockstein: false,
                    twist: "1".into(),
                },
            },
            SequenceSpec {
                name: "zeta".into(),
                degree: "1".into(),
                entries: zeta,
                operation: OperationTemplate {
                    bockstein: true,
                    twist: "1".into(),
                },
            },
        ],
    })
}

/// The C2 presentation shipped as `c2equivariant.json`.
pub fn c2equivariant_file() -> InstanceFile {
    let degrees = [("y", "sigma"), ("e_rho", "rho")].map(|(a, b)| (a.to_string(), b.to_string()));
    let op = |bockstein| OperationTemplate {
        bockstein,
        twist: "1".into(),
    };
    InstanceFile::HuKriz(HuKrizInstance {
        name: "c2equivariant".into(),
        prime: 2,
        group: "C2".into(),
        degrees: degrees.into_iter().collect(),
        relation: "y^2 = a*y + u*e_rho".into(),
        coefficient_box: BoxSpec {
            width: 12,
            ladder: 19,
        },
        euler: "e_rho".into(),
        weight: 2,
        stability: "rho".into(),
        sequences: vec![
            FamilySpec {
                name: "beta".into(),
                generator: "b".into(),
                offset: 0,
                operation: op(false),
            },
            FamilySpec {
                name: "zeta".into(),
                generator: "c".into(),
                offset: 1,
                operation: op(true),
            },
        ],
        restriction: RestrictionSpec {
            subgroup: "e".into(),
            target: "classical2".into(),
            degree_map: [("1", "1"), ("sigma", "1")]
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .into_iter()
                .collect(),
        },
    })
}

/// The file a shipped instance is generated from.
pub fn builtin_file(name: &str) -> Result<InstanceFile> {
    match name {
        "classical2" => Ok(classical2_file(CLASSICAL2_TOP)),
        "classical_p3" => Ok(classical_p_file(3, CLASSICAL_P_TOP)),
        "classical_p5" => Ok(classical_p_file(5, CLASSICAL_P_TOP)),
        "c2equivariant" => Ok(c2equivariant_file()),
        _ => Err(Error::Data(format!(
            "unknown instance {name:?}; expected one of {}",
            NAMES.join(", ")
        ))),
    }
}

/// Accepts `classical_p(3)` as a spelling of `classical_p3`.
pub fn canonical_name(name: &str) -> String {
    let n = name.trim();
    if let Some(rest) = n
        .strip_prefix("classical_p(")
        .and_then(|r| r.strip_suffix(')'))
    {
        return format!("classical_p{}", rest.trim());
    }
    n.to_string()
}

/// Loads and validates a shipped instance from the data directory.
pub fn load(name: &str) -> Result<Arc<InstanceBundle>> {
    let name = canonical_name(name);
    if !NAMES.contains(&name.as_str()) {
        return Err(Error::Data(format!(
            "unknown instance {name:?}; expected one of {}",
            NAMES.join(", ")
        )));
    }
    let lib = Library::load_default()?;
    let path = data_dir().join("instances").join(format!("{name}.json"));
    let text = crate::read_file(&path)?;
    let file = InstanceFile::parse(&path.display().to_string(), &text)?;
    load_file(&lib, &file)
}

/// Builds and validates a bundle from its file form.
pub fn load_file(lib: &Library, file: &InstanceFile) -> Result<Arc<InstanceBundle>> {
    let bundle = match file {
        InstanceFile::Table(t) => build_table(lib, t)?,
        InstanceFile::HuKriz(h) => build_hu_kriz(lib, h)?,
    };
    check_bundle(&bundle)?;
    Ok(Arc::new(bundle))
}

fn build_table(lib: &Library, t: &TableInstance) -> Result<InstanceBundle> {
    let table = lib.table(&t.group)?;
    let pres = t.module.build()?;
    let pairing: Arc<dyn Pairing> = Arc::new(pres);
    let euler = pairing.cohomology().element_owned(&t.euler)?;
    let stability = table.parse_degree(&t.stability)?;
    let mut bundle = InstanceBundle {
        name: t.name.clone(),
        prime: t.module.prime,
        group: t.group.clone(),
        table,
        pairing,
        euler,
        weight: t.weight,
        stability,
        named: Vec::new(),
        maps: Vec::new(),
    };
    for s in &t.sequences {
        let entries = s
            .entries
            .iter()
            .map(|e| bundle.pairing.homology().element_owned(e))
            .collect::<Result<Vec<_>>>()?;
        let seq = bundle.sequence(entries, Some(bundle.parse_degree(&s.degree)?))?;
        bundle.named.push(NamedSequence {
            name: s.name.clone(),
            sequence: seq,
            operation: s.operation.clone(),
        });
    }
    add_trivial_fix_map(&mut bundle)?;
    Ok(bundle)
}

/// Every bundle carries the modified fixed points at K = e, which is the
/// identity with W(e) = G.
fn add_trivial_fix_map(bundle: &mut InstanceBundle) -> Result<()> {
    let target = Arc::new(InstanceBundle {
        maps: Vec::new(),
        ..bundle.clone()
    });
    bundle.maps.push(StructureMap {
        kind: MapKind::ModifiedFixedPoints,
        group: "e".into(),
        map: LinearMap::identity(bundle.pairing.homology()),
        euler: bundle.euler.clone(),
        stability: bundle.stability.clone(),
        target,
    });
    Ok(())
}

fn check_bundle(b: &InstanceBundle) -> Result<()> {
    let probes = probe_set(b);
    let report = validate_pairing(b.pairing.as_ref(), probes.as_deref());
    if !report.ok() {
        return Err(Error::Data(format!(
            "{}: validation failed:\n  {}",
            b.name,
            report.failures.join("\n  ")
        )));
    }
    for n in &b.named {
        match n.sequence.verify() {
            Verdict::Holds { .. } => {}
            v => {
                return Err(Error::Data(format!(
                    "{}: named sequence {} does not verify: {v}",
                    b.name, n.name
                )))
            }
        }
        n.sequence.degree()?;
    }
    for m in &b.maps {
        for n in &b.named {
            crate::eulerian::map_sequence(
                &n.sequence,
                &m.map,
                m.target.pairing.clone(),
                m.euler.clone(),
                m.stability.clone(),
            )
            .map_err(|e| Error::Data(format!("{}: {:?} map on {}: {e}", b.name, m.kind, n.name)))?;
        }
    }
    Ok(())
}

/// Cohomology probes for validation of the larger presentations.
fn probe_set(b: &InstanceBundle) -> Option<Vec<usize>> {
    let c = b.pairing.cohomology();
    if c.len() <= 128 {
        return None;
    }
    let labels = [
        "1", "a", "u", "y", "e1", "a*y", "u*y", "y*e1", "u*e1", "a*e1",
    ];
    Some(labels.iter().filter_map(|l| c.index_of(l)).collect())
}

/// Degrees of the symbols in a relation `lhs = t1 + t2 + ...`, where each
/// right-hand monomial contains at most one symbol of unknown degree with
/// exponent one. Every term is then checked to be homogeneous.
pub fn derive_relation_degrees(
    relation: &str,
    known: &BTreeMap<String, RODegree>,
) -> Result<BTreeMap<String, RODegree>> {
    let (lhs, rhs) = relation
        .split_once('=')
        .ok_or_else(|| Error::Data(format!("relation {relation:?} has no '='")))?;
    let parse_mono = |t: &str| -> Result<Vec<(String, i64)>> {
        t.split('*')
            .map(|f| {
                let f = f.trim();
                let (name, exp) = match f.split_once('^') {
                    Some((n, e)) => (
                        n.trim(),
                        e.trim()
                            .parse::<i64>()
                            .map_err(|_| Error::Data(format!("bad exponent in {f:?}")))?,
                    ),
                    None => (f, 1),
                };
                if name.is_empty() {
                    return Err(Error::Data(format!("empty factor in relation term {t:?}")));
                }
                Ok((name.to_string(), exp))
            })
            .collect()
    };
    let mut degrees = known.clone();
    let degree_of = |m: &[(String, i64)], d: &BTreeMap<String, RODegree>| -> Option<RODegree> {
        let mut acc = RODegree::zero();
        for (n, e) in m {
            acc = &acc + &(d.get(n)? * *e);
        }
        Some(acc)
    };
    let left = parse_mono(lhs)?;
    let target = degree_of(&left, &degrees)
        .ok_or_else(|| Error::Data(format!("left side {lhs:?} must involve only known symbols")))?;
    let terms: Vec<Vec<(String, i64)>> = rhs.split('+').map(parse_mono).collect::<Result<_>>()?;
    for t in &terms {
        let unknown: Vec<&(String, i64)> =
            t.iter().filter(|(n, _)| !degrees.contains_key(n)).collect();
        match unknown.as_slice() {
            [] => {}
            [(n, 1)] => {
                let rest: Vec<(String, i64)> = t.iter().filter(|(m, _)| m != n).cloned().collect();
                let d = &target - &degree_of(&rest, &degrees).expect("known by construction");
                degrees.insert(n.clone(), d);
            }
            _ => {
                return Err(Error::Data(format!(
                    "cannot solve for the degrees in term {t:?}"
                )))
            }
        }
    }
    for t in &terms {
        let d = degree_of(t, &degrees).expect("all symbols resolved");
        if d != target {
            return Err(Error::Degree(format!(
                "relation term {t:?} has degree {d}, expected {target}"
            )));
        }
    }
    Ok(degrees)
}

fn coeff_label(i: usize, j: usize) -> String {
    let mut parts = Vec::new();
    match i {
        0 => {}
        1 => parts.push("a".to_string()),
        _ => parts.push(format!("a^{i}")),
    }
    match j {
        0 => {}
        1 => parts.push("u".to_string()),
        _ => parts.push(format!("u^{j}")),
    }
    parts.join("*")
}

fn join_label(coeff: String, base: String) -> String {
    match (coeff.is_empty(), base == "1") {
        (true, _) => base,
        (false, true) => coeff,
        (false, false) => format!("{coeff}*{base}"),
    }
}

/// The positive-cone monomials `a^i u^j`, `i, j < width`, as a graded basis
/// in cohomological degrees.
pub fn coefficient_box(width: usize, deg_a: &RODegree, deg_u: &RODegree) -> Result<GradedModule> {
    let mut basis = Vec::new();
    for i in 0..width {
        for j in 0..width {
            let label = if i == 0 && j == 0 {
                "1".to_string()
            } else {
                coeff_label(i, j)
            };
            basis.push(BasisElement {
                label,
                degree: &(deg_a * i as i64) + &(deg_u * j as i64),
            });
        }
    }
    GradedModule::new(
        "coefficient box",
        Fp::new(2).expect("2 is prime"),
        basis,
        Window::All,
    )
}

/// H_⋆ and H^⋆ of B_{C2}Σ_2 over the coefficient box. Homology is free on
/// `b_{kρ}` (label `b{k}`) and `c_{kρ+σ}` (label `c{k}`), the duals of
/// `e_ρ^k` and `y e_ρ^k`; cohomology is free on `y^ε e_ρ^k` (labels `1`,
/// `y`, `e{k}`, `y*e{k}`).
pub struct HuKriz {
    width: usize,
    ladder: usize,
    homology: GradedModule,
    cohomology: GradedModule,
}

impl HuKriz {
    pub fn new(
        width: usize,
        ladder: usize,
        degrees: &BTreeMap<String, RODegree>,
    ) -> Result<HuKriz> {
        let get = |n: &str| {
            degrees
                .get(n)
                .cloned()
                .ok_or_else(|| Error::Data(format!("degree of {n} is not determined")))
        };
        let (da, du, dy, de) = (get("a")?, get("u")?, get("y")?, get("e_rho")?);
        let f = Fp::new(2).expect("2 is prime");
        let mut hbasis = Vec::new();
        let mut cbasis = Vec::new();
        for kind in 0..2usize {
            for k in 0..=ladder {
                for i in 0..width {
                    for j in 0..width {
                        let coeff = &(&da * i as i64) + &(&du * j as i64);
                        let gen = &(&de * k as i64) + &(&dy * kind as i64);
                        let hname = format!("{}{k}", if kind == 0 { "b" } else { "c" });
                        hbasis.push(BasisElement {
                            label: join_label(coeff_label(i, j), hname),
                            degree: &gen - &coeff,
                        });
                        let cname = match (kind, k) {
                            (0, 0) => "1".to_string(),
                            (1, 0) => "y".to_string(),
                            (0, _) => format!("e{k}"),
                            _ => format!("y*e{k}"),
                        };
                        cbasis.push(BasisElement {
                            label: join_label(coeff_label(i, j), cname),
                            degree: &gen + &coeff,
                        });
                    }
                }
            }
        }
        let hw = box_window(width, ladder, &da, &du, &dy, &de, true);
        let cw = box_window(width, ladder, &da, &du, &dy, &de, false);
        Ok(HuKriz {
            width,
            ladder,
            homology: GradedModule::new("c2equivariant:H_*", f, hbasis, hw)?,
            cohomology: GradedModule::new("c2equivariant:H^*", f, cbasis, cw)?,
        })
    }

    fn index(&self, kind: usize, k: usize, i: usize, j: usize) -> Option<usize> {
        (i < self.width && j < self.width && k <= self.ladder)
            .then(|| ((kind * (self.ladder + 1) + k) * self.width + i) * self.width + j)
    }

    fn decode(&self, idx: usize) -> (usize, usize, usize, usize) {
        let w = self.width;
        let j = idx % w;
        let i = (idx / w) % w;
        let rest = idx / (w * w);
        (rest / (self.ladder + 1), rest % (self.ladder + 1), i, j)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ladder(&self) -> usize {
        self.ladder
    }

    /// Homology basis index of `a^i u^j b_{kρ}` (kind 0) or `a^i u^j c_{kρ+σ}` (kind 1).
    pub fn homology_index(&self, kind: usize, k: usize, i: usize, j: usize) -> Option<usize> {
        self.index(kind, k, i, j)
    }

    pub fn cohomology_index(&self, eps: usize, k: usize, i: usize, j: usize) -> Option<usize> {
        self.index(eps, k, i, j)
    }

    pub fn decode_homology(&self, idx: usize) -> (usize, usize, usize, usize) {
        self.decode(idx)
    }
}

/// A degree is complete when every positive-cone element of that degree
/// lies in the box. Only degrees in `1` and `σ` occur.
fn box_window(
    width: usize,
    ladder: usize,
    da: &RODegree,
    du: &RODegree,
    dy: &RODegree,
    de: &RODegree,
    homology: bool,
) -> Window {
    let xy = |d: &RODegree| (d.trivial_part(), d.coeff("sigma"));
    let (a, u, y, e) = (xy(da), xy(du), xy(dy), xy(de));
    let test = move |d: &RODegree| -> bool {
        if d.labels().any(|l| l != "1" && l != "sigma") {
            return false;
        }
        let (m, n) = xy(d);
        // Exponents of a solution are bounded by the size of the degree.
        let bound = (m.abs() + n.abs()) as usize + width + ladder + 2;
        for kind in 0..2i64 {
            for k in 0..=bound as i64 {
                for j in 0..=bound as i64 {
                    let gen = (k * e.0 + kind * y.0, k * e.1 + kind * y.1);
                    let (r0, r1) = if homology {
                        (gen.0 - j * u.0 - m, gen.1 - j * u.1 - n)
                    } else {
                        (m - gen.0 - j * u.0, n - gen.1 - j * u.1)
                    };
                    // r = i * |a| for some i >= 0.
                    let i = if a.0 != 0 {
                        if r0 % a.0 != 0 {
                            continue;
                        } else {
                            r0 / a.0
                        }
                    } else if a.1 != 0 {
                        if r1 % a.1 != 0 {
                            continue;
                        } else {
                            r1 / a.1
                        }
                    } else {
                        continue;
                    };
                    if i < 0 || (r0, r1) != (i * a.0, i * a.1) {
                        continue;
                    }
                    if i as usize >= width || j as usize >= width || k as usize > ladder {
                        return false;
                    }
                }
            }
        }
        true
    };
    Window::Predicate {
        description: format!("coefficient box a^i u^j with i, j < {width}, ladder {ladder}"),
        test: Arc::new(test),
    }
}

impl Pairing for HuKriz {
    fn homology(&self) -> &GradedModule {
        &self.homology
    }

    fn cohomology(&self) -> &GradedModule {
        &self.cohomology
    }

    fn cap_basis(&self, x: usize, e: usize) -> Option<Element> {
        let f = self.field();
        let (kind, k, i, j) = self.decode(x);
        let (eps, k2, i2, j2) = self.decode(e);
        if k2 > k {
            return Some(Element::zero());
        }
        let k = k - k2;
        // (kind, k, extra a, extra u) after capping with y^eps.
        let terms: Vec<(usize, usize, usize, usize)> = match (eps, kind) {
            (0, _) => vec![(kind, k, 0, 0)],
            (_, 0) if k == 0 => vec![],
            (_, 0) => vec![(1, k - 1, 0, 1)],
            _ => vec![(0, k, 0, 0), (1, k, 1, 0)],
        };
        let mut out = Element::zero();
        for (kd, kk, da, du) in terms {
            out.add_term(f, self.index(kd, kk, i + i2 + da, j + j2 + du)?, 1);
        }
        Some(out)
    }

    fn cup_basis(&self, a: usize, b: usize) -> Option<Element> {
        let f = self.field();
        let (e1, k1, i1, j1) = self.decode(a);
        let (e2, k2, i2, j2) = self.decode(b);
        let (k, i, j) = (k1 + k2, i1 + i2, j1 + j2);
        let mut out = Element::zero();
        if e1 + e2 < 2 {
            out.add_term(f, self.index(e1 + e2, k, i, j)?, 1);
        } else {
            out.add_term(f, self.index(1, k, i + 1, j)?, 1);
            out.add_term(f, self.index(0, k + 1, i, j + 1)?, 1);
        }
        Some(out)
    }

    fn kron_basis(&self, xi: usize, x: usize) -> u32 {
        let (eps, k, i, j) = self.decode(xi);
        let (kind, k2, i2, j2) = self.decode(x);
        u32::from(i == 0 && j == 0 && i2 == 0 && j2 == 0 && eps == kind && k == k2)
    }

    fn unit(&self) -> Option<usize> {
        self.index(0, 0, 0, 0)
    }
}

fn build_hu_kriz(lib: &Library, h: &HuKrizInstance) -> Result<InstanceBundle> {
    if h.prime != 2 {
        return Err(Error::Data(format!(
            "{}: only p = 2 is supported for this presentation",
            h.name
        )));
    }
    let table = lib.table(&h.group)?;
    let mut known = BTreeMap::new();
    for (n, d) in &h.degrees {
        known.insert(n.clone(), table.parse_degree(d)?);
    }
    let degrees = derive_relation_degrees(&h.relation, &known)?;
    let pres = HuKriz::new(h.coefficient_box.width, h.coefficient_box.ladder, &degrees)?;
    let ladder = pres.ladder;
    let generator_index = |g: &str, k: usize| -> Result<usize> {
        let kind = match g {
            "b" => 0,
            "c" => 1,
            _ => return Err(Error::Data(format!("{}: unknown generator {g:?}", h.name))),
        };
        pres.index(kind, k, 0, 0)
            .ok_or_else(|| Error::Internal("generator outside the box".into()))
    };
    let euler_idx = match h.euler.as_str() {
        "e_rho" => pres
            .index(0, 1, 0, 0)
            .ok_or_else(|| Error::Data("ladder must be at least 1".into()))?,
        other => {
            return Err(Error::Data(format!(
                "{}: unsupported Euler element {other:?}",
                h.name
            )))
        }
    };
    let mut named_entries = Vec::new();
    for s in &h.sequences {
        let mut entries = Vec::new();
        for t in 0..=ladder {
            entries.push(if t < s.offset {
                Element::zero()
            } else {
                Element::basis(generator_index(&s.generator, t - s.offset)?)
            });
        }
        named_entries.push((s, entries));
    }
    let restriction_target = h.restriction.target.clone();
    let pairing: Arc<dyn Pairing> = Arc::new(pres);
    let mut bundle = InstanceBundle {
        name: h.name.clone(),
        prime: h.prime,
        group: h.group.clone(),
        table: table.clone(),
        pairing,
        euler: Element::basis(euler_idx),
        weight: h.weight,
        stability: table.parse_degree(&h.stability)?,
        named: Vec::new(),
        maps: Vec::new(),
    };
    for (s, entries) in named_entries {
        let seq = bundle.sequence(entries, None)?;
        bundle.named.push(NamedSequence {
            name: s.name.clone(),
            sequence: seq,
            operation: s.operation.clone(),
        });
    }
    // Restriction to the trivial subgroup: u ↦ 1, a ↦ 0, b_{kρ} ↦ b_{2k},
    // c_{kρ+σ} ↦ b_{2k+1}.
    let target = load_builtin_dependency(lib, &restriction_target)?;
    let th = target.pairing.homology();
    let hk = bundle.pairing.homology();
    let mut columns = Vec::with_capacity(hk.len());
    for idx in 0..hk.len() {
        let (kind, k, i, _j) = {
            let w = h.coefficient_box.width;
            let jj = idx % w;
            let ii = (idx / w) % w;
            let rest = idx / (w * w);
            (rest / (ladder + 1), rest % (ladder + 1), ii, jj)
        };
        columns.push(if i > 0 {
            Some(Element::zero())
        } else {
            th.index_of(&format!("b{}", 2 * k + kind))
                .map(Element::basis)
        });
    }
    let mut dm = BTreeMap::new();
    for (from, to) in &h.restriction.degree_map {
        dm.insert(from.clone(), target.parse_degree(to)?);
    }
    let map = LinearMap::new(hk, th, RODegree::zero(), Some(dm), columns)?;
    let sub = subgroup_by_name(lib, &h.group, &h.restriction.subgroup)?;
    let exponent = restriction_euler(table.group.order(), sub.order());
    let euler = target.pairing.cup_power(&target.euler, exponent)?;
    let stability = repring::restrict_deg(
        &table,
        &sub_table(lib, &sub)?,
        &sub_inclusion(&sub)?,
        &bundle.stability,
    )?;
    bundle.maps.push(StructureMap {
        kind: MapKind::Restriction,
        group: h.restriction.subgroup.clone(),
        target,
        map,
        euler,
        stability,
    });
    add_trivial_fix_map(&mut bundle)?;
    Ok(bundle)
}

fn load_builtin_dependency(lib: &Library, name: &str) -> Result<Arc<InstanceBundle>> {
    let path = data_dir().join("instances").join(format!("{name}.json"));
    let file = if path.exists() {
        InstanceFile::parse(&path.display().to_string(), &crate::read_file(&path)?)?
    } else {
        builtin_file(name)?
    };
    load_file(lib, &file)
}

fn subgroup_by_name(lib: &Library, group: &str, sub: &str) -> Result<Subgroup> {
    let t = lib.table(group)?;
    for k in crate::fingroup::subgroups_up_to_conjugacy(&t.group)? {
        let (kg, _) = k.as_group("K")?;
        if let Ok((name, _)) = lib.identify(&kg) {
            if name == sub {
                return Ok(k);
            }
        }
    }
    Err(Error::Data(format!(
        "{group} has no subgroup isomorphic to {sub}"
    )))
}

fn sub_table(lib: &Library, k: &Subgroup) -> Result<CharacterTable> {
    let (kg, _) = k.as_group("K")?;
    Ok(lib.identify(&kg)?.1)
}

fn sub_inclusion(k: &Subgroup) -> Result<crate::fingroup::GroupHom> {
    Ok(k.as_group("K")?.1)
}

/// Exponent in `ẽ_G ↦ ẽ_K^{|G:K|}` under restriction.
pub fn restriction_euler(g_order: usize, k_order: usize) -> usize {
    g_order / k_order
}

/// `φ̃^K(ẽ_{G,p}) = ẽ_{W(K),p}`: the Weyl group and the degree of its Euler class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModFixRule {
    pub weyl: String,
    pub weyl_order: usize,
    pub euler_degree: RODegree,
}

pub fn mod_fix_euler(lib: &Library, k: &Subgroup, p: u32) -> Result<ModFixRule> {
    let data = SubgroupData::new(lib, k)?;
    Ok(ModFixRule {
        weyl: data.weyl_name.clone(),
        weyl_order: data.weyl.group.order(),
        euler_degree: repring::euler_degree(&data.weyl_table, p),
    })
}

/// Degree expressions in plain labels, for files that do not name a group.
pub fn parse_plain(expr: &str) -> Result<RODegree> {
    parse_degree_with(expr, |n| Some(RODegree::term(n, 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eulerian::{map_sequence, Verdict};

    #[test]
    fn shipped_files_match_generators() {
        for name in NAMES {
            let path = data_dir().join("instances").join(format!("{name}.json"));
            let generated = serde_json::to_value(builtin_file(name).unwrap()).unwrap();
            if std::env::var_os("EULERCALC_REGENERATE").is_some() {
                std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&generated).unwrap() + "\n",
                )
                .unwrap();
            }
            let shipped: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
            assert!(
                shipped == generated,
                "{name}: shipped data differs from the generator"
            );
        }
    }

    #[test]
    fn classical2_duals_and_caps() {
        let b = load("classical2").unwrap();
        let (h, c) = (b.pairing.homology(), b.pairing.cohomology());
        for j in 0..=CLASSICAL2_TOP {
            for k in 0..=CLASSICAL2_TOP {
                let v = b.pairing.kron_basis(
                    c.require(&format!("e{j}")).unwrap(),
                    h.require(&format!("b{k}")).unwrap(),
                );
                assert_eq!(v, u32::from(j == k));
            }
        }
        let x = h.element(&[("b5", 1)]).unwrap();
        assert_eq!(
            b.pairing.cap(&x, &b.euler).unwrap(),
            h.element(&[("b4", 1)]).unwrap()
        );
    }

    #[test]
    fn classical_p_euler_cap_is_iso() {
        for name in ["classical_p3", "classical_p5"] {
            let b = load(name).unwrap();
            let h = b.pairing.homology();
            let cap = LinearMap::cap_with(b.pairing.as_ref(), &b.euler).unwrap();
            let p = b.prime as i64;
            for d in 2 * (p - 1)..=2 * CLASSICAL_P_TOP as i64 {
                let deg = RODegree::trivial(d);
                let (src, tgt, m) = cap.slice_matrix(h, h, &deg).unwrap();
                assert_eq!(src.len(), tgt.len(), "{name} degree {d}");
                assert_eq!(
                    crate::linalg::Solver::new(b.field(), &m).rank(),
                    src.len(),
                    "{name} degree {d}"
                );
            }
            assert_eq!(
                b.named("zeta").unwrap().sequence.degree().unwrap(),
                RODegree::trivial(1)
            );
        }
    }

    #[test]
    fn relation_degrees() {
        let lib = Library::load_default().unwrap();
        let t = lib.table("C2").unwrap();
        let known: BTreeMap<String, RODegree> = [("y", "sigma"), ("e_rho", "rho")]
            .iter()
            .map(|(n, d)| (n.to_string(), t.parse_degree(d).unwrap()))
            .collect();
        let d = derive_relation_degrees("y^2 = a*y + u*e_rho", &known).unwrap();
        assert_eq!(d["a"], RODegree::term("sigma", 1));
        assert_eq!(d["u"], RODegree::from_terms([("sigma", 1), ("1", -1)]));
        let bx = coefficient_box(3, &d["a"], &d["u"]).unwrap();
        let au = bx.require("a*u").unwrap();
        assert_eq!(bx.degree(au), &(&d["a"] + &d["u"]));
        assert!(derive_relation_degrees("y^2 = a*y + y", &known).is_err());
    }

    #[test]
    fn c2_named_sequences_and_restriction() {
        let b = load("c2equivariant").unwrap();
        let beta = &b.named("beta").unwrap().sequence;
        let zeta = &b.named("zeta").unwrap().sequence;
        assert!(zeta.verify().holds());
        assert_eq!(zeta.degree().unwrap(), RODegree::trivial(1));
        let res = b.structure_map(MapKind::Restriction, "e").unwrap();
        let rb = map_sequence(
            beta,
            &res.map,
            res.target.pairing.clone(),
            res.euler.clone(),
            res.stability.clone(),
        )
        .unwrap();
        let classical = &res.target.named("beta").unwrap().sequence;
        assert!(rb.agrees_with(&classical.reindex(2).unwrap()));
        let rz = map_sequence(
            zeta,
            &res.map,
            res.target.pairing.clone(),
            res.euler.clone(),
            res.stability.clone(),
        )
        .unwrap();
        assert!(rz.agrees_with(&classical.shift(1).reindex(2).unwrap()));
        assert_eq!(res.stability, RODegree::trivial(2));
    }

    #[test]
    fn c2_relation_holds_on_homology() {
        let b = load("c2equivariant").unwrap();
        let (h, c) = (b.pairing.homology(), b.pairing.cohomology());
        let y = Element::basis(c.require("y").unwrap());
        let a = Element::basis(c.require("a").unwrap());
        let ue = Element::basis(c.require("u*e1").unwrap());
        let f = b.field();
        let mut checked = 0;
        for x in 0..h.len() {
            let x = Element::basis(x);
            let (Ok(xy), Ok(xue)) = (b.pairing.cap(&x, &y), b.pairing.cap(&x, &ue)) else {
                continue;
            };
            let (Ok(lhs), Ok(xya)) = (b.pairing.cap(&xy, &y), b.pairing.cap(&xy, &a)) else {
                continue;
            };
            assert_eq!(lhs, xya.plus(f, &xue));
            checked += 1;
        }
        assert!(checked > 1000);
    }

    #[test]
    fn window_predicate() {
        let b = load("c2equivariant").unwrap();
        let h = b.pairing.homology();
        let rho = b.parse_degree("rho").unwrap();
        assert!(h.in_window(&(&rho * 3)));
        assert!(!h.in_window(&(&rho * 25)));
        let v = b.named("beta").unwrap().sequence.verify();
        assert!(matches!(v, Verdict::Holds { horizon: 19 }));
    }

    #[test]
    fn euler_rules() {
        let lib = Library::load_default().unwrap();
        assert_eq!(restriction_euler(2, 1), 2);
        assert_eq!(restriction_euler(4, 4), 1);
        assert_eq!(restriction_euler(4, 2), 2);
        let c2 = lib.table("C2").unwrap();
        let whole = Subgroup::whole(c2.group.clone());
        assert_eq!(mod_fix_euler(&lib, &whole, 2).unwrap().weyl, "e");
        let triv = Subgroup::trivial(c2.group.clone());
        assert_eq!(mod_fix_euler(&lib, &triv, 2).unwrap().weyl, "C2");
        let c4 = lib.table("C4").unwrap();
        let k = crate::fingroup::subgroups_up_to_conjugacy(&c4.group)
            .unwrap()
            .into_iter()
            .find(|s| s.order() == 2)
            .unwrap();
        let r = mod_fix_euler(&lib, &k, 2).unwrap();
        assert_eq!(
            (r.weyl.as_str(), r.euler_degree.clone()),
            ("C2", lib.table("C2").unwrap().rho())
        );
    }
}
