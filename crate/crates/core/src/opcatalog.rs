//! Formal labels for the operations `Sq^{kρ_G}_λ`, `Sq^{kρ_G+1}`,
//! `P^{2εkρ_G}_λ` and `P^{2εkρ_G+1}`, with their degrees and the rewriting
//! rules under restriction and modified geometric fixed points.
//!
//! Label grammar:
//!
//! ```text
//! label := kind "[" field ("," field)* "]"
//! kind  := "Sq" | "P"
//! field := "k=" uint | "G=" group | "p=" prime | "lambda=" character | "+1"
//! ```
//!
//! `G` defaults to `e`, `p` defaults to 2 for `Sq` and is required for `P`.
//! `+1` marks the Bockstein variant, which carries no twist. At p = 2 the
//! twist is a real one-dimensional character; at odd p it is a complex
//! linear character with values in the p-th roots of unity.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::eulerian::Denotation;
use crate::fingroup::{subgroups_up_to_conjugacy, GroupHom, Subgroup, WeylGroup};
use crate::instances::InstanceBundle;
use crate::oracle::{Letter, SteenrodWord};
use crate::repring::{
    epsilon, fixed_deg, irr1, restrict_deg, tilde_irr1, CharacterTable, Irr1Set, Library,
    SubgroupData,
};
use crate::rodegree::RODegree;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Kind {
    Sq,
    P,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OpLabel {
    pub kind: Kind,
    pub group: String,
    pub prime: u32,
    pub k: u64,
    pub bockstein: bool,
    pub twist: Option<String>,
}

impl fmt::Display for OpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Sq => write!(f, "Sq[k={},G={}", self.k, self.group)?,
            Kind::P => write!(f, "P[k={},G={},p={}", self.k, self.group, self.prime)?,
        }
        if self.bockstein {
            write!(f, ",+1")?;
        }
        if let Some(t) = &self.twist {
            write!(f, ",lambda={t}")?;
        }
        write!(f, "]")
    }
}

/// Result of the fixed-point rewriting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum FixedLabel {
    Label {
        label: OpLabel,
    },
    /// `λ^K = 0`: the operation is trivial.
    Trivial {
        group: String,
    },
}

impl fmt::Display for FixedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixedLabel::Label { label } => write!(f, "{label}"),
            FixedLabel::Trivial { group } => write!(f, "0 (trivial over {group})"),
        }
    }
}

fn parse_err(s: &str, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: "label".into(),
        line: 1,
        column,
        message: format!("{} in {s:?}", message.into()),
    }
}

impl OpLabel {
    pub fn sq(group: &str, k: u64, twist: Option<&str>) -> OpLabel {
        OpLabel {
            kind: Kind::Sq,
            group: group.into(),
            prime: 2,
            k,
            bockstein: false,
            twist: twist.map(String::from),
        }
    }

    pub fn p(group: &str, prime: u32, k: u64, twist: Option<&str>) -> OpLabel {
        OpLabel {
            kind: Kind::P,
            group: group.into(),
            prime,
            k,
            bockstein: false,
            twist: twist.map(String::from),
        }
    }

    pub fn with_bockstein(self) -> OpLabel {
        OpLabel {
            bockstein: true,
            twist: None,
            ..self
        }
    }

    /// Parses the grammar in the module docs. Syntax only; see
    /// [`Catalog::check`] for the character-set conditions.
    pub fn parse(s: &str) -> Result<OpLabel> {
        let t = s.trim();
        let open = t.find('[').ok_or_else(|| parse_err(s, 0, "expected '['"))?;
        if !t.ends_with(']') {
            return Err(parse_err(s, t.len(), "expected ']'"));
        }
        let kind = match &t[..open] {
            "Sq" => Kind::Sq,
            "P" => Kind::P,
            other => return Err(parse_err(s, 0, format!("unknown kind {other:?}"))),
        };
        let (mut group, mut prime, mut k, mut bockstein, mut twist) =
            (None, None, None, false, None);
        let mut col = open + 1;
        for field in t[open + 1..t.len() - 1].split(',') {
            let f = field.trim();
            let dup = |seen: bool| {
                if seen {
                    Err(parse_err(s, col, format!("repeated field {f:?}")))
                } else {
                    Ok(())
                }
            };
            if f == "+1" {
                dup(bockstein)?;
                bockstein = true;
            } else if let Some((key, value)) = f.split_once('=') {
                let value = value.trim();
                match key.trim() {
                    "k" => {
                        dup(k.is_some())?;
                        k =
                            Some(value.parse::<u64>().map_err(|_| {
                                parse_err(s, col, format!("bad multiplier {value:?}"))
                            })?);
                    }
                    "G" => {
                        dup(group.is_some())?;
                        group = Some(value.to_string());
                    }
                    "p" => {
                        dup(prime.is_some())?;
                        prime = Some(
                            value
                                .parse::<u32>()
                                .map_err(|_| parse_err(s, col, format!("bad prime {value:?}")))?,
                        );
                    }
                    "lambda" => {
                        dup(twist.is_some())?;
                        twist = Some(value.to_string());
                    }
                    other => return Err(parse_err(s, col, format!("unknown field {other:?}"))),
                }
            } else {
                return Err(parse_err(s, col, format!("malformed field {f:?}")));
            }
            col += field.len() + 1;
        }
        let k = k.ok_or_else(|| parse_err(s, 0, "missing k"))?;
        let prime = match (kind, prime) {
            (Kind::Sq, None | Some(2)) => 2,
            (Kind::Sq, Some(p)) => {
                return Err(parse_err(s, 0, format!("Sq lives at p = 2, not {p}")))
            }
            (Kind::P, None) => return Err(parse_err(s, 0, "P needs p")),
            (Kind::P, Some(p)) if p == 2 || crate::Fp::new(p).is_none() => {
                return Err(parse_err(s, 0, format!("P needs an odd prime, got {p}")));
            }
            (Kind::P, Some(p)) => p,
        };
        if bockstein && twist.is_some() {
            return Err(parse_err(s, 0, "the +1 variant carries no twist"));
        }
        Ok(OpLabel {
            kind,
            group: group.unwrap_or_else(|| "e".into()),
            prime,
            k,
            bockstein,
            twist,
        })
    }
}

/// Twist characters for `(G, p)`: real ones at p = 2, complex p-th-root
/// valued ones otherwise.
pub fn twist_set(t: &CharacterTable, p: u32) -> Result<Irr1Set> {
    if p == 2 {
        Ok(irr1(t))
    } else {
        tilde_irr1(t, p)
    }
}

fn exponents<'a>(set: &'a Irr1Set, label: &str) -> Result<&'a [u32]> {
    set.characters
        .iter()
        .find(|(l, _)| l == label)
        .map(|(_, v)| v.as_slice())
        .ok_or_else(|| Error::Data(format!("{label:?} is not a twist character")))
}

fn match_exponents(set: &Irr1Set, values: &[u32]) -> Result<String> {
    set.characters
        .iter()
        .find(|(_, v)| v == values)
        .map(|(l, _)| l.clone())
        .ok_or_else(|| Error::Internal("restricted twist is not a linear character".into()))
}

/// Rescales `k` so that `2ε_from k ρ` becomes `2ε_to k' ρ`.
fn rescale(k: u64, index: usize, eps_from: u32, eps_to: u32) -> Option<u64> {
    let num = k * index as u64 * eps_from as u64;
    (num % eps_to as u64 == 0).then(|| num / eps_to as u64)
}

/// The label calculus over a library of groups and tables.
pub struct Catalog {
    pub lib: Library,
}

impl Catalog {
    pub fn new(lib: Library) -> Catalog {
        Catalog { lib }
    }

    pub fn load_default() -> Result<Catalog> {
        Ok(Catalog {
            lib: Library::load_default()?,
        })
    }

    pub fn table(&self, l: &OpLabel) -> Result<Arc<CharacterTable>> {
        self.lib.table(&l.group)
    }

    /// Checks the twist lies in the character set for `(G, p)`.
    pub fn check(&self, l: &OpLabel) -> Result<()> {
        if (l.kind == Kind::Sq) != (l.prime == 2) {
            return Err(Error::Data(format!("{l}: Sq exactly when p = 2")));
        }
        if l.bockstein && l.twist.is_some() {
            return Err(Error::Data(format!("{l}: the +1 variant carries no twist")));
        }
        if let Some(t) = &l.twist {
            let set = twist_set(&*self.table(l)?, l.prime)?;
            if !set.contains(t) {
                return Err(Error::Data(format!(
                    "{l}: twist must be one of {:?}",
                    set.labels()
                )));
            }
        }
        Ok(())
    }

    /// `kρ_G` (+1) at p = 2, `2εkρ_G` (+1) at odd p.
    pub fn degree(&self, l: &OpLabel) -> Result<RODegree> {
        self.check(l)?;
        let t = self.table(l)?;
        Ok(degree_in(&t, l))
    }

    /// Rewriting along `K ≤ G`; `k` must be a subgroup of `lib.group(G)`.
    pub fn restrict_label(&self, l: &OpLabel, k: &Subgroup) -> Result<OpLabel> {
        self.check(l)?;
        let g = self.table(l)?;
        if !Arc::ptr_eq(&k.parent, &g.group) {
            return Err(Error::Structure(format!(
                "subgroup is not taken in the shipped {}",
                l.group
            )));
        }
        let sd = SubgroupData::new(&self.lib, k)?;
        restrict_along(l, &g, &sd.name, &sd.table, &sd.inclusion)
    }

    /// Modified geometric fixed points for `K ≤ G`.
    pub fn mod_geo_fix_label(&self, l: &OpLabel, k: &Subgroup) -> Result<FixedLabel> {
        self.check(l)?;
        let g = self.table(l)?;
        if !Arc::ptr_eq(&k.parent, &g.group) {
            return Err(Error::Structure(format!(
                "subgroup is not taken in the shipped {}",
                l.group
            )));
        }
        let sd = SubgroupData::new(&self.lib, k)?;
        fix_along(l, &g, k, &sd.weyl, &sd.weyl_name, &sd.weyl_table)
    }

    /// Restricts to the trivial group and reads off the classical word.
    pub fn underlying(&self, l: &OpLabel) -> Result<SteenrodWord> {
        let base = if l.group == "e" {
            self.check(l)?;
            l.clone()
        } else {
            let g = self.table(l)?;
            self.restrict_label(l, &Subgroup::trivial(g.group.clone()))?
        };
        underlying_trivial(&base)
    }

    /// Subgroup representatives of a shipped group, in a fixed order.
    pub fn subgroups(&self, group: &str) -> Result<Vec<Subgroup>> {
        subgroups_up_to_conjugacy(&self.lib.table(group)?.group)
    }

    /// Subgroup of a shipped group by the name of its isomorphism type.
    pub fn subgroup_by_name(&self, group: &str, name: &str) -> Result<Subgroup> {
        for k in self.subgroups(group)? {
            if SubgroupData::new(&self.lib, &k)?.name == name {
                return Ok(k);
            }
        }
        Err(Error::Data(format!(
            "{group} has no subgroup isomorphic to {name}"
        )))
    }

    /// Labels with multipliers `0..=max_k`, every twist and the Bockstein
    /// variant, at prime `p`.
    pub fn labels(&self, group: &str, p: u32, max_k: u64) -> Result<Vec<OpLabel>> {
        let t = self.lib.table(group)?;
        let set = twist_set(&t, p)?;
        let mut out = Vec::new();
        for k in 0..=max_k {
            for tw in set.labels() {
                out.push(if p == 2 {
                    OpLabel::sq(group, k, Some(tw))
                } else {
                    OpLabel::p(group, p, k, Some(tw))
                });
            }
            let plain = if p == 2 {
                OpLabel::sq(group, k, None)
            } else {
                OpLabel::p(group, p, k, None)
            };
            out.push(plain.with_bockstein());
        }
        Ok(out)
    }
}

fn degree_in(t: &CharacterTable, l: &OpLabel) -> RODegree {
    let scale = if l.prime == 2 {
        1
    } else {
        2 * epsilon(t.group.order(), l.prime) as i64
    };
    let mut d = t.rho() * (scale * l.k as i64);
    if l.bockstein {
        d.add_term(crate::rodegree::TRIVIAL, 1);
    }
    d
}

/// Restriction along an explicit inclusion `K → G`; `k_table` is K's table.
pub fn restrict_along(
    l: &OpLabel,
    g: &CharacterTable,
    k_name: &str,
    k_table: &CharacterTable,
    inclusion: &GroupHom,
) -> Result<OpLabel> {
    let index = g.group.order() / k_table.group.order();
    let (eg, ek) = (
        epsilon(g.group.order(), l.prime),
        epsilon(k_table.group.order(), l.prime),
    );
    let k = rescale(l.k, index, eg, ek)
        .ok_or_else(|| Error::Internal(format!("{l}: non-integral restricted multiplier")))?;
    let twist = match &l.twist {
        None => None,
        Some(t) => {
            let gs = twist_set(g, l.prime)?;
            let ks = twist_set(k_table, l.prime)?;
            let e = exponents(&gs, t)?;
            let values: Vec<u32> = k_table
                .classes
                .iter()
                .map(|c| e[g.class_of[inclusion.apply(c[0])]])
                .collect();
            Some(match_exponents(&ks, &values)?)
        }
    };
    let out = OpLabel {
        group: k_name.to_string(),
        k,
        twist,
        ..l.clone()
    };
    let lhs = restrict_deg(g, k_table, inclusion, &degree_in(g, l))?;
    let rhs = degree_in(k_table, &out);
    if lhs != rhs {
        return Err(Error::Internal(format!(
            "restriction of {l} has degree {rhs}, expected {lhs}"
        )));
    }
    Ok(out)
}

/// Fixed-point rewriting with explicit Weyl data; `w_table` is W(K)'s table.
pub fn fix_along(
    l: &OpLabel,
    g: &CharacterTable,
    k: &Subgroup,
    weyl: &WeylGroup,
    w_name: &str,
    w_table: &CharacterTable,
) -> Result<FixedLabel> {
    if l.bockstein {
        return Err(Error::Precondition(format!(
            "{l}: fixed points of the +1 variants are not covered; refusing to guess"
        )));
    }
    let Some(t) = &l.twist else {
        return Err(Error::Precondition(format!(
            "{l}: fixed-point rewriting needs a twist"
        )));
    };
    let gs = twist_set(g, l.prime)?;
    let e = exponents(&gs, t)?;
    if k.members().iter().any(|&x| e[g.class_of[x]] != 0) {
        return Ok(FixedLabel::Trivial {
            group: w_name.to_string(),
        });
    }
    let mut coset_rep = vec![usize::MAX; weyl.group.order()];
    for &x in weyl.normalizer.members() {
        let c = weyl.project(x).expect("normalizer element");
        if coset_rep[c] == usize::MAX {
            coset_rep[c] = x;
        }
    }
    let values: Vec<u32> = w_table
        .classes
        .iter()
        .map(|c| e[g.class_of[coset_rep[c[0]]]])
        .collect();
    let twist = match_exponents(&twist_set(w_table, l.prime)?, &values)?;
    let index = g.group.order() / weyl.normalizer.order();
    let (eg, ew) = (
        epsilon(g.group.order(), l.prime),
        epsilon(w_table.group.order(), l.prime),
    );
    let kk = rescale(l.k, index, eg, ew).ok_or_else(|| {
        Error::Precondition(format!(
            "{l}: multiplier over W(K) = {w_name} would not be integral"
        ))
    })?;
    let out = OpLabel {
        group: w_name.to_string(),
        k: kk,
        twist: Some(twist),
        ..l.clone()
    };
    let lhs = fixed_deg(g, w_table, weyl, k, &degree_in(g, l))?;
    let rhs = degree_in(w_table, &out);
    if lhs != rhs {
        return Err(Error::Internal(format!(
            "fixed points of {l} have degree {rhs}, expected {lhs}"
        )));
    }
    Ok(FixedLabel::Label { label: out })
}

fn underlying_trivial(l: &OpLabel) -> Result<SteenrodWord> {
    let k = u32::try_from(l.k)
        .map_err(|_| Error::Precondition(format!("{l}: multiplier too large")))?;
    let letters = match (l.kind, l.bockstein) {
        (Kind::Sq, false) if k == 0 => vec![],
        (Kind::Sq, false) => vec![Letter::Sq(k)],
        (Kind::Sq, true) => vec![Letter::Sq(k + 1)],
        (Kind::P, false) if k == 0 => vec![],
        (Kind::P, false) => vec![Letter::P(k)],
        (Kind::P, true) if k == 0 => vec![Letter::Beta],
        (Kind::P, true) => vec![Letter::Beta, Letter::P(k)],
    };
    SteenrodWord::new(l.prime, letters)
}

/// The label of `name[shift]` in an instance.
pub fn label_of(bundle: &InstanceBundle, name: &str, shift: usize) -> Result<OpLabel> {
    let op = &bundle.named(name)?.operation;
    let base = if bundle.prime == 2 {
        OpLabel::sq(&bundle.group, shift as u64, Some(&op.twist))
    } else {
        OpLabel::p(&bundle.group, bundle.prime, shift as u64, Some(&op.twist))
    };
    Ok(if op.bockstein {
        base.with_bockstein()
    } else {
        base
    })
}

/// Labels with coefficients for a denotation; unnamed sequences have none.
pub fn denotation_labels(bundle: &InstanceBundle, d: &Denotation) -> Result<Vec<(u32, OpLabel)>> {
    match d {
        Denotation::Named { terms } => terms
            .iter()
            .map(|(n, s, c)| Ok((*c, label_of(bundle, n, *s)?)))
            .collect(),
        Denotation::Unnamed { residual } => Err(Error::Data(format!(
            "sequence is not a combination of named ones (residual {residual:?})"
        ))),
    }
}
