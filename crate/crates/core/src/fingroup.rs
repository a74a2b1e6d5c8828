//! Finite groups as explicit multiplication tables or permutation lists,
//! with the subgroup bookkeeping needed downstream: conjugacy classes of
//! subgroups, normalizers, Weyl groups and the symmetric-group embeddings.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::{Error, Result};

/// Largest group accepted in table form; tables are validated in O(n^3).
pub const MAX_TABLE_ORDER: usize = 128;
/// Largest group enumerated from permutation generators (8!).
pub const MAX_PERM_ORDER: usize = 40320;
/// Bound for subgroup lattices; members are packed into a u64.
pub const MAX_LATTICE_ORDER: usize = 64;
/// Default bound on `m * n` for wreath embeddings.
pub const DEFAULT_WREATH_BOUND: usize = 8;

pub type Perm = Vec<u8>;

#[derive(Clone)]
enum Storage {
    Table(Vec<u32>),
    Perms {
        degree: usize,
        elems: Vec<Perm>,
        index: HashMap<Perm, usize>,
        cache: Option<Vec<u32>>,
    },
}

/// Permutation groups up to this order also keep a product table.
const PERM_CACHE_ORDER: usize = 1024;

/// A finite group on the index set `0..order`.
///
/// Permutation groups keep their elements sorted lexicographically, so the
/// identity is element 0; the product is `(a*b)(x) = a(b(x))`.
#[derive(Clone)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    storage: Storage,
    inverse: Vec<usize>,
    identity: usize,
    generators: Vec<usize>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.name, self.order)
    }
}

impl FiniteGroup {
    /// Builds a group from a full multiplication table, checking the axioms.
    pub fn from_table(name: &str, table: &[Vec<usize>]) -> Result<FiniteGroup> {
        from_table_located(name, table, &|_| 0)
    }

    /// Enumerates the group generated by permutations of `0..degree`.
    pub fn from_perms(name: &str, degree: usize, generators: &[Perm]) -> Result<FiniteGroup> {
        if degree > u8::MAX as usize {
            return Err(Error::Size(format!("permutation degree {degree}")));
        }
        for g in generators {
            if !is_permutation(g, degree) {
                return Err(Error::Structure(format!(
                    "{g:?} is not a permutation of 0..{degree}"
                )));
            }
        }
        let id: Perm = (0..degree as u8).collect();
        let mut seen: HashMap<Perm, ()> = HashMap::new();
        seen.insert(id.clone(), ());
        let mut queue = VecDeque::from([id]);
        let mut elems = Vec::new();
        while let Some(x) = queue.pop_front() {
            for g in generators {
                let y = compose(&x, g);
                if !seen.contains_key(&y) {
                    if seen.len() >= MAX_PERM_ORDER {
                        return Err(Error::Size(format!(
                            "{name}: more than {MAX_PERM_ORDER} elements"
                        )));
                    }
                    seen.insert(y.clone(), ());
                    queue.push_back(y);
                }
            }
            elems.push(x);
        }
        elems.sort();
        let gens: Vec<Perm> = generators.to_vec();
        Ok(Self::from_sorted_perms(name, degree, elems, &gens))
    }

    fn from_sorted_perms(
        name: &str,
        degree: usize,
        elems: Vec<Perm>,
        gens: &[Perm],
    ) -> FiniteGroup {
        let index: HashMap<Perm, usize> = elems
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        let inverse = elems.iter().map(|p| index[&invert(p)]).collect();
        let mut generators: Vec<usize> =
            gens.iter().map(|g| index[g]).filter(|&g| g != 0).collect();
        generators.dedup();
        let n = elems.len();
        let cache = (n <= PERM_CACHE_ORDER).then(|| {
            let mut t = Vec::with_capacity(n * n);
            for a in &elems {
                for b in &elems {
                    t.push(index[&compose(a, b)] as u32);
                }
            }
            t
        });
        FiniteGroup {
            name: name.to_string(),
            order: n,
            storage: Storage::Perms {
                degree,
                elems,
                index,
                cache,
            },
            inverse,
            identity: 0,
            generators,
        }
    }

    /// The symmetric group on `n` points, elements in lexicographic order.
    pub fn symmetric(n: usize) -> Result<FiniteGroup> {
        if n > 8 {
            return Err(Error::Size(format!("symmetric group of degree {n}")));
        }
        let mut elems = Vec::new();
        let mut p: Perm = (0..n as u8).collect();
        loop {
            elems.push(p.clone());
            if !next_permutation(&mut p) {
                break;
            }
        }
        let mut gens = Vec::new();
        if n >= 2 {
            let mut t: Perm = (0..n as u8).collect();
            t.swap(0, 1);
            gens.push(t);
        }
        if n >= 3 {
            gens.push((0..n as u8).map(|i| (i + 1) % n as u8).collect());
        }
        Ok(Self::from_sorted_perms(&format!("S{n}"), n, elems, &gens))
    }

    /// The cyclic group `Z/n`, element `k` standing for the k-th power of a
    /// generator.
    pub fn cyclic(n: usize) -> Result<FiniteGroup> {
        if n == 0 || n > MAX_TABLE_ORDER {
            return Err(Error::Size(format!("cyclic group of order {n}")));
        }
        let table: Vec<Vec<usize>> = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        Self::from_table(&format!("C{n}"), &table)
    }

    pub fn trivial() -> FiniteGroup {
        Self::from_table("e", &[vec![0]]).expect("trivial group")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: &str) {
        self.name = name.to_string();
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    /// A generating set (not necessarily minimal).
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.storage {
            Storage::Table(t) => t[a * self.order + b] as usize,
            Storage::Perms { cache: Some(t), .. } => t[a * self.order + b] as usize,
            Storage::Perms { elems, index, .. } => index[&compose(&elems[a], &elems[b])],
        }
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inverse[g])
    }

    pub fn pow(&self, a: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, a))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Permutation degree when the group is stored as permutations.
    pub fn perm_degree(&self) -> Option<usize> {
        match &self.storage {
            Storage::Perms { degree, .. } => Some(*degree),
            Storage::Table(_) => None,
        }
    }

    pub fn perm(&self, a: usize) -> Option<&Perm> {
        match &self.storage {
            Storage::Perms { elems, .. } => Some(&elems[a]),
            Storage::Table(_) => None,
        }
    }

    pub fn index_of_perm(&self, p: &[u8]) -> Option<usize> {
        match &self.storage {
            Storage::Perms { index, .. } => index.get(p).copied(),
            Storage::Table(_) => None,
        }
    }

    pub fn element_name(&self, a: usize) -> String {
        match self.perm(a) {
            Some(p) => cycle_string(p),
            None => format!("g{a}"),
        }
    }

    /// Materializes the full multiplication table.
    pub fn table(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|a| (0..self.order).map(|b| self.mul(a, b)).collect())
            .collect()
    }

    /// Subgroup generated by `gens`, as a membership vector.
    pub fn closure(&self, gens: &[usize]) -> Vec<bool> {
        let mut member = vec![false; self.order];
        member[self.identity] = true;
        let mut list = vec![self.identity];
        let mut i = 0;
        while i < list.len() {
            let x = list[i];
            for &g in gens {
                let y = self.mul(x, g);
                if !member[y] {
                    member[y] = true;
                    list.push(y);
                }
            }
            i += 1;
        }
        member
    }

    /// Conjugacy classes of elements, each sorted, ordered by least member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order];
        let mut classes = Vec::new();
        for x in 0..self.order {
            if seen[x] {
                continue;
            }
            let class: BTreeSet<usize> = (0..self.order).map(|g| self.conj(g, x)).collect();
            for &y in &class {
                seen[y] = true;
            }
            classes.push(class.into_iter().collect());
        }
        classes
    }

    pub fn is_abelian(&self) -> bool {
        self.generators.iter().all(|&a| {
            self.generators
                .iter()
                .all(|&b| self.mul(a, b) == self.mul(b, a))
        })
    }
}

fn from_table_located(
    name: &str,
    table: &[Vec<usize>],
    row_line: &dyn Fn(usize) -> usize,
) -> Result<FiniteGroup> {
    let n = table.len();
    let bad = |row: usize, msg: String| Error::Parse {
        source_name: name.to_string(),
        line: row_line(row),
        column: 0,
        message: msg,
    };
    if n == 0 {
        return Err(Error::Structure(format!(
            "{name}: empty multiplication table"
        )));
    }
    if n > MAX_TABLE_ORDER {
        return Err(Error::Size(format!(
            "{name}: table order {n} exceeds {MAX_TABLE_ORDER}"
        )));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (i, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(bad(
                i,
                format!("row {i} has {} entries, expected {n}", row.len()),
            ));
        }
        for &v in row {
            if v >= n {
                return Err(bad(i, format!("row {i} contains out-of-range entry {v}")));
            }
            flat.push(v as u32);
        }
    }
    let m = |a: usize, b: usize| flat[a * n + b] as usize;
    let identity = (0..n)
        .find(|&e| (0..n).all(|x| m(e, x) == x && m(x, e) == x))
        .ok_or_else(|| Error::Structure(format!("{name}: no identity element")))?;
    let mut inverse = vec![usize::MAX; n];
    for a in 0..n {
        let b = (0..n)
            .find(|&b| m(a, b) == identity && m(b, a) == identity)
            .ok_or_else(|| bad(a, format!("element {a} has no inverse")))?;
        inverse[a] = b;
    }
    for a in 0..n {
        for b in 0..n {
            let ab = m(a, b);
            for c in 0..n {
                if m(ab, c) != m(a, m(b, c)) {
                    return Err(bad(a, format!("associativity fails for ({a}, {b}, {c})")));
                }
            }
        }
    }
    let mut g = FiniteGroup {
        name: name.to_string(),
        order: n,
        storage: Storage::Table(flat),
        inverse,
        identity,
        generators: Vec::new(),
    };
    g.generators = greedy_generators(&g);
    Ok(g)
}

/// Adds elements in index order until they generate everything.
fn greedy_generators(g: &FiniteGroup) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut span = g.closure(&gens);
    for x in 0..g.order {
        if !span[x] {
            gens.push(x);
            span = g.closure(&gens);
        }
    }
    gens
}

pub fn compose(a: &[u8], b: &[u8]) -> Perm {
    b.iter().map(|&x| a[x as usize]).collect()
}

pub fn invert(a: &[u8]) -> Perm {
    let mut r = vec![0u8; a.len()];
    for (i, &x) in a.iter().enumerate() {
        r[x as usize] = i as u8;
    }
    r
}

fn is_permutation(p: &[u8], degree: usize) -> bool {
    let mut seen = vec![false; degree];
    p.len() == degree
        && p.iter().all(|&x| {
            let ok = (x as usize) < degree && !seen[x as usize];
            if ok {
                seen[x as usize] = true;
            }
            ok
        })
}

fn next_permutation(p: &mut [u8]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Sign of a permutation: `true` for odd.
pub fn is_odd(p: &[u8]) -> bool {
    let mut seen = vec![false; p.len()];
    let mut transpositions = 0;
    for s in 0..p.len() {
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x] as usize;
            len += 1;
        }
        if len > 0 {
            transpositions += len - 1;
        }
    }
    transpositions % 2 == 1
}

/// Cycle notation with 1-based points, `()` for the identity.
pub fn cycle_string(p: &[u8]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for s in 0..p.len() {
        if seen[s] || p[s] as usize == s {
            continue;
        }
        let mut cyc = Vec::new();
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            cyc.push((x + 1).to_string());
            x = p[x] as usize;
        }
        out.push('(');
        out.push_str(&cyc.join(" "));
        out.push(')');
    }
    if out.is_empty() {
        out.push_str("()");
    }
    out
}

/// Parses 1-based cycle notation such as `(1 2 3)(4 5)`.
pub fn parse_cycles(s: &str, degree: usize) -> std::result::Result<Perm, String> {
    let mut p: Perm = (0..degree as u8).collect();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| format!("expected '(' in {s:?}"))?;
        let close = body
            .find(')')
            .ok_or_else(|| format!("unclosed cycle in {s:?}"))?;
        let points = body[..close]
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| format!("bad point {t:?} in {s:?}"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        apply_cycle(&mut p, &points, degree).map_err(|e| format!("{e} in {s:?}"))?;
        rest = body[close + 1..].trim_start();
    }
    Ok(p)
}

fn apply_cycle(p: &mut Perm, points: &[usize], degree: usize) -> std::result::Result<(), String> {
    if points.iter().any(|&x| x == 0 || x > degree) {
        return Err(format!("point out of range 1..={degree}"));
    }
    let set: BTreeSet<usize> = points.iter().copied().collect();
    if set.len() != points.len() {
        return Err("repeated point".into());
    }
    // The new cycle acts after whatever was already parsed.
    let mut c: Perm = (0..degree as u8).collect();
    for i in 0..points.len() {
        c[points[i] - 1] = (points[(i + 1) % points.len()] - 1) as u8;
    }
    *p = compose(&c, p);
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GeneratorSpec {
    Cycles(String),
    Lists(Vec<Vec<usize>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    name: String,
    order: Option<usize>,
    mul_table: Option<Vec<Vec<usize>>>,
    perm_generators: Option<Vec<GeneratorSpec>>,
    degree: Option<usize>,
}

/// Loads a group file: `{name, order, mul_table}` or
/// `{name, perm_generators, degree?}` with 1-based cycle notation.
pub fn parse_group(source_name: &str, text: &str) -> Result<FiniteGroup> {
    let file: GroupFile =
        serde_json::from_str(text).map_err(|e| Error::from_json(source_name, e))?;
    let at_key = |key: &str| {
        let off = text.find(&format!("\"{key}\"")).unwrap_or(0);
        text[..off].lines().count().max(1)
    };
    let group = match (&file.mul_table, &file.perm_generators) {
        (Some(t), None) => {
            let rows = row_lines(text, "mul_table");
            from_table_located(&file.name, t, &|r| rows.get(r).copied().unwrap_or(0)).map_err(
                |e| match e {
                    Error::Parse {
                        line,
                        column,
                        message,
                        ..
                    } => Error::Parse {
                        source_name: source_name.to_string(),
                        line,
                        column,
                        message,
                    },
                    other => other,
                },
            )?
        }
        (None, Some(gens)) => {
            let degree = file.degree.unwrap_or_else(|| {
                gens.iter()
                    .map(|g| match g {
                        GeneratorSpec::Cycles(s) => s
                            .split(|c: char| !c.is_ascii_digit())
                            .filter_map(|t| t.parse::<usize>().ok())
                            .max()
                            .unwrap_or(0),
                        GeneratorSpec::Lists(l) => l.iter().flatten().copied().max().unwrap_or(0),
                    })
                    .max()
                    .unwrap_or(0)
            });
            let mut perms = Vec::new();
            for g in gens {
                let p = match g {
                    GeneratorSpec::Cycles(s) => parse_cycles(s, degree),
                    GeneratorSpec::Lists(cycles) => {
                        let mut p: Perm = (0..degree as u8).collect();
                        cycles
                            .iter()
                            .try_for_each(|c| apply_cycle(&mut p, c, degree))
                            .map(|_| p)
                    }
                }
                .map_err(|message| Error::Parse {
                    source_name: source_name.to_string(),
                    line: at_key("perm_generators"),
                    column: 0,
                    message,
                })?;
                perms.push(p);
            }
            FiniteGroup::from_perms(&file.name, degree, &perms)?
        }
        _ => {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line: 1,
                column: 1,
                message: "exactly one of mul_table or perm_generators is required".into(),
            })
        }
    };
    if let Some(order) = file.order {
        if order != group.order() {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line: at_key("order"),
                column: 0,
                message: format!(
                    "declared order {order} but the group has {} elements",
                    group.order()
                ),
            });
        }
    }
    Ok(group)
}

pub fn load_group(path: &Path) -> Result<FiniteGroup> {
    let text = crate::read_file(path)?;
    parse_group(&path.display().to_string(), &text)
}

/// 1-based line numbers of the rows of the array stored under `key`.
fn row_lines(text: &str, key: &str) -> Vec<usize> {
    let Some(start) = text.find(&format!("\"{key}\"")) else {
        return Vec::new();
    };
    let mut line = text[..start].matches('\n').count() + 1;
    let mut depth = 0;
    let mut rows = Vec::new();
    for ch in text[start..].chars() {
        match ch {
            '\n' => line += 1,
            '[' => {
                depth += 1;
                if depth == 2 {
                    rows.push(line);
                }
            }
            ']' => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            _ => {}
        }
    }
    rows
}

/// A subgroup, stored as its sorted member indices in the parent.
#[derive(Clone, Debug)]
pub struct Subgroup {
    pub parent: Arc<FiniteGroup>,
    members: Vec<usize>,
    member: Vec<bool>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && Arc::ptr_eq(&self.parent, &other.parent)
    }
}

impl Subgroup {
    /// Validates closure, identity and inverses.
    pub fn new(parent: Arc<FiniteGroup>, members: &[usize]) -> Result<Subgroup> {
        let mut member = vec![false; parent.order()];
        for &x in members {
            if x >= parent.order() {
                return Err(Error::Structure(format!(
                    "element {x} not in {}",
                    parent.name()
                )));
            }
            member[x] = true;
        }
        if !member[parent.identity()] {
            return Err(Error::Structure(
                "subset does not contain the identity".into(),
            ));
        }
        for &a in members {
            if !member[parent.inv(a)] {
                return Err(Error::Structure(format!(
                    "subset not closed under inverse at {a}"
                )));
            }
            for &b in members {
                if !member[parent.mul(a, b)] {
                    return Err(Error::Structure(format!(
                        "subset not closed under product ({a}, {b})"
                    )));
                }
            }
        }
        Ok(Self::from_mask(parent, member))
    }

    fn from_mask(parent: Arc<FiniteGroup>, member: Vec<bool>) -> Subgroup {
        let members = (0..member.len()).filter(|&i| member[i]).collect();
        Subgroup {
            parent,
            members,
            member,
        }
    }

    pub fn generated(parent: Arc<FiniteGroup>, gens: &[usize]) -> Subgroup {
        let member = parent.closure(gens);
        Self::from_mask(parent, member)
    }

    pub fn whole(parent: Arc<FiniteGroup>) -> Subgroup {
        let member = vec![true; parent.order()];
        Self::from_mask(parent, member)
    }

    pub fn trivial(parent: Arc<FiniteGroup>) -> Subgroup {
        Self::generated(parent, &[])
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.member[x]
    }

    pub fn index(&self) -> usize {
        self.parent.order() / self.order()
    }

    pub fn is_normal(&self) -> bool {
        let g = &self.parent;
        g.generators()
            .iter()
            .all(|&s| self.members.iter().all(|&k| self.member[g.conj(s, k)]))
    }

    pub fn conjugate(&self, g: usize) -> Subgroup {
        let p = &self.parent;
        let mut member = vec![false; p.order()];
        for &k in &self.members {
            member[p.conj(g, k)] = true;
        }
        Self::from_mask(self.parent.clone(), member)
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }

    pub fn normalizer(&self) -> Subgroup {
        let g = &self.parent;
        let member: Vec<bool> = (0..g.order())
            .map(|x| self.members.iter().all(|&k| self.member[g.conj(x, k)]))
            .collect();
        Self::from_mask(self.parent.clone(), member)
    }

    /// The subgroup as a group in its own right (elements in member order),
    /// together with its inclusion into the parent.
    pub fn as_group(&self, name: &str) -> Result<(Arc<FiniteGroup>, GroupHom)> {
        let pos: HashMap<usize, usize> = self
            .members
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i))
            .collect();
        let group = if let Some(degree) = self.parent.perm_degree() {
            let elems: Vec<Perm> = self
                .members
                .iter()
                .map(|&x| self.parent.perm(x).unwrap().clone())
                .collect();
            let gens = small_generators(&self.parent, &self.members)
                .iter()
                .map(|&x| self.parent.perm(x).unwrap().clone())
                .collect::<Vec<_>>();
            FiniteGroup::from_sorted_perms(name, degree, elems, &gens)
        } else {
            let table: Vec<Vec<usize>> = self
                .members
                .iter()
                .map(|&a| {
                    self.members
                        .iter()
                        .map(|&b| pos[&self.parent.mul(a, b)])
                        .collect()
                })
                .collect();
            FiniteGroup::from_table(name, &table)?
        };
        let group = Arc::new(group);
        let inclusion = GroupHom::new(group.clone(), self.parent.clone(), self.members.clone())?;
        Ok((group, inclusion))
    }
}

/// A small generating set for a subset known to be a subgroup.
fn small_generators(g: &FiniteGroup, members: &[usize]) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut span = g.closure(&gens);
    for &x in members {
        if !span[x] {
            gens.push(x);
            span = g.closure(&gens);
        }
    }
    gens
}

/// One subgroup per conjugacy class. The representative is the conjugate
/// whose sorted member list is lexicographically least; the list is ordered
/// by subgroup order, then by that member list.
pub fn subgroups_up_to_conjugacy(g: &Arc<FiniteGroup>) -> Result<Vec<Subgroup>> {
    let n = g.order();
    if n > MAX_LATTICE_ORDER {
        return Err(Error::Size(format!(
            "subgroup lattice of {} (order {n}) exceeds {MAX_LATTICE_ORDER}",
            g.name()
        )));
    }
    let mask_of = |member: &[bool]| -> u64 {
        member
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u64, |m, (i, _)| m | (1 << i))
    };
    // Every subgroup is a join of cyclic subgroups.
    let mut cyclic: Vec<(u64, usize)> = Vec::new();
    for x in 0..n {
        let m = mask_of(&g.closure(&[x]));
        if !cyclic.iter().any(|&(c, _)| c == m) {
            cyclic.push((m, x));
        }
    }
    let mut all: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut frontier: Vec<(u64, Vec<usize>)> = vec![(1 << g.identity(), Vec::new())];
    all.insert(1 << g.identity(), Vec::new());
    while let Some((mask, gens)) = frontier.pop() {
        for &(cm, c) in &cyclic {
            if cm & !mask == 0 {
                continue;
            }
            let mut ng = gens.clone();
            ng.push(c);
            let m = mask_of(&g.closure(&ng));
            if let std::collections::hash_map::Entry::Vacant(e) = all.entry(m) {
                e.insert(ng.clone());
                frontier.push((m, ng));
            }
        }
    }
    let members = |m: u64| -> Vec<usize> { (0..n).filter(|&i| m >> i & 1 == 1).collect() };
    let mut seen: BTreeSet<u64> = BTreeSet::new();
    let mut reps: Vec<Vec<usize>> = Vec::new();
    let mut masks: Vec<u64> = all.keys().copied().collect();
    masks.sort_unstable();
    for m in masks {
        if seen.contains(&m) {
            continue;
        }
        let list = members(m);
        let mut best: Option<Vec<usize>> = None;
        for x in 0..n {
            let cm = list.iter().fold(0u64, |acc, &k| acc | 1 << g.conj(x, k));
            seen.insert(cm);
            let cl = members(cm);
            if best.as_ref().map_or(true, |b| cl < *b) {
                best = Some(cl);
            }
        }
        reps.push(best.unwrap());
    }
    reps.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(reps
        .into_iter()
        .map(|l| {
            let mut member = vec![false; n];
            for &x in &l {
                member[x] = true;
            }
            Subgroup::from_mask(g.clone(), member)
        })
        .collect())
}

/// `W(K) = N(K)/K` with the projection from the normalizer.
#[derive(Clone, Debug)]
pub struct WeylGroup {
    pub group: Arc<FiniteGroup>,
    pub normalizer: Subgroup,
    /// Coset index of each parent element lying in N(K).
    pub coset_of: Vec<Option<usize>>,
}

impl WeylGroup {
    pub fn project(&self, x: usize) -> Option<usize> {
        self.coset_of[x]
    }
}

/// Cosets are numbered by increasing least member.
pub fn weyl(k: &Subgroup) -> Result<WeylGroup> {
    let g = &k.parent;
    let n = k.normalizer();
    if !k.is_subgroup_of(&n) {
        return Err(Error::Structure(
            "subgroup is not contained in its normalizer".into(),
        ));
    }
    let mut coset_of = vec![None; g.order()];
    let mut reps = Vec::new();
    for &x in n.members() {
        if coset_of[x].is_some() {
            continue;
        }
        let c = reps.len();
        reps.push(x);
        for &y in k.members() {
            coset_of[g.mul(x, y)] = Some(c);
        }
    }
    let table: Vec<Vec<usize>> = reps
        .iter()
        .map(|&a| {
            reps.iter()
                .map(|&b| coset_of[g.mul(a, b)].unwrap())
                .collect()
        })
        .collect();
    let group = FiniteGroup::from_table(&format!("W({})", g.name()), &table)?;
    Ok(WeylGroup {
        group: Arc::new(group),
        normalizer: n,
        coset_of,
    })
}

/// A homomorphism given by the image of every source element.
#[derive(Clone, Debug)]
pub struct GroupHom {
    pub source: Arc<FiniteGroup>,
    pub target: Arc<FiniteGroup>,
    images: Vec<usize>,
}

impl GroupHom {
    /// Checks multiplicativity: exhaustively for sources up to 1024 elements,
    /// otherwise on generators against every element (which suffices).
    pub fn new(
        source: Arc<FiniteGroup>,
        target: Arc<FiniteGroup>,
        images: Vec<usize>,
    ) -> Result<GroupHom> {
        if images.len() != source.order() || images.iter().any(|&y| y >= target.order()) {
            return Err(Error::Structure("image table has the wrong shape".into()));
        }
        if images[source.identity()] != target.identity() {
            return Err(Error::Structure("identity is not preserved".into()));
        }
        let h = GroupHom {
            source,
            target,
            images,
        };
        if let Some((a, b)) = h.failure() {
            return Err(Error::Structure(format!(
                "not a homomorphism: h({a}*{b}) != h({a})*h({b})"
            )));
        }
        Ok(h)
    }

    fn failure(&self) -> Option<(usize, usize)> {
        let s = &self.source;
        let t = &self.target;
        let left: Vec<usize> = if s.order() <= 1024 {
            (0..s.order()).collect()
        } else {
            s.generators().to_vec()
        };
        for &a in &left {
            for b in 0..s.order() {
                if self.images[s.mul(a, b)] != t.mul(self.images[a], self.images[b]) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    pub fn identity(g: Arc<FiniteGroup>) -> GroupHom {
        let images = (0..g.order()).collect();
        GroupHom {
            source: g.clone(),
            target: g,
            images,
        }
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn kernel(&self) -> Vec<usize> {
        let e = self.target.identity();
        (0..self.source.order())
            .filter(|&x| self.images[x] == e)
            .collect()
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().len() == 1
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GroupHom) -> Result<GroupHom> {
        if !Arc::ptr_eq(&self.target, &other.source) && self.target.order() != other.source.order()
        {
            return Err(Error::Structure(
                "composition of incompatible homomorphisms".into(),
            ));
        }
        let images = self.images.iter().map(|&y| other.images[y]).collect();
        Ok(GroupHom {
            source: self.source.clone(),
            target: other.target.clone(),
            images,
        })
    }

    pub fn image_subgroup(&self) -> Subgroup {
        let gens: Vec<usize> = self
            .source
            .generators()
            .iter()
            .map(|&g| self.images[g])
            .collect();
        Subgroup::generated(self.target.clone(), &gens)
    }
}

/// An isomorphism `a -> b`, if one exists, found by trying generator images
/// of matching element orders.
pub fn isomorphism(a: &FiniteGroup, b: &FiniteGroup) -> Option<Vec<usize>> {
    if a.order() != b.order() {
        return None;
    }
    let gens = a.generators().to_vec();
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| {
            let o = a.element_order(g);
            (0..b.order())
                .filter(|&y| b.element_order(y) == o)
                .collect()
        })
        .collect();
    let mut choice = vec![0usize; gens.len()];
    loop {
        if candidates.iter().any(|c| c.is_empty()) {
            return None;
        }
        let imgs: Vec<usize> = choice.iter().zip(&candidates).map(|(&i, c)| c[i]).collect();
        if let Some(map) = extend_on_generators(a, b, &gens, &imgs) {
            return Some(map);
        }
        // Odometer over the candidate lists.
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return None;
            }
            choice[pos] += 1;
            if choice[pos] < candidates[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn extend_on_generators(
    a: &FiniteGroup,
    b: &FiniteGroup,
    gens: &[usize],
    imgs: &[usize],
) -> Option<Vec<usize>> {
    let mut map = vec![usize::MAX; a.order()];
    map[a.identity()] = b.identity();
    let mut queue = VecDeque::from([a.identity()]);
    while let Some(x) = queue.pop_front() {
        for (&g, &t) in gens.iter().zip(imgs) {
            let y = a.mul(x, g);
            let z = b.mul(map[x], t);
            if map[y] == usize::MAX {
                map[y] = z;
                queue.push_back(y);
            } else if map[y] != z {
                return None;
            }
        }
    }
    let mut hit = vec![false; b.order()];
    for &y in &map {
        if y == usize::MAX || hit[y] {
            return None;
        }
        hit[y] = true;
    }
    Some(map)
}

/// The standard inclusion `Σ_m ≀ Σ_n -> Σ_{mn}`: block `b` holds the points
/// `b*m .. b*m + m`; the base group permutes inside blocks and the top group
/// permutes whole blocks.
pub fn wreath_embedding(m: usize, n: usize, bound: usize) -> Result<GroupHom> {
    if m == 0 || n == 0 {
        return Err(Error::Precondition(
            "wreath factors must be positive".into(),
        ));
    }
    if m * n > bound {
        return Err(Error::Size(format!(
            "wreath embedding into S{} exceeds bound {bound}",
            m * n
        )));
    }
    let deg = m * n;
    let id: Perm = (0..deg as u8).collect();
    let mut gens = Vec::new();
    if m >= 2 {
        let mut t = id.clone();
        t.swap(0, 1);
        gens.push(t);
    }
    if m >= 3 {
        let mut c = id.clone();
        for i in 0..m {
            c[i] = ((i + 1) % m) as u8;
        }
        gens.push(c);
    }
    let block_perm = |sigma: &dyn Fn(usize) -> usize| -> Perm {
        (0..deg).map(|x| (sigma(x / m) * m + x % m) as u8).collect()
    };
    if n >= 2 {
        gens.push(block_perm(&|b| match b {
            0 => 1,
            1 => 0,
            b => b,
        }));
    }
    if n >= 3 {
        gens.push(block_perm(&|b| (b + 1) % n));
    }
    let wreath = FiniteGroup::from_perms(&format!("S{m}wrS{n}"), deg, &gens)?;
    let expected = factorial(m).pow(n as u32) * factorial(n);
    if wreath.order() != expected {
        return Err(Error::Internal(format!(
            "wreath product has order {}, expected {expected}",
            wreath.order()
        )));
    }
    let target = FiniteGroup::symmetric(deg)?;
    let images = (0..wreath.order())
        .map(|i| target.index_of_perm(wreath.perm(i).unwrap()).unwrap())
        .collect();
    GroupHom::new(Arc::new(wreath), Arc::new(target), images)
}

/// `C_p -> Σ_p`, generator to the p-cycle `(1 2 ... p)`.
pub fn cyclic_embedding(p: usize) -> Result<GroupHom> {
    if !(2..=7).contains(&p) || !crate::fp::is_prime(p as u64) {
        return Err(Error::Precondition(format!(
            "cyclic embedding needs a prime p <= 7, got {p}"
        )));
    }
    let source = FiniteGroup::cyclic(p)?;
    let target = FiniteGroup::symmetric(p)?;
    let cycle: Perm = (0..p as u8).map(|i| (i + 1) % p as u8).collect();
    let mut images = Vec::with_capacity(p);
    let mut x: Perm = (0..p as u8).collect();
    for _ in 0..p {
        images.push(target.index_of_perm(&x).unwrap());
        x = compose(&cycle, &x);
    }
    GroupHom::new(Arc::new(source), Arc::new(target), images)
}

/// The sign homomorphism `Σ_n -> C_2`.
pub fn sign_hom(sn: Arc<FiniteGroup>) -> Result<GroupHom> {
    let c2 = Arc::new(FiniteGroup::cyclic(2)?);
    let images = (0..sn.order())
        .map(|i| {
            let p = sn
                .perm(i)
                .ok_or_else(|| Error::Precondition("sign needs a permutation group".into()))?;
            Ok(usize::from(is_odd(p)))
        })
        .collect::<Result<Vec<_>>>()?;
    GroupHom::new(sn, c2, images)
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orders(g: &Arc<FiniteGroup>) -> Vec<usize> {
        subgroups_up_to_conjugacy(g)
            .unwrap()
            .iter()
            .map(|s| s.order())
            .collect()
    }

    #[test]
    fn cyclic_lattices() {
        assert_eq!(
            orders(&Arc::new(FiniteGroup::cyclic(2).unwrap())),
            vec![1, 2]
        );
        assert_eq!(
            orders(&Arc::new(FiniteGroup::cyclic(4).unwrap())),
            vec![1, 2, 4]
        );
    }

    #[test]
    fn s3_lattice() {
        assert_eq!(
            orders(&Arc::new(FiniteGroup::symmetric(3).unwrap())),
            vec![1, 2, 3, 6]
        );
    }

    #[test]
    fn s4_has_eleven_classes() {
        assert_eq!(
            subgroups_up_to_conjugacy(&Arc::new(FiniteGroup::symmetric(4).unwrap()))
                .unwrap()
                .len(),
            11
        );
    }

    #[test]
    fn weyl_examples() {
        let c4 = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let k = Subgroup::generated(c4.clone(), &[2]);
        assert_eq!(weyl(&k).unwrap().group.order(), 2);
        let s3 = Arc::new(FiniteGroup::symmetric(3).unwrap());
        let t = Subgroup::generated(s3.clone(), &[1]);
        assert_eq!(t.order(), 2);
        assert_eq!(weyl(&t).unwrap().group.order(), 1);
        assert_eq!(weyl(&Subgroup::trivial(s3)).unwrap().group.order(), 6);
    }

    #[test]
    fn wreath_orders_and_injectivity() {
        let h = wreath_embedding(2, 2, 8).unwrap();
        assert_eq!(h.source.order(), 8);
        assert!(h.is_injective());
        let h = wreath_embedding(1, 3, 8).unwrap();
        assert_eq!(h.images(), (0..6).collect::<Vec<_>>());
        let h = wreath_embedding(3, 1, 8).unwrap();
        assert_eq!(h.images(), (0..6).collect::<Vec<_>>());
        assert!(matches!(wreath_embedding(3, 3, 8), Err(Error::Size(_))));
    }

    #[test]
    fn cycle_sign_parity() {
        for p in [2, 3, 5, 7] {
            let h = cyclic_embedding(p).unwrap();
            let sign = sign_hom(h.target.clone()).unwrap();
            let composite = h.then(&sign).unwrap();
            let in_kernel = composite.kernel().len() == p;
            assert_eq!(in_kernel, p % 2 == 1, "p = {p}");
        }
    }

    #[test]
    fn cycle_notation_round_trip() {
        let p = parse_cycles("(1 2 3)(4 5)", 5).unwrap();
        assert_eq!(cycle_string(&p), "(1 2 3)(4 5)");
        assert!(parse_cycles("(1 1)", 3).is_err());
    }

    #[test]
    fn bad_table_reports_row_line() {
        let text = "{\n \"name\": \"bad\",\n \"mul_table\": [\n  [0, 1],\n  [1, 1]\n ]\n}";
        match parse_group("bad.json", text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn isomorphism_finds_s3_from_table() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let t = FiniteGroup::from_table("S3t", &s3.table()).unwrap();
        assert!(isomorphism(&t, &s3).is_some());
        let c6 = FiniteGroup::cyclic(6).unwrap();
        assert!(isomorphism(&c6, &s3).is_none());
    }
}
