//! Acceptance suite: one PASS/FAIL line per criterion. Criteria listed in
//! `KNOWN_FAILURES` are expected to fail and are reported as such; the run
//! fails if the observed statuses differ from the expected ones.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eulercalc::eulerian::{coproduct, enumerate, EulerianSequence};
use eulercalc::falg::{validate_pairing, Element, Pairing};
use eulercalc::fingroup::{subgroups_up_to_conjugacy, FiniteGroup, GroupHom, Subgroup};
use eulercalc::grouphom::{induced, transfer, GroupHomology};
use eulercalc::instances::{self, derive_relation_degrees, InstanceBundle};
use eulercalc::linalg::Echelon;
use eulercalc::opcatalog::{fix_along, restrict_along, Catalog, FixedLabel, Kind, OpLabel};
use eulercalc::oracle::{self, Letter, PolyElement, SteenrodWord};
use eulercalc::repring::{
    epsilon, fixed_components, irr1, orientability_fold, restrict_deg, Library, Space, SubgroupData,
};
use eulercalc::wreath::{self, Axiom};
use eulercalc::{Fp, RODegree};

/// Criterion 5's completeness sub-check: the enumeration also finds
/// `ζ` with its leading zero removed (and its coefficient multiples),
/// which is not a shift of `β` or `ζ`.
const KNOWN_FAILURES: &[usize] = &[5];

const GROUPS: [&str; 5] = ["C2", "C3", "C4", "C2xC2", "S3"];

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

// 1. Classical completeness.
fn classical_completeness() -> Outcome {
    let b = instances::load("classical2").map_err(e)?;
    let beta = &b.named("beta").map_err(e)?.sequence;
    let targets: Vec<(RODegree, usize)> = (-20i64..=20)
        .map(|d| (RODegree::trivial(d), (20 + d) as usize))
        .collect();
    let slices = enumerate(b.pairing.clone(), &b.euler, 2, &b.stability, &targets).map_err(e)?;
    let mut found = 0;
    for s in &slices {
        let d = s.base_degree.trivial_part();
        if d < 0 {
            check(s.basis.is_empty(), || {
                format!("unexpected sequence in base degree {d}")
            })?;
            continue;
        }
        check(s.basis.len() == 1, || {
            format!("base degree {d}: {} sequences", s.basis.len())
        })?;
        let expect = beta.shift(d as usize);
        check(s.basis[0].agrees_with(&expect), || {
            format!(
                "base degree {d}: {:?} is not beta[{d}]",
                s.basis[0].format()
            )
        })?;
        // Entries stop at degree 20.
        let top = s.basis[0]
            .entries
            .last()
            .and_then(|x| b.pairing.homology().degree_of(x).ok().flatten());
        check(top == Some(RODegree::trivial(20)), || {
            format!("base degree {d}: top entry {top:?}")
        })?;
        found += 1;
    }
    check(found == 21, || format!("{found} sequences"))?;
    Ok("exactly beta[0..=20]".into())
}

// 2. Degree laws.
fn entry_degrees_constant(chi: &EulerianSequence) -> Result<Option<RODegree>, String> {
    let step = &chi.stability * (chi.weight as i64 - 1);
    let mut seen: Option<RODegree> = None;
    for (t, x) in chi.entries.iter().enumerate() {
        if let Some(d) = chi.homology().degree_of(x).map_err(e)? {
            let v = &(&step * t as i64) - &d;
            match &seen {
                None => seen = Some(v),
                Some(s) if *s != v => {
                    return Err(format!("t(n-1)V - |x_t| varies: {s} then {v} at t = {t}"))
                }
                _ => {}
            }
        }
    }
    Ok(seen)
}

fn degree_laws_for(chi: &EulerianSequence) -> Result<usize, String> {
    check(chi.verify().holds(), || "sample does not verify".into())?;
    let d = chi.degree().map_err(e)?;
    if let Some(v) = entry_degrees_constant(chi)? {
        check(v == d, || format!("entrywise degree {v} vs {d}"))?;
    }
    let step = &chi.stability * (chi.weight as i64 - 1);
    for k in 0..4 {
        let s = chi.shift(k);
        let sd = s.degree().map_err(e)?;
        check(sd == &d + &(&step * k as i64), || {
            format!("‖χ[{k}]‖ = {sd}, ‖χ‖ = {d}")
        })?;
    }
    for k in 1..4 {
        if let Ok(r) = chi.reindex(k) {
            if r.is_zero() {
                continue;
            }
            entry_degrees_constant(&r)?;
            let rd = r.degree().map_err(e)?;
            check(rd == d, || format!("‖reindex(χ, {k})‖ = {rd}, ‖χ‖ = {d}"))?;
        }
    }
    Ok(1)
}

fn degree_laws() -> Outcome {
    let mut shipped = 0;
    for name in instances::NAMES {
        let b = instances::load(name).map_err(e)?;
        for n in &b.named {
            shipped +=
                degree_laws_for(&n.sequence).map_err(|m| format!("{name}/{}: {m}", n.name))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut synthetic = 0;
    let mut ambients = BTreeMap::new();
    while synthetic < 100 {
        let weight = rng.gen_range(2..=5usize);
        let amb = ambients.entry(weight).or_insert_with(|| {
            let f = wreath::ladder_module(&format!("L{weight}"), 2, weight - 1, 60);
            Arc::new(f.build().expect("ladder builds")) as Arc<dyn Pairing>
        });
        let r = rng.gen_range(0..weight - 1);
        let chi = wreath::ladder_sequence(amb, weight, r, rng.gen_range(0..4)).map_err(e)?;
        synthetic +=
            degree_laws_for(&chi).map_err(|m| format!("synthetic weight {weight}: {m}"))?;
    }
    // Random combinations from enumerated slices of the odd-primary instance.
    let b = instances::load("classical_p3").map_err(e)?;
    let targets: Vec<(RODegree, usize)> = (0..=12).map(|d| (RODegree::trivial(d), 6)).collect();
    let slices = enumerate(
        b.pairing.clone(),
        &b.euler,
        b.weight,
        &b.stability,
        &targets,
    )
    .map_err(e)?;
    let mut combos = 0;
    for s in slices.iter().filter(|s| !s.basis.is_empty()) {
        let mut acc = s.basis[0].scale(rng.gen_range(1..3));
        for x in &s.basis[1..] {
            acc = acc.add(&x.scale(rng.gen_range(0..3))).map_err(e)?;
        }
        if !acc.is_zero() {
            combos +=
                degree_laws_for(&acc).map_err(|m| format!("classical_p3 combination: {m}"))?;
        }
    }
    Ok(format!(
        "{shipped} shipped, {synthetic} synthetic, {combos} combined sequences"
    ))
}

// 3. Cartan cross-check.
fn random_poly(rng: &mut ChaCha8Rng, vars: usize, max_degree: u32) -> PolyElement {
    let mut out = PolyElement::zero(2, vars);
    for _ in 0..rng.gen_range(1..=3) {
        let d = rng.gen_range(0..=max_degree);
        let mut exps = vec![0u32; vars];
        for _ in 0..d {
            exps[rng.gen_range(0..vars)] += 1;
        }
        out = out.add(&PolyElement::monomial(2, exps, 0));
    }
    out
}

fn cartan() -> Outcome {
    let b = instances::load("classical2").map_err(e)?;
    let h = b.pairing.homology();
    // ⟨e_i ⊗ e_j, Δ_2 b_k⟩ for k ≤ 16.
    let mut coeffs: Vec<Vec<(u32, u32, u32)>> = Vec::new();
    for k in 0..=16 {
        let x = Element::basis(h.require(&format!("b{k}")).map_err(e)?);
        let t = coproduct(b.pairing.as_ref(), &x, 2).map_err(e)?;
        let mut row = Vec::new();
        for (key, c) in t.terms() {
            let deg = |i: usize| h.degree(i).trivial_part() as u32;
            row.push((deg(key[0]), deg(key[1]), c));
        }
        coeffs.push(row);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checks = 0;
    for pair in 0..200 {
        let f = random_poly(&mut rng, 6, 8);
        let g = random_poly(&mut rng, 6, 8);
        let fg = f.mul(&g);
        let top = fg.degree().unwrap_or(0).min(16);
        for k in 0..=top {
            let direct = oracle::apply(&SteenrodWord::sq(k), &fg).map_err(e)?;
            let mut via = PolyElement::zero(2, 6);
            for &(i, j, c) in &coeffs[k as usize] {
                let si = oracle::apply(&SteenrodWord::sq(i), &f).map_err(e)?;
                let sj = oracle::apply(&SteenrodWord::sq(j), &g).map_err(e)?;
                via = via.add(&si.mul(&sj).scale(c));
            }
            check(direct == via, || {
                format!("pair {pair}, Sq{k}: f = {f}, g = {g}")
            })?;
            checks += 1;
        }
    }
    Ok(format!("200 pairs, {checks} identities"))
}

// 4. Adem consistency.
fn adem() -> Outcome {
    let mut words = 0;
    for a in 1..=11u32 {
        for b in 1..=12 - a {
            let (w1, w2) = (SteenrodWord::sq(a), SteenrodWord::sq(b));
            let joined = SteenrodWord::new(2, vec![Letter::Sq(a), Letter::Sq(b)]).map_err(e)?;
            let nf = oracle::adem_normal_form(&joined).map_err(e)?;
            for letters in nf.keys() {
                let w = SteenrodWord::new(2, letters.clone()).map_err(e)?;
                check(w.is_admissible(), || {
                    format!("Sq{a} Sq{b}: {w} is not admissible")
                })?;
            }
            let r =
                oracle::compose_check(&w1, &w2, 6, a + b, &oracle::adem_normal_form).map_err(e)?;
            check(r.holds, || {
                format!("Sq{a} Sq{b} differs on {:?}", r.witness)
            })?;
            words += 1;
        }
    }
    let mut odd = 0;
    let p3 = |l: Vec<Letter>| SteenrodWord::new(3, l);
    for a in 0..=6u32 {
        for b in 0..=6u32 {
            for (l1, l2) in [
                (vec![Letter::P(a)], vec![Letter::P(b)]),
                (vec![Letter::P(a)], vec![Letter::Beta, Letter::P(b)]),
                (vec![Letter::P(a), Letter::Beta], vec![Letter::P(b)]),
            ] {
                let deg = 4 * (a + b) + (l1.len() + l2.len() - 2) as u32;
                if a == 0 || b == 0 || deg > 24 {
                    continue;
                }
                let (w1, w2) = (p3(l1).map_err(e)?, p3(l2).map_err(e)?);
                let r =
                    oracle::compose_check(&w1, &w2, 3, 8, &oracle::adem_normal_form).map_err(e)?;
                check(r.holds, || format!("{w1} {w2} differs on {:?}", r.witness))?;
                odd += 1;
            }
        }
    }
    Ok(format!("{words} words at p = 2, {odd} at p = 3"))
}

// 5. C2 instance.
fn parse_hk_label(label: &str) -> (usize, usize, usize, usize) {
    let (mut i, mut j, mut kind, mut k) = (0, 0, 0, 0);
    for part in label.split('*') {
        if let Some(x) = part.strip_prefix("a^") {
            i = x.parse().unwrap();
        } else if part == "a" {
            i = 1;
        } else if let Some(x) = part.strip_prefix("u^") {
            j = x.parse().unwrap();
        } else if part == "u" {
            j = 1;
        } else if let Some(x) = part.strip_prefix('b') {
            k = x.parse().unwrap();
        } else if let Some(x) = part.strip_prefix('c') {
            kind = 1;
            k = x.parse().unwrap();
        }
    }
    (kind, k, i, j)
}

fn hk_label(kind: usize, k: usize, i: usize, j: usize) -> String {
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
    parts.push(format!("{}{k}", if kind == 0 { 'b' } else { 'c' }));
    parts.join("*")
}

/// `a^i u^j · χ`, with terms leaving the box dropped.
fn coefficient_multiple(b: &InstanceBundle, chi: &[Element], i: usize, j: usize) -> Vec<Element> {
    let h = b.pairing.homology();
    chi.iter()
        .map(|x| {
            let mut out = Element::zero();
            for (idx, c) in x.terms() {
                let (kind, k, ii, jj) = parse_hk_label(h.label(idx));
                if let Some(t) = h.index_of(&hk_label(kind, k, ii + i, jj + j)) {
                    out.add_term(b.field(), t, c);
                }
            }
            out
        })
        .collect()
}

fn c2_instance() -> Outcome {
    let lib = Library::load_default().map_err(e)?;
    let t = lib.table("C2").map_err(e)?;
    let known: BTreeMap<String, RODegree> = [("y", "sigma"), ("e_rho", "rho")]
        .iter()
        .map(|(n, d)| (n.to_string(), t.parse_degree(d).unwrap()))
        .collect();
    let d = derive_relation_degrees("y^2 = a*y + u*e_rho", &known).map_err(e)?;
    let sigma = t.parse_degree("sigma").map_err(e)?;
    check(d["a"] == sigma, || format!("|a| = {}", d["a"]))?;
    check(d["u"] == &sigma - &RODegree::trivial(1), || {
        format!("|u| = {}", d["u"])
    })?;
    let b = instances::load("c2equivariant").map_err(e)?;
    let beta = &b.named("beta").map_err(e)?.sequence;
    let zeta = &b.named("zeta").map_err(e)?.sequence;
    check(beta.verify().holds() && zeta.verify().holds(), || {
        "beta or zeta does not verify".into()
    })?;
    check(zeta.degree().map_err(e)? == RODegree::trivial(1), || {
        "‖ζ‖ ≠ 1".into()
    })?;

    let rho = t.rho();
    let width = 12;
    let horizon = 19;
    let mut targets = Vec::new();
    for m in -4i64..=8 {
        for n in -4i64..=12 {
            targets.push((&RODegree::trivial(m) + &(&sigma * n), horizon));
        }
    }
    let slices = enumerate(b.pairing.clone(), &b.euler, 2, &b.stability, &targets).map_err(e)?;
    // ζ with its leading zero removed.
    let h = b.pairing.homology();
    let zeta_down: Vec<Element> = (0..)
        .map_while(|t| h.index_of(&format!("c{t}")).map(Element::basis))
        .collect();
    let mut total = 0;
    let mut missing = Vec::new();
    let mut extra_witness: Option<String> = None;
    let mut extra_in_down = true;
    for s in &slices {
        let h = s.horizon;
        let mut cand = Vec::new();
        let mut down = Vec::new();
        for k in 0..=h {
            for (base, name, bd) in [
                (beta, "beta", RODegree::zero()),
                (zeta, "zeta", RODegree::trivial(1)),
            ] {
                for i in 0..width {
                    for j in 0..width {
                        let deg = &(&(&bd + &(&rho * k as i64)) + &(&sigma * i as i64))
                            + &(&(&sigma - &RODegree::trivial(1)) * j as i64);
                        if deg == s.base_degree {
                            let shifted = base.shift(k);
                            cand.push((
                                format!("{}{name}[{k}]", coeff_prefix(i, j)),
                                coefficient_multiple(&b, &shifted.entries, i, j),
                            ));
                        }
                    }
                }
            }
        }
        for i in 0..width {
            for j in 0..width {
                let deg = &(&(&RODegree::trivial(1) - &rho) + &(&sigma * i as i64))
                    + &(&(&sigma - &RODegree::trivial(1)) * j as i64);
                if deg == s.base_degree {
                    down.push(coefficient_multiple(&b, &zeta_down, i, j));
                }
            }
        }
        total += s.basis.len();
        let mut coords = BTreeMap::new();
        let mut flat = |v: &[Element]| -> Vec<(usize, u32)> {
            let mut out = Vec::new();
            for (t, x) in v.iter().enumerate().take(h + 1) {
                for (idx, c) in x.terms() {
                    let n = coords.len();
                    out.push((*coords.entry((t, idx)).or_insert(n), c));
                }
            }
            out
        };
        let sol: Vec<_> = s.basis.iter().map(|x| flat(&x.entries)).collect();
        let cf: Vec<_> = cand.iter().map(|(_, v)| flat(v)).collect();
        let df: Vec<_> = down.iter().map(|v| flat(v)).collect();
        let dim = coords.len();
        let f = b.field();
        let dense = |v: &[(usize, u32)]| {
            let mut d = vec![0u32; dim];
            for &(k, c) in v {
                d[k] = c;
            }
            d
        };
        let mut es = Echelon::new(f, dim);
        for v in &sol {
            es.insert(&dense(v));
        }
        for ((name, _), v) in cand.iter().zip(&cf) {
            if !es.contains(&dense(v)) {
                missing.push(format!("{name} at D = {}", s.base_degree));
            }
        }
        let mut ec = Echelon::new(f, dim);
        for v in &cf {
            ec.insert(&dense(v));
        }
        let mut ecd = ec.clone();
        for v in &df {
            ecd.insert(&dense(v));
        }
        for (x, v) in s.basis.iter().zip(&sol) {
            if !ec.contains(&dense(v)) {
                if extra_witness.is_none() {
                    extra_witness = Some(format!("D = {}: {}", s.base_degree, x.format()));
                }
                extra_in_down &= ecd.contains(&dense(v));
            }
        }
    }
    check(missing.is_empty(), || {
        format!(
            "named multiples not found: {:?}",
            &missing[..missing.len().min(5)]
        )
    })?;
    match extra_witness {
        None => Ok(format!("{} slices, {total} basis sequences, all in the span of beta[k], zeta[k]", slices.len())),
        Some(_) if !extra_in_down => Err("unexplained extra sequences in the enumeration".into()),
        Some(w) => Err(format!(
            "relation, degrees, beta, zeta and ‖ζ‖ = 1 hold; completeness fails: {} slices, {total} basis \
             sequences, first extra {w}; every extra is a coefficient multiple of (c0, c1, c2, ...) in degree -sigma",
            slices.len()
        )),
    }
}

fn coeff_prefix(i: usize, j: usize) -> String {
    let mut s = String::new();
    if i > 0 {
        s += &format!("a^{i}*");
    }
    if j > 0 {
        s += &format!("u^{j}*");
    }
    s
}

// 6. Label calculus.
fn sub_data(lib: &Library, k: &Subgroup) -> Result<SubgroupData, String> {
    SubgroupData::new(lib, k).map_err(e)
}

fn label_calculus() -> Outcome {
    let cat = Catalog::load_default().map_err(e)?;
    let lib = &cat.lib;
    let mut checks = 0;
    for g in GROUPS {
        let gt = lib.table(g).map_err(e)?;
        let go = gt.group.order();
        for p in [2u32, 3, 5] {
            for l in cat.labels(g, p, 3).map_err(e)? {
                let eg = epsilon(go, p) as u64;
                let reals = irr1(&gt);
                for k in subgroups_up_to_conjugacy(&gt.group).map_err(e)? {
                    let sd = sub_data(lib, &k)?;
                    let ko = k.order();
                    let r = cat.restrict_label(&l, &k).map_err(e)?;
                    // Degree identity.
                    let lhs =
                        restrict_deg(&gt, &sd.table, &sd.inclusion, &cat.degree(&l).map_err(e)?)
                            .map_err(e)?;
                    check(lhs == cat.degree(&r).map_err(e)?, || {
                        format!("{l} to {}: degree", sd.name)
                    })?;
                    // Scaling by |G:K| with the ε ratio.
                    let ek = epsilon(ko, p) as u64;
                    check(r.k * ek == l.k * (go / ko) as u64 * eg, || {
                        format!("{l} to {}: k = {}", sd.name, r.k)
                    })?;
                    check(r.bockstein == l.bockstein, || {
                        format!("{l}: bockstein lost")
                    })?;
                    // Twist restricted, read off the real table at p = 2.
                    if let (2, Some(tw)) = (p, &l.twist) {
                        let gv = &gt.real.iter().find(|x| &x.label == tw).unwrap().values;
                        let rv = &sd
                            .table
                            .real
                            .iter()
                            .find(|x| Some(&x.label) == r.twist.as_ref())
                            .unwrap()
                            .values;
                        for c in &sd.table.classes {
                            check(
                                rv[sd.table.class_of[c[0]]]
                                    == gv[gt.class_of[sd.inclusion.apply(c[0])]],
                                || format!("{l} to {}: twist", sd.name),
                            )?;
                        }
                    }
                    // Transitivity through every L ≤ K.
                    let kt = &sd.table;
                    for lsub in subgroups_up_to_conjugacy(&kt.group).map_err(e)? {
                        let ld = sub_data(lib, &lsub)?;
                        let two = restrict_along(&r, kt, &ld.name, &ld.table, &ld.inclusion)
                            .map_err(e)?;
                        let composite: GroupHom = ld.inclusion.then(&sd.inclusion).map_err(e)?;
                        let one =
                            restrict_along(&l, &gt, &ld.name, &ld.table, &composite).map_err(e)?;
                        check(one == two, || {
                            format!("{l}: {} via {} gives {two}, direct {one}", ld.name, sd.name)
                        })?;
                        checks += 1;
                    }
                    // Fixed points with the λ^K = 0 rule.
                    let fixed = cat.mod_geo_fix_label(&l, &k);
                    match (&l.twist, fixed) {
                        (None, Err(_)) => {}
                        (None, Ok(x)) => {
                            return Err(format!("{l} at K = {}: {x} instead of a refusal", sd.name))
                        }
                        (Some(tw), res) => {
                            let kills = if p == 2 {
                                let vals =
                                    &reals.characters.iter().find(|(x, _)| x == tw).unwrap().1;
                                k.members().iter().any(|&x| vals[gt.class_of[x]] != 0)
                            } else {
                                let set = eulercalc::opcatalog::twist_set(&gt, p).map_err(e)?;
                                let vals = &set.characters.iter().find(|(x, _)| x == tw).unwrap().1;
                                k.members().iter().any(|&x| vals[gt.class_of[x]] != 0)
                            };
                            let n_order = sd.weyl.normalizer.order();
                            let ew = epsilon(sd.weyl.group.order(), p) as u64;
                            let num = l.k * (go / n_order) as u64 * eg;
                            match res {
                                Ok(FixedLabel::Trivial { .. }) => check(kills, || {
                                    format!("{l} at {}: spurious trivial", sd.name)
                                })?,
                                Ok(FixedLabel::Label { label }) => {
                                    check(!kills, || {
                                        format!("{l} at {}: λ^K = 0 but {label}", sd.name)
                                    })?;
                                    check(label.k * ew == num, || {
                                        format!("{l} at {}: k = {}", sd.name, label.k)
                                    })?;
                                    check(label.group == sd.weyl_name, || {
                                        format!("{l} at {}: group", sd.name)
                                    })?;
                                }
                                Err(_) => check(!kills && num % ew != 0, || {
                                    format!("{l} at {}: unexpected refusal", sd.name)
                                })?,
                            }
                            let again =
                                fix_along(&l, &gt, &k, &sd.weyl, &sd.weyl_name, &sd.weyl_table);
                            check(
                                again.is_ok() == cat.mod_geo_fix_label(&l, &k).is_ok(),
                                || "fix_along disagrees".into(),
                            )?;
                        }
                    }
                    checks += 1;
                }
                // Underlying classical operations.
                let w = cat.underlying(&l).map_err(e)?;
                let kk = (l.k * go as u64 * eg / epsilon(1, p) as u64) as u32;
                let expect = match (l.kind, l.bockstein) {
                    (Kind::Sq, false) if kk == 0 => vec![],
                    (Kind::Sq, false) => vec![Letter::Sq(kk)],
                    (Kind::Sq, true) => vec![Letter::Sq(kk + 1)],
                    (Kind::P, false) if kk == 0 => vec![],
                    (Kind::P, false) => vec![Letter::P(kk)],
                    (Kind::P, true) if kk == 0 => vec![Letter::Beta],
                    (Kind::P, true) => vec![Letter::Beta, Letter::P(kk)],
                };
                check(w.letters == expect, || format!("underlying {l} = {w}"))?;
                let at_e = cat
                    .restrict_label(&l, &Subgroup::trivial(gt.group.clone()))
                    .map_err(e)?;
                check(cat.underlying(&at_e).map_err(e)? == w, || {
                    format!("underlying of {l} after restriction")
                })?;
                checks += 1;
            }
        }
    }
    // Examples with fixed answers.
    let c4half = cat.subgroup_by_name("C4", "C2").map_err(e)?;
    let r = cat
        .restrict_label(
            &OpLabel::parse("Sq[k=2,G=C4,lambda=sgn]").map_err(e)?,
            &c4half,
        )
        .map_err(e)?;
    check(r.to_string() == "Sq[k=4,G=C2,lambda=1]", || {
        format!("C4 example gives {r}")
    })?;
    let c2 = lib.group("C2").map_err(e)?;
    let fx = cat
        .mod_geo_fix_label(&OpLabel::sq("C2", 2, Some("sigma")), &Subgroup::whole(c2))
        .map_err(e)?;
    check(matches!(fx, FixedLabel::Trivial { .. }), || {
        "σ^{C2} is not zero".into()
    })?;
    Ok(format!("{checks} label checks"))
}

// 7. Group homology engine, with the normalized bar complex as oracle.
fn rank_mod_p(mut rows: Vec<Vec<u32>>, p: u32) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][c] % p != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = (1..p).find(|x| rows[rank][c] * x % p == 1).unwrap();
        for x in rows[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][c] % p != 0 {
                let m = rows[r][c];
                for k in 0..cols {
                    rows[r][k] = (rows[r][k] + (p - m) * rows[rank][k]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Boundary `C_n → C_{n-1}` of the normalized bar complex with trivial
/// coefficients, rows indexed by (n−1)-tuples.
fn bar_boundary_rank(g: &FiniteGroup, n: usize, p: u32) -> usize {
    if n == 0 {
        return 0;
    }
    let nonid: Vec<usize> = (0..g.order()).filter(|&x| x != g.identity()).collect();
    let tuples = |len: usize| -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|t| nonid.iter().map(move |&x| [t.clone(), vec![x]].concat()))
                .collect();
        }
        out
    };
    let src = tuples(n);
    let tgt = tuples(n - 1);
    let index: BTreeMap<Vec<usize>, usize> = tgt
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();
    let mut cols = Vec::new();
    for s in &src {
        let mut col = vec![0u32; tgt.len()];
        let mut add = |face: Vec<usize>, sign: u32| {
            if let Some(&i) = index.get(&face) {
                col[i] = (col[i] + sign) % p;
            }
        };
        add(s[1..].to_vec(), 1);
        for i in 1..n {
            let prod = g.mul(s[i - 1], s[i]);
            if prod != g.identity() {
                let mut f = s[..i - 1].to_vec();
                f.push(prod);
                f.extend_from_slice(&s[i + 1..]);
                add(f, if i % 2 == 0 { 1 } else { p - 1 });
            }
        }
        add(s[..n - 1].to_vec(), if n % 2 == 0 { 1 } else { p - 1 });
        cols.push(col);
    }
    rank_mod_p(cols, p)
}

fn group_homology() -> Outcome {
    let lib = Library::load_default().map_err(e)?;
    for (g, p) in [("C2", 2u32), ("C3", 3), ("S3", 2)] {
        let h = GroupHomology::compute(lib.group(g).map_err(e)?, p, 10).map_err(e)?;
        check(h.dims() == vec![1; 11], || {
            format!("H_*(B{g}; F_{p}) dims {:?}", h.dims())
        })?;
        check(h.resolution().boundary_squares_vanish(), || {
            format!("{g}: ∂² ≠ 0")
        })?;
        let r = validate_pairing(&h.to_presentation(&format!("B{g}")).map_err(e)?, None);
        check(r.ok() && r.associativity_checked > 0, || {
            format!("{g}: cup products fail {:?}", r.failures)
        })?;
    }
    // Bar complex dimensions as an independent route.
    let mut bar_checked = 0;
    for (g, p, top) in [
        ("C2", 2u32, 5usize),
        ("C3", 3, 4),
        ("C3", 2, 4),
        ("S3", 2, 3),
        ("S3", 3, 3),
        ("C2xC2", 2, 3),
    ] {
        let grp = lib.group(g).map_err(e)?;
        let h = GroupHomology::compute(grp.clone(), p, top).map_err(e)?;
        let nonid = grp.order() - 1;
        let ranks: Vec<usize> = (0..=top + 1)
            .map(|n| bar_boundary_rank(&grp, n, p))
            .collect();
        for n in 0..=top {
            let bar = nonid.pow(n as u32) - ranks[n] - ranks[n + 1];
            check(bar == h.dim(n), || {
                format!("H_{n}(B{g}; F_{p}): bar {bar}, engine {}", h.dim(n))
            })?;
            bar_checked += 1;
        }
    }
    // i_* ∘ tr = |G| on H_0.
    for g in GROUPS {
        let grp = lib.group(g).map_err(e)?;
        let (triv, incl) = Subgroup::trivial(grp.clone()).as_group("e").map_err(e)?;
        for p in [2u32, 3, 5] {
            let hg = GroupHomology::compute(grp.clone(), p, 1).map_err(e)?;
            let he = GroupHomology::compute(triv.clone(), p, 1).map_err(e)?;
            let tr = transfer(&incl, &hg, &he).map_err(e)?;
            let up = induced(&incl, &he, &hg).map_err(e)?;
            let v = up[0].mul(Fp::new(p).unwrap(), &tr[0]).get(0, 0);
            check(v as usize == grp.order() % p as usize, || {
                format!("{g}, p = {p}: i_* tr = {v} on H_0")
            })?;
        }
    }
    Ok(format!("dims through 10, ∂² = 0, cup associativity, {bar_checked} bar-complex dimensions, transfers"))
}

// 8. Orientability and ε.
fn orientability() -> Outcome {
    let lib = Library::load_default().map_err(e)?;
    let mut rows = 0;
    for g in GROUPS {
        let n = lib.group(g).map_err(e)?.order();
        for p in [2u32, 3, 5] {
            let orientable = p == 2 || n % 2 == 0;
            check((orientability_fold(n, p) == 1) == orientable, || {
                format!("{g}, p = {p}: fold")
            })?;
            let eps = if p == 2 {
                1
            } else if n % 2 == 0 {
                (p - 1) / 2
            } else {
                p - 1
            };
            check(epsilon(n, p) == eps, || {
                format!("{g}, p = {p}: ε = {}", epsilon(n, p))
            })?;
            rows += 1;
        }
    }
    Ok(format!("{rows} (G, p) rows"))
}

// 9. ⊙ harness.
fn wreath_harness() -> Outcome {
    let w1 = wreath::weight_one(3, 8).map_err(e)?;
    let t = |k: usize| Element::basis(w1.bn.homology().require(&format!("t{k}")).unwrap());
    let c = |a: Element| wreath::constant(w1.bn.clone(), a, 6, w1.stability.clone()).unwrap();
    let f = w1.bn.field();
    check(wreath::validate(&w1, &[(c(t(1)), c(t(2)))]).ok(), || {
        "weight-one data fails".into()
    })?;
    let prod = |x, y| wreath::product(x, y, &w1).map_err(e);
    let (c0, c2, c3) = (c(t(0)), c(t(2)), c(t(3)));
    check(prod(&c0, &c3)?.entries == c3.entries, || "1 ⊙ χ ≠ χ".into())?;
    check(prod(&c3, &c0)?.entries == c3.entries, || "χ ⊙ 1 ≠ χ".into())?;
    // Linearity in the left argument at p = 3.
    let sum = c(t(1).plus(f, &t(1).scaled(f, 2)));
    check(prod(&sum, &c2)?.is_zero(), || "(x + 2x) ⊙ y ≠ 0".into())?;
    let (c1, c1x2) = (c(t(1)), c(t(1).scaled(f, 2)));
    let two = prod(&c1x2, &c2)?;
    check(two.entries == prod(&c1, &c2)?.scale(2).entries, || {
        "2x ⊙ y ≠ 2(x ⊙ y)".into()
    })?;
    let mut instances = 1;
    let mut products = 0;
    for n in 2..=5 {
        for m in 2..=6 {
            let w = wreath::synthetic(n, m, 3).map_err(e)?;
            let samples = wreath::synthetic_samples(&w).map_err(e)?;
            let rep = wreath::validate(&w, &samples);
            check(rep.ok(), || {
                format!("synthetic({n},{m}): {:?}", rep.failures)
            })?;
            for (x, y) in &samples {
                let z = wreath::product(x, y, &w).map_err(e)?;
                let d = z.degree().map_err(e)?;
                check(
                    d == &x.degree().map_err(e)? + &y.degree().map_err(e)?,
                    || format!("synthetic({n},{m}): degree"),
                )?;
                // Linearity: (x + x) ⊙ y vanishes at p = 2.
                check(
                    wreath::product(&x.add(x).map_err(e)?, y, &w)
                        .map_err(e)?
                        .is_zero(),
                    || "x + x".into(),
                )?;
                products += 1;
            }
            // Unit laws through point data on the B_n side.
            let left = wreath::left_unit(w.bn.clone(), w.e_n.clone(), n, w.stability.clone())
                .map_err(e)?;
            let x = &samples[0].0;
            let z = wreath::product(
                &wreath::unit_sequence(&left, x.horizon()).map_err(e)?,
                x,
                &left,
            )
            .map_err(e)?;
            check(z.agrees_with(x), || {
                format!("synthetic({n},{m}): left unit")
            })?;
            let right = wreath::right_unit(w.bn.clone(), w.e_n.clone(), n, w.stability.clone())
                .map_err(e)?;
            let z = wreath::product(
                x,
                &wreath::unit_sequence(&right, x.horizon()).map_err(e)?,
                &right,
            )
            .map_err(e)?;
            check(z.agrees_with(x), || {
                format!("synthetic({n},{m}): right unit")
            })?;
            // Corruptions are caught with a witness.
            let (x0, y0) = &samples[0];
            let xi = x0.entries[m].terms().next().unwrap().0;
            let yi = y0.entries[1].terms().next().unwrap().0;
            let mut bad = w.clone();
            bad.circ.insert((xi, yi), Element::zero());
            let rep = wreath::validate(&bad, &samples);
            check(
                rep.failed(Axiom::CapRecursion) && !rep.failures[0].witness.is_empty(),
                || format!("synthetic({n},{m}): zeroed entry not caught"),
            )?;
            let mut bad = w.clone();
            bad.circ.insert((xi, yi), Element::basis(0));
            check(
                wreath::validate(&bad, &[]).failed(Axiom::DegreeAdditivity),
                || format!("synthetic({n},{m}): wrong-degree entry not caught"),
            )?;
            instances += 1;
        }
    }
    check(instances == 21, || format!("{instances} instances"))?;
    Ok(format!(
        "weight-one + {} synthetic instances, {products} products",
        instances - 1
    ))
}

// 10. Fixed-point components against a brute-force decomposition.
fn linear_characters(g: &FiniteGroup, n: u32) -> Vec<Vec<u32>> {
    // Homomorphisms to Z/n, by search over images of the generators.
    let gens = g.generators().to_vec();
    let mut out = Vec::new();
    let mut imgs = vec![0u32; gens.len()];
    loop {
        // Extend along words in the generators by breadth-first search.
        let mut val = vec![u32::MAX; g.order()];
        val[g.identity()] = 0;
        let mut queue = vec![g.identity()];
        let mut ok = true;
        while let Some(x) = queue.pop() {
            for (gi, &s) in gens.iter().enumerate() {
                let y = g.mul(x, s);
                let v = (val[x] + imgs[gi]) % n;
                if val[y] == u32::MAX {
                    val[y] = v;
                    queue.push(y);
                } else if val[y] != v {
                    ok = false;
                }
            }
        }
        if ok {
            out.push(val);
        }
        let mut i = 0;
        while i < imgs.len() {
            imgs[i] += 1;
            if imgs[i] < n {
                break;
            }
            imgs[i] = 0;
            i += 1;
        }
        if i == imgs.len() {
            break;
        }
    }
    out
}

fn fixed_point_components() -> Outcome {
    let lib = Library::load_default().map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut checked = 0;
    for g in GROUPS {
        let t = lib.table(g).map_err(e)?;
        let grp = t.group.clone();
        let mut reps = vec![t.rho()];
        for _ in 0..4 {
            let mut v = RODegree::zero();
            for r in &t.real {
                v.add_term(&r.label, rng.gen_range(0..3));
            }
            reps.push(v);
        }
        for (space, modulus) in [
            (Space::Projective, 2u32),
            (Space::Lens(3), 3),
            (Space::Lens(5), 5),
        ] {
            let chars = linear_characters(&grp, modulus);
            for (vi, v) in reps.iter().enumerate() {
                let v = if vi == 0 && modulus != 2 {
                    v * epsilon(grp.order(), modulus) as i64
                } else {
                    v.clone()
                };
                if v.is_zero() {
                    continue;
                }
                let chi = t.character(&v).map_err(e)?;
                // Multiplicity of each linear character by averaging.
                let mut mults = Vec::new();
                for lam in &chars {
                    let (mut re, mut im) = (0f64, 0f64);
                    for x in 0..grp.order() {
                        let ang = -2.0 * std::f64::consts::PI * lam[x] as f64 / modulus as f64;
                        re += chi[t.class_of[x]] as f64 * ang.cos();
                        im += chi[t.class_of[x]] as f64 * ang.sin();
                    }
                    let m = re / grp.order() as f64;
                    check(im.abs() < 1e-9 && (m - m.round()).abs() < 1e-9, || {
                        format!("{g}: bad average")
                    })?;
                    let m = m.round() as i64;
                    if m != 0 {
                        mults.push(m);
                    }
                }
                let got = fixed_components(&t, &v, space).map_err(e)?;
                let mut a: Vec<i64> = got.iter().map(|(_, m)| *m).collect();
                a.sort_unstable();
                mults.sort_unstable();
                check(a == mults, || {
                    format!("{g}, {space:?}, V = {v}: {a:?} vs brute force {mults:?}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (G, V, space) cases"))
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome, Duration); 10] = [
        (
            1,
            "classical completeness",
            classical_completeness,
            Duration::from_secs(5),
        ),
        (2, "degree laws", degree_laws, Duration::from_secs(5)),
        (3, "Cartan cross-check", cartan, Duration::from_secs(30)),
        (4, "Adem consistency", adem, Duration::from_secs(120)),
        (5, "C2 instance", c2_instance, Duration::from_secs(60)),
        (6, "label calculus", label_calculus, Duration::from_secs(10)),
        (
            7,
            "group homology engine",
            group_homology,
            Duration::from_secs(60),
        ),
        (
            8,
            "orientability and epsilon",
            orientability,
            Duration::from_millis(100),
        ),
        (
            9,
            "wreath product harness",
            wreath_harness,
            Duration::from_secs(10),
        ),
        (
            10,
            "fixed-point components",
            fixed_point_components,
            Duration::from_secs(5),
        ),
    ];
    let only: BTreeSet<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut unexpected = 0;
    for (n, name, f, budget) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let mut res = f();
        let took = start.elapsed();
        if res.is_ok() && took > budget {
            res = Err(format!("took {took:.2?}, budget {budget:?}"));
        }
        let known = KNOWN_FAILURES.contains(&n);
        let line = match &res {
            Ok(d) => format!("criterion {n:>2} PASS ({took:.2?}) {name}: {d}"),
            Err(d) if known => format!("criterion {n:>2} FAIL ({took:.2?}) {name} [known]: {d}"),
            Err(d) => format!("criterion {n:>2} FAIL ({took:.2?}) {name}: {d}"),
        };
        println!("{line}");
        let unexplained = matches!(&res, Err(d) if d.starts_with("unexplained"));
        if res.is_err() != known || unexplained {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criterion status(es) differ from the expected ones");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
