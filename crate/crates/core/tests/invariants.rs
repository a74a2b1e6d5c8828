use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use eulercalc::falg::Pairing;
use eulercalc::fingroup::{subgroups_up_to_conjugacy, Subgroup};
use eulercalc::opcatalog::{Catalog, OpLabel};
use eulercalc::oracle::{self, Letter, PolyElement, SteenrodWord};
use eulercalc::repring::{restrict_deg, Library, SubgroupData};
use eulercalc::wreath;
use eulercalc::RODegree;

fn catalog() -> &'static Catalog {
    static CAT: OnceLock<Catalog> = OnceLock::new();
    CAT.get_or_init(|| Catalog::load_default().unwrap())
}

fn ladder(weight: usize) -> Arc<dyn Pairing> {
    Arc::new(
        wreath::ladder_module(&format!("L{weight}"), 2, weight - 1, 48)
            .build()
            .unwrap(),
    )
}

fn poly(p: u32, vars: usize, exps: &[Vec<u32>]) -> PolyElement {
    exps.iter().fold(PolyElement::zero(p, vars), |acc, e| {
        acc.add(&PolyElement::monomial(p, e.clone(), 0))
    })
}

fn monomials(vars: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0u32..3, vars), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn degree_laws_on_ladders(weight in 2usize..6, r in 0usize..4, shift in 0usize..4, k in 0usize..5) {
        let r = r % (weight - 1);
        let chi = wreath::ladder_sequence(&ladder(weight), weight, r, shift).unwrap();
        prop_assert!(chi.verify().holds());
        let d = chi.degree().unwrap();
        let step = &chi.stability * (weight as i64 - 1);
        let s = chi.shift(k);
        prop_assert!(s.verify().holds());
        prop_assert_eq!(s.degree().unwrap(), &d + &(&step * k as i64));
        if let Ok(x) = chi.reindex(k) {
            if !x.is_zero() {
                prop_assert!(x.verify().holds());
                prop_assert_eq!(x.degree().unwrap(), d);
            }
        }
    }

    #[test]
    fn sums_of_sequences_stay_eulerian(weight in 2usize..5, shifts in prop::collection::vec(0usize..3, 1..4)) {
        let m = ladder(weight);
        let seqs: Vec<_> = shifts.iter().map(|&s| wreath::ladder_sequence(&m, weight, 0, s).unwrap().shift(2 - s)).collect();
        let total = seqs[1..].iter().fold(seqs[0].clone(), |acc, x| acc.add(x).unwrap());
        prop_assert!(total.verify().holds());
        prop_assert_eq!(total.is_zero(), shifts.len() % 2 == 0);
    }

    #[test]
    fn cartan_formula(f in monomials(4), g in monomials(4), k in 0u32..9) {
        let (f, g) = (poly(2, 4, &f), poly(2, 4, &g));
        let direct = oracle::apply(&SteenrodWord::sq(k), &f.mul(&g)).unwrap();
        let mut sum = PolyElement::zero(2, 4);
        for i in 0..=k {
            let a = oracle::apply(&SteenrodWord::sq(i), &f).unwrap();
            let b = oracle::apply(&SteenrodWord::sq(k - i), &g).unwrap();
            sum = sum.add(&a.mul(&b));
        }
        prop_assert_eq!(direct, sum);
    }

    #[test]
    fn adem_normal_forms_are_admissible(letters in prop::collection::vec(1u32..7, 1..4)) {
        let w = SteenrodWord::new(2, letters.iter().map(|&a| Letter::Sq(a)).collect()).unwrap();
        let nf = oracle::adem_normal_form(&w).unwrap();
        for (word, _) in &nf {
            let w2 = SteenrodWord::new(2, word.clone()).unwrap();
            prop_assert!(w2.is_admissible());
            prop_assert_eq!(w2.degree(), w.degree());
        }
    }

    #[test]
    fn restriction_is_transitive_and_degree_compatible(
        g in prop::sample::select(vec!["C2", "C3", "C4", "C2xC2", "S3"]),
        p in prop::sample::select(vec![2u32, 3, 5]),
        k in 0u64..6,
        pick in any::<prop::sample::Index>(),
    ) {
        let cat = catalog();
        let labels = cat.labels(g, p, 6).unwrap();
        let l = labels.into_iter().find(|x| x.k == k).unwrap_or_else(|| OpLabel::sq(g, k, None::<&str>));
        let t = cat.lib.table(g).unwrap();
        let subs = subgroups_up_to_conjugacy(&t.group).unwrap();
        let sub = &subs[pick.index(subs.len())];
        let r = cat.restrict_label(&l, sub).unwrap();
        let sd = SubgroupData::new(&cat.lib, sub).unwrap();
        let lhs = restrict_deg(&t, &sd.table, &sd.inclusion, &cat.degree(&l).unwrap()).unwrap();
        prop_assert_eq!(lhs, cat.degree(&r).unwrap());
        let down = cat.restrict_label(&r, &Subgroup::trivial(cat.lib.table(&r.group).unwrap().group.clone())).unwrap();
        let direct = cat.restrict_label(&l, &Subgroup::trivial(t.group.clone())).unwrap();
        prop_assert_eq!(cat.underlying(&down).unwrap(), cat.underlying(&direct).unwrap());
    }

    #[test]
    fn label_text_round_trips(g in prop::sample::select(vec!["C2", "C4", "S3"]), k in 0u64..20, bock in any::<bool>()) {
        let cat = catalog();
        for l in cat.labels(g, 2, 3).unwrap() {
            prop_assert_eq!(OpLabel::parse(&l.to_string()).unwrap(), l);
        }
        let l = OpLabel::sq(g, k, None::<&str>);
        let l = if bock { l.with_bockstein() } else { l };
        prop_assert_eq!(OpLabel::parse(&l.to_string()).unwrap(), l);
    }

    #[test]
    fn degree_arithmetic(a in -20i64..20, b in -20i64..20, n in -5i64..5) {
        let x = &RODegree::trivial(a) + &RODegree::term("sigma", b);
        prop_assert_eq!(&(&x * n) - &(&x * n), RODegree::zero());
        prop_assert_eq!((&x * n).div_exact(n).filter(|_| n != 0).unwrap_or(x.clone()), x);
    }
}

#[test]
fn library_is_deterministic() {
    let a = Library::load_default().unwrap();
    let b = Library::load_default().unwrap();
    for g in ["C2", "C3", "C4", "C2xC2", "S3"] {
        assert_eq!(
            a.table(g).unwrap().real.len(),
            b.table(g).unwrap().real.len()
        );
    }
}
