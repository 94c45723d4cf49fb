mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{brute_count, brute_models, brute_preserves, rel_from_mask};
use uqclone::closure::{
    check_upp, eval_formula, find_upp, normalize_pp_to_upp, pp_member, qfpp_closure, ConjFormula, FindUpp, Normalized,
    PpVerdict, Quant,
};
use uqclone::csp::{count_models, enumerate_models, unique_model, Count, Instance, Uniqueness};
use uqclone::lattice::{atom_profile, covered_verdict, dual_clone_name, identify_coclone, usat_class, Identification};
use uqclone::ppart::{certify_not_upp, ie0_determined_shape, ie0_witness, is_meet_closed, is_zero_closed, DeterminedShape};
use uqclone::reduce::{eth_reduction, rewrite_upp, unsat_to_usat, EthPlan};
use uqclone::relcore::{
    determined, dual_language, dual_op, dual_rel, graph_of, named, ops, ppol, Determined, Language, Op, Operation,
    PartialOperation, Relation,
};
use uqclone::weakbase::{emit_weakbase_qfpp, f_closure, u_relation, upp_via_core, weak_base};
use uqclone::Budget;

fn b() -> Budget {
    Budget::default()
}

fn lang(rels: impl IntoIterator<Item = Relation>) -> Language {
    Language::from_relations(2, rels).unwrap()
}

fn relation(max_arity: usize) -> impl Strategy<Value = Relation> {
    (1..=max_arity).prop_flat_map(|a| (Just(a), 1..1u64 << (1 << a))).prop_map(|(a, m)| rel_from_mask(a, m, "R"))
}

fn operation(max_arity: usize) -> impl Strategy<Value = Operation> {
    (1..=max_arity)
        .prop_flat_map(|a| (Just(a), prop::collection::vec(0u8..2, 1 << a)))
        .prop_map(|(a, t)| Operation::new(a, 2, t).unwrap())
}

fn language(max_rels: usize, max_arity: usize) -> impl Strategy<Value = Language> {
    prop::collection::vec(relation(max_arity), 1..=max_rels).prop_map(|rs| {
        lang(rs.into_iter().enumerate().map(|(i, r)| r.named(format!("G{i}"))).collect::<Vec<_>>())
    })
}

/// Clause instance: (relation index, scope) pairs over `n` variables.
fn instance(l: Language, max_vars: usize, max_cons: usize) -> impl Strategy<Value = Instance> {
    let nrels = l.relations().len();
    let arities: Vec<usize> = l.relations().iter().map(Relation::arity).collect();
    (1..=max_vars).prop_flat_map(move |n| {
        let l = l.clone();
        let arities = arities.clone();
        prop::collection::vec((0..nrels, prop::collection::vec(0..n, 5)), 0..=max_cons).prop_map(move |cs| {
            let mut i = Instance::new(l.clone(), (0..n).map(|v| format!("v{v}")).collect()).unwrap();
            for (r, scope) in cs {
                let name = l.relations()[r].display_name().to_string();
                i.add(&name, &scope[..arities[r]]).unwrap();
            }
            i
        })
    })
}

fn exact(c: Count) -> u128 {
    match c {
        Count::Exact(n) => n,
        Count::AtLeast(n) => panic!("capped at {n}"),
    }
}

// relcore -----------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn duality_transport(f in operation(3), r in relation(3)) {
        let lhs = uqclone::relcore::preserves(&f, &r).unwrap().holds();
        let rhs = uqclone::relcore::preserves(&dual_op(&f).unwrap(), &dual_rel(&r).unwrap()).unwrap().holds();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(lhs, brute_preserves(&f, &r));
    }

    #[test]
    fn projections_preserve(r in relation(4), k in 1usize..=4, i in 0usize..4) {
        let p = Operation::projection(k, 2, i % k);
        prop_assert!(uqclone::relcore::preserves(&p, &r).unwrap().holds());
    }

    #[test]
    fn determined_is_monotone(r in relation(4), i in 0usize..4, s in 0u8..16, extra in 0u8..16) {
        let n = r.arity();
        let i = i % n;
        let small: Vec<usize> = (0..n).filter(|&j| s >> j & 1 == 1).collect();
        let large: Vec<usize> = (0..n).filter(|&j| (s | extra) >> j & 1 == 1).collect();
        if determined(&r, i, &small).unwrap().is_yes() {
            prop_assert!(determined(&r, i, &large).unwrap().is_yes());
        }
    }

    #[test]
    fn graph_determined_by_arguments(f in operation(3)) {
        let g = graph_of(&f);
        let k = f.arity();
        let args: Vec<usize> = (0..k).collect();
        match determined(&g, k, &args).unwrap() {
            Determined::Yes(map) => {
                for (point, v) in map {
                    prop_assert_eq!(f.eval(&point), v);
                }
            }
            Determined::No(..) => prop_assert!(false, "graph not functional"),
        }
    }

    #[test]
    fn total_matches_partial(f in operation(3), r in relation(3)) {
        let a = uqclone::relcore::preserves(&f, &r).unwrap().holds();
        let p = uqclone::relcore::preserves(&f.to_partial(), &r).unwrap().holds();
        prop_assert_eq!(a, p);
    }

    #[test]
    fn text_round_trip(l in language(3, 4)) {
        prop_assert_eq!(Language::parse(&l.to_text()).unwrap().to_text(), l.to_text());
    }
}

// closure -----------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn galois_soundness(l in language(2, 3)) {
        let closure = qfpp_closure(&l, 3, &b()).unwrap();
        for k in 1..=2 {
            for f in ppol(&l, k, None, &b()).unwrap() {
                for q in &closure {
                    prop_assert!(brute_preserves(&f, &q.rel));
                }
            }
        }
    }

    #[test]
    fn fragments_never_invert(l in language(2, 3), r in relation(2)) {
        let in_qfpp = qfpp_closure(&l, r.arity(), &b()).unwrap().iter().any(|q| q.rel.tuples() == r.tuples());
        let upp = match find_upp(&r, &l, 1, &b()).unwrap() {
            FindUpp::Found(cert) => {
                prop_assert!(check_upp(&cert.formula, &r, &b()).unwrap().is_valid());
                true
            }
            FindUpp::NoneUpTo(_) => false,
        };
        let pp = !matches!(pp_member(&r, &l, &b()).unwrap(), PpVerdict::No(_));
        prop_assert!(!in_qfpp || upp);
        prop_assert!(!upp || pp);
    }

    #[test]
    fn eval_commutes_with_permutation(seed in 0u64..1000, perm in Just(vec![2usize, 0, 1])) {
        let l = lang([named::or(2), named::iff_or(), named::nand(2)]);
        let rels = ["OR2", "IFFOR", "NAND2"];
        let vars = ["a", "b", "c", "y"];
        let mut s = seed;
        let mut atoms: Vec<(&str, Vec<&str>)> = Vec::new();
        for _ in 0..3 {
            let r = rels[(s % 3) as usize];
            s /= 3;
            let ar = if r == "IFFOR" { 3 } else { 2 };
            let args = (0..ar).map(|_| { let v = vars[(s % 4) as usize]; s /= 4; v }).collect();
            atoms.push((r, args));
        }
        let atoms: Vec<(&str, &[&str])> = atoms.iter().map(|(r, a)| (*r, a.as_slice())).collect();
        let free = ["a", "b", "c"];
        let q = [("y", Quant::Exists)];
        let phi = ConjFormula::build("P", &l, &free, &q, &atoms).unwrap();
        let permuted: Vec<&str> = perm.iter().map(|&i| free[i]).collect();
        let psi = ConjFormula::build("P", &l, &permuted, &q, &atoms).unwrap();
        let a = eval_formula(&phi, &b()).unwrap().rel;
        let c = eval_formula(&psi, &b()).unwrap().rel;
        let a = a.permute(&perm).unwrap();
        prop_assert_eq!(a.tuples(), c.tuples());
    }
}

#[test]
fn formula_and_relation_searches_agree() {
    let l = lang([named::or(2), named::iff_or(), named::nand(2)]);
    type Atoms = Vec<(&'static str, Vec<&'static str>)>;
    let suite: Vec<(&str, Atoms)> = vec![
        ("or3", vec![("OR2", vec!["x1", "y"]), ("IFFOR", vec!["y", "x2", "x3"])]),
        ("chain", vec![("IFFOR", vec!["y", "x1", "x2"]), ("NAND2", vec!["y", "x3"])]),
        ("loose", vec![("OR2", vec!["x1", "y"]), ("OR2", vec!["y", "x2"]), ("NAND2", vec!["x3", "x3"])]),
    ];
    for (name, atoms) in suite {
        let atoms: Vec<(&str, &[&str])> = atoms.iter().map(|(r, a)| (*r, a.as_slice())).collect();
        let phi = ConjFormula::build(name, &l, &["x1", "x2", "x3"], &[("y", Quant::Exists)], &atoms).unwrap();
        let target = eval_formula(&phi, &b()).unwrap().rel;
        let formula_side = match normalize_pp_to_upp(&phi, &b()).unwrap() {
            Normalized::Upp(psi) => {
                assert!(check_upp(&psi, &target, &b()).unwrap().is_valid(), "{name}");
                true
            }
            Normalized::Fail(_) => false,
        };
        let relation_side = matches!(find_upp(&target, &l, 1, &b()).unwrap(), FindUpp::Found(_));
        assert!(!formula_side || relation_side, "{name}");
    }
}

// lattice -----------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn profile_matches_bottom_coclones(l in language(2, 3)) {
        let p = atom_profile(&l).unwrap();
        let id = identify_coclone(&l, None).unwrap();
        let names: Vec<&str> = p.true_names();
        prop_assert_eq!(id == Identification::Exact("II2".into()), names.is_empty());
        prop_assert_eq!(id == Identification::Exact("II0".into()), names == ["0"]);
        prop_assert_eq!(id == Identification::Exact("II1".into()), names == ["1"]);
    }

    #[test]
    fn identification_respects_duality(l in language(2, 3)) {
        let id = identify_coclone(&l, Some(4)).unwrap();
        let dual = identify_coclone(&dual_language(&l).unwrap(), Some(4)).unwrap();
        let flip = |n: &str| format!("I{}", dual_clone_name(n.strip_prefix('I').unwrap()));
        match (&id, &dual) {
            (Identification::Exact(a), Identification::Exact(b)) => {
                prop_assert_eq!(&flip(a), b);
                prop_assert_eq!(covered_verdict(a).unwrap(), covered_verdict(b).unwrap());
            }
            (Identification::Interval { lower: a, upper: c }, Identification::Interval { lower: b, upper: d }) => {
                prop_assert_eq!(&flip(a), b);
                prop_assert_eq!(&flip(c), d);
            }
            _ => prop_assert!(false, "{id} vs {dual}"),
        }
    }

    #[test]
    fn usat_ignores_eq_and_duplicates(l in language(2, 3)) {
        let base = usat_class(&l).unwrap();
        let mut more = l.clone();
        more.add(Relation::eq(2).named("Same")).unwrap();
        let first = l.relations()[0].clone().named("Copy");
        more.add(first).unwrap();
        prop_assert_eq!(usat_class(&more).unwrap(), base);
    }
}

// weakbase ----------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn f_closure_is_least_closed_superset(gens in prop::collection::vec(operation(2), 1..=2), r in relation(3)) {
        let c = f_closure(&gens, &r, &b()).unwrap();
        for g in &gens {
            prop_assert!(brute_preserves(g, &c));
        }
        for t in c.tuples() {
            if r.contains(t) {
                continue;
            }
            let rest: Vec<Vec<u8>> = c.tuples().iter().filter(|u| *u != t).cloned().collect();
            let rest = Relation::new(c.arity(), 2, rest).unwrap();
            prop_assert!(gens.iter().any(|g| !brute_preserves(g, &rest)));
        }
    }

    #[test]
    fn weak_base_projects_onto_invariants(gens in prop::collection::vec(operation(2), 1..=2), r in relation(2)) {
        let closed = f_closure(&gens, &r, &b()).unwrap();
        let s = closed.len();
        prop_assume!(s <= 3);
        let w = weak_base(&gens, 2, s, &b()).unwrap();
        let core = u_relation(2, s).unwrap();
        prop_assert!(core.relation().is_subset(&w));
        let coords: Vec<usize> = (0..closed.arity())
            .map(|j| core.column(&closed.tuples().iter().map(|t| t[j]).collect::<Vec<u8>>()))
            .collect();
        let projected = w.project(&coords).unwrap();
        prop_assert_eq!(projected.tuples(), closed.tuples());
    }

    #[test]
    fn upp_via_core_certificates_check(r in relation(3), consts in 0u8..4) {
        let mut gens = vec![ops::identity(2)];
        if consts & 1 == 1 { gens.push(ops::zero()); }
        if consts & 2 == 2 { gens.push(ops::one()); }
        prop_assume!(gens.iter().all(|g| brute_preserves(g, &r)));
        prop_assume!(r.len() <= 4);
        let cert = upp_via_core(&r, &gens, &b()).unwrap();
        prop_assert!(check_upp(&cert.certificate.formula, &r, &b()).unwrap().is_valid());
    }
}

#[test]
fn emitted_formula_is_a_qfpp_member() {
    for base in [lang([named::imp()]), lang([named::nand(2)]), lang([named::ne(), named::or(2)])] {
        let phi = emit_weakbase_qfpp(&base, 2, &b()).unwrap();
        let rel = eval_formula(&phi, &b()).unwrap().rel;
        let closure = qfpp_closure(&base, 4, &b()).unwrap();
        assert!(closure.iter().any(|q| q.rel.tuples() == rel.tuples()));
    }
}

// ppart -------------------------------------------------------------------

fn ie0_closed(r: &Relation) -> Relation {
    let zero = Relation::new(r.arity(), 2, vec![vec![0; r.arity()]]).unwrap();
    f_closure(&[ops::and()], &r.union(&zero).unwrap(), &b()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjunction_shapes_reproduce_coordinates(r in relation(4), i in 0usize..4) {
        let r = ie0_closed(&r);
        let i = i % r.arity();
        match ie0_determined_shape(&r, i).unwrap() {
            DeterminedShape::Conjunction(js) => {
                for t in r.tuples() {
                    prop_assert_eq!(t[i], js.iter().fold(1, |a, &j| a & t[j]));
                }
            }
            DeterminedShape::Constant0 => prop_assert!(r.tuples().iter().all(|t| t[i] == 0)),
            DeterminedShape::NotDetermined => {}
        }
    }

}

#[test]
fn certificates_survive_restriction() {
    let we0 = lang([uqclone::lattice::CloneCatalog::with_chain_bound(2).unwrap().get("E0").unwrap().weak_base.clone().unwrap()]);
    let f = ie0_witness();
    let dom = f.dom();
    let mut checked = 0;
    for tm in 1u64..256 {
        let target = rel_from_mask(3, tm, "T");
        if !certify_not_upp(&we0, &target, &f).unwrap().is_certified() {
            continue;
        }
        for mask in 1u8..1 << dom.len() {
            let keep: Vec<&Vec<u8>> = dom.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, p)| p).collect();
            let g = f.restrict(|p| keep.iter().any(|q| *q == p));
            if is_meet_closed(&g) && is_zero_closed(&g) && !brute_preserves(&g, &target) {
                assert!(certify_not_upp(&we0, &target, &g).unwrap().is_certified(), "target {tm} mask {mask}");
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn certified_targets_have_no_upp_definition() {
    let we0 = lang([uqclone::lattice::CloneCatalog::with_chain_bound(2).unwrap().get("E0").unwrap().weak_base.clone().unwrap()]);
    let mut certified = 0;
    for mask in 1u64..256 {
        let r = rel_from_mask(3, mask, "T");
        if certify_not_upp(&we0, &r, &ie0_witness()).unwrap().is_certified() {
            certified += 1;
            assert!(matches!(find_upp(&r, &we0, 0, &b()).unwrap(), FindUpp::NoneUpTo(0)), "mask {mask}");
        }
    }
    assert!(certified > 0);
    let iff_and = named::iff_and();
    assert!(matches!(find_upp(&iff_and, &we0, 1, &b()).unwrap(), FindUpp::NoneUpTo(1)));
}

// csp ---------------------------------------------------------------------

fn clause_lang() -> Language {
    lang(named::three_clauses().into_iter().chain([named::one_in_three(), named::ne()]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn counting_is_consistent(i in instance(clause_lang(), 8, 8)) {
        let n = exact(count_models(&i, None, &b()).unwrap());
        prop_assert_eq!(n as usize, brute_count(&i));
        let all = enumerate_models(&i, None, &b()).unwrap();
        prop_assert_eq!(all.len() as u128, n);
        prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(all, brute_models(&i, usize::MAX));
        let u = unique_model(&i, &b()).unwrap();
        prop_assert_eq!(matches!(u, Uniqueness::Unique(_)), n == 1);
    }

    #[test]
    fn count_ignores_renaming_and_order(i in instance(clause_lang(), 8, 8), rot in 0usize..8) {
        let n = exact(count_models(&i, None, &b()).unwrap());
        let mut j = i.clone();
        let k = rot % j.vars.len();
        j.vars.rotate_left(k);
        let nv = j.vars.len();
        for c in &mut j.constraints {
            for a in &mut c.args {
                *a = (*a + nv - k) % nv;
            }
        }
        j.constraints.reverse();
        prop_assert_eq!(exact(count_models(&j, None, &b()).unwrap()), n);
        prop_assert_eq!(exact(count_models(&i.dual().unwrap(), None, &b()).unwrap()), n);
    }

    #[test]
    fn instance_text_round_trip(i in instance(clause_lang(), 6, 6)) {
        let mut i = i;
        i.lang_path = Some("clauses.rel".into());
        let l = i.language.clone();
        let j = Instance::parse_with(&i.to_text(), &mut |_| Ok(l.clone())).unwrap();
        prop_assert_eq!(j.to_text(), i.to_text());
    }
}

// reduce ------------------------------------------------------------------

fn or_source() -> Language {
    lang([named::or(3)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rewriting_is_parsimonious(i in instance(or_source(), 8, 5)) {
        let target = lang([named::or(2), named::iff_or()]);
        let def = ConjFormula::build(
            "OR3", &target, &["a", "b", "c"], &[("y", Quant::ExistsUnique)],
            &[("OR2", &["a", "y"]), ("IFFOR", &["y", "b", "c"])],
        ).unwrap();
        let out = rewrite_upp(&i, &[def], &b()).unwrap();
        prop_assert_eq!(brute_count(&i), brute_count(&out));
    }

    #[test]
    fn steering_shape(i in instance(lang(named::three_clauses()), 4, 8)) {
        prop_assume!(i.constraints.len() <= 2 * i.vars.len());
        let plan = EthPlan::three_clauses("clauses3.rel").unwrap();
        let out = eth_reduction(&i, &plan, &b()).unwrap();
        let fresh: Vec<&String> = out.vars.iter().filter(|v| !i.vars.contains(v) && !v.contains('@')).collect();
        prop_assert_eq!(fresh.len(), 1);
        let x = out.var(fresh[0]).unwrap();
        let imp_gadgets = out.constraints.iter().filter(|c| c.rel == "c3_npp" && c.args[0] == x && c.args[1] == c.args[2]).count();
        prop_assert!(imp_gadgets >= i.vars.len());
        prop_assert_eq!(brute_models(&i, 1).is_empty(), brute_models(&out, 2).len() == 1);
    }

    #[test]
    fn usat_reduction_keeps_zero_model(i in instance(lang([named::r5()]), 7, 3)) {
        prop_assume!(!i.constraints.is_empty());
        let out = unsat_to_usat(&i).unwrap();
        let zero = vec![0u8; out.vars.len()];
        prop_assert!(brute_models(&out, 1).first() == Some(&zero));
        let unsat = brute_models(&i, 1).is_empty();
        prop_assert_eq!(unsat, brute_models(&out, 2).len() == 1);
    }
}

#[test]
fn partial_witness_domain() {
    let f: PartialOperation = ie0_witness();
    let d: BTreeSet<Vec<u8>> = f.dom().into_iter().collect();
    assert_eq!(d, [vec![0, 0], vec![0, 1], vec![1, 0]].into());
    assert_eq!(f.arity(), 2);
}
