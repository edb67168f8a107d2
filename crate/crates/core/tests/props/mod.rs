//! Randomized checks shared by the property and acceptance suites.

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use modalpd::formula::eval_letterless;
use modalpd::{
    build_equation_system, builtin_library, height_semantics_crosscheck, normal_form, parse_formula, solve,
    verify_fixed_point, AgentTable, Formula, Frame, MatchVar, RawAtom, TemplateAtom,
};

pub const CASES: u32 = 1000;

fn ident() -> impl Strategy<Value = String> {
    "[A-Z][a-zA-Z0-9_]{0,5}".prop_filter("reserved", |s| s != "Self")
}

fn raw_atom() -> impl Strategy<Value = RawAtom> {
    (ident(), ident()).prop_map(|(caller, callee)| RawAtom { caller, callee })
}

fn formula<A: Clone + std::fmt::Debug + 'static>(
    leaf: BoxedStrategy<Formula<A>>,
) -> BoxedStrategy<Formula<A>> {
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::boxed),
            (0u32..3, inner.clone()).prop_map(|(n, f)| Formula::provable(n, f)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::implies(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Formula::iff(l, r)),
        ]
    })
    .boxed()
}

fn raw_formula() -> BoxedStrategy<Formula<RawAtom>> {
    formula(
        prop_oneof![
            Just(Formula::Top),
            Just(Formula::Bottom),
            raw_atom().prop_map(Formula::Atom)
        ]
        .boxed(),
    )
}

fn letterless(max_depth: u32) -> BoxedStrategy<Formula<()>> {
    formula(prop_oneof![Just(Formula::Top), Just(Formula::Bottom)].boxed())
        .prop_filter("modal depth", move |f| f.modal_depth() <= max_depth)
        .boxed()
}

/// Fully modalized templates: atoms only ever appear under a box.
fn template(subs: Vec<String>) -> BoxedStrategy<Formula<TemplateAtom>> {
    let mut atoms: Vec<TemplateAtom> = vec![TemplateAtom::OppVsSelf, TemplateAtom::SelfVsOpp];
    for s in subs {
        atoms.push(TemplateAtom::OppVs(s.clone()));
        atoms.push(TemplateAtom::VsOpp(s));
    }
    let atom = proptest::sample::select(atoms).prop_map(Formula::Atom);
    let open = formula(prop_oneof![Just(Formula::Top), Just(Formula::Bottom), atom].boxed());
    let guarded = prop_oneof![
        1 => Just(Formula::Top),
        1 => Just(Formula::Bottom),
        4 => open.clone().prop_map(Formula::boxed),
        1 => (0u32..3, open).prop_map(|(n, f)| Formula::provable(n, f)),
    ]
    .boxed();
    guarded
        .prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
                (inner.clone(), inner).prop_map(|(l, r)| Formula::iff(l, r)),
            ]
        })
        .boxed()
}

const SUBS: [&str; 5] = [
    "CooperateBot",
    "DefectBot",
    "FairBot",
    "PrudentBot",
    "WaitFairBot<1>",
];

/// Two random agents, the second allowed to reference the first.
fn random_table() -> impl Strategy<Value = AgentTable> {
    let base: Vec<String> = SUBS.iter().map(|s| s.to_string()).collect();
    let mut with_r1 = base.clone();
    with_r1.push("R1".into());
    (template(base), template(with_r1)).prop_map(|(r1, r2)| {
        let text = format!("agent R1(Opp) := {r1}\nagent R2(Opp) := {r2}\n");
        AgentTable::load(Some(&builtin_library()), &text).unwrap_or_else(|e| panic!("{e}\n{text}"))
    })
}

const PLAYERS: [&str; 6] = ["R1", "R2", "FairBot", "PrudentBot", "DefectBot", "WaitFairBot<0>"];

/// Random irreflexive transitive frame: a random strict suborder of `0..n`
/// closed under composition.
fn frame() -> impl Strategy<Value = Frame> {
    (1usize..=8)
        .prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
            let len = pairs.len();
            (
                Just(n),
                Just(pairs),
                proptest::collection::vec(any::<bool>(), len),
            )
        })
        .prop_map(|(n, pairs, keep)| {
            let mut sees = vec![vec![false; n]; n];
            for ((i, j), k) in pairs.into_iter().zip(keep) {
                sees[i][j] = k;
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        if sees[i][k] && sees[k][j] {
                            sees[i][j] = true;
                        }
                    }
                }
            }
            let edges: Vec<_> = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| sees[i][j])
                .collect();
            Frame::new(n, &edges).unwrap()
        })
}

fn collect_boxes<A: Clone + Ord>(f: &Formula<A>, out: &mut Vec<Formula<A>>) {
    match f {
        Formula::Top | Formula::Bottom | Formula::Atom(_) => {}
        Formula::Not(c) | Formula::Provable(_, c) => collect_boxes(c, out),
        Formula::Box(c) => {
            collect_boxes(c, out);
            out.push(f.clone());
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
            collect_boxes(l, out);
            collect_boxes(r, out);
        }
    }
}

fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new(config);
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

pub fn parse_render_round_trip() -> Result<(), String> {
    run(raw_formula(), |f| {
        let text = f.to_string();
        prop_assert_eq!(parse_formula(&text).unwrap(), f, "{}", text);
        Ok(())
    })
}

pub fn structural_invariants() -> Result<(), String> {
    run((raw_formula(), raw_formula()), |(f, g)| {
        prop_assert_eq!(Formula::boxed(f.clone()).modal_depth(), f.modal_depth() + 1);
        let both = f.modal_depth().max(g.modal_depth());
        prop_assert_eq!(Formula::and(f.clone(), g.clone()).modal_depth(), both);
        prop_assert_eq!(Formula::iff(f.clone(), g.clone()).modal_depth(), both);
        prop_assert!(Formula::boxed(f.clone()).is_fully_modalized());
        prop_assert_eq!(f.is_fully_modalized(), f.unguarded_atoms().is_empty());
        if let Some(a) = g.atoms().first() {
            let bare = Formula::and(f.clone(), Formula::Atom((*a).clone()));
            prop_assert!(!bare.is_fully_modalized());
        }

        let mut all = Vec::new();
        collect_boxes(&f, &mut all);
        let distinct: BTreeSet<_> = all.into_iter().collect();
        let listed = f.box_subformulas();
        prop_assert_eq!(listed.len(), distinct.len());
        prop_assert_eq!(listed.into_iter().collect::<BTreeSet<_>>(), distinct);
        Ok(())
    })
}

pub fn height_semantics() -> Result<(), String> {
    run((letterless(4), frame()), |(f, frame)| {
        prop_assert!(height_semantics_crosscheck(&f, &frame).unwrap());
        for w in 0..frame.len() {
            prop_assert_eq!(frame.holds(&f, w), eval_letterless(&f, frame.height(w)));
        }
        Ok(())
    })
}

pub fn solver_on_random_systems() -> Result<(), String> {
    let players = || proptest::sample::select(PLAYERS.to_vec());
    run((random_table(), players(), players()), |(table, x, y)| {
        let system = build_equation_system(x, y, &table).unwrap();
        let trace = solve(&system).unwrap();
        let boxes = system.box_subformulas().len();

        for row in trace.box_rows() {
            prop_assert!(row.windows(2).all(|w| w[0] >= w[1]), "box row rises: {:?}", row);
        }
        prop_assert!(
            trace.stabilization() <= boxes + 1,
            "d = {} with {} boxes",
            trace.stabilization(),
            boxes
        );
        prop_assert!(verify_fixed_point(&system, &trace));

        // Fully modalized equations determine world n from worlds below it,
        // so the solution can be rebuilt one world at a time.
        let vars: Vec<MatchVar> = system.equations.keys().cloned().collect();
        let horizon = trace.worlds() + 4;
        let mut naive: Vec<Vec<bool>> = vec![Vec::new(); vars.len()];
        for n in 0..horizon {
            let lookup = |a: &MatchVar, m: usize| {
                assert!(m < n);
                naive[vars.iter().position(|v| v == a).unwrap()][m]
            };
            let now: Vec<bool> = vars
                .iter()
                .map(|v| modalpd::formula::eval_on_chain(&system.equations[v], n, &lookup))
                .collect();
            for (row, v) in naive.iter_mut().zip(now) {
                row.push(v);
            }
        }
        for (v, row) in vars.iter().zip(&naive) {
            for (n, &expected) in row.iter().enumerate() {
                prop_assert_eq!(trace.value(v, n), Some(expected), "{} at world {}", v, n);
            }
            let nf = normal_form(&trace, v).unwrap();
            prop_assert!(!nf.has_atoms());
            for (n, &expected) in row.iter().enumerate() {
                prop_assert_eq!(
                    eval_letterless(&nf, n),
                    expected,
                    "normal form {} of {} at {}",
                    nf,
                    v,
                    n
                );
            }
        }

        let mirror = build_equation_system(y, x, &table).unwrap();
        prop_assert_eq!(&mirror.equations, &system.equations);
        prop_assert_eq!(solve(&mirror).unwrap(), trace);
        Ok(())
    })
}
