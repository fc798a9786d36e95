use std::collections::BTreeSet;

use super::*;
use crate::ground::ground_base;
use crate::rational::ratio;
use crate::syntax::parse_program;

const P1: &str = r#"{a("1.5")}. &sum{"1.5"*x}<=7 :- a("1.5"). &sum{x}<"4.5"."#;
const P2: &str = r#":- not &sum{x}<"4.5". a("1.5") :- &sum{"1.5"*x}<=7."#;

fn program(text: &str) -> GroundProgram {
    ground_base(&parse_program(text).unwrap()).unwrap()
}

fn model_names(g: &GroundProgram, models: &[LcModel]) -> Vec<Vec<String>> {
    models.iter().map(|m| m.names(g)).collect()
}

fn run(text: &str, preset: Preset, mode: Mode) -> Vec<Vec<String>> {
    let g = program(text);
    let solution = solve(&g, &SolveOptions::with_preset(preset).mode(mode)).unwrap();
    model_names(&g, &solution.models)
}

fn set(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn x1() -> Vec<String> {
    set(&[r#"&sum{x}<"4.5""#])
}

fn x2() -> Vec<String> {
    set(&[r#"&sum{"1.5"*x}<=7"#, r#"&sum{x}<"4.5""#, r#"a("1.5")"#])
}

fn ids(g: &GroundProgram, names: &[&str]) -> BTreeSet<AtomId> {
    names.iter().map(|n| g.atoms.lookup(n).unwrap()).collect()
}

#[test]
fn signature_classifies_atoms() {
    let g = program(P2);
    let setting = signature(&g, &StrictPolicy::AllStrict).unwrap();
    assert_eq!(setting.len(), 2);
    assert!(setting.defined().is_empty());
    assert_eq!(setting.strict().len(), 2);
    assert_eq!(setting.preset(), Some(Preset::ExternalStrict));
    let g = program("&sum{x}<=1 :- p. {p}.");
    let setting = signature(&g, &StrictPolicy::AllNonStrict).unwrap();
    assert_eq!(setting.preset(), Some(Preset::DefinedNonStrict));
    let recommended = signature(&program(P1), &StrictPolicy::Recommended).unwrap();
    assert!(recommended.strict().is_empty());
    let missing = signature(&g, &StrictPolicy::PerAtom(Default::default()));
    assert!(matches!(missing, Err(LcError::Setting(_))));
}

#[test]
fn per_atom_policy_file() {
    let policy =
        StrictPolicy::parse_file("strict &sum{ x } <= 1 % comment\nnonstrict &diff{x-y}<2\n")
            .unwrap();
    let StrictPolicy::PerAtom(map) = &policy else {
        panic!()
    };
    assert_eq!(map.get("&sum{x}<=1"), Some(&true));
    assert_eq!(map.get("&diff{x-y}<2"), Some(&false));
    assert!(StrictPolicy::parse_file("sometimes &sum{x}<=1").is_err());
}

#[test]
fn lc_solutions_of_an_atom_and_its_inverse() {
    let g = program(":- &sum{x}<=1. :- &sum{x}>1.");
    let prepared = Prepared::new(&g, &SolveOptions::with_preset(Preset::ExternalStrict)).unwrap();
    let check = |names: &[&str]| {
        is_lc_solution(
            &ids(&g, names),
            &prepared.setting,
            &prepared.table,
            &prepared.checker,
        )
        .unwrap()
        .is_some()
    };
    assert!(check(&["&sum{x}<=1"]));
    assert!(check(&["&sum{x}>1"]));
    assert!(!check(&[]));
    assert!(!check(&["&sum{x}<=1", "&sum{x}>1"]));
    // Non-strict: the empty set is always a solution.
    let relaxed = Prepared::new(&g, &SolveOptions::with_preset(Preset::ExternalNonStrict)).unwrap();
    assert!(is_lc_solution(
        &BTreeSet::new(),
        &relaxed.setting,
        &relaxed.table,
        &relaxed.checker
    )
    .unwrap()
    .is_some());
}

#[test]
fn defined_strict_excludes_the_smaller_candidate() {
    let g = program(P1);
    let prepared = Prepared::new(&g, &SolveOptions::with_preset(Preset::DefinedStrict)).unwrap();
    let s = ids(&g, &[r#"&sum{x}<"4.5""#]);
    assert!(
        is_lc_solution(&s, &prepared.setting, &prepared.table, &prepared.checker)
            .unwrap()
            .is_none()
    );
}

#[test]
fn extended_programs() {
    let g = program(":- &sum{x}<=1. :- &sum{x}>1.");
    let setting = signature(&g, &StrictPolicy::AllStrict).unwrap();
    let s = ids(&g, &["&sum{x}<=1"]);
    let extended = extend_program(&g, &s, &setting);
    assert_eq!(
        extended.to_string(),
        ":- &sum{x}<=1.\n:- &sum{x}>1.\n&sum{x}<=1.\n"
    );
    let relaxed = setting.with_strictness(false);
    assert_eq!(
        extend_program(&g, &BTreeSet::new(), &relaxed).to_string(),
        g.to_string()
    );
    let g = program(P1);
    let setting = signature(&g, &StrictPolicy::AllStrict).unwrap();
    let all: BTreeSet<AtomId> = setting.lc_atoms().collect();
    let text = extend_program(&g, &all, &setting).to_string();
    assert!(
        text.ends_with(":- not &sum{\"1.5\"*x}<=7.\n:- not &sum{x}<\"4.5\".\n"),
        "{text}"
    );
}

#[test]
fn p1_in_both_defined_settings() {
    for mode in [Mode::Reference, Mode::Lazy] {
        assert_eq!(run(P1, Preset::DefinedStrict, mode), vec![x2()], "{mode:?}");
        assert_eq!(
            run(P1, Preset::DefinedNonStrict, mode),
            vec![x2(), x1()],
            "{mode:?}"
        );
    }
}

#[test]
fn p2_in_both_external_settings() {
    for mode in [Mode::Reference, Mode::Lazy] {
        assert_eq!(
            run(P2, Preset::ExternalStrict, mode),
            vec![x2()],
            "{mode:?}"
        );
        assert_eq!(
            run(P2, Preset::ExternalNonStrict, mode),
            vec![x2(), x1()],
            "{mode:?}"
        );
    }
}

#[test]
fn presets_are_validated() {
    let g = program(P2);
    let err = solve(&g, &SolveOptions::with_preset(Preset::DefinedStrict)).unwrap_err();
    assert!(matches!(err, LcError::Setting(_)), "{err}");
}

#[test]
fn witnesses_satisfy_their_atoms() {
    let g = program(r#"a("1.5"). &sum{"1.5"*x}<=7 :- a("1.5")."#);
    let solution = solve(&g, &SolveOptions::with_preset(Preset::DefinedNonStrict)).unwrap();
    assert_eq!(solution.models.len(), 1);
    let w = &solution.models[0].witness;
    assert!(ratio(3, 2) * &w["x"] <= ratio(7, 1));
}

#[test]
fn empty_program_has_the_empty_model() {
    for mode in [Mode::Reference, Mode::Lazy] {
        let g = program("");
        let solution = solve(&g, &SolveOptions::default().mode(mode)).unwrap();
        assert_eq!(solution.models.len(), 1);
        assert!(solution.models[0].atoms.is_empty());
    }
}

#[test]
fn counterexamples_reproduce() {
    for case in props::fixed_counterexamples().unwrap() {
        assert!(case.passed(), "{case:?}");
    }
}

#[test]
fn no_lc_atoms_means_regular_semantics() {
    let g = program("{a; b}. c :- a, not b.");
    let sm = crate::stable::enumerate_stable_models(&g, None).unwrap();
    let solution = solve(&g, &SolveOptions::default()).unwrap();
    let lc: BTreeSet<_> = solution.models.into_iter().map(|m| m.atoms).collect();
    assert_eq!(lc, sm.into_iter().collect());
}

#[test]
fn backend_selection() {
    let g = program("&diff{x-y}<=3. &sum{x}>=1. &sum{y;-1*x}<2.");
    let prepared = Prepared::new(&g, &SolveOptions::default()).unwrap();
    assert_eq!(
        prepared.backend(),
        &Backend::Dl {
            domain: crate::dl::Domain::Integer
        }
    );
    let g = program("&sum{2*x}<=3.");
    let prepared = Prepared::new(&g, &SolveOptions::default()).unwrap();
    assert_eq!(prepared.backend(), &Backend::Lp);
    let err = Prepared::new(&g, &SolveOptions::default().theory(TheoryChoice::Dl)).unwrap_err();
    assert!(matches!(err, LcError::Theory(_)));
    // Mixed real and integer variables cannot use difference logic.
    let g = program("#real x. &diff{x-y}<=3.");
    assert!(Prepared::new(&g, &SolveOptions::default()).is_err());
    // Strict atoms over reals need epsilon mode.
    let g = program("#real x, y. :- not &diff{x-y}<=3.");
    assert!(Prepared::new(&g, &SolveOptions::default()).is_err());
    let options = SolveOptions {
        allow_epsilon: true,
        ..SolveOptions::default()
    };
    assert!(Prepared::new(&g, &options).is_ok());
}

#[test]
fn dl_and_lp_agree_on_difference_programs() {
    let text = "{p; q}. &diff{x-y}<=2 :- p. &diff{y-x}<= -3 :- q. :- not &sum{x}>=0.";
    let g = program(text);
    let mut results = Vec::new();
    for theory in [TheoryChoice::Dl, TheoryChoice::Lp] {
        for mode in [Mode::Reference, Mode::Lazy] {
            let options = SolveOptions::with_preset(Preset::DefinedStrict)
                .mode(mode)
                .theory(theory);
            let options = SolveOptions {
                preset: None,
                ..options
            };
            let solution = solve(&g, &options).unwrap();
            results.push(model_names(&g, &solution.models));
        }
    }
    assert!(results.windows(2).all(|w| w[0] == w[1]), "{results:?}");
    assert!(!results[0].is_empty());
}

#[test]
fn conditional_elements_in_lazy_mode() {
    let g = program("{a}. :- not &sum{x; 2*y : a; 3}<=4. &sum{y}>=1. &sum{x}>=0.");
    let lazy = solve(&g, &SolveOptions::default()).unwrap();
    // With a, x + 2y + 3 <= 4 and y >= 1 force x <= -1, contradicting x >= 0.
    assert_eq!(lazy.models.len(), 1);
    assert!(!lazy.models[0].names(&g).contains(&"a".to_owned()));
    let err = solve(&g, &SolveOptions::default().mode(Mode::Reference)).unwrap_err();
    assert!(matches!(err, LcError::Conditional(_)), "{err}");
}

#[test]
fn domains_and_objectives() {
    let g = program("&dom{1..5}=x. &dom{0..3}=y. &sum{x;y}<=6. &maximize{x; 2*y}.");
    let solution = solve(&g, &SolveOptions::default()).unwrap();
    assert_eq!(solution.models.len(), 1);
    assert_eq!(
        solution.models[0].objective,
        Some(ObjectiveValue::Optimal(ratio(9, 1)))
    );
    assert_eq!(solution.best, Some(ObjectiveValue::Optimal(ratio(9, 1))));
    let reference = solve(&g, &SolveOptions::default().mode(Mode::Reference)).unwrap();
    assert_eq!(reference.models[0].objective, solution.models[0].objective);
    let g = program("&minimize{x}. &sum{x}<=6.");
    let solution = solve(&g, &SolveOptions::default()).unwrap();
    assert_eq!(
        solution.models[0].objective,
        Some(ObjectiveValue::Unbounded)
    );
}

#[test]
fn dom_bounds_apply_in_difference_logic() {
    let g = program("{d}. &dom{2..4}=x :- d. :- not &diff{x-0}<=1.");
    let lazy = solve(&g, &SolveOptions::default()).unwrap();
    let reference = solve(&g, &SolveOptions::default().mode(Mode::Reference)).unwrap();
    assert_eq!(
        model_names(&g, &lazy.models),
        model_names(&g, &reference.models)
    );
    assert!(lazy
        .models
        .iter()
        .all(|m| !m.names(&g).contains(&"d".to_owned())));
}

#[test]
fn reference_cap() {
    let text: String = (0..13)
        .map(|i| format!("{{a{i}}}. &sum{{x}}<={i} :- a{i}. "))
        .collect();
    let g = program(&text);
    let err = solve(&g, &SolveOptions::default().mode(Mode::Reference)).unwrap_err();
    assert!(err.is_resource_limit());
}

#[test]
fn small_random_batch_has_no_violations() {
    let report = props::check_propositions(&props::PropOptions {
        count: 40,
        seed: 7,
        compare_modes: true,
        ..Default::default()
    });
    let text: String = report.violations.iter().map(|v| v.to_string()).collect();
    assert!(report.ok(), "{text}");
    assert_eq!(report.programs, 160);
}
