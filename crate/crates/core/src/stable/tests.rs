use super::*;
use crate::ground::ground_base;
use crate::syntax::parse_program;

fn program(text: &str) -> GroundProgram {
    ground_base(&parse_program(text).unwrap()).unwrap()
}

fn interp(g: &GroundProgram, names: &[&str]) -> Interpretation {
    names
        .iter()
        .map(|n| g.atoms.lookup(n).unwrap_or_else(|| panic!("no atom {n}")))
        .collect()
}

fn names(g: &GroundProgram, models: &[Interpretation]) -> Vec<Vec<String>> {
    models
        .iter()
        .map(|m| {
            let mut v: Vec<String> = m.iter().map(|&a| g.atoms.name(a).to_owned()).collect();
            v.sort();
            v
        })
        .collect()
}

#[test]
fn reduct_of_negation() {
    let g = program("a :- not b.");
    let empty = reduct(&g, &Interpretation::new());
    assert_eq!(empty.to_string(), "a.\n");
    let b = g.atoms.lookup("b").unwrap();
    assert_eq!(reduct(&g, &[b].into_iter().collect()).to_string(), "");
}

#[test]
fn reduct_of_choice() {
    let g = program("{a}.");
    let a = g.atoms.lookup("a").unwrap();
    assert_eq!(reduct(&g, &[a].into_iter().collect()).to_string(), "a.\n");
    assert_eq!(reduct(&g, &Interpretation::new()).to_string(), "");
}

#[test]
fn reduct_lowers_aggregate_bounds() {
    let g = program("{b}. {c}. a :- 2{b; not c; not d}.");
    let b = g.atoms.lookup("b").unwrap();
    let r = reduct(&g, &[b].into_iter().collect());
    assert!(r.to_string().contains("a :- 0{b}."), "{r}");
}

#[test]
fn stability_checks() {
    let g = program("a :- not b. b :- not a.");
    assert!(is_stable_model(&g, &interp(&g, &["a"])));
    assert!(!is_stable_model(&g, &interp(&g, &["a", "b"])));
    let g = program(":- not a.");
    assert!(!is_stable_model(&g, &Interpretation::new()));
    let g = program("");
    assert!(is_stable_model(&g, &Interpretation::new()));
    let g = program("{c}. a :- b. b :- a. b :- c.");
    assert!(!is_stable_model(&g, &interp(&g, &["a", "b"])));
    assert!(is_stable_model(&g, &interp(&g, &["a", "b", "c"])));
}

#[test]
fn enumerates_small_programs() {
    let g = program("{a}.");
    assert_eq!(
        names(&g, &enumerate_stable_models(&g, None).unwrap()),
        vec![vec![], vec!["a".to_owned()]]
    );
    let g = program("{a(\"1.5\")}. &sum{\"1.5\"*x}<=7 :- a(\"1.5\"). &sum{x}<\"4.5\".");
    assert_eq!(
        names(&g, &enumerate_stable_models(&g, None).unwrap()),
        vec![
            vec![
                "&sum{\"1.5\"*x}<=7".to_owned(),
                "&sum{x}<\"4.5\"".to_owned(),
                "a(\"1.5\")".to_owned()
            ],
            vec!["&sum{x}<\"4.5\"".to_owned()],
        ]
    );
    let g = program(":- not a.");
    assert!(enumerate_stable_models(&g, None).unwrap().is_empty());
    let g = program("");
    assert_eq!(enumerate_stable_models(&g, None).unwrap().len(), 1);
}

#[test]
fn positive_loops_are_unfounded() {
    let g = program("{c}. a :- b. b :- a. a :- c.");
    let models = names(&g, &enumerate_stable_models(&g, None).unwrap());
    assert_eq!(
        models,
        vec![vec![], vec!["a".to_owned(), "b".to_owned(), "c".to_owned()]]
    );
}

#[test]
fn choice_bounds_and_aggregates() {
    let g = program("1{a; b; c}2.");
    let models = enumerate_stable_models(&g, None).unwrap();
    assert_eq!(models.len(), 6);
    let g = program("{a; b; c}. ok :- 2{a; b; c}. :- not ok.");
    assert_eq!(enumerate_stable_models(&g, None).unwrap().len(), 4);
    let g = program("{a; b}. ok :- not 1{a; b}1. :- not ok.");
    assert_eq!(enumerate_stable_models(&g, None).unwrap().len(), 2);
    let g = program("{a; b}. ok :- 1{not a; b}1.");
    for m in enumerate_stable_models(&g, None).unwrap() {
        assert!(is_stable_model(&g, &m));
    }
}

#[test]
fn limit_and_exhaustive_agree() {
    let g = program("{a; b; c}. d :- a, not b. :- c, d.");
    let all = enumerate_stable_models(&g, None).unwrap();
    assert_eq!(all, enumerate_exhaustive(&g).unwrap());
    assert_eq!(enumerate_stable_models(&g, Some(2)).unwrap().len(), 2);
}

#[test]
fn exhaustive_path_is_capped() {
    let text: String = (0..21).map(|i| format!("{{a{i}}}. ")).collect();
    let g = program(&text);
    assert!(matches!(enumerate_exhaustive(&g), Err(SolveError::Cap(_))));
}
