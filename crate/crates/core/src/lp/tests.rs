use super::*;
use crate::rational::{int, ratio};

fn lc(terms: &[(Rational, &str)], relation: Relation, rhs: Rational) -> LinearConstraint {
    LinearConstraint::new(
        terms
            .iter()
            .map(|(c, v)| (c.clone(), (*v).to_owned()))
            .collect(),
        relation,
        rhs,
    )
}

fn x_rel(relation: Relation, rhs: Rational) -> LinearConstraint {
    lc(&[(int(1), "x")], relation, rhs)
}

#[test]
fn strict_bounds_are_tightened_by_epsilon() {
    let c = x_rel(Relation::Lt, ratio(9, 2));
    let normal = normalize(&c, &default_epsilon());
    assert_eq!(normal, vec![vec![x_rel(Relation::Le, ratio(4499, 1000))]]);
    let ne = normalize(&x_rel(Relation::Ne, int(1)), &default_epsilon());
    assert_eq!(ne.len(), 2);
}

#[test]
fn merging_and_display() {
    let c = lc(
        &[(int(2), "x"), (int(-1), "y"), (int(-2), "x")],
        Relation::Le,
        int(3),
    );
    assert_eq!(c.terms, vec![(int(-1), "y".to_owned())]);
    assert_eq!(c.to_string(), "-y <= 3");
    let d = lc(
        &[(ratio(3, 2), "x"), (int(-1), "y")],
        Relation::Gt,
        ratio(1, 3),
    );
    assert_eq!(d.to_string(), "3/2*x - y > 1/3");
}

#[test]
fn simple_satisfiable_system() {
    let p = LpProblem::new(vec![lc(&[(ratio(3, 2), "x")], Relation::Le, int(7))]);
    match p.check_sat().unwrap() {
        SatResult::Sat(w) => assert!(p.constraints[0].holds(&w)),
        SatResult::Unsat => panic!("expected sat"),
    }
}

#[test]
fn contradictory_bounds_are_unsat() {
    let p = LpProblem::new(vec![
        x_rel(Relation::Le, int(1)),
        x_rel(Relation::Ge, int(2)),
    ]);
    assert_eq!(p.check_sat().unwrap(), SatResult::Unsat);
}

#[test]
fn equalities_and_witnesses() {
    let p = LpProblem::new(vec![
        lc(&[(int(1), "x"), (int(1), "y")], Relation::Eq, int(3)),
        lc(&[(int(1), "x"), (int(-1), "y")], Relation::Eq, int(1)),
    ]);
    match p.check_sat().unwrap() {
        SatResult::Sat(w) => {
            assert_eq!(w["x"], int(2));
            assert_eq!(w["y"], int(1));
        }
        SatResult::Unsat => panic!("expected sat"),
    }
}

#[test]
fn maximize_to_a_bound() {
    let mut p = LpProblem::new(vec![x_rel(Relation::Le, ratio(7, 2))]);
    p.objective = Some(Objective {
        direction: Direction::Maximize,
        terms: vec![(int(1), "x".to_owned())],
    });
    match p.optimize().unwrap() {
        OptResult::Optimal { value, witness } => {
            assert_eq!(value, ratio(7, 2));
            assert_eq!(witness["x"], ratio(7, 2));
        }
        other => panic!("{other:?}"),
    }
    p.constraints.clear();
    assert_eq!(p.optimize().unwrap(), OptResult::Unbounded);
    p.constraints = vec![x_rel(Relation::Le, int(1)), x_rel(Relation::Ge, int(2))];
    assert_eq!(p.optimize().unwrap(), OptResult::Infeasible);
}

#[test]
fn minimize_sum() {
    let mut p = LpProblem::new(vec![
        x_rel(Relation::Ge, int(1)),
        lc(&[(int(1), "y")], Relation::Ge, int(2)),
        lc(&[(int(1), "x"), (int(1), "y")], Relation::Ge, int(4)),
    ]);
    p.objective = Some(Objective {
        direction: Direction::Minimize,
        terms: vec![(int(1), "x".to_owned()), (int(1), "y".to_owned())],
    });
    match p.optimize().unwrap() {
        OptResult::Optimal { value, .. } => assert_eq!(value, int(4)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn integer_variables_branch() {
    // 2x = 1 has a rational solution but no integer one.
    let mut p = LpProblem::new(vec![lc(&[(int(2), "x")], Relation::Eq, int(1))]);
    assert!(p.check_sat().unwrap().is_sat());
    p.integers.insert("x".to_owned());
    assert_eq!(p.check_sat().unwrap(), SatResult::Unsat);
    // 2x + 2y = 2 with 0 <= x <= 1/2 forces x = 0, y = 1 over the integers.
    let mut q = LpProblem::new(vec![
        lc(&[(int(2), "x"), (int(2), "y")], Relation::Eq, int(2)),
        x_rel(Relation::Le, ratio(1, 2)),
        x_rel(Relation::Ge, int(0)),
    ]);
    q.integers.extend(["x".to_owned(), "y".to_owned()]);
    match q.check_sat().unwrap() {
        SatResult::Sat(w) => assert_eq!((w["x"].clone(), w["y"].clone()), (int(0), int(1))),
        SatResult::Unsat => panic!("expected sat"),
    }
}

#[test]
fn integer_optimum() {
    let mut p = LpProblem::new(vec![lc(
        &[(int(2), "x"), (int(2), "y")],
        Relation::Le,
        int(7),
    )]);
    p.integers.extend(["x".to_owned(), "y".to_owned()]);
    p.bounds.insert("x".to_owned(), (Some(int(0)), None));
    p.bounds.insert("y".to_owned(), (Some(int(0)), None));
    p.objective = Some(Objective {
        direction: Direction::Maximize,
        terms: vec![(int(1), "x".to_owned()), (int(1), "y".to_owned())],
    });
    match p.optimize().unwrap() {
        OptResult::Optimal { value, .. } => assert_eq!(value, int(3)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn disequalities_split() {
    let base = LpProblem::new(vec![
        x_rel(Relation::Ge, int(0)),
        x_rel(Relation::Le, int(0)),
    ]);
    let splits = vec![x_rel(Relation::Ne, int(0))];
    assert_eq!(check_with_splits(&base, &splits).unwrap(), SatResult::Unsat);
    let base = LpProblem::new(vec![
        x_rel(Relation::Ge, int(0)),
        x_rel(Relation::Le, int(1)),
    ]);
    match check_with_splits(&base, &splits).unwrap() {
        SatResult::Sat(w) => assert_ne!(w["x"], int(0)),
        SatResult::Unsat => panic!("expected sat"),
    }
    let many: Vec<_> = (0..17).map(|i| x_rel(Relation::Ne, int(i))).collect();
    assert_eq!(check_with_splits(&base, &many), Err(LpError::SplitCap));
    assert!(matches!(
        LpProblem::new(splits).check_sat(),
        Err(LpError::Unsplit(_))
    ));
}

#[test]
fn irreducible_subset() {
    let cs = vec![
        x_rel(Relation::Le, int(1)),
        x_rel(Relation::Ge, int(2)),
        lc(&[(int(1), "y")], Relation::Le, int(0)),
    ];
    let core = iis(&cs, &LpProblem::default()).unwrap();
    assert_eq!(core, cs[..2].to_vec());
    assert_eq!(
        iis(&cs[2..], &LpProblem::default()),
        Err(LpError::Satisfiable)
    );
}

#[test]
fn irreducible_subset_over_groups() {
    let groups = vec![
        vec![x_rel(Relation::Ge, int(5))],
        vec![lc(&[(int(1), "y")], Relation::Ge, int(0))],
        vec![
            lc(&[(int(1), "x"), (int(1), "y")], Relation::Le, int(3)),
            x_rel(Relation::Ne, int(9)),
        ],
    ];
    let core = iis_groups(&LpProblem::default(), &groups).unwrap();
    assert_eq!(core, vec![0, 1, 2]);
}

#[test]
fn integer_constraints_are_tightened_exactly() {
    // x - y strictly between 2 and 3 has real but no integer solutions.
    let mut p = LpProblem::new(vec![
        lc(&[(int(1), "x"), (int(-1), "y")], Relation::Gt, int(2)),
        lc(&[(int(1), "x"), (int(-1), "y")], Relation::Lt, int(3)),
    ]);
    assert!(p.check_sat().unwrap().is_sat());
    p.integers.extend(["x".to_owned(), "y".to_owned()]);
    assert_eq!(p.check_sat().unwrap(), SatResult::Unsat);
    // 3/2 x <= 7 over the integers means x <= 4.
    let mut q = LpProblem::new(vec![lc(&[(ratio(3, 2), "x")], Relation::Le, int(7))]);
    q.integers.insert("x".to_owned());
    q.objective = Some(Objective {
        direction: Direction::Maximize,
        terms: vec![(int(1), "x".to_owned())],
    });
    assert!(matches!(q.optimize().unwrap(), OptResult::Optimal { value, .. } if value == int(4)));
}
