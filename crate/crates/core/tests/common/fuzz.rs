//! Randomized differential checks of the theory backends.

use std::collections::BTreeMap;

use lcasp::dl::{default_epsilon, Check, DiffConstraint, DlStore, Domain};
use lcasp::lp::{check_with_splits, iis, LinearConstraint, LpProblem, SatResult};
use lcasp::rational::{int, ratio, Rational};
use lcasp::syntax::Relation;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bellman_ford, fourier_motzkin_epsilon, fourier_motzkin_with_splits};

pub const SEQUENCES: u64 = 10_000;
const DL_VARIABLES: [&str; 5] = ["0", "a", "b", "c", "d"];

fn random_constraint(rng: &mut ChaCha8Rng, domain: Domain) -> DiffConstraint {
    let x = DL_VARIABLES[rng.gen_range(0..DL_VARIABLES.len())];
    let mut y = DL_VARIABLES[rng.gen_range(0..DL_VARIABLES.len())];
    while y == x {
        y = DL_VARIABLES[rng.gen_range(0..DL_VARIABLES.len())];
    }
    let denominator = if domain == Domain::Real {
        rng.gen_range(1..=2)
    } else {
        1
    };
    let k: Rational = ratio(rng.gen_range(-6..=6), denominator);
    if rng.gen_bool(0.3) {
        DiffConstraint::lt(x, y, k)
    } else {
        DiffConstraint::le(x, y, k)
    }
}

/// The constraints form one simple directed cycle.
fn is_simple_cycle(cycle: &[DiffConstraint]) -> bool {
    let mut out: BTreeMap<&str, usize> = BTreeMap::new();
    let mut inc: BTreeMap<&str, usize> = BTreeMap::new();
    for c in cycle {
        *out.entry(&c.y).or_default() += 1;
        *inc.entry(&c.x).or_default() += 1;
    }
    if out.len() != cycle.len() || out.values().any(|&n| n != 1) || out.keys().ne(inc.keys()) {
        return false;
    }
    if inc.values().any(|&n| n != 1) {
        return false;
    }
    // Following successors from any node visits every edge.
    let next: BTreeMap<&str, &str> = cycle.iter().map(|c| (c.y.as_str(), c.x.as_str())).collect();
    let start = cycle[0].y.as_str();
    let mut node = next[start];
    let mut steps = 1;
    while node != start {
        node = next[node];
        steps += 1;
    }
    steps == cycle.len()
}

pub fn run_sequence(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = if seed.is_multiple_of(2) {
        Domain::Integer
    } else {
        Domain::Real
    };
    let epsilon = default_epsilon();
    let mut store = DlStore::new(domain, epsilon.clone(), true);
    let mut active: Vec<(usize, DiffConstraint)> = Vec::new();
    let mut level = 0;
    for step in 0..rng.gen_range(5..40) {
        let roll: f64 = rng.gen();
        if roll < 0.15 && level > 0 {
            level = rng.gen_range(0..level);
            store.backtrack(level);
            active.retain(|(l, _)| *l <= level);
            continue;
        }
        if roll < 0.4 {
            level += 1;
        }
        let c = random_constraint(&mut rng, domain);
        let mut with: Vec<DiffConstraint> = active.iter().map(|(_, c)| c.clone()).collect();
        with.push(c.clone());
        let expected = bellman_ford(&with, domain, &epsilon);
        let tag = active.len();
        match store
            .assert(c.clone(), level, tag)
            .map_err(|e| e.to_string())?
        {
            Check::Sat => {
                if !expected {
                    return Err(format!("seed {seed} step {step}: store SAT, oracle UNSAT"));
                }
                active.push((level, c));
            }
            Check::Unsat(conflict) => {
                if expected {
                    return Err(format!("seed {seed} step {step}: store UNSAT, oracle SAT"));
                }
                let cycle: Vec<DiffConstraint> =
                    conflict.iter().map(|c| c.constraint.clone()).collect();
                for (i, member) in conflict.iter().enumerate() {
                    let owner = if member.tag == tag {
                        &c
                    } else {
                        &active[member.tag].1
                    };
                    if *owner != member.constraint {
                        return Err(format!("seed {seed}: tag {} mislabelled", member.tag));
                    }
                    let mut without = cycle.clone();
                    without.remove(i);
                    if !bellman_ford(&without, domain, &epsilon) {
                        return Err(format!("seed {seed} step {step}: conflict not minimal"));
                    }
                }
                if bellman_ford(&cycle, domain, &epsilon) || !is_simple_cycle(&cycle) {
                    return Err(format!(
                        "seed {seed} step {step}: conflict is not a negative cycle"
                    ));
                }
            }
        }
        let witness = store.witness().map_err(|e| e.to_string())?;
        for (_, c) in &active {
            if !c.holds(&witness) {
                return Err(format!("seed {seed} step {step}: witness violates {c}"));
            }
            if domain == Domain::Integer && witness.values().any(|v| !v.is_integer()) {
                return Err(format!("seed {seed}: non-integral witness"));
            }
        }
    }
    Ok(())
}

pub const SYSTEMS: u64 = 1_000;
const LP_VARIABLES: [&str; 4] = ["w", "x", "y", "z"];
const RELATIONS: [Relation; 6] = [
    Relation::Le,
    Relation::Lt,
    Relation::Ge,
    Relation::Gt,
    Relation::Eq,
    Relation::Ne,
];

pub fn random_system(rng: &mut ChaCha8Rng, with_ne: bool) -> Vec<LinearConstraint> {
    let variables = &LP_VARIABLES[..rng.gen_range(1..=LP_VARIABLES.len())];
    (0..rng.gen_range(1..=6))
        .map(|_| {
            let mut terms = Vec::new();
            for v in variables {
                if rng.gen_bool(0.6) {
                    terms.push((int(rng.gen_range(-3..=3)), (*v).to_owned()));
                }
            }
            let relations = if with_ne {
                &RELATIONS[..]
            } else {
                &RELATIONS[..5]
            };
            let relation = *relations.choose(rng).unwrap();
            LinearConstraint::new(terms, relation, int(rng.gen_range(-6..=6)))
        })
        .collect()
}

fn split(system: &[LinearConstraint]) -> (LpProblem, Vec<LinearConstraint>) {
    let (ne, rest): (Vec<_>, Vec<_>) = system
        .iter()
        .cloned()
        .partition(|c| c.relation == Relation::Ne);
    (LpProblem::new(rest), ne)
}

/// Returns the verdict.
pub fn check_system(seed: u64) -> Result<bool, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let system = random_system(&mut rng, seed.is_multiple_of(3));
    let epsilon = default_epsilon();
    let expected = fourier_motzkin_epsilon(&system, &epsilon);
    let (base, ne) = split(&system);
    let verdict = check_with_splits(&base, &ne).map_err(|e| e.to_string())?;
    match verdict {
        SatResult::Sat(witness) => {
            if !expected {
                return Err(format!("seed {seed}: simplex SAT, oracle UNSAT"));
            }
            if let Some(c) = system.iter().find(|c| !c.holds(&witness)) {
                return Err(format!("seed {seed}: witness violates {c}"));
            }
        }
        SatResult::Unsat => {
            if expected {
                return Err(format!("seed {seed}: simplex UNSAT, oracle SAT"));
            }
            let core = iis(&system, &LpProblem::default()).map_err(|e| e.to_string())?;
            if fourier_motzkin_epsilon(&core, &epsilon) {
                return Err(format!("seed {seed}: IIS is satisfiable"));
            }
            for i in 0..core.len() {
                let mut without = core.clone();
                without.remove(i);
                if !fourier_motzkin_epsilon(&without, &epsilon) {
                    return Err(format!("seed {seed}: IIS not minimal"));
                }
            }
        }
    }
    // Epsilon semantics never accepts an exactly infeasible system.
    if expected && !fourier_motzkin_with_splits(&system) {
        return Err(format!("seed {seed}: epsilon SAT but exactly UNSAT"));
    }
    Ok(expected)
}
