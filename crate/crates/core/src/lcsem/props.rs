//! Randomised checks of the relations between regular stable models and
//! lc-stable models, and the two fixed counterexample programs.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ground::{ground_base, AtomId, GroundProgram};
use crate::stable::{enumerate_stable_models, Interpretation};
use crate::syntax::parse_program;

use super::reference::is_lc_solution;
use super::{LcError, LcModel, Mode, Prepared, Preset, SolveOptions, TheoryChoice};

/// Shape limits of generated programs.
pub const MAX_REGULAR: usize = 8;
pub const MAX_LC: usize = 4;
pub const MAX_VARIABLES: usize = 3;
pub const COEFFICIENT_RANGE: i64 = 3;

const VARIABLES: [&str; MAX_VARIABLES] = ["x", "y", "z"];
const RELATIONS: [&str; 6] = ["<=", "<", ">=", ">", "=", "!="];

fn random_lc_atom(rng: &mut ChaCha8Rng, variables: &[&str]) -> String {
    let rhs = rng.gen_range(-4..=4);
    let relation = RELATIONS.choose(rng).expect("non-empty");
    let ordering = !matches!(*relation, "=" | "!=");
    if ordering && variables.len() >= 2 && rng.gen_bool(0.3) {
        let mut pair: Vec<&str> = variables.choose_multiple(rng, 2).copied().collect();
        pair.shuffle(rng);
        return format!("&diff{{{}-{}}}{relation}{rhs}", pair[0], pair[1]);
    }
    let count = rng.gen_range(1..=variables.len().min(2));
    let chosen: Vec<&str> = variables.choose_multiple(rng, count).copied().collect();
    let elements: Vec<String> = chosen
        .iter()
        .map(|v| {
            let mut c = 0;
            while c == 0 {
                c = rng.gen_range(-COEFFICIENT_RANGE..=COEFFICIENT_RANGE);
            }
            match c {
                1 => v.to_string(),
                _ => format!("{c}*{v}"),
            }
        })
        .collect();
    format!("&sum{{{}}}{relation}{rhs}", elements.join(";"))
}

fn literal(rng: &mut ChaCha8Rng, atom: &str) -> String {
    if rng.gen_bool(0.35) {
        format!("not {atom}")
    } else {
        atom.to_owned()
    }
}

/// A rule; an empty `head` makes an integrity constraint (with a
/// non-empty body).
fn rule(head: &str, body: &[String]) -> String {
    if body.is_empty() {
        format!("{head}.")
    } else if head.is_empty() {
        format!(":- {}.", body.join(", "))
    } else {
        format!("{head} :- {}.", body.join(", "))
    }
}

/// A random ground program whose lc-atoms are all defined (or all
/// external) as `preset` demands: at most 8 regular atoms, at most 4
/// lc-atoms over at most 3 real variables, coefficients in [-3, 3].
pub fn random_program(rng: &mut ChaCha8Rng, preset: Preset) -> String {
    let regular: Vec<String> = (0..rng.gen_range(1..=MAX_REGULAR))
        .map(|i| format!("p{i}"))
        .collect();
    let variables = &VARIABLES[..rng.gen_range(1..=MAX_VARIABLES)];
    let mut lc: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(1..=MAX_LC) {
        let atom = random_lc_atom(rng, variables);
        if !lc.contains(&atom) {
            lc.push(atom);
        }
    }
    let mut lines = vec![format!("#real {}.", variables.join(", "))];
    let body_atom = |rng: &mut ChaCha8Rng| -> String {
        if rng.gen_bool(0.4) {
            lc.choose(rng).expect("non-empty").clone()
        } else {
            regular.choose(rng).expect("non-empty").clone()
        }
    };
    if preset.defined() {
        // Defining rules whose bodies cannot be discarded by grounding:
        // only negative regular literals and lc-atoms.
        for atom in &lc {
            let body: Vec<String> = (0..rng.gen_range(0..=2))
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        format!("not {}", regular.choose(rng).expect("non-empty"))
                    } else {
                        let other = lc.choose(rng).expect("non-empty");
                        literal(rng, other)
                    }
                })
                .filter(|l| l != atom)
                .collect();
            lines.push(rule(atom, &body));
        }
    } else {
        for atom in &lc {
            let head = regular.choose(rng).expect("non-empty").clone();
            let lit = literal(rng, atom);
            lines.push(rule(&head, &[lit]));
        }
    }
    for _ in 0..rng.gen_range(1..=8) {
        let body: Vec<String> = (0..rng.gen_range(0..=3))
            .map(|_| {
                let a = body_atom(rng);
                literal(rng, &a)
            })
            .collect();
        let kind = rng.gen_range(0..10);
        let line = if kind < 6 {
            rule(regular.choose(rng).expect("non-empty"), &body)
        } else if kind < 8 {
            rule(
                &format!("{{{}}}", regular.choose(rng).expect("non-empty")),
                &body,
            )
        } else if !body.is_empty() {
            rule("", &body)
        } else {
            continue;
        };
        lines.push(line);
    }
    lines.join("\n") + "\n"
}

/// Stable 64-bit hash of a program text, printed in hex.
pub fn program_hash(text: &str) -> String {
    let mut h = DefaultHasher::new();
    text.hash(&mut h);
    format!("{:016x}", h.finish())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Claim {
    /// All lc-atoms defined: SM_lc(P) ⊆ SM(P).
    DefinedSubset,
    /// All lc-atoms external and non-strict: SM(P) ⊆ SM_lc(P).
    ExternalNonStrictSuperset,
    /// SM_lc under the setting ⊆ SM_lc with every atom non-strict.
    StrictnessMonotone,
    /// lc-solutions under all-strict typing ⊆ those under all-non-strict.
    SolutionMonotone,
    /// Every witness satisfies its generating lc-solution.
    WitnessValid,
    /// Reference and lazy enumeration agree.
    ModesAgree,
    /// The generated program could not be solved at all.
    Error,
}

impl Claim {
    pub fn name(self) -> &'static str {
        match self {
            Claim::DefinedSubset => "defined-subset",
            Claim::ExternalNonStrictSuperset => "external-nonstrict-superset",
            Claim::StrictnessMonotone => "strictness-monotone",
            Claim::SolutionMonotone => "solution-monotone",
            Claim::WitnessValid => "witness-valid",
            Claim::ModesAgree => "modes-agree",
            Claim::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub preset: Preset,
    pub claim: Claim,
    pub hash: String,
    pub program: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "VIOLATION {} {}", self.preset, self.hash)?;
        writeln!(f, "% claim: {}", self.claim.name())?;
        if !self.detail.is_empty() {
            writeln!(f, "% {}", self.detail)?;
        }
        for line in self.program.lines() {
            writeln!(f, "%   {line}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub programs: usize,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Options for the randomised harness.
#[derive(Clone, Debug)]
pub struct PropOptions {
    pub count: usize,
    pub seed: u64,
    pub presets: Vec<Preset>,
    /// Also compare the lazy enumerator against the reference one.
    pub compare_modes: bool,
    pub theory: TheoryChoice,
}

impl Default for PropOptions {
    fn default() -> Self {
        PropOptions {
            count: 1000,
            seed: 0,
            presets: Preset::ALL.to_vec(),
            compare_modes: false,
            theory: TheoryChoice::Auto,
        }
    }
}

fn rng_for(seed: u64, preset: Preset, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((preset as u64) << 32 | index as u64);
    rng
}

fn options(preset: Preset, strict: bool, theory: TheoryChoice) -> SolveOptions {
    let mut o = SolveOptions::with_preset(preset).theory(theory);
    o.policy = if strict {
        super::StrictPolicy::AllStrict
    } else {
        super::StrictPolicy::AllNonStrict
    };
    o.allow_epsilon = true;
    o
}

fn atoms(models: &[LcModel]) -> BTreeSet<Interpretation> {
    models.iter().map(|m| m.atoms.clone()).collect()
}

fn show(g: &GroundProgram, set: &BTreeSet<Interpretation>) -> String {
    let rendered: Vec<String> = set
        .iter()
        .map(|x| {
            let mut names: Vec<&str> = x.iter().map(|&a| g.atoms.name(a)).collect();
            names.sort();
            format!("{{{}}}", names.join(", "))
        })
        .collect();
    format!("{{{}}}", rendered.join(", "))
}

/// Checks every claim that applies to `text` under `preset`; returns the
/// violated claims with details.
pub fn check_program(
    text: &str,
    preset: Preset,
    compare_modes: bool,
    theory: TheoryChoice,
) -> Vec<(Claim, String)> {
    match check_program_inner(text, preset, compare_modes, theory) {
        Ok(v) => v,
        Err(e) => vec![(Claim::Error, e.to_string())],
    }
}

fn check_program_inner(
    text: &str,
    preset: Preset,
    compare_modes: bool,
    theory: TheoryChoice,
) -> Result<Vec<(Claim, String)>, LcError> {
    let parsed = parse_program(text).map_err(|e| LcError::Setting(e.to_string()))?;
    let g = ground_base(&parsed).map_err(|e| LcError::Setting(e.to_string()))?;
    let mut out = Vec::new();
    let opts = options(preset, preset.strict(), theory);
    let prepared = Prepared::new(&g, &opts)?;
    let lc_models = prepared.enumerate(&g, Mode::Reference, &opts)?;
    let sm_lc = atoms(&lc_models);
    let sm: BTreeSet<Interpretation> = enumerate_stable_models(&g, None)?.into_iter().collect();

    if preset.defined() && !sm_lc.is_subset(&sm) {
        out.push((
            Claim::DefinedSubset,
            format!(
                "SM_lc = {} not within SM = {}",
                show(&g, &sm_lc),
                show(&g, &sm)
            ),
        ));
    }
    if preset == Preset::ExternalNonStrict && !sm.is_subset(&sm_lc) {
        out.push((
            Claim::ExternalNonStrictSuperset,
            format!(
                "SM = {} not within SM_lc = {}",
                show(&g, &sm),
                show(&g, &sm_lc)
            ),
        ));
    }
    let relaxed_opts = options(preset, false, theory);
    let relaxed = Prepared::new(&g, &relaxed_opts)?;
    if preset.strict() {
        let relaxed_models = atoms(&relaxed.enumerate(&g, Mode::Reference, &relaxed_opts)?);
        if !sm_lc.is_subset(&relaxed_models) {
            out.push((
                Claim::StrictnessMonotone,
                format!(
                    "strict SM_lc = {} not within non-strict SM_lc = {}",
                    show(&g, &sm_lc),
                    show(&g, &relaxed_models)
                ),
            ));
        }
    }
    // Solution families: all-strict within all-non-strict.
    let strict_opts = options(preset, true, theory);
    let strict = Prepared::new(&g, &strict_opts)?;
    let lc: Vec<AtomId> = prepared.setting.lc_atoms().collect();
    for mask in 0u32..(1u32 << lc.len()) {
        let s: BTreeSet<AtomId> = (0..lc.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| lc[i])
            .collect();
        let under_strict =
            is_lc_solution(&s, &strict.setting, &strict.table, &strict.checker)?.is_some();
        if under_strict
            && is_lc_solution(&s, &relaxed.setting, &relaxed.table, &relaxed.checker)?.is_none()
        {
            let names: Vec<&str> = s.iter().map(|&a| g.atoms.name(a)).collect();
            out.push((
                Claim::SolutionMonotone,
                format!(
                    "{{{}}} is a solution only under strict typing",
                    names.join(", ")
                ),
            ));
        }
    }
    for m in &lc_models {
        if let Some(problem) = witness_problem(&g, &prepared, m) {
            out.push((Claim::WitnessValid, problem));
        }
    }
    if compare_modes {
        let lazy = atoms(&prepared.enumerate(&g, Mode::Lazy, &opts)?);
        if lazy != sm_lc {
            out.push((
                Claim::ModesAgree,
                format!("reference {} vs lazy {}", show(&g, &sm_lc), show(&g, &lazy)),
            ));
        }
    }
    Ok(out)
}

/// Re-validates a witness exactly against its generating set S.
pub fn witness_problem(g: &GroundProgram, prepared: &Prepared, m: &LcModel) -> Option<String> {
    let s = m.generator.as_ref()?;
    for (&atom, c) in &prepared.table.constraints {
        let linear = c.unconditional();
        let ok = if s.contains(&atom) {
            linear.holds(&m.witness)
        } else if prepared.setting.is_strict(atom) {
            !linear.holds(&m.witness)
        } else {
            true
        };
        if !ok {
            return Some(format!(
                "witness {:?} fails for {}",
                m.witness,
                g.atoms.name(atom)
            ));
        }
    }
    None
}

/// Runs the harness on `options.count` random programs per preset. The
/// presets are checked in parallel.
pub fn check_propositions(options: &PropOptions) -> Report {
    let per_preset: Vec<Report> = std::thread::scope(|scope| {
        let handles: Vec<_> = options
            .presets
            .iter()
            .map(|&preset| {
                scope.spawn(move || {
                    let mut report = Report::default();
                    for index in 0..options.count {
                        let mut rng = rng_for(options.seed, preset, index);
                        let text = random_program(&mut rng, preset);
                        report.programs += 1;
                        for (claim, detail) in
                            check_program(&text, preset, options.compare_modes, options.theory)
                        {
                            report.violations.push(Violation {
                                preset,
                                claim,
                                hash: program_hash(&text),
                                program: text.clone(),
                                detail,
                            });
                        }
                    }
                    report
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("harness thread panicked"))
            .collect()
    });
    let mut report = Report::default();
    for r in per_preset {
        report.programs += r.programs;
        report.violations.extend(r.violations);
    }
    report
}

/// Outcome of one fixed counterexample program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedCase {
    pub name: &'static str,
    pub program: &'static str,
    pub expected_sm: Vec<Vec<String>>,
    pub expected_sm_lc: Vec<Vec<String>>,
    pub sm: Vec<Vec<String>>,
    pub sm_lc: Vec<Vec<String>>,
}

impl FixedCase {
    pub fn passed(&self) -> bool {
        self.sm == self.expected_sm && self.sm_lc == self.expected_sm_lc
    }
}

/// Programs showing that neither inclusion between SM and SM_lc holds in
/// general (external, strict lc-atoms).
pub const COUNTEREXAMPLES: [(&str, &str); 2] = [
    ("sm-not-within-sm-lc", ":- &sum{x}<=1.\n:- &sum{x}>1.\n"),
    ("sm-lc-not-within-sm", ":- not &sum{x}<=1.\n"),
];

fn names(g: &GroundProgram, models: impl IntoIterator<Item = Interpretation>) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = models
        .into_iter()
        .map(|x| {
            let mut n: Vec<String> = x.iter().map(|&a| g.atoms.name(a).to_owned()).collect();
            n.sort();
            n
        })
        .collect();
    out.sort();
    out
}

/// Runs the two counterexample programs under external-strict.
pub fn fixed_counterexamples() -> Result<Vec<FixedCase>, LcError> {
    type Sets = Vec<Vec<String>>;
    let expected: [(Sets, Sets); 2] = [
        (vec![vec![]], vec![]),
        (vec![], vec![vec!["&sum{x}<=1".to_owned()]]),
    ];
    let mut out = Vec::new();
    for ((name, program), (expected_sm, expected_sm_lc)) in
        COUNTEREXAMPLES.into_iter().zip(expected)
    {
        let parsed = parse_program(program).map_err(|e| LcError::Setting(e.to_string()))?;
        let g = ground_base(&parsed).map_err(|e| LcError::Setting(e.to_string()))?;
        let sm = names(&g, enumerate_stable_models(&g, None)?);
        let opts = SolveOptions::with_preset(Preset::ExternalStrict).mode(Mode::Reference);
        let solution = super::solve(&g, &opts)?;
        let sm_lc = names(&g, solution.models.into_iter().map(|m| m.atoms));
        out.push(FixedCase {
            name,
            program,
            expected_sm,
            expected_sm_lc,
            sm,
            sm_lc,
        });
    }
    Ok(out)
}
