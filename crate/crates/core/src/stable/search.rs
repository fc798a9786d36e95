//! DPLL-style enumeration of stable models with an optional theory hook.
//!
//! Propagation works on the completion: rules with a true body fire,
//! constraints with a true body conflict, atoms without a potentially
//! applicable rule become false, and false heads / true atoms with a single
//! support propagate backwards. Total assignments are checked for stability
//! against the least model of the reduct, then handed to the theory hook.
//!
//! Conflicts reported by the hook name the atoms involved; the search jumps
//! back to the highest decision level among them. Without clause learning
//! this is exact: every branch below that level keeps the conflicting
//! literals.

use std::collections::VecDeque;
use std::time::Instant;

use super::compile::{CHead, Compiled, Lit};
use super::SolveError;

/// A (partial) assignment as seen by a theory hook.
pub struct Assignment<'a> {
    pub values: &'a [Option<bool>],
    /// Decision level per assigned atom.
    pub levels: &'a [usize],
    /// Assigned atoms in assignment order.
    pub trail: &'a [usize],
    pub level: usize,
}

pub enum Verdict<W> {
    Consistent(W),
    /// The atoms whose current values are jointly inconsistent. An empty
    /// set means "blame the current level".
    Conflict(Vec<usize>),
}

/// Theory reasoning attached to the Boolean search.
pub trait TheoryHook {
    type Witness;

    /// Called whenever Boolean propagation reaches a fixpoint.
    fn propagate(&mut self, a: &Assignment<'_>) -> Result<Option<Vec<usize>>, SolveError>;

    /// Called on total, stable assignments.
    fn check(&mut self, a: &Assignment<'_>) -> Result<Verdict<Self::Witness>, SolveError>;

    /// The search retracted everything above `level`; `trail_len` atoms remain.
    fn undo(&mut self, level: usize, trail_len: usize);
}

/// The trivial theory: every stable model is accepted.
pub struct NoTheory;

impl TheoryHook for NoTheory {
    type Witness = ();

    fn propagate(&mut self, _: &Assignment<'_>) -> Result<Option<Vec<usize>>, SolveError> {
        Ok(None)
    }

    fn check(&mut self, _: &Assignment<'_>) -> Result<Verdict<()>, SolveError> {
        Ok(Verdict::Consistent(()))
    }

    fn undo(&mut self, _: usize, _: usize) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value3 {
    True,
    False,
    Unknown,
}

#[derive(Clone, Copy)]
enum Task {
    Rule(usize),
    Support(usize),
}

struct Frame {
    atom: usize,
    value: bool,
    flipped: bool,
    trail_start: usize,
}

/// Outcome of a search run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    /// The search space was exhausted.
    Exhausted,
    /// The model callback asked to stop.
    Stopped,
}

pub struct Search<'p, H: TheoryHook> {
    prog: &'p Compiled,
    pub hook: H,
    values: Vec<Option<bool>>,
    levels: Vec<usize>,
    trail: Vec<usize>,
    frames: Vec<Frame>,
    queue: VecDeque<Task>,
    queued_rule: Vec<bool>,
    queued_support: Vec<bool>,
    deadline: Option<Instant>,
    steps: u64,
}

enum Step {
    Ok,
    /// Conflict whose latest involved level is given.
    Conflict(usize),
}

impl<'p, H: TheoryHook> Search<'p, H> {
    pub fn new(prog: &'p Compiled, hook: H) -> Self {
        let n = prog.num_atoms;
        Search {
            prog,
            hook,
            values: vec![None; n],
            levels: vec![0; n],
            trail: Vec::new(),
            frames: Vec::new(),
            queue: VecDeque::new(),
            queued_rule: vec![false; prog.rules.len()],
            queued_support: vec![false; n],
            deadline: None,
            steps: 0,
        }
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    fn level(&self) -> usize {
        self.frames.len()
    }

    /// Splits the borrow: the hook mutably, the assignment immutably.
    fn hook_and_view(&mut self) -> (&mut H, Assignment<'_>) {
        let level = self.frames.len();
        (
            &mut self.hook,
            Assignment {
                values: &self.values,
                levels: &self.levels,
                trail: &self.trail,
                level,
            },
        )
    }

    /// Enumerates all stable models accepted by the hook. `on_model` gets
    /// the total interpretation and the hook's witness and returns whether
    /// to continue.
    pub fn run(
        &mut self,
        mut on_model: impl FnMut(&[bool], H::Witness) -> bool,
    ) -> Result<Completion, SolveError> {
        for r in 0..self.prog.rules.len() {
            self.push_task(Task::Rule(r));
        }
        for a in 0..self.prog.num_atoms {
            self.push_task(Task::Support(a));
        }
        let mut step = self.propagate()?;
        loop {
            if let Step::Conflict(level) = step {
                match self.resolve(level)? {
                    Some(next) => {
                        step = next;
                        continue;
                    }
                    None => return Ok(Completion::Exhausted),
                }
            }
            self.tick()?;
            match self.values.iter().position(Option::is_none) {
                Some(atom) => {
                    step = self.decide(atom, false, false)?;
                }
                None => {
                    let x: Vec<bool> = self.values.iter().map(|v| v.unwrap_or(false)).collect();
                    if !self.prog.least_model_of_reduct(&x).eq(&x) {
                        step = Step::Conflict(self.level());
                        continue;
                    }
                    let (hook, view) = self.hook_and_view();
                    match hook.check(&view)? {
                        Verdict::Consistent(w) => {
                            if !on_model(&x, w) {
                                return Ok(Completion::Stopped);
                            }
                            step = Step::Conflict(self.level());
                        }
                        Verdict::Conflict(atoms) => {
                            step = Step::Conflict(self.blame(&atoms));
                        }
                    }
                }
            }
        }
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.steps += 1;
        if self.steps.is_multiple_of(64) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Err(SolveError::Timeout);
                }
            }
        }
        Ok(())
    }

    fn blame(&self, atoms: &[usize]) -> usize {
        if atoms.is_empty() {
            self.level()
        } else {
            atoms.iter().map(|&a| self.levels[a]).max().unwrap_or(0)
        }
    }

    /// Backtracks after a conflict at `level`: the most recent decision at
    /// or below it that has an untried branch is flipped.
    fn resolve(&mut self, mut level: usize) -> Result<Option<Step>, SolveError> {
        loop {
            if level == 0 {
                return Ok(None);
            }
            let frame_index = level - 1;
            let Frame {
                atom,
                value,
                flipped,
                trail_start,
            } = self.frames[frame_index];
            self.undo_to(frame_index, trail_start);
            if flipped {
                level -= 1;
                continue;
            }
            match self.decide(atom, !value, true)? {
                Step::Ok => return Ok(Some(Step::Ok)),
                Step::Conflict(l) => level = l.min(self.level()),
            }
        }
    }

    fn undo_to(&mut self, level: usize, trail_len: usize) {
        for &a in &self.trail[trail_len..] {
            self.values[a] = None;
        }
        self.trail.truncate(trail_len);
        self.frames.truncate(level);
        self.queue.clear();
        self.queued_rule.iter_mut().for_each(|q| *q = false);
        self.queued_support.iter_mut().for_each(|q| *q = false);
        self.hook.undo(level, trail_len);
    }

    fn decide(&mut self, atom: usize, value: bool, flipped: bool) -> Result<Step, SolveError> {
        self.frames.push(Frame {
            atom,
            value,
            flipped,
            trail_start: self.trail.len(),
        });
        if !self.assign(atom, value) {
            return Ok(Step::Conflict(self.level()));
        }
        self.propagate()
    }

    fn push_task(&mut self, task: Task) {
        match task {
            Task::Rule(r) => {
                if !self.queued_rule[r] {
                    self.queued_rule[r] = true;
                    self.queue.push_back(task);
                }
            }
            Task::Support(a) => {
                if !self.queued_support[a] {
                    self.queued_support[a] = true;
                    self.queue.push_back(task);
                }
            }
        }
    }

    /// Returns false on an immediate clash.
    fn assign(&mut self, atom: usize, value: bool) -> bool {
        match self.values[atom] {
            Some(v) => v == value,
            None => {
                self.values[atom] = Some(value);
                self.levels[atom] = self.level();
                self.trail.push(atom);
                let prog = self.prog;
                for &r in &prog.occurs[atom] {
                    self.push_task(Task::Rule(r));
                }
                for &r in &prog.heads[atom] {
                    self.push_task(Task::Rule(r));
                }
                self.push_task(Task::Support(atom));
                true
            }
        }
    }

    fn propagate(&mut self) -> Result<Step, SolveError> {
        loop {
            while let Some(task) = self.queue.pop_front() {
                let ok = match task {
                    Task::Rule(r) => {
                        self.queued_rule[r] = false;
                        self.process_rule(r)
                    }
                    Task::Support(a) => {
                        self.queued_support[a] = false;
                        self.process_support(a)
                    }
                };
                if !ok {
                    self.queue.clear();
                    self.queued_rule.iter_mut().for_each(|q| *q = false);
                    self.queued_support.iter_mut().for_each(|q| *q = false);
                    return Ok(Step::Conflict(self.level()));
                }
            }
            let before = self.trail.len();
            let (hook, view) = self.hook_and_view();
            if let Some(atoms) = hook.propagate(&view)? {
                return Ok(Step::Conflict(self.blame(&atoms)));
            }
            if self.trail.len() == before {
                return Ok(Step::Ok);
            }
        }
    }

    fn lit_value(&self, lit: Lit) -> Value3 {
        match lit {
            Lit::Atom { atom, negated } => match self.values[atom] {
                Some(v) if v != negated => Value3::True,
                Some(_) => Value3::False,
                None => Value3::Unknown,
            },
            Lit::Count { agg, negated } => {
                let a = &self.prog.aggs[agg];
                let mut sure = 0u64;
                let mut possible = 0u64;
                for &(e, n) in &a.elements {
                    match self.values[e] {
                        Some(v) if v != n => {
                            sure += 1;
                            possible += 1;
                        }
                        Some(_) => {}
                        None => possible += 1,
                    }
                }
                let holds = sure >= a.lower && a.upper.is_none_or(|u| possible <= u);
                let fails = possible < a.lower || a.upper.is_some_and(|u| sure > u);
                let v = if holds {
                    Value3::True
                } else if fails {
                    Value3::False
                } else {
                    Value3::Unknown
                };
                match (v, negated) {
                    (Value3::True, true) => Value3::False,
                    (Value3::False, true) => Value3::True,
                    (v, _) => v,
                }
            }
        }
    }

    /// Body value plus the single unknown literal, if exactly one.
    fn body_state(&self, r: usize) -> (Value3, Option<Lit>, usize) {
        let mut unknown = 0;
        let mut last = None;
        for &lit in &self.prog.rules[r].body {
            match self.lit_value(lit) {
                Value3::False => return (Value3::False, None, 0),
                Value3::Unknown => {
                    unknown += 1;
                    last = Some(lit);
                }
                Value3::True => {}
            }
        }
        if unknown == 0 {
            (Value3::True, None, 0)
        } else {
            (Value3::Unknown, last, unknown)
        }
    }

    /// Makes `lit` false (if `make_true` is false) or true, when it is a plain atom literal.
    fn force(&mut self, lit: Lit, make_true: bool) -> bool {
        match lit {
            Lit::Atom { atom, negated } => self.assign(atom, make_true != negated),
            Lit::Count { .. } => true,
        }
    }

    fn process_rule(&mut self, r: usize) -> bool {
        let (state, last, unknown) = self.body_state(r);
        let prog = self.prog;
        match &prog.rules[r].head {
            CHead::Atom(h) => {
                let h = *h;
                match state {
                    Value3::True => return self.assign(h, true),
                    Value3::False => self.push_task(Task::Support(h)),
                    Value3::Unknown => {
                        if self.values[h] == Some(false) && unknown == 1 {
                            return self.force(last.expect("one unknown"), false);
                        }
                    }
                }
                if self.values[h] == Some(true) {
                    self.push_task(Task::Support(h));
                }
            }
            CHead::Choice(hs) => {
                for &h in hs {
                    if state == Value3::False || self.values[h] == Some(true) {
                        self.push_task(Task::Support(h));
                    }
                }
            }
            CHead::None => match state {
                Value3::True => return false,
                Value3::Unknown if unknown == 1 => {
                    return self.force(last.expect("one unknown"), false)
                }
                _ => {}
            },
        }
        true
    }

    fn process_support(&mut self, atom: usize) -> bool {
        if self.values[atom] == Some(false) {
            return true;
        }
        let prog = self.prog;
        let mut support = None;
        let mut count = 0;
        for &r in &prog.heads[atom] {
            if self.body_state(r).0 != Value3::False {
                count += 1;
                support = Some(r);
                if count > 1 {
                    break;
                }
            }
        }
        match count {
            0 => self.assign(atom, false),
            1 if self.values[atom] == Some(true) => {
                let r = support.expect("one support");
                for &lit in &prog.rules[r].body {
                    if self.lit_value(lit) == Value3::Unknown && !self.force(lit, true) {
                        return false;
                    }
                }
                true
            }
            _ => true,
        }
    }
}
