//! Text and JSON rendering of solutions.

use std::fmt::Write;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use lcasp::ground::{shown, GroundProgram};
use lcasp::lcsem::{LcModel, ObjectiveValue, Solution};
use lcasp::rational::{to_decimal, to_fraction, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Integers plain, finite decimals quoted, anything else as `p/q`.
pub fn text_value(value: &Rational) -> String {
    if value.is_integer() {
        return to_fraction(value);
    }
    match to_decimal(value) {
        Some(d) => format!("\"{d}\""),
        None => to_fraction(value),
    }
}

fn objective_text(value: &ObjectiveValue) -> String {
    match value {
        ObjectiveValue::Optimal(v) => text_value(v),
        ObjectiveValue::Unbounded => "unbounded".to_owned(),
    }
}

fn objective_json(value: &ObjectiveValue) -> Value {
    match value {
        ObjectiveValue::Optimal(v) => Value::String(to_fraction(v)),
        ObjectiveValue::Unbounded => Value::String("unbounded".to_owned()),
    }
}

/// Shown atom names of a model, sorted.
pub fn shown_atoms(g: &GroundProgram, model: &LcModel) -> Vec<String> {
    let mut names: Vec<String> = model
        .atoms
        .iter()
        .filter(|&&a| shown(g, a))
        .map(|&a| g.atoms.name(a).to_owned())
        .collect();
    names.sort();
    names
}

pub fn render(g: &GroundProgram, solution: &Solution, format: Format) -> String {
    match format {
        Format::Text => render_text(g, solution),
        Format::Json => {
            let mut text =
                serde_json::to_string_pretty(&to_json(g, solution)).expect("JSON values serialize");
            text.push('\n');
            text
        }
    }
}

fn render_text(g: &GroundProgram, solution: &Solution) -> String {
    let mut out = String::new();
    for (i, model) in solution.models.iter().enumerate() {
        let _ = writeln!(out, "Answer: {}", i + 1);
        let _ = writeln!(out, "{}", shown_atoms(g, model).join(" "));
        out.push_str("Assignment:");
        for (var, value) in &model.witness {
            let _ = write!(out, " {var}={}", text_value(value));
        }
        out.push('\n');
        if let Some(objective) = &model.objective {
            let _ = writeln!(out, "Optimization: {}", objective_text(objective));
        }
    }
    let verdict = if solution.models.is_empty() {
        "UNSATISFIABLE"
    } else {
        "SATISFIABLE"
    };
    let _ = writeln!(out, "{verdict}");
    let _ = writeln!(out, "Models: {}", solution.models.len());
    if let Some(best) = &solution.best {
        let _ = writeln!(out, "Best: {}", objective_text(best));
    }
    out
}

pub fn to_json(g: &GroundProgram, solution: &Solution) -> Value {
    let models = solution
        .models
        .iter()
        .map(|model| {
            let assignment: Map<String, Value> = model
                .witness
                .iter()
                .map(|(var, value)| (var.clone(), Value::String(to_fraction(value))))
                .collect();
            let mut object = json!({
                "atoms": shown_atoms(g, model),
                "assignment": assignment,
            });
            if let Some(objective) = &model.objective {
                object["objective"] = objective_json(objective);
            }
            object
        })
        .collect();
    Value::Array(models)
}
