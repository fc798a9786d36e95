//! Classification of lc-atoms into strict/non-strict and defined/external.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::ground::{AtomId, GroundProgram};

use super::LcError;

/// How strictness is assigned to lc-atoms. Strictness is a semantic
/// setting, not syntax: the same program can be run under any policy.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum StrictPolicy {
    AllStrict,
    AllNonStrict,
    /// Non-strict for defined atoms, strict for external ones.
    #[default]
    Recommended,
    /// Explicit flag per atom, keyed by printed atom. Every lc-atom of the
    /// program must be listed.
    PerAtom(BTreeMap<String, bool>),
}

impl StrictPolicy {
    /// Parses a per-atom policy file: one `strict <atom>` or
    /// `nonstrict <atom>` per line; `%` starts a comment.
    pub fn parse_file(text: &str) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('%').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (flag, atom) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| format!("line {}: expected `strict|nonstrict <atom>`", n + 1))?;
            let strict = match flag {
                "strict" => true,
                "nonstrict" => false,
                other => return Err(format!("line {}: unknown flag `{other}`", n + 1)),
            };
            let atom = crate::syntax::parse_program(&format!("{}.", atom.trim()))
                .map_err(|e| format!("line {}: {e}", n + 1))?
                .rules()
                .next()
                .map(|r| match &r.head {
                    crate::syntax::Head::Theory(t) => Ok(t.key()),
                    _ => Err(format!("line {}: not an lc-atom", n + 1)),
                })
                .unwrap_or_else(|| Err(format!("line {}: missing atom", n + 1)))?;
            map.insert(atom, strict);
        }
        Ok(StrictPolicy::PerAtom(map))
    }
}

/// The four homogeneous settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    DefinedStrict,
    DefinedNonStrict,
    ExternalStrict,
    ExternalNonStrict,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::DefinedStrict,
        Preset::DefinedNonStrict,
        Preset::ExternalStrict,
        Preset::ExternalNonStrict,
    ];

    pub fn defined(self) -> bool {
        matches!(self, Preset::DefinedStrict | Preset::DefinedNonStrict)
    }

    pub fn strict(self) -> bool {
        matches!(self, Preset::DefinedStrict | Preset::ExternalStrict)
    }

    pub fn policy(self) -> StrictPolicy {
        if self.strict() {
            StrictPolicy::AllStrict
        } else {
            StrictPolicy::AllNonStrict
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::DefinedStrict => "defined-strict",
            Preset::DefinedNonStrict => "defined-nonstrict",
            Preset::ExternalStrict => "external-strict",
            Preset::ExternalNonStrict => "external-nonstrict",
        }
    }

    /// Checks that the program's lc-atoms are all defined (resp. all
    /// external), as the preset demands.
    pub fn validate(self, setting: &SemanticSetting) -> Result<(), LcError> {
        let wrong = setting
            .atoms
            .values()
            .find(|info| info.defined != self.defined());
        match wrong {
            Some(info) => Err(LcError::Setting(format!(
                "setting {} requires every lc-atom to be {}, but {} is {}",
                self.name(),
                if self.defined() {
                    "defined"
                } else {
                    "external"
                },
                info.name,
                if info.defined { "defined" } else { "external" },
            ))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s || p.name().replace('-', "_") == s)
            .ok_or_else(|| format!("unknown setting `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomInfo {
    pub name: String,
    pub strict: bool,
    /// Occurs in some rule head.
    pub defined: bool,
}

/// Per-atom strictness and definedness for the lc-atoms `L` of a program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SemanticSetting {
    pub atoms: BTreeMap<AtomId, AtomInfo>,
}

impl SemanticSetting {
    pub fn lc_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.atoms.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.atoms.contains_key(&atom)
    }

    pub fn is_strict(&self, atom: AtomId) -> bool {
        self.atoms.get(&atom).is_some_and(|i| i.strict)
    }

    pub fn is_defined(&self, atom: AtomId) -> bool {
        self.atoms.get(&atom).is_some_and(|i| i.defined)
    }

    fn select(&self, keep: impl Fn(&AtomInfo) -> bool) -> BTreeSet<AtomId> {
        self.atoms
            .iter()
            .filter(|(_, i)| keep(i))
            .map(|(&a, _)| a)
            .collect()
    }

    /// Strict lc-atoms.
    pub fn strict(&self) -> BTreeSet<AtomId> {
        self.select(|i| i.strict)
    }

    /// Non-strict lc-atoms.
    pub fn non_strict(&self) -> BTreeSet<AtomId> {
        self.select(|i| !i.strict)
    }

    /// lc-atoms occurring in some rule head.
    pub fn defined(&self) -> BTreeSet<AtomId> {
        self.select(|i| i.defined)
    }

    /// lc-atoms occurring in no rule head.
    pub fn external(&self) -> BTreeSet<AtomId> {
        self.select(|i| !i.defined)
    }

    /// The same atoms with every strictness flag replaced.
    pub fn with_strictness(&self, strict: bool) -> Self {
        let mut out = self.clone();
        out.atoms.values_mut().for_each(|i| i.strict = strict);
        out
    }

    /// The homogeneous preset this setting falls under, if any. An empty
    /// `L` matches no preset.
    pub fn preset(&self) -> Option<Preset> {
        let first = self.atoms.values().next()?;
        if self
            .atoms
            .values()
            .any(|i| i.strict != first.strict || i.defined != first.defined)
        {
            return None;
        }
        Some(match (first.defined, first.strict) {
            (true, true) => Preset::DefinedStrict,
            (true, false) => Preset::DefinedNonStrict,
            (false, true) => Preset::ExternalStrict,
            (false, false) => Preset::ExternalNonStrict,
        })
    }
}

/// Classifies every lc-atom of `g`: defined iff it occurs in a rule head,
/// strict according to `policy`.
pub fn signature(g: &GroundProgram, policy: &StrictPolicy) -> Result<SemanticSetting, LcError> {
    let heads = g.head_atoms();
    let mut atoms = BTreeMap::new();
    for id in g.lc_atoms() {
        let name = g.atoms.name(id).to_owned();
        let defined = heads.contains(&id);
        let strict = match policy {
            StrictPolicy::AllStrict => true,
            StrictPolicy::AllNonStrict => false,
            StrictPolicy::Recommended => !defined,
            StrictPolicy::PerAtom(map) => *map
                .get(&name)
                .ok_or_else(|| LcError::Setting(format!("no strictness given for {name}")))?,
        };
        atoms.insert(
            id,
            AtomInfo {
                name,
                strict,
                defined,
            },
        );
    }
    Ok(SemanticSetting { atoms })
}
