//! Line-oriented scenario documents: declarations of models and morphisms
//! followed by the commands to run on them.
//!
//! ```text
//! settings {
//!   depth = 6
//! }
//!
//! model Z {
//!   kind = z
//! }
//!
//! morphism id {
//!   kind = identity
//!   domain = Z
//! }
//!
//! command check-pure {
//!   morphism = id
//!   expect = pass
//! }
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Every entry is
//! `key = value` on its own line; the value runs to the end of the line.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CuError, Result};

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub pos: Pos,
    /// Position of the value, for errors about it.
    pub value_pos: Pos,
}

impl Entry {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        Entry { key: key.into(), value: value.into(), pos: Pos::default(), value_pos: Pos::default() }
    }
}

// Positions are bookkeeping; two documents that differ only in layout are equal.
impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.value == other.value
    }
}

/// `model NAME { ... }`, `morphism NAME { ... }` or `command KIND { ... }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub entries: Vec<Entry>,
    pub pos: Pos,
}

impl PartialEq for Block {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.entries == other.entries
    }
}

impl Block {
    pub fn new(name: impl Into<String>) -> Self {
        Block { name: name.into(), entries: vec![], pos: Pos::default() }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.entries.push(Entry::new(key, value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    pub fn value(&self, key: &str) -> Option<&str> {
        self.get(key).map(|e| e.value.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Machine,
}

impl std::str::FromStr for Format {
    type Err = CuError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "machine" => Ok(Format::Machine),
            _ => Err(CuError::Parse(format!("unknown format `{s}`, expected text or machine"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Machine => "machine",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settings {
    pub depth: u64,
    pub frac_bound: u64,
    pub seed: u64,
    /// Random instances per pair in lemma suites.
    pub samples: u64,
    pub format: Format,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { depth: 6, frac_bound: 8, seed: 7, samples: 8, format: Format::Text }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scenario {
    pub settings: Settings,
    pub models: Vec<Block>,
    pub morphisms: Vec<Block>,
    pub commands: Vec<Block>,
}

pub const MODEL_KINDS: &[&str] = &["z", "nbar", "halfline", "kq", "product", "lsc", "table", "t4", "t4-faulty"];

pub const MORPHISM_KINDS: &[&str] = &[
    "identity",
    "zero",
    "multiply",
    "infinite",
    "sigma",
    "nat-to-soft",
    "scale",
    "project",
    "inject",
    "glue",
    "explicit",
    "compose",
];

pub const COMMAND_KINDS: &[&str] = &[
    "check-axioms",
    "check-model-pure",
    "check-morphism",
    "check-pure",
    "check-q-rational",
    "check-soft",
    "compute-alpha",
    "compute-alpha-q",
    "compute-alpha-soft",
    "verify-bimorphism",
    "lemma-suite",
    "check-z-extension",
    "check-instance",
];

fn syntax(pos: Pos, msg: impl Into<String>) -> CuError {
    CuError::Syntax { line: pos.line, col: pos.col, msg: msg.into() }
}

fn is_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn is_key(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "_.'-".contains(c))
}

/// Column (1-based, in characters) of byte offset `at` in `line`.
fn col_of(line: &str, at: usize) -> usize {
    line[..at].chars().count() + 1
}

enum Section {
    Settings,
    Model,
    Morphism,
    Command,
}

/// Parses and validates a scenario: every name must be declared, every kind
/// known, and compositions acyclic.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let sc = parse_syntax(text)?;
    crate::runner::compile(&sc)?;
    Ok(sc)
}

/// Parses the block structure only.
pub fn parse_syntax(text: &str) -> Result<Scenario> {
    let mut sc = Scenario::default();
    let mut open: Option<(Section, Block)> = None;
    let mut seen_settings = false;
    let mut names: HashSet<String> = HashSet::new();
    let mut last = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last = line_no;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        let at = |off: usize| Pos { line: line_no, col: col_of(raw, indent + off) };
        match &mut open {
            None => {
                let tokens: Vec<&str> = trimmed.split_whitespace().collect();
                if tokens.last() != Some(&"{") {
                    return Err(syntax(at(0), "expected a block header ending in `{`"));
                }
                let pos = at(0);
                let head = &tokens[..tokens.len() - 1];
                let name_pos = match head.get(1) {
                    Some(second) => {
                        let skip = head[0].len();
                        let off = trimmed[skip..].find(second).map_or(0, |o| o + skip);
                        at(off)
                    }
                    None => pos,
                };
                let section = match head {
                    ["settings"] => {
                        if seen_settings {
                            return Err(syntax(pos, "settings declared twice"));
                        }
                        seen_settings = true;
                        open = Some((Section::Settings, Block { name: "settings".into(), entries: vec![], pos }));
                        continue;
                    }
                    ["model", _] => Section::Model,
                    ["morphism", _] => Section::Morphism,
                    ["command", kind] => {
                        if !COMMAND_KINDS.contains(kind) {
                            return Err(syntax(name_pos, format!("unknown command `{kind}`")));
                        }
                        open = Some((Section::Command, Block { name: kind.to_string(), entries: vec![], pos }));
                        continue;
                    }
                    _ => {
                        return Err(syntax(
                            pos,
                            "expected `settings {`, `model NAME {`, `morphism NAME {` or `command KIND {`",
                        ))
                    }
                };
                let name = head[1];
                if !is_name(name) {
                    return Err(syntax(name_pos, format!("`{name}` is not a valid name")));
                }
                if !names.insert(name.to_string()) {
                    return Err(syntax(name_pos, format!("`{name}` is declared twice")));
                }
                open = Some((section, Block { name: name.to_string(), entries: vec![], pos }));
            }
            Some((_, block)) => {
                if trimmed == "}" {
                    let (section, block) = open.take().unwrap_or((Section::Settings, Block::new("")));
                    match section {
                        Section::Settings => sc.settings = settings_from(&block)?,
                        Section::Model => sc.models.push(block),
                        Section::Morphism => sc.morphisms.push(block),
                        Section::Command => sc.commands.push(block),
                    }
                    continue;
                }
                let Some(eq) = trimmed.find('=') else {
                    return Err(syntax(at(0), "expected `key = value` or `}`"));
                };
                let key = trimmed[..eq].trim();
                if !is_key(key) {
                    return Err(syntax(at(0), format!("`{key}` is not a valid key")));
                }
                let rest = &trimmed[eq + 1..];
                let value = rest.trim();
                let value_off = eq + 1 + (rest.len() - rest.trim_start().len());
                if value.is_empty() {
                    return Err(syntax(at(value_off), format!("`{key}` has no value")));
                }
                block.entries.push(Entry {
                    key: key.to_string(),
                    value: value.to_string(),
                    pos: at(0),
                    value_pos: at(value_off),
                });
            }
        }
    }
    if let Some((_, block)) = open {
        return Err(syntax(
            Pos { line: last + 1, col: 1 },
            format!("block `{}` opened at line {} is not closed", block.name, block.pos.line),
        ));
    }
    Ok(sc)
}

fn settings_from(block: &Block) -> Result<Settings> {
    let mut s = Settings::default();
    for e in &block.entries {
        let num = || -> Result<u64> {
            e.value.parse().map_err(|_| syntax(e.value_pos, format!("`{}` must be a non-negative integer", e.key)))
        };
        match e.key.as_str() {
            "depth" => s.depth = num()?,
            "frac_bound" => s.frac_bound = num()?,
            "seed" => s.seed = num()?,
            "samples" => s.samples = num()?,
            "format" => s.format = e.value.parse().map_err(|err: CuError| syntax(e.value_pos, err.to_string()))?,
            other => return Err(syntax(e.pos, format!("unknown setting `{other}`"))),
        }
    }
    Ok(s)
}

fn write_block(out: &mut String, head: &str, b: &Block) {
    out.push_str(head);
    out.push_str(" {\n");
    for e in &b.entries {
        out.push_str(&format!("  {} = {}\n", e.key, e.value));
    }
    out.push_str("}\n\n");
}

/// Canonical text; `parse_syntax(&serialize(s))` equals `s`.
pub fn serialize(sc: &Scenario) -> String {
    let s = &sc.settings;
    let mut out = format!(
        "settings {{\n  depth = {}\n  frac_bound = {}\n  seed = {}\n  samples = {}\n  format = {}\n}}\n\n",
        s.depth, s.frac_bound, s.seed, s.samples, s.format
    );
    for b in &sc.models {
        write_block(&mut out, &format!("model {}", b.name), b);
    }
    for b in &sc.morphisms {
        write_block(&mut out, &format!("morphism {}", b.name), b);
    }
    for b in &sc.commands {
        write_block(&mut out, &format!("command {}", b.name), b);
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    out
}

/// Names referenced by a declaration, with the position of the reference.
pub(crate) fn references(block: &Block, keys: &[&str]) -> Vec<(String, Pos)> {
    let mut out = vec![];
    for e in block.entries.iter().filter(|e| keys.contains(&e.key.as_str())) {
        for part in e.value.split(',') {
            let name = part.trim();
            if !name.is_empty() {
                let off = e.value.find(name).unwrap_or(0);
                let pos = Pos { line: e.value_pos.line, col: e.value_pos.col + e.value[..off].chars().count() };
                out.push((name.to_string(), pos));
            }
        }
    }
    out
}

/// Orders declarations so that each comes after the ones it references.
/// `deps` lists, per block, the names it needs from the same family.
pub(crate) fn dependency_order(blocks: &[Block], deps: &dyn Fn(&Block) -> Vec<(String, Pos)>) -> Result<Vec<usize>> {
    let index: HashMap<&str, usize> = blocks.iter().enumerate().map(|(i, b)| (b.name.as_str(), i)).collect();
    // 0 = unvisited, 1 = on the stack, 2 = done
    let mut state = vec![0u8; blocks.len()];
    let mut order = vec![];
    fn visit(
        i: usize,
        blocks: &[Block],
        index: &HashMap<&str, usize>,
        deps: &dyn Fn(&Block) -> Vec<(String, Pos)>,
        state: &mut Vec<u8>,
        order: &mut Vec<usize>,
    ) -> Result<()> {
        match state[i] {
            2 => return Ok(()),
            1 => return Err(CuError::CyclicComposition { name: blocks[i].name.clone() }),
            _ => {}
        }
        state[i] = 1;
        for (name, pos) in deps(&blocks[i]) {
            let j = *index.get(name.as_str()).ok_or(CuError::UndeclaredName {
                line: pos.line,
                col: pos.col,
                name: name.clone(),
            })?;
            visit(j, blocks, index, deps, state, order)?;
        }
        state[i] = 2;
        order.push(i);
        Ok(())
    }
    for i in 0..blocks.len() {
        visit(i, blocks, &index, deps, &mut state, &mut order)?;
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "model Z {\n  kind = z\n}\nmorphism id {\n  kind = identity\n  domain = Z\n}\ncommand check-pure {\n  morphism = id\n}\n";

    #[test]
    fn minimal_document() {
        let sc = parse_scenario(MINIMAL).unwrap();
        assert_eq!((sc.models.len(), sc.morphisms.len(), sc.commands.len()), (1, 1, 1));
        assert_eq!(sc.settings, Settings::default());
        assert_eq!(sc.commands[0].value("morphism"), Some("id"));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_scenario(&MINIMAL.replace("morphism = id", "morphism = phi9")).unwrap_err();
        assert_eq!(e, CuError::UndeclaredName { line: 9, col: 14, name: "phi9".into() });
        let e = parse_scenario(&MINIMAL.replace("kind = z", "kind = vonneumann")).unwrap_err();
        assert_eq!(e, CuError::UnknownModelKind { line: 2, col: 10, kind: "vonneumann".into() });
        let e = parse_scenario(&MINIMAL.replace("kind = identity", "kind = rotate")).unwrap_err();
        assert!(matches!(e, CuError::UnknownMorphismKind { line: 5, .. }), "{e}");
        let e = parse_scenario("model Z {\n  kind z\n}\n").unwrap_err();
        assert_eq!(e, CuError::Syntax { line: 2, col: 3, msg: "expected `key = value` or `}`".into() });
        let e = parse_scenario("model Z {\n  kind = z\n").unwrap_err();
        assert!(matches!(e, CuError::Syntax { line: 3, .. }), "{e}");
        let e = parse_scenario("command frobnicate {\n}\n").unwrap_err();
        assert!(matches!(e, CuError::Syntax { line: 1, col: 9, .. }), "{e}");
    }

    #[test]
    fn cycles_are_reported() {
        let text = "model Z {\n  kind = z\n}\nmorphism f {\n  kind = compose\n  parts = g\n}\nmorphism g {\n  kind = compose\n  parts = f\n}\n";
        assert!(matches!(parse_scenario(text), Err(CuError::CyclicComposition { .. })));
        let text = "model A {\n  kind = product\n  parts = A\n}\n";
        assert_eq!(parse_scenario(text), Err(CuError::CyclicComposition { name: "A".into() }));
    }

    #[test]
    fn serialization_round_trips() {
        let sc = parse_scenario(MINIMAL).unwrap();
        let text = serialize(&sc);
        assert_eq!(parse_scenario(&text).unwrap(), sc);
        assert_eq!(serialize(&parse_scenario(&text).unwrap()), text);
    }

    proptest! {
        #[test]
        fn parser_is_total(text in "[a-z{}=#\\n ,<>:+-]{0,200}") {
            let _ = parse_scenario(&text);
        }

        #[test]
        fn parser_is_total_on_mutations(at in 0usize..120, cut in 0usize..20, insert in "[a-z{}= \\n]{0,6}") {
            let mut bytes = MINIMAL.to_string();
            let at = at.min(bytes.len());
            let end = (at + cut).min(bytes.len());
            bytes.replace_range(at..end, &insert);
            if let Ok(sc) = parse_scenario(&bytes) {
                prop_assert_eq!(parse_scenario(&serialize(&sc)).unwrap(), sc);
            }
        }
    }
}
