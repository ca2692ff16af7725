//! Rendering of meaning representations as flat token templates with
//! structural special tokens.

use crate::mr::{
    AmrChild, AmrGraph, AmrNode, DialogueActMr, MeaningRepresentation, SlotValueMr, TripleSet,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

pub const DATA_TOKEN: &str = "<data>";
pub const TEXT_TOKEN: &str = "<text>";
pub const EOS_TOKEN: &str = "<eos>";

#[derive(Debug, Error, PartialEq)]
pub enum LinearizeError {
    #[error("no special token registered for slot {0:?} and auto-registration is disabled")]
    UnregisteredSlot(String),
    #[error("invalid special token {0:?}: must be unique and delimited by '<' and '>'")]
    InvalidToken(String),
    #[error("malformed registry line {0:?}: expected role<TAB>token")]
    MalformedRegistryLine(String),
}

/// Map from structural role to its special-token surface string.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecialTokenRegistry {
    roles: BTreeMap<String, String>,
    /// Register unseen slot/act/role names on the fly when true.
    pub auto_register: bool,
}

impl SpecialTokenRegistry {
    /// Registry pre-seeded with the structural roles every pipeline needs.
    pub fn standard() -> Self {
        let mut reg = Self {
            roles: BTreeMap::new(),
            auto_register: true,
        };
        for role in ["data", "text", "eos", "subject", "predicate", "object"] {
            reg.register(role).expect("built-in roles are valid");
        }
        reg
    }

    pub fn register(&mut self, role: &str) -> Result<&str, LinearizeError> {
        if !self.roles.contains_key(role) {
            let token = format!("<{role}>");
            if self.roles.values().any(|t| t == &token) {
                return Err(LinearizeError::InvalidToken(token));
            }
            self.roles.insert(role.to_string(), token);
        }
        Ok(self.roles[role].as_str())
    }

    pub fn get(&self, role: &str) -> Option<&str> {
        self.roles.get(role).map(String::as_str)
    }

    /// Token for `role`, auto-registering when enabled.
    fn resolve(&mut self, role: &str) -> Result<String, LinearizeError> {
        if let Some(t) = self.roles.get(role) {
            return Ok(t.clone());
        }
        if !self.auto_register {
            return Err(LinearizeError::UnregisteredSlot(role.to_string()));
        }
        self.register(role).map(str::to_string)
    }

    /// All registered token surfaces, longest first so greedy matching
    /// prefers the longest token at a position.
    pub fn tokens(&self) -> Vec<String> {
        let mut ts: Vec<String> = self.roles.values().cloned().collect();
        ts.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        ts
    }

    /// Serialize as "role<TAB>token" lines, one per role.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for (role, token) in &self.roles {
            let _ = writeln!(out, "{role}\t{token}");
        }
        out
    }

    pub fn from_config(text: &str) -> Result<Self, LinearizeError> {
        let mut reg = Self {
            roles: BTreeMap::new(),
            auto_register: true,
        };
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let (role, token) = line
                .split_once('\t')
                .ok_or_else(|| LinearizeError::MalformedRegistryLine(line.to_string()))?;
            if !token.starts_with('<') || !token.ends_with('>') || token.len() < 3 {
                return Err(LinearizeError::InvalidToken(token.to_string()));
            }
            if reg.roles.values().any(|t| t == token) {
                return Err(LinearizeError::InvalidToken(token.to_string()));
            }
            reg.roles.insert(role.to_string(), token.to_string());
        }
        Ok(reg)
    }
}

/// A linearized MR: flat text plus the byte offset of every special token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizedData {
    pub text: String,
    pub special_positions: Vec<(usize, String)>,
}

/// Builder that records special-token offsets as the text grows.
#[derive(Default)]
struct LinearizedBuilder {
    text: String,
    special_positions: Vec<(usize, String)>,
}

impl LinearizedBuilder {
    fn push_str(&mut self, s: &str) {
        self.text.push_str(s);
    }

    fn push_special(&mut self, token: &str) {
        self.special_positions
            .push((self.text.len(), token.to_string()));
        self.text.push_str(token);
    }

    fn finish(self) -> LinearizedData {
        LinearizedData {
            text: self.text,
            special_positions: self.special_positions,
        }
    }
}

/// Slot rendering order for slot-value MRs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlotOrder {
    #[default]
    Source,
    /// "name" slot first, remaining slots alphabetical by name.
    NameFirstAlphabetical,
}

impl std::str::FromStr for SlotOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "source" => Ok(SlotOrder::Source),
            "name-first-alphabetical" => Ok(SlotOrder::NameFirstAlphabetical),
            other => Err(format!(
                "unknown slot order {other:?}; expected \"source\" or \"name-first-alphabetical\""
            )),
        }
    }
}

/// Insert a space before each uppercase letter following a lowercase one,
/// then lowercase everything: "leaderName" -> "leader name".
pub fn split_camel_case(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 4);
    let mut prev_lower = false;
    for c in s.chars() {
        if c.is_uppercase() && prev_lower {
            out.push(' ');
        }
        prev_lower = c.is_lowercase();
        out.extend(c.to_lowercase());
    }
    out
}

/// Uppercase the first character, leave the rest untouched.
fn sentence_case(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Surface form of a triple subject/object: underscores become spaces,
/// then sentence-case.
pub fn entity_surface(s: &str) -> String {
    sentence_case(&s.replace('_', " "))
}

pub fn linearize_triples(
    mr: &TripleSet,
    reg: &mut SpecialTokenRegistry,
) -> Result<LinearizedData, LinearizeError> {
    let subject_tok = reg.resolve("subject")?;
    let predicate_tok = reg.resolve("predicate")?;
    let object_tok = reg.resolve("object")?;
    let mut b = LinearizedBuilder::default();
    for (i, t) in mr.triples.iter().enumerate() {
        if i > 0 {
            b.push_str(" ");
        }
        b.push_special(&subject_tok);
        b.push_str(" ");
        b.push_str(&entity_surface(&t.subject));
        b.push_str(" ");
        b.push_special(&predicate_tok);
        b.push_str(" ");
        b.push_str(&split_camel_case(&t.predicate));
        b.push_str(" ");
        b.push_special(&object_tok);
        b.push_str(" ");
        b.push_str(&entity_surface(&t.object));
    }
    Ok(b.finish())
}

/// Strip a trailing sense suffix like "-01" from a concept.
fn strip_sense(concept: &str) -> &str {
    match concept.rsplit_once('-') {
        Some((base, suffix))
            if !base.is_empty() && !suffix.is_empty() && suffix.bytes().all(|b| b.is_ascii_digit()) =>
        {
            base
        }
        _ => concept,
    }
}

/// A node is a merged entity when its concept is "name" and it carries
/// :opN attributes; the entity surface is the op values joined by spaces.
fn merged_entity(node: &AmrNode) -> Option<String> {
    if node.concept != "name" {
        return None;
    }
    let ops: Vec<&str> = node
        .attributes
        .iter()
        .filter(|(role, _)| role.starts_with(":op"))
        .map(|(_, v)| v.as_str())
        .collect();
    if ops.is_empty() {
        None
    } else {
        Some(ops.join(" "))
    }
}

fn find_concept_in(node: &AmrNode, var: &str) -> Option<String> {
    if node.variable == var {
        return Some(strip_sense(&node.concept).to_string());
    }
    node.children.iter().find_map(|(_, c)| match c {
        AmrChild::Node(n) => find_concept_in(n, var),
        AmrChild::Ref(_) => None,
    })
}

pub fn linearize_amr(
    mr: &AmrGraph,
    reg: &mut SpecialTokenRegistry,
) -> Result<LinearizedData, LinearizeError> {
    let mut b = LinearizedBuilder::default();
    linearize_amr_node_rooted(&mr.root, &mr.root, reg, &mut b)?;
    Ok(b.finish())
}

fn linearize_amr_node_rooted(
    node: &AmrNode,
    root: &AmrNode,
    reg: &mut SpecialTokenRegistry,
    b: &mut LinearizedBuilder,
) -> Result<(), LinearizeError> {
    b.push_str("(");
    b.push_str(strip_sense(&node.concept));
    for (role, value) in &node.attributes {
        if role == ":wiki" {
            continue;
        }
        let token = reg.resolve(role)?;
        b.push_str(" ");
        b.push_special(&token);
        b.push_str(" (");
        b.push_str(value);
        b.push_str(")");
    }
    for (role, child) in &node.children {
        let token = reg.resolve(role)?;
        b.push_str(" ");
        b.push_special(&token);
        b.push_str(" ");
        match child {
            AmrChild::Node(n) => {
                if let Some(entity) = merged_entity(n) {
                    b.push_str("(");
                    b.push_str(&entity);
                    b.push_str(")");
                } else {
                    linearize_amr_node_rooted(n, root, reg, b)?;
                }
            }
            AmrChild::Ref(var) => {
                b.push_str("(");
                b.push_str(find_concept_in(root, var).unwrap_or_default().as_str());
                b.push_str(")");
            }
        }
    }
    b.push_str(")");
    Ok(())
}

fn ordered_slots(mr: &SlotValueMr, order: SlotOrder) -> Vec<(String, String)> {
    let mut slots = mr.slots.clone();
    if order == SlotOrder::NameFirstAlphabetical {
        slots.sort_by(|a, b| {
            let a_name = (a.0 != "name", a.0.clone());
            let b_name = (b.0 != "name", b.0.clone());
            a_name.cmp(&b_name)
        });
    }
    slots
}

pub fn linearize_slots(
    mr: &SlotValueMr,
    reg: &mut SpecialTokenRegistry,
    order: SlotOrder,
) -> Result<LinearizedData, LinearizeError> {
    let mut b = LinearizedBuilder::default();
    for (i, (name, value)) in ordered_slots(mr, order).iter().enumerate() {
        let token = reg.resolve(name)?;
        if i > 0 {
            b.push_str(" ");
        }
        b.push_special(&token);
        b.push_str(" ");
        b.push_str(name);
        b.push_str("=[");
        b.push_str(value);
        b.push_str("];");
    }
    Ok(b.finish())
}

pub fn linearize_dialogue_act(
    mr: &DialogueActMr,
    reg: &mut SpecialTokenRegistry,
) -> Result<LinearizedData, LinearizeError> {
    let act_token = reg.resolve(&mr.act)?;
    let mut b = LinearizedBuilder::default();
    b.push_special(&act_token);
    b.push_str(" ");
    b.push_str(&mr.act);
    b.push_str(" (");
    for (i, (name, value)) in mr.slots.iter().enumerate() {
        let token = reg.resolve(name)?;
        if i > 0 {
            b.push_str(", ");
        }
        b.push_special(&token);
        b.push_str(" ");
        b.push_str(name);
        b.push_str(": [");
        b.push_str(value);
        b.push_str("]");
    }
    if !mr.slots.is_empty() {
        b.push_str(" ");
    }
    b.push_special(&act_token);
    b.push_str(")");
    Ok(b.finish())
}

/// Linearize any MR family; slot MRs use `order`, the rest ignore it.
pub fn linearize(
    mr: &MeaningRepresentation,
    reg: &mut SpecialTokenRegistry,
    order: SlotOrder,
) -> Result<LinearizedData, LinearizeError> {
    match mr {
        MeaningRepresentation::Triples(t) => linearize_triples(t, reg),
        MeaningRepresentation::Amr(g) => linearize_amr(g, reg),
        MeaningRepresentation::Slots(s) => linearize_slots(s, reg, order),
        MeaningRepresentation::DialogueAct(d) => linearize_dialogue_act(d, reg),
    }
}

fn amr_leaf_values(node: &AmrNode, out: &mut Vec<String>) {
    for (role, value) in &node.attributes {
        if role != ":wiki" {
            out.push(value.clone());
        }
    }
    for (_, child) in &node.children {
        if let AmrChild::Node(n) = child {
            if let Some(entity) = merged_entity(n) {
                out.push(entity);
            } else if n.children.is_empty()
                && n.attributes.iter().all(|(r, _)| r == ":wiki")
            {
                out.push(strip_sense(&n.concept).to_string());
            } else {
                amr_leaf_values(n, out);
            }
        }
    }
}

/// Values a faithful text is expected to realize: slot values, triple
/// subjects/objects (linearized surface form), or AMR leaves.
pub fn extract_values(mr: &MeaningRepresentation) -> Vec<String> {
    match mr {
        MeaningRepresentation::Triples(t) => t
            .triples
            .iter()
            .flat_map(|t| [entity_surface(&t.subject), entity_surface(&t.object)])
            .collect(),
        MeaningRepresentation::Slots(s) => s.slots.iter().map(|(_, v)| v.clone()).collect(),
        MeaningRepresentation::DialogueAct(d) => {
            d.slots.iter().map(|(_, v)| v.clone()).collect()
        }
        MeaningRepresentation::Amr(g) => {
            let mut out = Vec::new();
            amr_leaf_values(&g.root, &mut out);
            out
        }
    }
}
