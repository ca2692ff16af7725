//! Typed meaning representations and parsers for their raw serializations.
//!
//! Four MR families are supported: RDF-style triple sets, AMR graphs in
//! penman notation, flat slot-value lists, and dialogue acts wrapping a
//! slot-value list.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MrError {
    #[error("malformed triple {record:?}: expected exactly two '|' separators")]
    MalformedTriple { record: String },
    #[error("empty field in triple {record:?}")]
    EmptyField { record: String },
    #[error("unbalanced parentheses in penman input")]
    UnbalancedParens,
    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),
    #[error("reference to undefined variable {0:?}")]
    DanglingReference(String),
    #[error("malformed slot {item:?}: expected name[value]")]
    MalformedSlot { item: String },
    #[error("malformed dialogue act {0:?}")]
    MalformedAct(String),
    #[error("unknown dialogue act {0:?}")]
    UnknownAct(String),
    #[error("empty input")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleSet {
    pub triples: Vec<Triple>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmrChild {
    Node(AmrNode),
    /// Re-entrant reference to a variable defined elsewhere in the graph.
    Ref(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmrNode {
    pub variable: String,
    /// Concept with its sense suffix retained, e.g. "respond-01".
    pub concept: String,
    /// Constant-valued roles: quoted strings (quotes stripped), numbers, bare symbols.
    pub attributes: Vec<(String, String)>,
    pub children: Vec<(String, AmrChild)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmrGraph {
    pub root: AmrNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotValueMr {
    pub slots: Vec<(String, String)>,
}

impl SlotValueMr {
    /// Duplicate slot names are permitted but worth surfacing to callers.
    pub fn has_duplicate_names(&self) -> bool {
        let mut seen = HashSet::new();
        self.slots.iter().any(|(n, _)| !seen.insert(n.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueActMr {
    pub act: String,
    pub slots: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mr_type", content = "mr")]
pub enum MeaningRepresentation {
    #[serde(rename = "triples")]
    Triples(TripleSet),
    #[serde(rename = "amr")]
    Amr(AmrGraph),
    #[serde(rename = "slots")]
    Slots(SlotValueMr),
    #[serde(rename = "dialogue_act")]
    DialogueAct(DialogueActMr),
}

/// Parse one or more "subject | predicate | object" records.
///
/// Records are separated by `delimiter` (newline by default via
/// [`parse_triples`]); fields are whitespace-trimmed.
pub fn parse_triples_with_delimiter(raw: &str, delimiter: &str) -> Result<TripleSet, MrError> {
    let mut triples = Vec::new();
    for record in raw.split(delimiter) {
        let record = record.trim();
        if record.is_empty() {
            continue;
        }
        let fields: Vec<&str> = record.split('|').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(MrError::MalformedTriple {
                record: record.to_string(),
            });
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(MrError::EmptyField {
                record: record.to_string(),
            });
        }
        triples.push(Triple {
            subject: fields[0].to_string(),
            predicate: fields[1].to_string(),
            object: fields[2].to_string(),
        });
    }
    if triples.is_empty() {
        return Err(MrError::EmptyInput);
    }
    Ok(TripleSet { triples })
}

pub fn parse_triples(raw: &str) -> Result<TripleSet, MrError> {
    parse_triples_with_delimiter(raw, "\n")
}

pub fn serialize_triples(mr: &TripleSet) -> String {
    mr.triples
        .iter()
        .map(|t| format!("{} | {} | {}", t.subject, t.predicate, t.object))
        .collect::<Vec<_>>()
        .join("\n")
}

// ---------------------------------------------------------------------------
// Penman (AMR) parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum PenmanToken {
    Open,
    Close,
    Slash,
    Role(String),
    Str(String),
    Symbol(String),
}

fn lex_penman(raw: &str) -> Result<Vec<PenmanToken>, MrError> {
    let mut tokens = Vec::new();
    let mut chars = raw.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                tokens.push(PenmanToken::Open);
            }
            ')' => {
                chars.next();
                tokens.push(PenmanToken::Close);
            }
            '/' => {
                chars.next();
                tokens.push(PenmanToken::Slash);
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                        None => return Err(MrError::UnbalancedParens),
                    }
                }
                tokens.push(PenmanToken::Str(s));
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            ':' => {
                chars.next();
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || "()/\"".contains(ch) {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                tokens.push(PenmanToken::Role(s));
            }
            _ => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || "()/\":".contains(ch) {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                tokens.push(PenmanToken::Symbol(s));
            }
        }
    }
    Ok(tokens)
}

/// Bare tokens shaped like penman variables (a lowercase letter run of
/// length <= 2 followed by optional digits) are treated as re-entrant
/// references; anything else in value position is a constant.
fn looks_like_variable(s: &str) -> bool {
    let letters: String = s.chars().take_while(|c| c.is_ascii_lowercase()).collect();
    if letters.is_empty() || letters.len() > 2 {
        return false;
    }
    s[letters.len()..].chars().all(|c| c.is_ascii_digit()) && !s.is_empty()
}

struct PenmanParser {
    tokens: Vec<PenmanToken>,
    pos: usize,
    seen_vars: HashSet<String>,
    refs: Vec<String>,
}

impl PenmanParser {
    fn peek(&self) -> Option<&PenmanToken> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<PenmanToken> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse_node(&mut self) -> Result<AmrNode, MrError> {
        match self.next() {
            Some(PenmanToken::Open) => {}
            _ => return Err(MrError::UnbalancedParens),
        }
        let variable = match self.next() {
            Some(PenmanToken::Symbol(s)) => s,
            _ => return Err(MrError::UnbalancedParens),
        };
        if !self.seen_vars.insert(variable.clone()) {
            return Err(MrError::DuplicateVariable(variable));
        }
        match self.next() {
            Some(PenmanToken::Slash) => {}
            _ => return Err(MrError::UnbalancedParens),
        }
        let concept = match self.next() {
            Some(PenmanToken::Symbol(s)) => s,
            _ => return Err(MrError::UnbalancedParens),
        };
        let mut node = AmrNode {
            variable,
            concept,
            attributes: Vec::new(),
            children: Vec::new(),
        };
        loop {
            match self.peek() {
                Some(PenmanToken::Close) => {
                    self.next();
                    return Ok(node);
                }
                Some(PenmanToken::Role(_)) => {
                    let role = match self.next() {
                        Some(PenmanToken::Role(r)) => format!(":{r}"),
                        _ => unreachable!(),
                    };
                    match self.peek() {
                        Some(PenmanToken::Open) => {
                            let child = self.parse_node()?;
                            node.children.push((role, AmrChild::Node(child)));
                        }
                        Some(PenmanToken::Str(_)) => {
                            if let Some(PenmanToken::Str(s)) = self.next() {
                                node.attributes.push((role, s));
                            }
                        }
                        Some(PenmanToken::Symbol(_)) => {
                            if let Some(PenmanToken::Symbol(s)) = self.next() {
                                if looks_like_variable(&s) {
                                    self.refs.push(s.clone());
                                    node.children.push((role, AmrChild::Ref(s)));
                                } else {
                                    node.attributes.push((role, s));
                                }
                            }
                        }
                        _ => return Err(MrError::UnbalancedParens),
                    }
                }
                _ => return Err(MrError::UnbalancedParens),
            }
        }
    }
}

/// Parse an AMR graph in penman notation.
///
/// Re-entrancies may reference variables defined later in the input; they
/// are validated once the whole graph is read.
pub fn parse_amr(raw: &str) -> Result<AmrGraph, MrError> {
    let tokens = lex_penman(raw)?;
    if tokens.is_empty() {
        return Err(MrError::EmptyInput);
    }
    let mut parser = PenmanParser {
        tokens,
        pos: 0,
        seen_vars: HashSet::new(),
        refs: Vec::new(),
    };
    let root = parser.parse_node()?;
    if parser.pos != parser.tokens.len() {
        return Err(MrError::UnbalancedParens);
    }
    for r in &parser.refs {
        if !parser.seen_vars.contains(r) {
            return Err(MrError::DanglingReference(r.clone()));
        }
    }
    Ok(AmrGraph { root })
}

fn needs_quotes(value: &str) -> bool {
    value.is_empty()
        || value
            .chars()
            .any(|c| c.is_whitespace() || "()/\":".contains(c))
        || looks_like_variable(value)
}

fn serialize_amr_node(node: &AmrNode, out: &mut String) {
    out.push('(');
    out.push_str(&node.variable);
    out.push_str(" / ");
    out.push_str(&node.concept);
    for (role, value) in &node.attributes {
        out.push(' ');
        out.push_str(role);
        out.push(' ');
        if needs_quotes(value) {
            out.push('"');
            out.push_str(value);
            out.push('"');
        } else {
            out.push_str(value);
        }
    }
    for (role, child) in &node.children {
        out.push(' ');
        out.push_str(role);
        out.push(' ');
        match child {
            AmrChild::Node(n) => serialize_amr_node(n, out),
            AmrChild::Ref(v) => out.push_str(v),
        }
    }
    out.push(')');
}

pub fn serialize_amr(graph: &AmrGraph) -> String {
    let mut out = String::new();
    serialize_amr_node(&graph.root, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Slot-value and dialogue-act parsing
// ---------------------------------------------------------------------------

/// Split "name[value], name[value], ..." at commas outside brackets.
fn split_slot_items(raw: &str) -> Vec<&str> {
    let mut items = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in raw.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                items.push(&raw[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(&raw[start..]);
    items
}

fn parse_slot_item(item: &str) -> Result<(String, String), MrError> {
    let item = item.trim();
    let open = item.find('[');
    let malformed = || MrError::MalformedSlot {
        item: item.to_string(),
    };
    let open = open.ok_or_else(malformed)?;
    if !item.ends_with(']') {
        return Err(malformed());
    }
    let name = item[..open].trim();
    let value = &item[open + 1..item.len() - 1];
    if name.is_empty() || value.contains('[') {
        return Err(malformed());
    }
    Ok((name.to_string(), value.to_string()))
}

/// Parse a comma-separated "name[value]" list.
pub fn parse_slot_mr(raw: &str) -> Result<SlotValueMr, MrError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(MrError::EmptyInput);
    }
    let slots = split_slot_items(raw)
        .into_iter()
        .map(parse_slot_item)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SlotValueMr { slots })
}

pub fn serialize_slot_mr(mr: &SlotValueMr) -> String {
    mr.slots
        .iter()
        .map(|(n, v)| format!("{n}[{v}]"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parse "act(slot[value], ...)". When `inventory` is given, the act name
/// must be a member of it.
pub fn parse_dialogue_act_with_inventory(
    raw: &str,
    inventory: Option<&HashSet<String>>,
) -> Result<DialogueActMr, MrError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(MrError::EmptyInput);
    }
    let malformed = || MrError::MalformedAct(raw.to_string());
    let open = raw.find('(').ok_or_else(malformed)?;
    if !raw.ends_with(')') {
        return Err(malformed());
    }
    let act = raw[..open].trim();
    if act.is_empty() || act.contains(')') {
        return Err(malformed());
    }
    if let Some(inv) = inventory {
        if !inv.contains(act) {
            return Err(MrError::UnknownAct(act.to_string()));
        }
    }
    let inner = raw[open + 1..raw.len() - 1].trim();
    if inner.contains('(') || inner.contains(')') {
        return Err(malformed());
    }
    let slots = if inner.is_empty() {
        Vec::new()
    } else {
        split_slot_items(inner)
            .into_iter()
            .map(parse_slot_item)
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(DialogueActMr {
        act: act.to_string(),
        slots,
    })
}

pub fn parse_dialogue_act(raw: &str) -> Result<DialogueActMr, MrError> {
    parse_dialogue_act_with_inventory(raw, None)
}

pub fn serialize_dialogue_act(mr: &DialogueActMr) -> String {
    let inner = mr
        .slots
        .iter()
        .map(|(n, v)| format!("{n}[{v}]"))
        .collect::<Vec<_>>()
        .join(", ");
    format!("{}({})", mr.act, inner)
}

/// Parse `raw` as the MR family named by `mr_type` (one of "triples",
/// "amr", "slots", "dialogue_act").
pub fn parse_mr(mr_type: &str, raw: &str) -> Result<MeaningRepresentation, MrError> {
    match mr_type {
        "triples" => Ok(MeaningRepresentation::Triples(parse_triples(raw)?)),
        "amr" => Ok(MeaningRepresentation::Amr(parse_amr(raw)?)),
        "slots" => Ok(MeaningRepresentation::Slots(parse_slot_mr(raw)?)),
        "dialogue_act" => Ok(MeaningRepresentation::DialogueAct(parse_dialogue_act(
            raw,
        )?)),
        other => Err(MrError::MalformedAct(format!("unknown mr_type {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_golden_style_triple() {
        let ts = parse_triples("Aarhus | leaderName | Jacob_Bundsgaard").unwrap();
        assert_eq!(
            ts.triples,
            vec![Triple {
                subject: "Aarhus".into(),
                predicate: "leaderName".into(),
                object: "Jacob_Bundsgaard".into(),
            }]
        );
    }

    #[test]
    fn preserves_triple_order() {
        let ts = parse_triples("A | p | B\nA | p | B").unwrap();
        assert_eq!(ts.triples.len(), 2);
    }

    #[test]
    fn rejects_wrong_separator_count() {
        assert!(matches!(
            parse_triples("A | p"),
            Err(MrError::MalformedTriple { .. })
        ));
    }

    #[test]
    fn rejects_empty_triple_field() {
        assert!(matches!(
            parse_triples("A |  | B"),
            Err(MrError::EmptyField { .. })
        ));
    }

    #[test]
    fn triple_round_trip() {
        let ts = parse_triples("A | p | B\nC | q | D").unwrap();
        assert_eq!(parse_triples(&serialize_triples(&ts)).unwrap(), ts);
    }

    const FIGURE_AMR: &str = r#"(r / respond-01
 :ARG0 (c / country :wiki "United_States"
   :name (n / name :op1 "United"
   :op2 "States"))
 :ARG1 (d / develop-01
   :mod (t / that))
 :ARG2 (c2 / condemn-01
   :manner (s / swift)))"#;

    #[test]
    fn parses_golden_amr() {
        let g = parse_amr(FIGURE_AMR).unwrap();
        assert_eq!(g.root.concept, "respond-01");
        let roles: Vec<&str> = g.root.children.iter().map(|(r, _)| r.as_str()).collect();
        assert_eq!(roles, vec![":ARG0", ":ARG1", ":ARG2"]);
        match &g.root.children[0].1 {
            AmrChild::Node(c) => {
                assert_eq!(c.concept, "country");
                assert_eq!(c.attributes[0], (":wiki".into(), "United_States".into()));
            }
            _ => panic!("expected node child"),
        }
    }

    #[test]
    fn parses_minimal_amr() {
        let g = parse_amr("(a / apple)").unwrap();
        assert_eq!(g.root.concept, "apple");
        assert!(g.root.children.is_empty());
        assert!(g.root.attributes.is_empty());
    }

    #[test]
    fn rejects_duplicate_variable() {
        assert_eq!(
            parse_amr("(a / x :mod (a / y))"),
            Err(MrError::DuplicateVariable("a".into()))
        );
    }

    #[test]
    fn resolves_reentrancy_including_forward_refs() {
        let g = parse_amr("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        let go = match &g.root.children[1].1 {
            AmrChild::Node(n) => n,
            _ => panic!(),
        };
        assert_eq!(go.children[0].1, AmrChild::Ref("b".into()));
    }

    #[test]
    fn rejects_dangling_reference() {
        assert_eq!(
            parse_amr("(a / apple :mod b)"),
            Err(MrError::DanglingReference("b".into()))
        );
    }

    #[test]
    fn rejects_unbalanced_parens() {
        assert_eq!(parse_amr("(a / apple"), Err(MrError::UnbalancedParens));
        assert_eq!(parse_amr("(a / apple))"), Err(MrError::UnbalancedParens));
    }

    #[test]
    fn amr_round_trip_is_identical() {
        let g = parse_amr(FIGURE_AMR).unwrap();
        assert_eq!(parse_amr(&serialize_amr(&g)).unwrap(), g);
    }

    #[test]
    fn parses_golden_slot_mr() {
        let mr = parse_slot_mr("name[Zizzi], eatType[coffee shop], area[riverside]").unwrap();
        assert_eq!(
            mr.slots,
            vec![
                ("name".to_string(), "Zizzi".to_string()),
                ("eatType".to_string(), "coffee shop".to_string()),
                ("area".to_string(), "riverside".to_string()),
            ]
        );
    }

    #[test]
    fn parses_single_slot() {
        assert_eq!(
            parse_slot_mr("a[b]").unwrap().slots,
            vec![("a".to_string(), "b".to_string())]
        );
    }

    #[test]
    fn rejects_missing_brackets() {
        assert!(matches!(
            parse_slot_mr("a[b], c"),
            Err(MrError::MalformedSlot { .. })
        ));
    }

    #[test]
    fn slot_round_trip() {
        let mr = parse_slot_mr("name[Zizzi], eatType[coffee shop]").unwrap();
        assert_eq!(parse_slot_mr(&serialize_slot_mr(&mr)).unwrap(), mr);
    }

    #[test]
    fn flags_duplicate_slot_names() {
        assert!(parse_slot_mr("a[b], a[c]").unwrap().has_duplicate_names());
        assert!(!parse_slot_mr("a[b], c[d]").unwrap().has_duplicate_names());
    }

    #[test]
    fn parses_golden_dialogue_act() {
        let mr = parse_dialogue_act("request( developer[EA Canada], specifier[favorite])").unwrap();
        assert_eq!(mr.act, "request");
        assert_eq!(
            mr.slots,
            vec![
                ("developer".to_string(), "EA Canada".to_string()),
                ("specifier".to_string(), "favorite".to_string()),
            ]
        );
    }

    #[test]
    fn parses_zero_slot_act() {
        let mr = parse_dialogue_act("inform()").unwrap();
        assert_eq!(mr.act, "inform");
        assert!(mr.slots.is_empty());
    }

    #[test]
    fn rejects_unclosed_act() {
        assert!(matches!(
            parse_dialogue_act("request(developer[EA Canada]"),
            Err(MrError::MalformedAct(_))
        ));
    }

    #[test]
    fn enforces_act_inventory() {
        let inv: HashSet<String> = ["inform".to_string()].into_iter().collect();
        assert_eq!(
            parse_dialogue_act_with_inventory("request(a[b])", Some(&inv)),
            Err(MrError::UnknownAct("request".into()))
        );
        assert!(parse_dialogue_act_with_inventory("inform(a[b])", Some(&inv)).is_ok());
    }

    #[test]
    fn dialogue_act_round_trip() {
        let mr = parse_dialogue_act("request(developer[EA Canada], specifier[favorite])").unwrap();
        assert_eq!(parse_dialogue_act(&serialize_dialogue_act(&mr)).unwrap(), mr);
    }
}
