//! Parser (and canonical printer) for SRML 2.0 rule documents.
//!
//! A rule document is rooted at `srml-def` and contains `rules-for` groups —
//! each naming the context root its rules apply to — plus an optional
//! `database` section describing table relationships for the relational
//! validator. Element names are matched by local name, so the `srml:` prefix
//! is optional.
//!
//! ```text
//! srml-def
//! ├── rules-for root="book"
//! │   └── rule-def name="tax" mode="correct" match="any"
//! │       └── rule-instance
//! │           ├── validation-error   (message text)
//! │           └── expr               (one operator)
//! └── database
//!     ├── tables     → table name=".." key=".."
//!     └── references → reference root=".." root_key=".." child=".." child_key=".."
//! ```
//!
//! Operator elements: `data`, `value-ref path=..`, `instance-value`,
//! `count-children name=..`, `binary-op op=..`, `if-expr` (three operands:
//! condition, then, else) and `reg-eval` (arithmetic template text).
//! Operands are normally wrapped in `expr` elements; a bare operator element
//! in an operand position (as published rule listings sometimes do with
//! `instance-value`) is accepted too.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{parse_template, BinaryOp, ExprAst};
use crate::path::parse_path;
use crate::xml::{local_name, Document, NodeId};

/// A parsed rule document.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleSet {
    pub groups: Vec<RulesFor>,
    pub database: Option<DatabaseSpec>,
}

impl RuleSet {
    /// A ruleset with nothing in it — used when a schema carries no SRML.
    pub fn empty() -> RuleSet {
        RuleSet {
            groups: Vec::new(),
            database: None,
        }
    }

    /// Appends another ruleset's groups (and database section, if this one
    /// has none yet) — used when a schema carries several srml-def payloads.
    pub fn merge(&mut self, other: RuleSet) {
        self.groups.extend(other.groups);
        if self.database.is_none() {
            self.database = other.database;
        }
    }
}

/// One `rules-for` group. Several groups may share a root; they apply
/// cumulatively in document order.
#[derive(Clone, Debug, PartialEq)]
pub struct RulesFor {
    pub root: String,
    pub defs: Vec<RuleDef>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleDef {
    pub target: RuleTarget,
    pub mode: Mode,
    pub match_mode: MatchMode,
    pub instances: Vec<RuleInstance>,
}

/// What a rule-def applies to: `name="qty"` targets the direct `qty`
/// children of the group root, `name="@cover"` its `cover` attribute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleTarget {
    ElementChild(String),
    Attribute(String),
}

impl RuleTarget {
    pub fn name(&self) -> &str {
        match self {
            RuleTarget::ElementChild(n) | RuleTarget::Attribute(n) => n,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Validate,
    Correct,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum MatchMode {
    Any,
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleInstance {
    /// Reported when the instance fails; may be empty.
    pub message: String,
    pub expr: ExprAst,
}

/// The `database` section: tables with their key columns, and foreign-key
/// style references between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatabaseSpec {
    pub tables: Vec<TableSpec>,
    pub references: Vec<ReferenceSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSpec {
    pub name: String,
    pub key: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceSpec {
    /// The referred ("parent") table.
    pub root: String,
    pub root_key: String,
    /// The referring table holding the foreign key.
    pub child: String,
    pub child_key: String,
}

/// Rule document syntax error. `location` is the canonical slash path of the
/// offending element inside the rule document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSyntaxError {
    pub message: String,
    pub location: String,
}

impl fmt::Display for RuleSyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule syntax error at {}: {}", self.location, self.message)
    }
}

impl core::error::Error for RuleSyntaxError {}

fn err<T>(doc: &Document, node: NodeId, message: String) -> Result<T, RuleSyntaxError> {
    Err(RuleSyntaxError {
        message,
        location: doc.node_location(node),
    })
}

/// Parses a whole document whose root must be `srml-def`.
pub fn parse_standalone(doc: &Document) -> Result<RuleSet, RuleSyntaxError> {
    let root = doc.root();
    if local_name(doc.name(root).unwrap_or("")) != "srml-def" {
        return err(
            doc,
            root,
            format!(
                "root element '{}' is not srml-def",
                doc.name(root).unwrap_or("")
            ),
        );
    }
    parse_ruleset(doc, root)
}

/// Parses the `srml-def` element at `node`.
pub fn parse_ruleset(doc: &Document, node: NodeId) -> Result<RuleSet, RuleSyntaxError> {
    let mut groups = Vec::new();
    let mut database = None;
    for child in doc.child_elements(node) {
        match local_name(doc.name(child).unwrap()) {
            "rules-for" => groups.push(parse_rules_for(doc, child)?),
            "database" => {
                if database.is_some() {
                    return err(doc, child, "more than one database section".into());
                }
                database = Some(parse_database(doc, child)?);
            }
            other => return err(doc, child, format!("unknown element '{other}' in srml-def")),
        }
    }
    if groups.is_empty() && database.is_none() {
        return err(doc, node, "srml-def contains no rules and no database section".into());
    }
    Ok(RuleSet { groups, database })
}

fn parse_rules_for(doc: &Document, node: NodeId) -> Result<RulesFor, RuleSyntaxError> {
    let root = match doc.attribute(node, "root") {
        Some(root) if !root.is_empty() => root.to_owned(),
        _ => return err(doc, node, "rules-for needs a non-empty 'root' attribute".into()),
    };
    let mut defs = Vec::new();
    for child in doc.child_elements(node) {
        match local_name(doc.name(child).unwrap()) {
            "rule-def" => defs.push(parse_rule_def(doc, child)?),
            other => return err(doc, child, format!("unknown element '{other}' in rules-for")),
        }
    }
    if defs.is_empty() {
        return err(doc, node, "rules-for contains no rule-def".into());
    }
    Ok(RulesFor { root, defs })
}

fn parse_rule_def(doc: &Document, node: NodeId) -> Result<RuleDef, RuleSyntaxError> {
    let name = match doc.attribute(node, "name") {
        Some(name) if !name.is_empty() && name != "@" => name,
        _ => return err(doc, node, "rule-def needs a non-empty 'name' attribute".into()),
    };
    let target = match name.strip_prefix('@') {
        Some(attr) => RuleTarget::Attribute(attr.to_owned()),
        None => RuleTarget::ElementChild(name.to_owned()),
    };
    let mode = match doc.attribute(node, "mode") {
        None | Some("validate") => Mode::Validate,
        Some("correct") => Mode::Correct,
        Some(other) => return err(doc, node, format!("unknown mode '{other}'")),
    };
    let match_mode = match doc.attribute(node, "match") {
        None | Some("any") => MatchMode::Any,
        Some("all") => MatchMode::All,
        Some(other) => return err(doc, node, format!("unknown match '{other}'")),
    };
    let mut instances = Vec::new();
    for child in doc.child_elements(node) {
        match local_name(doc.name(child).unwrap()) {
            "rule-instance" => instances.push(parse_instance(doc, child)?),
            other => return err(doc, child, format!("unknown element '{other}' in rule-def")),
        }
    }
    if instances.is_empty() {
        return err(doc, node, "rule-def contains no rule-instance".into());
    }
    Ok(RuleDef {
        target,
        mode,
        match_mode,
        instances,
    })
}

fn parse_instance(doc: &Document, node: NodeId) -> Result<RuleInstance, RuleSyntaxError> {
    let mut message = None;
    let mut expr = None;
    for child in doc.child_elements(node) {
        match local_name(doc.name(child).unwrap()) {
            "validation-error" => {
                if message.is_some() {
                    return err(doc, child, "more than one validation-error".into());
                }
                message = Some(doc.string_value(child));
            }
            "expr" => {
                if expr.is_some() {
                    return err(doc, child, "more than one expr in rule-instance".into());
                }
                expr = Some(parse_expr_wrapper(doc, child)?);
            }
            other => {
                return err(
                    doc,
                    child,
                    format!("unknown element '{other}' in rule-instance"),
                )
            }
        }
    }
    let expr = match expr {
        Some(expr) => expr,
        None => return err(doc, node, "rule-instance has no expr".into()),
    };
    Ok(RuleInstance {
        message: message.unwrap_or_default(),
        expr,
    })
}

/// An `expr` wrapper containing exactly one operator element.
fn parse_expr_wrapper(doc: &Document, node: NodeId) -> Result<ExprAst, RuleSyntaxError> {
    let mut children = doc.child_elements(node);
    let first = match children.next() {
        Some(first) => first,
        None => return err(doc, node, "expr is empty".into()),
    };
    if children.next().is_some() {
        return err(doc, node, "expr must contain exactly one operator".into());
    }
    parse_operator(doc, first)
}

/// An operand position: either an `expr` wrapper or a bare operator element.
fn parse_operand(doc: &Document, node: NodeId) -> Result<ExprAst, RuleSyntaxError> {
    if local_name(doc.name(node).unwrap()) == "expr" {
        parse_expr_wrapper(doc, node)
    } else {
        parse_operator(doc, node)
    }
}

fn parse_operator(doc: &Document, node: NodeId) -> Result<ExprAst, RuleSyntaxError> {
    let reject_children = |what: &str| -> Result<(), RuleSyntaxError> {
        match doc.child_elements(node).next() {
            Some(_) => err(doc, node, format!("{what} does not take child elements")),
            None => Ok(()),
        }
    };
    match local_name(doc.name(node).unwrap()) {
        "data" => {
            reject_children("data")?;
            Ok(ExprAst::Data(doc.string_value(node)))
        }
        "instance-value" => {
            reject_children("instance-value")?;
            Ok(ExprAst::InstanceValue)
        }
        "value-ref" => {
            reject_children("value-ref")?;
            let raw = match doc.attribute(node, "path") {
                Some(raw) => raw,
                None => return err(doc, node, "value-ref needs a 'path' attribute".into()),
            };
            let path = parse_path(raw)
                .map_err(|e| RuleSyntaxError {
                    message: format!("bad path '{raw}': {e}"),
                    location: doc.node_location(node),
                })?;
            Ok(ExprAst::ValueRef(path))
        }
        "count-children" => {
            reject_children("count-children")?;
            match doc.attribute(node, "name") {
                Some(name) if !name.is_empty() => Ok(ExprAst::CountChildren(name.to_owned())),
                _ => err(doc, node, "count-children needs a 'name' attribute".into()),
            }
        }
        "binary-op" => {
            let op_name = match doc.attribute(node, "op") {
                Some(op) => op,
                None => return err(doc, node, "binary-op needs an 'op' attribute".into()),
            };
            let op = match BinaryOp::from_name(op_name) {
                Some(op) => op,
                None => return err(doc, node, format!("unknown binary-op op '{op_name}'")),
            };
            let operands: Vec<NodeId> = doc.child_elements(node).collect();
            if operands.len() != 2 {
                return err(
                    doc,
                    node,
                    format!("binary-op takes two operands, found {}", operands.len()),
                );
            }
            Ok(ExprAst::Binary {
                op,
                lhs: Box::new(parse_operand(doc, operands[0])?),
                rhs: Box::new(parse_operand(doc, operands[1])?),
            })
        }
        "if-expr" => {
            let operands: Vec<NodeId> = doc.child_elements(node).collect();
            if operands.len() != 3 {
                return err(
                    doc,
                    node,
                    format!(
                        "if-expr takes condition, then and else operands, found {}",
                        operands.len()
                    ),
                );
            }
            Ok(ExprAst::If {
                condition: Box::new(parse_operand(doc, operands[0])?),
                then: Box::new(parse_operand(doc, operands[1])?),
                otherwise: Box::new(parse_operand(doc, operands[2])?),
            })
        }
        "reg-eval" => {
            reject_children("reg-eval")?;
            let template = doc.string_value(node);
            let ast = parse_template(&template).map_err(|e| RuleSyntaxError {
                message: format!("bad template: {e}"),
                location: doc.node_location(node),
            })?;
            Ok(ExprAst::RegEval { template, ast })
        }
        other => err(doc, node, format!("unknown expression element '{other}'")),
    }
}

fn parse_database(doc: &Document, node: NodeId) -> Result<DatabaseSpec, RuleSyntaxError> {
    let mut tables: Vec<TableSpec> = Vec::new();
    let mut references = Vec::new();
    for section in doc.child_elements(node) {
        match local_name(doc.name(section).unwrap()) {
            "tables" => {
                for t in doc.child_elements(section) {
                    if local_name(doc.name(t).unwrap()) != "table" {
                        return err(
                            doc,
                            t,
                            format!("unknown element '{}' in tables", doc.name(t).unwrap()),
                        );
                    }
                    let name = need_attr(doc, t, "name")?;
                    let key = need_attr(doc, t, "key")?;
                    if tables.iter().any(|existing| existing.name == name) {
                        return err(doc, t, format!("duplicate table '{name}'"));
                    }
                    tables.push(TableSpec { name, key });
                }
            }
            "references" => {
                for r in doc.child_elements(section) {
                    if local_name(doc.name(r).unwrap()) != "reference" {
                        return err(
                            doc,
                            r,
                            format!("unknown element '{}' in references", doc.name(r).unwrap()),
                        );
                    }
                    references.push(ReferenceSpec {
                        root: need_attr(doc, r, "root")?,
                        root_key: need_attr(doc, r, "root_key")?,
                        child: need_attr(doc, r, "child")?,
                        child_key: need_attr(doc, r, "child_key")?,
                    });
                }
            }
            other => return err(doc, section, format!("unknown element '{other}' in database")),
        }
    }
    for reference in &references {
        for table in [&reference.root, &reference.child] {
            if !tables.iter().any(|t| &t.name == table) {
                return err(
                    doc,
                    node,
                    format!("reference names undeclared table '{table}'"),
                );
            }
        }
    }
    Ok(DatabaseSpec { tables, references })
}

fn need_attr(doc: &Document, node: NodeId, name: &str) -> Result<String, RuleSyntaxError> {
    match doc.attribute(node, name) {
        Some(value) if !value.is_empty() => Ok(value.to_owned()),
        _ => err(
            doc,
            node,
            format!(
                "'{}' needs a non-empty '{name}' attribute",
                local_name(doc.name(node).unwrap())
            ),
        ),
    }
}

// ---------------------------------------------------------------------------
// Canonical printer

/// Prints a ruleset back to an (unprefixed) rule document. Reparsing the
/// result yields an equal [`RuleSet`].
pub fn print_ruleset(rules: &RuleSet) -> Document {
    let mut doc = Document::new("srml-def");
    let root = doc.root();
    for group in &rules.groups {
        let g = doc.append_element(root, "rules-for");
        doc.set_attribute(g, "root", &group.root);
        for def in &group.defs {
            let d = doc.append_element(g, "rule-def");
            let name = match &def.target {
                RuleTarget::Attribute(n) => format!("@{n}"),
                RuleTarget::ElementChild(n) => n.clone(),
            };
            doc.set_attribute(d, "name", &name);
            doc.set_attribute(
                d,
                "mode",
                match def.mode {
                    Mode::Validate => "validate",
                    Mode::Correct => "correct",
                },
            );
            doc.set_attribute(
                d,
                "match",
                match def.match_mode {
                    MatchMode::Any => "any",
                    MatchMode::All => "all",
                },
            );
            for instance in &def.instances {
                let i = doc.append_element(d, "rule-instance");
                let msg = doc.append_element(i, "validation-error");
                if !instance.message.is_empty() {
                    doc.append_text(msg, &instance.message);
                }
                let e = doc.append_element(i, "expr");
                print_operator(&mut doc, e, &instance.expr);
            }
        }
    }
    if let Some(database) = &rules.database {
        let db = doc.append_element(root, "database");
        let tables = doc.append_element(db, "tables");
        for table in &database.tables {
            let t = doc.append_element(tables, "table");
            doc.set_attribute(t, "name", &table.name);
            doc.set_attribute(t, "key", &table.key);
        }
        let references = doc.append_element(db, "references");
        for reference in &database.references {
            let r = doc.append_element(references, "reference");
            doc.set_attribute(r, "root", &reference.root);
            doc.set_attribute(r, "root_key", &reference.root_key);
            doc.set_attribute(r, "child", &reference.child);
            doc.set_attribute(r, "child_key", &reference.child_key);
        }
    }
    doc
}

/// Writes one operator element under `parent`; operands get `expr` wrappers.
fn print_operator(doc: &mut Document, parent: NodeId, expr: &ExprAst) {
    use alloc::string::ToString;
    match expr {
        ExprAst::Data(text) => {
            let n = doc.append_element(parent, "data");
            if !text.is_empty() {
                doc.append_text(n, text);
            }
        }
        ExprAst::InstanceValue => {
            doc.append_element(parent, "instance-value");
        }
        ExprAst::ValueRef(path) => {
            let n = doc.append_element(parent, "value-ref");
            doc.set_attribute(n, "path", &path.to_string());
        }
        ExprAst::CountChildren(name) => {
            let n = doc.append_element(parent, "count-children");
            doc.set_attribute(n, "name", name);
        }
        ExprAst::Binary { op, lhs, rhs } => {
            let n = doc.append_element(parent, "binary-op");
            doc.set_attribute(n, "op", op.name());
            for operand in [lhs, rhs] {
                let wrapper = doc.append_element(n, "expr");
                print_operator(doc, wrapper, operand);
            }
        }
        ExprAst::If {
            condition,
            then,
            otherwise,
        } => {
            let n = doc.append_element(parent, "if-expr");
            for operand in [condition, then, otherwise] {
                let wrapper = doc.append_element(n, "expr");
                print_operator(doc, wrapper, operand);
            }
        }
        ExprAst::RegEval { template, .. } => {
            let n = doc.append_element(parent, "reg-eval");
            doc.append_text(n, template);
        }
    }
}
