//! Relational trigger simulation.
//!
//! Rule sets can carry a `database` section describing tables and the
//! foreign-key references between them. This module keeps those tables as
//! in-memory stores of string rows (loaded from CSV text), builds the
//! per-row context tree — a small XML document in which every row becomes an
//! element named after its table, columns become attributes, and child rows
//! nest under the row they reference — and validates insert / update /
//! delete operations by running the rule engine over the hypothetical
//! post-state, the way a database trigger would.
//!
//! Everything here is pure: [`fire_trigger`] never touches the input store,
//! and [`apply_op`] returns a new store, committing only when the report is
//! valid.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::NumberStyle;
use crate::report::{Severity, ValidationReport};
use crate::rules::{DatabaseSpec, RuleSet, RuleSyntaxError, RuleTarget};
use crate::validator::{validate_styled, ValidationOptions};
use crate::xml::{Document, NodeId};

// ---------------------------------------------------------------------------
// CSV text codec (RFC 4180 quoting; LF or CRLF record breaks)

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvError {
    pub message: String,
    /// 1-based line where the problem was noticed.
    pub line: usize,
}

impl fmt::Display for CsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl core::error::Error for CsvError {}

/// Parses CSV text into records of fields. Quoted fields may contain commas,
/// quotes (doubled) and line breaks. A trailing newline does not produce an
/// empty record.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<String>>, CsvError> {
    let mut records = Vec::new();
    let mut record: Vec<String> = Vec::new();
    let mut field = String::new();
    let mut line = 1usize;
    let mut chars = text.chars().peekable();
    // A quote only opens a quoted field right at the start of a field; a
    // closed empty quoted field (`""`) must still flush at end of input.
    let mut at_field_start = true;

    while let Some(c) = chars.next() {
        match c {
            '"' if at_field_start => {
                at_field_start = false;
                loop {
                    match chars.next() {
                        Some('"') => {
                            if chars.peek() == Some(&'"') {
                                chars.next();
                                field.push('"');
                            } else {
                                break;
                            }
                        }
                        Some('\n') => {
                            line += 1;
                            field.push('\n');
                        }
                        Some(other) => field.push(other),
                        None => {
                            return Err(CsvError {
                                message: "unterminated quoted field".to_owned(),
                                line,
                            })
                        }
                    }
                }
                match chars.peek() {
                    Some(',') | Some('\n') | Some('\r') | None => {}
                    Some(other) => {
                        return Err(CsvError {
                            message: format!("unexpected '{other}' after a closing quote"),
                            line,
                        })
                    }
                }
            }
            '"' => {
                return Err(CsvError {
                    message: "quote inside an unquoted field".to_owned(),
                    line,
                })
            }
            ',' => {
                record.push(core::mem::take(&mut field));
                at_field_start = true;
            }
            '\r' | '\n' => {
                if c == '\r' && chars.peek() == Some(&'\n') {
                    chars.next();
                }
                record.push(core::mem::take(&mut field));
                records.push(core::mem::take(&mut record));
                at_field_start = true;
                line += 1;
            }
            other => {
                field.push(other);
                at_field_start = false;
            }
        }
    }
    if !record.is_empty() || !field.is_empty() || !at_field_start {
        record.push(field);
        records.push(record);
    }
    Ok(records)
}

/// Renders records back to CSV text (LF record breaks, trailing newline).
/// Fields containing commas, quotes or line breaks are quoted.
pub fn format_csv(records: &[Vec<String>]) -> String {
    let mut out = String::new();
    for record in records {
        for (i, fieldv) in record.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            if fieldv.contains([',', '"', '\n', '\r']) {
                out.push('"');
                for c in fieldv.chars() {
                    if c == '"' {
                        out.push('"');
                    }
                    out.push(c);
                }
                out.push('"');
            } else {
                out.push_str(fieldv);
            }
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Store

/// One row: an ordered list of (column, value) cells. Rows held by a
/// [`Table`] always carry the table's full column set in header order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Row {
    cells: Vec<(String, String)>,
}

impl Row {
    pub fn new() -> Row {
        Row::default()
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Row
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Row {
            cells: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    pub fn get(&self, column: &str) -> Option<&str> {
        self.cells
            .iter()
            .find(|(c, _)| c == column)
            .map(|(_, v)| v.as_str())
    }

    /// Overwrites the cell, or appends one when the column is new.
    pub fn set(&mut self, column: &str, value: &str) {
        for (c, v) in &mut self.cells {
            if c == column {
                *v = value.to_owned();
                return;
            }
        }
        self.cells.push((column.to_owned(), value.to_owned()));
    }

    pub fn cells(&self) -> &[(String, String)] {
        &self.cells
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    /// The key column (values unique across rows).
    pub key: String,
    /// Header order; every row has exactly these cells in this order.
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    /// Index of the row with the given key value.
    pub fn position(&self, key_value: &str) -> Option<usize> {
        self.rows
            .iter()
            .position(|r| r.get(&self.key) == Some(key_value))
    }

    pub fn row(&self, key_value: &str) -> Option<&Row> {
        self.position(key_value).map(|i| &self.rows[i])
    }

    /// The table as CSV text: header row, then data rows in storage order.
    pub fn to_csv(&self) -> String {
        let mut records = Vec::with_capacity(self.rows.len() + 1);
        records.push(self.columns.clone());
        for row in &self.rows {
            records.push(row.cells.iter().map(|(_, v)| v.clone()).collect());
        }
        format_csv(&records)
    }

    /// Checks the row against the table's columns and reorders its cells to
    /// header order.
    fn normalize(&self, row: &Row) -> Result<Row, String> {
        let mut cells = Vec::with_capacity(self.columns.len());
        for column in &self.columns {
            match row.get(column) {
                Some(value) => cells.push((column.clone(), value.to_owned())),
                None => return Err(format!("missing column '{column}'")),
            }
        }
        for (column, _) in &row.cells {
            if !self.columns.contains(column) {
                return Err(format!("unknown column '{column}'"));
            }
        }
        Ok(Row { cells })
    }
}

/// Named tables, keyed by table name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableStore {
    tables: Vec<Table>,
}

impl TableStore {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn table_mut(&mut self, name: &str) -> Option<&mut Table> {
        self.tables.iter_mut().find(|t| t.name == name)
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IngestError {
    pub table: String,
    pub message: String,
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "table '{}': {}", self.table, self.message)
    }
}

impl core::error::Error for IngestError {}

/// Builds a store from `(table name, CSV text)` pairs, one per table declared
/// in the spec. The first CSV record is the header and must contain the
/// table's key column; key values must be unique.
pub fn build_store(
    spec: &DatabaseSpec,
    files: &[(String, String)],
) -> Result<TableStore, IngestError> {
    let mut tables = Vec::with_capacity(spec.tables.len());
    for decl in &spec.tables {
        let fail = |message: String| IngestError {
            table: decl.name.clone(),
            message,
        };
        let text = files
            .iter()
            .find(|(name, _)| *name == decl.name)
            .map(|(_, text)| text)
            .ok_or_else(|| fail("no data".to_owned()))?;
        let records = parse_csv(text).map_err(|e| fail(format!("bad CSV: {e}")))?;
        let mut records = records.into_iter();
        let columns = records.next().ok_or_else(|| fail("no header row".to_owned()))?;
        if !columns.contains(&decl.key) {
            return Err(fail(format!("header lacks the key column '{}'", decl.key)));
        }
        let mut seen_columns = BTreeSet::new();
        for column in &columns {
            if !seen_columns.insert(column) {
                return Err(fail(format!("duplicate column '{column}'")));
            }
        }
        let mut rows = Vec::new();
        let mut seen_keys = BTreeSet::new();
        for (index, record) in records.enumerate() {
            if record.len() != columns.len() {
                return Err(fail(format!(
                    "row {} has {} fields, expected {}",
                    index + 1,
                    record.len(),
                    columns.len()
                )));
            }
            let row = Row {
                cells: columns.iter().cloned().zip(record).collect(),
            };
            let key_value = row.get(&decl.key).unwrap().to_owned();
            if !seen_keys.insert(key_value.clone()) {
                return Err(fail(format!("duplicate key '{key_value}'")));
            }
            rows.push(row);
        }
        tables.push(Table {
            name: decl.name.clone(),
            key: decl.key.clone(),
            columns,
            rows,
        });
    }
    Ok(TableStore { tables })
}

// ---------------------------------------------------------------------------
// Context trees

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextError {
    pub message: String,
}

impl fmt::Display for ContextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "context error: {}", self.message)
    }
}

impl core::error::Error for ContextError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleError {
    pub message: String,
}

impl fmt::Display for CycleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cycle error: {}", self.message)
    }
}

impl core::error::Error for CycleError {}

/// Any failure on the relational path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationalError {
    Ingest(IngestError),
    Context(ContextError),
    Cycle(CycleError),
    /// A rule set unusable in relational mode (element-child targets).
    Rules(RuleSyntaxError),
    /// A malformed row operation.
    Op(String),
}

impl fmt::Display for RelationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationalError::Ingest(e) => e.fmt(f),
            RelationalError::Context(e) => e.fmt(f),
            RelationalError::Cycle(e) => e.fmt(f),
            RelationalError::Rules(e) => e.fmt(f),
            RelationalError::Op(msg) => write!(f, "bad row operation: {msg}"),
        }
    }
}

impl core::error::Error for RelationalError {}

impl From<IngestError> for RelationalError {
    fn from(e: IngestError) -> Self {
        RelationalError::Ingest(e)
    }
}

impl From<ContextError> for RelationalError {
    fn from(e: ContextError) -> Self {
        RelationalError::Context(e)
    }
}

impl From<CycleError> for RelationalError {
    fn from(e: CycleError) -> Self {
        RelationalError::Cycle(e)
    }
}

fn context_err<T>(message: String) -> Result<T, RelationalError> {
    Err(RelationalError::Context(ContextError { message }))
}

/// The reference pointing at `child`'s parent table, if any. References must
/// form a forest, so there is at most one.
fn parent_reference<'a>(
    spec: &'a DatabaseSpec,
    child: &str,
) -> Result<Option<&'a crate::rules::ReferenceSpec>, RelationalError> {
    let mut found = None;
    for reference in spec.references.iter().filter(|r| r.child == child) {
        if found.is_some() {
            return context_err(format!("table '{child}' has more than one parent reference"));
        }
        found = Some(reference);
    }
    Ok(found)
}

/// Rejects reference graphs that are not forests of tables.
fn check_references(spec: &DatabaseSpec) -> Result<(), RelationalError> {
    for decl in &spec.tables {
        let mut current = decl.name.as_str();
        let mut trail = Vec::new();
        trail.push(current.to_owned());
        while let Some(reference) = parent_reference(spec, current)? {
            current = &reference.root;
            if trail.iter().any(|t| t == current) {
                trail.push(current.to_owned());
                return Err(RelationalError::Cycle(CycleError {
                    message: format!("reference cycle: {}", trail.join(" -> ")),
                }));
            }
            trail.push(current.to_owned());
        }
    }
    Ok(())
}

/// A store view with the subject row's operation-time values substituted
/// (replacing the stored row with the same key, or appended when absent).
struct EffectiveStore<'a> {
    store: &'a TableStore,
    subject_table: &'a str,
    subject: &'a Row,
}

impl<'a> EffectiveStore<'a> {
    fn rows(&self, table: &'a Table) -> Vec<&'a Row> {
        let mut rows: Vec<&Row> = Vec::with_capacity(table.rows.len() + 1);
        let mut replaced = false;
        let subject_key = self.subject.get(&table.key);
        for row in &table.rows {
            if table.name == self.subject_table && row.get(&table.key) == subject_key {
                rows.push(self.subject);
                replaced = true;
            } else {
                rows.push(row);
            }
        }
        if table.name == self.subject_table && !replaced {
            rows.push(self.subject);
        }
        rows
    }
}

/// Builds the context tree for one row: climbs reference edges to the
/// root-most table, then renders every reachable row, columns as attributes.
/// The passed row stands in for the stored one (operation-time values).
pub fn build_context(
    store: &TableStore,
    spec: &DatabaseSpec,
    table: &str,
    row: &Row,
) -> Result<Document, RelationalError> {
    check_references(spec)?;
    let start = match store.table(table) {
        Some(t) => t,
        None => return context_err(format!("unknown table '{table}'")),
    };
    let effective = EffectiveStore {
        store,
        subject_table: table,
        subject: row,
    };

    // Climb to the root-most table.
    let mut current_table = start;
    let mut current_row = row.clone();
    while let Some(reference) = parent_reference(spec, &current_table.name)? {
        let fk = match current_row.get(&reference.child_key) {
            Some(fk) => fk.to_owned(),
            None => {
                return context_err(format!(
                    "row in '{}' lacks the reference column '{}'",
                    current_table.name, reference.child_key
                ))
            }
        };
        let parent_table = match store.table(&reference.root) {
            Some(t) => t,
            None => return context_err(format!("unknown table '{}'", reference.root)),
        };
        let parent_row = effective
            .rows(parent_table)
            .into_iter()
            .find(|r| r.get(&reference.root_key) == Some(fk.as_str()));
        match parent_row {
            Some(parent) => {
                current_row = parent.clone();
                current_table = parent_table;
            }
            None => {
                return context_err(format!(
                    "no row in '{}' with {} = '{fk}' (referenced from '{}')",
                    reference.root, reference.root_key, current_table.name
                ))
            }
        }
    }

    // Render the tree from the root row down.
    let mut doc = Document::new(&current_table.name);
    let root = doc.root();
    write_row(&mut doc, root, &current_row);
    attach_children(&mut doc, root, spec, &effective, current_table, &current_row)?;
    Ok(doc)
}

fn write_row(doc: &mut Document, element: NodeId, row: &Row) {
    for (column, value) in row.cells() {
        doc.set_attribute(element, column, value);
    }
}

fn attach_children(
    doc: &mut Document,
    element: NodeId,
    spec: &DatabaseSpec,
    effective: &EffectiveStore<'_>,
    table: &Table,
    row: &Row,
) -> Result<(), RelationalError> {
    for reference in spec.references.iter().filter(|r| r.root == table.name) {
        let key_value = match row.get(&reference.root_key) {
            Some(v) => v.to_owned(),
            None => {
                return context_err(format!(
                    "row in '{}' lacks the reference column '{}'",
                    table.name, reference.root_key
                ))
            }
        };
        let child_table = match effective.store.table(&reference.child) {
            Some(t) => t,
            None => return context_err(format!("unknown table '{}'", reference.child)),
        };
        let child_rows: Vec<Row> = effective
            .rows(child_table)
            .into_iter()
            .filter(|r| r.get(&reference.child_key) == Some(key_value.as_str()))
            .cloned()
            .collect();
        for child_row in child_rows {
            let child_el = doc.append_element(element, &child_table.name);
            write_row(doc, child_el, &child_row);
            attach_children(doc, child_el, spec, effective, child_table, &child_row)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Trigger simulation

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OpKind {
    Insert,
    Update,
    Delete,
}

/// One row operation, as a database would hand it to a trigger: the previous
/// row (update/delete) and the new row (insert/update).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowOp {
    pub kind: OpKind,
    pub table: String,
    pub old_row: Option<Row>,
    pub new_row: Option<Row>,
}

impl RowOp {
    pub fn insert(table: impl Into<String>, row: Row) -> RowOp {
        RowOp {
            kind: OpKind::Insert,
            table: table.into(),
            old_row: None,
            new_row: Some(row),
        }
    }

    pub fn update(table: impl Into<String>, old: Row, new: Row) -> RowOp {
        RowOp {
            kind: OpKind::Update,
            table: table.into(),
            old_row: Some(old),
            new_row: Some(new),
        }
    }

    pub fn delete(table: impl Into<String>, old: Row) -> RowOp {
        RowOp {
            kind: OpKind::Delete,
            table: table.into(),
            old_row: Some(old),
            new_row: None,
        }
    }
}

/// Relational rules must target attributes (columns); an element-child
/// target has no meaning over context trees.
fn check_relational_rules(rules: &RuleSet) -> Result<(), RelationalError> {
    for group in &rules.groups {
        for def in &group.defs {
            if let RuleTarget::ElementChild(name) = &def.target {
                return Err(RelationalError::Rules(RuleSyntaxError {
                    message: format!(
                        "relational rules must target attributes, but rule-def '{name}' targets a child element (use '@{name}')"
                    ),
                    location: format!("/srml-def/rules-for[@root=\"{}\"]", group.root),
                }));
            }
        }
    }
    Ok(())
}

fn op_err<T>(message: String) -> Result<T, RelationalError> {
    Err(RelationalError::Op(message))
}

/// The checked, normalized form of an op against a concrete store.
struct PlannedOp {
    kind: OpKind,
    table: String,
    key_value: String,
    /// The normalized row being written (insert/update).
    new_row: Option<Row>,
}

fn plan_op(store: &TableStore, op: &RowOp) -> Result<PlannedOp, RelationalError> {
    let table = match store.table(&op.table) {
        Some(t) => t,
        None => return op_err(format!("unknown table '{}'", op.table)),
    };
    let normalize = |row: &Row| -> Result<Row, RelationalError> {
        table
            .normalize(row)
            .map_err(|msg| RelationalError::Op(format!("table '{}': {msg}", table.name)))
    };
    let key_of = |row: &Row| -> Result<String, RelationalError> {
        match row.get(&table.key) {
            Some(v) if !v.is_empty() => Ok(v.to_owned()),
            _ => op_err(format!("row lacks a value for the key column '{}'", table.key)),
        }
    };
    // The previous row must be exactly what the store holds — a mismatch
    // means the caller is working from stale data.
    let check_old = |old: &Row, key_value: &str| -> Result<(), RelationalError> {
        match table.row(key_value) {
            Some(stored) if stored == &normalize(old)? => Ok(()),
            Some(_) => op_err(format!(
                "the previous row does not match the stored row with key '{key_value}'"
            )),
            None => op_err(format!(
                "no row in '{}' with key '{key_value}'",
                table.name
            )),
        }
    };
    match op.kind {
        OpKind::Insert => {
            if op.old_row.is_some() {
                return op_err("an insert carries no previous row".to_owned());
            }
            let new = match &op.new_row {
                Some(row) => normalize(row)?,
                None => return op_err("an insert needs a new row".to_owned()),
            };
            let key_value = key_of(&new)?;
            if table.row(&key_value).is_some() {
                return op_err(format!(
                    "duplicate key '{key_value}' in table '{}'",
                    table.name
                ));
            }
            Ok(PlannedOp {
                kind: OpKind::Insert,
                table: table.name.clone(),
                key_value,
                new_row: Some(new),
            })
        }
        OpKind::Update => {
            let (old, new) = match (&op.old_row, &op.new_row) {
                (Some(old), Some(new)) => (old, normalize(new)?),
                _ => return op_err("an update needs both the previous and the new row".to_owned()),
            };
            let key_value = key_of(&new)?;
            if old.get(&table.key) != Some(key_value.as_str()) {
                return op_err("an update must keep the key value".to_owned());
            }
            check_old(old, &key_value)?;
            Ok(PlannedOp {
                kind: OpKind::Update,
                table: table.name.clone(),
                key_value,
                new_row: Some(new),
            })
        }
        OpKind::Delete => {
            if op.new_row.is_some() {
                return op_err("a delete carries no new row".to_owned());
            }
            let old = match &op.old_row {
                Some(row) => row,
                None => return op_err("a delete needs the previous row".to_owned()),
            };
            let key_value = key_of(&normalize(old)?)?;
            check_old(old, &key_value)?;
            Ok(PlannedOp {
                kind: OpKind::Delete,
                table: table.name.clone(),
                key_value,
                new_row: None,
            })
        }
    }
}

/// Applies a planned op to a copy of the store.
fn post_state(store: &TableStore, plan: &PlannedOp) -> TableStore {
    let mut next = store.clone();
    let table = next.table_mut(&plan.table).expect("planned against this store");
    match plan.kind {
        OpKind::Insert => table.rows.push(plan.new_row.clone().expect("insert row")),
        OpKind::Update => {
            let at = table.position(&plan.key_value).expect("checked by plan_op");
            table.rows[at] = plan.new_row.clone().expect("update row");
        }
        OpKind::Delete => {
            let at = table.position(&plan.key_value).expect("checked by plan_op");
            table.rows.remove(at);
        }
    }
    next
}

/// Simulates the trigger for one operation: builds the hypothetical
/// post-state, renders the context tree around the subject row, and runs the
/// rule engine over it. Returns the report and — for insert/update — the row
/// as it should be committed (with any corrections to the subject row's
/// columns applied). Corrections to other rows are downgraded to errors; a
/// trigger only ever writes the row it fired for.
pub fn fire_trigger(
    store: &TableStore,
    spec: &DatabaseSpec,
    rules: &RuleSet,
    op: &RowOp,
    opts: ValidationOptions,
) -> Result<(ValidationReport, Option<Row>), RelationalError> {
    check_relational_rules(rules)?;
    check_references(spec)?;
    let plan = plan_op(store, op)?;
    let post = post_state(store, &plan);

    // Anchor the context tree: at the subject row, or — when it was just
    // deleted — at its former parent. Deleting from the root-most table
    // leaves nothing to validate.
    let (anchor_table, anchor_row) = match plan.kind {
        OpKind::Insert | OpKind::Update => {
            (plan.table.clone(), plan.new_row.clone().expect("subject row"))
        }
        OpKind::Delete => match parent_reference(spec, &plan.table)? {
            None => return Ok((ValidationReport::from_findings(Vec::new()), None)),
            Some(reference) => {
                let old = op.old_row.as_ref().expect("checked by plan_op");
                let fk = old.get(&reference.child_key).unwrap_or("");
                let parent_table = match post.table(&reference.root) {
                    Some(t) => t,
                    None => return context_err(format!("unknown table '{}'", reference.root)),
                };
                let parent = parent_table
                    .rows
                    .iter()
                    .find(|r| r.get(&reference.root_key) == Some(fk));
                match parent {
                    Some(row) => (reference.root.clone(), row.clone()),
                    None => {
                        return context_err(format!(
                            "no row in '{}' with {} = '{fk}' (referenced from '{}')",
                            reference.root, reference.root_key, plan.table
                        ))
                    }
                }
            }
        },
    };

    let context = build_context(&post, spec, &anchor_table, &anchor_row)?;
    let (report, _corrected_doc) =
        validate_styled(&context, None, rules, opts, NumberStyle::OneDecimal);

    // Map corrected findings back onto the subject row; everything else a
    // correction touched is out of the trigger's reach and stays wrong.
    let mut effective_row = match plan.kind {
        OpKind::Insert | OpKind::Update => plan.new_row.clone(),
        OpKind::Delete => None,
    };
    let subject_prefix = effective_row.as_ref().map(|row| {
        let table = store.table(&plan.table).expect("checked by plan_op");
        let element = context
            .all_elements()
            .into_iter()
            .find(|&el| {
                context.name(el) == Some(plan.table.as_str())
                    && context.attribute(el, &table.key) == row.get(&table.key)
            })
            .expect("the subject row is part of its own context tree");
        (context.node_location(element), table.columns.clone())
    });

    let mut findings = report.findings;
    for finding in &mut findings {
        if finding.severity != Severity::Corrected {
            continue;
        }
        let applied = subject_prefix.as_ref().is_some_and(|(prefix, columns)| {
            finding
                .location
                .strip_prefix(prefix.as_str())
                .and_then(|rest| rest.strip_prefix("/@"))
                .is_some_and(|column| {
                    if columns.iter().any(|c| c == column) {
                        effective_row
                            .as_mut()
                            .expect("subject row present")
                            .set(column, &finding.expected);
                        true
                    } else {
                        false
                    }
                })
        });
        if !applied {
            finding.severity = Severity::Error;
        }
    }
    Ok((ValidationReport::from_findings(findings), effective_row))
}

/// Fires the trigger and, when the report comes back valid, commits the
/// operation — with the corrected subject row when one was produced — to a
/// fresh store. The input store is never modified.
pub fn apply_op(
    store: &TableStore,
    spec: &DatabaseSpec,
    rules: &RuleSet,
    op: &RowOp,
    opts: ValidationOptions,
) -> Result<(ValidationReport, TableStore), RelationalError> {
    let (report, effective_row) = fire_trigger(store, spec, rules, op, opts)?;
    if !report.valid {
        return Ok((report, store.clone()));
    }
    let plan = plan_op(store, op)?;
    let committed = PlannedOp {
        new_row: effective_row.or(plan.new_row),
        ..plan
    };
    Ok((report, post_state(store, &committed)))
}
