//! `srml` — validate and correct XML documents with SRML 2.0 rules, extract
//! embedded rules from schemas, and run rule-guarded row operations over CSV
//! tables.
//!
//! Exit codes: 0 success/valid, 1 validation findings (or blocked row op),
//! 2 IO/parse/schema/data errors, 3 no rules to extract, 64 usage errors.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use srml_core::relational::{apply_op, build_store, Row, RowOp, TableStore};
use srml_core::report::{render_report, ReportFormat};
use srml_core::rules::{parse_standalone, print_ruleset, DatabaseSpec, RuleSet};
use srml_core::schema::{extract_srml, parse_schema, Schema};
use srml_core::validator::{validate, ValidationOptions};
use srml_core::xml::{parse_document, serialize, Document};

#[derive(Parser)]
#[command(name = "srml", version, about = "Rule-based XML validation and correction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> ReportFormat {
        match f {
            Format::Text => ReportFormat::Text,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OpName {
    Insert,
    Update,
    Delete,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an XML document against a schema and its embedded rules
    Validate {
        /// The XML document to validate
        xml: PathBuf,
        /// The XSD schema; SRML rules are read from its annotations
        #[arg(long)]
        schema: PathBuf,
        /// Report format
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Stop at the first error finding
        #[arg(long)]
        fail_fast: bool,
    },
    /// Validate with corrections and write the corrected document
    Correct {
        /// The XML document to correct
        xml: PathBuf,
        /// The XSD schema; SRML rules are read from its annotations
        #[arg(long)]
        schema: PathBuf,
        /// Where to write the corrected XML (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format (the report goes to stderr)
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the SRML rules embedded in a schema
    ExtractRules {
        /// The XSD schema to read
        xsd: PathBuf,
    },
    /// Validate a row operation against CSV tables and commit it if clean
    DbApply {
        /// Directory holding one <table>.csv file per declared table
        #[arg(long)]
        data: PathBuf,
        /// SRML rule file carrying the database section
        #[arg(long)]
        rules: PathBuf,
        /// The operation to run
        #[arg(long, value_enum)]
        op: OpName,
        /// The table the operation targets
        #[arg(long)]
        table: String,
        /// Column values as NAME=value, comma separated and/or repeated.
        /// Inserts need every column, updates the key plus the changed
        /// columns, deletes the key only
        #[arg(long)]
        row: Vec<String>,
        /// Apply correct-mode rules to the subject row before deciding
        #[arg(long)]
        correct: bool,
        /// Report format
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    };
    ExitCode::from(code)
}

/// Ok carries the exit code; Err is an operational failure (exit 2).
fn run(command: Command) -> Result<u8, String> {
    match command {
        Command::Validate {
            xml,
            schema,
            format,
            fail_fast,
        } => {
            let (doc, schema, rules) = load_inputs(&xml, &schema)?;
            let opts = ValidationOptions {
                apply_corrections: false,
                fail_fast,
            };
            let (report, _) = validate(&doc, Some(&schema), &rules, opts);
            print!("{}", render_report(&report, format.into()));
            Ok(if report.valid { 0 } else { 1 })
        }
        Command::Correct {
            xml,
            schema,
            out,
            format,
        } => {
            let (doc, schema, rules) = load_inputs(&xml, &schema)?;
            let opts = ValidationOptions {
                apply_corrections: true,
                fail_fast: false,
            };
            let (report, corrected) = validate(&doc, Some(&schema), &rules, opts);
            let bytes = serialize(&corrected);
            match &out {
                Some(path) => write_atomically(path, &bytes)
                    .map_err(|e| format!("{}: {e}", path.display()))?,
                None => {
                    let mut stdout = std::io::stdout().lock();
                    stdout
                        .write_all(&bytes)
                        .and_then(|()| stdout.flush())
                        .map_err(|e| format!("stdout: {e}"))?;
                }
            }
            eprint!("{}", render_report(&report, format.into()));
            Ok(if report.valid { 0 } else { 1 })
        }
        Command::ExtractRules { xsd } => {
            let schema = load_schema(&xsd)?;
            let rules = collect_rules(&schema, &xsd)?;
            if rules.groups.is_empty() && rules.database.is_none() {
                eprintln!("{}: no SRML rules found", xsd.display());
                return Ok(3);
            }
            print!("{}", print_ruleset(&rules).serialize_string());
            Ok(0)
        }
        Command::DbApply {
            data,
            rules,
            op,
            table,
            row,
            correct,
            format,
        } => db_apply(&data, &rules, op, &table, &row, correct, format),
    }
}

fn read_xml(path: &Path) -> Result<Document, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let doc = parse_document(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(doc.with_source_name(&path.display().to_string()))
}

fn load_schema(path: &Path) -> Result<Schema, String> {
    let doc = read_xml(path)?;
    parse_schema(&doc).map_err(|e| format!("{}: {e}", path.display()))
}

/// Parses every srml-def payload embedded in the schema into one rule set.
fn collect_rules(schema: &Schema, origin: &Path) -> Result<RuleSet, String> {
    let mut rules = RuleSet::empty();
    for payload in extract_srml(schema) {
        let set =
            parse_standalone(payload).map_err(|e| format!("{}: {e}", origin.display()))?;
        rules.merge(set);
    }
    Ok(rules)
}

fn load_inputs(xml: &Path, xsd: &Path) -> Result<(Document, Schema, RuleSet), String> {
    let doc = read_xml(xml)?;
    let schema = load_schema(xsd)?;
    let rules = collect_rules(&schema, xsd)?;
    Ok((doc, schema, rules))
}

/// Writes via a sibling temp file and rename, so readers never see a
/// half-written file.
fn write_atomically(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    match fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// Splits repeated `--row` flags into (column, value) cells. Each flag holds
/// one or more comma-separated `NAME=value` pairs.
fn parse_row_cells(flags: &[String]) -> Result<Vec<(String, String)>, String> {
    let mut cells = Vec::new();
    for flag in flags {
        for pair in flag.split(',') {
            match pair.split_once('=') {
                Some((name, value)) if !name.is_empty() => {
                    cells.push((name.to_string(), value.to_string()));
                }
                _ => return Err(format!("--row expects NAME=value pairs, got '{pair}'")),
            }
        }
    }
    if cells.is_empty() {
        return Err("--row is required for this operation".to_string());
    }
    Ok(cells)
}

fn build_op(
    store: &TableStore,
    spec: &DatabaseSpec,
    kind: OpName,
    table_name: &str,
    cells: Vec<(String, String)>,
) -> Result<RowOp, String> {
    let key_column = spec
        .tables
        .iter()
        .find(|t| t.name == table_name)
        .map(|t| t.key.as_str())
        .ok_or_else(|| format!("table '{table_name}' is not declared in the rule file"))?;
    let table = store
        .table(table_name)
        .ok_or_else(|| format!("no data for table '{table_name}'"))?;

    let stored_row = |cells: &[(String, String)]| -> Result<Row, String> {
        let key_value = cells
            .iter()
            .find(|(name, _)| name == key_column)
            .map(|(_, value)| value.as_str())
            .ok_or_else(|| format!("--row must include the key column '{key_column}'"))?;
        table
            .row(key_value)
            .cloned()
            .ok_or_else(|| format!("no row in '{table_name}' with {key_column}={key_value}"))
    };

    match kind {
        OpName::Insert => Ok(RowOp::insert(table_name, Row::from_pairs(cells))),
        OpName::Update => {
            let old = stored_row(&cells)?;
            let mut new = old.clone();
            for (column, value) in &cells {
                new.set(column, value);
            }
            Ok(RowOp::update(table_name, old, new))
        }
        OpName::Delete => {
            if cells.len() != 1 || cells[0].0 != key_column {
                return Err(format!(
                    "a delete takes only the key column ('--row {key_column}=...')"
                ));
            }
            Ok(RowOp::delete(table_name, stored_row(&cells)?))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn db_apply(
    data: &Path,
    rules_path: &Path,
    op: OpName,
    table: &str,
    row_flags: &[String],
    correct: bool,
    format: Format,
) -> Result<u8, String> {
    let rules_doc = read_xml(rules_path)?;
    let rules =
        parse_standalone(&rules_doc).map_err(|e| format!("{}: {e}", rules_path.display()))?;
    let spec = rules
        .database
        .clone()
        .ok_or_else(|| format!("{}: no database section", rules_path.display()))?;

    let mut files = Vec::with_capacity(spec.tables.len());
    for decl in &spec.tables {
        let path = data.join(format!("{}.csv", decl.name));
        let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        files.push((decl.name.clone(), text));
    }
    let store = build_store(&spec, &files).map_err(|e| e.to_string())?;

    let cells = parse_row_cells(row_flags)?;
    let op = build_op(&store, &spec, op, table, cells)?;
    let opts = ValidationOptions {
        apply_corrections: correct,
        fail_fast: false,
    };
    let (report, next) = apply_op(&store, &spec, &rules, &op, opts).map_err(|e| e.to_string())?;
    print!("{}", render_report(&report, format.into()));
    if !report.valid {
        return Ok(1);
    }
    let changed = next
        .table(table)
        .ok_or_else(|| format!("no data for table '{table}'"))?;
    let path = data.join(format!("{table}.csv"));
    write_atomically(&path, changed.to_csv().as_bytes())
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(0)
}
