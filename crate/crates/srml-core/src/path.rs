//! The path language used inside rule expressions: a small XPath subset.
//!
//! Supported shapes:
//!
//! * `//name` — elements named `name` anywhere in the document (root included)
//! * `/name` — the root element, if so named
//! * `name/sub` — children of the context node, then their children
//! * `../name` — parent steps, allowed only as a run at the start of a
//!   relative path
//! * predicates on named steps: `[3]` (1-based position among the candidates
//!   of one context node), `[@attr]`, `[@attr="value"]` (single or double
//!   quotes)
//! * `*` as a name test
//! * terminals: `/@attr` (attribute values; elements without the attribute
//!   are skipped) and `/text()` (the string value of each element); a bare
//!   `@attr` or `text()` addresses the context node itself
//!
//! Navigation keeps node sets in document order and without duplicates after
//! every step. Descendant steps in the middle of a path (`a//b`), parent
//! steps after an anchor or mid-path, and predicates on `..` are rejected at
//! parse time.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::xml::{Document, NodeId};

/// A parsed path expression. The [`fmt::Display`] impl prints the canonical
/// form, which reparses to an equal expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathExpr {
    pub anchor: Anchor,
    pub steps: Vec<Step>,
    pub terminal: Terminal,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Anchor {
    /// No leading slash: starts at the context node.
    Relative,
    /// `/name`: starts at the document root.
    Root,
    /// `//name`: matches anywhere in the document.
    Anywhere,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub axis: Axis,
    pub test: NameTest,
    pub predicates: Vec<Predicate>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Axis {
    Child,
    Parent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NameTest {
    Name(String),
    Any,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predicate {
    /// `[i]`, 1-based within the candidate list of one context node.
    Position(u32),
    /// `[@attr]`
    HasAttribute(String),
    /// `[@attr="value"]`
    AttributeEquals(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Terminal {
    None,
    Attribute(String),
    Text,
}

/// Result of evaluating a path: element nodes, or strings once an attribute
/// or `text()` terminal has been applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathValue {
    Nodes(Vec<NodeId>),
    Strings(Vec<String>),
}

/// Syntax error with a byte offset into the (trimmed) path source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSyntaxError {
    pub message: String,
    pub offset: usize,
}

impl fmt::Display for PathSyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "path syntax error at offset {}: {}", self.offset, self.message)
    }
}

impl core::error::Error for PathSyntaxError {}

/// Raised when a parent step is taken from the document root.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct NavigationError;

impl fmt::Display for NavigationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("cannot navigate above the document root")
    }
}

impl core::error::Error for NavigationError {}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.anchor {
            Anchor::Relative => {}
            Anchor::Root => f.write_str("/")?,
            Anchor::Anywhere => f.write_str("//")?,
        }
        let mut first = true;
        let mut separate = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if first {
                first = false;
            } else {
                f.write_str("/")?;
            }
            Ok(())
        };
        for step in &self.steps {
            separate(f)?;
            match step.axis {
                Axis::Parent => f.write_str("..")?,
                Axis::Child => {
                    match &step.test {
                        NameTest::Any => f.write_str("*")?,
                        NameTest::Name(name) => f.write_str(name)?,
                    }
                    for pred in &step.predicates {
                        match pred {
                            Predicate::Position(i) => write!(f, "[{i}]")?,
                            Predicate::HasAttribute(a) => write!(f, "[@{a}]")?,
                            Predicate::AttributeEquals(a, v) => {
                                if v.contains('"') {
                                    write!(f, "[@{a}='{v}']")?
                                } else {
                                    write!(f, "[@{a}=\"{v}\"]")?
                                }
                            }
                        }
                    }
                }
            }
        }
        match &self.terminal {
            Terminal::None => {}
            Terminal::Attribute(name) => {
                separate(f)?;
                write!(f, "@{name}")?;
            }
            Terminal::Text => {
                separate(f)?;
                f.write_str("text()")?;
            }
        }
        Ok(())
    }
}

/// Parses a path expression. Surrounding whitespace is ignored.
pub fn parse_path(src: &str) -> Result<PathExpr, PathSyntaxError> {
    Scanner::new(src.trim()).parse()
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Scanner<'a> {
        Scanner { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, prefix: &str) -> bool {
        if self.rest().starts_with(prefix) {
            self.pos += prefix.len();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: &str) -> Result<T, PathSyntaxError> {
        self.error_at(self.pos, message)
    }

    fn error_at<T>(&self, offset: usize, message: &str) -> Result<T, PathSyntaxError> {
        Err(PathSyntaxError {
            message: message.to_owned(),
            offset,
        })
    }

    fn parse(mut self) -> Result<PathExpr, PathSyntaxError> {
        if self.src.is_empty() {
            return self.error("empty path");
        }
        let anchor = if self.eat("//") {
            Anchor::Anywhere
        } else if self.eat("/") {
            Anchor::Root
        } else {
            Anchor::Relative
        };
        let mut steps = Vec::new();
        let mut terminal = Terminal::None;

        // Leading run of parent steps, only in relative paths.
        if anchor == Anchor::Relative {
            while self.rest().starts_with("..") {
                self.pos += 2;
                steps.push(Step {
                    axis: Axis::Parent,
                    test: NameTest::Any,
                    predicates: Vec::new(),
                });
                if self.rest().is_empty() {
                    return Ok(PathExpr {
                        anchor,
                        steps,
                        terminal,
                    });
                }
                if !self.eat("/") {
                    return self.error("expected '/' after '..'");
                }
            }
        }

        loop {
            if self.rest().starts_with("..") {
                return self.error("parent steps are only allowed at the start of a relative path");
            }
            if self.rest().starts_with('/') {
                return self.error("descendant steps are only allowed at the start of a path");
            }
            if self.rest().is_empty() {
                return self.error("expected a step");
            }
            if let Some(_rest) = self.rest().strip_prefix('@') {
                let at = self.pos;
                self.pos += 1;
                let name = self.read_name()?;
                if !self.rest().is_empty() {
                    return self.error_at(at, "an attribute terminal must end the path");
                }
                terminal = Terminal::Attribute(name);
                break;
            }
            if self.rest().starts_with("text()") {
                let at = self.pos;
                self.pos += "text()".len();
                if !self.rest().is_empty() {
                    return self.error_at(at, "text() must end the path");
                }
                terminal = Terminal::Text;
                break;
            }
            steps.push(self.parse_named_step()?);
            if self.rest().is_empty() {
                break;
            }
            if !self.eat("/") {
                return self.error("unexpected character in path");
            }
            if self.rest().is_empty() {
                return self.error("trailing '/'");
            }
        }
        Ok(PathExpr {
            anchor,
            steps,
            terminal,
        })
    }

    fn parse_named_step(&mut self) -> Result<Step, PathSyntaxError> {
        let test = if self.eat("*") {
            NameTest::Any
        } else {
            NameTest::Name(self.read_name()?)
        };
        let mut predicates = Vec::new();
        while self.rest().starts_with('[') {
            predicates.push(self.parse_predicate()?);
        }
        Ok(Step {
            axis: Axis::Child,
            test,
            predicates,
        })
    }

    fn read_name(&mut self) -> Result<String, PathSyntaxError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                self.bump();
            }
            _ => return self.error("expected a name"),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | ':'))
        {
            self.bump();
        }
        Ok(self.src[start..self.pos].to_owned())
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c == ' ' || c == '\t') {
            self.bump();
        }
    }

    fn parse_predicate(&mut self) -> Result<Predicate, PathSyntaxError> {
        debug_assert!(self.rest().starts_with('['));
        self.bump();
        self.skip_ws();
        let pred = match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
                let digits = &self.src[start..self.pos];
                let value: u32 = digits
                    .parse()
                    .map_err(|_| PathSyntaxError {
                        message: "position out of range".to_owned(),
                        offset: start,
                    })?;
                if value == 0 {
                    return self.error_at(start, "positions are 1-based");
                }
                Predicate::Position(value)
            }
            Some('@') => {
                self.bump();
                let name = self.read_name()?;
                self.skip_ws();
                if self.peek() == Some('=') {
                    self.bump();
                    self.skip_ws();
                    let quote = match self.peek() {
                        Some(q @ ('"' | '\'')) => q,
                        _ => return self.error("expected a quoted value"),
                    };
                    self.bump();
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c != quote) {
                        self.bump();
                    }
                    if self.peek() != Some(quote) {
                        return self.error_at(start, "unterminated quoted value");
                    }
                    let value = self.src[start..self.pos].to_owned();
                    self.bump();
                    Predicate::AttributeEquals(name, value)
                } else {
                    Predicate::HasAttribute(name)
                }
            }
            _ => return self.error("expected a position or attribute test"),
        };
        self.skip_ws();
        if self.bump() != Some(']') {
            return self.error("expected ']'");
        }
        Ok(pred)
    }
}

/// Evaluates `path` against `context` (an element of `doc`).
///
/// Node results are in document order without duplicates. Parent navigation
/// from the root raises [`NavigationError`]; an empty result is not an error
/// here (the expression layer decides what an unresolved reference means).
pub fn evaluate(
    doc: &Document,
    context: NodeId,
    path: &PathExpr,
) -> Result<PathValue, NavigationError> {
    debug_assert!(doc.is_element(context), "context must be an element");
    let order = doc.document_order();
    let mut steps = path.steps.as_slice();
    let mut nodes: Vec<NodeId> = match path.anchor {
        Anchor::Relative => vec![context],
        Anchor::Root | Anchor::Anywhere => {
            let (first, rest) = steps
                .split_first()
                .expect("anchored paths always carry a first step");
            steps = rest;
            let candidates: Vec<NodeId> = if path.anchor == Anchor::Root {
                [doc.root()]
                    .into_iter()
                    .filter(|&n| test_matches(doc, n, &first.test))
                    .collect()
            } else {
                doc.all_elements()
                    .into_iter()
                    .filter(|&n| test_matches(doc, n, &first.test))
                    .collect()
            };
            apply_predicates(doc, candidates, &first.predicates)
        }
    };
    for step in steps {
        let mut next: Vec<NodeId> = Vec::new();
        match step.axis {
            Axis::Parent => {
                for &node in &nodes {
                    match doc.parent(node) {
                        Some(parent) => next.push(parent),
                        None => return Err(NavigationError),
                    }
                }
            }
            Axis::Child => {
                for &node in &nodes {
                    let candidates: Vec<NodeId> = doc
                        .child_elements(node)
                        .filter(|&c| test_matches(doc, c, &step.test))
                        .collect();
                    next.extend(apply_predicates(doc, candidates, &step.predicates));
                }
            }
        }
        next.sort_by_key(|&n| order(n));
        next.dedup();
        nodes = next;
    }
    Ok(match &path.terminal {
        Terminal::None => PathValue::Nodes(nodes),
        Terminal::Attribute(name) => PathValue::Strings(
            nodes
                .iter()
                .filter_map(|&n| doc.attribute(n, name).map(|v| v.to_owned()))
                .collect(),
        ),
        Terminal::Text => {
            PathValue::Strings(nodes.iter().map(|&n| doc.string_value(n)).collect())
        }
    })
}

fn test_matches(doc: &Document, node: NodeId, test: &NameTest) -> bool {
    match test {
        NameTest::Any => true,
        NameTest::Name(name) => doc.name(node) == Some(name.as_str()),
    }
}

/// Predicates filter sequentially; a position selects from whatever survived
/// the previous predicates.
fn apply_predicates(doc: &Document, mut candidates: Vec<NodeId>, preds: &[Predicate]) -> Vec<NodeId> {
    for pred in preds {
        match pred {
            Predicate::Position(i) => {
                candidates = match candidates.get(*i as usize - 1) {
                    Some(&n) => vec![n],
                    None => Vec::new(),
                };
            }
            Predicate::HasAttribute(name) => {
                candidates.retain(|&n| doc.attribute(n, name).is_some());
            }
            Predicate::AttributeEquals(name, value) => {
                candidates.retain(|&n| doc.attribute(n, name) == Some(value.as_str()));
            }
        }
    }
    candidates
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn doc() -> Document {
        Document::parse_str(
            r#"<bib>
                 <book author="Jules Verne" year="1873"><title>Around the world in 80 days</title></book>
                 <book author="Umberto Eco"><title>The name of the rose</title></book>
                 <paper><title>Some paper</title></paper>
                 <book author="Jules Verne"><title>The mysterious island</title></book>
                 <book><title>Anonymous</title></book>
               </bib>"#,
        )
        .unwrap()
    }

    fn eval(doc: &Document, ctx: NodeId, path: &str) -> PathValue {
        evaluate(doc, ctx, &parse_path(path).unwrap()).unwrap()
    }

    fn strings(value: PathValue) -> Vec<String> {
        match value {
            PathValue::Strings(s) => s,
            PathValue::Nodes(_) => panic!("expected strings"),
        }
    }

    fn nodes(value: PathValue) -> Vec<NodeId> {
        match value {
            PathValue::Nodes(n) => n,
            PathValue::Strings(_) => panic!("expected nodes"),
        }
    }

    #[test]
    fn parses_and_prints_canonical_forms() {
        for src in [
            "//book",
            "/bib",
            "book/title",
            "../../price",
            "..",
            "//book[@author=\"Jules Verne\"]/title/text()",
            "book[2]/@year",
            "*[@a][3]",
            "@type",
            "text()",
            "../expr[1]/@type",
        ] {
            let parsed = parse_path(src).unwrap();
            assert_eq!(format!("{parsed}"), *src, "canonical print of {src:?}");
            assert_eq!(parse_path(&format!("{parsed}")).unwrap(), parsed);
        }
        // Non-canonical input normalizes (whitespace in predicates).
        let parsed = parse_path(" book[ @a = 'v' ] ").unwrap();
        assert_eq!(format!("{parsed}"), "book[@a='v']".replace('\'', "\""));
    }

    #[test]
    fn rejects_out_of_subset_paths() {
        for (src, needle) in [
            ("", "empty path"),
            ("a//b", "descendant steps are only allowed at the start"),
            ("..//a", "descendant steps are only allowed at the start"),
            ("a/../b", "parent steps are only allowed at the start"),
            ("/..", "parent steps are only allowed at the start"),
            ("a/@b/c", "must end the path"),
            ("a/text()/b", "must end the path"),
            ("book[0]", "1-based"),
            ("a/", "trailing '/'"),
            ("count(a)", "unexpected character"),
            ("book[last()]", "expected a position or attribute test"),
            ("book[@a=b]", "expected a quoted value"),
            ("book[@a=\"x]", "unterminated quoted value"),
            ("[1]", "expected a name"),
        ] {
            let err = parse_path(src).unwrap_err();
            assert!(
                err.message.contains(needle),
                "{src:?}: expected {needle:?}, got {:?} at {}",
                err.message,
                err.offset
            );
        }
    }

    #[test]
    fn error_offsets_point_into_the_source() {
        let err = parse_path("a/../b").unwrap_err();
        assert_eq!(err.offset, 2);
        let err = parse_path("book[0]").unwrap_err();
        assert_eq!(err.offset, 5);
    }

    #[test]
    fn evaluates_anchored_queries() {
        let d = doc();
        let verne = strings(eval(
            &d,
            d.root(),
            "//book[@author=\"Jules Verne\"]/title/text()",
        ));
        assert_eq!(
            verne,
            ["Around the world in 80 days", "The mysterious island"]
        );
        assert_eq!(nodes(eval(&d, d.root(), "//book[@author]/title")).len(), 3);
        assert_eq!(nodes(eval(&d, d.root(), "//book/title")).len(), 4);
        // The root itself is matched by an anywhere anchor.
        assert_eq!(nodes(eval(&d, d.root(), "//bib")), vec![d.root()]);
        assert_eq!(nodes(eval(&d, d.root(), "/bib")), vec![d.root()]);
        assert!(nodes(eval(&d, d.root(), "/book")).is_empty());
    }

    #[test]
    fn positional_predicates_are_global_for_anchors_and_local_for_steps() {
        let d = doc();
        // Second book in the whole document.
        let b2 = nodes(eval(&d, d.root(), "//book[2]"));
        assert_eq!(b2.len(), 1);
        assert_eq!(d.attribute(b2[0], "author"), Some("Umberto Eco"));
        // Per-context positional selection: first title under each book.
        assert_eq!(nodes(eval(&d, d.root(), "//book/title[1]")).len(), 4);
    }

    #[test]
    fn relative_and_parent_navigation() {
        let d = doc();
        let first_title = nodes(eval(&d, d.root(), "//book[1]/title"))[0];
        let back = nodes(eval(&d, first_title, "../title"));
        assert_eq!(back, vec![first_title]);
        let sibling_authors = strings(eval(&d, first_title, "../@author"));
        assert_eq!(sibling_authors, ["Jules Verne"]);
        let up_two = nodes(eval(&d, first_title, "../.."));
        assert_eq!(up_two, vec![d.root()]);
        assert_eq!(
            evaluate(&d, d.root(), &parse_path("..").unwrap()),
            Err(NavigationError)
        );
    }

    #[test]
    fn bare_terminals_address_the_context_node() {
        let d = doc();
        let book = nodes(eval(&d, d.root(), "//book[1]"))[0];
        assert_eq!(strings(eval(&d, book, "@author")), ["Jules Verne"]);
        assert_eq!(
            strings(eval(&d, book, "text()")),
            ["Around the world in 80 days"]
        );
    }

    #[test]
    fn attribute_terminal_skips_elements_without_the_attribute() {
        let d = doc();
        let years = strings(eval(&d, d.root(), "//book/@year"));
        assert_eq!(years, ["1873"]);
        let authors = strings(eval(&d, d.root(), "//book/@author"));
        assert_eq!(authors.len(), 3);
    }

    #[test]
    fn results_are_in_document_order_without_duplicates() {
        let d = Document::parse_str("<r><a><x/></a><a><x/><x/></a></r>").unwrap();
        let xs = nodes(eval(&d, d.root(), "//a/x"));
        assert_eq!(xs.len(), 3);
        let order = d.document_order();
        assert!(xs.windows(2).all(|w| order(w[0]) < order(w[1])));
        // Parent steps from siblings collapse: the evaluator handles step
        // sequences the parser would reject, so build the AST directly.
        let child = |name: &str| Step {
            axis: Axis::Child,
            test: NameTest::Name(name.into()),
            predicates: Vec::new(),
        };
        let up = Step {
            axis: Axis::Parent,
            test: NameTest::Any,
            predicates: Vec::new(),
        };
        let path = PathExpr {
            anchor: Anchor::Relative,
            steps: vec![child("a"), child("x"), up],
            terminal: Terminal::None,
        };
        let parents = nodes(evaluate(&d, d.root(), &path).unwrap());
        assert_eq!(parents.len(), 2);
    }

    #[test]
    fn star_matches_any_element_name() {
        let d = doc();
        assert_eq!(nodes(eval(&d, d.root(), "*")).len(), 5);
        assert_eq!(nodes(eval(&d, d.root(), "*/title")).len(), 5);
        assert_eq!(nodes(eval(&d, d.root(), "//*")).len(), 11);
    }
}
