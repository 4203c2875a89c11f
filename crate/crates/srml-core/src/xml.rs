//! Arena-backed XML document tree with a hand-rolled well-formedness parser
//! and a pretty-printing serializer.
//!
//! The tree is append-only: nodes are stored in a `Vec` and addressed by
//! [`NodeId`]. Mutation (rule corrections) may orphan text nodes, which then
//! simply become unreachable; nothing is ever moved or freed, so every
//! `NodeId` handed out stays valid for the life of the [`Document`].
//!
//! The parser covers the subset of XML 1.0 the engine needs: elements,
//! attributes, character data, CDATA sections (read as text), comments and
//! processing instructions (discarded), a DOCTYPE declaration (discarded),
//! the five predefined entities and numeric character references.
//! Whitespace-only text nodes are dropped so that pretty-printed input and
//! compact input build the same tree.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::num::NonZeroU32;

/// Handle to a node inside a [`Document`] arena.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(NonZeroU32);

impl NodeId {
    fn new(index: usize) -> NodeId {
        NodeId(NonZeroU32::new(index as u32 + 1).expect("arena index overflow"))
    }

    fn index(self) -> usize {
        self.0.get() as usize - 1
    }
}

#[derive(Clone, Debug)]
enum NodeKind {
    Element {
        name: String,
        /// Attributes in document order; names are unique per element.
        attributes: Vec<(String, String)>,
        children: Vec<NodeId>,
    },
    Text {
        content: String,
    },
}

#[derive(Clone, Debug)]
struct NodeData {
    parent: Option<NodeId>,
    kind: NodeKind,
}

/// A parsed XML document: an arena of nodes plus the root element.
#[derive(Clone, Debug)]
pub struct Document {
    nodes: Vec<NodeData>,
    root: NodeId,
    source_name: String,
}

/// Error raised when input is not well-formed XML, with a 1-based position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WellFormednessError {
    pub message: String,
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for WellFormednessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl core::error::Error for WellFormednessError {}

/// Parses a byte buffer into a [`Document`].
pub fn parse_document(bytes: &[u8]) -> Result<Document, WellFormednessError> {
    let text = match core::str::from_utf8(bytes) {
        Ok(text) => text,
        Err(err) => {
            let (line, column) = line_column(
                core::str::from_utf8(&bytes[..err.valid_up_to()]).unwrap_or(""),
                err.valid_up_to(),
            );
            return Err(WellFormednessError {
                message: "input is not valid UTF-8".to_owned(),
                line,
                column,
            });
        }
    };
    Document::parse_str(text)
}

/// Serializes a document to UTF-8 bytes. See [`Document::serialize_string`].
pub fn serialize(doc: &Document) -> Vec<u8> {
    doc.serialize_string().into_bytes()
}

impl Document {
    /// Creates a document holding a single empty root element.
    pub fn new(root_name: &str) -> Document {
        debug_assert!(is_xml_name(root_name), "invalid element name");
        Document {
            nodes: alloc::vec![NodeData {
                parent: None,
                kind: NodeKind::Element {
                    name: root_name.to_owned(),
                    attributes: Vec::new(),
                    children: Vec::new(),
                },
            }],
            root: NodeId::new(0),
            source_name: String::new(),
        }
    }

    /// Parses a string slice into a document.
    pub fn parse_str(text: &str) -> Result<Document, WellFormednessError> {
        Parser::new(text).parse()
    }

    /// Copies the subtree rooted at `node` in `src` into a new document.
    pub fn subtree_document(src: &Document, node: NodeId) -> Document {
        let name = src.name(node).expect("subtree root must be an element");
        let mut doc = Document::new(name);
        let root = doc.root;
        for (k, v) in src.attributes(node) {
            doc.set_attribute(root, k, v);
        }
        for &child in src.children(node) {
            doc.append_subtree(root, src, child);
        }
        doc
    }

    /// Attaches a label (typically a file name) used in diagnostics.
    pub fn with_source_name(mut self, name: &str) -> Document {
        self.source_name = name.to_owned();
        self
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    fn node(&self, id: NodeId) -> &NodeData {
        &self.nodes[id.index()]
    }

    fn node_mut(&mut self, id: NodeId) -> &mut NodeData {
        &mut self.nodes[id.index()]
    }

    pub fn is_element(&self, id: NodeId) -> bool {
        matches!(self.node(id).kind, NodeKind::Element { .. })
    }

    pub fn is_text(&self, id: NodeId) -> bool {
        matches!(self.node(id).kind, NodeKind::Text { .. })
    }

    /// Element name, or `None` for text nodes.
    pub fn name(&self, id: NodeId) -> Option<&str> {
        match &self.node(id).kind {
            NodeKind::Element { name, .. } => Some(name),
            NodeKind::Text { .. } => None,
        }
    }

    /// Text node content, or `None` for elements.
    pub fn text(&self, id: NodeId) -> Option<&str> {
        match &self.node(id).kind {
            NodeKind::Text { content } => Some(content),
            NodeKind::Element { .. } => None,
        }
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    /// All children (elements and text) in document order.
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        match &self.node(id).kind {
            NodeKind::Element { children, .. } => children,
            NodeKind::Text { .. } => &[],
        }
    }

    /// Element children only, in document order.
    pub fn child_elements(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.children(id).iter().copied().filter(|&c| self.is_element(c))
    }

    /// Attributes in document order.
    pub fn attributes(&self, id: NodeId) -> &[(String, String)] {
        match &self.node(id).kind {
            NodeKind::Element { attributes, .. } => attributes,
            NodeKind::Text { .. } => &[],
        }
    }

    pub fn attribute(&self, id: NodeId, name: &str) -> Option<&str> {
        self.attributes(id)
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    /// Sets (or creates, appending at the end) an attribute.
    pub fn set_attribute(&mut self, id: NodeId, name: &str, value: &str) {
        debug_assert!(is_xml_name(name), "invalid attribute name");
        match &mut self.node_mut(id).kind {
            NodeKind::Element { attributes, .. } => {
                if let Some(slot) = attributes.iter_mut().find(|(k, _)| k == name) {
                    slot.1 = value.to_owned();
                } else {
                    attributes.push((name.to_owned(), value.to_owned()));
                }
            }
            NodeKind::Text { .. } => panic!("set_attribute on a text node"),
        }
    }

    /// Replaces the element's text content: existing text children are
    /// detached (element children are kept) and one new text node is
    /// appended. An empty value just detaches the old text.
    pub fn set_text(&mut self, id: NodeId, value: &str) {
        let kept: Vec<NodeId> = self
            .children(id)
            .iter()
            .copied()
            .filter(|&c| self.is_element(c))
            .collect();
        match &mut self.node_mut(id).kind {
            NodeKind::Element { children, .. } => *children = kept,
            NodeKind::Text { .. } => panic!("set_text on a text node"),
        }
        if !value.is_empty() {
            self.append_text(id, value);
        }
    }

    /// Appends a new empty element under `parent`.
    pub fn append_element(&mut self, parent: NodeId, name: &str) -> NodeId {
        debug_assert!(is_xml_name(name), "invalid element name");
        let id = NodeId::new(self.nodes.len());
        self.nodes.push(NodeData {
            parent: Some(parent),
            kind: NodeKind::Element {
                name: name.to_owned(),
                attributes: Vec::new(),
                children: Vec::new(),
            },
        });
        match &mut self.node_mut(parent).kind {
            NodeKind::Element { children, .. } => children.push(id),
            NodeKind::Text { .. } => panic!("append_element under a text node"),
        }
        id
    }

    /// Appends a text node under `parent`.
    pub fn append_text(&mut self, parent: NodeId, content: &str) -> NodeId {
        let id = NodeId::new(self.nodes.len());
        self.nodes.push(NodeData {
            parent: Some(parent),
            kind: NodeKind::Text {
                content: content.to_owned(),
            },
        });
        match &mut self.node_mut(parent).kind {
            NodeKind::Element { children, .. } => children.push(id),
            NodeKind::Text { .. } => panic!("append_text under a text node"),
        }
        id
    }

    /// Deep-copies `src_node` (from another document) under `parent`.
    pub fn append_subtree(&mut self, parent: NodeId, src: &Document, src_node: NodeId) -> NodeId {
        match &src.node(src_node).kind {
            NodeKind::Text { content } => self.append_text(parent, content),
            NodeKind::Element {
                name,
                attributes,
                children,
            } => {
                let id = self.append_element(parent, name);
                for (k, v) in attributes {
                    self.set_attribute(id, k, v);
                }
                for &child in children {
                    self.append_subtree(id, src, child);
                }
                id
            }
        }
    }

    /// Concatenation of all descendant text, with surrounding whitespace
    /// trimmed.
    pub fn string_value(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.collect_text(id, &mut out);
        out.trim().to_owned()
    }

    fn collect_text(&self, id: NodeId, out: &mut String) {
        match &self.node(id).kind {
            NodeKind::Text { content } => out.push_str(content),
            NodeKind::Element { children, .. } => {
                for &child in children {
                    self.collect_text(child, out);
                }
            }
        }
    }

    /// All elements named `name` (including the root), in document order.
    pub fn elements_named(&self, name: &str) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.walk_elements(self.root, &mut |doc, id| {
            if doc.name(id) == Some(name) {
                out.push(id);
            }
        });
        out
    }

    /// All elements in document (pre-) order.
    pub fn all_elements(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.walk_elements(self.root, &mut |_, id| out.push(id));
        out
    }

    fn walk_elements(&self, id: NodeId, visit: &mut impl FnMut(&Document, NodeId)) {
        if self.is_element(id) {
            visit(self, id);
            for child in self.children(id).to_vec() {
                self.walk_elements(child, visit);
            }
        }
    }

    /// Pre-order position of every element, used for document-order sorting.
    pub fn document_order(&self) -> impl Fn(NodeId) -> usize {
        let order = self.all_elements();
        let mut position = alloc::vec![usize::MAX; self.nodes.len()];
        for (i, id) in order.iter().enumerate() {
            position[id.index()] = i;
        }
        move |id: NodeId| position[id.index()]
    }

    /// Canonical slash path of an element, with 1-based indexes among
    /// same-named siblings wherever a name is not unique, e.g.
    /// `/cart/book[2]/tax`.
    pub fn node_location(&self, id: NodeId) -> String {
        debug_assert!(self.is_element(id), "node_location takes an element");
        let mut segments = Vec::new();
        let mut cursor = id;
        loop {
            let name = self.name(cursor).expect("elements only");
            match self.parent(cursor) {
                None => {
                    segments.push(name.to_owned());
                    break;
                }
                Some(parent) => {
                    let same: Vec<NodeId> = self
                        .child_elements(parent)
                        .filter(|&c| self.name(c) == Some(name))
                        .collect();
                    if same.len() > 1 {
                        let pos = same.iter().position(|&c| c == cursor).unwrap() + 1;
                        segments.push(format!("{name}[{pos}]"));
                    } else {
                        segments.push(name.to_owned());
                    }
                    cursor = parent;
                }
            }
        }
        let mut out = String::new();
        for segment in segments.iter().rev() {
            out.push('/');
            out.push_str(segment);
        }
        out
    }

    /// Canonical location of an attribute, e.g. `/cart/@hasDiscount`.
    pub fn attribute_location(&self, id: NodeId, attr: &str) -> String {
        let mut out = self.node_location(id);
        out.push_str("/@");
        out.push_str(attr);
        out
    }

    /// Serializes the document with two-space indentation. Elements whose
    /// content includes text are written inline so that character data
    /// round-trips byte-for-byte; element-only content is pretty-printed.
    pub fn serialize_string(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        self.write_element(self.root, 0, false, &mut out);
        out.push('\n');
        out
    }

    fn write_element(&self, id: NodeId, depth: usize, inline: bool, out: &mut String) {
        if !inline {
            for _ in 0..depth {
                out.push_str("  ");
            }
        }
        let name = self.name(id).expect("elements only");
        out.push('<');
        out.push_str(name);
        for (k, v) in self.attributes(id) {
            out.push(' ');
            out.push_str(k);
            out.push_str("=\"");
            escape_into(v, out);
            out.push('"');
        }
        let children = self.children(id);
        if children.is_empty() {
            out.push_str("/>");
            return;
        }
        out.push('>');
        let has_text = children.iter().any(|&c| self.is_text(c));
        if inline || has_text {
            for &child in children {
                match self.text(child) {
                    Some(text) => escape_into(text, out),
                    None => self.write_element(child, 0, true, out),
                }
            }
        } else {
            out.push('\n');
            for &child in children {
                self.write_element(child, depth + 1, false, out);
                out.push('\n');
            }
            for _ in 0..depth {
                out.push_str("  ");
            }
        }
        out.push_str("</");
        out.push_str(name);
        out.push('>');
    }

    fn subtree_eq(&self, a: NodeId, other: &Document, b: NodeId) -> bool {
        match (&self.node(a).kind, &other.node(b).kind) {
            (NodeKind::Text { content: ta }, NodeKind::Text { content: tb }) => ta == tb,
            (
                NodeKind::Element {
                    name: na,
                    attributes: aa,
                    children: ca,
                },
                NodeKind::Element {
                    name: nb,
                    attributes: ab,
                    children: cb,
                },
            ) => {
                na == nb
                    && aa == ab
                    && ca.len() == cb.len()
                    && ca
                        .iter()
                        .zip(cb.iter())
                        .all(|(&x, &y)| self.subtree_eq(x, other, y))
            }
            _ => false,
        }
    }
}

/// Structural tree equality: names, attribute lists (order-sensitive),
/// children and text must match. The source name label is ignored.
impl PartialEq for Document {
    fn eq(&self, other: &Document) -> bool {
        self.subtree_eq(self.root, other, other.root)
    }
}

impl Eq for Document {}

fn escape_into(raw: &str, out: &mut String) {
    for ch in raw.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
}

/// The part of a (possibly prefixed) name after the last colon:
/// `xsd:element` → `element`, `book` → `book`. Schema and rule documents are
/// matched on local names so any prefix (or none) works.
pub fn local_name(name: &str) -> &str {
    name.rsplit(':').next().unwrap_or(name)
}

/// `true` for names the builder APIs accept; the parser enforces the same
/// shape. Colons are allowed (prefixes are treated as part of the name).
pub fn is_xml_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if is_name_start(c) => {}
        _ => return false,
    }
    chars.all(is_name_char)
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == ':' || c as u32 >= 0x80
}

fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_ascii_digit() || c == '-' || c == '.'
}

fn line_column(text: &str, byte_pos: usize) -> (u32, u32) {
    let prefix = &text[..byte_pos.min(text.len())];
    let line = prefix.bytes().filter(|&b| b == b'\n').count() as u32 + 1;
    let line_start = prefix.rfind('\n').map(|i| i + 1).unwrap_or(0);
    let column = prefix[line_start..].chars().count() as u32 + 1;
    (line, column)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    nodes: Vec<NodeData>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Parser<'a> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        Parser {
            text,
            pos: 0,
            nodes: Vec::new(),
        }
    }

    fn parse(mut self) -> Result<Document, WellFormednessError> {
        if let Some(bad) = self
            .text
            .char_indices()
            .find(|&(_, c)| c < ' ' && c != '\t' && c != '\n' && c != '\r')
        {
            return Err(self.error_at(bad.0, "illegal control character"));
        }
        self.skip_misc()?;
        if !self.looking_at("<") {
            return Err(self.error("expected document element"));
        }
        let root = self.parse_element(None)?;
        self.skip_misc()?;
        if self.pos != self.text.len() {
            return Err(self.error("content after document element"));
        }
        Ok(Document {
            nodes: self.nodes,
            root,
            source_name: String::new(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn looking_at(&self, prefix: &str) -> bool {
        self.rest().starts_with(prefix)
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn error(&self, message: &str) -> WellFormednessError {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, pos: usize, message: &str) -> WellFormednessError {
        let (line, column) = line_column(self.text, pos);
        WellFormednessError {
            message: message.to_owned(),
            line,
            column,
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }

    /// Skips whitespace, comments, processing instructions and a DOCTYPE —
    /// everything allowed around the document element.
    fn skip_misc(&mut self) -> Result<(), WellFormednessError> {
        loop {
            self.skip_ws();
            if self.looking_at("<!--") {
                self.skip_comment()?;
            } else if self.looking_at("<?") {
                self.skip_pi()?;
            } else if self.looking_at("<!DOCTYPE") {
                self.skip_doctype()?;
            } else {
                return Ok(());
            }
        }
    }

    fn skip_comment(&mut self) -> Result<(), WellFormednessError> {
        let start = self.pos;
        self.pos += 4;
        match self.rest().find("-->") {
            Some(end) => {
                self.pos += end + 3;
                Ok(())
            }
            None => Err(self.error_at(start, "unterminated comment")),
        }
    }

    fn skip_pi(&mut self) -> Result<(), WellFormednessError> {
        let start = self.pos;
        self.pos += 2;
        match self.rest().find("?>") {
            Some(end) => {
                self.pos += end + 2;
                Ok(())
            }
            None => Err(self.error_at(start, "unterminated processing instruction")),
        }
    }

    fn skip_doctype(&mut self) -> Result<(), WellFormednessError> {
        let start = self.pos;
        self.pos += "<!DOCTYPE".len();
        let mut in_subset = false;
        loop {
            match self.bump() {
                Some('[') => in_subset = true,
                Some(']') => in_subset = false,
                Some('>') if !in_subset => return Ok(()),
                Some(_) => {}
                None => return Err(self.error_at(start, "unterminated DOCTYPE declaration")),
            }
        }
    }

    fn read_name(&mut self) -> Result<&'a str, WellFormednessError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if is_name_start(c) => {
                self.bump();
            }
            _ => return Err(self.error("expected a name")),
        }
        while matches!(self.peek(), Some(c) if is_name_char(c)) {
            self.bump();
        }
        Ok(&self.text[start..self.pos])
    }

    fn parse_element(&mut self, parent: Option<NodeId>) -> Result<NodeId, WellFormednessError> {
        debug_assert!(self.looking_at("<"));
        self.bump();
        let name = self.read_name()?;
        let id = NodeId::new(self.nodes.len());
        self.nodes.push(NodeData {
            parent,
            kind: NodeKind::Element {
                name: name.to_owned(),
                attributes: Vec::new(),
                children: Vec::new(),
            },
        });
        loop {
            let before = self.pos;
            self.skip_ws();
            match self.peek() {
                Some('/') => {
                    self.bump();
                    if self.bump() != Some('>') {
                        return Err(self.error("expected '>' after '/'"));
                    }
                    return Ok(id);
                }
                Some('>') => {
                    self.bump();
                    break;
                }
                Some(c) if is_name_start(c) => {
                    if before == self.pos {
                        return Err(self.error("expected whitespace before attribute"));
                    }
                    let attr_pos = self.pos;
                    let attr_name = self.read_name()?;
                    self.skip_ws();
                    if self.bump() != Some('=') {
                        return Err(self.error("expected '=' after attribute name"));
                    }
                    self.skip_ws();
                    let value = self.parse_attribute_value()?;
                    let NodeKind::Element { attributes, .. } = &mut self.nodes[id.index()].kind
                    else {
                        unreachable!()
                    };
                    if attributes.iter().any(|(k, _)| k == attr_name) {
                        return Err(self.error_at(attr_pos, "duplicate attribute"));
                    }
                    attributes.push((attr_name.to_owned(), value));
                }
                Some(_) => return Err(self.error("malformed start tag")),
                None => return Err(self.error("unexpected end of input in start tag")),
            }
        }
        self.parse_content(id)?;
        // Closing tag: parse_content stops right after "</".
        let close_pos = self.pos;
        let close_name = self.read_name()?;
        if close_name != self.element_name(id) {
            return Err(self.error_at(
                close_pos,
                &format!(
                    "mismatched closing tag: expected </{}>, found </{}>",
                    self.element_name(id),
                    close_name
                ),
            ));
        }
        self.skip_ws();
        if self.bump() != Some('>') {
            return Err(self.error("expected '>' in closing tag"));
        }
        Ok(id)
    }

    fn element_name(&self, id: NodeId) -> &str {
        match &self.nodes[id.index()].kind {
            NodeKind::Element { name, .. } => name,
            NodeKind::Text { .. } => unreachable!(),
        }
    }

    fn parse_attribute_value(&mut self) -> Result<String, WellFormednessError> {
        let quote = match self.peek() {
            Some(q @ ('"' | '\'')) => q,
            _ => return Err(self.error("expected quoted attribute value")),
        };
        self.bump();
        let mut value = String::new();
        loop {
            match self.peek() {
                Some(c) if c == quote => {
                    self.bump();
                    return Ok(value);
                }
                Some('<') => return Err(self.error("attribute value contains '<'")),
                Some('&') => value.push(self.parse_reference()?),
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
                None => return Err(self.error("unterminated attribute value")),
            }
        }
    }

    /// Parses element content up to (and consuming) the `</` of the closing
    /// tag. Adjacent character data and CDATA runs merge into one text node.
    fn parse_content(&mut self, parent: NodeId) -> Result<(), WellFormednessError> {
        let mut text = String::new();
        loop {
            if self.looking_at("<!--") {
                self.skip_comment()?;
            } else if self.looking_at("<![CDATA[") {
                let start = self.pos;
                self.pos += "<![CDATA[".len();
                match self.rest().find("]]>") {
                    Some(end) => {
                        text.push_str(&self.rest()[..end]);
                        self.pos += end + 3;
                    }
                    None => return Err(self.error_at(start, "unterminated CDATA section")),
                }
            } else if self.looking_at("<?") {
                self.skip_pi()?;
            } else if self.looking_at("</") {
                self.flush_text(parent, &mut text);
                self.pos += 2;
                return Ok(());
            } else if self.looking_at("<") {
                self.flush_text(parent, &mut text);
                let child = self.parse_element(Some(parent))?;
                let NodeKind::Element { children, .. } = &mut self.nodes[parent.index()].kind
                else {
                    unreachable!()
                };
                children.push(child);
            } else {
                match self.peek() {
                    Some('&') => text.push(self.parse_reference()?),
                    Some(c) => {
                        text.push(c);
                        self.bump();
                    }
                    None => return Err(self.error("unexpected end of input in element content")),
                }
            }
        }
    }

    fn flush_text(&mut self, parent: NodeId, text: &mut String) {
        if text.trim().is_empty() {
            text.clear();
            return;
        }
        let id = NodeId::new(self.nodes.len());
        self.nodes.push(NodeData {
            parent: Some(parent),
            kind: NodeKind::Text {
                content: core::mem::take(text),
            },
        });
        let NodeKind::Element { children, .. } = &mut self.nodes[parent.index()].kind else {
            unreachable!()
        };
        children.push(id);
    }

    /// Decodes `&lt; &gt; &amp; &quot; &apos;` and numeric character
    /// references (`&#10;`, `&#x1F;`).
    fn parse_reference(&mut self) -> Result<char, WellFormednessError> {
        let start = self.pos;
        debug_assert!(self.looking_at("&"));
        self.bump();
        let end = match self.rest().find(';') {
            Some(end) => end,
            None => return Err(self.error_at(start, "unterminated entity reference")),
        };
        let body = &self.rest()[..end];
        self.pos += end + 1;
        let decoded = match body {
            "lt" => '<',
            "gt" => '>',
            "amp" => '&',
            "quot" => '"',
            "apos" => '\'',
            _ => {
                let code = if let Some(hex) = body.strip_prefix("#x") {
                    u32::from_str_radix(hex, 16).ok()
                } else if let Some(dec) = body.strip_prefix('#') {
                    dec.parse::<u32>().ok()
                } else {
                    return Err(self.error_at(start, &format!("unknown entity '&{body};'")));
                };
                match code.and_then(char::from_u32) {
                    Some(c) if c >= ' ' || c == '\t' || c == '\n' || c == '\r' => c,
                    _ => return Err(self.error_at(start, "illegal character reference")),
                }
            }
        };
        Ok(decoded)
    }
}
