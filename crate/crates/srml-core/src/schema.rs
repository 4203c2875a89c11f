//! XSD-lite: the schema subset the rule engine understands.
//!
//! Covered: top-level and inline element declarations, `sequence` / `choice`
//! content with `minOccurs` / `maxOccurs`, named and anonymous `simpleType`
//! restrictions (base `string` / `integer` / `float` / `boolean`, `pattern`,
//! `enumeration`), attribute declarations with `use`, and
//! `annotation`/`appinfo` blocks, from which embedded `srml-def` rule
//! payloads are extracted. Everything else (type derivation, groups, keys,
//! imports, other facets) is rejected at parse time with a [`SchemaError`]
//! naming the construct.
//!
//! Patterns use a deliberately small regex dialect — literals, `\d`, escaped
//! punctuation, `{n}` repetition and top-level alternation — matched
//! full-string, which is exactly what ISBN-style patterns need.
//!
//! All schema elements are matched by local name, so `xsd:`, `xs:` or no
//! prefix at all are interchangeable.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::parse_decimal;
use crate::report::{Finding, Severity};
use crate::xml::{local_name, Document, NodeId};

/// A parsed schema. Immutable after parsing and freely shareable.
#[derive(Clone, Debug)]
pub struct Schema {
    element_decls: BTreeMap<String, ElementDecl>,
    simple_types: BTreeMap<String, SimpleTypeDef>,
    /// `srml-def` payloads found in appinfo blocks, in document order, each
    /// copied into its own document.
    srml_sources: Vec<Document>,
}

#[derive(Clone, Debug)]
pub struct ElementDecl {
    pub name: String,
    pub content: Content,
    pub attributes: Vec<AttributeDecl>,
}

#[derive(Clone, Debug)]
pub enum Content {
    Simple(TypeRef),
    Complex(ComplexContent),
}

#[derive(Clone, Debug)]
pub struct ComplexContent {
    pub model: Model,
    pub particles: Vec<Particle>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Sequence,
    Choice,
}

#[derive(Clone, Debug)]
pub struct Particle {
    pub name: String,
    pub min_occurs: u32,
    /// `None` means unbounded.
    pub max_occurs: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct AttributeDecl {
    pub name: String,
    pub ty: TypeRef,
    pub required: bool,
}

#[derive(Clone, Debug)]
pub enum TypeRef {
    Builtin(BaseType),
    Named(String),
    Inline(SimpleTypeDef),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BaseType {
    String,
    Integer,
    Float,
    Boolean,
}

impl BaseType {
    fn from_local(name: &str) -> Option<BaseType> {
        Some(match name {
            "string" => BaseType::String,
            "integer" => BaseType::Integer,
            "float" => BaseType::Float,
            "boolean" => BaseType::Boolean,
            _ => return None,
        })
    }

    fn xsd_name(self) -> &'static str {
        match self {
            BaseType::String => "xsd:string",
            BaseType::Integer => "xsd:integer",
            BaseType::Float => "xsd:float",
            BaseType::Boolean => "xsd:boolean",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimpleTypeDef {
    pub base: BaseType,
    pub pattern: Option<XsdPattern>,
    pub enumeration: Option<Vec<String>>,
}

/// Schema-level problem: an unsupported construct or an inconsistent schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError {
    pub message: String,
}

impl SchemaError {
    fn new(message: String) -> SchemaError {
        SchemaError { message }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "schema error: {}", self.message)
    }
}

impl core::error::Error for SchemaError {}

// ---------------------------------------------------------------------------
// Pattern dialect

/// An XSD pattern in the restricted dialect: alternation of fixed-length
/// sequences of literals, `\d` and `{n}`-repeated atoms. Matching is
/// anchored — the whole value must be consumed.
#[derive(Clone, Debug)]
pub struct XsdPattern {
    source: String,
    alternatives: Vec<Vec<Matcher>>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Matcher {
    Digit,
    Literal(char),
}

impl XsdPattern {
    pub fn parse(source: &str) -> Result<XsdPattern, SchemaError> {
        let mut alternatives = Vec::new();
        for alt in source.split('|') {
            alternatives.push(parse_alternative(alt, source)?);
        }
        Ok(XsdPattern {
            source: source.to_owned(),
            alternatives,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn matches(&self, value: &str) -> bool {
        let chars: Vec<char> = value.chars().collect();
        self.alternatives.iter().any(|alt| {
            alt.len() == chars.len()
                && alt.iter().zip(chars.iter()).all(|(m, &c)| match m {
                    Matcher::Digit => c.is_ascii_digit(),
                    Matcher::Literal(l) => *l == c,
                })
        })
    }
}

fn parse_alternative(alt: &str, source: &str) -> Result<Vec<Matcher>, SchemaError> {
    let unsupported = |what: &str| {
        Err(SchemaError::new(format!(
            "unsupported regex construct ({what}) in pattern '{source}'"
        )))
    };
    let mut out = Vec::new();
    let mut chars = alt.chars().peekable();
    while let Some(c) = chars.next() {
        let matcher = match c {
            '\\' => match chars.next() {
                Some('d') => Matcher::Digit,
                Some(e) if e.is_ascii_punctuation() => Matcher::Literal(e),
                Some(e) => return unsupported(&format!("escape '\\{e}'")),
                None => return unsupported("trailing backslash"),
            },
            '.' | '*' | '+' | '?' | '(' | ')' | '[' | ']' | '^' | '$' => {
                return unsupported(&format!("'{c}'"))
            }
            '{' => return unsupported("repetition without an atom"),
            c => Matcher::Literal(c),
        };
        if chars.peek() == Some(&'{') {
            chars.next();
            let mut digits = String::new();
            loop {
                match chars.next() {
                    Some(d) if d.is_ascii_digit() => digits.push(d),
                    Some('}') => break,
                    Some(',') => return unsupported("bounded repetition '{n,m}'"),
                    _ => return unsupported("malformed repetition"),
                }
            }
            let count: u32 = digits
                .parse()
                .map_err(|_| SchemaError::new(format!("malformed repetition in '{source}'")))?;
            for _ in 0..count {
                out.push(matcher);
            }
        } else {
            out.push(matcher);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Schema parsing

/// Parses an XSD document into a [`Schema`].
pub fn parse_schema(doc: &Document) -> Result<Schema, SchemaError> {
    let root = doc.root();
    if local_name(doc.name(root).unwrap_or("")) != "schema" {
        return Err(SchemaError::new(format!(
            "root element '{}' is not a schema",
            doc.name(root).unwrap_or("")
        )));
    }
    let mut schema = Schema {
        element_decls: BTreeMap::new(),
        simple_types: BTreeMap::new(),
        srml_sources: Vec::new(),
    };
    for child in doc.child_elements(root) {
        match local_name(doc.name(child).unwrap()) {
            "element" => {
                parse_element_decl(doc, child, &mut schema)?;
            }
            "simpleType" => {
                let name = required_attr(doc, child, "name")?;
                let def = parse_simple_type_body(doc, child)?;
                if schema.simple_types.insert(name.to_owned(), def).is_some() {
                    return Err(SchemaError::new(format!(
                        "duplicate simpleType declaration '{name}'"
                    )));
                }
            }
            "annotation" => collect_srml(doc, child, &mut schema.srml_sources),
            other => {
                return Err(SchemaError::new(format!(
                    "unsupported schema construct '{other}'"
                )))
            }
        }
    }
    // Every named type reference must resolve.
    let check = |ty: &TypeRef, owner: &str| -> Result<(), SchemaError> {
        if let TypeRef::Named(name) = ty {
            if !schema.simple_types.contains_key(name) {
                return Err(SchemaError::new(format!(
                    "unknown type '{name}' referenced by '{owner}'"
                )));
            }
        }
        Ok(())
    };
    for decl in schema.element_decls.values() {
        if let Content::Simple(ty) = &decl.content {
            check(ty, &decl.name)?;
        }
        for attr in &decl.attributes {
            check(&attr.ty, &decl.name)?;
        }
    }
    Ok(schema)
}

fn required_attr<'a>(doc: &'a Document, node: NodeId, name: &str) -> Result<&'a str, SchemaError> {
    doc.attribute(node, name).ok_or_else(|| {
        SchemaError::new(format!(
            "'{}' is missing the required '{name}' attribute",
            doc.name(node).unwrap_or("?")
        ))
    })
}

/// Parses an `xsd:element`, registering its declaration (and any inline
/// declarations found below it). Returns the declared name.
fn parse_element_decl<'a>(
    doc: &'a Document,
    node: NodeId,
    schema: &mut Schema,
) -> Result<&'a str, SchemaError> {
    let name = required_attr(doc, node, "name")?;
    if doc.attribute(node, "ref").is_some() {
        return Err(SchemaError::new(format!(
            "element references (ref=) are not supported ('{name}')"
        )));
    }
    let type_attr = doc.attribute(node, "type");
    let mut content: Option<Content> = type_attr.map(|t| Content::Simple(type_ref(t)));
    let mut attributes = Vec::new();
    for child in doc.child_elements(node) {
        match local_name(doc.name(child).unwrap()) {
            "complexType" => {
                if content.is_some() {
                    return Err(SchemaError::new(format!(
                        "element '{name}' has both a type attribute and inline content"
                    )));
                }
                content = Some(parse_complex_type(doc, child, name, schema, &mut attributes)?);
            }
            "simpleType" => {
                if content.is_some() {
                    return Err(SchemaError::new(format!(
                        "element '{name}' has both a type attribute and inline content"
                    )));
                }
                content = Some(Content::Simple(TypeRef::Inline(parse_simple_type_body(
                    doc, child,
                )?)));
            }
            "annotation" => {} // documentation / appinfo on a declaration
            other => {
                return Err(SchemaError::new(format!(
                    "unsupported construct '{other}' in element '{name}'"
                )))
            }
        }
    }
    let content = content.ok_or_else(|| {
        SchemaError::new(format!("element declaration '{name}' has no type"))
    })?;
    let decl = ElementDecl {
        name: name.to_owned(),
        content,
        attributes,
    };
    if schema.element_decls.insert(name.to_owned(), decl).is_some() {
        return Err(SchemaError::new(format!(
            "duplicate element declaration '{name}'"
        )));
    }
    Ok(name)
}

fn parse_complex_type(
    doc: &Document,
    node: NodeId,
    owner: &str,
    schema: &mut Schema,
    attributes: &mut Vec<AttributeDecl>,
) -> Result<Content, SchemaError> {
    let mut model: Option<(Model, Vec<Particle>)> = None;
    for child in doc.child_elements(node) {
        let kind = local_name(doc.name(child).unwrap());
        match kind {
            "sequence" | "choice" => {
                if model.is_some() {
                    return Err(SchemaError::new(format!(
                        "element '{owner}' has more than one content model"
                    )));
                }
                let m = if kind == "sequence" {
                    Model::Sequence
                } else {
                    Model::Choice
                };
                model = Some((m, parse_particles(doc, child, owner, schema)?));
            }
            "attribute" => attributes.push(parse_attribute_decl(doc, child, owner)?),
            "annotation" => {}
            other => {
                return Err(SchemaError::new(format!(
                    "unsupported construct '{other}' in complexType of '{owner}'"
                )))
            }
        }
    }
    let (model, particles) = model.unwrap_or((Model::Sequence, Vec::new()));
    Ok(Content::Complex(ComplexContent { model, particles }))
}

fn parse_particles(
    doc: &Document,
    node: NodeId,
    owner: &str,
    schema: &mut Schema,
) -> Result<Vec<Particle>, SchemaError> {
    let mut particles = Vec::new();
    for child in doc.child_elements(node) {
        match local_name(doc.name(child).unwrap()) {
            "element" => {
                let min_occurs = occurs_attr(doc, child, "minOccurs", owner)?.unwrap_or(1);
                let max_occurs = match doc.attribute(child, "maxOccurs") {
                    Some("unbounded") => None,
                    _ => Some(occurs_attr(doc, child, "maxOccurs", owner)?.unwrap_or(1)),
                };
                if let Some(max) = max_occurs {
                    if min_occurs > max {
                        return Err(SchemaError::new(format!(
                            "minOccurs exceeds maxOccurs in '{owner}'"
                        )));
                    }
                }
                // A particle with a type is also a declaration; a bare one
                // just references a declaration (or leaves the child
                // unconstrained).
                let has_body = doc.attribute(child, "type").is_some()
                    || doc.child_elements(child).next().is_some();
                let name = if has_body {
                    parse_element_decl(doc, child, schema)?.to_owned()
                } else {
                    required_attr(doc, child, "name")?.to_owned()
                };
                particles.push(Particle {
                    name,
                    min_occurs,
                    max_occurs,
                });
            }
            other => {
                return Err(SchemaError::new(format!(
                    "unsupported construct '{other}' in content model of '{owner}'"
                )))
            }
        }
    }
    Ok(particles)
}

fn occurs_attr(
    doc: &Document,
    node: NodeId,
    attr: &str,
    owner: &str,
) -> Result<Option<u32>, SchemaError> {
    match doc.attribute(node, attr) {
        None => Ok(None),
        Some(raw) => raw.parse::<u32>().map(Some).map_err(|_| {
            SchemaError::new(format!("malformed {attr} '{raw}' in '{owner}'"))
        }),
    }
}

fn parse_attribute_decl(
    doc: &Document,
    node: NodeId,
    owner: &str,
) -> Result<AttributeDecl, SchemaError> {
    let name = required_attr(doc, node, "name")?;
    let required = match doc.attribute(node, "use") {
        None | Some("optional") => false,
        Some("required") => true,
        Some(other) => {
            return Err(SchemaError::new(format!(
                "unsupported attribute use '{other}' on '{name}'"
            )))
        }
    };
    let ty = match doc.attribute(node, "type") {
        Some(t) => type_ref(t),
        None => {
            let inline = doc
                .child_elements(node)
                .find(|&c| local_name(doc.name(c).unwrap()) == "simpleType");
            match inline {
                Some(st) => TypeRef::Inline(parse_simple_type_body(doc, st)?),
                None => {
                    return Err(SchemaError::new(format!(
                        "attribute '{name}' of '{owner}' has no type"
                    )))
                }
            }
        }
    };
    Ok(AttributeDecl {
        name: name.to_owned(),
        ty,
        required,
    })
}

fn type_ref(name: &str) -> TypeRef {
    match BaseType::from_local(local_name(name)) {
        Some(base) => TypeRef::Builtin(base),
        None => TypeRef::Named(name.to_owned()),
    }
}

/// Parses the body of an `xsd:simpleType` (its `restriction`).
fn parse_simple_type_body(doc: &Document, node: NodeId) -> Result<SimpleTypeDef, SchemaError> {
    let mut restriction = None;
    for child in doc.child_elements(node) {
        match local_name(doc.name(child).unwrap()) {
            "restriction" => restriction = Some(child),
            "annotation" => {}
            other => {
                return Err(SchemaError::new(format!(
                    "unsupported simpleType construct '{other}'"
                )))
            }
        }
    }
    let restriction =
        restriction.ok_or_else(|| SchemaError::new("simpleType without restriction".into()))?;
    let base_name = required_attr(doc, restriction, "base")?;
    let base = BaseType::from_local(local_name(base_name)).ok_or_else(|| {
        SchemaError::new(format!("unsupported restriction base '{base_name}'"))
    })?;
    let mut pattern = None;
    let mut enumeration: Option<Vec<String>> = None;
    for facet in doc.child_elements(restriction) {
        let value = required_attr(doc, facet, "value")?;
        match local_name(doc.name(facet).unwrap()) {
            "pattern" => pattern = Some(XsdPattern::parse(value)?),
            "enumeration" => enumeration.get_or_insert_with(Vec::new).push(value.to_owned()),
            other => {
                return Err(SchemaError::new(format!(
                    "unsupported restriction facet '{other}'"
                )))
            }
        }
    }
    Ok(SimpleTypeDef {
        base,
        pattern,
        enumeration,
    })
}

/// Collects `srml-def` children of every `appinfo` under an `annotation`,
/// copying each payload into its own document. Non-SRML appinfo content
/// (JAXB bindings and the like) is ignored.
fn collect_srml(doc: &Document, annotation: NodeId, out: &mut Vec<Document>) {
    for appinfo in doc.child_elements(annotation) {
        if local_name(doc.name(appinfo).unwrap()) != "appinfo" {
            continue; // documentation etc.
        }
        for child in doc.child_elements(appinfo) {
            if local_name(doc.name(child).unwrap()) == "srml-def" {
                out.push(Document::subtree_document(doc, child));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Structural validation

impl Schema {
    pub fn element_decl(&self, name: &str) -> Option<&ElementDecl> {
        self.element_decls.get(name)
    }

    pub fn simple_type(&self, name: &str) -> Option<&SimpleTypeDef> {
        self.simple_types.get(name)
    }

    pub fn element_count(&self) -> usize {
        self.element_decls.len()
    }
}

/// Returns the embedded SRML payloads in document order.
pub fn extract_srml(schema: &Schema) -> &[Document] {
    &schema.srml_sources
}

/// Attributes that belong to XML plumbing rather than the vocabulary:
/// namespace declarations and `xsi:*` hints are never validated.
fn is_plumbing_attribute(name: &str) -> bool {
    name == "xmlns" || name.starts_with("xmlns:") || name.starts_with("xsi:")
}

/// Checks a document against the schema. Problems come back as findings
/// (severity [`Severity::Structural`]) in document order of the offending
/// node; an empty list means structurally valid.
pub fn validate_structure(doc: &Document, schema: &Schema) -> Vec<Finding> {
    let mut findings = Vec::new();
    let root = doc.root();
    let root_name = doc.name(root).unwrap();
    match schema.element_decls.get(root_name) {
        None => findings.push(structural(
            format!("no declaration for element '{root_name}'"),
            doc.node_location(root),
            root_name,
            "",
        )),
        Some(decl) => check_element(doc, schema, root, decl, &mut findings),
    }
    findings
}

fn structural(message: String, location: String, found: &str, expected: &str) -> Finding {
    Finding {
        severity: Severity::Structural,
        message,
        location,
        found: found.to_owned(),
        expected: expected.to_owned(),
        instance_index: 0,
    }
}

fn check_element(
    doc: &Document,
    schema: &Schema,
    node: NodeId,
    decl: &ElementDecl,
    findings: &mut Vec<Finding>,
) {
    check_attributes(doc, schema, node, decl, findings);
    match &decl.content {
        Content::Simple(ty) => {
            for child in doc.child_elements(node) {
                findings.push(structural(
                    format!(
                        "unknown element '{}' under '{}'",
                        doc.name(child).unwrap(),
                        decl.name
                    ),
                    doc.node_location(child),
                    doc.name(child).unwrap(),
                    "",
                ));
            }
            let value = doc.string_value(node);
            if let Some(finding) =
                check_value(schema, ty, &value, doc.node_location(node))
            {
                findings.push(finding);
            }
        }
        Content::Complex(content) => {
            check_content_model(doc, node, decl, content, findings);
            for child in doc.child_elements(node) {
                if let Some(child_decl) = schema.element_decls.get(doc.name(child).unwrap()) {
                    check_element(doc, schema, child, child_decl, findings);
                }
            }
        }
    }
}

fn check_attributes(
    doc: &Document,
    schema: &Schema,
    node: NodeId,
    decl: &ElementDecl,
    findings: &mut Vec<Finding>,
) {
    let declared_attrs: &[AttributeDecl] = match &decl.content {
        Content::Complex(_) => &decl.attributes,
        // Simple-content elements cannot declare attributes in this subset.
        Content::Simple(_) => &[],
    };
    for (name, value) in doc.attributes(node) {
        if is_plumbing_attribute(name) {
            continue;
        }
        match declared_attrs.iter().find(|a| &a.name == name) {
            None => findings.push(structural(
                format!("undeclared attribute '{name}' on '{}'", decl.name),
                doc.attribute_location(node, name),
                value,
                "",
            )),
            Some(attr_decl) => {
                if let Some(finding) = check_value(
                    schema,
                    &attr_decl.ty,
                    value,
                    doc.attribute_location(node, name),
                ) {
                    findings.push(finding);
                }
            }
        }
    }
    for attr_decl in declared_attrs {
        if attr_decl.required && doc.attribute(node, &attr_decl.name).is_none() {
            findings.push(structural(
                format!(
                    "required attribute '{}' is missing from '{}'",
                    attr_decl.name, decl.name
                ),
                doc.attribute_location(node, &attr_decl.name),
                "",
                &attr_decl.name,
            ));
        }
    }
}

fn check_content_model(
    doc: &Document,
    node: NodeId,
    decl: &ElementDecl,
    content: &ComplexContent,
    findings: &mut Vec<Finding>,
) {
    let children: Vec<NodeId> = doc.child_elements(node).collect();
    let allowed = |name: &str| content.particles.iter().any(|p| p.name == name);
    let allowed_names = || {
        let names: Vec<&str> = content.particles.iter().map(|p| p.name.as_str()).collect();
        names.join("|")
    };
    match content.model {
        Model::Sequence => {
            // Greedy left-to-right match of the particle list.
            let mut counts = alloc::vec![0u32; content.particles.len()];
            let mut particle_idx = 0usize;
            for (pos, &child) in children.iter().enumerate() {
                let child_name = doc.name(child).unwrap();
                if !allowed(child_name) {
                    findings.push(structural(
                        format!("unknown element '{child_name}' under '{}'", decl.name),
                        doc.node_location(child),
                        child_name,
                        &allowed_names(),
                    ));
                    continue;
                }
                // Advance to the particle this child extends.
                let mut placed = false;
                while particle_idx < content.particles.len() {
                    let particle = &content.particles[particle_idx];
                    let open = particle
                        .max_occurs
                        .map(|max| counts[particle_idx] < max)
                        .unwrap_or(true);
                    if particle.name == child_name && open {
                        counts[particle_idx] += 1;
                        placed = true;
                        break;
                    }
                    particle_idx += 1;
                }
                if !placed {
                    let exhausted = content.particles.iter().enumerate().any(|(i, p)| {
                        p.name == child_name
                            && p.max_occurs.map(|max| counts[i] >= max).unwrap_or(false)
                    });
                    if exhausted {
                        findings.push(structural(
                            format!(
                                "too many occurrences of '{child_name}' in '{}'",
                                decl.name
                            ),
                            doc.node_location(child),
                            child_name,
                            &occurrence_bounds(content, child_name),
                        ));
                    } else {
                        findings.push(structural(
                            format!(
                                "element '{child_name}' violates the sequence order in '{}'",
                                decl.name
                            ),
                            doc.node_location(child),
                            child_name,
                            &allowed_names(),
                        ));
                    }
                    // Resynchronize so later children are diagnosed against
                    // what has actually been seen so far: name-based counts
                    // over the visited prefix, capped at each maximum.
                    particle_idx = 0;
                    for (i, p) in content.particles.iter().enumerate() {
                        let seen = children[..=pos]
                            .iter()
                            .filter(|&&c| doc.name(c) == Some(p.name.as_str()))
                            .count() as u32;
                        counts[i] = seen.min(p.max_occurs.unwrap_or(u32::MAX));
                    }
                }
            }
            // Minimum-occurrence pass, on plain name counts: order problems
            // were already flagged above.
            for particle in &content.particles {
                let total = children
                    .iter()
                    .filter(|&&c| doc.name(c) == Some(particle.name.as_str()))
                    .count() as u32;
                if total < particle.min_occurs {
                    findings.push(structural(
                        format!(
                            "too few occurrences of '{}' in '{}'",
                            particle.name, decl.name
                        ),
                        doc.node_location(node),
                        &format!("{total}"),
                        &occurrence_bounds(content, &particle.name),
                    ));
                }
            }
        }
        Model::Choice => {
            // Order-free: every child must name a particle, and per-particle
            // counts must respect the bounds.
            for &child in &children {
                let child_name = doc.name(child).unwrap();
                if !allowed(child_name) {
                    findings.push(structural(
                        format!("unknown element '{child_name}' under '{}'", decl.name),
                        doc.node_location(child),
                        child_name,
                        &allowed_names(),
                    ));
                }
            }
            for particle in &content.particles {
                let count = children
                    .iter()
                    .filter(|&&c| doc.name(c) == Some(particle.name.as_str()))
                    .count() as u32;
                if count < particle.min_occurs {
                    findings.push(structural(
                        format!(
                            "too few occurrences of '{}' in '{}'",
                            particle.name, decl.name
                        ),
                        doc.node_location(node),
                        &format!("{count}"),
                        &occurrence_bounds(content, &particle.name),
                    ));
                } else if particle.max_occurs.map(|max| count > max).unwrap_or(false) {
                    findings.push(structural(
                        format!(
                            "too many occurrences of '{}' in '{}'",
                            particle.name, decl.name
                        ),
                        doc.node_location(node),
                        &format!("{count}"),
                        &occurrence_bounds(content, &particle.name),
                    ));
                }
            }
        }
    }
}

fn occurrence_bounds(content: &ComplexContent, name: &str) -> String {
    content
        .particles
        .iter()
        .find(|p| p.name == name)
        .map(|p| match p.max_occurs {
            Some(max) => format!("{}..{}", p.min_occurs, max),
            None => format!("{}..*", p.min_occurs),
        })
        .unwrap_or_default()
}

fn check_value(
    schema: &Schema,
    ty: &TypeRef,
    value: &str,
    location: String,
) -> Option<Finding> {
    let def_storage;
    let def: &SimpleTypeDef = match ty {
        TypeRef::Builtin(base) => {
            def_storage = SimpleTypeDef {
                base: *base,
                pattern: None,
                enumeration: None,
            };
            &def_storage
        }
        TypeRef::Named(name) => schema
            .simple_types
            .get(name)
            .expect("references checked at parse time"),
        TypeRef::Inline(def) => def,
    };
    let base_ok = match def.base {
        BaseType::String => true,
        BaseType::Integer => is_integer(value),
        BaseType::Float => parse_decimal(value).is_some(),
        BaseType::Boolean => matches!(value, "true" | "false" | "1" | "0"),
    };
    if !base_ok {
        return Some(structural(
            format!("value is not a valid {}", def.base.xsd_name()),
            location,
            value,
            def.base.xsd_name(),
        ));
    }
    if let Some(pattern) = &def.pattern {
        if !pattern.matches(value) {
            return Some(structural(
                "value does not match the pattern".into(),
                location,
                value,
                pattern.source(),
            ));
        }
    }
    if let Some(enumeration) = &def.enumeration {
        if !enumeration.iter().any(|e| e == value) {
            return Some(structural(
                "value is not in the enumeration".into(),
                location,
                value,
                &enumeration.join("|"),
            ));
        }
    }
    None
}

fn is_integer(value: &str) -> bool {
    let body = value.strip_prefix(['+', '-']).unwrap_or(value);
    !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
}
