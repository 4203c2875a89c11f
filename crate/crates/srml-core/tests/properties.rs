//! Property tests for the format boundaries: whatever the printers emit,
//! the parsers must accept and map back to an equal value.

use proptest::prelude::*;

use srml_core::expr::{parse_template, ExprAst};
use srml_core::path::{parse_path, Anchor, Axis, NameTest, PathExpr, Predicate, Step, Terminal};
use srml_core::relational::{format_csv, parse_csv};
use srml_core::rules::{
    parse_standalone, print_ruleset, DatabaseSpec, MatchMode, Mode, ReferenceSpec, RuleDef,
    RuleInstance, RuleSet, RuleTarget, RulesFor, TableSpec,
};
use srml_core::xml::Document;

// ---------------------------------------------------------------------------
// XML: serialize -> parse returns an equal tree
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum NodeSpec {
    Element {
        name: String,
        attrs: Vec<(String, String)>,
        children: Vec<NodeSpec>,
    },
    Text(String),
}

fn arb_name() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9]{0,3}"
}

/// Visible ASCII plus space, with at least one non-space character so the
/// pretty-printer cannot confuse it with indentation.
fn arb_text() -> impl Strategy<Value = String> {
    "[ -~]{1,12}".prop_filter("whitespace-only text is not preserved", |s| {
        !s.trim().is_empty()
    })
}

fn arb_attrs() -> impl Strategy<Value = Vec<(String, String)>> {
    prop::collection::btree_map(arb_name(), "[ -~]{0,10}", 0..3)
        .prop_map(|m| m.into_iter().collect())
}

fn arb_node() -> impl Strategy<Value = NodeSpec> {
    let leaf = prop_oneof![
        arb_text().prop_map(NodeSpec::Text),
        (arb_name(), arb_attrs()).prop_map(|(name, attrs)| NodeSpec::Element {
            name,
            attrs,
            children: Vec::new(),
        }),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        (arb_name(), arb_attrs(), prop::collection::vec(inner, 0..4)).prop_map(
            |(name, attrs, children)| NodeSpec::Element {
                name,
                attrs,
                children: merge_adjacent_text(children),
            },
        )
    })
}

/// The parser coalesces adjacent character data into one text node, so the
/// generator must not produce two text children in a row.
fn merge_adjacent_text(children: Vec<NodeSpec>) -> Vec<NodeSpec> {
    let mut out: Vec<NodeSpec> = Vec::new();
    for child in children {
        match (out.last_mut(), child) {
            (Some(NodeSpec::Text(prev)), NodeSpec::Text(next)) => prev.push_str(&next),
            (_, child) => out.push(child),
        }
    }
    out
}

fn arb_document() -> impl Strategy<Value = Document> {
    (arb_name(), arb_attrs(), prop::collection::vec(arb_node(), 0..4)).prop_map(
        |(name, attrs, children)| {
            let mut doc = Document::new(&name);
            let root = doc.root();
            for (attr, value) in &attrs {
                doc.set_attribute(root, attr, value);
            }
            for child in merge_adjacent_text(children) {
                build_node(&mut doc, root, &child);
            }
            doc
        },
    )
}

fn build_node(doc: &mut Document, parent: srml_core::NodeId, spec: &NodeSpec) {
    match spec {
        NodeSpec::Text(text) => {
            doc.append_text(parent, text);
        }
        NodeSpec::Element {
            name,
            attrs,
            children,
        } => {
            let el = doc.append_element(parent, name);
            for (attr, value) in attrs {
                doc.set_attribute(el, attr, value);
            }
            for child in children {
                build_node(doc, el, child);
            }
        }
    }
}

proptest! {
    #[test]
    fn xml_serialize_then_parse_is_identity(doc in arb_document()) {
        let text = doc.serialize_string();
        let reparsed = Document::parse_str(&text)
            .unwrap_or_else(|e| panic!("serializer emitted unparseable XML: {e}\n{text}"));
        prop_assert_eq!(doc, reparsed);
    }
}

// ---------------------------------------------------------------------------
// Paths: Display -> parse returns an equal AST
// ---------------------------------------------------------------------------

fn arb_name_test() -> impl Strategy<Value = NameTest> {
    prop_oneof![
        4 => arb_name().prop_map(NameTest::Name),
        1 => Just(NameTest::Any),
    ]
}

fn arb_predicate() -> impl Strategy<Value = Predicate> {
    prop_oneof![
        (1u32..=5).prop_map(Predicate::Position),
        arb_name().prop_map(Predicate::HasAttribute),
        (arb_name(), "[a-z0-9 ]{0,4}")
            .prop_map(|(a, v)| Predicate::AttributeEquals(a, v)),
        // values forcing each quoting style (never both quotes at once)
        arb_name().prop_map(|a| Predicate::AttributeEquals(a, "it's".to_string())),
        arb_name().prop_map(|a| Predicate::AttributeEquals(a, "a\"b".to_string())),
    ]
}

fn child_step() -> impl Strategy<Value = Step> {
    (arb_name_test(), prop::collection::vec(arb_predicate(), 0..3)).prop_map(
        |(test, predicates)| Step {
            axis: Axis::Child,
            test,
            predicates,
        },
    )
}

fn parent_step() -> Step {
    Step {
        axis: Axis::Parent,
        test: NameTest::Any,
        predicates: Vec::new(),
    }
}

fn arb_terminal() -> impl Strategy<Value = Terminal> {
    prop_oneof![
        Just(Terminal::None),
        arb_name().prop_map(Terminal::Attribute),
        Just(Terminal::Text),
    ]
}

fn arb_path() -> impl Strategy<Value = PathExpr> {
    let anchored = (
        prop_oneof![Just(Anchor::Root), Just(Anchor::Anywhere)],
        prop::collection::vec(child_step(), 1..4),
        arb_terminal(),
    )
        .prop_map(|(anchor, steps, terminal)| PathExpr {
            anchor,
            steps,
            terminal,
        });
    // Parent steps only appear as a prefix of a relative path. A relative
    // path with no steps needs a terminal to be non-empty.
    let relative = (0usize..3, prop::collection::vec(child_step(), 0..4), arb_terminal())
        .prop_filter("empty path", |(parents, steps, terminal)| {
            *parents > 0 || !steps.is_empty() || *terminal != Terminal::None
        })
        .prop_map(|(parents, children, terminal)| {
            let mut steps = vec![parent_step(); parents];
            steps.extend(children);
            PathExpr {
                anchor: Anchor::Relative,
                steps,
                terminal,
            }
        });
    prop_oneof![anchored, relative]
}

proptest! {
    #[test]
    fn path_display_then_parse_is_identity(path in arb_path()) {
        let text = path.to_string();
        let reparsed = parse_path(&text)
            .unwrap_or_else(|e| panic!("printer emitted unparseable path `{text}`: {e}"));
        prop_assert_eq!(path, reparsed);
    }
}

// ---------------------------------------------------------------------------
// Rule sets: print -> parse returns an equal rule set
// ---------------------------------------------------------------------------

/// Leading/trailing whitespace is trimmed when text is read back, so
/// generated literals must already be trimmed.
fn arb_trimmed() -> impl Strategy<Value = String> {
    "[ -~]{0,16}".prop_map(|s| s.trim().to_string())
}

fn arb_template_source() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("1".to_string()),
        Just("2+3*4".to_string()),
        Just("(1+2)/4".to_string()),
        Just("-5+0.5".to_string()),
        Just("#(../a)-1".to_string()),
        Just("#(@p)*#(b/c)".to_string()),
    ]
}

fn arb_expr() -> impl Strategy<Value = ExprAst> {
    let leaf = prop_oneof![
        arb_trimmed().prop_map(ExprAst::Data),
        Just(ExprAst::InstanceValue),
        arb_name().prop_map(ExprAst::CountChildren),
        arb_path().prop_map(ExprAst::ValueRef),
        arb_template_source().prop_map(|template| {
            let ast = parse_template(&template).expect("pool template parses");
            ExprAst::RegEval { template, ast }
        }),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (arb_binary_op(), inner.clone(), inner.clone()).prop_map(|(op, lhs, rhs)| {
                ExprAst::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                }
            }),
            (inner.clone(), inner.clone(), inner).prop_map(|(condition, then, otherwise)| {
                ExprAst::If {
                    condition: Box::new(condition),
                    then: Box::new(then),
                    otherwise: Box::new(otherwise),
                }
            }),
        ]
    })
}

fn arb_binary_op() -> impl Strategy<Value = srml_core::expr::BinaryOp> {
    use srml_core::expr::BinaryOp::*;
    prop_oneof![
        Just(Equal),
        Just(NotEqual),
        Just(Less),
        Just(LessOrEqual),
        Just(Greater),
        Just(GreaterOrEqual),
        Just(And),
        Just(Or),
    ]
}

fn arb_rule_def() -> impl Strategy<Value = RuleDef> {
    let target = prop_oneof![
        arb_name().prop_map(RuleTarget::ElementChild),
        arb_name().prop_map(RuleTarget::Attribute),
    ];
    let mode = prop_oneof![Just(Mode::Validate), Just(Mode::Correct)];
    let match_mode = prop_oneof![Just(MatchMode::Any), Just(MatchMode::All)];
    let instance = (arb_trimmed(), arb_expr())
        .prop_map(|(message, expr)| RuleInstance { message, expr });
    (
        target,
        mode,
        match_mode,
        prop::collection::vec(instance, 1..3),
    )
        .prop_map(|(target, mode, match_mode, instances)| RuleDef {
            target,
            mode,
            match_mode,
            instances,
        })
}

fn arb_database() -> impl Strategy<Value = Option<DatabaseSpec>> {
    let tables = prop::collection::btree_map(arb_name(), arb_name(), 1..3).prop_map(|m| {
        m.into_iter()
            .map(|(name, key)| TableSpec { name, key })
            .collect::<Vec<_>>()
    });
    let spec = (tables, arb_name(), arb_name(), any::<bool>()).prop_map(
        |(tables, root_key, child_key, with_ref)| {
            let references = if with_ref && tables.len() >= 2 {
                vec![ReferenceSpec {
                    root: tables[0].name.clone(),
                    root_key,
                    child: tables[1].name.clone(),
                    child_key,
                }]
            } else {
                Vec::new()
            };
            DatabaseSpec { tables, references }
        },
    );
    prop::option::of(spec)
}

fn arb_ruleset() -> impl Strategy<Value = RuleSet> {
    let group = (arb_name(), prop::collection::vec(arb_rule_def(), 1..3))
        .prop_map(|(root, defs)| RulesFor { root, defs });
    (prop::collection::vec(group, 1..3), arb_database())
        .prop_map(|(groups, database)| RuleSet { groups, database })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn ruleset_print_then_parse_is_identity(rules in arb_ruleset()) {
        let doc = print_ruleset(&rules);
        let reparsed = parse_standalone(&doc)
            .unwrap_or_else(|e| panic!("printer emitted an unparseable rule set: {e}\n{}",
                                       doc.serialize_string()));
        prop_assert_eq!(rules, reparsed);
    }

    /// The printed form must also survive a trip through the serializer.
    #[test]
    fn printed_ruleset_survives_serialization(rules in arb_ruleset()) {
        let text = print_ruleset(&rules).serialize_string();
        let doc = Document::parse_str(&text)
            .unwrap_or_else(|e| panic!("unparseable XML: {e}\n{text}"));
        let reparsed = parse_standalone(&doc)
            .unwrap_or_else(|e| panic!("unparseable rule set: {e}\n{text}"));
        prop_assert_eq!(rules, reparsed);
    }
}

// ---------------------------------------------------------------------------
// CSV: format -> parse returns the same records
// ---------------------------------------------------------------------------

fn arb_cell() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => "[ -~]{0,8}",
        1 => Just("a,b".to_string()),
        1 => Just("say \"hi\"".to_string()),
        1 => Just("two\nlines".to_string()),
        1 => Just(",".to_string()),
        1 => Just("\"\"".to_string()),
    ]
}

fn arb_records() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec(arb_cell(), 1..5), 1..6)
}

proptest! {
    #[test]
    fn csv_format_then_parse_is_identity(records in arb_records()) {
        let text = format_csv(&records);
        let reparsed = parse_csv(&text)
            .unwrap_or_else(|e| panic!("formatter emitted unparseable CSV: {e}\n{text:?}"));
        prop_assert_eq!(records, reparsed);
    }
}
