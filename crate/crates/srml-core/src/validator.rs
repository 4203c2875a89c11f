//! The validation / correction pipeline.
//!
//! [`validate`] drives two phases over a working copy of the input document:
//! first the structural schema check (when a schema is given), then the SRML
//! rules. Every rule expression computes the *expected* value of its target;
//! the target passes when the expected value compares equal to the value
//! actually found (see [`crate::expr::values_equal`]). On failure,
//! validate-mode rules report an error; correct-mode rules overwrite the
//! target with the expected value — eagerly, so later rules see the corrected
//! document — and report a correction.
//!
//! The input document is never modified; the returned document is the
//! (possibly corrected) working copy.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::{eval, values_equal, EvalContext, NumberStyle, Value};
use crate::report::{Finding, Severity, ValidationReport};
use crate::rules::{MatchMode, Mode, RuleDef, RuleInstance, RuleSet, RuleTarget};
use crate::schema::{validate_structure, Schema};
use crate::xml::{Document, NodeId};

/// Knobs for a validation run.
#[derive(Copy, Clone, Debug, Default)]
pub struct ValidationOptions {
    /// Master switch for corrections. When off, correct-mode rules report
    /// plain errors instead of changing the document.
    pub apply_corrections: bool,
    /// Stop after the first structural or error finding.
    pub fail_fast: bool,
}

/// Validates `doc` against an optional schema and a rule set. Returns the
/// report and the working copy (corrected when corrections are enabled).
pub fn validate(
    doc: &Document,
    schema: Option<&Schema>,
    rules: &RuleSet,
    opts: ValidationOptions,
) -> (ValidationReport, Document) {
    validate_styled(doc, schema, rules, opts, NumberStyle::Minimal)
}

/// [`validate`] with an explicit number rendering style for expected values.
/// The relational layer uses [`NumberStyle::OneDecimal`] so corrected column
/// values keep their decimal point.
pub fn validate_styled(
    doc: &Document,
    schema: Option<&Schema>,
    rules: &RuleSet,
    opts: ValidationOptions,
    style: NumberStyle,
) -> (ValidationReport, Document) {
    let mut working = doc.clone();
    let mut findings: Vec<Finding> = Vec::new();

    if let Some(schema) = schema {
        findings.extend(validate_structure(&working, schema));
    }

    let fatal = |fs: &[Finding]| {
        fs.iter()
            .any(|f| matches!(f.severity, Severity::Error | Severity::Structural))
    };

    if !(opts.fail_fast && fatal(&findings)) {
        'groups: for group in &rules.groups {
            // Matching elements are fixed per group; corrections made while
            // the group runs do not add or remove group roots.
            let roots: Vec<NodeId> = working
                .all_elements()
                .into_iter()
                .filter(|&n| working.name(n) == Some(group.root.as_str()))
                .collect();
            for root in roots {
                for def in &group.defs {
                    apply_def(&mut working, root, def, opts, style, &mut findings);
                    if opts.fail_fast && fatal(&findings) {
                        break 'groups;
                    }
                }
            }
        }
    }

    (ValidationReport::from_findings(findings), working)
}

/// Where a rule application reads its value from and writes corrections to.
enum Slot {
    /// An attribute of the matched element (present or not).
    Attribute { owner: NodeId, name: String },
    /// An existing child element; the value is its string-value.
    ChildText(NodeId),
    /// A child element that does not exist yet.
    NewChild { owner: NodeId, name: String },
}

impl Slot {
    fn location(&self, doc: &Document) -> String {
        match self {
            Slot::Attribute { owner, name } => doc.attribute_location(*owner, name),
            Slot::ChildText(node) => doc.node_location(*node),
            Slot::NewChild { owner, name } => format!("{}/{name}", doc.node_location(*owner)),
        }
    }

    fn write(&self, doc: &mut Document, value: &str) {
        match self {
            Slot::Attribute { owner, name } => doc.set_attribute(*owner, name, value),
            Slot::ChildText(node) => doc.set_text(*node, value),
            Slot::NewChild { owner, name } => {
                let child = doc.append_element(*owner, name);
                if !value.is_empty() {
                    doc.append_text(child, value);
                }
            }
        }
    }
}

/// Runs one rule-def against one matched group root. An attribute target is
/// a single application; an element target applies once per direct child
/// with that name (or once as a missing target when there is none).
fn apply_def(
    working: &mut Document,
    owner: NodeId,
    def: &RuleDef,
    opts: ValidationOptions,
    style: NumberStyle,
    findings: &mut Vec<Finding>,
) {
    match &def.target {
        RuleTarget::Attribute(name) => {
            let found = working.attribute(owner, name).map(ToOwned::to_owned);
            let slot = Slot::Attribute {
                owner,
                name: name.clone(),
            };
            run_application(working, owner, slot, found, def, opts, style, findings);
        }
        RuleTarget::ElementChild(name) => {
            let targets: Vec<NodeId> = working
                .child_elements(owner)
                .filter(|&c| working.name(c) == Some(name.as_str()))
                .collect();
            if targets.is_empty() {
                let slot = Slot::NewChild {
                    owner,
                    name: name.clone(),
                };
                run_application(working, owner, slot, None, def, opts, style, findings);
            } else {
                for child in targets {
                    let found = working.string_value(child);
                    run_application(
                        working,
                        child,
                        Slot::ChildText(child),
                        Some(found),
                        def,
                        opts,
                        style,
                        findings,
                    );
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_application(
    working: &mut Document,
    context: NodeId,
    slot: Slot,
    found: Option<String>,
    def: &RuleDef,
    opts: ValidationOptions,
    style: NumberStyle,
    findings: &mut Vec<Finding>,
) {
    let missing = found.is_none();
    let instance_value = found.unwrap_or_default();
    let actual = Value::Str(instance_value.clone());

    // Evaluation errors become findings immediately; they never abort the
    // run. `failing` holds the instance whose expected value the finding
    // (and any correction) will carry.
    let mut failing: Option<(usize, &RuleInstance, Value)> = None;
    let mut passed = false;
    match def.match_mode {
        MatchMode::Any => {
            // Passes if any instance's expected value matches; on full
            // failure the first cleanly evaluated instance speaks.
            for (index, instance) in def.instances.iter().enumerate() {
                let ctx = EvalContext {
                    doc: working,
                    node: context,
                    instance_value: &instance_value,
                };
                match eval(&instance.expr, &ctx) {
                    Ok(expected) => {
                        if values_equal(&expected, &actual) {
                            passed = true;
                            break;
                        }
                        if failing.is_none() {
                            failing = Some((index, instance, expected));
                        }
                    }
                    Err(error) => {
                        findings.push(eval_error_finding(
                            working,
                            &slot,
                            &instance_value,
                            index,
                            &error,
                        ));
                    }
                }
            }
        }
        MatchMode::All => {
            // Passes only if every instance matches; the first failure (or
            // evaluation error) ends the application.
            passed = true;
            for (index, instance) in def.instances.iter().enumerate() {
                let ctx = EvalContext {
                    doc: working,
                    node: context,
                    instance_value: &instance_value,
                };
                match eval(&instance.expr, &ctx) {
                    Ok(expected) => {
                        if !values_equal(&expected, &actual) {
                            failing = Some((index, instance, expected));
                            passed = false;
                            break;
                        }
                    }
                    Err(error) => {
                        findings.push(eval_error_finding(
                            working,
                            &slot,
                            &instance_value,
                            index,
                            &error,
                        ));
                        passed = false;
                        break;
                    }
                }
            }
        }
    }
    if passed {
        return;
    }
    let Some((index, instance, expected)) = failing else {
        // Every instance raised an evaluation error; those findings stand
        // alone and there is no expected value to report or write.
        return;
    };

    let expected_str = expected.render(style);
    if def.mode == Mode::Correct && opts.apply_corrections {
        slot.write(working, &expected_str);
        findings.push(Finding {
            severity: Severity::Corrected,
            message: instance.message.clone(),
            location: slot.location(working),
            found: instance_value,
            expected: expected_str,
            instance_index: (index + 1) as u32,
        });
    } else {
        findings.push(Finding {
            severity: Severity::Error,
            message: if missing {
                "target missing".to_owned()
            } else {
                instance.message.clone()
            },
            location: slot.location(working),
            found: instance_value,
            expected: expected_str,
            instance_index: (index + 1) as u32,
        });
    }
}

fn eval_error_finding(
    doc: &Document,
    slot: &Slot,
    instance_value: &str,
    index: usize,
    error: &crate::expr::EvalError,
) -> Finding {
    Finding {
        severity: Severity::Error,
        message: format!("evaluation error: {error}"),
        location: slot.location(doc),
        found: instance_value.to_owned(),
        expected: String::new(),
        instance_index: (index + 1) as u32,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_standalone;
    use crate::schema::parse_schema;
    use alloc::vec;

    const CART_XML: &str = r#"<cart xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"
      xsi:noNamespaceSchemaLocation="cart.xsd" hasDiscount="false">
  <book cover="hardcover">
    <author>J.R.R. Tolkien</author>
    <title>Lord of the Rings</title>
    <isbn>1-12345-123-1</isbn>
    <qty>5</qty>
    <price>100</price>
    <discount>0</discount>
    <tax>25</tax>
    <total>625</total>
    <region>0</region>
  </book>
  <book cover="digital">
    <author>William Shakespeare</author>
    <title>Macbeth</title>
    <isbn>1-12-654321-1</isbn>
    <qty>1</qty>
    <price>100</price>
    <discount>10</discount>
    <tax>35</tax>
    <total>121.5</total>
    <region>1</region>
  </book>
</cart>"#;

    /// The four bookstore rules: hasDiscount (correct), discount (validate),
    /// tax (correct), total (validate, match=all).
    const CART_RULES: &str = r#"<srml-def>
  <rules-for root="cart">
    <rule-def name="@hasDiscount" mode="correct" match="any">
      <rule-instance>
        <validation-error>Discount value incorrectly set for cart</validation-error>
        <expr><if-expr>
          <expr><binary-op op="greater">
            <expr><count-children name="book"/></expr>
            <expr><data>2</data></expr>
          </binary-op></expr>
          <expr><data>true</data></expr>
          <expr><data>false</data></expr>
        </if-expr></expr>
      </rule-instance>
    </rule-def>
  </rules-for>
  <rules-for root="book">
    <rule-def name="discount" mode="validate" match="any">
      <rule-instance>
        <validation-error>This book is by J.R.R. Tolkien and does not have the discount set to 20 percent</validation-error>
        <expr><if-expr>
          <expr><binary-op op="equal">
            <expr><value-ref path="../author"/></expr>
            <expr><data>J.R.R. Tolkien</data></expr>
          </binary-op></expr>
          <expr><data>20</data></expr>
          <instance-value/>
        </if-expr></expr>
      </rule-instance>
    </rule-def>
  </rules-for>
  <rules-for root="book">
    <rule-def name="tax" mode="correct" match="any">
      <rule-instance>
        <validation-error>Digital books should be tax free</validation-error>
        <expr><if-expr>
          <expr><binary-op op="equal">
            <expr><value-ref path="../@cover"/></expr>
            <expr><data>digital</data></expr>
          </binary-op></expr>
          <expr><data>0</data></expr>
          <instance-value/>
        </if-expr></expr>
      </rule-instance>
    </rule-def>
  </rules-for>
  <rules-for root="book">
    <rule-def name="total" mode="validate" match="all">
      <rule-instance>
        <validation-error>The total value is not correct!</validation-error>
        <expr><reg-eval>#(../qty)*#(../price)*(1-#(../discount)/100)*(1+#(../tax)/100)</reg-eval></expr>
      </rule-instance>
    </rule-def>
  </rules-for>
</srml-def>"#;

    fn cart() -> Document {
        Document::parse_str(CART_XML).unwrap()
    }

    fn cart_rules() -> RuleSet {
        parse_standalone(&Document::parse_str(CART_RULES).unwrap()).unwrap()
    }

    fn rules_from(body: &str) -> RuleSet {
        parse_standalone(&Document::parse_str(&format!("<srml-def>{body}</srml-def>")).unwrap())
            .unwrap()
    }

    fn correcting() -> ValidationOptions {
        ValidationOptions {
            apply_corrections: true,
            fail_fast: false,
        }
    }

    #[test]
    fn bookstore_cart_with_corrections() {
        let doc = cart();
        let (report, corrected) = validate(&doc, None, &cart_rules(), correcting());
        assert_eq!(report.findings.len(), 3, "{:#?}", report.findings);

        let discount = &report.findings[0];
        assert_eq!(discount.severity, Severity::Error);
        assert_eq!(discount.location, "/cart/book[1]/discount");
        assert_eq!(discount.found, "0");
        assert_eq!(discount.expected, "20");
        assert_eq!(
            discount.message,
            "This book is by J.R.R. Tolkien and does not have the discount set to 20 percent"
        );

        let tax = &report.findings[1];
        assert_eq!(tax.severity, Severity::Corrected);
        assert_eq!(tax.location, "/cart/book[2]/tax");
        assert_eq!(tax.found, "35");
        assert_eq!(tax.expected, "0");

        // Computed after the tax correction: 1*100*0.9*1.0 = 90.
        let total = &report.findings[2];
        assert_eq!(total.severity, Severity::Error);
        assert_eq!(total.location, "/cart/book[2]/total");
        assert_eq!(total.found, "121.5");
        assert_eq!(total.expected, "90");
        assert_eq!(total.message, "The total value is not correct!");

        assert!(!report.valid);
        assert_eq!(report.corrections_applied, 1);

        // The correction is visible in the returned copy only.
        let book2 = corrected.elements_named("book")[1];
        let tax_el = corrected
            .child_elements(book2)
            .find(|&c| corrected.name(c) == Some("tax"))
            .unwrap();
        assert_eq!(corrected.string_value(tax_el), "0");
        assert_eq!(doc, cart(), "input document must not change");
    }

    #[test]
    fn bookstore_cart_without_corrections() {
        let (report, unchanged) = validate(
            &cart(),
            None,
            &cart_rules(),
            ValidationOptions::default(),
        );
        // The tax rule reports an error and the stale total now *passes*
        // (121.5 is exactly what qty/price/discount/tax=35 compute to).
        assert_eq!(report.findings.len(), 2, "{:#?}", report.findings);
        assert_eq!(report.findings[0].location, "/cart/book[1]/discount");
        assert_eq!(report.findings[0].severity, Severity::Error);
        assert_eq!(report.findings[1].location, "/cart/book[2]/tax");
        assert_eq!(report.findings[1].severity, Severity::Error);
        assert_eq!(report.findings[1].found, "35");
        assert_eq!(report.findings[1].expected, "0");
        assert_eq!(unchanged, cart());
        assert!(!report.valid);
        assert_eq!(report.corrections_applied, 0);
    }

    #[test]
    fn three_books_get_the_discount_flag_corrected() {
        let mut xml = CART_XML.replace(
            "</cart>",
            r#"<book cover="paperback">
                 <author>A</author><title>T</title><isbn>1-12345-123-1</isbn>
                 <qty>1</qty><price>10</price><discount>0</discount>
                 <tax>10</tax><total>11</total><region>0</region>
               </book></cart>"#,
        );
        xml = xml.replace("<discount>0</discount>\n    <tax>25</tax>", "<discount>20</discount>\n    <tax>25</tax>");
        xml = xml.replace("<total>625</total>", "<total>500</total>");
        let doc = Document::parse_str(&xml).unwrap();
        let (report, corrected) = validate(&doc, None, &cart_rules(), correcting());
        let flag = report
            .findings
            .iter()
            .find(|f| f.location == "/cart/@hasDiscount")
            .expect("hasDiscount finding");
        assert_eq!(flag.severity, Severity::Corrected);
        assert_eq!(flag.found, "false");
        assert_eq!(flag.expected, "true");
        assert_eq!(corrected.attribute(corrected.root(), "hasDiscount"), Some("true"));
    }

    #[test]
    fn correction_is_idempotent() {
        let (first, corrected) = validate(&cart(), None, &cart_rules(), correcting());
        assert_eq!(first.corrections_applied, 1);
        let (second, again) = validate(&corrected, None, &cart_rules(), correcting());
        assert_eq!(second.corrections_applied, 0);
        assert!(second
            .findings
            .iter()
            .all(|f| f.severity == Severity::Error));
        // Only the two validate-mode findings remain.
        assert_eq!(second.findings.len(), 2);
        assert_eq!(again, corrected);
    }

    #[test]
    fn structural_phase_runs_when_schema_is_given() {
        let xsd = r#"<xsd:schema xmlns:xsd="http://www.w3.org/2001/XMLSchema">
  <xsd:element name="cart">
    <xsd:complexType>
      <xsd:sequence>
        <xsd:element name="book" type="xsd:string" minOccurs="0" maxOccurs="unbounded"/>
      </xsd:sequence>
      <xsd:attribute name="hasDiscount" type="xsd:boolean"/>
    </xsd:complexType>
  </xsd:element>
</xsd:schema>"#;
        let schema = parse_schema(&Document::parse_str(xsd).unwrap()).unwrap();
        let doc = Document::parse_str(
            r#"<cart hasDiscount="maybe"><book>x</book></cart>"#,
        )
        .unwrap();
        let rules = RuleSet::empty();
        let (report, _) = validate(&doc, Some(&schema), &rules, ValidationOptions::default());
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].severity, Severity::Structural);
        // Without the schema the same document sails through.
        let (clean, _) = validate(&doc, None, &rules, ValidationOptions::default());
        assert!(clean.valid);
    }

    #[test]
    fn missing_attribute_target() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="@flag" mode="validate">
                 <rule-instance>
                   <validation-error>flag must be on</validation-error>
                   <expr><data>on</data></expr>
                 </rule-instance></rule-def></rules-for>"#,
        );
        let doc = Document::parse_str("<r/>").unwrap();
        let (report, unchanged) = validate(&doc, None, &rules, ValidationOptions::default());
        assert_eq!(report.findings.len(), 1);
        let finding = &report.findings[0];
        assert_eq!(finding.severity, Severity::Error);
        assert_eq!(finding.message, "target missing");
        assert_eq!(finding.location, "/r/@flag");
        assert_eq!(finding.found, "");
        assert_eq!(finding.expected, "on");
        assert_eq!(unchanged, doc);
    }

    #[test]
    fn missing_attribute_is_created_in_correct_mode() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="@flag" mode="correct">
                 <rule-instance>
                   <validation-error>flag must be on</validation-error>
                   <expr><data>on</data></expr>
                 </rule-instance></rule-def></rules-for>"#,
        );
        let doc = Document::parse_str("<r/>").unwrap();
        let (report, corrected) = validate(&doc, None, &rules, correcting());
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].severity, Severity::Corrected);
        assert_eq!(report.findings[0].message, "flag must be on");
        assert_eq!(corrected.attribute(corrected.root(), "flag"), Some("on"));
    }

    #[test]
    fn missing_child_is_appended_in_correct_mode() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="note" mode="correct">
                 <rule-instance><expr><data>hello</data></expr></rule-instance>
               </rule-def></rules-for>"#,
        );
        let doc = Document::parse_str("<r><other/></r>").unwrap();
        let (report, corrected) = validate(&doc, None, &rules, correcting());
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].location, "/r/note");
        assert_eq!(report.findings[0].found, "");
        assert_eq!(report.findings[0].expected, "hello");
        let note = corrected
            .child_elements(corrected.root())
            .find(|&c| corrected.name(c) == Some("note"))
            .expect("appended child");
        assert_eq!(corrected.string_value(note), "hello");
        // Appended after existing children.
        let names: Vec<_> = corrected
            .child_elements(corrected.root())
            .map(|c| corrected.name(c).unwrap().to_owned())
            .collect();
        assert_eq!(names, vec!["other".to_owned(), "note".to_owned()]);
    }

    #[test]
    fn missing_target_expecting_empty_passes_silently() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="@flag" mode="correct">
                 <rule-instance><expr><data></data></expr></rule-instance>
               </rule-def></rules-for>"#,
        );
        let doc = Document::parse_str("<r/>").unwrap();
        let (report, unchanged) = validate(&doc, None, &rules, correcting());
        assert!(report.findings.is_empty());
        assert_eq!(unchanged, doc, "nothing may be created");
    }

    #[test]
    fn evaluation_errors_become_findings() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="x">
                 <rule-instance>
                   <validation-error>broken</validation-error>
                   <expr><value-ref path="nowhere"/></expr>
                 </rule-instance></rule-def></rules-for>"#,
        );
        let doc = Document::parse_str("<r><x>1</x></r>").unwrap();
        let (report, _) = validate(&doc, None, &rules, ValidationOptions::default());
        assert_eq!(report.findings.len(), 1);
        let finding = &report.findings[0];
        assert!(finding.message.starts_with("evaluation error:"), "{}", finding.message);
        assert!(finding.message.contains("nowhere"));
        assert_eq!(finding.found, "1");
        assert_eq!(finding.expected, "");
        assert!(!report.valid);
    }

    #[test]
    fn eval_error_is_reported_even_when_a_later_instance_passes() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="x" match="any">
                 <rule-instance><expr><value-ref path="nowhere"/></expr></rule-instance>
                 <rule-instance><expr><instance-value/></expr></rule-instance>
               </rule-def></rules-for>"#,
        );
        let doc = Document::parse_str("<r><x>1</x></r>").unwrap();
        let (report, _) = validate(&doc, None, &rules, ValidationOptions::default());
        // The second instance passes (no failure finding) but the evaluation
        // error from the first instance is still on record.
        assert_eq!(report.findings.len(), 1);
        assert!(report.findings[0].message.starts_with("evaluation error:"));
        assert_eq!(report.findings[0].instance_index, 1);
    }

    #[test]
    fn match_any_reports_the_first_instance_on_full_failure() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="x" match="any">
                 <rule-instance>
                   <validation-error>first says a</validation-error>
                   <expr><data>a</data></expr>
                 </rule-instance>
                 <rule-instance>
                   <validation-error>second says b</validation-error>
                   <expr><data>b</data></expr>
                 </rule-instance>
               </rule-def></rules-for>"#,
        );
        let doc = Document::parse_str("<r><x>c</x></r>").unwrap();
        let (report, _) = validate(&doc, None, &rules, ValidationOptions::default());
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].message, "first says a");
        assert_eq!(report.findings[0].expected, "a");
        assert_eq!(report.findings[0].instance_index, 1);

        // Any passing instance silences the def entirely.
        let doc_b = Document::parse_str("<r><x>b</x></r>").unwrap();
        let (ok, _) = validate(&doc_b, None, &rules, ValidationOptions::default());
        assert!(ok.valid, "{:#?}", ok.findings);
    }

    #[test]
    fn match_all_reports_the_first_failing_instance() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="x" match="all">
                 <rule-instance>
                   <validation-error>must be numeric 7</validation-error>
                   <expr><data>7</data></expr>
                 </rule-instance>
                 <rule-instance>
                   <validation-error>must be 7.0 exactly</validation-error>
                   <expr><data>8</data></expr>
                 </rule-instance>
               </rule-def></rules-for>"#,
        );
        // "7" passes instance 1 (numeric equal), fails instance 2.
        let doc = Document::parse_str("<r><x>7</x></r>").unwrap();
        let (report, _) = validate(&doc, None, &rules, ValidationOptions::default());
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].message, "must be 7.0 exactly");
        assert_eq!(report.findings[0].instance_index, 2);
    }

    #[test]
    fn match_all_correction_uses_the_failing_instance() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="x" match="all" mode="correct">
                 <rule-instance><expr><data>7</data></expr></rule-instance>
                 <rule-instance><expr><data>8</data></expr></rule-instance>
               </rule-def></rules-for>"#,
        );
        let doc = Document::parse_str("<r><x>7</x></r>").unwrap();
        let (report, corrected) = validate(&doc, None, &rules, correcting());
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].severity, Severity::Corrected);
        assert_eq!(report.findings[0].expected, "8");
        let x = corrected.child_elements(corrected.root()).next().unwrap();
        assert_eq!(corrected.string_value(x), "8");
    }

    #[test]
    fn rules_apply_at_any_depth() {
        // Group roots match wherever they sit — relational context trees
        // have their subject rows nested under parent rows.
        let rules = rules_from(
            r#"<rules-for root="book"><rule-def name="@done" mode="validate">
                 <rule-instance>
                   <validation-error>done must be yes</validation-error>
                   <expr><data>yes</data></expr>
                 </rule-instance></rule-def></rules-for>"#,
        );
        let doc = Document::parse_str(
            r#"<shop><shelf><book done="no"/></shelf><book done="yes"/></shop>"#,
        )
        .unwrap();
        let (report, _) = validate(&doc, None, &rules, ValidationOptions::default());
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].location, "/shop/shelf/book/@done");
    }

    #[test]
    fn one_application_per_matching_child() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="v">
                 <rule-instance>
                   <validation-error>must be 1</validation-error>
                   <expr><data>1</data></expr>
                 </rule-instance></rule-def></rules-for>"#,
        );
        let doc = Document::parse_str("<r><v>1</v><v>2</v><v>3</v></r>").unwrap();
        let (report, _) = validate(&doc, None, &rules, ValidationOptions::default());
        assert_eq!(report.findings.len(), 2);
        assert_eq!(report.findings[0].location, "/r/v[2]");
        assert_eq!(report.findings[1].location, "/r/v[3]");
    }

    #[test]
    fn corrections_cascade_within_a_run() {
        // First def corrects a to 5; second def expects b to equal a.
        let rules = rules_from(
            r#"<rules-for root="r">
                 <rule-def name="a" mode="correct">
                   <rule-instance><expr><data>5</data></expr></rule-instance>
                 </rule-def>
                 <rule-def name="b" mode="validate">
                   <rule-instance>
                     <validation-error>b must equal a</validation-error>
                     <expr><value-ref path="../a"/></expr>
                   </rule-instance>
                 </rule-def>
               </rules-for>"#,
        );
        let doc = Document::parse_str("<r><a>1</a><b>5</b></r>").unwrap();
        let (report, corrected) = validate(&doc, None, &rules, correcting());
        // a corrected to 5, so b=5 now passes.
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].severity, Severity::Corrected);
        assert!(report.valid);
        let a = corrected.child_elements(corrected.root()).next().unwrap();
        assert_eq!(corrected.string_value(a), "5");
    }

    #[test]
    fn fail_fast_stops_at_the_first_error() {
        let (report, _) = validate(
            &cart(),
            None,
            &cart_rules(),
            ValidationOptions {
                apply_corrections: false,
                fail_fast: true,
            },
        );
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].location, "/cart/book[1]/discount");
    }

    #[test]
    fn disjoint_groups_commute() {
        let forward = rules_from(
            r#"<rules-for root="a"><rule-def name="x">
                 <rule-instance><validation-error>ax</validation-error><expr><data>1</data></expr></rule-instance>
               </rule-def></rules-for>
               <rules-for root="b"><rule-def name="y">
                 <rule-instance><validation-error>by</validation-error><expr><data>2</data></expr></rule-instance>
               </rule-def></rules-for>"#,
        );
        let backward = {
            let mut r = forward.clone();
            r.groups.reverse();
            r
        };
        let doc = Document::parse_str("<root><a><x>9</x></a><b><y>9</y></b></root>").unwrap();
        let (f, _) = validate(&doc, None, &forward, ValidationOptions::default());
        let (b, _) = validate(&doc, None, &backward, ValidationOptions::default());
        let mut f_keys: Vec<_> = f
            .findings
            .iter()
            .map(|x| (x.location.clone(), x.found.clone(), x.expected.clone()))
            .collect();
        let mut b_keys: Vec<_> = b
            .findings
            .iter()
            .map(|x| (x.location.clone(), x.found.clone(), x.expected.clone()))
            .collect();
        f_keys.sort();
        b_keys.sort();
        assert_eq!(f_keys, b_keys);
        assert_eq!(f_keys.len(), 2);
    }

    #[test]
    fn corrected_values_reevaluate_equal() {
        let rules = cart_rules();
        let (report, corrected) = validate(&cart(), None, &rules, correcting());
        assert!(report.corrections_applied > 0);
        let (second, _) = validate(&corrected, None, &rules, correcting());
        // No correct-mode rule fires again on the corrected tree.
        assert_eq!(second.corrections_applied, 0);
    }

    #[test]
    fn one_decimal_style_affects_expected_rendering() {
        let rules = rules_from(
            r#"<rules-for root="r"><rule-def name="total" match="all">
                 <rule-instance>
                   <validation-error>The total value is not correct!</validation-error>
                   <expr><reg-eval>#(../qty)*#(../price)</reg-eval></expr>
                 </rule-instance></rule-def></rules-for>"#,
        );
        let doc =
            Document::parse_str("<r><qty>5</qty><price>225</price><total>1625</total></r>")
                .unwrap();
        let (minimal, _) = validate(&doc, None, &rules, ValidationOptions::default());
        assert_eq!(minimal.findings[0].expected, "1125");
        let (one_dec, _) = validate_styled(
            &doc,
            None,
            &rules,
            ValidationOptions::default(),
            NumberStyle::OneDecimal,
        );
        assert_eq!(one_dec.findings[0].expected, "1125.0");
        assert_eq!(one_dec.findings[0].found, "1625");
    }
}
