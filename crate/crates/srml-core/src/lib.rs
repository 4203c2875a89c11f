//! Core engine for SRML 2.0, a rule metalanguage embedded in XML Schema
//! annotations that lets a schema carry semantic validation and correction
//! rules alongside its structural constraints.
//!
//! The crate is organised bottom-up:
//!
//! * [`xml`] — arena-backed document tree, well-formedness parser, serializer
//! * [`path`] — the XPath subset used by rule expressions
//! * [`expr`] — rule expression evaluation and arithmetic templates
//! * [`schema`] — XSD-lite structural validation and embedded-rule extraction
//! * [`rules`] — the SRML rule document parser and printer
//! * [`report`] — findings and report rendering (text and JSON)
//! * [`validator`] — the validation / correction pipeline
//! * [`relational`] — CSV-backed tables, context trees, trigger simulation
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate. Inputs and outputs are byte buffers and strings, so the engine can
//! be embedded anywhere a heap is available.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod expr;
pub mod path;
pub mod relational;
pub mod report;
pub mod rules;
pub mod schema;
pub mod validator;
pub mod xml;

pub use report::{Finding, ReportFormat, Severity, ValidationReport};
pub use validator::{validate, ValidationOptions};
pub use xml::{parse_document, Document, NodeId, WellFormednessError};
