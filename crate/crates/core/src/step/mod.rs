//! ISO 10303-21 (STEP Part 21) exchange files.
//!
//! The parser produces a [`StepEntityGraph`]: every `#id = ...;` instance of
//! the DATA section as an [`EntityRecord`] keyed by instance id. Entities are
//! kept generic; typed interpretation happens in [`crate::brep`]. Keywords
//! that nothing downstream understands are kept as-is.

mod lexer;
mod parser;
mod writer;

use alloc::borrow::Cow;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

pub use parser::parse_step;
pub use writer::{write_step, StepBuilder};

/// Failure to read a Part 21 file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("entity #{from} references undefined instance #{target}")]
    DanglingReference { from: u64, target: u64 },
    #[error("instance #{0} defined more than once")]
    DuplicateId(u64),
    #[error("file has no DATA section")]
    MissingData,
}

/// A single Part 21 parameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Integer(i64),
    Real(f64),
    /// String contents with `''` unescaped. Backslash escapes (`\X2\...`)
    /// are kept verbatim.
    Str(String),
    /// Enumeration token without the surrounding dots, e.g. `T`, `UNSPECIFIED`.
    Enum(String),
    Ref(u64),
    List(Vec<Value>),
    /// Typed parameter such as `LENGTH_MEASURE(1.0)`.
    Typed(String, Box<Value>),
    Binary(String),
    /// `*`
    Derived,
    /// `$`
    Unset,
}

impl Value {
    pub fn as_ref_id(&self) -> Option<u64> {
        match self {
            Value::Ref(id) => Some(*id),
            _ => None,
        }
    }

    /// Numeric value; integers widen, typed measures unwrap.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Real(v) => Some(*v),
            Value::Integer(i) => Some(*i as f64),
            Value::Typed(_, inner) => inner.as_f64(),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Integer(i) => Some(*i),
            Value::Real(v) if libm::trunc(*v) == *v => Some(*v as i64),
            Value::Typed(_, inner) => inner.as_i64(),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// `.T.` / `.F.`; `.U.` (unknown) is `None`.
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Enum(e) if e == "T" => Some(true),
            Value::Enum(e) if e == "F" => Some(false),
            _ => None,
        }
    }

    pub fn as_f64_list(&self) -> Option<Vec<f64>> {
        self.as_list()?.iter().map(Value::as_f64).collect()
    }

    /// Every instance id referenced anywhere inside this value.
    pub fn for_each_ref(&self, f: &mut impl FnMut(u64)) {
        match self {
            Value::Ref(id) => f(*id),
            Value::List(items) => items.iter().for_each(|v| v.for_each_ref(f)),
            Value::Typed(_, inner) => inner.for_each_ref(f),
            _ => {}
        }
    }
}

/// One `KEYWORD(args)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityPart {
    pub keyword: String,
    pub args: Vec<Value>,
}

/// An entity instance. Simple instances have exactly one part; complex
/// instances (`#5 = (A() B(...) C(...));`) keep every constituent part.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityRecord {
    pub parts: Vec<EntityPart>,
    pub complex: bool,
}

impl EntityRecord {
    pub fn simple(keyword: impl Into<String>, args: Vec<Value>) -> Self {
        EntityRecord {
            parts: alloc::vec![EntityPart {
                keyword: keyword.into(),
                args,
            }],
            complex: false,
        }
    }

    /// Keyword of a simple record; for a complex record the parenthesized
    /// list of its constituent keywords, e.g. `(BOUNDED_CURVE B_SPLINE_CURVE)`.
    pub fn keyword(&self) -> Cow<'_, str> {
        if !self.complex && self.parts.len() == 1 {
            Cow::Borrowed(&self.parts[0].keyword)
        } else {
            let mut s = String::from("(");
            for (i, p) in self.parts.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                s.push_str(&p.keyword);
            }
            s.push(')');
            Cow::Owned(s)
        }
    }

    /// Arguments of a simple record (empty slice for complex records).
    pub fn args(&self) -> &[Value] {
        if self.complex {
            &[]
        } else {
            &self.parts[0].args
        }
    }

    pub fn part(&self, keyword: &str) -> Option<&EntityPart> {
        self.parts.iter().find(|p| p.keyword == keyword)
    }

    pub fn has(&self, keyword: &str) -> bool {
        self.part(keyword).is_some()
    }

    pub fn for_each_ref(&self, mut f: impl FnMut(u64)) {
        for p in &self.parts {
            for a in &p.args {
                a.for_each_ref(&mut f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Header {
    /// Raw header records in file order (FILE_DESCRIPTION, FILE_NAME, ...).
    pub records: Vec<EntityPart>,
}

impl Header {
    fn record(&self, keyword: &str) -> Option<&EntityPart> {
        self.records.iter().find(|r| r.keyword == keyword)
    }

    pub fn description(&self) -> Vec<String> {
        self.record("FILE_DESCRIPTION")
            .and_then(|r| r.args.first())
            .and_then(Value::as_list)
            .map(|l| l.iter().filter_map(|v| v.as_str().map(String::from)).collect())
            .unwrap_or_default()
    }

    pub fn name(&self) -> Option<String> {
        self.record("FILE_NAME")
            .and_then(|r| r.args.first())
            .and_then(Value::as_str)
            .map(String::from)
    }

    pub fn schemas(&self) -> Vec<String> {
        self.record("FILE_SCHEMA")
            .and_then(|r| r.args.first())
            .and_then(Value::as_list)
            .map(|l| l.iter().filter_map(|v| v.as_str().map(String::from)).collect())
            .unwrap_or_default()
    }
}

/// Parsed DATA section plus header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepEntityGraph {
    pub header: Header,
    pub entities: BTreeMap<u64, EntityRecord>,
}

impl StepEntityGraph {
    pub fn get(&self, id: u64) -> Option<&EntityRecord> {
        self.entities.get(&id)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Ids of all instances whose record contains `keyword`, ascending.
    pub fn ids_with(&self, keyword: &str) -> Vec<u64> {
        self.entities
            .iter()
            .filter(|(_, r)| r.has(keyword))
            .map(|(id, _)| *id)
            .collect()
    }

    /// Checks that every reference resolves.
    pub fn validate_references(&self) -> Result<(), StepError> {
        for (id, rec) in &self.entities {
            let mut missing = None;
            rec.for_each_ref(|r| {
                if missing.is_none() && !self.entities.contains_key(&r) {
                    missing = Some(r);
                }
            });
            if let Some(target) = missing {
                return Err(StepError::DanglingReference { from: *id, target });
            }
        }
        Ok(())
    }
}

/// Histogram of record keywords (see [`EntityRecord::keyword`]).
pub fn entity_stats(graph: &StepEntityGraph) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for rec in graph.entities.values() {
        *out.entry(rec.keyword().into_owned()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EMPTY: &str = "ISO-10303-21;\nHEADER;\nFILE_DESCRIPTION(('empty'),'2;1');\n\
        FILE_NAME('e.step','2024-01-01T00:00:00',(''),(''),'','','');\n\
        FILE_SCHEMA(('AUTOMOTIVE_DESIGN'));\nENDSEC;\nDATA;\nENDSEC;\nEND-ISO-10303-21;\n";

    #[test]
    fn empty_data_section() {
        let g = parse_step(EMPTY.as_bytes()).unwrap();
        assert_eq!(g.len(), 0);
        assert!(entity_stats(&g).is_empty());
        assert_eq!(g.header.description(), alloc::vec![String::from("empty")]);
        assert_eq!(g.header.name().as_deref(), Some("e.step"));
        assert_eq!(g.header.schemas(), alloc::vec![String::from("AUTOMOTIVE_DESIGN")]);
    }

    #[test]
    fn single_point() {
        let src = "ISO-10303-21;HEADER;ENDSEC;DATA;#1=CARTESIAN_POINT('',(0.,0.,0.));ENDSEC;END-ISO-10303-21;";
        let g = parse_step(src.as_bytes()).unwrap();
        assert_eq!(g.len(), 1);
        let r = g.get(1).unwrap();
        assert_eq!(r.keyword(), "CARTESIAN_POINT");
        assert_eq!(r.args().len(), 2);
        assert_eq!(r.args()[1].as_f64_list().unwrap(), alloc::vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn unsupported_keyword_is_kept() {
        let src = "ISO-10303-21;HEADER;ENDSEC;DATA;#7=FANCY_NEW_THING(.T.,$,*,#7);ENDSEC;END-ISO-10303-21;";
        let g = parse_step(src.as_bytes()).unwrap();
        let stats = entity_stats(&g);
        assert_eq!(stats.get("FANCY_NEW_THING"), Some(&1));
        assert_eq!(g.get(7).unwrap().args()[0].as_bool(), Some(true));
    }

    #[test]
    fn dangling_reference_is_rejected() {
        let src = "ISO-10303-21;HEADER;ENDSEC;DATA;#1=VERTEX_POINT('',#2);ENDSEC;END-ISO-10303-21;";
        assert_eq!(
            parse_step(src.as_bytes()),
            Err(StepError::DanglingReference { from: 1, target: 2 })
        );
    }

    #[test]
    fn missing_data_section() {
        let src = "ISO-10303-21;HEADER;ENDSEC;END-ISO-10303-21;";
        assert_eq!(parse_step(src.as_bytes()), Err(StepError::MissingData));
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let src = "ISO-10303-21;HEADER;ENDSEC;DATA;#1=A();#1=B();ENDSEC;END-ISO-10303-21;";
        assert_eq!(parse_step(src.as_bytes()), Err(StepError::DuplicateId(1)));
    }

    #[test]
    fn syntax_error_has_position() {
        let src = "ISO-10303-21;\nHEADER;\nENDSEC;\nDATA;\n#1=LINE('',,);\nENDSEC;\n";
        match parse_step(src.as_bytes()) {
            Err(StepError::Syntax { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn complex_record_keeps_all_parts() {
        let src = "ISO-10303-21;HEADER;ENDSEC;DATA;\
            #1=(BOUNDED_CURVE() B_SPLINE_CURVE(1,(#2,#3),.UNSPECIFIED.,.F.,.F.) \
            B_SPLINE_CURVE_WITH_KNOTS((2,2),(0.,1.),.UNSPECIFIED.) CURVE() \
            RATIONAL_B_SPLINE_CURVE((1.,2.)) REPRESENTATION_ITEM(''));\
            #2=CARTESIAN_POINT('',(0.,0.,0.));#3=CARTESIAN_POINT('',(1.,0.,0.));\
            ENDSEC;END-ISO-10303-21;";
        let g = parse_step(src.as_bytes()).unwrap();
        let r = g.get(1).unwrap();
        assert!(r.complex);
        assert_eq!(r.parts.len(), 6);
        assert_eq!(
            r.part("RATIONAL_B_SPLINE_CURVE").unwrap().args[0].as_f64_list().unwrap(),
            alloc::vec![1.0, 2.0]
        );
        assert_eq!(r.part("B_SPLINE_CURVE").unwrap().args.len(), 5);
        let stats = entity_stats(&g);
        assert_eq!(
            stats.get("(BOUNDED_CURVE B_SPLINE_CURVE B_SPLINE_CURVE_WITH_KNOTS CURVE RATIONAL_B_SPLINE_CURVE REPRESENTATION_ITEM)"),
            Some(&1)
        );
    }

    #[test]
    fn typed_and_string_escapes() {
        let src = "ISO-10303-21;HEADER;ENDSEC;DATA;\
            #1=MEASURE_THING(LENGTH_MEASURE(2.5),'it''s \\X2\\00E9\\X0\\',\"0F\",-3,1.5E-3);\
            ENDSEC;END-ISO-10303-21;";
        let g = parse_step(src.as_bytes()).unwrap();
        let a = g.get(1).unwrap().args();
        assert_eq!(a[0], Value::Typed("LENGTH_MEASURE".into(), Box::new(Value::Real(2.5))));
        assert_eq!(a[1].as_str(), Some("it's \\X2\\00E9\\X0\\"));
        assert_eq!(a[2], Value::Binary("0F".into()));
        assert_eq!(a[3], Value::Integer(-3));
        assert_eq!(a[4], Value::Real(1.5e-3));
    }
}
