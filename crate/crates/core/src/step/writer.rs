use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{EntityPart, EntityRecord, Header, StepEntityGraph, Value};

/// Serialize a graph back to Part 21 text (Latin-1 bytes).
///
/// Reals are written with the shortest representation that parses back to
/// the same `f64`, so `parse_step(write_step(g)) == g`.
pub fn write_step(graph: &StepEntityGraph) -> Vec<u8> {
    let mut s = String::from("ISO-10303-21;\nHEADER;\n");
    for rec in &graph.header.records {
        write_part(&mut s, rec);
        s.push_str(";\n");
    }
    s.push_str("ENDSEC;\nDATA;\n");
    for (id, rec) in &graph.entities {
        s.push_str(&format!("#{id}="));
        if rec.complex {
            s.push('(');
            for (i, p) in rec.parts.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                write_part(&mut s, p);
            }
            s.push(')');
        } else {
            write_part(&mut s, &rec.parts[0]);
        }
        s.push_str(";\n");
    }
    s.push_str("ENDSEC;\nEND-ISO-10303-21;\n");
    s.chars().map(|c| if (c as u32) < 256 { c as u8 } else { b'?' }).collect()
}

fn write_part(s: &mut String, p: &EntityPart) {
    s.push_str(&p.keyword);
    write_list(s, &p.args);
}

fn write_list(s: &mut String, items: &[Value]) {
    s.push('(');
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write_value(s, v);
    }
    s.push(')');
}

fn write_value(s: &mut String, v: &Value) {
    match v {
        Value::Integer(i) => s.push_str(&format!("{i}")),
        Value::Real(r) => s.push_str(&format_real(*r)),
        Value::Str(t) => {
            s.push('\'');
            for c in t.chars() {
                if c == '\'' {
                    s.push('\'');
                }
                s.push(c);
            }
            s.push('\'');
        }
        Value::Enum(e) => {
            s.push('.');
            s.push_str(e);
            s.push('.');
        }
        Value::Ref(r) => s.push_str(&format!("#{r}")),
        Value::List(items) => write_list(s, items),
        Value::Typed(k, inner) => {
            s.push_str(k);
            s.push('(');
            write_value(s, inner);
            s.push(')');
        }
        Value::Binary(b) => {
            s.push('"');
            s.push_str(b);
            s.push('"');
        }
        Value::Derived => s.push('*'),
        Value::Unset => s.push('$'),
    }
}

/// Part 21 real literal: always contains a decimal point, upper-case exponent.
pub(crate) fn format_real(r: f64) -> String {
    let d = format!("{r:?}");
    match d.find(['e', 'E']) {
        Some(epos) => {
            let (mant, exp) = d.split_at(epos);
            let mant = if mant.contains('.') {
                String::from(mant)
            } else {
                format!("{mant}.")
            };
            format!("{mant}E{}", &exp[1..])
        }
        None if d.contains('.') => d,
        None => format!("{d}."),
    }
}

/// Incremental construction of an entity graph with sequential ids.
#[derive(Debug, Clone)]
pub struct StepBuilder {
    next_id: u64,
    entities: BTreeMap<u64, EntityRecord>,
    header: Header,
}

impl StepBuilder {
    pub fn new(name: &str) -> Self {
        let header = Header {
            records: vec![
                EntityPart {
                    keyword: "FILE_DESCRIPTION".into(),
                    args: vec![Value::List(vec![Value::Str(String::new())]), Value::Str("2;1".into())],
                },
                EntityPart {
                    keyword: "FILE_NAME".into(),
                    args: vec![
                        Value::Str(name.into()),
                        Value::Str("1970-01-01T00:00:00".into()),
                        Value::List(vec![Value::Str(String::new())]),
                        Value::List(vec![Value::Str(String::new())]),
                        Value::Str(String::new()),
                        Value::Str("step-parts synth".into()),
                        Value::Str(String::new()),
                    ],
                },
                EntityPart {
                    keyword: "FILE_SCHEMA".into(),
                    args: vec![Value::List(vec![Value::Str("AUTOMOTIVE_DESIGN".into())])],
                },
            ],
        };
        StepBuilder {
            next_id: 1,
            entities: BTreeMap::new(),
            header,
        }
    }

    pub fn add(&mut self, keyword: &str, args: Vec<Value>) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.entities.insert(id, EntityRecord::simple(keyword, args));
        id
    }

    pub fn add_complex(&mut self, parts: Vec<EntityPart>) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.entities.insert(id, EntityRecord { parts, complex: true });
        id
    }

    pub fn finish(self) -> StepEntityGraph {
        StepEntityGraph {
            header: self.header,
            entities: self.entities,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::step::parse_step;

    #[test]
    fn real_formatting_is_part21() {
        assert_eq!(format_real(0.0), "0.0");
        assert_eq!(format_real(1.0), "1.0");
        assert_eq!(format_real(-2.5), "-2.5");
        assert_eq!(format_real(1e-7), "1.E-7");
        assert_eq!(format_real(1.5e300), "1.5E300");
        for v in [1e-7, 1.5e300, 0.1, -123.456e-20, 3.0e22] {
            let f = format_real(v);
            assert_eq!(f.parse::<f64>().unwrap(), v, "{f}");
        }
    }

    #[test]
    fn builder_round_trip() {
        let mut b = StepBuilder::new("t");
        let p = b.add("CARTESIAN_POINT", vec![Value::Str("o'k".into()), Value::List(vec![Value::Real(0.1), Value::Real(-1e-9), Value::Real(3.0)])]);
        b.add("VERTEX_POINT", vec![Value::Str(String::new()), Value::Ref(p)]);
        b.add("THING", vec![Value::Enum("T".into()), Value::Unset, Value::Derived, Value::Integer(-4)]);
        let g = b.finish();
        let text = write_step(&g);
        let back = parse_step(&text).unwrap();
        assert_eq!(back, g);
    }
}
