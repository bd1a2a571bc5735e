use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::lexer::{Lexer, Token};
use super::{EntityPart, EntityRecord, Header, StepEntityGraph, StepError, Value};

const MAGIC: &[u8] = b"ISO-10303-21";

/// Parse a complete Part 21 file.
///
/// Reference resolution is checked after the whole DATA section is read, so
/// forward references are fine.
pub fn parse_step(bytes: &[u8]) -> Result<StepEntityGraph, StepError> {
    let mut p = Parser {
        lex: Lexer::new(bytes),
        peeked: None,
    };
    p.parse_file()
}

struct Parser<'a> {
    lex: Lexer<'a>,
    peeked: Option<(Token, usize)>,
}

impl Parser<'_> {
    fn next(&mut self) -> Result<(Token, usize), StepError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex.next_token(),
        }
    }

    fn peek(&mut self) -> Result<&Token, StepError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex.next_token()?);
        }
        Ok(&self.peeked.as_ref().unwrap().0)
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), StepError> {
        let (t, at) = self.next()?;
        if t == want {
            Ok(())
        } else {
            Err(self.lex.error_at(at, format!("expected {what}, found {t:?}")))
        }
    }

    fn keyword(&mut self) -> Result<(String, usize), StepError> {
        match self.next()? {
            (Token::Keyword(k), at) => Ok((k, at)),
            (t, at) => Err(self.lex.error_at(at, format!("expected keyword, found {t:?}"))),
        }
    }

    fn parse_file(&mut self) -> Result<StepEntityGraph, StepError> {
        let at = self.lex.peek_offset()?;
        let (magic, _) = self.keyword().map_err(|_| self.lex.error_at(at, "missing ISO-10303-21 magic"))?;
        if magic.as_bytes() != MAGIC {
            return Err(self.lex.error_at(at, "missing ISO-10303-21 magic"));
        }
        self.expect(Token::Semi, "';'")?;

        let (kw, at) = self.keyword()?;
        if kw != "HEADER" {
            return Err(self.lex.error_at(at, "expected HEADER section"));
        }
        self.expect(Token::Semi, "';'")?;
        let mut header = Header::default();
        loop {
            let (kw, _) = self.keyword()?;
            if kw == "ENDSEC" {
                self.expect(Token::Semi, "';'")?;
                break;
            }
            let args = self.arg_list()?;
            self.expect(Token::Semi, "';'")?;
            header.records.push(EntityPart { keyword: kw, args });
        }

        let mut entities = BTreeMap::new();
        let mut saw_data = false;
        loop {
            let (tok, at) = self.next()?;
            match tok {
                Token::Eof => break,
                Token::Keyword(k) if k == "END-ISO-10303-21" => {
                    self.expect(Token::Semi, "';'")?;
                    break;
                }
                Token::Keyword(k) if k == "DATA" => {
                    saw_data = true;
                    if self.peek()? == &Token::LParen {
                        self.arg_list()?;
                    }
                    self.expect(Token::Semi, "';'")?;
                    self.data_section(&mut entities)?;
                }
                t => return Err(self.lex.error_at(at, format!("expected DATA section, found {t:?}"))),
            }
        }
        if !saw_data {
            return Err(StepError::MissingData);
        }
        let graph = StepEntityGraph { header, entities };
        graph.validate_references()?;
        Ok(graph)
    }

    fn data_section(&mut self, entities: &mut BTreeMap<u64, EntityRecord>) -> Result<(), StepError> {
        loop {
            let (tok, at) = self.next()?;
            let id = match tok {
                Token::Ref(id) => id,
                Token::Keyword(k) if k == "ENDSEC" => {
                    self.expect(Token::Semi, "';'")?;
                    return Ok(());
                }
                Token::Eof => return Err(self.lex.error_at(at, "unexpected end of file in DATA section")),
                t => return Err(self.lex.error_at(at, format!("expected instance, found {t:?}"))),
            };
            self.expect(Token::Eq, "'='")?;
            let record = if self.peek()? == &Token::LParen {
                self.next()?;
                let mut parts = Vec::new();
                loop {
                    if self.peek()? == &Token::RParen {
                        self.next()?;
                        break;
                    }
                    let (keyword, _) = self.keyword()?;
                    let args = self.arg_list()?;
                    parts.push(EntityPart { keyword, args });
                }
                if parts.is_empty() {
                    return Err(self.lex.error_at(at, "empty complex instance"));
                }
                EntityRecord { parts, complex: true }
            } else {
                let (keyword, _) = self.keyword()?;
                let args = self.arg_list()?;
                EntityRecord::simple(keyword, args)
            };
            self.expect(Token::Semi, "';'")?;
            if entities.insert(id, record).is_some() {
                return Err(StepError::DuplicateId(id));
            }
        }
    }

    /// `( [value {, value}] )`
    fn arg_list(&mut self) -> Result<Vec<Value>, StepError> {
        self.expect(Token::LParen, "'('")?;
        let mut out = Vec::new();
        if self.peek()? == &Token::RParen {
            self.next()?;
            return Ok(out);
        }
        loop {
            out.push(self.value()?);
            match self.next()? {
                (Token::Comma, _) => continue,
                (Token::RParen, _) => return Ok(out),
                (t, at) => return Err(self.lex.error_at(at, format!("expected ',' or ')', found {t:?}"))),
            }
        }
    }

    fn value(&mut self) -> Result<Value, StepError> {
        if self.peek()? == &Token::LParen {
            return Ok(Value::List(self.arg_list()?));
        }
        let (tok, at) = self.next()?;
        Ok(match tok {
            Token::Integer(i) => Value::Integer(i),
            Token::Real(r) => Value::Real(r),
            Token::Str(s) => Value::Str(s),
            Token::Enum(e) => Value::Enum(e),
            Token::Ref(r) => Value::Ref(r),
            Token::Binary(b) => Value::Binary(b),
            Token::Star => Value::Derived,
            Token::Dollar => Value::Unset,
            Token::Keyword(k) => {
                let mut inner = self.arg_list()?;
                if inner.len() != 1 {
                    return Err(self.lex.error_at(at, "typed parameter must hold exactly one value"));
                }
                Value::Typed(k, Box::new(inner.pop().unwrap()))
            }
            t => return Err(self.lex.error_at(at, format!("expected parameter, found {t:?}"))),
        })
    }
}
