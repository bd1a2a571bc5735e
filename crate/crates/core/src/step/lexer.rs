//! Byte-level tokenizer for Part 21 text.

use alloc::format;
use alloc::string::String;

use super::StepError;

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Token {
    Keyword(String),
    Ref(u64),
    Integer(i64),
    Real(f64),
    Str(String),
    Enum(String),
    Binary(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Star,
    Dollar,
    Eof,
}

pub(super) struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a [u8]) -> Self {
        Lexer { src, pos: 0 }
    }

    pub fn error_at(&self, offset: usize, message: impl Into<String>) -> StepError {
        let upto = &self.src[..offset.min(self.src.len())];
        let line = upto.iter().filter(|&&b| b == b'\n').count() + 1;
        let column = offset - upto.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
        StepError::Syntax {
            offset,
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) -> Result<(), StepError> {
        loop {
            match self.src.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'*') => {
                    let start = self.pos;
                    self.pos += 2;
                    loop {
                        match self.src.get(self.pos) {
                            None => return Err(self.error_at(start, "unterminated comment")),
                            Some(b'*') if self.src.get(self.pos + 1) == Some(&b'/') => {
                                self.pos += 2;
                                break;
                            }
                            _ => self.pos += 1,
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    /// Start offset of the next token (after trivia).
    pub fn peek_offset(&mut self) -> Result<usize, StepError> {
        self.skip_trivia()?;
        Ok(self.pos)
    }

    pub fn next_token(&mut self) -> Result<(Token, usize), StepError> {
        self.skip_trivia()?;
        let start = self.pos;
        let Some(&b) = self.src.get(self.pos) else {
            return Ok((Token::Eof, start));
        };
        let tok = match b {
            b'(' => self.single(Token::LParen),
            b')' => self.single(Token::RParen),
            b',' => self.single(Token::Comma),
            b';' => self.single(Token::Semi),
            b'=' => self.single(Token::Eq),
            b'*' => self.single(Token::Star),
            b'$' => self.single(Token::Dollar),
            b'#' => {
                self.pos += 1;
                let digits = self.take_while(|c| c.is_ascii_digit());
                if digits.is_empty() {
                    return Err(self.error_at(start, "expected digits after '#'"));
                }
                let id = parse_ascii::<u64>(digits)
                    .ok_or_else(|| self.error_at(start, "instance id out of range"))?;
                Token::Ref(id)
            }
            b'\'' => self.string(start)?,
            b'"' => {
                self.pos += 1;
                let body = self.take_while(|c| c != b'"');
                let s = latin1(body);
                if self.src.get(self.pos) != Some(&b'"') {
                    return Err(self.error_at(start, "unterminated binary literal"));
                }
                self.pos += 1;
                Token::Binary(s)
            }
            b'.' if !self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit) => {
                self.pos += 1;
                let body = self.take_while(|c| c.is_ascii_alphanumeric() || c == b'_');
                if body.is_empty() || self.src.get(self.pos) != Some(&b'.') {
                    return Err(self.error_at(start, "malformed enumeration"));
                }
                let s = latin1(body);
                self.pos += 1;
                Token::Enum(s)
            }
            b'+' | b'-' | b'.' | b'0'..=b'9' => self.number(start)?,
            c if c.is_ascii_alphabetic() || c == b'_' || c == b'!' => {
                let body = self.take_while(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'-' || c == b'!');
                Token::Keyword(latin1(body).to_ascii_uppercase())
            }
            other => {
                return Err(self.error_at(start, format!("unexpected character {:?}", other as char)));
            }
        };
        Ok((tok, start))
    }

    fn single(&mut self, t: Token) -> Token {
        self.pos += 1;
        t
    }

    fn take_while(&mut self, pred: impl Fn(u8) -> bool) -> &'a [u8] {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|&c| pred(c)) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn string(&mut self, start: usize) -> Result<Token, StepError> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.src.get(self.pos) {
                None => return Err(self.error_at(start, "unterminated string")),
                Some(b'\'') => {
                    if self.src.get(self.pos + 1) == Some(&b'\'') {
                        out.push('\'');
                        self.pos += 2;
                    } else {
                        self.pos += 1;
                        return Ok(Token::Str(out));
                    }
                }
                Some(&c) => {
                    // line breaks inside strings are not significant
                    if c != b'\n' && c != b'\r' {
                        out.push(c as char);
                    }
                    self.pos += 1;
                }
            }
        }
    }

    fn number(&mut self, start: usize) -> Result<Token, StepError> {
        let mut end = self.pos;
        if matches!(self.src.get(end), Some(b'+' | b'-')) {
            end += 1;
        }
        let int_start = end;
        while self.src.get(end).is_some_and(u8::is_ascii_digit) {
            end += 1;
        }
        let mut is_real = false;
        if self.src.get(end) == Some(&b'.') {
            is_real = true;
            end += 1;
            while self.src.get(end).is_some_and(u8::is_ascii_digit) {
                end += 1;
            }
        }
        if end == int_start || (end == int_start + 1 && is_real && !self.src[int_start].is_ascii_digit()) {
            return Err(self.error_at(start, "malformed number"));
        }
        if matches!(self.src.get(end), Some(b'e' | b'E')) {
            let mut e = end + 1;
            if matches!(self.src.get(e), Some(b'+' | b'-')) {
                e += 1;
            }
            let digits_start = e;
            while self.src.get(e).is_some_and(u8::is_ascii_digit) {
                e += 1;
            }
            if e == digits_start {
                return Err(self.error_at(start, "malformed exponent"));
            }
            is_real = true;
            end = e;
        }
        let text = &self.src[self.pos..end];
        self.pos = end;
        if is_real {
            parse_ascii::<f64>(text)
                .filter(|v| v.is_finite())
                .map(Token::Real)
                .ok_or_else(|| self.error_at(start, "malformed real"))
        } else {
            match parse_ascii::<i64>(text) {
                Some(v) => Ok(Token::Integer(v)),
                // integers beyond i64 degrade to reals
                None => parse_ascii::<f64>(text)
                    .map(Token::Real)
                    .ok_or_else(|| self.error_at(start, "malformed integer")),
            }
        }
    }
}

fn latin1(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| b as char).collect()
}

fn parse_ascii<T: core::str::FromStr>(bytes: &[u8]) -> Option<T> {
    core::str::from_utf8(bytes).ok()?.parse().ok()
}
