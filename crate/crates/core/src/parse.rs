//! Text grammar for multisegments: a sum of terms `[label] nu^{p/q} S_a`
//! where every part is optional (trivial label, exponent 0, length 1).

use thiserror::Error;

use crate::param::{infinitesimal, CuspidalLabel, Exponent, InfinitesimalParameter, Multisegment, Segment};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("exponent at byte {pos} is not a half-integer: {text}")]
    NotHalfInteger { pos: usize, text: String },
    #[error("segment length at byte {pos} must be positive")]
    NonPositiveLength { pos: usize },
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { text, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        for c in self.rest().chars() {
            if pred(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }

    fn err(&self, msg: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Parse the text grammar into a canonical multisegment. `"0"` denotes the
/// empty multisegment.
pub fn parse_parameter(text: &str) -> Result<Multisegment, ParseError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    if cur.rest().trim_end() == "0" {
        return Ok(Multisegment::empty());
    }
    let mut segments = Vec::new();
    loop {
        segments.push(parse_term(&mut cur)?);
        cur.skip_ws();
        if cur.eat('+') {
            cur.skip_ws();
            continue;
        }
        break;
    }
    cur.skip_ws();
    if !cur.rest().is_empty() {
        return Err(cur.err("expected '+' or end of input"));
    }
    Ok(Multisegment::new(segments))
}

/// Parse an infinitesimal parameter: either a braced exponent multiset on
/// the trivial line, e.g. `{3/2,1/2,-1/2,-3/2}`, or any multisegment text
/// whose exponent expansion is taken.
pub fn parse_lambda(text: &str) -> Result<InfinitesimalParameter, ParseError> {
    let t = text.trim();
    if let Some(body) = t.strip_prefix('{') {
        let body = body.strip_suffix('}').ok_or(ParseError::Syntax {
            pos: t.len(),
            msg: "expected closing '}'".to_string(),
        })?;
        let mut segs = Vec::new();
        if !body.trim().is_empty() {
            for piece in body.split(',') {
                let e: Exponent =
                    piece.trim().parse().map_err(|_| ParseError::NotHalfInteger {
                        pos: 0,
                        text: piece.trim().to_string(),
                    })?;
                segs.push(Segment::singleton(e));
            }
        }
        Ok(infinitesimal(&Multisegment::new(segs)))
    } else {
        Ok(infinitesimal(&parse_parameter(text)?))
    }
}

fn parse_term(cur: &mut Cursor) -> Result<Segment, ParseError> {
    cur.skip_ws();
    let mut label: Option<CuspidalLabel> = None;
    let mut center: Option<Exponent> = None;
    let mut length: Option<u32> = None;

    loop {
        cur.skip_ws();
        let start = cur.pos;
        match cur.peek() {
            Some(c) if is_ident_start(c) => {
                let ident = cur.take_while(is_ident_char);
                if ident == "nu" {
                    if center.is_some() {
                        return Err(cur.err("duplicate exponent factor"));
                    }
                    if length.is_some() {
                        return Err(cur.err("exponent factor must precede S_a"));
                    }
                    center = Some(parse_nu_exponent(cur)?);
                } else if let Some(len_text) = ident.strip_prefix("S_") {
                    if length.is_some() {
                        return Err(cur.err("duplicate S_a factor"));
                    }
                    let len: u32 = len_text.parse().map_err(|_| ParseError::Syntax {
                        pos: start,
                        msg: format!("bad segment length {len_text:?}"),
                    })?;
                    if len == 0 {
                        return Err(ParseError::NonPositiveLength { pos: start });
                    }
                    length = Some(len);
                } else {
                    if label.is_some() || center.is_some() || length.is_some() {
                        return Err(ParseError::Syntax {
                            pos: start,
                            msg: format!("unexpected label {ident:?}"),
                        });
                    }
                    let mut lab = CuspidalLabel::named(ident);
                    cur.skip_ws();
                    if cur.eat(':') {
                        cur.skip_ws();
                        let dual = cur.take_while(is_ident_char);
                        if dual.is_empty() {
                            return Err(cur.err("expected dual label after ':'"));
                        }
                        lab = CuspidalLabel::with_dual(ident, dual);
                    }
                    label = Some(lab);
                }
            }
            _ => break,
        }
    }

    if label.is_none() && center.is_none() && length.is_none() {
        return Err(cur.err("expected a term"));
    }
    Ok(Segment::new(
        label.unwrap_or_else(CuspidalLabel::trivial),
        center.unwrap_or_default(),
        length.unwrap_or(1),
    ))
}

fn parse_nu_exponent(cur: &mut Cursor) -> Result<Exponent, ParseError> {
    cur.skip_ws();
    if !cur.eat('^') {
        return Err(cur.err("expected '^' after nu"));
    }
    cur.skip_ws();
    if !cur.eat('{') {
        return Err(cur.err("expected '{' after nu^"));
    }
    cur.skip_ws();
    let start = cur.pos;
    let body = cur.take_while(|c| c != '}');
    if !cur.eat('}') {
        return Err(cur.err("unterminated exponent: expected '}'"));
    }
    body.trim()
        .parse::<Exponent>()
        .map_err(|_| ParseError::NotHalfInteger {
            pos: start,
            text: body.trim().to_string(),
        })
}
