use num_bigint::BigUint;
use num_rational::BigRational;

use super::{ParseError, SourceSpan};
use crate::exact::parse_rational;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    /// A numeric literal: `12`, `0.25` or `3/4` written without spaces.
    Num {
        value: BigRational,
        int: Option<BigUint>,
    },
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Num { value, .. } => format!("number {}", crate::exact::format_ratio(value)),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub(crate) fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Ident(_) => "identifier",
            Tok::Str(_) => "string",
            Tok::Num { .. } => "number",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |start: usize, line: usize, col: usize, end: usize| SourceSpan {
        line,
        column: col,
        offset: start,
        len: end - start,
    };
    while i < bytes.len() {
        let c = text[i..].chars().next().expect("in bounds");
        let (start, sl, sc) = (i, line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            col += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            _ => None,
        };
        if let Some(tok) = single {
            i += 1;
            col += 1;
            out.push(Token {
                tok,
                span: span(start, sl, sc, i),
            });
            continue;
        }
        if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                let Some(ch) = text[i..].chars().next() else {
                    return Err(ParseError::new(
                        "unterminated string",
                        span(start, sl, sc, i),
                        vec!["\"".into()],
                    ));
                };
                i += ch.len_utf8();
                match ch {
                    '"' => break,
                    '\\' => {
                        let Some(esc) = text[i..].chars().next() else {
                            continue;
                        };
                        i += esc.len_utf8();
                        s.push(esc);
                    }
                    '\n' => {
                        return Err(ParseError::new(
                            "strings cannot span lines",
                            span(start, sl, sc, i - 1),
                            vec!["\"".into()],
                        ))
                    }
                    _ => s.push(ch),
                }
            }
            col += text[start..i].chars().count();
            out.push(Token {
                tok: Tok::Str(s),
                span: span(start, sl, sc, i),
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let digits = |mut j: usize| {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                j
            };
            i = digits(i);
            let mut decimal = false;
            if i < bytes.len() && bytes[i] == b'.' {
                decimal = true;
                i = digits(i + 1);
            }
            let mut fraction = false;
            if !decimal && i + 1 < bytes.len() && bytes[i] == b'/' && bytes[i + 1].is_ascii_digit()
            {
                fraction = true;
                i = digits(i + 1);
            }
            let lexeme = &text[start..i];
            col += i - start;
            let sp = span(start, sl, sc, i);
            let value =
                parse_rational(lexeme).map_err(|e| ParseError::new(e.to_string(), sp, vec![]))?;
            let int = (!decimal && !fraction).then(|| lexeme.parse::<BigUint>().expect("digits"));
            out.push(Token {
                tok: Tok::Num { value, int },
                span: sp,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(text[start..i].to_string()),
                span: span(start, sl, sc, i),
            });
            continue;
        }
        return Err(ParseError::new(
            format!("unexpected character {c:?}"),
            span(start, sl, sc, start + c.len_utf8()),
            vec![],
        ));
    }
    out.push(Token {
        tok: Tok::Eof,
        span: span(i, line, col, i),
    });
    Ok(out)
}
