use super::ast::Pos;
use super::ParseError;

pub const MAX_IDENT_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    DotDot,
    If,
    Neq,
    Minus,
    Plus,
    Pipe,
    Semicolon,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::If => "`:-`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Semicolon => "`;`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                out.push(Token { tok: Tok::LParen, pos });
                advance(1, &mut i, &mut col);
            }
            ')' => {
                out.push(Token { tok: Tok::RParen, pos });
                advance(1, &mut i, &mut col);
            }
            ',' => {
                out.push(Token { tok: Tok::Comma, pos });
                advance(1, &mut i, &mut col);
            }
            '+' => {
                out.push(Token { tok: Tok::Plus, pos });
                advance(1, &mut i, &mut col);
            }
            '-' => {
                out.push(Token { tok: Tok::Minus, pos });
                advance(1, &mut i, &mut col);
            }
            '|' => {
                out.push(Token { tok: Tok::Pipe, pos });
                advance(1, &mut i, &mut col);
            }
            ';' => {
                out.push(Token { tok: Tok::Semicolon, pos });
                advance(1, &mut i, &mut col);
            }
            '.' => {
                if chars.get(i + 1) == Some(&'.') {
                    out.push(Token { tok: Tok::DotDot, pos });
                    advance(2, &mut i, &mut col);
                } else {
                    out.push(Token { tok: Tok::Dot, pos });
                    advance(1, &mut i, &mut col);
                }
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                out.push(Token { tok: Tok::If, pos });
                advance(2, &mut i, &mut col);
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                out.push(Token { tok: Tok::Neq, pos });
                advance(2, &mut i, &mut col);
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                // digit-led identifiers such as `3d_printer` are constants
                if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                    while i < chars.len() && is_ident_char(chars[i]) {
                        i += 1;
                    }
                    let text: String = chars[start..i].iter().collect();
                    check_len(&text, pos)?;
                    col += i - start;
                    out.push(Token { tok: Tok::Ident(text), pos });
                    continue;
                }
                let text: String = chars[start..i].iter().collect();
                let value = text.parse::<i64>().map_err(|_| ParseError::Lex {
                    pos,
                    found: c,
                    reason: "integer out of range".into(),
                })?;
                col += i - start;
                out.push(Token { tok: Tok::Int(value), pos });
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                check_len(&text, pos)?;
                col += i - start;
                let tok = if c.is_ascii_uppercase() {
                    Tok::Var(text)
                } else {
                    Tok::Ident(text)
                };
                out.push(Token { tok, pos });
            }
            other => {
                return Err(ParseError::Lex {
                    pos,
                    found: other,
                    reason: "unexpected character".into(),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn check_len(text: &str, pos: Pos) -> Result<(), ParseError> {
    if text.len() > MAX_IDENT_LEN {
        return Err(ParseError::IdentTooLong {
            pos,
            len: text.len(),
        });
    }
    Ok(())
}
