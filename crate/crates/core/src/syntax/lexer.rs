use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(String),
    Plus,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Bar,
    BarBar,
    LeftMerge,
    Comma,
    Semi,
    Eq,
    Colon,
    Tilde,
    Slash,
    Minus,
    Star,
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Plus => "+",
            Tok::Dot => ".",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Bar => "|",
            Tok::BarBar => "||",
            Tok::LeftMerge => "||_",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Eq => "=",
            Tok::Colon => ":",
            Tok::Tilde => "~",
            Tok::Slash => "/",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Arrow => "->",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits `src` into tokens. Positions are 1-based and offset by `(line0, col0)`
/// for the first line, so fragments of larger files report file positions.
pub fn lex_at(src: &str, line0: usize, col0: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (line0, col0);
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, len: usize, k: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tl, col: tc });
            *k += len;
            *col += len;
        };
        match c {
            '\n' => {
                k += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                k += 1;
                col += 1;
            }
            '#' => {
                while k < chars.len() && chars[k] != '\n' {
                    k += 1;
                }
            }
            c if is_ident_start(c) => {
                let start = k;
                while k < chars.len() && is_ident_char(chars[k]) {
                    k += 1;
                }
                let s: String = chars[start..k].iter().collect();
                col += k - start;
                out.push(Token { tok: Tok::Ident(s), line: tl, col: tc });
            }
            c if c.is_ascii_digit() => {
                let start = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let s: String = chars[start..k].iter().collect();
                col += k - start;
                out.push(Token { tok: Tok::Int(s), line: tl, col: tc });
            }
            '|' => {
                if chars.get(k + 1) == Some(&'|') {
                    if chars.get(k + 2) == Some(&'_') {
                        push(Tok::LeftMerge, 3, &mut k, &mut col);
                    } else {
                        push(Tok::BarBar, 2, &mut k, &mut col);
                    }
                } else {
                    push(Tok::Bar, 1, &mut k, &mut col);
                }
            }
            '-' if chars.get(k + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut k, &mut col),
            _ => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '.' => Tok::Dot,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Eq,
                    ':' => Tok::Colon,
                    '~' => Tok::Tilde,
                    '/' => Tok::Slash,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    _ => return Err(Error::parse(tl, tc, format!("unexpected character `{c}`"))),
                };
                push(tok, 1, &mut k, &mut col);
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

pub fn lex(src: &str) -> Result<Vec<Token>> {
    lex_at(src, 1, 1)
}
