use super::ast::Decoration;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Name(String, Decoration),
    Num(i64),
    /// A control word such as `\cup`, without the backslash.
    Cmd(String),
    /// `\\`, the line separator.
    Newline,
    LBrace,
    RBrace,
    /// `\{`
    SetOpen,
    /// `\}`
    SetClose,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Colon,
    Eq,
    DefEq,
    FreeEq,
    Lt,
    Bar,
    /// `^{-1}`
    Inverse,
    /// Punctuation outside the vocabulary; rejected by the parser.
    Other(char),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub offset: usize,
}

/// Spacing macros that carry no meaning.
const SPACING: &[&str] = &[",", ";", ":", "!", " ", "quad", "qquad", "also", "t"];

/// Replaces `%` comments with spaces so offsets keep pointing into the
/// original text.
pub fn strip_comments(src: &str) -> String {
    let mut out = String::with_capacity(src.len());
    let mut in_comment = false;
    let mut prev_backslash = false;
    for c in src.chars() {
        if in_comment {
            if c == '\n' {
                in_comment = false;
                out.push('\n');
            } else {
                out.extend(std::iter::repeat_n(' ', c.len_utf8()));
            }
            continue;
        }
        if c == '%' && !prev_backslash {
            in_comment = true;
            out.push(' ');
            prev_backslash = false;
            continue;
        }
        prev_backslash = c == '\\' && !prev_backslash;
        out.push(c);
    }
    out
}

/// Converts a byte offset into a 1-based line and column.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

pub fn syntax_error(src: &str, offset: usize, expected: impl Into<String>) -> Error {
    let (line, col) = line_col(src, offset);
    Error::Syntax {
        line,
        col,
        expected: expected.into(),
    }
}

fn ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic()
}

fn ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

/// Tokenizes `src[start..end]`; offsets are relative to `src`.
pub fn tokenize(src: &str, start: usize, end: usize) -> Result<Vec<Token>> {
    let b = src.as_bytes();
    let mut i = start;
    let mut out = Vec::new();
    let push = |out: &mut Vec<Token>, tok: Tok, offset: usize| out.push(Token { tok, offset });
    while i < end {
        let c = b[i];
        if c.is_ascii_whitespace() || c == b'~' || c == b'&' {
            i += 1;
            continue;
        }
        let at = i;
        if c == b'\\' {
            let n = b.get(i + 1).copied().unwrap_or(b' ');
            match n {
                b'\\' => {
                    push(&mut out, Tok::Newline, at);
                    i += 2;
                }
                b'{' => {
                    push(&mut out, Tok::SetOpen, at);
                    i += 2;
                }
                b'}' => {
                    push(&mut out, Tok::SetClose, at);
                    i += 2;
                }
                b'#' => {
                    push(&mut out, Tok::Cmd("#".into()), at);
                    i += 2;
                }
                b'_' => return Err(syntax_error(src, at, "identifier before `\\_`")),
                n if n.is_ascii_alphabetic() => {
                    let mut j = i + 1;
                    while j < end && b[j].is_ascii_alphabetic() {
                        j += 1;
                    }
                    let word = &src[i + 1..j];
                    i = j;
                    let spacing = SPACING.contains(&word)
                        || (word == "t" && i < end && b[i].is_ascii_digit());
                    if spacing {
                        while word == "t" && i < end && b[i].is_ascii_digit() {
                            i += 1;
                        }
                        continue;
                    }
                    push(&mut out, Tok::Cmd(word.to_string()), at);
                }
                n if SPACING.contains(&std::str::from_utf8(&[n]).unwrap_or("")) => {
                    i += 2;
                }
                _ => return Err(syntax_error(src, at, "control word after `\\`")),
            }
            continue;
        }
        if ident_start(c) {
            let mut name = String::new();
            let mut j = i;
            loop {
                if j < end && ident_char(b[j]) {
                    name.push(b[j] as char);
                    j += 1;
                } else if j + 1 < end && b[j] == b'\\' && b[j + 1] == b'_' {
                    name.push('_');
                    j += 2;
                } else {
                    break;
                }
            }
            let deco = match b.get(j).copied() {
                Some(b'\'') if j < end => Decoration::Primed,
                Some(b'?') if j < end => Decoration::Input,
                Some(b'!') if j < end => Decoration::Output,
                _ => Decoration::Plain,
            };
            if deco != Decoration::Plain {
                j += 1;
            }
            push(&mut out, Tok::Name(name, deco), at);
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < end && b[j].is_ascii_digit() {
                j += 1;
            }
            let n = src[i..j]
                .parse::<i64>()
                .map_err(|_| syntax_error(src, at, "a number that fits in 64 bits"))?;
            push(&mut out, Tok::Num(n), at);
            i = j;
            continue;
        }
        let rest = &src[i..end];
        let (tok, len) = if rest.starts_with("^{-1}") {
            (Tok::Inverse, 5)
        } else if rest.starts_with("::=") {
            (Tok::FreeEq, 3)
        } else if rest.starts_with("==") {
            (Tok::DefEq, 2)
        } else {
            let t = match c {
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'[' => Tok::LBrack,
                b']' => Tok::RBrack,
                b',' => Tok::Comma,
                b';' => Tok::Semi,
                b':' => Tok::Colon,
                b'=' => Tok::Eq,
                b'<' => Tok::Lt,
                b'|' => Tok::Bar,
                _ => {
                    let ch = rest.chars().next().unwrap_or(' ');
                    push(&mut out, Tok::Other(ch), at);
                    i += ch.len_utf8();
                    continue;
                }
            };
            (t, 1)
        };
        push(&mut out, tok, at);
        i += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: end,
    });
    Ok(out)
}
