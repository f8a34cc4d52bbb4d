//! Tokenizer for MiniLang source text.

use std::fmt;

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(i64),
    Ident(String),
    KwInt,
    KwIf,
    KwElse,
    KwWhile,
    KwFor,
    KwPrint,
    KwReturn,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Int(v) => return write!(f, "integer `{v}`"),
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::KwInt => "`int`",
            Tok::KwIf => "`if`",
            Tok::KwElse => "`else`",
            Tok::KwWhile => "`while`",
            Tok::KwFor => "`for`",
            Tok::KwPrint => "`print`",
            Tok::KwReturn => "`return`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Semi => "`;`",
            Tok::Comma => "`,`",
            Tok::Assign => "`=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Percent => "`%`",
            Tok::EqEq => "`==`",
            Tok::NotEq => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Bang => "`!`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub column: u32,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }

        let (start_line, start_col) = (line, col);
        let push = |tokens: &mut Vec<Token>, tok: Tok| tokens.push(Token { tok, line: start_line, column: start_col });

        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let value = text.parse::<i64>().map_err(|_| {
                ParseError::new(start_line, start_col, format!("integer `{text}`"))
                    .with_expected(["integer literal within 64-bit range"])
            })?;
            push(&mut tokens, Tok::Int(value));
            continue;
        }

        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let tok = match word.as_str() {
                "int" => Tok::KwInt,
                "if" => Tok::KwIf,
                "else" => Tok::KwElse,
                "while" => Tok::KwWhile,
                "for" => Tok::KwFor,
                "print" => Tok::KwPrint,
                "return" => Tok::KwReturn,
                _ => Tok::Ident(word),
            };
            push(&mut tokens, tok);
            continue;
        }

        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::NotEq, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (';', _) => (Tok::Semi, 1),
            (',', _) => (Tok::Comma, 1),
            ('=', _) => (Tok::Assign, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('%', _) => (Tok::Percent, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('!', _) => (Tok::Bang, 1),
            _ => return Err(ParseError::new(line, col, format!("character `{c}`")).with_expected(["token"])),
        };
        i += width;
        col += width as u32;
        push(&mut tokens, tok);
    }

    tokens.push(Token { tok: Tok::Eof, line, column: col });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_track_lines_and_columns() {
        let toks = tokenize("int x\n  = 10;").unwrap();
        assert_eq!(toks[0].tok, Tok::KwInt);
        assert_eq!((toks[2].line, toks[2].column), (2, 3));
        assert_eq!(toks[3].tok, Tok::Int(10));
        assert_eq!(toks.last().unwrap().tok, Tok::Eof);
    }

    #[test]
    fn two_char_operators() {
        let toks: Vec<Tok> = tokenize("<= >= == != && || < !").unwrap().into_iter().map(|t| t.tok).collect();
        assert_eq!(
            toks,
            vec![Tok::Le, Tok::Ge, Tok::EqEq, Tok::NotEq, Tok::AndAnd, Tok::OrOr, Tok::Lt, Tok::Bang, Tok::Eof]
        );
    }

    #[test]
    fn comments_are_skipped() {
        let toks = tokenize("// nothing here\nreturn").unwrap();
        assert_eq!(toks[0].tok, Tok::KwReturn);
        assert_eq!(toks[0].line, 2);
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("int x = 1 # 2;").unwrap_err();
        assert_eq!((err.line, err.column), (1, 11));
    }

    #[test]
    fn rejects_oversized_literal() {
        assert!(tokenize("99999999999999999999").is_err());
    }
}
