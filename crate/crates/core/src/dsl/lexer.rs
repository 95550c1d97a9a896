use std::fmt;

use num_bigint::BigInt;

use crate::term::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(Rational),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    FatArrow,
    Arrow,
    DotDot,
    Ellipsis,
    Dollar,
    Question,
    Underscore,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Num(n) => return write!(f, "number `{n}`"),
            Tok::Str(s) => return write!(f, "string \"{s}\""),
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Assign => "`=`",
            Tok::EqEq => "`==`",
            Tok::NotEq => "`<>`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::FatArrow => "`=>`",
            Tok::Arrow => "`->`",
            Tok::DotDot => "`..`",
            Tok::Ellipsis => "`...`",
            Tok::Dollar => "`$`",
            Tok::Question => "`?`",
            Tok::Underscore => "`_`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! peek {
        ($k:expr) => {
            chars.get(i + $k).copied()
        };
    }
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if ident_start(c) {
            let mut s = String::new();
            loop {
                match peek!(0) {
                    Some(ch) if ident_char(ch) => {
                        s.push(ch);
                        bump!();
                    }
                    Some('.') if peek!(1).is_some_and(ident_start) => {
                        s.push('.');
                        bump!();
                    }
                    _ => break,
                }
            }
            out.push((if s == "_" { Tok::Underscore } else { Tok::Ident(s) }, pos));
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(ch) = peek!(0).filter(|ch| ch.is_ascii_digit()) {
                digits.push(ch);
                bump!();
            }
            let mut frac = String::new();
            if peek!(0) == Some('.') && peek!(1).is_some_and(|ch| ch.is_ascii_digit()) {
                bump!();
                while let Some(ch) = peek!(0).filter(|ch| ch.is_ascii_digit()) {
                    frac.push(ch);
                    bump!();
                }
            }
            let whole: BigInt = format!("{digits}{frac}").parse().expect("digits");
            let den = num_traits::pow(BigInt::from(10), frac.len());
            out.push((Tok::Num(Rational::new(whole, den)), pos));
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match peek!(0) {
                    None | Some('\n') => return Err(LexError { pos, message: "unterminated string".into() }),
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some(ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push((Tok::Str(s), pos));
            continue;
        }
        let (tok, len) = match (c, peek!(1), peek!(2)) {
            ('.', Some('.'), Some('.')) => (Tok::Ellipsis, 3),
            ('.', Some('.'), _) => (Tok::DotDot, 2),
            ('=', Some('='), _) => (Tok::EqEq, 2),
            ('=', Some('>'), _) => (Tok::FatArrow, 2),
            ('!', Some('='), _) => (Tok::NotEq, 2),
            ('<', Some('>'), _) => (Tok::NotEq, 2),
            ('<', Some('='), _) => (Tok::Le, 2),
            ('>', Some('='), _) => (Tok::Ge, 2),
            ('-', Some('>'), _) => (Tok::Arrow, 2),
            ('=', ..) => (Tok::Assign, 1),
            ('<', ..) => (Tok::Lt, 1),
            ('>', ..) => (Tok::Gt, 1),
            ('(', ..) => (Tok::LParen, 1),
            (')', ..) => (Tok::RParen, 1),
            ('[', ..) => (Tok::LBracket, 1),
            (']', ..) => (Tok::RBracket, 1),
            ('{', ..) => (Tok::LBrace, 1),
            ('}', ..) => (Tok::RBrace, 1),
            (',', ..) => (Tok::Comma, 1),
            (';', ..) => (Tok::Semi, 1),
            (':', ..) => (Tok::Colon, 1),
            ('+', ..) => (Tok::Plus, 1),
            ('-', ..) => (Tok::Minus, 1),
            ('*', ..) => (Tok::Star, 1),
            ('/', ..) => (Tok::Slash, 1),
            ('$', ..) => (Tok::Dollar, 1),
            ('?', ..) => (Tok::Question, 1),
            _ => return Err(LexError { pos, message: format!("unexpected character {c:?}") }),
        };
        for _ in 0..len {
            bump!();
        }
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_identifiers_and_ranges() {
        let toks: Vec<Tok> = lex("rand.out 0..W x...").unwrap().into_iter().map(|t| t.0).collect();
        assert_eq!(toks[0], Tok::Ident("rand.out".into()));
        assert_eq!(toks[2], Tok::DotDot);
        assert_eq!(toks[3], Tok::Ident("W".into()));
        assert_eq!(toks[5], Tok::Ellipsis);
    }

    #[test]
    fn decimals_are_exact() {
        let toks = lex("1.25").unwrap();
        assert_eq!(toks[0].0, Tok::Num(Rational::new(5.into(), 4.into())));
    }
}
