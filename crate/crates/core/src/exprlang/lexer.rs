use super::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
    EqEq,
    AndAnd,
    End,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Number(x) => format!("number {x}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::End => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Ne => "!=",
            Tok::EqEq => "==",
            Tok::AndAnd => "&&",
            Tok::Number(_) => "number",
            Tok::Ident(_) => "identifier",
            Tok::End => "end of input",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub offset: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(off, ch)) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
            continue;
        }
        if ch.is_ascii_digit() || ch == '.' {
            let start = off;
            let mut end = off;
            let mut seen_exp = false;
            let mut prev = ' ';
            while let Some(&(o, c)) = chars.peek() {
                let ok = c.is_ascii_digit()
                    || c == '.'
                    || (!seen_exp && (c == 'e' || c == 'E'))
                    || ((c == '+' || c == '-') && (prev == 'e' || prev == 'E'));
                if !ok {
                    break;
                }
                if c == 'e' || c == 'E' {
                    seen_exp = true;
                }
                prev = c;
                end = o + c.len_utf8();
                chars.next();
            }
            let text = &src[start..end];
            let value: f64 = text.parse().map_err(|_| SyntaxError {
                offset: start,
                expected: vec!["number".into()],
                found: format!("malformed number `{text}`"),
            })?;
            out.push(Spanned {
                tok: Tok::Number(value),
                offset: start,
            });
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let start = off;
            let mut end = off;
            while let Some(&(o, c)) = chars.peek() {
                if !(c.is_alphanumeric() || c == '_') {
                    break;
                }
                end = o + c.len_utf8();
                chars.next();
            }
            out.push(Spanned {
                tok: Tok::Ident(src[start..end].to_string()),
                offset: start,
            });
            continue;
        }
        chars.next();
        let next = chars.peek().map(|&(_, c)| c);
        let tok = match (ch, next) {
            ('+', _) => Tok::Plus,
            ('-', _) | ('\u{2212}', _) => Tok::Minus,
            ('*', _) | ('\u{00d7}', _) | ('\u{00b7}', _) => Tok::Star,
            ('/', _) => Tok::Slash,
            ('^', _) => Tok::Caret,
            ('(', _) => Tok::LParen,
            (')', _) => Tok::RParen,
            ('<', Some('=')) => {
                chars.next();
                Tok::Le
            }
            ('>', Some('=')) => {
                chars.next();
                Tok::Ge
            }
            ('!', Some('=')) => {
                chars.next();
                Tok::Ne
            }
            ('=', Some('=')) => {
                chars.next();
                Tok::EqEq
            }
            ('&', Some('&')) => {
                chars.next();
                Tok::AndAnd
            }
            ('<', _) => Tok::Lt,
            ('>', _) => Tok::Gt,
            ('\u{2264}', _) => Tok::Le,
            ('\u{2265}', _) => Tok::Ge,
            ('\u{2260}', _) => Tok::Ne,
            _ => {
                return Err(SyntaxError {
                    offset: off,
                    expected: vec![],
                    found: format!("unexpected character `{ch}`"),
                })
            }
        };
        out.push(Spanned { tok, offset: off });
    }
    out.push(Spanned {
        tok: Tok::End,
        offset: src.len(),
    });
    Ok(out)
}
