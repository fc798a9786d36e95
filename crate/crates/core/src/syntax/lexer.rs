use num_bigint::BigInt;

use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Int(BigInt),
    Decimal(String),
    Str(String),
    Directive(String),
    Not,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    DotDot,
    If,
    Amp,
    Star,
    Plus,
    Minus,
    Slash,
    Bar,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Var(s) => format!("variable `{s}`"),
            Tok::Int(v) => format!("number `{v}`"),
            Tok::Decimal(s) => format!("number `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Directive(s) => format!("`#{s}`"),
            Tok::Eof => "end of input".to_owned(),
            other => format!("`{}`", other.text()),
        }
    }

    pub fn text(&self) -> &'static str {
        match self {
            Tok::Not => "not",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::If => ":-",
            Tok::Amp => "&",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Slash => "/",
            Tok::Bar => "|",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut column = 1;

    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance!();
            continue;
        }
        if c == '%' {
            if chars.get(i + 1) == Some(&'*') {
                let (l, col) = (line, column);
                advance!();
                advance!();
                loop {
                    if i >= chars.len() {
                        return Err(ParseError::Syntax {
                            line: l,
                            column: col,
                            found: "unterminated block comment".to_owned(),
                            expected: vec!["`*%`".to_owned()],
                        });
                    }
                    if chars[i] == '*' && chars.get(i + 1) == Some(&'%') {
                        advance!();
                        advance!();
                        break;
                    }
                    advance!();
                }
            } else {
                while i < chars.len() && chars[i] != '\n' {
                    advance!();
                }
            }
            continue;
        }

        let (start_line, start_column) = (line, column);
        let push = |tokens: &mut Vec<Token>, tok: Tok| {
            tokens.push(Token {
                tok,
                line: start_line,
                column: start_column,
            })
        };

        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                advance!();
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                s.push('.');
                advance!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    advance!();
                }
                push(&mut tokens, Tok::Decimal(s));
            } else {
                push(&mut tokens, Tok::Int(s.parse().expect("digits")));
            }
            continue;
        }

        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                s.push(chars[i]);
                advance!();
            }
            let tok = if s == "not" {
                Tok::Not
            } else if s.starts_with(|c: char| c.is_uppercase()) {
                Tok::Var(s)
            } else {
                Tok::Ident(s)
            };
            push(&mut tokens, tok);
            continue;
        }

        if c == '"' {
            advance!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::Syntax {
                        line: start_line,
                        column: start_column,
                        found: "unterminated string".to_owned(),
                        expected: vec!["`\"`".to_owned()],
                    });
                }
                match chars[i] {
                    '"' => {
                        advance!();
                        break;
                    }
                    '\\' if i + 1 < chars.len() => {
                        advance!();
                        s.push(match chars[i] {
                            'n' => '\n',
                            other => other,
                        });
                        advance!();
                    }
                    other => {
                        s.push(other);
                        advance!();
                    }
                }
            }
            push(&mut tokens, Tok::Str(s));
            continue;
        }

        if c == '#' {
            advance!();
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                advance!();
            }
            push(&mut tokens, Tok::Directive(s));
            continue;
        }

        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            (':', Some('-')) => (Tok::If, 2),
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('=', Some('=')) => (Tok::Eq, 2),
            ('<', Some('>')) => (Tok::Ne, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            ('.', _) => (Tok::Dot, 1),
            ('&', _) => (Tok::Amp, 1),
            ('*', _) => (Tok::Star, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('/', _) => (Tok::Slash, 1),
            ('|', _) => (Tok::Bar, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            _ => {
                return Err(ParseError::Syntax {
                    line,
                    column,
                    found: format!("character `{c}`"),
                    expected: vec!["a token".to_owned()],
                })
            }
        };
        for _ in 0..len {
            advance!();
        }
        push(&mut tokens, tok);
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(tokens)
}
