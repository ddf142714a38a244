use super::ast::Span;
use super::{FrontendError, ErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(String),
    /// Text after `#pragma`, continuation lines joined.
    Pragma(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const PUNCTS: [&str; 31] = [
    "+=", "-=", "*=", "/=", "++", "--", "<=", ">=", "==", "!=", "&&", "||", "(", ")", "[", "]",
    "{", "}", ";", ",", "=", "+", "-", "*", "/", "%", "<", ">", "!", ":", "?",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, FrontendError> {
    Lexer::new(src, Span::new(1, 1)).run()
}

/// Tokenizes text that starts at `origin` (used for pragma bodies).
pub fn tokenize_at(src: &str, origin: Span) -> Result<Vec<Token>, FrontendError> {
    let mut lx = Lexer::new(src, origin);
    lx.in_pragma = true;
    lx.run()
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    in_pragma: bool,
}

impl Lexer {
    fn new(src: &str, origin: Span) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line: origin.line,
            col: origin.col,
            in_pragma: false,
        }
    }

    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }

    fn err(&self, span: Span, msg: impl Into<String>) -> FrontendError {
        FrontendError::new(ErrorKind::Syntax, span, msg)
    }

    fn at_line_start(&self) -> bool {
        let mut k = self.pos;
        while k > 0 {
            k -= 1;
            match self.chars[k] {
                '\n' => return true,
                ' ' | '\t' | '\r' => continue,
                _ => return false,
            }
        }
        true
    }

    /// Rest of the logical line (backslash continuations joined), consumed.
    fn rest_of_line(&mut self) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek(0) {
            if c == '\\' && matches!(self.peek(1), Some('\n')) {
                self.bump();
                self.bump();
                out.push(' ');
                continue;
            }
            if c == '\\' && self.peek(1) == Some('\r') && self.peek(2) == Some('\n') {
                self.bump();
                self.bump();
                self.bump();
                out.push(' ');
                continue;
            }
            if c == '\n' {
                break;
            }
            if c == '/' && self.peek(1) == Some('/') {
                while self.peek(0).is_some_and(|c| c != '\n') {
                    self.bump();
                }
                break;
            }
            self.bump();
            out.push(c);
        }
        out
    }

    fn run(mut self) -> Result<Vec<Token>, FrontendError> {
        let mut out = Vec::new();
        loop {
            // whitespace and comments
            match self.peek(0) {
                None => break,
                Some(c) if c.is_whitespace() => {
                    self.bump();
                    continue;
                }
                Some('/') if self.peek(1) == Some('/') => {
                    while self.peek(0).is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                    continue;
                }
                Some('/') if self.peek(1) == Some('*') => {
                    let start = self.span();
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek(0) {
                            None => return Err(self.err(start, "unterminated comment")),
                            Some('*') if self.peek(1) == Some('/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            _ => {
                                self.bump();
                            }
                        }
                    }
                    continue;
                }
                _ => {}
            }
            let span = self.span();
            let c = self.peek(0).unwrap();
            if c == '#' && !self.in_pragma {
                if !self.at_line_start() {
                    return Err(self.err(span, "`#` must start a line"));
                }
                self.bump();
                let line = self.rest_of_line();
                let trimmed = line.trim_start();
                if let Some(rest) = trimmed.strip_prefix("pragma") {
                    if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                        out.push(Token {
                            tok: Tok::Pragma(rest.trim().to_string()),
                            span,
                        });
                        continue;
                    }
                }
                if trimmed.starts_with("include") {
                    continue;
                }
                let word: String = trimmed.chars().take_while(|c| c.is_alphanumeric()).collect();
                return Err(self.err(span, format!("unsupported preprocessor directive `#{word}`")));
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(c) = self.peek(0).filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                    s.push(c);
                    self.bump();
                }
                out.push(Token { tok: Tok::Ident(s), span });
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) {
                out.push(self.number(span)?);
                continue;
            }
            let mut matched = None;
            for p in PUNCTS {
                if p.chars().enumerate().all(|(k, pc)| self.peek(k) == Some(pc)) {
                    matched = Some(p);
                    break;
                }
            }
            match matched {
                Some(p) => {
                    for _ in 0..p.len() {
                        self.bump();
                    }
                    out.push(Token { tok: Tok::Punct(p), span });
                }
                None => return Err(self.err(span, format!("unexpected character `{c}`"))),
            }
        }
        out.push(Token {
            tok: Tok::Eof,
            span: self.span(),
        });
        Ok(out)
    }

    fn number(&mut self, span: Span) -> Result<Token, FrontendError> {
        let mut s = String::new();
        let mut float = false;
        while let Some(c) = self.peek(0) {
            if c.is_ascii_digit() {
                s.push(c);
            } else if c == '.' && !float {
                float = true;
                s.push(c);
            } else if (c == 'e' || c == 'E')
                && (self.peek(1).is_some_and(|d| d.is_ascii_digit())
                    || (matches!(self.peek(1), Some('+' | '-')) && self.peek(2).is_some_and(|d| d.is_ascii_digit())))
            {
                float = true;
                s.push(c);
                self.bump();
                let sign = self.peek(0).unwrap();
                s.push(sign);
            } else {
                break;
            }
            self.bump();
        }
        // C suffixes
        while let Some(c) = self.peek(0).filter(|c| matches!(c, 'f' | 'F' | 'l' | 'L' | 'u' | 'U')) {
            if matches!(c, 'f' | 'F') {
                float = true;
            }
            s.push(c);
            self.bump();
        }
        if self.peek(0).is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(self.err(span, "malformed number"));
        }
        if float {
            return Ok(Token { tok: Tok::Float(s), span });
        }
        let digits = s.trim_end_matches(['l', 'L', 'u', 'U']);
        let v: i64 = digits
            .parse()
            .map_err(|_| self.err(span, format!("integer literal `{s}` out of range")))?;
        Ok(Token { tok: Tok::Int(v), span })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("a[i+1] += 2.5e-3; // c\n"),
            vec![
                Tok::Ident("a".into()),
                Tok::Punct("["),
                Tok::Ident("i".into()),
                Tok::Punct("+"),
                Tok::Int(1),
                Tok::Punct("]"),
                Tok::Punct("+="),
                Tok::Float("2.5e-3".into()),
                Tok::Punct(";"),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn pragma_lines_and_continuations() {
        let t = tokenize("#include <omp.h>\n  #pragma omp parallel for \\\n private(i)\nx = 1;").unwrap();
        assert_eq!(t[0].tok, Tok::Pragma("omp parallel for   private(i)".into()));
        assert_eq!(t[0].span, Span::new(2, 3));
        assert_eq!(t[1].span, Span::new(4, 1));
    }

    #[test]
    fn errors_carry_positions() {
        let e = tokenize("x = 1;\n  y = @;").unwrap_err();
        assert_eq!(e.span, Span::new(2, 7));
        assert!(tokenize("/* open").is_err());
        assert!(tokenize("x = 12abc;").is_err());
    }
}
