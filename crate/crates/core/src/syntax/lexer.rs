use super::{ParseError, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Dot,
    Comma,
    Semi,
    Colon,
    Slash,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DArrow,
    Newline,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DArrow => "`<->`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Splits `text` into tokens. `#` starts a comment running to end of line.
/// Newlines are emitted only when `lines` is set.
pub fn lex(text: &str, lines: bool) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = |tok: Tok| Token {
            tok,
            span: SourceSpan::new(start, start + 1),
        };
        match c {
            b'\n' => {
                if lines {
                    out.push(single(Tok::Newline));
                }
                i += 1;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                out.push(single(Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push(single(Tok::RParen));
                i += 1;
            }
            b'[' => {
                out.push(single(Tok::LBracket));
                i += 1;
            }
            b']' => {
                out.push(single(Tok::RBracket));
                i += 1;
            }
            b'{' => {
                out.push(single(Tok::LBrace));
                i += 1;
            }
            b'}' => {
                out.push(single(Tok::RBrace));
                i += 1;
            }
            b'.' => {
                out.push(single(Tok::Dot));
                i += 1;
            }
            b',' => {
                out.push(single(Tok::Comma));
                i += 1;
            }
            b';' => {
                out.push(single(Tok::Semi));
                i += 1;
            }
            b':' => {
                out.push(single(Tok::Colon));
                i += 1;
            }
            b'/' => {
                out.push(single(Tok::Slash));
                i += 1;
            }
            b'!' => {
                out.push(single(Tok::Bang));
                i += 1;
            }
            b'&' => {
                out.push(single(Tok::Amp));
                i += 1;
            }
            b'|' => {
                out.push(single(Tok::Pipe));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push(Token {
                    tok: Tok::Arrow,
                    span: SourceSpan::new(i, i + 2),
                });
                i += 2;
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                out.push(Token {
                    tok: Tok::DArrow,
                    span: SourceSpan::new(i, i + 3),
                });
                i += 3;
            }
            c if c.is_ascii_alphanumeric() || c == b'_' || c == b'@' => {
                // generated names (leading `@`) may also contain `.`
                let generated = c == b'@';
                while i < bytes.len() {
                    let d = bytes[i];
                    if d.is_ascii_alphanumeric()
                        || d == b'_'
                        || d == b'@'
                        || (generated && d == b'.')
                    {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    span: SourceSpan::new(start, i),
                });
            }
            _ => {
                let end = start + text[start..].chars().next().map_or(1, |ch| ch.len_utf8());
                return Err(ParseError {
                    span: SourceSpan::new(start, end),
                    expected: vec!["a token".into()],
                    found: format!("`{}`", &text[start..end]),
                });
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(text.len(), text.len()),
    });
    Ok(out)
}

/// Cursor over a token list with expected-token bookkeeping for errors.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Cursor {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Token, ParseError> {
        if self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.error(&[&tok.describe()]))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => Err(self.error(&[what])),
        }
    }

    pub fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.error(&[&format!("`{kw}`")])),
        }
    }

    pub fn skip_newlines(&mut self) {
        while self.eat(&Tok::Newline) {}
    }

    pub fn at_line_end(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Eof)
    }

    pub fn end_line(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.error(&["end of line"])),
        }
    }
}
