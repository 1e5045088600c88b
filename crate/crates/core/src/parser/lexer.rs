use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    IriRef(String),
    /// Prefixed name: (prefix, local part with escapes resolved).
    PName(String, String),
    BlankLabel(String),
    Var(String),
    /// Bare word: keyword, function name, `a`, `true`/`false`.
    Word(String),
    Str(String),
    LangTag(String),
    Integer(String),
    Decimal(String),
    Double(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Dot,
    Comma,
    Semi,
    Star,
    Slash,
    Pipe,
    Caret,
    DoubleCaret,
    Bang,
    Question,
    Plus,
    Minus,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
        out: Vec::new(),
    };
    lx.run()?;
    Ok(lx.out)
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    out: Vec<Token>,
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || (!c.is_ascii() && c.is_alphanumeric())
}

fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_ascii_digit() || c == '-' || c == '\u{00B7}'
}

/// Characters forbidden inside an IRIREF.
fn is_iri_forbidden(c: char) -> bool {
    matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') || c <= ' '
}

impl<'a> Lexer<'a> {
    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn char_at(&self, pos: usize) -> Option<char> {
        self.src.get(pos..).and_then(|s| s.chars().next())
    }

    fn err(&self, offset: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(offset, msg)
    }

    fn push(&mut self, tok: Tok, offset: usize) {
        self.out.push(Token { tok, offset });
    }

    fn run(&mut self) -> Result<(), ParseError> {
        loop {
            self.skip_ws_and_comments();
            let start = self.pos;
            let Some(c) = self.peek_char() else {
                self.push(Tok::Eof, start);
                return Ok(());
            };
            match c {
                '<' => {
                    if let Some(iri) = self.try_iriref() {
                        self.push(Tok::IriRef(iri), start);
                    } else if self.bytes.get(self.pos + 1) == Some(&b'=') {
                        self.pos += 2;
                        self.push(Tok::Le, start);
                    } else {
                        self.pos += 1;
                        self.push(Tok::Lt, start);
                    }
                }
                '>' => {
                    if self.bytes.get(self.pos + 1) == Some(&b'=') {
                        self.pos += 2;
                        self.push(Tok::Ge, start);
                    } else {
                        self.pos += 1;
                        self.push(Tok::Gt, start);
                    }
                }
                '?' | '$' => {
                    let next = self.char_at(self.pos + 1);
                    if next.is_some_and(|n| is_name_start(n) || n.is_ascii_digit()) {
                        self.pos += 1;
                        let name = self.take_var_name();
                        self.push(Tok::Var(name), start);
                    } else if c == '?' {
                        self.pos += 1;
                        self.push(Tok::Question, start);
                    } else {
                        return Err(self.err(start, "expected variable name after '$'"));
                    }
                }
                '"' | '\'' => {
                    let s = self.string_literal(c)?;
                    self.push(Tok::Str(s), start);
                }
                '@' => {
                    self.pos += 1;
                    let tag_start = self.pos;
                    while let Some(ch) = self.peek_char() {
                        if ch.is_ascii_alphanumeric() || ch == '-' {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                    if self.pos == tag_start {
                        return Err(self.err(start, "empty language tag"));
                    }
                    let tag = self.src[tag_start..self.pos].to_owned();
                    self.push(Tok::LangTag(tag), start);
                }
                '0'..='9' => self.number(start),
                '.' => {
                    if self.char_at(self.pos + 1).is_some_and(|d| d.is_ascii_digit()) {
                        self.number(start);
                    } else {
                        self.pos += 1;
                        self.push(Tok::Dot, start);
                    }
                }
                '_' if self.bytes.get(self.pos + 1) == Some(&b':') => {
                    self.pos += 2;
                    let label = self.take_blank_label();
                    if label.is_empty() {
                        return Err(self.err(start, "empty blank node label"));
                    }
                    self.push(Tok::BlankLabel(label), start);
                }
                ':' => {
                    self.pos += 1;
                    let local = self.take_local()?;
                    self.push(Tok::PName(String::new(), local), start);
                }
                c if is_name_start(c) => self.word_or_pname(start)?,
                _ => {
                    let two = self.src.get(self.pos..self.pos + 2).unwrap_or("");
                    let (tok, len) = match two {
                        "^^" => (Tok::DoubleCaret, 2),
                        "!=" => (Tok::Ne, 2),
                        "&&" => (Tok::AndAnd, 2),
                        "||" => (Tok::OrOr, 2),
                        _ => match c {
                            '{' => (Tok::LBrace, 1),
                            '}' => (Tok::RBrace, 1),
                            '(' => (Tok::LParen, 1),
                            ')' => (Tok::RParen, 1),
                            '[' => (Tok::LBracket, 1),
                            ']' => (Tok::RBracket, 1),
                            ',' => (Tok::Comma, 1),
                            ';' => (Tok::Semi, 1),
                            '*' => (Tok::Star, 1),
                            '/' => (Tok::Slash, 1),
                            '|' => (Tok::Pipe, 1),
                            '^' => (Tok::Caret, 1),
                            '!' => (Tok::Bang, 1),
                            '+' => (Tok::Plus, 1),
                            '-' => (Tok::Minus, 1),
                            '=' => (Tok::Eq, 1),
                            _ => {
                                return Err(self.err(start, format!("unexpected character {c:?}")))
                            }
                        },
                    };
                    self.pos += len;
                    self.push(tok, start);
                }
            }
        }
    }

    fn skip_ws_and_comments(&mut self) {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else if c == '#' {
                while let Some(c) = self.peek_char() {
                    self.pos += c.len_utf8();
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn try_iriref(&mut self) -> Option<String> {
        let rest = &self.src[self.pos + 1..];
        for (i, c) in rest.char_indices() {
            if c == '>' {
                let iri = rest[..i].to_owned();
                self.pos += i + 2;
                return Some(iri);
            }
            if is_iri_forbidden(c) {
                return None;
            }
        }
        None
    }

    fn take_var_name(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek_char() {
            if is_name_start(c) || c.is_ascii_digit() || c == '\u{00B7}' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_owned()
    }

    fn take_blank_label(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek_char() {
            if is_name_char(c) || c == '.' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        while self.pos > start && self.bytes[self.pos - 1] == b'.' {
            self.pos -= 1;
        }
        self.src[start..self.pos].to_owned()
    }

    fn word_or_pname(&mut self, start: usize) -> Result<(), ParseError> {
        // Candidate prefix: name chars and inner dots.
        let mut end = self.pos;
        for (i, c) in self.src[self.pos..].char_indices() {
            if is_name_char(c) || c == '.' {
                end = self.pos + i + c.len_utf8();
            } else {
                break;
            }
        }
        let mut prefix_end = end;
        while prefix_end > self.pos && self.bytes[prefix_end - 1] == b'.' {
            prefix_end -= 1;
        }
        if self.bytes.get(prefix_end) == Some(&b':') {
            let prefix = self.src[self.pos..prefix_end].to_owned();
            self.pos = prefix_end + 1;
            let local = self.take_local()?;
            self.push(Tok::PName(prefix, local), start);
            return Ok(());
        }
        // Plain word: letters, digits and underscores only.
        let mut wend = self.pos;
        for (i, c) in self.src[self.pos..].char_indices() {
            if is_name_start(c) || c.is_ascii_digit() {
                wend = self.pos + i + c.len_utf8();
            } else {
                break;
            }
        }
        let word = self.src[self.pos..wend].to_owned();
        self.pos = wend;
        self.push(Tok::Word(word), start);
        Ok(())
    }

    /// Local part of a prefixed name, with `\` escapes resolved and
    /// percent-escapes kept verbatim.
    fn take_local(&mut self) -> Result<String, ParseError> {
        let mut out = String::new();
        let mut first = true;
        while let Some(c) = self.peek_char() {
            let ok = if first {
                is_name_start(c) || c.is_ascii_digit() || c == ':' || c == '%' || c == '\\'
            } else {
                is_name_char(c) || c == '.' || c == ':' || c == '%' || c == '\\'
            };
            if !ok {
                break;
            }
            if c == '\\' {
                let Some(esc) = self.char_at(self.pos + 1) else {
                    return Err(self.err(self.pos, "dangling escape in local name"));
                };
                if !"_~.-!$&'()*+,;=/?#@%".contains(esc) {
                    return Err(self.err(self.pos, "invalid escape in local name"));
                }
                out.push(esc);
                self.pos += 1 + esc.len_utf8();
            } else if c == '%' {
                let hex = self.src.get(self.pos + 1..self.pos + 3).unwrap_or("");
                if hex.len() != 2 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
                    return Err(self.err(self.pos, "invalid percent escape in local name"));
                }
                out.push('%');
                out.push_str(hex);
                self.pos += 3;
            } else {
                out.push(c);
                self.pos += c.len_utf8();
            }
            first = false;
        }
        // A trailing '.' terminates the triple rather than the name.
        while out.ends_with('.') && self.bytes[self.pos - 1] == b'.' {
            out.pop();
            self.pos -= 1;
        }
        Ok(out)
    }

    fn number(&mut self, start: usize) {
        let mut saw_dot = false;
        let mut saw_exp = false;
        while let Some(c) = self.peek_char() {
            if c.is_ascii_digit() {
                self.pos += 1;
            } else if c == '.'
                && !saw_dot
                && !saw_exp
                && self.char_at(self.pos + 1).is_some_and(|d| d.is_ascii_digit())
            {
                saw_dot = true;
                self.pos += 1;
            } else if (c == 'e' || c == 'E') && !saw_exp {
                let mut look = self.pos + 1;
                if matches!(self.bytes.get(look), Some(b'+') | Some(b'-')) {
                    look += 1;
                }
                if self.bytes.get(look).is_some_and(|b| b.is_ascii_digit()) {
                    saw_exp = true;
                    self.pos = look;
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        let text = self.src[start..self.pos].to_owned();
        let tok = if saw_exp {
            Tok::Double(text)
        } else if saw_dot {
            Tok::Decimal(text)
        } else {
            Tok::Integer(text)
        };
        self.push(tok, start);
    }

    fn string_literal(&mut self, quote: char) -> Result<String, ParseError> {
        let start = self.pos;
        let triple = quote.to_string().repeat(3);
        let long = self.src[self.pos..].starts_with(&triple);
        self.pos += if long { 3 } else { 1 };
        let mut out = String::new();
        loop {
            let Some(c) = self.peek_char() else {
                return Err(self.err(start, "unterminated string literal"));
            };
            if long && self.src[self.pos..].starts_with(&triple) {
                // Quotes directly before the closing delimiter belong to the content.
                let mut run = 0;
                while self.char_at(self.pos + run) == Some(quote) {
                    run += 1;
                }
                for _ in 0..run - 3 {
                    out.push(quote);
                }
                self.pos += run;
                return Ok(out);
            }
            if !long && c == quote {
                self.pos += 1;
                return Ok(out);
            }
            if !long && (c == '\n' || c == '\r') {
                return Err(self.err(self.pos, "newline in short string literal"));
            }
            if c == '\\' {
                let Some(esc) = self.char_at(self.pos + 1) else {
                    return Err(self.err(self.pos, "dangling escape in string"));
                };
                let resolved = match esc {
                    't' => '\t',
                    'b' => '\u{8}',
                    'n' => '\n',
                    'r' => '\r',
                    'f' => '\u{c}',
                    '"' => '"',
                    '\'' => '\'',
                    '\\' => '\\',
                    'u' | 'U' => {
                        let len = if esc == 'u' { 4 } else { 8 };
                        let hex = self.src.get(self.pos + 2..self.pos + 2 + len).unwrap_or("");
                        let ch = u32::from_str_radix(hex, 16)
                            .ok()
                            .filter(|_| hex.len() == len)
                            .and_then(char::from_u32)
                            .ok_or_else(|| self.err(self.pos, "invalid unicode escape"))?;
                        out.push(ch);
                        self.pos += 2 + len;
                        continue;
                    }
                    _ => return Err(self.err(self.pos, format!("invalid escape \\{esc}"))),
                };
                out.push(resolved);
                self.pos += 2;
                continue;
            }
            out.push(c);
            self.pos += c.len_utf8();
        }
    }
}
