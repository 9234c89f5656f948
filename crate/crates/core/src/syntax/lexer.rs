use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(super) enum Tok {
    /// Lowercase-initial identifier or bare integer.
    Ident(String),
    /// Uppercase-initial identifier, optionally followed by primes.
    Var(String),
    Str(String),
    /// `_n<id>`, `_f<id>`, `#f<id>`, `#_`.
    Null(u64),
    Frozen(u64),
    Function(u64),
    Filler,
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Arrow,
    Turnstile,
    Eof,
}

#[derive(Clone, Debug)]
pub(super) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(super) fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| ParseError::Syntax {
        line,
        column,
        message,
    };

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok| {
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            ',' => push(Tok::Comma),
            '.' => push(Tok::Dot),
            ':' if chars.get(i + 1) == Some(&'-') => {
                push(Tok::Turnstile);
                i += 1;
                col += 1;
            }
            ':' => push(Tok::Colon),
            '-' if chars.get(i + 1) == Some(&'>') => {
                push(Tok::Arrow);
                i += 1;
                col += 1;
            }
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                let (mut l, mut cl) = (line, col + 1);
                loop {
                    match chars.get(j) {
                        None => {
                            return Err(err(start_line, start_col, "unterminated string".into()))
                        }
                        Some('"') => break,
                        Some('\\') => {
                            let esc = match chars.get(j + 1) {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                other => {
                                    return Err(err(
                                        l,
                                        cl,
                                        format!(
                                            "invalid escape {:?}",
                                            other.copied().unwrap_or(' ')
                                        ),
                                    ))
                                }
                            };
                            s.push(esc);
                            j += 2;
                            cl += 2;
                        }
                        Some('\n') => {
                            s.push('\n');
                            j += 1;
                            l += 1;
                            cl = 1;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                            cl += 1;
                        }
                    }
                }
                if s.is_empty() {
                    return Err(err(start_line, start_col, "empty constant".into()));
                }
                push(Tok::Str(s));
                i = j + 1;
                line = l;
                col = cl + 1;
                continue;
            }
            '#' => {
                if chars.get(i + 1) == Some(&'_') {
                    push(Tok::Filler);
                    i += 2;
                    col += 2;
                    continue;
                }
                if chars.get(i + 1) == Some(&'f') {
                    let (id, len) = number_at(&chars, i + 2)
                        .ok_or_else(|| err(line, col, "expected id after #f".into()))?;
                    push(Tok::Function(id));
                    i += 2 + len;
                    col += 2 + len;
                    continue;
                }
                return Err(err(line, col, "unexpected character '#'".into()));
            }
            '_' => {
                let kind = chars.get(i + 1).copied();
                let parsed = match kind {
                    Some('n') | Some('f') => number_at(&chars, i + 2),
                    _ => None,
                };
                let Some((id, len)) = parsed else {
                    return Err(err(line, col, "unexpected character '_'".into()));
                };
                push(if kind == Some('n') {
                    Tok::Null(id)
                } else {
                    Tok::Frozen(id)
                });
                i += 2 + len;
                col += 2 + len;
                continue;
            }
            c if c.is_ascii_alphanumeric() => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if c.is_ascii_uppercase() {
                    while j < chars.len() && chars[j] == '\'' {
                        j += 1;
                    }
                }
                let word: String = chars[i..j].iter().collect();
                push(if c.is_ascii_uppercase() {
                    Tok::Var(word)
                } else {
                    Tok::Ident(word)
                });
                col += j - i;
                i = j;
                continue;
            }
            other => return Err(err(line, col, format!("unexpected character {other:?}"))),
        }
        i += 1;
        col += 1;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

fn number_at(chars: &[char], start: usize) -> Option<(u64, usize)> {
    let mut j = start;
    while j < chars.len() && chars[j].is_ascii_digit() {
        j += 1;
    }
    if j == start
        || chars
            .get(j)
            .is_some_and(|c| c.is_ascii_alphabetic() || *c == '_')
    {
        return None;
    }
    let digits: String = chars[start..j].iter().collect();
    digits.parse().ok().map(|id| (id, j - start))
}
