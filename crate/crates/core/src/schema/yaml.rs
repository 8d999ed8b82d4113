//! Parser for the YAML subset used by schema files: block mappings, block
//! sequences (also at the parent key's indentation), plain and quoted
//! scalars, flow lists of scalars, and `#` comments. Anchors, tags, block
//! scalars, flow mappings and multiple documents are rejected.

use super::node::{Node, Scalar};
use super::ConfigError;

struct Line {
    no: usize,
    indent: usize,
    text: String,
}

pub(crate) fn parse(text: &str) -> Result<Node, ConfigError> {
    let mut lines = Vec::new();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let trimmed = raw.trim_start_matches(' ');
        if trimmed.starts_with('\t') {
            return Err(ConfigError::syntax(no, "tabs are not allowed in indentation"));
        }
        let content = trimmed.trim_end();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if content == "---" {
            if seen_content {
                return Err(ConfigError::syntax(no, "multiple documents are not supported"));
            }
            continue;
        }
        if content == "..." {
            continue;
        }
        seen_content = true;
        lines.push(Line {
            no,
            indent: raw.len() - trimmed.len(),
            text: content.to_owned(),
        });
    }
    if lines.is_empty() {
        return Err(ConfigError::syntax(1, "empty document"));
    }
    let mut parser = Parser { lines, pos: 0 };
    let indent = parser.lines[0].indent;
    let root = parser.block(indent)?;
    if let Some(line) = parser.lines.get(parser.pos) {
        return Err(ConfigError::syntax(line.no, "unexpected indentation"));
    }
    Ok(root)
}

struct Parser {
    lines: Vec<Line>,
    pos: usize,
}

fn is_seq_item(text: &str) -> bool {
    text == "-" || text.starts_with("- ")
}

/// Splits `key: rest` at the first `:` followed by a space or end of line.
/// Returns `None` when the text is not a mapping entry.
fn split_key(text: &str, line: usize) -> Result<Option<(String, &str)>, ConfigError> {
    if text.starts_with('"') || text.starts_with('\'') {
        let (key, rest) = quoted(text, line)?;
        let rest = rest.trim_start();
        return Ok(rest
            .strip_prefix(':')
            .and_then(|r| (r.is_empty() || r.starts_with(' ')).then(|| (key, r.trim_start()))));
    }
    if text.starts_with('[') || text.starts_with('{') {
        return Ok(None);
    }
    let bytes = text.as_bytes();
    for (i, b) in bytes.iter().enumerate() {
        if *b == b'#' && i > 0 && bytes[i - 1] == b' ' {
            return Ok(None);
        }
        if *b == b':' && (i + 1 == bytes.len() || bytes[i + 1] == b' ') {
            return Ok(Some((text[..i].trim_end().to_owned(), text[i + 1..].trim_start())));
        }
    }
    Ok(None)
}

/// Parses a quoted scalar at the start of `text`; returns it and the rest.
fn quoted(text: &str, line: usize) -> Result<(String, &str), ConfigError> {
    let quote = text.chars().next().unwrap_or('"');
    let mut out = String::new();
    let mut chars = text.char_indices().skip(1);
    while let Some((i, c)) = chars.next() {
        if quote == '\'' {
            if c == '\'' {
                if text[i + 1..].starts_with('\'') {
                    chars.next();
                    out.push('\'');
                    continue;
                }
                return Ok((out, &text[i + 1..]));
            }
            out.push(c);
            continue;
        }
        match c {
            '"' => return Ok((out, &text[i + 1..])),
            '\\' => {
                let (_, esc) = chars
                    .next()
                    .ok_or_else(|| ConfigError::syntax(line, "unterminated escape sequence"))?;
                match esc {
                    '"' => out.push('"'),
                    '\\' => out.push('\\'),
                    '/' => out.push('/'),
                    'n' => out.push('\n'),
                    't' => out.push('\t'),
                    'r' => out.push('\r'),
                    '0' => out.push('\0'),
                    'u' => {
                        let hex: String = (0..4).filter_map(|_| chars.next().map(|(_, h)| h)).collect();
                        let ch = u32::from_str_radix(&hex, 16)
                            .ok()
                            .and_then(char::from_u32)
                            .ok_or_else(|| ConfigError::syntax(line, format!("invalid \\u escape {hex:?}")))?;
                        out.push(ch);
                    }
                    other => return Err(ConfigError::syntax(line, format!("unsupported escape \\{other}"))),
                }
            }
            _ => out.push(c),
        }
    }
    Err(ConfigError::syntax(line, "unterminated quoted string"))
}

fn expect_end(rest: &str, line: usize) -> Result<(), ConfigError> {
    let rest = rest.trim_start();
    if rest.is_empty() || rest.starts_with('#') {
        Ok(())
    } else {
        Err(ConfigError::syntax(line, format!("unexpected {rest:?} after value")))
    }
}

fn plain(text: &str, line: usize) -> Result<Scalar, ConfigError> {
    let cut = text.match_indices(" #").next().map(|(i, _)| i).unwrap_or(text.len());
    let value = text[..cut].trim_end();
    if let Some(c) = value.chars().next() {
        if matches!(c, '&' | '*' | '!' | '|' | '>' | '%' | '@' | '`') {
            return Err(ConfigError::syntax(
                line,
                format!("values starting with {c:?} are not supported; quote the value"),
            ));
        }
    }
    Ok(match value {
        "" | "~" | "null" => Scalar::Null,
        _ => Scalar::Plain(value.to_owned()),
    })
}

/// A value written on the same line as its key or list marker.
fn inline(text: &str, line: usize) -> Result<Node, ConfigError> {
    if text.starts_with('"') || text.starts_with('\'') {
        let (value, rest) = quoted(text, line)?;
        expect_end(rest, line)?;
        return Ok(Node::Scalar(Scalar::Str(value)));
    }
    if text.starts_with('{') {
        return Err(ConfigError::syntax(line, "flow mappings are not supported"));
    }
    if let Some(mut rest) = text.strip_prefix('[') {
        let mut items = Vec::new();
        loop {
            rest = rest.trim_start();
            if let Some(after) = rest.strip_prefix(']') {
                if !items.is_empty() {
                    return Err(ConfigError::syntax(line, "trailing ',' in flow list"));
                }
                expect_end(after, line)?;
                return Ok(Node::Seq(items));
            }
            let item;
            if rest.starts_with('"') || rest.starts_with('\'') {
                let (value, after) = quoted(rest, line)?;
                item = Scalar::Str(value);
                rest = after.trim_start();
            } else if rest.starts_with('[') || rest.starts_with('{') {
                return Err(ConfigError::syntax(line, "nested flow collections are not supported"));
            } else {
                let end = rest
                    .find([',', ']'])
                    .ok_or_else(|| ConfigError::syntax(line, "unterminated flow list"))?;
                item = plain(&rest[..end], line)?;
                rest = &rest[end..];
            }
            items.push(Node::Scalar(item));
            if let Some(after) = rest.strip_prefix(',') {
                rest = after;
            } else if let Some(after) = rest.strip_prefix(']') {
                expect_end(after, line)?;
                return Ok(Node::Seq(items));
            } else {
                return Err(ConfigError::syntax(line, "expected ',' or ']' in flow list"));
            }
        }
    }
    Ok(Node::Scalar(plain(text, line)?))
}

impl Parser {
    fn block(&mut self, indent: usize) -> Result<Node, ConfigError> {
        if is_seq_item(&self.lines[self.pos].text) {
            self.seq(indent)
        } else {
            self.map(indent)
        }
    }

    /// Value of a key or list item whose inline part was empty.
    fn nested(&mut self, indent: usize, allow_same_indent_seq: bool) -> Result<Node, ConfigError> {
        match self.lines.get(self.pos) {
            Some(next) if next.indent > indent => {
                let child = next.indent;
                self.block(child)
            }
            Some(next) if allow_same_indent_seq && next.indent == indent && is_seq_item(&next.text) => self.seq(indent),
            _ => Ok(Node::Scalar(Scalar::Null)),
        }
    }

    fn no_deeper(&self, indent: usize) -> Result<(), ConfigError> {
        match self.lines.get(self.pos) {
            Some(next) if next.indent > indent => Err(ConfigError::syntax(next.no, "unexpected indentation")),
            _ => Ok(()),
        }
    }

    fn map(&mut self, indent: usize) -> Result<Node, ConfigError> {
        let mut entries: Vec<(String, Node)> = Vec::new();
        while let Some(line) = self.lines.get(self.pos) {
            if line.indent != indent || is_seq_item(&line.text) {
                break;
            }
            let no = line.no;
            let Some((key, rest)) = split_key(&line.text, no)? else {
                return Err(ConfigError::syntax(no, "expected 'key: value'"));
            };
            let rest = rest.to_owned();
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(ConfigError::syntax(no, format!("duplicate key {key:?}")));
            }
            self.pos += 1;
            let value = if rest.is_empty() || rest.starts_with('#') {
                self.nested(indent, true)?
            } else {
                let value = inline(&rest, no)?;
                self.no_deeper(indent)?;
                value
            };
            entries.push((key, value));
        }
        Ok(Node::Map(entries))
    }

    fn seq(&mut self, indent: usize) -> Result<Node, ConfigError> {
        let mut items = Vec::new();
        while let Some(line) = self.lines.get(self.pos) {
            if line.indent != indent || !is_seq_item(&line.text) {
                break;
            }
            let no = line.no;
            let after_dash = &line.text[1..];
            let content = after_dash.trim_start();
            if content.is_empty() || content.starts_with('#') {
                self.pos += 1;
                items.push(self.nested(indent, false)?);
                continue;
            }
            if split_key(content, no)?.is_some() {
                // `- key: value` opens a mapping at the column of `key`
                let column = indent + 1 + (after_dash.len() - content.len());
                let content = content.to_owned();
                let line = &mut self.lines[self.pos];
                line.indent = column;
                line.text = content;
                items.push(self.map(column)?);
                continue;
            }
            let value = inline(content, no)?;
            self.pos += 1;
            self.no_deeper(indent)?;
            items.push(value);
        }
        Ok(Node::Seq(items))
    }
}
