//! Line-oriented record files shared by every document format: one record
//! per line, whitespace separated, `#` starts a comment, double quotes group
//! a token, and `key=value` tokens carry options.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct DocumentError {
    pub line: usize,
    pub message: String,
}

impl DocumentError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub text: String,
    pub quoted: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct Record {
    pub line: usize,
    pub keyword: String,
    pub positional: Vec<String>,
    pub options: BTreeMap<String, String>,
}

impl Record {
    pub fn arg(&self, i: usize, what: &str) -> Result<&str, DocumentError> {
        self.positional
            .get(i)
            .map(String::as_str)
            .ok_or_else(|| DocumentError::new(self.line, format!("`{}` is missing {what}", self.keyword)))
    }

    pub fn parse_arg<T: FromStr>(&self, i: usize, what: &str) -> Result<T, DocumentError>
    where
        T::Err: fmt::Display,
    {
        let raw = self.arg(i, what)?;
        raw.parse()
            .map_err(|e| DocumentError::new(self.line, format!("bad {what} `{raw}`: {e}")))
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, DocumentError>
    where
        T::Err: fmt::Display,
    {
        match self.options.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| DocumentError::new(self.line, format!("bad {key}=`{raw}`: {e}"))),
        }
    }

    pub fn flag(&self, key: &str) -> Result<Option<bool>, DocumentError> {
        match self.options.get(key).map(String::as_str) {
            None => Ok(None),
            Some("1") | Some("true") => Ok(Some(true)),
            Some("0") | Some("false") => Ok(Some(false)),
            Some(other) => Err(DocumentError::new(self.line, format!("bad {key}=`{other}`, expected 0 or 1"))),
        }
    }

    pub fn expect_arity(&self, min: usize, max: usize) -> Result<(), DocumentError> {
        let n = self.positional.len();
        if n < min || n > max {
            return Err(DocumentError::new(
                self.line,
                format!("`{}` takes {min}..={max} positional fields, found {n}", self.keyword),
            ));
        }
        Ok(())
    }

    pub fn reject_unknown_options(&self, allowed: &[&str]) -> Result<(), DocumentError> {
        for k in self.options.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(DocumentError::new(self.line, format!("`{}` does not accept option `{k}`", self.keyword)));
            }
        }
        Ok(())
    }
}

pub(crate) fn tokenize(line_no: usize, line: &str) -> Result<Vec<Token>, DocumentError> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let Some(&c) = chars.peek() else { break };
        if c == '#' {
            break;
        }
        let mut text = String::new();
        let mut quoted = false;
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                break;
            }
            chars.next();
            if c == '"' {
                quoted = true;
                let mut closed = false;
                for q in chars.by_ref() {
                    if q == '"' {
                        closed = true;
                        break;
                    }
                    text.push(q);
                }
                if !closed {
                    return Err(DocumentError::new(line_no, "unterminated quoted string"));
                }
            } else {
                text.push(c);
            }
        }
        out.push(Token { text, quoted });
    }
    Ok(out)
}

pub(crate) fn parse_records(text: &str) -> Result<Vec<Record>, DocumentError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let tokens = tokenize(line_no, line)?;
        let mut iter = tokens.into_iter();
        let Some(first) = iter.next() else { continue };
        let mut positional = Vec::new();
        let mut options = BTreeMap::new();
        for t in iter {
            match (t.quoted, t.text.split_once('=')) {
                (false, Some((k, v))) if !k.is_empty() => {
                    options.insert(k.to_owned(), v.to_owned());
                }
                _ => positional.push(t.text),
            }
        }
        out.push(Record { line: line_no, keyword: first.text, positional, options });
    }
    Ok(out)
}

/// Quote a free-text field for writing.
pub(crate) fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "'"))
}
