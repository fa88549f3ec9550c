//! Comment ingestion and per-user aggregation.
//!
//! Input is either JSONL (one object per line with `user_id` and `text`
//! string fields, unknown keys ignored) or CSV (RFC-4180, header
//! `user_id,text`). Text is stored verbatim; all normalization happens at
//! counting time in [`crate::features`].

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub user_id: String,
    pub text: String,
}

impl Comment {
    pub fn new(user_id: impl Into<String>, text: impl Into<String>) -> Self {
        Comment {
            user_id: user_id.into(),
            text: text.into(),
        }
    }
}

/// All messages of one user, in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserDocument {
    pub user_id: String,
    pub messages: Vec<String>,
}

impl UserDocument {
    pub fn new(user_id: impl Into<String>, messages: Vec<String>) -> Self {
        UserDocument {
            user_id: user_id.into(),
            messages,
        }
    }

    /// Message count, the M value of the feature model.
    pub fn message_count(&self) -> usize {
        self.messages.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "jsonl" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected jsonl or csv)")),
        }
    }
}

#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub comments: Vec<Comment>,
    /// Records dropped in lenient mode.
    pub skipped: usize,
}

#[derive(Deserialize)]
struct RawRecord {
    user_id: String,
    text: String,
}

/// Parses a comment dump. Errors are fatal unless `lenient` is set, in which
/// case bad records are skipped and counted in the outcome.
pub fn parse_comments<R: Read>(
    mut input: R,
    format: InputFormat,
    lenient: bool,
) -> Result<ParseOutcome> {
    match format {
        InputFormat::Jsonl => {
            let mut bytes = Vec::new();
            input.read_to_end(&mut bytes)?;
            parse_jsonl(&bytes, lenient)
        }
        InputFormat::Csv => parse_csv(input, lenient),
    }
}

fn parse_jsonl(bytes: &[u8], lenient: bool) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    for (idx, raw_line) in bytes.split(|&b| b == b'\n').enumerate() {
        let line_no = idx + 1;
        let raw_line = strip_cr(raw_line);
        if raw_line.iter().all(|b| b.is_ascii_whitespace()) {
            continue;
        }
        match decode_jsonl_line(raw_line, line_no) {
            Ok(comment) => out.comments.push(comment),
            Err(e) if lenient => {
                let _ = e;
                out.skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn decode_jsonl_line(raw: &[u8], line_no: usize) -> Result<Comment> {
    let text = std::str::from_utf8(raw)
        .map_err(|_| Error::malformed(line_no, "invalid UTF-8"))?;
    let record: RawRecord = serde_json::from_str(text)
        .map_err(|e| Error::malformed(line_no, e.to_string()))?;
    if record.user_id.is_empty() {
        return Err(Error::malformed(line_no, "empty user_id"));
    }
    Ok(Comment {
        user_id: record.user_id,
        text: record.text,
    })
}

fn strip_cr(line: &[u8]) -> &[u8] {
    match line.last() {
        Some(b'\r') => &line[..line.len() - 1],
        _ => line,
    }
}

fn parse_csv<R: Read>(input: R, lenient: bool) -> Result<ParseOutcome> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read csv header: {e}")))?;
    if headers.len() < 2 || &headers[0] != "user_id" || &headers[1] != "text" {
        return Err(Error::Schema(format!(
            "csv header must be `user_id,text`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut out = ParseOutcome::default();
    for result in rdr.into_records() {
        match decode_csv_record(result) {
            Ok(comment) => out.comments.push(comment),
            Err(_) if lenient => out.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn decode_csv_record(
    result: std::result::Result<csv::StringRecord, csv::Error>,
) -> Result<Comment> {
    let record = result.map_err(csv_error)?;
    let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
    let user_id = record
        .get(0)
        .ok_or_else(|| Error::malformed(line, "missing user_id column"))?;
    let text = record
        .get(1)
        .ok_or_else(|| Error::malformed(line, "missing text column"))?;
    if user_id.is_empty() {
        return Err(Error::malformed(line, "empty user_id"));
    }
    Ok(Comment::new(user_id, text))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(0);
    Error::malformed(line, e.to_string())
}

/// Writes comments back out as JSONL, one object per line.
pub fn write_comments_jsonl<W: Write>(comments: &[Comment], mut w: W) -> Result<()> {
    for comment in comments {
        serde_json::to_writer(&mut w, comment)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Groups comments into per-user documents, keeping only users with at least
/// `min_messages` comments. Output is sorted by user id; message order within
/// a user follows input order.
pub fn group_by_user(comments: &[Comment], min_messages: usize) -> Vec<UserDocument> {
    let min_messages = min_messages.max(1);
    let mut by_user: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for comment in comments {
        by_user
            .entry(&comment.user_id)
            .or_default()
            .push(comment.text.clone());
    }
    by_user
        .into_iter()
        .filter(|(_, messages)| messages.len() >= min_messages)
        .map(|(user_id, messages)| UserDocument::new(user_id, messages))
        .collect()
}
