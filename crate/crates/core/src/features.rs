//! Per-user feature extraction: message count M, mean message length L, and
//! pooled frequencies of ten tracked symbols, plus min-max normalization of
//! the resulting matrix.
//!
//! Counting is case-insensitive (Unicode lowercasing) over NFC-normalized
//! text. A message's length is its total number of Unicode scalar values
//! after folding, whitespace and punctuation included. Symbol frequencies are
//! pooled over all of a user's messages: total occurrences divided by total
//! characters, not the mean of per-message ratios.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::UserDocument;
use crate::error::{Error, Result};

pub const FEATURE_COUNT: usize = 12;

/// Column names of the feature matrix, in frozen order: message count, mean
/// length, then the ten symbol frequencies (а е и о у э ю я ! ?).
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "M", "L", "f_a", "f_e", "f_i", "f_o", "f_u", "f_e2", "f_yu", "f_ya", "f_excl", "f_quest",
];

/// The ten tracked symbols: Cyrillic а е и о у э ю я, then `!` and `?`.
pub const DEFAULT_SYMBOLS: [char; 10] = [
    '\u{0430}', '\u{0435}', '\u{0438}', '\u{043E}', '\u{0443}', '\u{044D}', '\u{044E}',
    '\u{044F}', '!', '?',
];

pub const FEATURES_CSV_HEADER: &str =
    "user_id,M,L,f_a,f_e,f_i,f_o,f_u,f_e2,f_yu,f_ya,f_excl,f_quest";

/// Ordered set of code points whose frequencies are tracked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSet {
    symbols: Vec<char>,
}

impl SymbolSet {
    pub fn new(symbols: Vec<char>) -> Result<Self> {
        let distinct: BTreeSet<char> = symbols.iter().copied().collect();
        if distinct.len() != symbols.len() {
            return Err(Error::Schema("symbol set contains duplicates".into()));
        }
        if symbols.is_empty() {
            return Err(Error::Schema("symbol set is empty".into()));
        }
        Ok(SymbolSet { symbols })
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl Default for SymbolSet {
    fn default() -> Self {
        SymbolSet {
            symbols: DEFAULT_SYMBOLS.to_vec(),
        }
    }
}

/// Text folding options shared by all counting operations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextOptions {
    /// Map visually identical Latin letters (a c e o p x y) to their Cyrillic
    /// counterparts before counting. Off by default; useful against evasion
    /// by homoglyph substitution.
    pub fold_homoglyphs: bool,
}

fn fold_homoglyph(c: char) -> char {
    match c {
        'a' => 'а',
        'c' => 'с',
        'e' => 'е',
        'o' => 'о',
        'p' => 'р',
        'x' => 'х',
        'y' => 'у',
        other => other,
    }
}

/// NFC-normalizes, lowercases, and optionally homoglyph-folds a message.
fn fold_text(text: &str, opts: TextOptions) -> Vec<char> {
    let folded = text.nfc().flat_map(char::to_lowercase);
    if opts.fold_homoglyphs {
        folded.map(fold_homoglyph).collect()
    } else {
        folded.collect()
    }
}

/// Returns `(occurrences of symbol, total scalar values)` for one message.
pub fn count_in_message(text: &str, symbol: char, opts: TextOptions) -> (usize, usize) {
    let chars = fold_text(text, opts);
    let hits = chars.iter().filter(|&&c| c == symbol).count();
    (hits, chars.len())
}

/// Pooled frequency of `symbol` over all messages of a user: total
/// occurrences divided by total characters. Zero when the user wrote no
/// characters at all.
pub fn char_frequency(doc: &UserDocument, symbol: char, opts: TextOptions) -> f64 {
    let mut hits = 0usize;
    let mut total = 0usize;
    for message in &doc.messages {
        let (h, t) = count_in_message(message, symbol, opts);
        hits += h;
        total += t;
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Mean message length in scalar values.
pub fn avg_length(doc: &UserDocument, opts: TextOptions) -> f64 {
    if doc.messages.is_empty() {
        return 0.0;
    }
    let total: usize = doc
        .messages
        .iter()
        .map(|m| fold_text(m, opts).len())
        .sum();
    total as f64 / doc.messages.len() as f64
}

/// One row of the feature model for a single user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserFeatureVector {
    pub user_id: String,
    /// Message count M.
    pub m_count: usize,
    /// Mean message length L, in characters.
    pub avg_len: f64,
    /// Symbol frequencies, aligned with the symbol set order.
    pub freqs: Vec<f64>,
}

impl UserFeatureVector {
    pub fn to_row(&self) -> Vec<f64> {
        let mut row = Vec::with_capacity(2 + self.freqs.len());
        row.push(self.m_count as f64);
        row.push(self.avg_len);
        row.extend_from_slice(&self.freqs);
        row
    }
}

/// Computes the full feature vector for one user. Single pass over each
/// message; results equal the per-symbol definitions exactly.
pub fn extract_features(
    doc: &UserDocument,
    symbols: &SymbolSet,
    opts: TextOptions,
) -> UserFeatureVector {
    let mut counts: HashMap<char, usize> =
        symbols.symbols().iter().map(|&c| (c, 0usize)).collect();
    let mut total_chars = 0usize;
    for message in &doc.messages {
        for c in fold_text(message, opts) {
            total_chars += 1;
            if let Some(n) = counts.get_mut(&c) {
                *n += 1;
            }
        }
    }
    let freqs: Vec<f64> = symbols
        .symbols()
        .iter()
        .map(|c| {
            if total_chars == 0 {
                0.0
            } else {
                counts[c] as f64 / total_chars as f64
            }
        })
        .collect();
    let avg_len = if doc.messages.is_empty() {
        0.0
    } else {
        total_chars as f64 / doc.messages.len() as f64
    };
    UserFeatureVector {
        user_id: doc.user_id.clone(),
        m_count: doc.message_count(),
        avg_len,
        freqs,
    }
}

/// Dense per-user feature matrix. Rows follow the given vector order; the
/// column layout is the frozen 12-slot list of [`FEATURE_NAMES`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub user_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn from_rows(user_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if user_ids.len() != rows.len() {
            return Err(Error::Schema("row/id count mismatch".into()));
        }
        if let Some(first) = rows.first() {
            let width = first.len();
            if rows.iter().any(|r| r.len() != width) {
                return Err(Error::Schema("ragged feature matrix".into()));
            }
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite feature value".into()));
        }
        Ok(FeatureMatrix { user_ids, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }
}

pub fn build_matrix(vectors: &[UserFeatureVector]) -> Result<FeatureMatrix> {
    if vectors.is_empty() {
        return Err(Error::Schema("no feature vectors".into()));
    }
    let mut seen = BTreeSet::new();
    for v in vectors {
        if !seen.insert(v.user_id.as_str()) {
            return Err(Error::Schema(format!("duplicate user_id `{}`", v.user_id)));
        }
    }
    let user_ids = vectors.iter().map(|v| v.user_id.clone()).collect();
    let rows = vectors.iter().map(|v| v.to_row()).collect();
    FeatureMatrix::from_rows(user_ids, rows)
}

/// Per-feature min/max recorded from the training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl NormalizationParams {
    /// Scales a raw value into [0,1]; constant features map to 0.5 and
    /// out-of-range values clamp.
    pub fn normalize_value(&self, feature: usize, value: f64) -> f64 {
        let (min, max) = (self.mins[feature], self.maxs[feature]);
        if min == max {
            0.5
        } else {
            ((value - min) / (max - min)).clamp(0.0, 1.0)
        }
    }

    /// Inverse of [`Self::normalize_value`] for in-range values; constant
    /// features denormalize to their single observed value.
    pub fn denormalize_value(&self, feature: usize, value: f64) -> f64 {
        let (min, max) = (self.mins[feature], self.maxs[feature]);
        if min == max {
            min
        } else {
            min + value * (max - min)
        }
    }

    pub fn normalize_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| self.normalize_value(j, v))
            .collect()
    }

    pub fn denormalize_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| self.denormalize_value(j, v))
            .collect()
    }
}

pub fn fit_normalization(matrix: &FeatureMatrix) -> Result<NormalizationParams> {
    if matrix.n_rows() == 0 {
        return Err(Error::Schema("cannot fit normalization on empty matrix".into()));
    }
    let width = matrix.n_features();
    let mut mins = vec![f64::INFINITY; width];
    let mut maxs = vec![f64::NEG_INFINITY; width];
    for row in &matrix.rows {
        for (j, &v) in row.iter().enumerate() {
            mins[j] = mins[j].min(v);
            maxs[j] = maxs[j].max(v);
        }
    }
    Ok(NormalizationParams { mins, maxs })
}

pub fn apply_normalization(matrix: &FeatureMatrix, params: &NormalizationParams) -> FeatureMatrix {
    let rows = matrix
        .rows
        .iter()
        .map(|row| params.normalize_row(row))
        .collect();
    FeatureMatrix {
        user_ids: matrix.user_ids.clone(),
        rows,
    }
}

/// Shortest decimal representation that round-trips the exact f64.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes a 12-column feature matrix as CSV with the documented header.
pub fn write_features_csv<W: Write>(matrix: &FeatureMatrix, w: W) -> Result<()> {
    if matrix.n_features() != FEATURE_COUNT {
        return Err(Error::Schema(format!(
            "feature csv requires {FEATURE_COUNT} columns, matrix has {}",
            matrix.n_features()
        )));
    }
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["user_id".to_string()];
    header.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    wtr.write_record(&header).map_err(csv_io)?;
    for (user_id, row) in matrix.user_ids.iter().zip(&matrix.rows) {
        let mut record = vec![user_id.clone()];
        record.extend(row.iter().map(|&v| fmt_f64(v)));
        wtr.write_record(&record).map_err(csv_io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_features_csv<R: Read>(r: R) -> Result<FeatureMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read csv header: {e}")))?;
    let expected: Vec<&str> = FEATURES_CSV_HEADER.split(',').collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Schema(format!(
            "unexpected feature csv header `{}`",
            got.join(",")
        )));
    }
    let mut user_ids = Vec::new();
    let mut rows = Vec::new();
    for result in rdr.into_records() {
        let record = result.map_err(|e| Error::Schema(e.to_string()))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != FEATURE_COUNT + 1 {
            return Err(Error::malformed(line, "wrong column count"));
        }
        user_ids.push(record[0].to_string());
        let mut row = Vec::with_capacity(FEATURE_COUNT);
        for j in 1..=FEATURE_COUNT {
            let v: f64 = record[j]
                .parse()
                .map_err(|_| Error::malformed(line, format!("bad float `{}`", &record[j])))?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Schema("feature csv has no rows".into()));
    }
    FeatureMatrix::from_rows(user_ids, rows)
}

fn csv_io(e: csv::Error) -> Error {
    Error::Schema(e.to_string())
}
