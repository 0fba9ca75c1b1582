//! Pulls the proposed probability vector out of free-form chat replies.

use std::fmt::Write as _;

/// Marker that precedes the final vector in an analysis reply.
pub const TRIGGER_PHRASE: &str = "the prob_new finally selected";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error("reply does not contain \"{TRIGGER_PHRASE}\"")]
    PhraseAbsent,
    #[error("no numeric list follows the marker")]
    NoNumbers,
    #[error("cannot parse `{0}` as a number")]
    Unparseable(String),
    #[error("expected {expected} numbers, found {got}")]
    Count { expected: usize, got: usize },
}

/// The numeric list following the last occurrence of [`TRIGGER_PHRASE`]
/// (matched case-insensitively, escaped underscores allowed). The list may be
/// bare, bracketed, or inside `{ 'prob_new': [...] }`.
pub fn extract_prob_new(reply: &str, expected_len: usize) -> Result<Vec<f64>, ExtractError> {
    let end = find_last(reply, &[TRIGGER_PHRASE, "the prob\\_new finally selected"]).ok_or(ExtractError::PhraseAbsent)?;
    let values = parse_list(&reply[end..])?;
    check_count(values, expected_len)
}

/// Reads an extraction reply: the `{ 'prob_new': [...] }` object when one is
/// present, otherwise whatever follows the trigger phrase.
pub fn parse_agent2_reply(reply: &str, expected_len: usize) -> Result<Vec<f64>, ExtractError> {
    if let Some(values) = json_shape(reply) {
        return check_count(values?, expected_len);
    }
    extract_prob_new(reply, expected_len)
}

/// `the prob_new finally selected: { 'prob_new': [p1, ...] }` with every
/// entry printed in shortest round-trip form.
pub fn render_agent2_reply(v: &[f64]) -> String {
    let mut out = format!("{TRIGGER_PHRASE}: {{ 'prob_new': [");
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{x}");
    }
    out.push_str("] }");
    out
}

fn check_count(values: Vec<f64>, expected: usize) -> Result<Vec<f64>, ExtractError> {
    if values.len() != expected {
        return Err(ExtractError::Count { expected, got: values.len() });
    }
    Ok(values)
}

/// Byte offset just past the last case-insensitive match of any needle.
fn find_last(haystack: &str, needles: &[&str]) -> Option<usize> {
    let lower = haystack.to_ascii_lowercase();
    needles.iter().filter_map(|n| lower.rfind(n).map(|i| i + n.len())).max()
}

/// The bracketed list after the last `prob_new` key followed by a colon.
fn json_shape(reply: &str) -> Option<Result<Vec<f64>, ExtractError>> {
    let lower = reply.to_ascii_lowercase();
    let mut best = None;
    for key in ["prob_new", "prob\\_new"] {
        for (i, _) in lower.match_indices(key) {
            let rest = &reply[i + key.len()..];
            let after_quote = rest.trim_start_matches(['\'', '"', ' ']);
            if let Some(r) = after_quote.strip_prefix(':') {
                let r = r.trim_start();
                if r.starts_with('[') {
                    let at = reply.len() - r.len();
                    if best.is_none_or(|b| at > b) {
                        best = Some(at);
                    }
                }
            }
        }
    }
    best.map(|at| parse_list(&reply[at..]))
}

fn starts_number(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('-' | '+' | '.') => match chars.next() {
            Some(c) if c.is_ascii_digit() => true,
            Some('.') => chars.next().is_some_and(|c| c.is_ascii_digit()),
            _ => false,
        },
        _ => false,
    }
}

fn parse_number(token: &str) -> Result<f64, ExtractError> {
    let t = token.strip_suffix('.').filter(|t| !t.is_empty() && !t.ends_with('.')).unwrap_or(token);
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ExtractError::Unparseable(token.to_string())),
    }
}

fn is_number_char(c: char) -> bool {
    c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')
}

fn parse_list(text: &str) -> Result<Vec<f64>, ExtractError> {
    let mut s = text;
    loop {
        if s.is_empty() {
            return Err(ExtractError::NoNumbers);
        }
        if s.starts_with('[') || starts_number(s) {
            break;
        }
        let c = s.chars().next().unwrap();
        s = &s[c.len_utf8()..];
    }
    if let Some(inner) = s.strip_prefix('[') {
        let close = inner.find(']').ok_or(ExtractError::NoNumbers)?;
        let values = inner[..close]
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(parse_number)
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(ExtractError::NoNumbers);
        }
        return Ok(values);
    }
    let mut values = Vec::new();
    loop {
        let len = s.find(|c: char| !is_number_char(c)).unwrap_or(s.len());
        values.push(parse_number(&s[..len])?);
        s = &s[len..];
        s = s.trim_start_matches(|c: char| c == ',' || c == ';' || c.is_whitespace());
        if !starts_number(s) {
            return Ok(values);
        }
    }
}
