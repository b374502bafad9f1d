//! Plain-text channel files.
//!
//! ```text
//! N=3
//! 0.04 0.01
//! 0.02 0.03
//! 0.05 0.008
//! h_sd_sq=0.0044
//! ```
//!
//! Line one gives the antenna count, then one `h_sq g_sq` pair per antenna,
//! then the direct-link gain. Blank lines and `#` comments are ignored.

use std::path::Path;

use harvest_relay_core::ChannelRealization;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("{source_name}:{line}: {field}: {message}")]
pub struct ParseError {
    pub source_name: String,
    pub line: usize,
    pub field: String,
    pub message: String,
}

pub fn read(path: &Path) -> anyhow::Result<ChannelRealization> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read channel file {}: {e}", path.display()))?;
    Ok(parse(&text, &path.display().to_string())?)
}

pub fn parse(text: &str, source_name: &str) -> Result<ChannelRealization, ParseError> {
    let err = |line: usize, field: &str, message: String| ParseError {
        source_name: source_name.to_owned(),
        line,
        field: field.to_owned(),
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let last_line = text.lines().count().max(1);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| err(last_line, "N", "missing header `N=<antennas>`".into()))?;
    let n: usize = key_value(header, "N")
        .ok_or_else(|| err(ln, "N", format!("expected `N=<antennas>`, found `{header}`")))?
        .parse()
        .map_err(|e| err(ln, "N", format!("not a positive integer: {e}")))?;
    if n == 0 {
        return Err(err(ln, "N", "must be at least 1".into()));
    }

    let gain = |ln: usize, field: &str, tok: &str| -> Result<f64, ParseError> {
        let v: f64 = tok
            .parse()
            .map_err(|_| err(ln, field, format!("`{tok}` is not a number")))?;
        if !v.is_finite() {
            return Err(err(ln, field, format!("{v} is not finite")));
        }
        if v < 0.0 {
            return Err(err(ln, field, format!("negative gain {v}")));
        }
        Ok(v)
    };

    let mut h_sq = Vec::with_capacity(n);
    let mut g_sq = Vec::with_capacity(n);
    for i in 1..=n {
        let (ln, line) = lines.next().ok_or_else(|| {
            err(last_line, "antenna", format!("expected {n} antenna lines, found {}", i - 1))
        })?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(err(
                ln,
                "antenna",
                format!("expected `h_sq g_sq`, found {} fields", toks.len()),
            ));
        }
        h_sq.push(gain(ln, &format!("h_sq[{i}]"), toks[0])?);
        g_sq.push(gain(ln, &format!("g_sq[{i}]"), toks[1])?);
    }

    let (ln, line) = lines
        .next()
        .ok_or_else(|| err(last_line, "h_sd_sq", "missing trailer `h_sd_sq=<gain>`".into()))?;
    let tok = key_value(line, "h_sd_sq")
        .ok_or_else(|| err(ln, "h_sd_sq", format!("expected `h_sd_sq=<gain>`, found `{line}`")))?;
    let h_sd_sq = gain(ln, "h_sd_sq", tok)?;
    if let Some((ln, extra)) = lines.next() {
        return Err(err(ln, "trailing", format!("unexpected content `{extra}`")));
    }

    ChannelRealization::new(h_sq, g_sq, h_sd_sq).map_err(|e| err(ln, "channel", e.to_string()))
}

fn key_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let (k, v) = line.split_once('=')?;
    (k.trim() == key).then(|| v.trim())
}
