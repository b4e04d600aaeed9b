//! Dataset readers: restaurant-domain CSV and knowledge-base benchmark XML.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;

use crate::corpus::mr::{parse_e2e_mr, E2eMr, Triple, WebNlgEntry};
use crate::error::{Error, Result};

/// Loader output: grouped instances plus non-fatal warnings (skipped rows).
#[derive(Clone, Debug)]
pub struct Loaded<T> {
    pub instances: Vec<T>,
    pub warnings: Vec<String>,
}

/// One grouped restaurant instance: the raw MR string as it appeared in the
/// file, its parsed form, and every reference sharing that MR.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E2eRecord {
    pub raw_mr: String,
    pub mr: E2eMr,
    pub references: Vec<String>,
}

/// Read a `mr,ref` CSV (with header), grouping rows that share an identical
/// MR string into one instance with multiple references.
pub fn load_e2e_csv(path: &Path) -> Result<Loaded<E2eRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                Error::parse(
                    path.display().to_string(),
                    format!("missing column {name:?} in header {headers:?}"),
                )
            })
    };
    let mr_col = col("mr")?;
    let ref_col = col("ref")?;

    let mut groups: IndexMap<String, (E2eMr, Vec<String>)> = IndexMap::new();
    let mut warnings = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            Error::parse(path.display().to_string(), format!("bad CSV record: {e}"))
        })?;
        let line = record
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| "?".to_string());
        let raw_mr = record.get(mr_col).unwrap_or("").trim().to_string();
        let reference = record.get(ref_col).unwrap_or("").trim().to_string();
        if reference.is_empty() {
            warnings.push(format!(
                "{}:{line}: row with empty reference skipped",
                path.display()
            ));
            continue;
        }
        let mr = parse_e2e_mr(&raw_mr).map_err(|e| {
            Error::parse(format!("{}:{line}", path.display()), e.to_string())
        })?;
        groups
            .entry(raw_mr)
            .or_insert_with(|| (mr, Vec::new()))
            .1
            .push(reference);
    }

    let instances = groups
        .into_iter()
        .map(|(raw_mr, (mr, references))| E2eRecord {
            raw_mr,
            mr,
            references,
        })
        .collect();
    Ok(Loaded {
        instances,
        warnings,
    })
}

/// Read benchmark XML: `<entry>` elements containing a
/// `<modifiedtripleset>` of `<mtriple>S | property | O</mtriple>` children
/// and one `<lex>` element per reference text.
///
/// This is a purpose-built reader for that fixed shape, not a general XML
/// parser: it handles comments, XML declarations, entity escapes, and
/// self-closing tags, and nothing more. Entity normalization replaces
/// underscores with spaces and strips surrounding double quotes from
/// literals.
pub fn load_webnlg_xml(path: &Path) -> Result<Loaded<WebNlgEntry>> {
    let content = fs::read_to_string(path)?;
    parse_webnlg(&content, &path.display().to_string())
}

fn parse_webnlg(content: &str, source: &str) -> Result<Loaded<WebNlgEntry>> {
    let mut instances = Vec::new();
    let mut warnings = Vec::new();

    let mut entry_no = 0usize;
    let mut in_entry = false;
    let mut triples: Vec<Triple> = Vec::new();
    let mut references: Vec<String> = Vec::new();
    // Set while inside <mtriple> / <lex>; collects text content.
    let mut capture: Option<(&'static str, String)> = None;

    let bytes = content.as_bytes();
    let mut pos = 0usize;
    let mut line = 1usize;
    let count_lines = |s: &str, line: &mut usize| *line += s.matches('\n').count();

    while pos < bytes.len() {
        let Some(lt_rel) = content[pos..].find('<') else {
            break;
        };
        let text_run = &content[pos..pos + lt_rel];
        if let Some((_, buf)) = capture.as_mut() {
            buf.push_str(text_run);
        }
        count_lines(text_run, &mut line);
        let tag_start = pos + lt_rel;

        // Comments and declarations are skipped wholesale.
        if content[tag_start..].starts_with("<!--") {
            let end = content[tag_start..].find("-->").ok_or_else(|| {
                Error::parse(format!("{source}:{line}"), "unterminated comment")
            })?;
            count_lines(&content[tag_start..tag_start + end + 3], &mut line);
            pos = tag_start + end + 3;
            continue;
        }
        if content[tag_start..].starts_with("<?") {
            let end = content[tag_start..].find("?>").ok_or_else(|| {
                Error::parse(format!("{source}:{line}"), "unterminated declaration")
            })?;
            pos = tag_start + end + 2;
            continue;
        }

        let gt_rel = content[tag_start..].find('>').ok_or_else(|| {
            Error::parse(format!("{source}:{line}"), "unterminated tag")
        })?;
        let tag_body = &content[tag_start + 1..tag_start + gt_rel];
        count_lines(&content[tag_start..tag_start + gt_rel + 1], &mut line);
        pos = tag_start + gt_rel + 1;

        let closing = tag_body.starts_with('/');
        let self_closing = tag_body.ends_with('/');
        let name_part = tag_body
            .trim_start_matches('/')
            .trim_end_matches('/')
            .trim();
        let name = name_part
            .split_whitespace()
            .next()
            .unwrap_or("")
            .to_lowercase();

        match (closing, name.as_str()) {
            (false, "entry") => {
                entry_no += 1;
                in_entry = true;
                triples.clear();
                references.clear();
            }
            (true, "entry") => {
                if !in_entry {
                    return Err(Error::parse(
                        format!("{source}:{line}"),
                        "</entry> without matching <entry>",
                    ));
                }
                in_entry = false;
                if triples.is_empty() {
                    warnings.push(format!("entry {entry_no}: no triples, skipped"));
                } else if references.is_empty() {
                    warnings.push(format!("entry {entry_no}: no references, skipped"));
                } else {
                    instances.push(WebNlgEntry {
                        triples: triples.clone(),
                        references: references.clone(),
                    });
                }
            }
            (false, "mtriple") if in_entry && !self_closing => {
                capture = Some(("mtriple", String::new()));
            }
            (true, "mtriple") => {
                if let Some(("mtriple", buf)) = capture.take() {
                    let t = parse_mtriple(&unescape_xml(&buf), source, entry_no)?;
                    triples.push(t);
                }
            }
            (false, "lex") if in_entry && !self_closing => {
                capture = Some(("lex", String::new()));
            }
            (true, "lex") => {
                if let Some(("lex", buf)) = capture.take() {
                    let text = unescape_xml(buf.trim());
                    if !text.is_empty() {
                        references.push(text);
                    }
                }
            }
            _ => {}
        }
    }

    if in_entry {
        return Err(Error::parse(source, "unclosed <entry> at end of file"));
    }
    Ok(Loaded {
        instances,
        warnings,
    })
}

fn parse_mtriple(text: &str, source: &str, entry_no: usize) -> Result<Triple> {
    let parts: Vec<&str> = text.split('|').map(str::trim).collect();
    if parts.len() != 3 || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::parse(
            format!("{source} entry {entry_no}"),
            format!("expected 'subject | property | object', got {text:?}"),
        ));
    }
    Ok(Triple {
        subject: normalize_entity(parts[0]),
        property: parts[1].to_string(),
        object: normalize_entity(parts[2]),
    })
}

/// `Abilene_Regional_Airport` → `Abilene Regional Airport`;
/// `"Abilene, Texas"` → `Abilene, Texas`.
fn normalize_entity(s: &str) -> String {
    let s = s.trim();
    let s = if s.len() >= 2 && s.starts_with('"') && s.ends_with('"') {
        &s[1..s.len() - 1]
    } else {
        s
    };
    s.replace('_', " ").trim().to_string()
}

fn unescape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let semi = tail.find(';');
        match semi {
            Some(end) if end <= 10 => {
                let entity = &tail[1..end];
                let replacement = match entity {
                    "amp" => Some('&'),
                    "lt" => Some('<'),
                    "gt" => Some('>'),
                    "quot" => Some('"'),
                    "apos" => Some('\''),
                    _ => entity
                        .strip_prefix('#')
                        .and_then(|n| {
                            if let Some(hex) = n.strip_prefix('x').or_else(|| n.strip_prefix('X'))
                            {
                                u32::from_str_radix(hex, 16).ok()
                            } else {
                                n.parse::<u32>().ok()
                            }
                        })
                        .and_then(char::from_u32),
                };
                match replacement {
                    Some(c) => {
                        out.push(c);
                        rest = &tail[end + 1..];
                    }
                    None => {
                        out.push('&');
                        rest = &tail[1..];
                    }
                }
            }
            _ => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}
