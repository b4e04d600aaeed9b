//! Plain-text file formats used between pipeline stages.
//!
//! - Instance file: one instance per line, `input TAB reference TAB map`,
//!   where `map` is `placeholder=value` entries joined by U+001F (unit
//!   separator); the third field may be empty.
//! - Reference-group file: blank-line-separated blocks; block `i` holds the
//!   reference texts for instance `i`, one per line.
//! - N-best file: blank-line-separated blocks; each line is
//!   `log_prob TAB text`, best first.
//!
//! All files are UTF-8 with `\n` line endings and end with a final newline.

use std::fs;
use std::path::Path;

use crate::corpus::delex::DelexMap;
use crate::corpus::Instance;
use crate::error::{Error, Result};

const UNIT_SEP: char = '\u{1f}';

fn check_field(kind: &str, s: &str) -> Result<()> {
    if s.contains('\t') || s.contains('\n') || s.contains(UNIT_SEP) {
        return Err(Error::contract(format!(
            "{kind} contains a tab, newline, or U+001F and cannot be serialized: {s:?}"
        )));
    }
    Ok(())
}

pub fn format_instance(inst: &Instance) -> Result<String> {
    check_field("input", &inst.input)?;
    check_field("reference", &inst.reference)?;
    let mut map_parts = Vec::with_capacity(inst.delex.len());
    for (placeholder, value) in inst.delex.pairs() {
        check_field("placeholder", placeholder)?;
        check_field("delex value", value)?;
        if placeholder.contains('=') {
            return Err(Error::contract(format!(
                "placeholder {placeholder:?} contains '='"
            )));
        }
        map_parts.push(format!("{placeholder}={value}"));
    }
    let map_field: String = map_parts.join(&UNIT_SEP.to_string());
    Ok(format!("{}\t{}\t{}", inst.input, inst.reference, map_field))
}

pub fn parse_instance(line: &str, location: &str) -> Result<Instance> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(Error::parse(
            location,
            format!("expected 3 tab-separated fields, found {}", fields.len()),
        ));
    }
    let mut delex = DelexMap::new();
    if !fields[2].is_empty() {
        for part in fields[2].split(UNIT_SEP) {
            let Some((placeholder, value)) = part.split_once('=') else {
                return Err(Error::parse(
                    location,
                    format!("delex entry without '=': {part:?}"),
                ));
            };
            delex.insert(placeholder, value)?;
        }
    }
    Ok(Instance {
        input: fields[0].to_string(),
        reference: fields[1].to_string(),
        delex,
    })
}

pub fn write_instances(path: &Path, instances: &[Instance]) -> Result<()> {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&format_instance(inst)?);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_instances(path: &Path) -> Result<Vec<Instance>> {
    let content = fs::read_to_string(path)?;
    let mut instances = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        instances.push(parse_instance(line, &format!("{}:{}", path.display(), i + 1))?);
    }
    Ok(instances)
}

pub fn write_reference_groups(path: &Path, groups: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    for (i, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::contract(format!("reference group {i} is empty")));
        }
        if i > 0 {
            out.push('\n');
        }
        for r in group {
            check_field("reference", r)?;
            if r.is_empty() {
                return Err(Error::contract(format!(
                    "reference group {i} contains an empty line"
                )));
            }
            out.push_str(r);
            out.push('\n');
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_reference_groups(path: &Path) -> Result<Vec<Vec<String>>> {
    let content = fs::read_to_string(path)?;
    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for line in content.lines() {
        if line.is_empty() {
            if !current.is_empty() {
                groups.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line.to_string());
        }
    }
    if !current.is_empty() {
        groups.push(current);
    }
    Ok(groups)
}

/// One plain line per instance (top-1 outputs and similar).
pub fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut out = String::new();
    for l in lines {
        check_field("line", l)?;
        out.push_str(l);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let content = fs::read_to_string(path)?;
    Ok(content.lines().map(str::to_string).collect())
}

pub fn write_nbest(path: &Path, lists: &[Vec<(f64, String)>]) -> Result<()> {
    let mut out = String::new();
    for (i, list) in lists.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (log_prob, text) in list {
            check_field("hypothesis", text)?;
            out.push_str(&format!("{log_prob:.6}\t{text}\n"));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_nbest(path: &Path) -> Result<Vec<Vec<(f64, String)>>> {
    let content = fs::read_to_string(path)?;
    let mut lists: Vec<Vec<(f64, String)>> = Vec::new();
    let mut current: Vec<(f64, String)> = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let location = || format!("{}:{}", path.display(), i + 1);
        if line.is_empty() {
            if !current.is_empty() {
                lists.push(std::mem::take(&mut current));
            }
            continue;
        }
        let Some((score, text)) = line.split_once('\t') else {
            return Err(Error::parse(
                location(),
                "expected 'log_prob TAB text'".to_string(),
            ));
        };
        let log_prob: f64 = score
            .parse()
            .map_err(|e| Error::parse(location(), format!("bad log probability: {e}")))?;
        current.push((log_prob, text.to_string()));
    }
    if !current.is_empty() {
        lists.push(current);
    }
    Ok(lists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn instance(input: &str, reference: &str, pairs: &[(&str, &str)]) -> Instance {
        let mut delex = DelexMap::new();
        for (p, v) in pairs {
            delex.insert(p, v).unwrap();
        }
        Instance {
            input: input.to_string(),
            reference: reference.to_string(),
            delex,
        }
    }

    #[test]
    fn instance_file_round_trips() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("train.tsv");
        let instances = vec![
            instance(
                "name[NAME], near[NEAR]",
                "NAME is near NEAR.",
                &[("NAME", "Aromi"), ("NEAR", "The Mill")],
            ),
            instance("food[chinese]", "chinese food.", &[]),
        ];
        write_instances(&path, &instances).unwrap();
        assert_eq!(read_instances(&path).unwrap(), instances);
    }

    #[test]
    fn instance_parse_errors_carry_location() {
        let e = parse_instance("only one field", "test:7").unwrap_err().to_string();
        assert!(e.contains("test:7"), "{e}");
    }

    #[test]
    fn tab_in_field_is_rejected() {
        let bad = instance("a\tb", "c", &[]);
        assert!(format_instance(&bad).is_err());
    }

    #[test]
    fn reference_groups_round_trip() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("refs.txt");
        let groups = vec![
            vec!["first ref.".to_string(), "second ref.".to_string()],
            vec!["only ref.".to_string()],
        ];
        write_reference_groups(&path, &groups).unwrap();
        assert_eq!(read_reference_groups(&path).unwrap(), groups);
    }

    #[test]
    fn nbest_round_trips_and_orders() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("nbest.txt");
        let lists = vec![
            vec![(-0.5, "best one.".to_string()), (-1.25, "second.".to_string())],
            vec![(-2.0, "other instance.".to_string())],
        ];
        write_nbest(&path, &lists).unwrap();
        let back = read_nbest(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0][0].1, "best one.");
        assert!((back[0][1].0 - (-1.25)).abs() < 1e-9);
        assert_eq!(back[1][0].1, "other instance.");
    }
}
