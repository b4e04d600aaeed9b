//! The six pipeline subcommands.

pub mod evaluate;
pub mod generate;
pub mod preprocess;
pub mod rerank;
pub mod synthesize;
pub mod train;

use std::path::Path;

use d2t_core::corpus::format::{read_instances, read_lines, read_nbest};
use d2t_core::corpus::Instance;

use crate::error::CliResult;

/// Print the run header: the subcommand and every resolved parameter, so a
/// log line always identifies the exact invocation.
pub fn print_run(command: &str, params: &[(&str, String)]) {
    println!("run: {command}");
    for (key, value) in params {
        println!("  {key} = {value}");
    }
}

/// True when the file's first non-empty line has tab-separated fields —
/// i.e. it is an instance or n-best file rather than plain lines.
fn first_line_has_tab(path: &Path) -> CliResult<bool> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| crate::error::CliError::Core(d2t_core::error::Error::from(e)))?;
    Ok(text.lines().find(|l| !l.is_empty()).is_some_and(|l| l.contains('\t')))
}

/// Read generation inputs: either a preprocessed instance file (tab-separated,
/// with delexicalization records) or a plain file with one serialized input
/// per line.
pub fn read_inputs_any(path: &Path) -> CliResult<(Vec<Instance>, bool)> {
    if first_line_has_tab(path)? {
        Ok((read_instances(path)?, true))
    } else {
        let instances = read_lines(path)?
            .into_iter()
            .filter(|l| !l.is_empty())
            .map(|input| Instance {
                input,
                reference: String::new(),
                delex: Default::default(),
            })
            .collect();
        Ok((instances, false))
    }
}

/// Read hypotheses: an n-best file (`log_prob TAB text` blocks) or a plain
/// file with one top-1 text per line, normalized to one block per instance.
pub fn read_hypothesis_blocks(path: &Path) -> CliResult<Vec<Vec<(f64, String)>>> {
    if first_line_has_tab(path)? {
        Ok(read_nbest(path)?)
    } else {
        Ok(read_lines(path)?
            .into_iter()
            .filter(|l| !l.is_empty())
            .map(|text| vec![(0.0, text)])
            .collect())
    }
}

/// Read a set of reference texts for novelty comparison: a preprocessed
/// instance file (the reference field of every instance) or plain lines.
pub fn read_text_pool(path: &Path) -> CliResult<Vec<String>> {
    if first_line_has_tab(path)? {
        Ok(read_instances(path)?
            .into_iter()
            .map(|i| i.reference)
            .collect())
    } else {
        Ok(read_lines(path)?
            .into_iter()
            .filter(|l| !l.is_empty())
            .collect())
    }
}
