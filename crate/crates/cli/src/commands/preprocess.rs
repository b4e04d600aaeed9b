//! `d2t preprocess`: raw dataset file → delexicalized instance corpus,
//! aligned reference groups, vocabulary listings, and corpus statistics.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use d2t_core::corpus::format::{write_instances, write_lines, write_reference_groups};
use d2t_core::corpus::{
    build_vocabularies, delex_e2e, delex_webnlg, load_e2e_csv, load_webnlg_xml, CorpusStats,
    Instance, TokenMode, Vocabulary,
};
use d2t_core::error::Error;

use crate::commands::print_run;
use crate::error::CliResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DatasetKind {
    /// Restaurant-domain CSV with `mr,ref` columns.
    E2e,
    /// Knowledge-base benchmark XML with triple sets and `<lex>` references.
    Webnlg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Word,
    Char,
}

impl ModeArg {
    pub fn token_mode(self) -> TokenMode {
        match self {
            ModeArg::Word => TokenMode::Word,
            ModeArg::Char => TokenMode::Char,
        }
    }
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    /// Raw dataset file to preprocess.
    #[arg(long)]
    pub input: PathBuf,
    /// Which loader to use.
    #[arg(long, value_enum)]
    pub dataset: DatasetKind,
    /// Tokenization mode for vocabularies and statistics.
    #[arg(long, value_enum, default_value = "word")]
    pub mode: ModeArg,
    /// Directory receiving the preprocessed artifacts.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// One preprocessed dataset: training-style instances (one per reference)
/// plus per-input reference groups aligned with the unique inputs.
struct Preprocessed {
    instances: Vec<Instance>,
    unique_inputs: Vec<String>,
    reference_groups: Vec<Vec<String>>,
    warnings: Vec<String>,
}

fn preprocess_e2e(path: &Path) -> CliResult<Preprocessed> {
    let loaded = load_e2e_csv(path)?;
    let mut instances = Vec::new();
    let mut unique_inputs = Vec::new();
    let mut reference_groups = Vec::new();
    for record in &loaded.instances {
        let raw_lc = record.raw_mr.to_lowercase();
        let mut group = Vec::new();
        let mut input_for_group = None;
        for reference in &record.references {
            let out = delex_e2e(&record.mr, &raw_lc, &reference.to_lowercase());
            group.push(out.text.clone());
            input_for_group.get_or_insert(out.input.clone());
            instances.push(Instance {
                input: out.input,
                reference: out.text,
                delex: out.record,
            });
        }
        unique_inputs.push(input_for_group.expect("loader guarantees references"));
        reference_groups.push(group);
    }
    Ok(Preprocessed {
        instances,
        unique_inputs,
        reference_groups,
        warnings: loaded.warnings,
    })
}

fn preprocess_webnlg(path: &Path) -> CliResult<Preprocessed> {
    let loaded = load_webnlg_xml(path)?;
    let mut instances = Vec::new();
    let mut unique_inputs = Vec::new();
    let mut reference_groups = Vec::new();
    for entry in &loaded.instances {
        let mut group = Vec::new();
        let mut input_for_group = None;
        for reference in &entry.references {
            let out = delex_webnlg(&entry.triples, &reference.to_lowercase())?;
            group.push(out.text.clone());
            input_for_group.get_or_insert(out.input.clone());
            instances.push(Instance {
                input: out.input,
                reference: out.text,
                delex: out.record,
            });
        }
        unique_inputs.push(input_for_group.expect("loader guarantees references"));
        reference_groups.push(group);
    }
    Ok(Preprocessed {
        instances,
        unique_inputs,
        reference_groups,
        warnings: loaded.warnings,
    })
}

fn vocab_lines(vocab: &Vocabulary) -> Vec<String> {
    vocab.symbols().map(str::to_string).collect()
}

/// The statistics block, one `label value` line each.
pub fn stats_block(stem: &str, mode: TokenMode, stats: &CorpusStats) -> String {
    format!(
        "corpus statistics ({stem}, {} mode)\n  instances        {}\n  avg input length {:.2}\n  avg text length  {:.2}\n  input vocab      {}\n  output vocab     {}",
        mode.as_str(),
        stats.instances,
        stats.avg_input_len,
        stats.avg_text_len,
        stats.input_vocab,
        stats.output_vocab,
    )
}

pub fn run(args: &PreprocessArgs) -> CliResult<()> {
    let mode = args.mode.token_mode();
    print_run(
        "preprocess",
        &[
            ("input", args.input.display().to_string()),
            (
                "dataset",
                match args.dataset {
                    DatasetKind::E2e => "e2e".to_string(),
                    DatasetKind::Webnlg => "webnlg".to_string(),
                },
            ),
            ("mode", mode.as_str().to_string()),
            ("out_dir", args.out_dir.display().to_string()),
        ],
    );

    let pre = match args.dataset {
        DatasetKind::E2e => preprocess_e2e(&args.input)?,
        DatasetKind::Webnlg => preprocess_webnlg(&args.input)?,
    };
    for w in &pre.warnings {
        eprintln!("warning: {w}");
    }

    // Everything is computed and validated before any file is written.
    let (input_vocab, output_vocab, stats) = build_vocabularies(&pre.instances, mode)?;

    let stem = args
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("corpus")
        .to_string();
    std::fs::create_dir_all(&args.out_dir).map_err(Error::from)?;
    let out = |suffix: &str| args.out_dir.join(format!("{stem}.{suffix}"));
    write_instances(&out("instances.txt"), &pre.instances)?;
    write_lines(&out("inputs.txt"), &pre.unique_inputs)?;
    write_reference_groups(&out("refs.txt"), &pre.reference_groups)?;
    write_lines(&out("input-vocab.txt"), &vocab_lines(&input_vocab))?;
    write_lines(&out("output-vocab.txt"), &vocab_lines(&output_vocab))?;

    println!("{}", stats_block(&stem, mode, &stats));
    println!(
        "wrote {} instances ({} unique inputs) to {}",
        pre.instances.len(),
        pre.unique_inputs.len(),
        args.out_dir.display()
    );
    Ok(())
}
