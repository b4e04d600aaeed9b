//! Binary model checkpoints with exact round-tripping.
//!
//! The file is little-endian and self-describing: magic, format version,
//! architecture, init scheme, seed, both vocabularies (with their token
//! modes), then every named weight array with its shape. Loading validates
//! the magic, version, and schema and returns either a complete model or an
//! error naming the field that failed — never partial state.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::corpus::tokenize::TokenMode;
use crate::corpus::vocab::Vocabulary;
use crate::error::{Error, Result};
use crate::params::ParameterStore;
use crate::seq2seq::config::ModelConfig;
use crate::seq2seq::model::Model;
use crate::tensor::Tensor;

const MAGIC: &[u8; 8] = b"D2TCKPT\0";
const VERSION: u32 = 1;
/// Corruption guard: no declared count may exceed this.
const MAX_COUNT: u64 = 1 << 28;

pub fn save_checkpoint(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    write_mode(&mut w, model.config.mode)?;
    w.write_u64::<LE>(model.config.embedding_dim as u64)?;
    w.write_u64::<LE>(model.config.hidden_dim as u64)?;
    w.write_u64::<LE>(model.config.num_layers as u64)?;
    w.write_u8(model.config.bidirectional_encoder as u8)?;
    w.write_f64::<LE>(model.config.dropout_p)?;
    w.write_u64::<LE>(model.seed)?;
    write_string(&mut w, &model.init_scheme)?;
    write_vocab(&mut w, &model.input_vocab)?;
    write_vocab(&mut w, &model.output_vocab)?;

    w.write_u64::<LE>(model.params.len() as u64)?;
    for (name, t) in model.params.iter() {
        write_string(&mut w, name)?;
        w.write_u64::<LE>(t.shape().len() as u64)?;
        for &d in t.shape() {
            w.write_u64::<LE>(d as u64)?;
        }
        for &v in t.data() {
            w.write_f64::<LE>(v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Model> {
    let mut r = Reader {
        inner: BufReader::new(File::open(path)?),
    };
    let mut magic = [0u8; 8];
    r.exact(&mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(Error::checkpoint(format!(
            "magic: expected {MAGIC:?}, found {magic:?}"
        )));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::checkpoint(format!(
            "version: {version} unsupported (this build reads {VERSION})"
        )));
    }
    let config = ModelConfig {
        mode: r.mode("config.mode")?,
        embedding_dim: r.count("config.embedding_dim")?,
        hidden_dim: r.count("config.hidden_dim")?,
        num_layers: r.count("config.num_layers")?,
        bidirectional_encoder: r.flag("config.bidirectional_encoder")?,
        dropout_p: r.f64("config.dropout_p")?,
    };
    let seed = r.u64("seed")?;
    let init_scheme = r.string("init_scheme")?;
    let input_vocab = r.vocab("input_vocab")?;
    let output_vocab = r.vocab("output_vocab")?;

    let n_params = r.count("params.count")?;
    let mut params = ParameterStore::new();
    for i in 0..n_params {
        let ctx = format!("params[{i}]");
        let name = r.string(&format!("{ctx}.name"))?;
        let rank = r.count(&format!("{ctx}.rank"))?;
        let mut shape = Vec::with_capacity(rank);
        for d in 0..rank {
            shape.push(r.count(&format!("{ctx}.shape[{d}]"))?);
        }
        let numel: usize = shape.iter().product();
        if numel as u64 > MAX_COUNT {
            return Err(Error::checkpoint(format!(
                "{ctx}.shape: {shape:?} declares an implausible element count"
            )));
        }
        let mut data = Vec::with_capacity(numel);
        for e in 0..numel {
            data.push(r.f64(&format!("{ctx}.data[{e}]"))?);
        }
        params.insert(&name, Tensor::new(shape, data)?)?;
    }
    let mut probe = [0u8; 1];
    if r.inner.read(&mut probe)? != 0 {
        return Err(Error::checkpoint("trailing bytes after parameter data"));
    }
    Model::from_parts(config, params, input_vocab, output_vocab, init_scheme, seed)
}

fn write_mode(w: &mut impl Write, mode: TokenMode) -> Result<()> {
    w.write_u8(match mode {
        TokenMode::Word => 0,
        TokenMode::Char => 1,
    })?;
    Ok(())
}

fn write_string(w: &mut impl Write, s: &str) -> Result<()> {
    w.write_u64::<LE>(s.len() as u64)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn write_vocab(w: &mut impl Write, v: &Vocabulary) -> Result<()> {
    write_mode(w, v.mode())?;
    w.write_u64::<LE>(v.len() as u64)?;
    for s in v.symbols() {
        write_string(w, s)?;
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn exact(&mut self, buf: &mut [u8], field: &str) -> Result<()> {
        self.inner
            .read_exact(buf)
            .map_err(|e| Error::checkpoint(format!("{field}: {e}")))
    }

    fn u8(&mut self, field: &str) -> Result<u8> {
        self.inner
            .read_u8()
            .map_err(|e| Error::checkpoint(format!("{field}: {e}")))
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        self.inner
            .read_u32::<LE>()
            .map_err(|e| Error::checkpoint(format!("{field}: {e}")))
    }

    fn u64(&mut self, field: &str) -> Result<u64> {
        self.inner
            .read_u64::<LE>()
            .map_err(|e| Error::checkpoint(format!("{field}: {e}")))
    }

    fn f64(&mut self, field: &str) -> Result<f64> {
        self.inner
            .read_f64::<LE>()
            .map_err(|e| Error::checkpoint(format!("{field}: {e}")))
    }

    /// A u64 that will be used as a length/size: bounded, then as usize.
    fn count(&mut self, field: &str) -> Result<usize> {
        let v = self.u64(field)?;
        if v > MAX_COUNT {
            return Err(Error::checkpoint(format!(
                "{field}: {v} exceeds the plausibility bound"
            )));
        }
        Ok(v as usize)
    }

    fn flag(&mut self, field: &str) -> Result<bool> {
        match self.u8(field)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::checkpoint(format!(
                "{field}: flag byte {other} is neither 0 nor 1"
            ))),
        }
    }

    fn mode(&mut self, field: &str) -> Result<TokenMode> {
        match self.u8(field)? {
            0 => Ok(TokenMode::Word),
            1 => Ok(TokenMode::Char),
            other => Err(Error::checkpoint(format!(
                "{field}: unknown token mode byte {other}"
            ))),
        }
    }

    fn string(&mut self, field: &str) -> Result<String> {
        let len = self.count(field)?;
        let mut buf = vec![0u8; len];
        self.exact(&mut buf, field)?;
        String::from_utf8(buf).map_err(|e| Error::checkpoint(format!("{field}: {e}")))
    }

    fn vocab(&mut self, field: &str) -> Result<Vocabulary> {
        let mode = self.mode(&format!("{field}.mode"))?;
        let n = self.count(&format!("{field}.count"))?;
        let mut symbols = Vec::with_capacity(n);
        for i in 0..n {
            symbols.push(self.string(&format!("{field}.symbols[{i}]"))?);
        }
        Vocabulary::from_symbols(mode, &symbols)
            .map_err(|e| Error::checkpoint(format!("{field}: {e}")))
    }
}
