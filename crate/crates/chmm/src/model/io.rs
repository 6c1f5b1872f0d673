//! Portable model file format.
//!
//! Layout: magic bytes `CHMM`, little-endian `u32` version, `u32`
//! length-prefixed UTF-8 JSON header, then a raw little-endian `f64`
//! payload: the prior followed by the present blocks in row-major grid
//! order (each block itself row-major). Round trips are bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ChmmError, Result};
use crate::model::{Alphabet, BlockTransitionModel, CloneLayout};

const MAGIC: &[u8; 4] = b"CHMM";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    alphabet: Vec<String>,
    clones_per_symbol: Vec<usize>,
    /// Row-major grid bitmap, one flag per symbol pair.
    present_blocks: Vec<bool>,
}

pub fn save_model(model: &BlockTransitionModel, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header = Header {
        alphabet: model.alphabet().symbols().to_vec(),
        clones_per_symbol: model.layout().clones_per_symbol().to_vec(),
        present_blocks: model.presence(),
    };
    let json = serde_json::to_vec(&header)
        .map_err(|e| ChmmError::InvalidModel(format!("header serialization: {e}")))?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    write_f64s(&mut w, model.prior())?;
    let e = model.num_symbols();
    for i in 0..e {
        for j in 0..e {
            if let Some(b) = model.block(i, j) {
                write_f64s(&mut w, b)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<BlockTransitionModel> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact_or(&mut r, &mut magic, "magic bytes")?;
    if &magic != MAGIC {
        return Err(ChmmError::CorruptHeader("bad magic bytes".into()));
    }
    let mut word = [0u8; 4];
    read_exact_or(&mut r, &mut word, "version")?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(ChmmError::CorruptHeader(format!(
            "unsupported version {version}"
        )));
    }
    read_exact_or(&mut r, &mut word, "header length")?;
    let len = u32::from_le_bytes(word) as usize;
    let mut json = vec![0u8; len];
    read_exact_or(&mut r, &mut json, "header body")?;
    let header: Header = serde_json::from_slice(&json)
        .map_err(|e| ChmmError::CorruptHeader(format!("header JSON: {e}")))?;

    let e = header.clones_per_symbol.len();
    if header.alphabet.len() != e {
        return Err(ChmmError::ShapeMismatch(format!(
            "{} alphabet symbols vs {e} clone counts",
            header.alphabet.len()
        )));
    }
    if header.present_blocks.len() != e * e {
        return Err(ChmmError::ShapeMismatch(format!(
            "presence bitmap has {} cells, expected {}",
            header.present_blocks.len(),
            e * e
        )));
    }
    let alphabet = Alphabet::new(header.alphabet)?;
    let layout = CloneLayout::new(header.clones_per_symbol)?;

    let prior = read_f64s(&mut r, layout.total_states(), "prior")?;
    let mut blocks: Vec<Option<Vec<f64>>> = vec![None; e * e];
    for i in 0..e {
        for j in 0..e {
            if header.present_blocks[i * e + j] {
                let n = layout.clones_of(i) * layout.clones_of(j);
                blocks[i * e + j] = Some(read_f64s(&mut r, n, "block payload")?);
            }
        }
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(ChmmError::ShapeMismatch(
            "trailing bytes after payload".into(),
        ));
    }
    BlockTransitionModel::from_parts(alphabet, layout, blocks, prior)
}

fn write_f64s<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    for &v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, n: usize, what: &str) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    read_exact_or(r, &mut buf, what)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|_| {
        ChmmError::ShapeMismatch(format!("file truncated while reading {what}"))
    })
}
