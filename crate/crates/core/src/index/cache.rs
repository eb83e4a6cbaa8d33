//! On-disk cache of `(boundaries, sa, lcp)` keyed by a content hash.
//!
//! Layout (all integers little-endian u64 unless noted):
//! `magic[8] | version: u8 | sha256[32] | n_text | n_docs | boundaries | sa | lcp`

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{encode, CorpusIndex};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 8] = b"RDIDX\0\0\0";
pub const CACHE_VERSION: u8 = 1;

pub fn content_hash(corpus: &Corpus) -> [u8; 32] {
    let mut h = Sha256::new();
    for doc in corpus {
        h.update((doc.text.len() as u64).to_le_bytes());
        h.update(&doc.text);
    }
    h.finalize().into()
}

pub fn save_cache(index: &CorpusIndex, corpus: &Corpus, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(CACHE_MAGIC).map_err(io)?;
    w.write_all(&[CACHE_VERSION]).map_err(io)?;
    w.write_all(&content_hash(corpus)).map_err(io)?;
    w.write_all(&(index.len() as u64).to_le_bytes())
        .map_err(io)?;
    w.write_all(&(index.n_docs() as u64).to_le_bytes())
        .map_err(io)?;
    for &b in index.boundaries() {
        w.write_all(&(b as u64).to_le_bytes()).map_err(io)?;
    }
    for &v in index.sa().iter().chain(index.lcp()) {
        w.write_all(&(v as u64).to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Loads a cached index for `corpus`. Returns `Ok(None)` when the cache was
/// built from different content.
pub fn load_cache(corpus: &Corpus, path: &Path) -> Result<Option<CorpusIndex>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let io = |e| Error::io(path, e);

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Format("not an index cache (bad magic)".into()));
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version).map_err(io)?;
    if version[0] != CACHE_VERSION {
        return Err(Error::Format(format!(
            "unsupported index cache version {}",
            version[0]
        )));
    }
    let mut hash = [0u8; 32];
    r.read_exact(&mut hash).map_err(io)?;
    if hash != content_hash(corpus) {
        return Ok(None);
    }

    let n_text = read_u64(&mut r).map_err(io)? as usize;
    let n_docs = read_u64(&mut r).map_err(io)? as usize;
    let (text, expected_bounds) = encode(corpus);
    if n_text != text.len() || n_docs != expected_bounds.len() {
        return Err(Error::Format(
            "index cache dimensions do not match corpus".into(),
        ));
    }
    let mut boundaries = Vec::with_capacity(n_docs);
    for _ in 0..n_docs {
        boundaries.push(read_u64(&mut r).map_err(io)? as usize);
    }
    if boundaries != expected_bounds {
        return Err(Error::Format(
            "index cache boundaries do not match corpus".into(),
        ));
    }
    let mut read_vec = |len: usize| -> Result<Vec<u32>> {
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            let x = read_u64(&mut r).map_err(io)?;
            let x =
                u32::try_from(x).map_err(|_| Error::Format("cache value out of range".into()))?;
            v.push(x);
        }
        Ok(v)
    };
    let sa = read_vec(n_text)?;
    let lcp = read_vec(n_text)?;
    Ok(Some(CorpusIndex::from_parts(text, boundaries, sa, lcp)))
}
