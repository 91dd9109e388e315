//! Versioned binary index snapshot.
//!
//! Layout (little endian): 8-byte magic `QPPIDX\0\0`, `u32` version, the
//! tokenizer settings, the document table, then every term with its
//! postings. Strings are `u32` length + UTF-8 bytes. Collection
//! frequencies and lookups are recomputed on load.

use std::fs;
use std::io::{self, Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::index::{DocNo, Index, Posting, TermEntry};
use super::tokenize::TokenizerConfig;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"QPPIDX\0\0";
pub const SNAPSHOT_VERSION: u32 = 1;

fn put_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn get_str<R: Read>(r: &mut R) -> Result<String> {
    let len = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(truncated)?;
    String::from_utf8(buf).map_err(|_| Error::Snapshot("invalid UTF-8 string".into()))
}

fn truncated(_: io::Error) -> Error {
    Error::Snapshot("truncated snapshot".into())
}

pub fn encode(index: &Index) -> Vec<u8> {
    let mut w = Vec::new();
    write_into(index, &mut w).expect("writing to a Vec cannot fail");
    w
}

fn write_into(index: &Index, w: &mut Vec<u8>) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(SNAPSHOT_VERSION)?;
    let tok = &index.tokenizer;
    w.write_u8(tok.lowercase as u8)?;
    w.write_u8(tok.split_non_alnum as u8)?;
    w.write_u8(tok.stem as u8)?;
    w.write_u32::<LittleEndian>(tok.stopwords.len() as u32)?;
    for s in &tok.stopwords {
        put_str(w, s)?;
    }
    w.write_u32::<LittleEndian>(index.doc_ids.len() as u32)?;
    for (id, len) in index.doc_ids.iter().zip(&index.doc_lens) {
        put_str(w, id)?;
        w.write_u32::<LittleEndian>(*len)?;
    }
    w.write_u32::<LittleEndian>(index.terms.len() as u32)?;
    for entry in &index.terms {
        put_str(w, &entry.term)?;
        w.write_u32::<LittleEndian>(entry.postings.len() as u32)?;
        for p in &entry.postings {
            w.write_u32::<LittleEndian>(p.doc)?;
            w.write_u32::<LittleEndian>(p.tf)?;
        }
    }
    Ok(())
}

pub fn decode(bytes: &[u8]) -> Result<Index> {
    let mut r = Cursor::new(bytes);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = r.read_u32::<LittleEndian>().map_err(truncated)?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!(
            "unsupported version {version} (expected {SNAPSHOT_VERSION})"
        )));
    }
    let flag = |r: &mut Cursor<&[u8]>| -> Result<bool> {
        match r.read_u8().map_err(truncated)? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(Error::Snapshot(format!("bad flag byte {b}"))),
        }
    };
    let lowercase = flag(&mut r)?;
    let split_non_alnum = flag(&mut r)?;
    let stem = flag(&mut r)?;
    let n_stop = r.read_u32::<LittleEndian>().map_err(truncated)?;
    let mut stopwords = std::collections::BTreeSet::new();
    for _ in 0..n_stop {
        stopwords.insert(get_str(&mut r)?);
    }
    let tokenizer = TokenizerConfig {
        lowercase,
        split_non_alnum,
        stopwords,
        stem,
    };

    let n_docs = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let mut doc_ids = Vec::with_capacity(n_docs);
    let mut doc_lens = Vec::with_capacity(n_docs);
    for _ in 0..n_docs {
        let id = get_str(&mut r)?;
        if doc_ids.last().is_some_and(|prev: &String| *prev >= id) {
            return Err(Error::Snapshot("documents out of order".into()));
        }
        doc_ids.push(id);
        doc_lens.push(r.read_u32::<LittleEndian>().map_err(truncated)?);
    }
    let n_terms = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let mut terms = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let term = get_str(&mut r)?;
        let n = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let mut postings = Vec::with_capacity(n);
        let mut cf = 0u64;
        for _ in 0..n {
            let doc: DocNo = r.read_u32::<LittleEndian>().map_err(truncated)?;
            let tf = r.read_u32::<LittleEndian>().map_err(truncated)?;
            if doc as usize >= n_docs || tf == 0 {
                return Err(Error::Snapshot(format!("invalid posting for `{term}`")));
            }
            if postings.last().is_some_and(|p: &Posting| p.doc >= doc) {
                return Err(Error::Snapshot(format!("postings of `{term}` not ascending")));
            }
            cf += tf as u64;
            postings.push(Posting { doc, tf });
        }
        terms.push(TermEntry { term, cf, postings });
    }
    if (r.position() as usize) != bytes.len() {
        return Err(Error::Snapshot("trailing bytes after snapshot".into()));
    }
    Ok(Index::assemble(tokenizer, doc_ids, doc_lens, terms))
}

pub fn save(index: &Index, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, encode(index)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Index> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_index, Document};

    fn sample() -> Index {
        let cfg = TokenizerConfig {
            stopwords: ["of".to_string()].into_iter().collect(),
            ..Default::default()
        };
        build_index(
            &[
                Document {
                    doc_id: "b".into(),
                    text: "bank of the river bank".into(),
                },
                Document {
                    doc_id: "a".into(),
                    text: "bank loan".into(),
                },
            ],
            &cfg,
        )
        .unwrap()
    }

    #[test]
    fn round_trip() {
        let idx = sample();
        assert_eq!(decode(&encode(&idx)).unwrap(), idx);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode(&sample());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(matches!(decode(&bad), Err(Error::Snapshot(m)) if m.contains("version")));
        let mut extra = bytes;
        extra.push(0);
        assert!(decode(&extra).is_err());
    }
}
