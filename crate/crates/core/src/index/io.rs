//! The `SKCH` index container.
//!
//! Layout, all integers little-endian:
//! magic `SKCH`, `u32` format version, `u32` manifest length, manifest JSON,
//! `u32` chain count, chains, `u32` node count, nodes in preorder.
//! A chain is `image_id`, `chain_id` (each `u32` length plus UTF-8), a source
//! byte, `f64` total length, `u32` joint count, then per joint the ratio,
//! angle, skip weight, x and y as `f64`. A node is a tag byte (0 internal,
//! 1 leaf) and a `u32` count followed by `(medoid, child)` pairs or chain
//! indices as `u32`.

use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use super::{ChainStore, ChainTree, IndexNode};
use crate::error::{Error, Result};
use crate::model::{ChainDescriptor, ChainSource, FlipVariant, Point2, FRAME_SIZE};
use crate::params::Params;

pub const MAGIC: &[u8; 4] = b"SKCH";
pub const FORMAT_VERSION: u32 = 1;

const MAX_STRING: usize = 1 << 16;
const MAX_MANIFEST: usize = 1 << 20;

/// Header describing how an index was built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexManifest {
    pub version: u32,
    /// Longest image side of the coordinate frame.
    pub frame_size: f64,
    pub records: usize,
    pub seed: u64,
    pub params: Params,
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.write_u32::<LE>(s.len() as u32).unwrap();
    out.extend_from_slice(s.as_bytes());
}

/// Serializes the tree. Identical trees give identical bytes.
pub fn write_index(tree: &ChainTree) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.write_u32::<LE>(FORMAT_VERSION).unwrap();
    let manifest = IndexManifest {
        version: FORMAT_VERSION,
        frame_size: FRAME_SIZE,
        records: tree.store.len(),
        seed: tree.seed,
        params: tree.params.clone(),
    };
    let json = serde_json::to_vec(&manifest).expect("manifest serializes");
    out.write_u32::<LE>(json.len() as u32).unwrap();
    out.extend_from_slice(&json);

    out.write_u32::<LE>(tree.store.len() as u32).unwrap();
    for c in tree.store.chains() {
        put_str(&mut out, &c.image_id);
        put_str(&mut out, &c.chain_id);
        out.write_u8(c.source.to_u8()).unwrap();
        let d = c.descriptor.base();
        out.write_f64::<LE>(d.total_length).unwrap();
        out.write_u32::<LE>(d.len() as u32).unwrap();
        for i in 0..d.len() {
            for v in [d.gammas[i], d.thetas[i], d.skip_weights[i], d.points[i].x, d.points[i].y] {
                out.write_f64::<LE>(v).unwrap();
            }
        }
    }

    out.write_u32::<LE>(tree.nodes.len() as u32).unwrap();
    for node in &tree.nodes {
        match node {
            IndexNode::Internal { children } => {
                out.write_u8(0).unwrap();
                out.write_u32::<LE>(children.len() as u32).unwrap();
                for &(m, c) in children {
                    out.write_u32::<LE>(m).unwrap();
                    out.write_u32::<LE>(c).unwrap();
                }
            }
            IndexNode::Leaf { chains } => {
                out.write_u8(1).unwrap();
                out.write_u32::<LE>(chains.len() as u32).unwrap();
                for &c in chains {
                    out.write_u32::<LE>(c).unwrap();
                }
            }
        }
    }
    out
}

pub fn save_index(tree: &ChainTree, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&write_index(tree))?;
    f.sync_all()?;
    Ok(())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<ChainTree> {
    read_index(&std::fs::read(path)?)
}

struct Reader<'a> {
    cur: Cursor<&'a [u8]>,
}

fn truncated(_: std::io::Error) -> Error {
    Error::Corrupt("unexpected end of file".into())
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.cur.get_ref().len() - self.cur.position() as usize
    }

    fn u8(&mut self) -> Result<u8> {
        self.cur.read_u8().map_err(truncated)
    }

    fn u32(&mut self) -> Result<u32> {
        self.cur.read_u32::<LE>().map_err(truncated)
    }

    fn f64(&mut self) -> Result<f64> {
        self.cur.read_f64::<LE>().map_err(truncated)
    }

    fn bytes(&mut self, len: usize) -> Result<&'a [u8]> {
        if len > self.remaining() {
            return Err(Error::Corrupt("unexpected end of file".into()));
        }
        let start = self.cur.position() as usize;
        self.cur.set_position((start + len) as u64);
        Ok(&self.cur.get_ref()[start..start + len])
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        if len > MAX_STRING {
            return Err(Error::Corrupt(format!("identifier of {len} bytes")));
        }
        let raw = self.bytes(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Corrupt("identifier is not UTF-8".into()))
    }

    /// A count whose items take at least `min_item` bytes each.
    fn count(&mut self, min_item: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_item) > self.remaining() {
            return Err(Error::Corrupt(format!("count {n} exceeds the file size")));
        }
        Ok(n)
    }
}

/// Parses an index container, checking every count, index and descriptor.
pub fn read_index(bytes: &[u8]) -> Result<ChainTree> {
    let mut r = Reader { cur: Cursor::new(bytes) };
    let mut magic = [0u8; 4];
    r.cur.read_exact(&mut magic).map_err(|_| Error::BadMagic)?;
    if &magic != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let manifest_len = r.u32()? as usize;
    if manifest_len > MAX_MANIFEST {
        return Err(Error::Corrupt(format!("manifest of {manifest_len} bytes")));
    }
    let manifest: IndexManifest = serde_json::from_slice(r.bytes(manifest_len)?)
        .map_err(|e| Error::Corrupt(format!("manifest: {e}")))?;
    if manifest.version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: manifest.version,
            expected: FORMAT_VERSION,
        });
    }
    if manifest.frame_size != FRAME_SIZE {
        return Err(Error::Corrupt(format!("frame size {}", manifest.frame_size)));
    }
    manifest
        .params
        .validate()
        .map_err(|e| Error::Corrupt(format!("manifest: {e}")))?;

    let n_chains = r.count(4 + 4 + 1 + 8 + 4)?;
    if n_chains != manifest.records {
        return Err(Error::Corrupt(format!(
            "manifest lists {} records, file holds {n_chains}",
            manifest.records
        )));
    }
    let mut store = ChainStore::new();
    for i in 0..n_chains {
        let image_id = r.string()?;
        let chain_id = r.string()?;
        let source = ChainSource::from_u8(r.u8()?)
            .ok_or_else(|| Error::Corrupt(format!("chain {i}: unknown source")))?;
        let total_length = r.f64()?;
        let n = r.count(5 * 8)?;
        let mut d = ChainDescriptor {
            gammas: Vec::with_capacity(n),
            thetas: Vec::with_capacity(n),
            skip_weights: Vec::with_capacity(n),
            points: Vec::with_capacity(n),
            total_length,
            flip_variant: FlipVariant::Identity,
        };
        for _ in 0..n {
            d.gammas.push(r.f64()?);
            d.thetas.push(r.f64()?);
            d.skip_weights.push(r.f64()?);
            let x = r.f64()?;
            d.points.push(Point2::new(x, r.f64()?));
        }
        store
            .push(image_id, chain_id, source, d)
            .map_err(|e| Error::Corrupt(format!("chain {i}: {e}")))?;
    }

    let n_nodes = r.count(1 + 4)?;
    if n_chains > 0 && n_nodes == 0 {
        return Err(Error::Corrupt("chains without a tree".into()));
    }
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut referenced = vec![false; n_nodes];
    let in_store = |c: u32, what: &str| -> Result<()> {
        if (c as usize) < n_chains {
            Ok(())
        } else {
            Err(Error::Corrupt(format!("{what} {c} out of range")))
        }
    };
    for idx in 0..n_nodes {
        match r.u8()? {
            0 => {
                let n = r.count(8)?;
                if n == 0 {
                    return Err(Error::Corrupt(format!("node {idx} has no children")));
                }
                let mut children = Vec::with_capacity(n);
                for _ in 0..n {
                    let m = r.u32()?;
                    let c = r.u32()?;
                    in_store(m, "medoid")?;
                    let cu = c as usize;
                    if cu <= idx || cu >= n_nodes || referenced[cu] {
                        return Err(Error::Corrupt(format!("node {idx} has invalid child {c}")));
                    }
                    referenced[cu] = true;
                    children.push((m, c));
                }
                nodes.push(IndexNode::Internal { children });
            }
            1 => {
                let n = r.count(4)?;
                let mut chains = Vec::with_capacity(n);
                for _ in 0..n {
                    let c = r.u32()?;
                    in_store(c, "chain")?;
                    chains.push(c);
                }
                nodes.push(IndexNode::Leaf { chains });
            }
            t => return Err(Error::Corrupt(format!("node {idx} has unknown tag {t}"))),
        }
    }
    if referenced.iter().skip(1).any(|&r| !r) {
        return Err(Error::Corrupt("unreachable tree node".into()));
    }
    if r.remaining() != 0 {
        return Err(Error::Corrupt(format!("{} trailing bytes", r.remaining())));
    }
    Ok(ChainTree {
        store,
        nodes,
        params: manifest.params,
        seed: manifest.seed,
    })
}
