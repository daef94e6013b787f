//! TBRAIN1: the binary model format.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   7 bytes  "TBRAIN1"
//! u32 x7           n_concepts, n_predicates, d_g, d_q, d_h, flags, n_episodes
//! f64 ...          embeddings        d_q x (n_concepts + n_predicates), row-major
//! f64 ...          sensory_map       d_q x d_g
//! f64 ...          wm_in             d_h x d_q
//! f64 ...          wm_out            d_q x d_h
//! f64 ...          wm_recur          d_h x d_h
//! f64 x 3 d_q      semantic          (sub, pred, obj segments)
//! f64 x 3 d_q      background        (sub, pred, obj segments)
//! [f64 ...]        untied_commit     d_q x (n_concepts + n_predicates), only if untied
//! episodes         n_episodes x (u32 time + 3 d_q f64), times strictly ascending
//! ```
//!
//! Flags: bit 0 is the optional skip term, bit 1 is tied weights; all other
//! bits must be zero. Every count is validated against the file length
//! before anything is allocated, and a loaded model reproduces inference
//! bit-exactly on any platform.

use std::path::Path;

use crate::decoder::{ModelDims, ModelParams, Segments};
use crate::error::{Error, Result};
use crate::linalg::Mat;

use super::{read_bytes, write_bytes};

pub const MAGIC: &[u8; 7] = b"TBRAIN1";

const FLAG_SKIP: u32 = 1;
const FLAG_TIED: u32 = 2;

/// Header of a model file, exposed for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelHeader {
    pub n_concepts: u32,
    pub n_predicates: u32,
    pub d_g: u32,
    pub d_q: u32,
    pub d_h: u32,
    pub flags: u32,
    pub n_episodes: u32,
}

impl ModelHeader {
    pub fn use_skip(&self) -> bool {
        self.flags & FLAG_SKIP != 0
    }

    pub fn tied(&self) -> bool {
        self.flags & FLAG_TIED != 0
    }
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, vs: &[f64]) {
        for v in vs {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }
}

pub fn to_bytes(params: &ModelParams) -> Vec<u8> {
    let d = params.dims;
    let mut flags = 0u32;
    if params.use_skip {
        flags |= FLAG_SKIP;
    }
    if params.tied() {
        flags |= FLAG_TIED;
    }
    let mut w = Writer {
        buf: Vec::with_capacity(64 + 8 * d.d_q * d.n_indices()),
    };
    w.buf.extend_from_slice(MAGIC);
    w.u32(d.n_concepts as u32);
    w.u32(d.n_predicates as u32);
    w.u32(d.d_g as u32);
    w.u32(d.d_q as u32);
    w.u32(d.d_h as u32);
    w.u32(flags);
    w.u32(params.episodes.len() as u32);

    w.f64s(params.embeddings.as_slice());
    w.f64s(params.sensory_map.as_slice());
    w.f64s(params.wm_in.as_slice());
    w.f64s(params.wm_out.as_slice());
    w.f64s(params.wm_recur.as_slice());
    for seg in [&params.semantic, &params.background] {
        w.f64s(&seg.sub);
        w.f64s(&seg.pred);
        w.f64s(&seg.obj);
    }
    if let Some(u) = &params.untied_commit {
        w.f64s(u.as_slice());
    }
    for (t, seg) in &params.episodes {
        w.u32(*t);
        w.f64s(&seg.sub);
        w.f64s(&seg.pred);
        w.f64s(&seg.obj);
    }
    w.buf
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    file: String,
}

impl<'a> Reader<'a> {
    fn bail(&self, field: &str, message: impl Into<String>) -> Error {
        Error::parse(&self.file, 0, field, message)
    }

    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(self.bail(field, "file truncated"));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f64s(&mut self, n: usize, field: &str) -> Result<Vec<f64>> {
        let b = self.take(8 * n, field)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes([c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]]))
            .collect())
    }
}

pub fn header_from_bytes(data: &[u8], file: &str) -> Result<ModelHeader> {
    let mut r = Reader {
        data,
        pos: 0,
        file: file.to_string(),
    };
    let magic = r.take(7, "magic")?;
    if magic != MAGIC {
        return Err(r.bail("magic", "not a TBRAIN1 file"));
    }
    let header = ModelHeader {
        n_concepts: r.u32("n_concepts")?,
        n_predicates: r.u32("n_predicates")?,
        d_g: r.u32("d_g")?,
        d_q: r.u32("d_q")?,
        d_h: r.u32("d_h")?,
        flags: r.u32("flags")?,
        n_episodes: r.u32("n_episodes")?,
    };
    if header.flags & !(FLAG_SKIP | FLAG_TIED) != 0 {
        return Err(r.bail("flags", format!("unknown flag bits {:#x}", header.flags)));
    }
    for (name, v) in [
        ("n_concepts", header.n_concepts),
        ("n_predicates", header.n_predicates),
        ("d_g", header.d_g),
        ("d_q", header.d_q),
        ("d_h", header.d_h),
    ] {
        if v == 0 {
            return Err(r.bail(name, "count must be positive"));
        }
    }
    Ok(header)
}

fn expected_len(h: &ModelHeader) -> Option<usize> {
    let n_idx = (h.n_concepts as usize).checked_add(h.n_predicates as usize)?;
    let d_g = h.d_g as usize;
    let d_q = h.d_q as usize;
    let d_h = h.d_h as usize;
    let mut floats = d_q.checked_mul(n_idx)?;
    if !h.tied() {
        floats = floats.checked_add(d_q.checked_mul(n_idx)?)?;
    }
    floats = floats.checked_add(d_q.checked_mul(d_g)?)?;
    floats = floats.checked_add(d_h.checked_mul(d_q)?)?;
    floats = floats.checked_add(d_q.checked_mul(d_h)?)?;
    floats = floats.checked_add(d_h.checked_mul(d_h)?)?;
    floats = floats.checked_add(6usize.checked_mul(d_q)?)?;
    let episode = 4usize.checked_add(24usize.checked_mul(d_q)?)?;
    let episodes = episode.checked_mul(h.n_episodes as usize)?;
    let header: usize = 7 + 4 * 7;
    header
        .checked_add(floats.checked_mul(8)?)?
        .checked_add(episodes)
}

pub fn from_bytes(data: &[u8], file: &str) -> Result<ModelParams> {
    let header = header_from_bytes(data, file)?;
    let expected = expected_len(&header)
        .ok_or_else(|| Error::parse(file, 0, "header", "sizes overflow"))?;
    if data.len() != expected {
        return Err(Error::parse(
            file,
            0,
            "length",
            format!("expected {expected} bytes, found {}", data.len()),
        ));
    }

    let dims = ModelDims {
        n_concepts: header.n_concepts as usize,
        n_predicates: header.n_predicates as usize,
        d_g: header.d_g as usize,
        d_q: header.d_q as usize,
        d_h: header.d_h as usize,
    };
    let mut r = Reader {
        data,
        pos: 7 + 4 * 7,
        file: file.to_string(),
    };

    let mat = |r: &mut Reader<'_>, rows: usize, cols: usize, field: &str| -> Result<Mat> {
        Ok(Mat::from_rows(rows, cols, r.f64s(rows * cols, field)?))
    };
    let segments = |r: &mut Reader<'_>, field: &str| -> Result<Segments> {
        Ok(Segments {
            sub: r.f64s(dims.d_q, field)?,
            pred: r.f64s(dims.d_q, field)?,
            obj: r.f64s(dims.d_q, field)?,
        })
    };

    let embeddings = mat(&mut r, dims.d_q, dims.n_indices(), "embeddings")?;
    let sensory_map = mat(&mut r, dims.d_q, dims.d_g, "sensory_map")?;
    let wm_in = mat(&mut r, dims.d_h, dims.d_q, "wm_in")?;
    let wm_out = mat(&mut r, dims.d_q, dims.d_h, "wm_out")?;
    let wm_recur = mat(&mut r, dims.d_h, dims.d_h, "wm_recur")?;
    let semantic = segments(&mut r, "semantic")?;
    let background = segments(&mut r, "background")?;
    let untied_commit = if header.tied() {
        None
    } else {
        Some(mat(&mut r, dims.d_q, dims.n_indices(), "untied_commit")?)
    };

    let mut episodes = std::collections::BTreeMap::new();
    let mut last_t: Option<u32> = None;
    for _ in 0..header.n_episodes {
        let t = r.u32("episode_time")?;
        if last_t.is_some_and(|prev| t <= prev) {
            return Err(r.bail("episode_time", "episode times must be strictly ascending"));
        }
        last_t = Some(t);
        episodes.insert(t, segments(&mut r, "episode")?);
    }
    if r.pos != data.len() {
        return Err(r.bail("length", "trailing bytes after episodes"));
    }

    Ok(ModelParams {
        dims,
        embeddings,
        untied_commit,
        sensory_map,
        wm_in,
        wm_out,
        wm_recur,
        semantic,
        background,
        episodes,
        use_skip: header.use_skip(),
    })
}

pub fn load(path: &Path) -> Result<ModelParams> {
    from_bytes(&read_bytes(path)?, &path.display().to_string())
}

pub fn load_header(path: &Path) -> Result<ModelHeader> {
    header_from_bytes(&read_bytes(path)?, &path.display().to_string())
}

pub fn save(path: &Path, params: &ModelParams) -> Result<()> {
    write_bytes(path, &to_bytes(params))
}
