//! Binary tensor and dataset files, plus plain-text vectors.
//!
//! All integers are unsigned 64-bit little-endian and all reals are IEEE-754
//! binary64 little-endian.
//!
//! Tensor file:
//!
//! ```text
//! offset  size      field
//! 0       8         magic "SLTRTN1\n"
//! 8       8         M (order)
//! 16      8*M       p_1 .. p_M
//! 16+8M   8*P       entries in storage order (mode 0 fastest), P = prod p_m
//! ```
//!
//! Dataset file:
//!
//! ```text
//! offset  size      field
//! 0       8         magic "SLTRDS1\n"
//! 8       8         version (1)
//! 16      8         M
//! 24      8*M       p_1 .. p_M
//! 24+8M   8         N
//! 32+8M   8*N*P     X_1 .. X_N, each in storage order
//! ...     8*N       y_1 .. y_N
//! ```
//!
//! Files must end exactly after the last field.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const TENSOR_MAGIC: &[u8; 8] = b"SLTRTN1\n";
pub const DATASET_MAGIC: &[u8; 8] = b"SLTRDS1\n";
pub const DATASET_VERSION: u64 = 1;

/// Sanity cap on the declared order, so corrupt headers fail fast.
const MAX_ORDER: u64 = 64;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format { offset: self.pos as u64, message: message.into() }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(self.err(format!("truncated while reading {what}")));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn magic(&mut self, expect: &[u8; 8]) -> Result<()> {
        let start = self.pos;
        let got = self.take(8, "magic")?;
        if got != expect {
            self.pos = start;
            return Err(self.err(format!("bad magic {:?}", String::from_utf8_lossy(got))));
        }
        Ok(())
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = n.checked_mul(8).ok_or_else(|| self.err(format!("{what} length overflows")))?;
        let raw = self.take(bytes, what)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn dims(&mut self) -> Result<Vec<usize>> {
        let at = self.pos;
        let order = self.u64("order")?;
        if order == 0 || order > MAX_ORDER {
            self.pos = at;
            return Err(self.err(format!("order {order} outside 1..={MAX_ORDER}")));
        }
        let mut dims = Vec::with_capacity(order as usize);
        for m in 0..order {
            let at = self.pos;
            let d = self.u64("dimension")?;
            if d == 0 || d > usize::MAX as u64 {
                self.pos = at;
                return Err(self.err(format!("dimension {m} is {d}")));
            }
            dims.push(d as usize);
        }
        Ok(dims)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(self.err(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

fn checked_len(dims: &[usize], offset: usize) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .ok_or(Error::Format { offset: offset as u64, message: "tensor size overflows".into() })
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, vs: &[f64]) {
    for v in vs {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn put_dims(out: &mut Vec<u8>, dims: &[usize]) {
    put_u64(out, dims.len() as u64);
    for &d in dims {
        put_u64(out, d as u64);
    }
}

pub fn encode_tensor(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * (t.order() + t.len()));
    out.extend_from_slice(TENSOR_MAGIC);
    put_dims(&mut out, t.dims());
    put_f64s(&mut out, t.data());
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor> {
    let mut r = Reader { buf: bytes, pos: 0 };
    r.magic(TENSOR_MAGIC)?;
    let dims = r.dims()?;
    let p = checked_len(&dims, r.pos)?;
    let data = r.f64s(p, "tensor payload")?;
    r.finish()?;
    Tensor::new(dims, data)
}

pub fn encode_dataset(ds: &Dataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 8 * (ds.dims().len() + ds.len() * (ds.num_features() + 1)));
    out.extend_from_slice(DATASET_MAGIC);
    put_u64(&mut out, DATASET_VERSION);
    put_dims(&mut out, ds.dims());
    put_u64(&mut out, ds.len() as u64);
    for s in ds.samples() {
        put_f64s(&mut out, s.data());
    }
    put_f64s(&mut out, ds.y());
    out
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader { buf: bytes, pos: 0 };
    r.magic(DATASET_MAGIC)?;
    let at = r.pos;
    let version = r.u64("version")?;
    if version != DATASET_VERSION {
        r.pos = at;
        return Err(r.err(format!("unsupported version {version}")));
    }
    let dims = r.dims()?;
    let p = checked_len(&dims, r.pos)?;
    let at = r.pos;
    let n = r.u64("sample count")?;
    if n == 0 {
        r.pos = at;
        return Err(r.err("dataset has no samples"));
    }
    let n = usize::try_from(n).map_err(|_| r.err("sample count overflows"))?;
    let mut samples = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        samples.push(Tensor::new(dims.clone(), r.f64s(p, "sample payload")?)?);
    }
    let y = r.f64s(n, "responses")?;
    r.finish()?;
    Dataset::new(dims, samples, y)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &Tensor) -> Result<()> {
    Ok(fs::write(path, encode_tensor(t))?)
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    decode_tensor(&fs::read(path)?)
}

pub fn write_dataset(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    Ok(fs::write(path, encode_dataset(ds))?)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    decode_dataset(&fs::read(path)?)
}

/// One value per line, shortest round-trip formatting.
pub fn write_vector_text(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for x in v {
        writeln!(f, "{x:?}")?;
    }
    f.flush()?;
    Ok(())
}

/// Reads one real per non-empty line; `#` starts a comment line.
pub fn read_vector_text(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    let mut offset = 0u64;
    for line in text.split_inclusive('\n') {
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push(t.parse::<f64>().map_err(|e| Error::Format { offset, message: format!("{t:?}: {e}") })?);
        }
        offset += line.len() as u64;
    }
    Ok(out)
}
