//! File formats for tensors, masks and synthetic instances.
//!
//! Binary tensors: magic `THOS`, `u32` version 1, `u32` order `N`, `N × u64`
//! dims, then the values as `f64`, all little-endian, in mode-1-fastest order.
//!
//! Text tensors: a header line `N m₁ … m_N`, then one value per line in the
//! same order, written with 17 significant digits.
//!
//! Text masks: a header line `N m₁ … m_N |Ω|`, then one flat index per line in
//! ascending order.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::observation::ObservationMask;
use crate::synthetic::GeneratorSpec;
use crate::tensor::{DenseTensor, Shape};

const MAGIC: &[u8; 4] = b"THOS";
const VERSION: u32 = 1;

/// Round-trippable decimal form of a float (17 significant digits).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_tensor_binary<W: Write>(t: &DenseTensor, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(t.ndims() as u32).to_le_bytes())?;
    for &d in t.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for v in t.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_tensor_binary<R: Read>(mut r: R) -> Result<DenseTensor> {
    if &read_array::<4, _>(&mut r)? != MAGIC {
        return Err(Error::Format("missing THOS magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported tensor file version {version}")));
    }
    let order = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let dims = (0..order)
        .map(|_| {
            let d = u64::from_le_bytes(read_array(&mut r)?);
            usize::try_from(d).map_err(|_| Error::Format(format!("dimension {d} too large")))
        })
        .collect::<Result<Vec<_>>>()?;
    let shape = Shape::new(dims)?;
    let mut data = Vec::with_capacity(shape.numel());
    for _ in 0..shape.numel() {
        data.push(f64::from_le_bytes(read_array(&mut r)?));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after tensor payload".into()));
    }
    DenseTensor::new(shape, data)
}

fn header(dims: &[usize]) -> String {
    let mut line = dims.len().to_string();
    for d in dims {
        line.push(' ');
        line.push_str(&d.to_string());
    }
    line
}

pub fn write_tensor_text<W: Write>(t: &DenseTensor, mut w: W) -> Result<()> {
    writeln!(w, "{}", header(t.dims()))?;
    for &v in t.data() {
        writeln!(w, "{}", format_f64(v))?;
    }
    Ok(())
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Format(format!("expected a nonnegative integer, found `{s}`")))
}

/// Parses an `N m₁ … m_N [extra…]` header, returning the shape and the
/// remaining fields.
fn parse_header(line: &str, extra: usize) -> Result<(Shape, Vec<usize>)> {
    let fields = line
        .split_whitespace()
        .map(parse_usize)
        .collect::<Result<Vec<_>>>()?;
    let (&order, rest) = fields
        .split_first()
        .ok_or_else(|| Error::Format("empty header line".into()))?;
    if rest.len() != order + extra {
        return Err(Error::Format(format!(
            "header announces order {order} but has {} further fields",
            rest.len()
        )));
    }
    Ok((Shape::new(rest[..order].to_vec())?, rest[order..].to_vec()))
}

fn data_lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<String>> {
    r.lines()
        .map(|l| l.map_err(Error::from))
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
}

pub fn read_tensor_text<R: BufRead>(r: R) -> Result<DenseTensor> {
    let mut lines = data_lines(r);
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty tensor file".into()))??;
    let (shape, _) = parse_header(&first, 0)?;
    let mut data = Vec::with_capacity(shape.numel());
    for line in lines {
        let line = line?;
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad value `{}`", line.trim())))?;
        data.push(v);
    }
    if data.len() != shape.numel() {
        return Err(Error::Format(format!(
            "expected {} values for shape {shape}, found {}",
            shape.numel(),
            data.len()
        )));
    }
    DenseTensor::new(shape, data)
}

pub fn write_mask_text<W: Write>(mask: &ObservationMask, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", header(mask.shape().dims()), mask.len())?;
    for k in mask.indices() {
        writeln!(w, "{k}")?;
    }
    Ok(())
}

pub fn read_mask_text<R: BufRead>(r: R) -> Result<ObservationMask> {
    let mut lines = data_lines(r);
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty mask file".into()))??;
    let (shape, extra) = parse_header(&first, 1)?;
    let count = extra[0];
    let indices = lines
        .map(|l| parse_usize(l?.trim()))
        .collect::<Result<Vec<_>>>()?;
    if indices.len() != count {
        return Err(Error::Format(format!(
            "mask header announces {count} indices, found {}",
            indices.len()
        )));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Format("mask indices must be strictly ascending".into()));
    }
    ObservationMask::new(shape, indices)
}

fn is_binary(path: &Path) -> bool {
    !matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("txt" | "tsv" | "dat")
    )
}

/// Writes a tensor, choosing the text format for `.txt`/`.dat` paths and
/// the binary one otherwise.
pub fn save_tensor(t: &DenseTensor, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    if is_binary(path) {
        write_tensor_binary(t, &mut w)?;
    } else {
        write_tensor_text(t, &mut w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_tensor(path: &Path) -> Result<DenseTensor> {
    let r = BufReader::new(fs::File::open(path)?);
    if is_binary(path) {
        read_tensor_binary(r)
    } else {
        read_tensor_text(r)
    }
}

pub fn save_mask(mask: &ObservationMask, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_mask_text(mask, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_mask(path: &Path) -> Result<ObservationMask> {
    read_mask_text(BufReader::new(fs::File::open(path)?))
}

/// Writes the tensor to `path` and the generator manifest next to it with a
/// `.manifest` suffix.
pub fn save_instance(spec: &GeneratorSpec, t: &DenseTensor, path: &Path) -> Result<()> {
    save_tensor(t, path)?;
    let mut manifest = path.as_os_str().to_owned();
    manifest.push(".manifest");
    fs::write(manifest, spec.to_manifest())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DenseTensor {
        let shape = Shape::new(vec![3, 2, 2]).unwrap();
        DenseTensor::from_fn(shape, |i| (i[0] as f64 + 0.1) / (1.0 + i[1] as f64) - i[2] as f64 * 1e-17)
    }

    #[test]
    fn binary_roundtrip_and_layout() {
        let t = sample();
        let mut buf = Vec::new();
        write_tensor_binary(&t, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"THOS");
        assert_eq!(buf.len(), 4 + 4 + 4 + 3 * 8 + 12 * 8);
        assert_eq!(read_tensor_binary(buf.as_slice()).unwrap(), t);
        buf.push(0);
        assert!(read_tensor_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let t = sample();
        let mut buf = Vec::new();
        write_tensor_text(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 3 2 2\n"));
        let back = read_tensor_text(buf.as_slice()).unwrap();
        assert!(back.data().iter().zip(t.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn mask_roundtrip() {
        let shape = Shape::new(vec![4, 5]).unwrap();
        let mask = ObservationMask::new(shape, vec![19, 0, 7]).unwrap();
        let mut buf = Vec::new();
        write_mask_text(&mask, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "2 4 5 3\n0\n7\n19\n");
        assert_eq!(read_mask_text(buf.as_slice()).unwrap(), mask);
        assert!(read_mask_text("2 4 5 2\n7\n0\n".as_bytes()).is_err());
        assert!(read_mask_text("2 4 5 2\n0\n".as_bytes()).is_err());
    }

    #[test]
    fn malformed_headers() {
        assert!(read_tensor_text("3 2 2\n1\n".as_bytes()).is_err());
        assert!(read_tensor_text("1 2\n1\n".as_bytes()).is_err());
        assert!(read_tensor_binary(&b"NOPE"[..]).is_err());
    }
}
