//! Binary model checkpoints.
//!
//! Layout: version byte, element-size byte (4 or 8), u32 header length,
//! JSON header (architecture, input, layers), u32 tensor count, then per
//! tensor a u32 rank, u32 dims and little-endian values. Integers are
//! little-endian.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::network::{InputSpec, LayerSpec, Network};
use super::tensor::{Real, Tensor};
use crate::{Error, Result};

pub const CHECKPOINT_VERSION: u8 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    architecture: String,
    input: InputSpec,
    layers: Vec<LayerSpec>,
}

fn push_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Checkpoint(format!("{v} does not fit in u32")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

pub fn to_bytes<T: Real>(net: &Network<T>) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&Header {
        architecture: net.architecture().to_string(),
        input: net.input(),
        layers: net.specs().to_vec(),
    })?;
    let mut out = vec![CHECKPOINT_VERSION, T::BYTES];
    push_u32(&mut out, header.len())?;
    out.extend_from_slice(&header);
    push_u32(&mut out, net.params().len())?;
    for t in net.params() {
        push_u32(&mut out, t.shape().len())?;
        for &d in t.shape() {
            push_u32(&mut out, d)?;
        }
        for &v in t.data() {
            v.write_le(&mut out);
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn tensor<S: Real, T: Real>(&mut self) -> Result<Tensor<T>> {
        let rank = self.u32()?;
        let shape = (0..rank).map(|_| self.u32()).collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let width = usize::from(S::BYTES);
        let raw = self.take(n.checked_mul(width).ok_or_else(|| Error::Checkpoint("tensor too large".into()))?)?;
        let data = raw
            .chunks_exact(width)
            .map(|c| T::from_f64(S::read_le(c).as_f64()))
            .collect();
        Tensor::from_vec(&shape, data)
    }
}

/// Decode a checkpoint, converting the stored element type to `T`.
pub fn from_bytes<T: Real>(bytes: &[u8]) -> Result<Network<T>> {
    let mut r = Reader { bytes, pos: 0 };
    let head = r.take(2)?;
    if head[0] != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {}", head[0])));
    }
    let dtype = head[1];
    let len = r.u32()?;
    let header: Header = serde_json::from_slice(r.take(len)?)
        .map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
    let count = r.u32()?;
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        params.push(match dtype {
            4 => r.tensor::<f32, T>()?,
            8 => r.tensor::<f64, T>()?,
            other => return Err(Error::Checkpoint(format!("unknown element size {other}"))),
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Network::from_parts(header.architecture, header.input, header.layers, params)
}

pub fn save<T: Real>(net: &Network<T>, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(net)?)?;
    Ok(())
}

pub fn load<T: Real>(path: &Path) -> Result<Network<T>> {
    from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_parameters() {
        let net = Network::<f32>::lenet64(64, 9).unwrap();
        let bytes = to_bytes(&net).unwrap();
        assert_eq!(bytes[0], CHECKPOINT_VERSION);
        assert_eq!(bytes[1], 4);
        let back: Network<f32> = from_bytes(&bytes).unwrap();
        assert_eq!(back.params(), net.params());
        assert_eq!(back.specs(), net.specs());
        assert_eq!(to_bytes(&back).unwrap(), bytes);
        let wide: Network<f64> = from_bytes(&bytes).unwrap();
        assert_eq!(wide.params()[0].data()[0], f64::from(net.params()[0].data()[0]));
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let bytes = to_bytes(&Network::<f32>::lenet64(64, 0).unwrap()).unwrap();
        assert!(from_bytes::<f32>(&bytes[..bytes.len() - 1]).is_err());
        let mut v = bytes.clone();
        v[0] = 9;
        assert!(from_bytes::<f32>(&v).is_err());
        let mut v = bytes;
        v.push(0);
        assert!(from_bytes::<f32>(&v).is_err());
        assert!(from_bytes::<f32>(&[]).is_err());
    }
}
