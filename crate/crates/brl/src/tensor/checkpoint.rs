//! "BRLP" network checkpoint format.
//!
//! One record per network: magic "BRLP", format version u16, layer count
//! u16 (number of layer_dims entries), layer_dims as u32 list, activation
//! codes as u8 list (one per weight layer; hidden layers are tanh), then
//! all parameters as little-endian f32 in layer order (weights row-major,
//! then biases). A checkpoint file is one or more records back to back.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Activation, Mlp};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"BRLP";
const VERSION: u16 = 1;

pub fn write_networks(path: &Path, nets: &[&Mlp]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for net in nets {
        write_record(&mut w, net)?;
    }
    w.flush()?;
    Ok(())
}

fn write_record(w: &mut impl Write, net: &Mlp) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let dims = net.layer_dims();
    w.write_all(&(dims.len() as u16).to_le_bytes())?;
    for &d in dims {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for l in 0..net.n_layers() {
        let act = if l == net.n_layers() - 1 {
            net.output_activation()
        } else {
            Activation::Tanh
        };
        w.write_all(&[act.code()])?;
    }
    for &v in net.params().values() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_networks(path: &Path) -> Result<Vec<Mlp>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut nets = Vec::new();
    loop {
        let mut magic = [0u8; 4];
        match r.read_exact(&mut magic) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof && !nets.is_empty() => break,
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                return Err(Error::Format("empty checkpoint file".to_string()))
            }
            Err(e) => return Err(e.into()),
        }
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad checkpoint magic {:?}, expected \"BRLP\"",
                magic
            )));
        }
        let version = read_u16(&mut r)?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let n_dims = read_u16(&mut r)? as usize;
        if n_dims < 2 {
            return Err(Error::Format(format!("checkpoint layer count {n_dims} < 2")));
        }
        let mut dims = Vec::with_capacity(n_dims);
        for _ in 0..n_dims {
            let d = read_u32(&mut r)? as usize;
            if d == 0 {
                return Err(Error::Format("zero layer dimension".to_string()));
            }
            dims.push(d);
        }
        let mut codes = vec![0u8; n_dims - 1];
        r.read_exact(&mut codes).map_err(truncated)?;
        for &c in &codes[..n_dims - 2] {
            if c != Activation::Tanh.code() {
                return Err(Error::Format(format!(
                    "hidden activation code {c} is not tanh"
                )));
            }
        }
        let output_activation = Activation::from_code(codes[n_dims - 2])?;
        let n_params: usize = (0..n_dims - 1).map(|l| dims[l + 1] * dims[l] + dims[l + 1]).sum();
        let mut values = Vec::with_capacity(n_params);
        for _ in 0..n_params {
            let mut b = [0u8; 4];
            r.read_exact(&mut b).map_err(truncated)?;
            values.push(f32::from_le_bytes(b) as f64);
        }
        nets.push(Mlp::from_params(&dims, output_activation, values)?);
    }
    Ok(nets)
}

fn read_u16(r: &mut impl Read) -> Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Corruption("checkpoint file truncated".to_string())
    } else {
        e.into()
    }
}
