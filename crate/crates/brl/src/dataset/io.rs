//! "BRL1" dataset file format.
//!
//! 20-byte little-endian header: magic "BRL1", version u16, obs_dim u16,
//! act_dim u16, reserved u16, n_transitions u64. Then per transition:
//! obs (obs_dim × f32), action (act_dim × f32), next_obs (obs_dim × f32),
//! flags u8 (bit0 = done, bit1 = timeout). Sidecar JSON at path + ".json".

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetMeta, Transition};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"BRL1";
const VERSION: u16 = 1;

/// Sidecar JSON schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub env: String,
    pub method: String,
    pub seed: u64,
    pub steps: u64,
    pub config_hash: String,
    pub created_utc: u64,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

pub fn dataset_write(dataset: &Dataset, path: &Path) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::Usage("refusing to write an empty dataset".to_string()));
    }
    let meta = dataset.meta();
    for t in dataset.transitions() {
        if t.obs.len() != meta.obs_dim
            || t.next_obs.len() != meta.obs_dim
            || t.action.len() != meta.act_dim
        {
            return Err(Error::Corruption(
                "transition dimensions inconsistent with metadata".to_string(),
            ));
        }
    }

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(meta.obs_dim as u16).to_le_bytes())?;
    w.write_all(&(meta.act_dim as u16).to_le_bytes())?;
    w.write_all(&0u16.to_le_bytes())?;
    w.write_all(&(dataset.len() as u64).to_le_bytes())?;
    for t in dataset.transitions() {
        for v in t.obs.iter().chain(&t.action).chain(&t.next_obs) {
            w.write_all(&(*v as f32).to_le_bytes())?;
        }
        let flags = (t.done as u8) | ((t.timeout as u8) << 1);
        w.write_all(&[flags])?;
    }
    w.flush()?;

    let sidecar = DatasetSidecar {
        env: meta.env.clone(),
        method: meta.method.clone(),
        seed: meta.seed,
        steps: dataset.len() as u64,
        config_hash: meta.config_hash.clone(),
        created_utc: now_utc(),
    };
    let json = serde_json::to_string_pretty(&sidecar)?;
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn dataset_read(path: &Path) -> Result<Dataset> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("file too short for a dataset header".to_string()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad dataset magic {magic:?}, expected \"BRL1\""
        )));
    }
    let version = read_u16(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported dataset version {version}")));
    }
    let obs_dim = read_u16(&mut r)? as usize;
    let act_dim = read_u16(&mut r)? as usize;
    let _reserved = read_u16(&mut r)?;
    let n = read_u64(&mut r)?;

    // Sidecar is optional on read; without it the provenance is unknown
    // and relabeling will refuse the dataset.
    let meta = match std::fs::read_to_string(sidecar_path(path)) {
        Ok(json) => {
            let sc: DatasetSidecar = serde_json::from_str(&json)?;
            DatasetMeta {
                env: sc.env,
                method: sc.method,
                seed: sc.seed,
                obs_dim,
                act_dim,
                config_hash: sc.config_hash,
            }
        }
        Err(_) => DatasetMeta {
            env: String::new(),
            method: String::new(),
            seed: 0,
            obs_dim,
            act_dim,
            config_hash: String::new(),
        },
    };

    let mut ds = Dataset::new(meta);
    let mut floats = vec![0.0f64; 2 * obs_dim + act_dim];
    for i in 0..n {
        for f in floats.iter_mut() {
            let mut b = [0u8; 4];
            r.read_exact(&mut b).map_err(|_| truncated(i, n))?;
            *f = f32::from_le_bytes(b) as f64;
        }
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag).map_err(|_| truncated(i, n))?;
        if flag[0] & !0b11 != 0 {
            return Err(Error::Corruption(format!(
                "transition {i}: unknown flag bits {:#04x}",
                flag[0]
            )));
        }
        ds.push(Transition {
            obs: floats[..obs_dim].to_vec(),
            action: floats[obs_dim..obs_dim + act_dim].to_vec(),
            next_obs: floats[obs_dim + act_dim..].to_vec(),
            done: flag[0] & 1 != 0,
            timeout: flag[0] & 2 != 0,
        })?;
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Corruption(
            "trailing bytes after the declared transition count".to_string(),
        ));
    }
    Ok(ds)
}

fn truncated(i: u64, n: u64) -> Error {
    Error::Corruption(format!("file truncated at transition {i} of {n}"))
}

fn read_u16(r: &mut impl Read) -> Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)
        .map_err(|_| Error::Format("dataset header truncated".to_string()))?;
    Ok(u16::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|_| Error::Format("dataset header truncated".to_string()))?;
    Ok(u64::from_le_bytes(b))
}

fn now_utc() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DatasetMeta;

    fn sample_dataset(n: usize) -> Dataset {
        let mut ds = Dataset::new(DatasetMeta {
            env: "pointmass".to_string(),
            method: "random".to_string(),
            seed: 7,
            obs_dim: 2,
            act_dim: 1,
            config_hash: "cafe".to_string(),
        });
        for i in 0..n {
            ds.push(Transition {
                obs: vec![i as f64 * 0.25, -1.5],
                action: vec![0.125],
                next_obs: vec![i as f64 * 0.25 + 0.1, 1.5],
                done: i % 3 == 0,
                timeout: i % 6 == 0,
            })
            .unwrap();
        }
        ds
    }

    #[test]
    fn round_trip_is_identity_at_f32_precision() {
        let ds = sample_dataset(9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.brl");
        dataset_write(&ds, &path).unwrap();
        let back = dataset_read(&path).unwrap();
        assert_eq!(back.len(), ds.len());
        assert_eq!(back.meta().env, "pointmass");
        assert_eq!(back.meta().seed, 7);
        for (a, b) in ds.transitions().iter().zip(back.transitions()) {
            for (x, y) in a.obs.iter().zip(&b.obs) {
                assert_eq!(*x as f32, *y as f32);
            }
            assert_eq!((a.done, a.timeout), (b.done, b.timeout));
        }
    }

    #[test]
    fn rewriting_a_round_tripped_dataset_is_byte_identical() {
        let ds = sample_dataset(5);
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.brl");
        let p2 = dir.path().join("b.brl");
        dataset_write(&ds, &p1).unwrap();
        let back = dataset_read(&p1).unwrap();
        dataset_write(&back, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn one_transition_file_is_41_bytes() {
        // header(20) + (2+1+2)*4 + 1 flag byte = 41.
        let ds = sample_dataset(1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.brl");
        dataset_write(&ds, &path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 41);
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.brl");
        std::fs::write(&path, b"WAT?aaaaaaaaaaaaaaaaaaaaaaaaaaa").unwrap();
        assert!(matches!(dataset_read(&path), Err(Error::Format(_))));
    }

    #[test]
    fn truncation_mid_transition_is_a_corruption_error() {
        let ds = sample_dataset(3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.brl");
        dataset_write(&ds, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(dataset_read(&path), Err(Error::Corruption(_))));
    }

    #[test]
    fn empty_dataset_refuses_to_write() {
        let ds = Dataset::new(DatasetMeta {
            env: "pointmass".to_string(),
            method: "random".to_string(),
            seed: 0,
            obs_dim: 2,
            act_dim: 1,
            config_hash: String::new(),
        });
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            dataset_write(&ds, &dir.path().join("e.brl")),
            Err(Error::Usage(_))
        ));
    }
}
