//! Binary model checkpoints.
//!
//! Layout (all integers little endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic  "SPSHCKPT"
//! 8       4     format version (u32, currently 1)
//! 12      4     obs_dim (u32)
//! 16      4     action_count (u32)
//! 20      4     window T (u32)
//! 24      4     hidden_dim (u32)
//! 28      4     state_dim (u32)
//! 32      8*P   parameters as f64 little endian
//! ```
//!
//! Parameters follow the frozen layer order of
//! [`ModelWeights::layers`](super::model::ModelWeights::layers):
//! representation hidden, representation state, dynamics hidden,
//! dynamics state, dynamics reward, prediction hidden, prediction
//! policy, prediction value — weights (row-major out x in) then bias
//! for each layer.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::model::{ModelDims, ModelWeights};

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"SPSHCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn save_checkpoint(path: &Path, weights: &ModelWeights) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(&CHECKPOINT_MAGIC)?;
    file.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    for dim in [
        weights.dims.obs_dim,
        weights.dims.action_count,
        weights.dims.window,
        weights.dims.hidden_dim,
        weights.dims.state_dim,
    ] {
        file.write_all(&(dim as u32).to_le_bytes())?;
    }
    for value in weights.flatten() {
        file.write_all(&value.to_le_bytes())?;
    }
    file.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelWeights> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Format(format!(
            "bad checkpoint magic {:?}; expected {:?} ({})",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(&CHECKPOINT_MAGIC),
            path.display(),
        )));
    }
    let version = read_u32(&mut file)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {version}; this build reads version {CHECKPOINT_VERSION}"
        )));
    }
    let obs_dim = read_u32(&mut file)? as usize;
    let action_count = read_u32(&mut file)? as usize;
    let window = read_u32(&mut file)? as usize;
    let hidden_dim = read_u32(&mut file)? as usize;
    let state_dim = read_u32(&mut file)? as usize;
    let dims = ModelDims {
        obs_dim,
        action_count,
        state_dim,
        hidden_dim,
        window,
    };
    if state_dim != super::model::STATE_DIM || hidden_dim != super::model::HIDDEN_DIM {
        return Err(Error::Format(format!(
            "checkpoint dims {hidden_dim}x{state_dim} do not match this build"
        )));
    }

    let mut weights = ModelWeights::zeros(dims);
    let count = weights.param_count();
    let mut flat = vec![0.0f64; count];
    let mut buf = [0u8; 8];
    for slot in flat.iter_mut() {
        file.read_exact(&mut buf).map_err(|_| {
            Error::Format("checkpoint truncated before all parameters were read".into())
        })?;
        *slot = f64::from_le_bytes(buf);
    }
    if file.read(&mut buf)? != 0 {
        return Err(Error::Format("trailing bytes after checkpoint parameters".into()));
    }
    weights.set_from_flat(&flat)?;
    Ok(weights)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("specshare-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn round_trip_preserves_every_parameter() {
        let dims = ModelDims::new(64, 3, 10);
        let mut rng = rng_from_seed(7);
        let w = ModelWeights::init(dims, &mut rng);
        let path = tmpdir().join("roundtrip.bin");
        save_checkpoint(&path, &w).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn corrupt_magic_names_the_expected_value() {
        let dims = ModelDims::new(8, 2, 10);
        let w = ModelWeights::zeros(dims);
        let path = tmpdir().join("corrupt.bin");
        save_checkpoint(&path, &w).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("SPSHCKPT"), "error must name the expected magic: {msg}");
    }

    #[test]
    fn truncated_file_is_detected() {
        let dims = ModelDims::new(8, 2, 10);
        let w = ModelWeights::zeros(dims);
        let path = tmpdir().join("trunc.bin");
        save_checkpoint(&path, &w).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
