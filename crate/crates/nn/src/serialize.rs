//! Versioned flat binary container for trained models.
//!
//! ```text
//! magic   4 bytes  "EVNN"
//! version u32 LE   currently 1
//! seed    u64 LE   initialization seed (provenance)
//! spec    u32 LE length + that many bytes of JSON (the ModelSpec)
//! count   u32 LE   number of tensors
//! tensor  u32 LE name length + name bytes,
//!         u64 LE element count, elements as f64 LE
//! ```
//! Tensors appear in declaration order ([`Model::tensors`]); a loaded model
//! is bit-identical to the saved one.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::model::Model;
use crate::spec::ModelSpec;
use crate::NnError;

const MAGIC: &[u8; 4] = b"EVNN";
const VERSION: u32 = 1;

pub fn save_model(model: &Model, path: &Path) -> Result<(), NnError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&model.init_seed().to_le_bytes())?;
    let spec_json = serde_json::to_vec(model.spec())?;
    w.write_all(&(spec_json.len() as u32).to_le_bytes())?;
    w.write_all(&spec_json)?;
    let tensors = model.tensors();
    w.write_all(&(tensors.len() as u32).to_le_bytes())?;
    for t in tensors {
        w.write_all(&(t.name.len() as u32).to_le_bytes())?;
        w.write_all(t.name.as_bytes())?;
        w.write_all(&(t.data.len() as u64).to_le_bytes())?;
        for &v in t.data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N], NnError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u32(r: &mut impl Read) -> Result<u32, NnError> {
    Ok(u32::from_le_bytes(read_exact::<4>(r)?))
}

fn read_u64(r: &mut impl Read) -> Result<u64, NnError> {
    Ok(u64::from_le_bytes(read_exact::<8>(r)?))
}

pub fn load_model(path: &Path) -> Result<Model, NnError> {
    let mut r = BufReader::new(File::open(path)?);
    if &read_exact::<4>(&mut r)? != MAGIC {
        return Err(NnError::Container("bad magic, not a model file".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(NnError::Container(format!(
            "unsupported container version {version}, expected {VERSION}"
        )));
    }
    let seed = read_u64(&mut r)?;
    let spec_len = read_u32(&mut r)? as usize;
    let mut spec_bytes = vec![0u8; spec_len];
    r.read_exact(&mut spec_bytes)?;
    let spec: ModelSpec = serde_json::from_slice(&spec_bytes)?;

    let mut model = Model::build(&spec, seed)?;
    let count = read_u32(&mut r)? as usize;
    let expected = model.tensors().len();
    if count != expected {
        return Err(NnError::Container(format!(
            "container holds {count} tensors, spec requires {expected}"
        )));
    }
    for tensor in model.tensors_mut() {
        let name_len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name)
            .map_err(|_| NnError::Container("tensor name is not UTF-8".into()))?;
        if name != tensor.name {
            return Err(NnError::Container(format!(
                "tensor order mismatch: found {name:?}, expected {:?}",
                tensor.name
            )));
        }
        let len = read_u64(&mut r)? as usize;
        if len != tensor.data.len() {
            return Err(NnError::Container(format!(
                "tensor {name:?} holds {len} values, spec requires {}",
                tensor.data.len()
            )));
        }
        for slot in tensor.data.iter_mut() {
            *slot = f64::from_le_bytes(read_exact::<8>(&mut r)?);
        }
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(NnError::Container("trailing bytes after last tensor".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        for spec in [ModelSpec::dnn(), ModelSpec::cnn1d(), ModelSpec::lstm()] {
            let model = Model::build(&spec, 31).unwrap();
            let path = dir.path().join(format!("{}.bin", spec.arch_name()));
            save_model(&model, &path).unwrap();
            let back = load_model(&path).unwrap();
            assert_eq!(back, model);

            let x = Array2::from_shape_fn((5, 140), |(i, j)| ((i + j) % 8) as f64 / 8.0);
            assert_eq!(
                back.forward(x.view(), false, 0).unwrap(),
                model.forward(x.view(), false, 0).unwrap()
            );
        }
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("not_a_model.bin");
        std::fs::write(&path, b"PK\x03\x04 something else entirely").unwrap();
        assert!(matches!(load_model(&path), Err(NnError::Container(_))));
    }

    #[test]
    fn rejects_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let model = Model::build(&ModelSpec::dnn(), 1).unwrap();
        save_model(&model, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(load_model(&path).is_err());
    }

    #[test]
    fn rejects_trailing_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let model = Model::build(&ModelSpec::dnn(), 1).unwrap();
        save_model(&model, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.extend_from_slice(b"junk");
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_model(&path), Err(NnError::Container(_))));
    }
}
