use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{Dense, QNetwork};
use crate::env::EnvConfig;
use crate::error::{Error, Result};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// JSON model file. Floats are written in shortest round-trip form, so a
/// load reproduces every parameter bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub layer_sizes: Vec<usize>,
    /// Fingerprint of the environment encoding the network was trained on.
    pub feature_fingerprint: String,
    pub layers: Vec<Dense>,
}

impl ModelFile {
    pub fn new(net: &QNetwork, fingerprint: &str) -> Self {
        Self {
            schema_version: MODEL_SCHEMA_VERSION,
            layer_sizes: net.sizes(),
            feature_fingerprint: fingerprint.to_string(),
            layers: net.layers().to_vec(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: Self = serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported model schema version {}",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn into_network(self) -> Result<QNetwork> {
        let net = QNetwork::from_layers(self.layers)?;
        if net.sizes() != self.layer_sizes {
            return Err(Error::Format("layer_sizes disagree with the stored layers".into()));
        }
        Ok(net)
    }
}

pub fn save_model(net: &QNetwork, env: &EnvConfig, path: &Path) -> Result<()> {
    let file = ModelFile::new(net, &env.fingerprint());
    let text = serde_json::to_string(&file).expect("model serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Loads a model and checks it was trained for `env`'s state encoding.
pub fn load_model(path: &Path, env: &EnvConfig) -> Result<QNetwork> {
    let file = ModelFile::read(path)?;
    let expected = env.fingerprint();
    if file.feature_fingerprint != expected {
        return Err(Error::FingerprintMismatch {
            model: file.feature_fingerprint,
            env: expected,
        });
    }
    let net = file.into_network()?;
    if net.input_len() != env.encoded_len() {
        return Err(Error::LengthMismatch {
            expected: env.encoded_len(),
            got: net.input_len(),
        });
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comfort::{ComfortModel, FeatureParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let env = EnvConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = QNetwork::new(&[env.encoded_len(), 64, 64, 3], &mut rng).unwrap();
        let path = dir.path().join("q.json");
        save_model(&net, &env, &path).unwrap();
        let back = load_model(&path, &env).unwrap();
        assert_eq!(back, net);
        for _ in 0..100 {
            let x: Vec<f64> = (0..env.encoded_len()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let a = net.forward(&x).unwrap();
            let b = back.forward(&x).unwrap();
            assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn truncated_file_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let env = EnvConfig::default();
        let net = QNetwork::zeros(&[env.encoded_len(), 4, 3]).unwrap();
        let path = dir.path().join("q.json");
        save_model(&net, &env, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path, &env), Err(Error::Format(_))));
        assert!(matches!(
            load_model(&dir.path().join("none.json"), &env),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn fingerprint_guard() {
        let dir = tempfile::tempdir().unwrap();
        let env16 = EnvConfig::default();
        let net = QNetwork::zeros(&[env16.encoded_len(), 4, 3]).unwrap();
        let path = dir.path().join("q.json");
        save_model(&net, &env16, &path).unwrap();

        let mut env8 = EnvConfig::default();
        env8.features = FeatureParams {
            bins: 8,
            ..Default::default()
        };
        env8.model = ComfortModel::default_for(&env8.features);
        assert!(matches!(
            load_model(&path, &env8),
            Err(Error::FingerprintMismatch { .. })
        ));
    }
}
