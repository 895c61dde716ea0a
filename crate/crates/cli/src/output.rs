//! Output files. Every file carries the run configuration and the SHA-256 of its payload.
//!
//! JSON files gain top-level `run_config` and `content_hash` keys; the hash covers the compact
//! serialization of the object without those two keys. CSV files start with two `#` comment lines
//! (`# run_config: {…}` and `# content_hash: sha256:…`) and the hash covers everything after them.

use std::path::{Path, PathBuf};

use collective_rg::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

#[derive(Debug, Serialize)]
struct ManifestEntry {
    file: String,
    content_hash: String,
}

pub struct OutputDir {
    dir: PathBuf,
    config: RunConfig,
    written: Vec<ManifestEntry>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::resource(format!("{}: {e}", path.display()))
}

impl OutputDir {
    pub fn create(dir: &Path, config: RunConfig) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(OutputDir { dir: dir.to_path_buf(), config, written: Vec::new() })
    }

    fn write(&mut self, name: &str, text: &str, hash: String) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        log::info!("wrote {}", path.display());
        self.written.push(ManifestEntry { file: name.to_string(), content_hash: hash });
        Ok(path)
    }

    pub fn json<S: Serialize>(&mut self, name: &str, payload: &S) -> Result<PathBuf> {
        let mut value = serde_json::to_value(payload).map_err(|e| Error::numeric(e.to_string()))?;
        let hash = sha256_hex(value.to_string().as_bytes());
        let obj = match value.as_object_mut() {
            Some(o) => o,
            None => return Err(Error::numeric(format!("{name}: payload is not a JSON object"))),
        };
        obj.insert("run_config".into(), serde_json::to_value(&self.config).expect("config serializes"));
        obj.insert("content_hash".into(), serde_json::Value::String(hash.clone()));
        let text = serde_json::to_string_pretty(&value).expect("value serializes");
        self.write(name, &text, hash)
    }

    pub fn csv(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let hash = sha256_hex(body.as_bytes());
        let cfg = serde_json::to_string(&self.config).expect("config serializes");
        let text = format!("# run_config: {cfg}\n# content_hash: {hash}\n{body}");
        self.write(name, &text, hash)
    }

    /// `manifest.json` listing every file written by this run.
    pub fn finish(mut self) -> Result<PathBuf> {
        let files = std::mem::take(&mut self.written);
        self.json("manifest.json", &serde_json::json!({ "files": files }))
    }
}

#[cfg(test)]
/// Recomputes the payload hash of a JSON output and compares it with the stored one.
pub fn verify_json(text: &str) -> Option<bool> {
    let mut v: serde_json::Value = serde_json::from_str(text).ok()?;
    let obj = v.as_object_mut()?;
    let stored = obj.remove("content_hash")?.as_str()?.to_string();
    obj.remove("run_config")?;
    Some(sha256_hex(v.to_string().as_bytes()) == stored)
}

#[cfg(test)]
/// Same for a CSV output.
pub fn verify_csv(text: &str) -> Option<bool> {
    let mut lines = text.splitn(3, '\n');
    lines.next()?.strip_prefix("# run_config: ")?;
    let stored = lines.next()?.strip_prefix("# content_hash: ")?.to_string();
    Some(sha256_hex(lines.next().unwrap_or("").as_bytes()) == stored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::Method;
    use collective_rg::LiouvParams;

    fn config() -> RunConfig {
        RunConfig {
            tool: "crg",
            version: "0",
            command: "test".into(),
            params: LiouvParams::new(3, 2, vec![-1.0, 0.0, 1.0], 1.0, 0.0, 0.5).unwrap(),
            method: Method::Ed,
            tol: None,
            jobs: 1,
            options: serde_json::Value::Null,
        }
    }

    #[test]
    fn hashes_survive_a_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), config()).unwrap();
        let j = out.json("a.json", &serde_json::json!({ "x": [1.5, 2.0], "name": "z" })).unwrap();
        let c = out.csv("b.csv", "re,im\n1,2\n").unwrap();
        let m = out.finish().unwrap();
        let text = std::fs::read_to_string(&j).unwrap();
        assert_eq!(verify_json(&text), Some(true));
        assert_eq!(verify_json(&text.replace("1.5", "1.25")), Some(false));
        assert_eq!(verify_json(&std::fs::read_to_string(&m).unwrap()), Some(true));
        let text = std::fs::read_to_string(&c).unwrap();
        assert_eq!(verify_csv(&text), Some(true));
        assert_eq!(verify_csv(&text.replace("1,2", "1,3")), Some(false));
    }
}
