//! Output directory handling: lockfile, file writes, manifest.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde_json::Value;

/// Version of the CSV headers and JSON layouts written by this tool.
pub const SCHEMA: &str = "els-output/1";

pub const LOCKFILE: &str = ".els.lock";

/// Exclusive claim on an output directory, released on drop.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(LOCKFILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                bail!("{} is in use by another run (remove {} if it is stale)", dir.display(), path.display())
            }
            Err(e) => Err(e).with_context(|| format!("creating {}", path.display())),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Rounds every float to 12 significant digits so JSON matches the CSVs.
pub fn round12(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.iter().map(round12).collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, v)| (k.clone(), round12(v))).collect()),
        other => other.clone(),
    }
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&round12(v)).expect("values serialize");
    s.push('\n');
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    let mut f = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    f.write_all(contents.as_bytes()).with_context(|| format!("writing {}", path.display()))
}
