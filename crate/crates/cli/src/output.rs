//! Output files with provenance stamps.

use std::path::{Path, PathBuf};

use qwalk::Result;
use serde_json::{json, Value};

pub const CLI_VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Output {
    dir: PathBuf,
    config_hash: String,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, config_hash: String) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config_hash,
            written: Vec::new(),
        })
    }

    pub fn provenance(&self) -> Value {
        json!({
            "config_hash": self.config_hash,
            "qwalk_cli": CLI_VERSION,
            "qwalk_core": qwalk::VERSION,
        })
    }

    fn stamp(&self, comment: &str) -> String {
        format!(
            "{comment} qwalk-cli {CLI_VERSION} qwalk-core {} config {}\n",
            qwalk::VERSION,
            self.config_hash
        )
    }

    fn put(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    /// CSV/TSV text with a leading `#` provenance line.
    pub fn table(&mut self, name: &str, body: &str) -> Result<()> {
        let text = self.stamp("#") + body;
        self.put(name, &text)
    }

    /// OpenQASM text; the provenance line goes after the version header.
    pub fn qasm(&mut self, name: &str, body: &str) -> Result<()> {
        let (head, rest) = body.split_once('\n').unwrap_or((body, ""));
        let text = format!("{head}\n{}{rest}", self.stamp("//"));
        self.put(name, &text)
    }

    pub fn markdown(&mut self, name: &str, body: &str) -> Result<()> {
        let stamp = self.stamp("<!--");
        let text = format!("{} -->\n{body}", stamp.trim_end());
        self.put(name, &text)
    }

    /// Pretty JSON; objects get a `provenance` member, anything else is wrapped.
    pub fn json(&mut self, name: &str, value: Value) -> Result<()> {
        let doc = match value {
            Value::Object(mut m) => {
                m.insert("provenance".into(), self.provenance());
                Value::Object(m)
            }
            other => json!({ "provenance": self.provenance(), "data": other }),
        };
        self.put(name, &(serde_json::to_string_pretty(&doc)? + "\n"))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
