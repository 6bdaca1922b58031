//! Report assembly.  A report is a sequence of `key = value` lines in
//! insertion order; commands build them deterministically so identical runs
//! produce identical bytes.

use std::fmt::Display;

pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            lines: vec![format!("command = {command}")],
        }
    }

    pub fn kv(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push(format!("{key} = {value}"));
        self
    }

    pub fn raw(&mut self, line: impl Into<String>) -> &mut Self {
        self.lines.push(line.into());
        self
    }

    pub fn finish(self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}
