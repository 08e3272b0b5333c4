//! Pass/fail certificates and deterministic text rendering shared by the
//! verification passes and the CLI.

#[derive(Debug, Clone)]
pub struct CertEntry {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// An ordered list of named checks.  Failures are entries, not errors, so a
/// report always covers every property it set out to test.
#[derive(Debug, Clone, Default)]
pub struct Certificate {
    pub title: String,
    pub entries: Vec<CertEntry>,
}

impl Certificate {
    pub fn new(title: &str) -> Certificate {
        Certificate {
            title: title.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.entries.push(CertEntry {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> Vec<&CertEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }

    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.title);
        for e in &self.entries {
            let status = if e.pass { "pass" } else { "FAIL" };
            if e.detail.is_empty() {
                out.push_str(&format!("  {}: {}\n", e.name, status));
            } else {
                out.push_str(&format!("  {}: {} ({})\n", e.name, status, e.detail));
            }
        }
        out.push_str(&format!(
            "  => {}\n",
            if self.all_pass() { "all checks pass" } else { "FAILURES present" }
        ));
        out
    }
}
