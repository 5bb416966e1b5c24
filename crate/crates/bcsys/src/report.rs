//! Per-law check reports shared by every validator.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// The law was checked and an instance violated it.
    Fail(String),
    /// Structure required by the law is missing, so nothing could be checked.
    Absent(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawResult {
    pub law: String,
    pub status: Status,
    /// Instances evaluated.
    pub checked: u64,
    /// Instances skipped because some side fell outside the truncation.
    pub skipped: u64,
}

impl LawResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub entries: Vec<LawResult>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: LawResult) {
        self.entries.push(r);
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }

    /// Appends `other` with every law name prefixed.
    pub fn extend_prefixed(&mut self, prefix: &str, other: Report) {
        for mut e in other.entries {
            e.law = format!("{prefix}{}", e.law);
            self.entries.push(e);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(LawResult::passed)
    }

    /// Names of laws that failed or could not be checked.
    pub fn failures(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| !e.passed())
            .map(|e| e.law.as_str())
            .collect()
    }

    pub fn get(&self, law: &str) -> Option<&LawResult> {
        self.entries.iter().find(|e| e.law == law)
    }

    pub fn status(&self, law: &str) -> Option<&Status> {
        self.get(law).map(|e| &e.status)
    }

    /// Folds the whole report into one entry, keeping the first non-pass witness.
    pub fn summarize(&self, law: &str) -> LawResult {
        let checked = self.entries.iter().map(|e| e.checked).sum();
        let skipped = self.entries.iter().map(|e| e.skipped).sum();
        let status = match self.entries.iter().find(|e| !e.passed()) {
            None => Status::Pass,
            Some(e) => match &e.status {
                Status::Fail(w) => Status::Fail(format!("{}: {w}", e.law)),
                Status::Absent(w) => Status::Absent(format!("{}: {w}", e.law)),
                Status::Pass => unreachable!(),
            },
        };
        LawResult { law: law.to_string(), status, checked, skipped }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let tag = match &e.status {
                Status::Pass => "PASS  ".to_string(),
                Status::Fail(_) => "FAIL  ".to_string(),
                Status::Absent(_) => "ABSENT".to_string(),
            };
            write!(f, "{tag} {:<40} checked={} skipped={}", e.law, e.checked, e.skipped)?;
            match &e.status {
                Status::Fail(w) | Status::Absent(w) => writeln!(f, "  -- {w}")?,
                Status::Pass => writeln!(f)?,
            }
        }
        Ok(())
    }
}

/// Accumulates instances of a single law.
#[derive(Debug)]
pub struct Check {
    law: String,
    checked: u64,
    skipped: u64,
    witness: Option<String>,
}

impl Check {
    pub fn new(law: impl Into<String>) -> Self {
        Check { law: law.into(), checked: 0, skipped: 0, witness: None }
    }

    pub fn ok(&mut self) {
        self.checked += 1;
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    /// Records one instance; only the first failing witness is kept.
    pub fn test(&mut self, cond: bool, witness: impl FnOnce() -> String) -> bool {
        self.checked += 1;
        if !cond && self.witness.is_none() {
            self.witness = Some(witness());
        }
        cond
    }

    pub fn fail(&mut self, witness: impl FnOnce() -> String) {
        self.test(false, witness);
    }

    /// Records an instance whose two sides may be undefined; undefined counts as a skip.
    pub fn test_eq<T: PartialEq>(
        &mut self,
        lhs: Option<T>,
        rhs: Option<T>,
        witness: impl FnOnce() -> String,
    ) -> bool {
        match (lhs, rhs) {
            (Some(a), Some(b)) => self.test(a == b, witness),
            _ => {
                self.skip();
                true
            }
        }
    }

    pub fn failed(&self) -> bool {
        self.witness.is_some()
    }

    pub fn finish(self) -> LawResult {
        let status = match self.witness {
            None => Status::Pass,
            Some(w) => Status::Fail(w),
        };
        LawResult { law: self.law, status, checked: self.checked, skipped: self.skipped }
    }

    pub fn finish_into(self, report: &mut Report) {
        report.push(self.finish());
    }
}

pub fn absent(law: impl Into<String>, why: impl Into<String>) -> LawResult {
    LawResult { law: law.into(), status: Status::Absent(why.into()), checked: 0, skipped: 0 }
}
