use std::fmt::Write as _;
use std::path::PathBuf;

use minfib::format::{morphism_text, print_morphism_text, print_presheaf, Endpoint};
use minfib::minimal::Certificate;
use minfib::{Error, Presheaf, PresheafMap, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass = 0,
    Fail = 1,
    Usage = 2,
    BoundaryLimited = 3,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Usage => "error",
            Status::BoundaryLimited => "boundary-limited",
        }
    }
}

/// Outcome of one command. Everything but `elapsed` is deterministic.
#[derive(Debug, Clone)]
pub struct Report {
    pub verb: String,
    pub inputs: Vec<String>,
    pub truncation: Option<usize>,
    pub status: Status,
    pub fields: Vec<(String, String)>,
    pub witnesses: Vec<String>,
    pub certificate: Vec<String>,
    pub outputs: Vec<String>,
}

impl Report {
    pub fn new(verb: &str, inputs: &[String]) -> Report {
        Report {
            verb: verb.to_string(),
            inputs: inputs.to_vec(),
            truncation: None,
            status: Status::Pass,
            fields: Vec::new(),
            witnesses: Vec::new(),
            certificate: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn field(&mut self, key: &str, value: impl ToString) {
        self.fields.push((key.to_string(), value.to_string()));
    }

    pub fn witness(&mut self, w: impl ToString) {
        self.witnesses.push(w.to_string());
    }

    pub fn fail(&mut self, w: impl ToString) {
        self.status = self.status.max(Status::Fail);
        self.witness(w);
    }

    pub fn certify(&mut self, c: &Certificate) {
        for check in &c.checks {
            let mark = if check.passed { "pass" } else { "FAIL" };
            self.certificate.push(format!("[{mark}] {}: {}", check.name, check.detail));
            if !check.passed {
                self.status = self.status.max(Status::Fail);
            }
        }
        for note in &c.notes {
            self.certificate.push(format!("note: {note}"));
        }
    }

    /// Records a library error as the verdict.
    pub fn error(&mut self, e: &Error) {
        let status = match e {
            Error::BoundaryLimited(_) => Status::BoundaryLimited,
            Error::Parse { .. }
            | Error::Io { .. }
            | Error::UnknownShape(_)
            | Error::Domain(_)
            | Error::Functoriality { .. }
            | Error::TruncationMismatch(..)
            | Error::KindMismatch(..) => Status::Usage,
            _ => Status::Fail,
        };
        self.status = self.status.max(status);
        self.witness(e);
    }

    /// The certified part of the report.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "verb: {}", self.verb).unwrap();
        for i in &self.inputs {
            writeln!(out, "input: {i}").unwrap();
        }
        if let Some(t) = self.truncation {
            writeln!(out, "truncation: {t}").unwrap();
        }
        writeln!(out, "verdict: {}", self.status.label()).unwrap();
        for (k, v) in &self.fields {
            writeln!(out, "{k}: {v}").unwrap();
        }
        for (title, lines) in [("witness", &self.witnesses), ("certificate", &self.certificate), ("outputs", &self.outputs)] {
            if !lines.is_empty() {
                writeln!(out, "{title}:").unwrap();
                for l in lines {
                    writeln!(out, "  {l}").unwrap();
                }
            }
        }
        out
    }
}

/// Files written under `--out`.
pub struct Artifacts {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: Option<PathBuf>) -> Result<Artifacts> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(|e| Error::Io { path: d.display().to_string(), message: e.to_string() })?;
        }
        Ok(Artifacts { dir, written: Vec::new() })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        if let Some(d) = &self.dir {
            let path = d.join(name);
            std::fs::write(&path, text).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn object(&mut self, name: &str, x: &Presheaf) -> Result<Endpoint> {
        let file = format!("{name}.psh");
        if self.dir.is_some() {
            self.write(&file, &print_presheaf(x)?)?;
        }
        Ok(Endpoint::File(file))
    }

    pub fn map(&mut self, name: &str, f: &PresheafMap, source: Endpoint, target: Endpoint) -> Result<()> {
        if self.dir.is_some() {
            let text = print_morphism_text(&morphism_text(f, source, target)?);
            self.write(&format!("{name}.map"), &text)?;
        }
        Ok(())
    }

    /// Writes both ends and the map.
    pub fn map_with_ends(&mut self, name: &str, f: &PresheafMap, source: &str, target: &str) -> Result<()> {
        let s = self.object(source, &f.source)?;
        let t = self.object(target, &f.target)?;
        self.map(name, f, s, t)
    }

    pub fn finish(self, report: &mut Report) -> Result<()> {
        if self.dir.is_some() {
            let mut written = self.written;
            written.sort();
            written.dedup();
            report.outputs = written;
            let text = report.render();
            let mut me = Artifacts { dir: self.dir, written: Vec::new() };
            me.write("report.txt", &text)?;
        }
        Ok(())
    }
}
