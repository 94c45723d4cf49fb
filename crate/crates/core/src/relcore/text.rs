//! The `relation NAME ARITY DOMAIN ... end` text format.

use std::fmt::Write as _;
use std::path::Path;

use super::{Language, Relation};
use crate::{Error, Result};

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_num(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("expected {what}, found {tok:?}")))
}

/// Name, arity, domain, rows and header line of the block being read.
type OpenBlock = (String, usize, usize, Vec<Vec<u8>>, usize);

impl Language {
    /// Parses one or more `relation` blocks. An empty text yields an empty
    /// Boolean language.
    pub fn parse(text: &str) -> Result<Language> {
        let mut rels: Vec<Relation> = Vec::new();
        let mut open: Option<OpenBlock> = None;
        for (ln, raw) in text.lines().enumerate() {
            let ln = ln + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match (&mut open, toks[0]) {
                (None, "relation") => {
                    if toks.len() != 4 {
                        return Err(Error::parse(ln, "expected `relation NAME ARITY DOMAIN`"));
                    }
                    let name = toks[1];
                    if !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                        return Err(Error::parse(ln, format!("bad relation name {name:?}")));
                    }
                    let arity = parse_num(toks[2], ln, "arity")?;
                    let domain = parse_num(toks[3], ln, "domain size")?;
                    if arity == 0 {
                        return Err(Error::parse(ln, "arity must be positive"));
                    }
                    if !(2..=64).contains(&domain) {
                        return Err(Error::parse(ln, "domain size must be in 2..=64"));
                    }
                    open = Some((name.to_string(), arity, domain, Vec::new(), ln));
                }
                (None, tok) => {
                    return Err(Error::parse(ln, format!("expected `relation`, found {tok:?}")));
                }
                (Some(_), "end") => {
                    let (name, arity, domain, tuples, start) = open.take().unwrap();
                    let n = tuples.len();
                    let r = Relation::new(arity, domain, tuples)?.named(name.clone());
                    if r.len() != n {
                        return Err(Error::parse(start, format!("duplicate tuple in {name}")));
                    }
                    if name == "Eq" || rels.iter().any(|x| x.name() == Some(name.as_str())) {
                        return Err(Error::parse(start, format!("duplicate relation name {name}")));
                    }
                    if let Some(first) = rels.first() {
                        if first.domain() != domain {
                            return Err(Error::parse(start, "relations over different domains"));
                        }
                    }
                    rels.push(r);
                }
                (Some((_, arity, domain, tuples, _)), _) => {
                    if toks.len() != *arity {
                        return Err(Error::parse(ln, format!("tuple needs {arity} entries")));
                    }
                    let t = toks
                        .iter()
                        .map(|tok| {
                            let v = parse_num(tok, ln, "value")?;
                            if v >= *domain {
                                return Err(Error::parse(ln, format!("value {v} outside domain")));
                            }
                            Ok(v as u8)
                        })
                        .collect::<Result<Vec<u8>>>()?;
                    tuples.push(t);
                }
            }
        }
        if let Some((name, ..)) = open {
            return Err(Error::parse(text.lines().count(), format!("relation {name} lacks `end`")));
        }
        let domain = rels.first().map_or(2, Relation::domain);
        Language::from_relations(domain, rels)
    }

    pub fn from_file(path: &Path) -> Result<Language> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Language::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.relations {
            out.push_str(&r.to_text());
        }
        out
    }
}

impl Relation {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "relation {} {} {}", self.display_name(), self.arity, self.domain);
        for t in &self.tuples {
            let row: Vec<String> = t.iter().map(u8::to_string).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out.push_str("end\n");
        out
    }

    /// Parses a single relation block.
    pub fn parse(text: &str) -> Result<Relation> {
        let lang = Language::parse(text)?;
        match lang.relations() {
            [r] => Ok(r.clone()),
            rs => Err(Error::parse(1, format!("expected one relation, found {}", rs.len()))),
        }
    }
}
