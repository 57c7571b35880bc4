//! Instance files: one `id x y role [cost]` record per line, or a JSON mirror
//! `{"sites": [{"id", "x", "y", "role", "cost"}]}`.
//!
//! Ids must be unique and cover `0..n`; records may appear in any order.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use udgfl_core::{FLInstance, Site};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("ids must be unique and cover 0..{n}: {msg}")]
    Ids { n: usize, msg: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Instance(#[from] udgfl_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Client,
    Facility,
    Both,
    None,
}

impl Role {
    pub fn has_facility(self) -> bool {
        matches!(self, Role::Facility | Role::Both)
    }

    pub fn has_client(self) -> bool {
        matches!(self, Role::Client | Role::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Client => "client",
            Role::Facility => "facility",
            Role::Both => "both",
            Role::None => "none",
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "client" => Ok(Role::Client),
            "facility" => Ok(Role::Facility),
            "both" => Ok(Role::Both),
            "none" => Ok(Role::None),
            _ => Err(format!("unknown role `{}`", s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

impl SiteRecord {
    pub fn site(&self) -> Site {
        Site {
            x: self.x,
            y: self.y,
            client: self.role.has_client(),
            facility: self.cost,
        }
    }

    fn check(&self) -> Result<(), String> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err("coordinates must be finite".into());
        }
        match (self.role.has_facility(), self.cost) {
            (true, None) => Err(format!("role {} requires a cost", self.role.as_str())),
            (false, Some(_)) => Err(format!("role {} takes no cost", self.role.as_str())),
            (true, Some(c)) if !(c >= 0.0 && c.is_finite()) => Err(format!("invalid opening cost {}", c)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub sites: Vec<SiteRecord>,
}

/// Parses the line format.
pub fn parse_text(text: &str) -> Result<Vec<SiteRecord>, FormatError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| FormatError::Line { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(4..=5).contains(&fields.len()) {
            return Err(err(format!("expected `id x y role [cost]`, got {} fields", fields.len())));
        }
        let num = |s: &str, what: &str| s.parse::<f64>().map_err(|e| err(format!("bad {} `{}`: {}", what, s, e)));
        let rec = SiteRecord {
            id: fields[0].parse().map_err(|e| err(format!("bad id `{}`: {}", fields[0], e)))?,
            x: num(fields[1], "x")?,
            y: num(fields[2], "y")?,
            role: fields[3].parse().map_err(err)?,
            cost: fields.get(4).map(|s| num(s, "cost")).transpose()?,
        };
        rec.check().map_err(err)?;
        out.push(rec);
    }
    normalize(out)
}

/// Parses the JSON mirror.
pub fn parse_json(text: &str) -> Result<Vec<SiteRecord>, FormatError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    for r in &file.sites {
        r.check().map_err(|msg| FormatError::Line { line: r.id, msg })?;
    }
    normalize(file.sites)
}

/// JSON when the first non-blank character is `{`, line format otherwise.
pub fn parse_instance(text: &str) -> Result<Vec<SiteRecord>, FormatError> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text)
    }
}

/// Sorts by id and checks ids are exactly `0..n`.
fn normalize(mut recs: Vec<SiteRecord>) -> Result<Vec<SiteRecord>, FormatError> {
    recs.sort_by_key(|r| r.id);
    let n = recs.len();
    for (i, r) in recs.iter().enumerate() {
        if r.id != i {
            let msg = if i > 0 && recs[i - 1].id == r.id {
                format!("id {} repeated", r.id)
            } else {
                format!("id {} missing", i)
            };
            return Err(FormatError::Ids { n, msg });
        }
    }
    Ok(recs)
}

pub fn to_text(recs: &[SiteRecord]) -> String {
    let mut s = String::from("# id x y role cost\n");
    for r in recs {
        let _ = write!(s, "{} {} {} {}", r.id, r.x, r.y, r.role.as_str());
        if let Some(c) = r.cost {
            let _ = write!(s, " {}", c);
        }
        s.push('\n');
    }
    s
}

pub fn to_json(recs: &[SiteRecord]) -> String {
    serde_json::to_string_pretty(&InstanceFile { sites: recs.to_vec() }).expect("site records serialize")
}

/// Builds the instance; coincident sites are merged only with `merge`.
pub fn instance_from_records(recs: &[SiteRecord], merge: bool) -> Result<FLInstance, FormatError> {
    let sites: Vec<Site> = recs.iter().map(SiteRecord::site).collect();
    Ok(FLInstance::from_sites(&sites, merge)?)
}

pub fn load_instance(path: &Path, merge: bool) -> Result<FLInstance, FormatError> {
    let text = std::fs::read_to_string(path)?;
    instance_from_records(&parse_instance(&text)?, merge)
}
