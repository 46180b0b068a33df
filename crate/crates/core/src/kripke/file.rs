//! Line-based model files:
//!
//! ```text
//! # comment
//! worlds 3
//! rel 0 1
//! val p1 0 2
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::{Frame, KripkeError, Model, World};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `worlds` line")]
    MissingWorlds,
    #[error(transparent)]
    Invalid(#[from] KripkeError),
}

fn syntax(line: usize, message: impl Into<String>) -> ModelFileError {
    ModelFileError::Syntax {
        line,
        message: message.into(),
    }
}

impl Model {
    /// Serializes the model. The output is canonical: edges in ascending
    /// order, then one `val` line per variable true somewhere.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "worlds {}", self.world_count()).unwrap();
        for (a, b) in self.frame().relation() {
            writeln!(out, "rel {a} {b}").unwrap();
        }
        for (var, worlds) in self.valuation() {
            write!(out, "val p{var}").unwrap();
            for w in worlds {
                write!(out, " {w}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses a model file. No closure is applied to the relation.
    pub fn parse_file(text: &str) -> Result<Model, ModelFileError> {
        let mut world_count = None;
        let mut relation = Vec::new();
        let mut valuation: BTreeMap<u32, BTreeSet<World>> = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut words = line.split_whitespace();
            let keyword = words.next().unwrap();
            let rest: Vec<&str> = words.collect();
            let index = |s: &str| -> Result<usize, ModelFileError> {
                s.parse()
                    .map_err(|_| syntax(line_no, format!("expected a world index, found `{s}`")))
            };
            match keyword {
                "worlds" => {
                    if world_count.is_some() {
                        return Err(syntax(line_no, "duplicate `worlds` line"));
                    }
                    let [n] = rest.as_slice() else {
                        return Err(syntax(line_no, "`worlds` takes exactly one count"));
                    };
                    world_count = Some(index(n)?);
                }
                "rel" => {
                    let [a, b] = rest.as_slice() else {
                        return Err(syntax(line_no, "`rel` takes exactly two world indices"));
                    };
                    relation.push((index(a)?, index(b)?));
                }
                "val" => {
                    let Some((var, worlds)) = rest.split_first() else {
                        return Err(syntax(line_no, "`val` needs a variable"));
                    };
                    let var: u32 = var
                        .strip_prefix('p')
                        .and_then(|d| d.parse().ok())
                        .filter(|&v| v >= 1)
                        .ok_or_else(|| syntax(line_no, format!("bad variable `{var}`")))?;
                    let entry = valuation.entry(var).or_default();
                    for w in worlds {
                        entry.insert(index(w)?);
                    }
                }
                other => return Err(syntax(line_no, format!("unknown directive `{other}`"))),
            }
        }
        let world_count = world_count.ok_or(ModelFileError::MissingWorlds)?;
        let frame = Frame::new(world_count, relation)?;
        Ok(Model::new(frame, valuation)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_output() {
        let frame = Frame::new(2, [(1, 0), (0, 1)]).unwrap();
        let m = Model::new(frame, [(2, [1].into()), (1, [0, 1].into()), (3, BTreeSet::new())]).unwrap();
        assert_eq!(
            m.to_file_string(),
            "worlds 2\nrel 0 1\nrel 1 0\nval p1 0 1\nval p2 1\n"
        );
    }

    #[test]
    fn parses_with_comments() {
        let text = "# root 0\nworlds 2\n\nrel 0 1\nval p1 0\n  # trailing\nval p1 1\nval p4\n";
        let m = Model::parse_file(text).unwrap();
        assert_eq!(m.world_count(), 2);
        assert!(m.frame().has_edge(0, 1));
        assert_eq!(m.truth_set(1), [0, 1].into());
        assert!(m.truth_set(4).is_empty());
        assert_eq!(Model::parse_file(&m.to_file_string()).unwrap(), m);
    }

    #[test]
    fn rejects_bad_files() {
        assert_eq!(Model::parse_file("rel 0 1\n"), Err(ModelFileError::MissingWorlds));
        assert!(matches!(
            Model::parse_file("worlds 1\nfoo\n"),
            Err(ModelFileError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            Model::parse_file("worlds 1\nrel 0 1\n"),
            Err(ModelFileError::Invalid(KripkeError::WorldOutOfRange { .. }))
        ));
        assert!(Model::parse_file("worlds 0\n").is_err());
        assert!(Model::parse_file("worlds 1\nval q1 0\n").is_err());
        assert!(Model::parse_file("worlds 1\nval p0 0\n").is_err());
        assert!(Model::parse_file("worlds 1\nworlds 1\n").is_err());
        assert!(Model::parse_file("worlds 1\nrel 0\n").is_err());
    }
}
