//! Model files: UTF-8, one `key = value` per line, `#` starts a comment.
//!
//! ```text
//! # gamma = 2 family
//! kind = birth-death
//! b0 = 1
//! b = "n^2"
//! a = "n^2"
//! a[3] = 4.5        # optional per-index override
//! ```
//!
//! Diffusions use `kind = diffusion` with `a` and `b` expressions in `x`.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use super::{BirthDeathModel, DiffusionModel, ModelError, ParseError, RateExpression};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("line {line}: invalid expression: {source}")]
    Expression { line: usize, source: ParseError },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A loaded model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    BirthDeath(BirthDeathModel),
    Diffusion(DiffusionModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::BirthDeath(_) => "birth-death",
            Model::Diffusion(_) => "diffusion",
        }
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, FileError> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

struct Entry {
    value: String,
    line: usize,
}

pub fn parse_model(text: &str) -> Result<Model, FileError> {
    let mut keys: BTreeMap<String, Entry> = BTreeMap::new();
    let mut birth_overrides = BTreeMap::new();
    let mut death_overrides = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(FileError::Format {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(FileError::Format {
                line,
                msg: format!("empty value for `{key}`"),
            });
        }
        if let Some((name, index)) = parse_indexed_key(key, line)? {
            let v = parse_number(value, line)?;
            let target = if name == "a" {
                &mut death_overrides
            } else {
                &mut birth_overrides
            };
            if target.insert(index, v).is_some() {
                return Err(FileError::Format {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            continue;
        }
        if !matches!(key, "kind" | "b0" | "a" | "b") {
            return Err(FileError::Format {
                line,
                msg: format!("unknown key `{key}`"),
            });
        }
        let entry = Entry {
            value: value.to_string(),
            line,
        };
        if keys.insert(key.to_string(), entry).is_some() {
            return Err(FileError::Format {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
    }

    let kind = keys.get("kind").ok_or(FileError::MissingKey("kind"))?;
    match unquote(&kind.value) {
        "birth-death" => {
            let b0 = keys.get("b0").ok_or(FileError::MissingKey("b0"))?;
            let b0 = parse_number(&b0.value, b0.line)?;
            let birth = expression(&keys, "b", "n")?;
            let death = expression(&keys, "a", "n")?;
            if birth_overrides.contains_key(&0) {
                return Err(FileError::Format {
                    line: 0,
                    msg: "use the `b0` key instead of `b[0]`".into(),
                });
            }
            Ok(Model::BirthDeath(BirthDeathModel::with_overrides(
                b0,
                birth,
                death,
                birth_overrides,
                death_overrides,
            )?))
        }
        "diffusion" => {
            if let Some(e) = keys.get("b0") {
                return Err(FileError::Format {
                    line: e.line,
                    msg: "`b0` is only valid for birth-death models".into(),
                });
            }
            if !birth_overrides.is_empty() || !death_overrides.is_empty() {
                return Err(FileError::Format {
                    line: 0,
                    msg: "indexed overrides are only valid for birth-death models".into(),
                });
            }
            let a = expression(&keys, "a", "x")?;
            let b = expression(&keys, "b", "x")?;
            Ok(Model::Diffusion(DiffusionModel::new(a, b)?))
        }
        other => Err(FileError::Format {
            line: kind.line,
            msg: format!("unknown kind `{other}` (expected `birth-death` or `diffusion`)"),
        }),
    }
}

fn strip_comment(line: &str) -> &str {
    // `#` inside a quoted expression is not a comment, but the grammar has no `#` anyway.
    let mut in_quote = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quote = !in_quote,
            '#' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

fn parse_indexed_key(key: &str, line: usize) -> Result<Option<(&str, usize)>, FileError> {
    let Some(open) = key.find('[') else {
        return Ok(None);
    };
    let name = key[..open].trim();
    let rest = &key[open + 1..];
    let bad = || FileError::Format {
        line,
        msg: format!("malformed indexed key `{key}`"),
    };
    let close = rest.find(']').ok_or_else(bad)?;
    if !rest[close + 1..].trim().is_empty() || !matches!(name, "a" | "b") {
        return Err(bad());
    }
    let index = rest[..close].trim().parse::<usize>().map_err(|_| bad())?;
    Ok(Some((name, index)))
}

fn parse_number(v: &str, line: usize) -> Result<f64, FileError> {
    unquote(v).parse::<f64>().map_err(|_| FileError::Format {
        line,
        msg: format!("expected a decimal number, got `{v}`"),
    })
}

fn expression(
    keys: &BTreeMap<String, Entry>,
    key: &'static str,
    var: &str,
) -> Result<RateExpression, FileError> {
    let e = keys.get(key).ok_or(FileError::MissingKey(key))?;
    let v = e.value.trim();
    if !(v.len() >= 2 && v.starts_with('"') && v.ends_with('"')) {
        return Err(FileError::Format {
            line: e.line,
            msg: format!("value of `{key}` must be a quoted expression"),
        });
    }
    RateExpression::parse(unquote(v), var).map_err(|source| FileError::Expression {
        line: e.line,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_two_file() {
        let m = parse_model("kind = birth-death\nb0 = 1\nb = \"n^2\"\na = \"n^2\"\n").unwrap();
        let Model::BirthDeath(m) = m else { panic!() };
        assert_eq!(m, BirthDeathModel::from_strs(1.0, "n^2", "n^2").unwrap());
    }

    #[test]
    fn diffusion_file_with_comments() {
        let text = "# OU-type\nkind = diffusion   # trailing\n\na = \"1\"\nb = \"-x\"\n";
        let Model::Diffusion(m) = parse_model(text).unwrap() else {
            panic!()
        };
        assert_eq!(m.drift(2.0).unwrap(), -2.0);
    }

    #[test]
    fn overrides_parsed() {
        let text = "kind = birth-death\nb0 = 2\nb = \"1\"\na = \"2\"\na[3] = 7\nb[2] = 0.5\n";
        let Model::BirthDeath(m) = parse_model(text).unwrap() else {
            panic!()
        };
        assert_eq!(m.death(3).unwrap(), 7.0);
        assert_eq!(m.birth(2).unwrap(), 0.5);
        assert_eq!(m.birth(0).unwrap(), 2.0);
    }

    #[test]
    fn error_paths() {
        let e = parse_model("kind = birth-death\nb0 = 1\nb = \"n^2\"\na = \"0\"\n").unwrap_err();
        assert!(matches!(
            e,
            FileError::Model(ModelError::DeathNonPositive { index: 1, .. })
        ));
        let e = parse_model("kind = birth-death\nb0 = 1\nb = \"n^2\"\n").unwrap_err();
        assert!(matches!(e, FileError::MissingKey("a")));
        let e = parse_model("kind = birth-death\nb0 1\n").unwrap_err();
        assert!(matches!(e, FileError::Format { line: 2, .. }));
        let e = parse_model("kind = diffusion\na = \"1\"\nb = \"-y\"\n").unwrap_err();
        assert!(matches!(e, FileError::Expression { line: 3, .. }));
        let e = parse_model("kind = markov\n").unwrap_err();
        assert!(matches!(e, FileError::Format { line: 1, .. }));
        let e = parse_model("kind = diffusion\na = 1\nb = \"0\"\n").unwrap_err();
        assert!(matches!(e, FileError::Format { line: 2, .. }));
        let e = parse_model("kind = diffusion\nfoo = 1\n").unwrap_err();
        assert!(matches!(e, FileError::Format { line: 2, .. }));
        let e = parse_model("kind = birth-death\nb0 = 1\nb0 = 2\n").unwrap_err();
        assert!(matches!(e, FileError::Format { line: 3, .. }));
    }
}
