use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use sepkit::error::{Error, Result};
use sepkit::group::{Element, FreeWord, MarkedGroup};

use crate::schema;

/// Group descriptors: `f2`, `finf`, `bs2`, and `left*right` for free
/// products (left-associated, so `f1*f1*f1` is `(f1*f1)*f1`).
pub fn parse_group(text: &str) -> Result<MarkedGroup> {
    let text = text.trim();
    if let Some((left, right)) = text.rsplit_once('*') {
        let g = MarkedGroup::free_product(parse_group(left)?, parse_group(right)?);
        g.validate()?;
        return Ok(g);
    }
    let lower = text.to_ascii_lowercase();
    let bad = || Error::Parse(format!("unknown group {text:?}; expected f<n>, finf, bs<n> or g*h"));
    let g = if lower == "finf" || lower == "f_inf" {
        MarkedGroup::FreeInfinite
    } else if let Some(n) = lower.strip_prefix("bs") {
        MarkedGroup::bs(n.parse().map_err(|_| bad())?)
    } else if let Some(n) = lower.strip_prefix('f') {
        MarkedGroup::free(n.parse().map_err(|_| bad())?)
    } else {
        return Err(bad());
    };
    g.validate()?;
    Ok(g)
}

/// Comma separated words; an empty string is the empty list.
pub fn parse_words(group: &MarkedGroup, text: &str) -> Result<Vec<Element>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    group.parse_list(text)
}

pub fn free_words(group: &MarkedGroup, text: &str) -> Result<Vec<FreeWord>> {
    parse_words(group, text)?
        .into_iter()
        .map(|e| {
            e.as_free()
                .cloned()
                .ok_or_else(|| Error::domain(format!("{} is not a free group", group.describe())))
        })
        .collect()
}

pub fn free_rank(group: &MarkedGroup) -> Result<u32> {
    match group {
        MarkedGroup::Free { rank } => Ok(*rank),
        other => Err(Error::domain(format!("expected a free group of finite rank, got {}", other.describe()))),
    }
}

pub fn parse_points(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("not a point: {s:?}"))))
        .collect()
}

/// Reads `path`, checks it against the shipped schema for `kind`, then
/// deserializes it.
pub fn read_json<T: DeserializeOwned>(path: &Path, kind: schema::Kind) -> Result<T> {
    let fail = |e: String| Error::Parse(format!("{}: {e}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| fail(e.to_string()))?;
    schema::validate(kind, &value).map_err(fail)?;
    serde_json::from_value(value).map_err(|e| fail(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_descriptors() {
        assert_eq!(parse_group("f2").unwrap(), MarkedGroup::free(2));
        assert_eq!(parse_group("F3").unwrap(), MarkedGroup::free(3));
        assert_eq!(parse_group("finf").unwrap(), MarkedGroup::FreeInfinite);
        assert_eq!(parse_group("bs2").unwrap(), MarkedGroup::bs(2));
        assert_eq!(
            parse_group("f1*bs3").unwrap(),
            MarkedGroup::free_product(MarkedGroup::free(1), MarkedGroup::bs(3))
        );
        assert!(parse_group("z").is_err());
        assert!(parse_group("bsx").is_err());
    }

    #[test]
    fn points_and_words() {
        assert_eq!(parse_points(" 0, 3,7 ").unwrap(), vec![0, 3, 7]);
        assert!(parse_points("1,-2").is_err());
        let g = MarkedGroup::free(2);
        assert!(parse_words(&g, "").unwrap().is_empty());
        assert_eq!(free_words(&g, "aa, b").unwrap().len(), 2);
        assert!(free_words(&MarkedGroup::bs(2), "s").is_err());
    }
}
