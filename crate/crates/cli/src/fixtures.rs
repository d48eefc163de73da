//! The packaged maritime case-study documents.

use crate::document::{parse_dkb, Document};

pub const NAMES: &[&str] = &["ship-full", "ship-tables-only", "ship-literal-phi"];

pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "ship-full" => include_str!("../fixtures/ship-full.dkb"),
        "ship-tables-only" => include_str!("../fixtures/ship-tables-only.dkb"),
        "ship-literal-phi" => include_str!("../fixtures/ship-literal-phi.dkb"),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown fixture {0}; expected one of: ship-full, ship-tables-only, ship-literal-phi")]
pub struct UnknownFixture(pub String);

pub fn load_fixture(name: &str) -> Result<Document, UnknownFixture> {
    let text = source(name).ok_or_else(|| UnknownFixture(name.into()))?;
    Ok(parse_dkb(text).unwrap_or_else(|e| panic!("fixture {name} does not parse:\n{e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        for n in NAMES {
            let d = load_fixture(n).unwrap();
            assert_eq!(d.dkb.drg.tables.len(), 2);
            assert_eq!(d.dkb.drg.flows.len(), 8);
            assert!(d.template("phi").is_some());
        }
        let full = load_fixture("ship-full").unwrap();
        assert_eq!(full.dkb.background.len(), 10);
        assert!(load_fixture("ship-tables-only").unwrap().dkb.background.is_empty());
        assert!(load_fixture("ship").is_err());
    }
}
