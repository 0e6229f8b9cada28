use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

const NAME_CAP: usize = 8;

/// Short ASCII relation name, stored inline so symbols stay `Copy`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolName([u8; NAME_CAP]);

impl SymbolName {
    pub fn new(name: &str) -> Result<Self, Error> {
        if name.is_empty() || name.len() > NAME_CAP {
            return Err(Error::invalid(format!(
                "symbol name `{name}` must have 1..={NAME_CAP} characters"
            )));
        }
        if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::invalid(format!(
                "symbol name `{name}` must be ASCII alphanumeric"
            )));
        }
        let mut buf = [0u8; NAME_CAP];
        buf[..name.len()].copy_from_slice(name.as_bytes());
        Ok(SymbolName(buf))
    }

    pub fn as_str(&self) -> &str {
        let len = self.0.iter().position(|&b| b == 0).unwrap_or(NAME_CAP);
        // constructed from validated ASCII
        std::str::from_utf8(&self.0[..len]).unwrap_or("?")
    }
}

impl fmt::Debug for SymbolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for SymbolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Orientation {
    Forward,
    Backward,
    Symmetric,
}

impl Orientation {
    pub fn dual(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Backward,
            Orientation::Backward => Orientation::Forward,
            Orientation::Symmetric => Orientation::Symmetric,
        }
    }
}

/// A relation symbol together with the direction it is read in, e.g. `R+`,
/// `R-`, or a symmetric `X`. `R+(a,b)` holds exactly when `R-(b,a)` does.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrientedSymbol {
    pub base: SymbolName,
    pub orientation: Orientation,
}

impl OrientedSymbol {
    pub fn new(base: SymbolName, orientation: Orientation) -> Self {
        OrientedSymbol { base, orientation }
    }

    pub fn dual(self) -> Self {
        OrientedSymbol {
            base: self.base,
            orientation: self.orientation.dual(),
        }
    }

    pub fn is_symmetric(self) -> bool {
        self.orientation == Orientation::Symmetric
    }

    /// Same relation up to orientation.
    pub fn same_class(self, other: OrientedSymbol) -> bool {
        self.base == other.base
    }
}

impl fmt::Display for OrientedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.orientation {
            Orientation::Forward => write!(f, "{}+", self.base),
            Orientation::Backward => write!(f, "{}-", self.base),
            Orientation::Symmetric => write!(f, "{}", self.base),
        }
    }
}

impl fmt::Debug for OrientedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for OrientedSymbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let (name, orientation) = if let Some(n) = s.strip_suffix('+') {
            (n, Orientation::Forward)
        } else if let Some(n) = s.strip_suffix('-') {
            (n, Orientation::Backward)
        } else {
            (s, Orientation::Symmetric)
        };
        Ok(OrientedSymbol::new(SymbolName::new(name)?, orientation))
    }
}

impl Serialize for OrientedSymbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OrientedSymbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A binary, irreflexive relational language. Asymmetric symbols contribute
/// two oriented symbols (`R+`, `R-`), symmetric ones a single one.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Language {
    symbols: Vec<(SymbolName, bool)>,
    oriented: Vec<OrientedSymbol>,
}

impl Language {
    pub fn new<I, S>(symbols: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (S, bool)>,
        S: AsRef<str>,
    {
        let mut out: Vec<(SymbolName, bool)> = Vec::new();
        for (name, asym) in symbols {
            let name = SymbolName::new(name.as_ref())?;
            if out.iter().any(|(n, _)| *n == name) {
                return Err(Error::invalid(format!("duplicate symbol `{name}`")));
            }
            out.push((name, asym));
        }
        if out.is_empty() {
            return Err(Error::invalid("language has no symbols"));
        }
        let mut oriented = Vec::new();
        for &(name, asym) in &out {
            if asym {
                oriented.push(OrientedSymbol::new(name, Orientation::Forward));
                oriented.push(OrientedSymbol::new(name, Orientation::Backward));
            } else {
                oriented.push(OrientedSymbol::new(name, Orientation::Symmetric));
            }
        }
        if oriented.len() > 16 {
            return Err(Error::invalid("at most 16 oriented symbols are supported"));
        }
        Ok(Language {
            symbols: out,
            oriented,
        })
    }

    /// `{R±, G±}`, the language of the 2-multi-tournament examples.
    pub fn two_asymmetric() -> Self {
        Language::new([("R", true), ("G", true)]).expect("static language")
    }

    pub fn symbols(&self) -> &[(SymbolName, bool)] {
        &self.symbols
    }

    /// Oriented symbols in declaration order: `R+, R-, G+, G-, ...`.
    pub fn oriented_symbols(&self) -> &[OrientedSymbol] {
        &self.oriented
    }

    pub fn code(&self, s: OrientedSymbol) -> Option<u8> {
        self.oriented.iter().position(|&o| o == s).map(|p| p as u8)
    }

    pub fn symbol(&self, code: u8) -> OrientedSymbol {
        self.oriented[code as usize]
    }

    pub fn contains(&self, s: OrientedSymbol) -> bool {
        self.code(s).is_some()
    }

    /// Renders as `R+- G+- X`: asymmetric names carry a `+-` suffix.
    pub fn to_line(&self) -> String {
        self.symbols
            .iter()
            .map(|(n, asym)| {
                if *asym {
                    format!("{n}+-")
                } else {
                    n.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_line(line: &str) -> Result<Self, Error> {
        let items: Vec<(String, bool)> = line
            .split_whitespace()
            .map(|tok| match tok.strip_suffix("+-") {
                Some(n) => (n.to_string(), true),
                None => (tok.to_string(), false),
            })
            .collect();
        Language::new(items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> OrientedSymbol {
        s.parse().unwrap()
    }

    #[test]
    fn dual_is_an_involution() {
        for s in ["R+", "R-", "X"] {
            assert_eq!(sym(s).dual().dual(), sym(s));
        }
        assert_eq!(sym("R+").dual(), sym("R-"));
        assert_eq!(sym("X").dual(), sym("X"));
    }

    #[test]
    fn equality_needs_base_and_orientation() {
        assert_ne!(sym("R+"), sym("R-"));
        assert_ne!(sym("R+"), sym("G+"));
        assert_eq!(sym("G-"), sym("G-"));
    }

    #[test]
    fn display_round_trips() {
        for s in ["R+", "G-", "N", "Blue+"] {
            assert_eq!(sym(s).to_string(), s);
        }
    }

    #[test]
    fn language_rejects_duplicates_and_lists_orientations() {
        assert!(Language::new([("R", true), ("R", false)]).is_err());
        let l = Language::new([("R", true), ("N", false)]).unwrap();
        let names: Vec<String> = l.oriented_symbols().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["R+", "R-", "N"]);
        assert_eq!(Language::parse_line(&l.to_line()).unwrap(), l);
    }

    #[test]
    fn bad_names_are_rejected() {
        assert!(SymbolName::new("").is_err());
        assert!(SymbolName::new("WAYTOOLONG").is_err());
        assert!("R*".parse::<OrientedSymbol>().is_err());
    }
}
