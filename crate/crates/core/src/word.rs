//! Finite words and eventually periodic addresses over `{1, …, m}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite multiindex `j_1 j_2 … j_n`. Symbols are 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_symbols(symbols: impl Into<Vec<u8>>) -> Self {
        Word(symbols.into())
    }

    pub fn symbol(s: u8) -> Self {
        Word(vec![s])
    }

    /// `s` repeated `k` times.
    pub fn repeat(s: u8, k: usize) -> Self {
        Word(vec![s; k])
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<u8> {
        self.0.first().copied()
    }

    pub fn child(&self, s: u8) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(s);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn check_alphabet(&self, alphabet: usize) -> Result<()> {
        match self.0.iter().find(|&&s| s == 0 || s as usize > alphabet) {
            Some(&symbol) => Err(Error::BadSymbol { symbol, alphabet }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
            f.write_str(&parts.join("."))
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "ε" {
            return Ok(Word::empty());
        }
        let parse = |t: &str| t.parse::<u8>().map_err(|_| Error::Parse(s.to_string()));
        let symbols = if s.contains('.') {
            s.split('.').map(parse).collect::<Result<Vec<_>>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| Error::Parse(s.to_string())))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Word(symbols))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Eventually periodic infinite address `preperiod · period^∞`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Address {
    preperiod: Word,
    period: Word,
}

impl Address {
    pub fn new(preperiod: Word, period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        Ok(Address { preperiod, period })
    }

    pub fn preperiod(&self) -> &Word {
        &self.preperiod
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    /// First `n` symbols.
    pub fn truncate(&self, n: usize) -> Word {
        let mut v = Vec::with_capacity(n);
        v.extend(self.preperiod.symbols().iter().take(n));
        let period = self.period.symbols();
        let mut k = 0;
        while v.len() < n {
            v.push(period[k % period.len()]);
            k += 1;
        }
        Word(v)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.preperiod.is_empty() {
            write!(f, "({})^∞", self.period)
        } else {
            write!(f, "{}({})^∞", self.preperiod, self.period)
        }
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn word_text_round_trip() {
        let w: Word = "3115".parse().unwrap();
        assert_eq!(w.symbols(), &[3, 1, 1, 5]);
        assert_eq!(w.to_string(), "3115");
        let long = Word::from_symbols(vec![12, 3]);
        assert_eq!(long.to_string(), "12.3");
        assert_eq!("12.3".parse::<Word>().unwrap(), long);
        assert_eq!("".parse::<Word>().unwrap(), Word::empty());
        assert!("3x".parse::<Word>().is_err());
    }

    #[test]
    fn alphabet_check() {
        assert!(Word::from_symbols(vec![1, 6]).check_alphabet(6).is_ok());
        assert_eq!(
            Word::from_symbols(vec![7]).check_alphabet(6),
            Err(Error::BadSymbol { symbol: 7, alphabet: 6 })
        );
        assert!(Word::from_symbols(vec![0]).check_alphabet(6).is_err());
    }

    #[test]
    fn address_requires_period() {
        assert_eq!(Address::new(Word::symbol(3), Word::empty()), Err(Error::EmptyPeriod));
        let a = Address::new(Word::symbol(3), Word::symbol(1)).unwrap();
        assert_eq!(a.truncate(4).to_string(), "3111");
        assert_eq!(a.truncate(0), Word::empty());
        assert_eq!(a.to_string(), "3(1)^∞");
    }

    proptest! {
        #[test]
        fn truncation_is_consistent(pre in proptest::collection::vec(1u8..=6, 0..5),
                                    per in proptest::collection::vec(1u8..=6, 1..4),
                                    n in 0usize..30) {
            let a = Address::new(Word::from_symbols(pre.clone()), Word::from_symbols(per.clone())).unwrap();
            let t = a.truncate(n);
            prop_assert_eq!(t.len(), n);
            prop_assert_eq!(a.truncate(n + 3).prefix(n), t.clone());
            for (k, s) in t.symbols().iter().enumerate() {
                let expected = if k < pre.len() { pre[k] } else { per[(k - pre.len()) % per.len()] };
                prop_assert_eq!(*s, expected);
            }
        }
    }
}
