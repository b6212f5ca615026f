//! Words over a finite alphabet, cylinders, and eventually periodic sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of cylinders any enumeration will materialise by default.
pub const DEFAULT_CYLINDER_CAP: u64 = 1 << 26;

/// A finite word `u = u_0 u_1 ... u_{n-1}` over the alphabet `{0, ..., m-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    symbols: Vec<u8>,
    m: usize,
}

impl Word {
    pub fn new(m: usize, symbols: Vec<u8>) -> Result<Self> {
        check_alphabet(m)?;
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= m) {
            return Err(Error::invalid(format!("symbol {s} outside alphabet of size {m}")));
        }
        Ok(Word { symbols, m })
    }

    pub fn empty(m: usize) -> Result<Self> {
        Word::new(m, Vec::new())
    }

    /// Decodes the `index`-th word of length `n` in lexicographic order.
    pub fn from_index(m: usize, n: usize, mut index: u64) -> Self {
        let mut symbols = vec![0u8; n];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % m as u64) as u8;
            index /= m as u64;
        }
        Word { symbols, m }
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn alphabet(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word {
            symbols: self.symbols[..n.min(self.len())].to_vec(),
            m: self.m,
        }
    }

    /// Bernoulli mass of the cylinder `[u]`.
    pub fn cylinder_mass(&self, weights: &[f64]) -> f64 {
        self.symbols.iter().map(|&s| weights[s as usize]).product()
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, s) in self.symbols.iter().enumerate() {
            if self.m > 10 && k > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// An infinite sequence `prefix · tail · tail · ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolPath {
    m: usize,
    prefix: Vec<u8>,
    tail: Vec<u8>,
}

impl SymbolPath {
    pub fn new(m: usize, prefix: Vec<u8>, tail: Vec<u8>) -> Result<Self> {
        check_alphabet(m)?;
        if tail.is_empty() {
            return Err(Error::invalid("periodic tail of a symbol path must be nonempty"));
        }
        if let Some(&s) = prefix.iter().chain(&tail).find(|&&s| s as usize >= m) {
            return Err(Error::invalid(format!("symbol {s} outside alphabet of size {m}")));
        }
        Ok(SymbolPath { m, prefix, tail })
    }

    /// The purely periodic sequence `tail^∞`.
    pub fn periodic(m: usize, tail: Vec<u8>) -> Result<Self> {
        SymbolPath::new(m, Vec::new(), tail)
    }

    /// `u` followed by `u` forever.
    pub fn periodic_word(word: &Word) -> Result<Self> {
        SymbolPath::periodic(word.alphabet(), word.symbols().to_vec())
    }

    pub fn alphabet(&self) -> usize {
        self.m
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn tail(&self) -> &[u8] {
        &self.tail
    }

    pub fn symbol(&self, k: usize) -> u8 {
        if k < self.prefix.len() {
            self.prefix[k]
        } else {
            self.tail[(k - self.prefix.len()) % self.tail.len()]
        }
    }

    /// First `n` symbols.
    pub fn head(&self, n: usize) -> Word {
        Word {
            symbols: (0..n).map(|k| self.symbol(k)).collect(),
            m: self.m,
        }
    }

    /// The left shift `σ^s`.
    pub fn shift(&self, s: usize) -> SymbolPath {
        if s <= self.prefix.len() {
            SymbolPath {
                m: self.m,
                prefix: self.prefix[s..].to_vec(),
                tail: self.tail.clone(),
            }
        } else {
            let rot = (s - self.prefix.len()) % self.tail.len();
            let mut tail = self.tail[rot..].to_vec();
            tail.extend_from_slice(&self.tail[..rot]);
            SymbolPath {
                m: self.m,
                prefix: Vec::new(),
                tail,
            }
        }
    }

    /// Length of the longest common prefix `|ω ∧ τ|`.
    pub fn wedge(&self, other: &SymbolPath) -> Result<usize> {
        if self.m != other.m {
            return Err(Error::invalid("symbol paths over different alphabets"));
        }
        // Past max(prefix) both are periodic; agreement over one common period settles equality.
        let horizon = self.prefix.len().max(other.prefix.len()) + lcm(self.tail.len(), other.tail.len());
        (0..horizon)
            .find(|&k| self.symbol(k) != other.symbol(k))
            .ok_or(Error::IdenticalSequences)
    }
}

/// `|ω ∧ τ|` as a free function.
pub fn wedge(a: &SymbolPath, b: &SymbolPath) -> Result<usize> {
    a.wedge(b)
}

/// All `m^n` words of length `n`, lexicographically ordered.
pub fn cylinder_enumerate(m: usize, n: usize, cap: u64) -> Result<Vec<Word>> {
    let count = cylinder_count(m, n, cap)?;
    Ok((0..count).map(|i| Word::from_index(m, n, i)).collect())
}

/// `m^n`, or `CapExceeded` when it exceeds `cap`.
pub fn cylinder_count(m: usize, n: usize, cap: u64) -> Result<u64> {
    check_alphabet(m)?;
    let mut count: u128 = 1;
    for _ in 0..n {
        count *= m as u128;
        if count > cap as u128 {
            return Err(Error::CapExceeded {
                what: "cylinder count",
                requested: (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX),
                cap: cap as u128,
            });
        }
    }
    Ok(count as u64)
}

fn check_alphabet(m: usize) -> Result<()> {
    if !(2..=256).contains(&m) {
        return Err(Error::invalid(format!("alphabet size must be in 2..=256, got {m}")));
    }
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(prefix: &[u8], tail: &[u8]) -> SymbolPath {
        SymbolPath::new(2, prefix.to_vec(), tail.to_vec()).unwrap()
    }

    #[test]
    fn wedge_examples() {
        assert_eq!(path(&[], &[0]).wedge(&path(&[], &[1])).unwrap(), 0);
        assert_eq!(path(&[0, 1], &[0]).wedge(&path(&[0, 1], &[1])).unwrap(), 2);
        // 001000... vs 001001...
        assert_eq!(path(&[0, 0, 1], &[0]).wedge(&path(&[], &[0, 0, 1])).unwrap(), 5);
    }

    #[test]
    fn wedge_identical_sequences() {
        let a = path(&[0, 1], &[0, 1]);
        let b = path(&[], &[0, 1, 0, 1]);
        assert_eq!(a.wedge(&b), Err(Error::IdenticalSequences));
        assert_eq!(path(&[1], &[1]).wedge(&path(&[], &[1])), Err(Error::IdenticalSequences));
    }

    #[test]
    fn empty_tail_rejected() {
        assert!(SymbolPath::new(2, vec![0], vec![]).is_err());
        assert!(Word::new(2, vec![2]).is_err());
        assert_eq!(Word::empty(3).unwrap().len(), 0);
    }

    #[test]
    fn shift_matches_symbols() {
        let p = SymbolPath::new(3, vec![2, 1], vec![0, 1, 2]).unwrap();
        for s in 0..9 {
            let q = p.shift(s);
            for k in 0..12 {
                assert_eq!(q.symbol(k), p.symbol(k + s));
            }
        }
    }

    #[test]
    fn enumerate_small() {
        let w = cylinder_enumerate(2, 1, DEFAULT_CYLINDER_CAP).unwrap();
        assert_eq!(w.iter().map(|w| w.to_string()).collect::<Vec<_>>(), ["0", "1"]);
        let w = cylinder_enumerate(2, 2, DEFAULT_CYLINDER_CAP).unwrap();
        assert_eq!(
            w.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            ["00", "01", "10", "11"]
        );
        let w = cylinder_enumerate(3, 2, DEFAULT_CYLINDER_CAP).unwrap();
        let expected: Vec<String> = (0..3).flat_map(|a| (0..3).map(move |b| format!("{a}{b}"))).collect();
        assert_eq!(w.iter().map(|w| w.to_string()).collect::<Vec<_>>(), expected);
        assert_eq!(cylinder_enumerate(2, 0, 10).unwrap().len(), 1);
    }

    #[test]
    fn enumerate_cap() {
        assert!(matches!(
            cylinder_enumerate(2, 11, 1024),
            Err(Error::CapExceeded { requested: 2048, .. })
        ));
    }

    proptest! {
        #[test]
        fn wedge_symmetric(pa in proptest::collection::vec(0u8..3, 0..6),
                           ta in proptest::collection::vec(0u8..3, 1..4),
                           pb in proptest::collection::vec(0u8..3, 0..6),
                           tb in proptest::collection::vec(0u8..3, 1..4)) {
            let a = SymbolPath::new(3, pa, ta).unwrap();
            let b = SymbolPath::new(3, pb, tb).unwrap();
            prop_assert_eq!(a.wedge(&b), b.wedge(&a));
        }

        #[test]
        fn wedge_of_split_extension(u in proptest::collection::vec(0u8..4, 0..10),
                                    x in 0u8..4, dy in 1u8..4,
                                    ta in proptest::collection::vec(0u8..4, 1..3),
                                    tb in proptest::collection::vec(0u8..4, 1..3)) {
            let y = (x + dy) % 4;
            let mut pa = u.clone(); pa.push(x);
            let mut pb = u.clone(); pb.push(y);
            let a = SymbolPath::new(4, pa, ta).unwrap();
            let b = SymbolPath::new(4, pb, tb).unwrap();
            prop_assert_eq!(a.wedge(&b).unwrap(), u.len());
        }

        #[test]
        fn enumeration_distinct(m in 2usize..5, n in 0usize..5) {
            let words = cylinder_enumerate(m, n, DEFAULT_CYLINDER_CAP).unwrap();
            let set: std::collections::HashSet<_> = words.iter().cloned().collect();
            prop_assert_eq!(set.len(), m.pow(n as u32));
            prop_assert_eq!(words.len(), m.pow(n as u32));
        }
    }
}
