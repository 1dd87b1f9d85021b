use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest ground set representable by a [`SiteSet`].
pub const MAX_SITES: usize = 64;

/// Subset of the ground set stored as a bitmask: 0-based site `i` is bit `i`.
///
/// Externally (JSON, display) sites are numbered from 1, so site `k` maps to
/// bit `k - 1`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteSet(u64);

impl SiteSet {
    pub const EMPTY: SiteSet = SiteSet(0);

    pub fn from_mask(mask: u64) -> Self {
        SiteSet(mask)
    }

    pub fn full(d: usize) -> Self {
        if d >= 64 {
            SiteSet(u64::MAX)
        } else {
            SiteSet((1u64 << d) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        SiteSet(1u64 << i)
    }

    /// Builds a set from 0-based indices; duplicates are allowed.
    pub fn from_indices(idx: &[usize]) -> Self {
        SiteSet(idx.iter().fold(0u64, |m, &i| m | (1u64 << i)))
    }

    /// Builds a set from 1-based site labels, checking range against `d`.
    pub fn from_labels(labels: &[usize], d: usize) -> Result<Self> {
        let mut m = 0u64;
        for &s in labels {
            if s == 0 || s > d {
                return Err(Error::SiteOutOfRange { site: s, d });
            }
            m |= 1u64 << (s - 1);
        }
        Ok(SiteSet(m))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 & other.0)
    }

    pub fn union(self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 | other.0)
    }

    pub fn difference(self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 & !other.0)
    }

    pub fn sym_difference(self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 ^ other.0)
    }

    pub fn is_subset(self, other: SiteSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Checks every member is below `d`.
    pub fn check_range(self, d: usize) -> Result<()> {
        if d < 64 && self.0 >> d != 0 {
            let site = 64 - self.0.leading_zeros() as usize;
            return Err(Error::SiteOutOfRange { site, d });
        }
        Ok(())
    }

    /// 0-based members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(i)
            }
        })
    }

    pub fn indices(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// 1-based labels in increasing order.
    pub fn labels(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    /// All subsets of `{0, .., d-1}` in increasing mask order.
    pub fn all(d: usize) -> impl Iterator<Item = SiteSet> {
        assert!(d < 64);
        (0..1u64 << d).map(SiteSet)
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, s) in self.labels().into_iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for SiteSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SiteSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<usize>::deserialize(d)?;
        let mut m = 0u64;
        for s in labels {
            if s == 0 || s > 64 {
                return Err(serde::de::Error::custom(format!("site label {s} out of range")));
            }
            m |= 1u64 << (s - 1);
        }
        Ok(SiteSet(m))
    }
}

/// Formats a tuple of sets as `{1}|{2,3}`.
pub fn format_tuple(sets: &[SiteSet]) -> String {
    sets.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("|")
}

/// Parses the `{1}|{2,3}` form produced by [`format_tuple`].
pub fn parse_tuple(text: &str, d: usize) -> Result<Vec<SiteSet>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split('|')
        .map(|part| {
            let inner = part
                .trim()
                .strip_prefix('{')
                .and_then(|p| p.strip_suffix('}'))
                .ok_or_else(|| Error::InvalidKernel(format!("malformed subset `{part}`")))?;
            let labels = inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| Error::InvalidKernel(format!("bad site label `{s}`"))))
                .collect::<Result<Vec<_>>>()?;
            SiteSet::from_labels(&labels, d)
        })
        .collect()
}
