//! Canonical bitset over ground-set ids.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A subset of `{0, .., n-1}` stored as little-endian 64-bit words.
///
/// Trailing zero words are always trimmed, so two masks describing the same
/// set compare and hash equal regardless of how they were built.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    words: SmallVec<[u64; 2]>,
}

impl SubsetMask {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The full set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        let mut m = Self::empty();
        let whole = n / 64;
        m.words.resize(whole, u64::MAX);
        if n % 64 != 0 {
            m.words.push((1u64 << (n % 64)) - 1);
        }
        m
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut m = Self::empty();
        for e in it {
            m.insert(e);
        }
        m
    }

    pub fn from_u64(bits: u64) -> Self {
        let mut m = Self::empty();
        m.words.push(bits);
        m.trim();
        m
    }

    fn trim(&mut self) {
        while let Some(&0) = self.words.last() {
            self.words.pop();
        }
    }

    pub fn contains(&self, e: usize) -> bool {
        self.words
            .get(e / 64)
            .map_or(false, |w| (w >> (e % 64)) & 1 == 1)
    }

    pub fn insert(&mut self, e: usize) {
        let w = e / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << (e % 64);
    }

    pub fn remove(&mut self, e: usize) {
        if let Some(w) = self.words.get_mut(e / 64) {
            *w &= !(1u64 << (e % 64));
            self.trim();
        }
    }

    pub fn with(&self, e: usize) -> Self {
        let mut m = self.clone();
        m.insert(e);
        m
    }

    pub fn without(&self, e: usize) -> Self {
        let mut m = self.clone();
        m.remove(e);
        m
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// One past the largest member, or 0 for the empty set.
    pub fn bound(&self) -> usize {
        match self.words.last() {
            None => 0,
            Some(&w) => (self.words.len() - 1) * 64 + (64 - w.leading_zeros() as usize),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut m = long.clone();
        for (w, o) in m.words.iter_mut().zip(short.words.iter()) {
            *w |= *o;
        }
        m
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut m = Self {
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(a, b)| a & b)
                .collect(),
        };
        m.trim();
        m
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut m = self.clone();
        for (w, o) in m.words.iter_mut().zip(other.words.iter()) {
            *w &= !*o;
        }
        m.trim();
        m
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.len() <= other.words.len()
            && self
                .words
                .iter()
                .zip(other.words.iter())
                .all(|(a, b)| a & !b == 0)
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self △ other|`.
    pub fn sym_diff_len(&self, other: &Self) -> usize {
        let n = self.words.len().max(other.words.len());
        (0..n)
            .map(|i| {
                let a = self.words.get(i).copied().unwrap_or(0);
                let b = other.words.get(i).copied().unwrap_or(0);
                (a ^ b).count_ones() as usize
            })
            .sum()
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Lowercase hex of the set as one big integer, without prefix (`0` for ∅).
    pub fn to_hex(&self) -> String {
        match self.words.split_last() {
            None => "0".to_string(),
            Some((top, rest)) => {
                let mut s = format!("{top:x}");
                for w in rest.iter().rev() {
                    s.push_str(&format!("{w:016x}"));
                }
                s
            }
        }
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("0x").unwrap_or(s);
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::Format(format!("bad set hex `{s}`")));
        }
        let mut words = SmallVec::new();
        let bytes = s.as_bytes();
        let mut end = bytes.len();
        while end > 0 {
            let start = end.saturating_sub(16);
            let chunk = std::str::from_utf8(&bytes[start..end]).expect("ascii");
            words.push(u64::from_str_radix(chunk, 16).map_err(|e| Error::Format(e.to_string()))?);
            end = start;
        }
        let mut m = Self { words };
        m.trim();
        Ok(m)
    }
}

impl Ord for SubsetMask {
    /// Numeric order of the sets read as binary integers.
    fn cmp(&self, other: &Self) -> Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for SubsetMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for SubsetMask {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_elements(iter)
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let t = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * 64 + t);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_after_remove() {
        let mut a = SubsetMask::from_elements([3, 130]);
        a.remove(130);
        assert_eq!(a, SubsetMask::from_elements([3]));
        assert_eq!(a.bound(), 4);
    }

    #[test]
    fn full_and_hex() {
        assert_eq!(SubsetMask::full(70).len(), 70);
        assert_eq!(SubsetMask::from_elements([0, 1, 3]).to_hex(), "b");
        assert_eq!(SubsetMask::empty().to_hex(), "0");
        assert_eq!(SubsetMask::from_elements([64]).to_hex(), "10000000000000000");
    }

    #[test]
    fn sym_diff_examples() {
        let a = SubsetMask::from_elements([1, 2, 3]);
        let b = SubsetMask::from_elements([1, 4]);
        assert_eq!(a.sym_diff_len(&b), 3);
        assert_eq!(a.sym_diff_len(&a), 0);
    }

    proptest! {
        #[test]
        fn hex_roundtrip(v in proptest::collection::btree_set(0usize..200, 0..20)) {
            let m = SubsetMask::from_elements(v.iter().copied());
            prop_assert_eq!(SubsetMask::from_hex(&m.to_hex()).unwrap(), m.clone());
            prop_assert_eq!(m.to_vec(), v.into_iter().collect::<Vec<_>>());
        }

        #[test]
        fn order_matches_integer_order(a in any::<u64>(), b in any::<u64>()) {
            prop_assert_eq!(SubsetMask::from_u64(a).cmp(&SubsetMask::from_u64(b)), a.cmp(&b));
        }
    }
}
