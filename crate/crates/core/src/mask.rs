use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// Fixed-width set of feature indices.
///
/// Bit `i` set means feature `i` is in the subset. The textual form is a
/// bitstring whose `i`-th character is `1` when feature `i` is present, so
/// `"100"` over three features is `{f0}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureMask {
    width: usize,
    words: Vec<u64>,
}

impl FeatureMask {
    pub fn empty(width: usize) -> Self {
        FeatureMask {
            width,
            words: vec![0; width.div_ceil(WORD)],
        }
    }

    pub fn full(width: usize) -> Self {
        let mut mask = Self::empty(width);
        for i in 0..width {
            mask.insert(i);
        }
        mask
    }

    pub fn from_indices(width: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = Self::empty(width);
        for i in indices {
            if i >= width {
                return Err(Error::validation(format!(
                    "feature index {i} out of range for width {width}"
                )));
            }
            mask.insert(i);
        }
        Ok(mask)
    }

    /// Low `width` bits of `bits`, bit `i` ↦ feature `i`. Width must be ≤ 64.
    pub fn from_bits(width: usize, bits: u64) -> Self {
        assert!(width <= WORD, "from_bits supports at most 64 features");
        let mut mask = Self::empty(width);
        if width > 0 {
            let keep = if width == WORD { u64::MAX } else { (1u64 << width) - 1 };
            mask.words[0] = bits & keep;
        }
        mask
    }

    pub fn parse_bitstring(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut mask = Self::empty(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => mask.insert(i),
                '0' => {}
                other => {
                    return Err(Error::validation(format!(
                        "invalid character {other:?} in mask bitstring {s:?}"
                    )))
                }
            }
        }
        Ok(mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.width && self.words[i / WORD] & (1 << (i % WORD)) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.width, "feature index {i} out of range");
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.width, "feature index {i} out of range");
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    pub fn with(&self, i: usize) -> Self {
        let mut m = self.clone();
        m.insert(i);
        m
    }

    pub fn without(&self, i: usize) -> Self {
        let mut m = self.clone();
        m.remove(i);
        m
    }

    /// Member indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(move |&i| self.contains(i))
    }

    /// Non-member indices in ascending order.
    pub fn iter_absent(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(move |&i| !self.contains(i))
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.width)
            .map(|i| if self.contains(i) { '1' } else { '0' })
            .collect()
    }

    /// Integer form for widths ≤ 64, bit `i` ↦ feature `i`.
    pub fn to_bits(&self) -> Option<u64> {
        (self.width <= WORD).then(|| self.words.first().copied().unwrap_or(0))
    }

    pub(crate) fn check_width(&self, expected: usize) -> Result<()> {
        if self.width != expected {
            return Err(Error::validation(format!(
                "mask width {} does not match {expected} features",
                self.width
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeatureMask({})", self.to_bitstring())
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}
