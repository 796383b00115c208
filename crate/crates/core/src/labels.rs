//! Labels: bit strings positioned on the unit ring by their dyadic rank.
//!
//! A label is stored as `(len, value)`; bit `i` (1-indexed from the left)
//! contributes `2^(len - i)` to `value`, so `rank = value / 2^len`.
//! All comparisons are exact integer arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Longest label this crate can represent.
pub const MAX_LABEL_LEN: u8 = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("label length {0} outside 1..=63")]
    BadLength(usize),
    #[error("invalid bit character {0:?}")]
    BadChar(char),
    #[error("label {0} is not an output of the label function")]
    NotInImage(Label),
    #[error("shortcut rank outside [0,1] (corrupted neighbor label)")]
    RankOutOfRange,
}

/// A bit string of length 1..=63.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Label {
    len: u8,
    value: u64,
}

/// Exact dyadic rank `num / 2^exp`, always reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rank {
    pub num: u64,
    pub exp: u8,
}

impl Rank {
    fn reduced(num: u64, exp: u8) -> Rank {
        if num == 0 {
            return Rank { num: 0, exp: 0 };
        }
        let tz = num.trailing_zeros().min(exp as u32) as u8;
        Rank { num: num >> tz, exp: exp - tz }
    }

    /// The rank as a float, for display and metrics only.
    pub fn to_f64(self) -> f64 {
        self.num as f64 / (1u128 << self.exp) as f64
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rank {
    fn cmp(&self, other: &Self) -> Ordering {
        // exp <= 63 and num < 2^exp, so cross-multiplication fits in u128
        let a = (self.num as u128) << other.exp;
        let b = (other.num as u128) << self.exp;
        a.cmp(&b)
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, 1u64 << self.exp)
        }
    }
}

impl Label {
    /// The label "0".
    pub const ZERO: Label = Label { len: 1, value: 0 };

    pub fn new(len: u8, value: u64) -> Result<Label, LabelError> {
        if len == 0 || len > MAX_LABEL_LEN {
            return Err(LabelError::BadLength(len as usize));
        }
        Ok(Label {
            len,
            value: value & ((1u64 << len) - 1),
        })
    }

    /// Number of bits; never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Bit `i` counted from the left, starting at 0.
    pub fn bit(&self, i: u8) -> bool {
        debug_assert!(i < self.len);
        (self.value >> (self.len - 1 - i)) & 1 == 1
    }

    pub fn rank(&self) -> Rank {
        Rank::reduced(self.value, self.len)
    }

    /// Rank numerator over 2^64.
    fn aligned(&self) -> u64 {
        self.value << (64 - self.len as u32)
    }

    /// Minimal-length label with the given rank numerator over 2^64.
    fn from_aligned(x: u64) -> Label {
        if x == 0 {
            return Label::ZERO;
        }
        let tz = x.trailing_zeros();
        Label {
            len: (64 - tz) as u8,
            value: x >> tz,
        }
    }

    pub fn is_zero_rank(&self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Label {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Label, LabelError> {
        if s.is_empty() || s.len() > MAX_LABEL_LEN as usize {
            return Err(LabelError::BadLength(s.len()));
        }
        let mut value = 0u64;
        for c in s.chars() {
            value = (value << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    other => return Err(LabelError::BadChar(other)),
                };
        }
        Label::new(s.len() as u8, value)
    }
}

/// Total order: by rank, then by length, so rank-equal labels such as
/// "01" and "010" stay distinct keys.
impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.aligned()
            .cmp(&other.aligned())
            .then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `l(x)`: move the leading bit of `x` to the units place.
pub fn label_of(x: u64) -> Label {
    if x == 0 {
        return Label::ZERO;
    }
    let d = 63 - x.leading_zeros();
    assert!(d < MAX_LABEL_LEN as u32, "index {x} too large for a label");
    Label {
        len: (d + 1) as u8,
        value: ((x - (1u64 << d)) << 1) | 1,
    }
}

/// `l^-1`. Labels outside the image of `l` (e.g. "00", "10") are rejected.
pub fn index_of(label: Label) -> Result<u64, LabelError> {
    if label == Label::ZERO {
        return Ok(0);
    }
    if label.value & 1 == 0 {
        return Err(LabelError::NotInImage(label));
    }
    Ok((1u64 << (label.len - 1)) + (label.value >> 1))
}

pub fn rank(label: Label) -> Rank {
    label.rank()
}

pub fn compare_by_rank(a: Label, b: Label) -> Ordering {
    a.aligned().cmp(&b.aligned())
}

/// Absolute rank distance as a numerator over 2^64.
pub fn rank_distance(a: Label, b: Label) -> u64 {
    a.aligned().abs_diff(b.aligned())
}

/// Shortcut labels of `v` derived from its direct ring neighbor `w`.
///
/// Emits `s1 = 2 r(w) - r(v)`, then `s_{i+1} = 2 r(s_i) - r(v)`, stopping
/// after the first `s` with `|s| <= |v|`. Rank 1 is the label "0" seen from
/// the upper semicircle; for `v = "0"` a neighbor above 1/2 is on that side,
/// so `r(v)` is taken as 1 there.
pub fn shortcut_labels(v: Label, w: Label) -> Result<Vec<Label>, LabelError> {
    if v.len >= w.len {
        return Ok(Vec::new());
    }
    const ONE: i128 = 1 << 64;
    const HALF: u64 = 1 << 63;
    let rv: i128 = if v.is_zero_rank() && w.aligned() > HALF {
        ONE
    } else {
        v.aligned() as i128
    };
    let mut out = Vec::new();
    let mut cur = w;
    loop {
        let s = 2 * cur.aligned() as i128 - rv;
        if !(0..=ONE).contains(&s) {
            return Err(LabelError::RankOutOfRange);
        }
        let label = if s == ONE {
            Label::ZERO
        } else {
            Label::from_aligned(s as u64)
        };
        out.push(label);
        if label.len <= v.len {
            return Ok(out);
        }
        cur = label;
    }
}
