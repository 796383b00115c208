//! Merkle-hashed Patricia trie over fixed-width publication keys.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hasher;

use fnv::FnvHasher;
use thiserror::Error;

use crate::message::NodeId;

/// Key width used by the protocol.
pub const KEY_BITS: u8 = 64;

/// A bit string of at most 64 bits, stored left-aligned.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Bits {
    len: u8,
    bits: u64,
}

impl Bits {
    pub const EMPTY: Bits = Bits { len: 0, bits: 0 };

    /// The low `len` bits of `value`, most significant first.
    pub fn from_value(value: u64, len: u8) -> Bits {
        assert!(len <= 64);
        if len == 0 {
            return Bits::EMPTY;
        }
        Bits {
            len,
            bits: value << (64 - len as u32),
        }
    }

    pub fn parse(s: &str) -> Option<Bits> {
        if s.len() > 64 {
            return None;
        }
        let mut b = Bits::EMPTY;
        for c in s.chars() {
            b = b.push(match c {
                '0' => false,
                '1' => true,
                _ => return None,
            });
        }
        Some(b)
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: u8) -> bool {
        debug_assert!(i < self.len);
        (self.bits >> (63 - i as u32)) & 1 == 1
    }

    pub fn push(&self, b: bool) -> Bits {
        assert!(self.len < 64);
        Bits {
            len: self.len + 1,
            bits: self.bits | ((b as u64) << (63 - self.len as u32)),
        }
    }

    pub fn prefix(&self, len: u8) -> Bits {
        let len = len.min(self.len);
        if len == 0 {
            return Bits::EMPTY;
        }
        Bits {
            len,
            bits: self.bits & (u64::MAX << (64 - len as u32)),
        }
    }

    pub fn is_prefix_of(&self, other: &Bits) -> bool {
        self.len <= other.len && other.prefix(self.len) == *self
    }

    pub fn common_prefix(&self, other: &Bits) -> Bits {
        let diff = (self.bits ^ other.bits).leading_zeros().min(64) as u8;
        self.prefix(diff.min(self.len).min(other.len))
    }

    fn to_bytes(self) -> [u8; 9] {
        let mut out = [0u8; 9];
        out[0] = self.len;
        out[1..].copy_from_slice(&self.bits.to_be_bytes());
        out
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl Ord for Bits {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bits.cmp(&other.bits).then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// 64-bit FNV-1a digest.
pub fn digest(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// The publication key: a digest of origin id and payload.
pub fn pub_hash(origin: NodeId, payload: &[u8]) -> Bits {
    let mut bytes = origin.to_be_bytes().to_vec();
    bytes.extend_from_slice(payload);
    Bits::from_value(digest(&bytes), KEY_BITS)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Publication {
    pub key: Bits,
    pub origin: NodeId,
    pub payload: Vec<u8>,
}

impl Publication {
    pub fn new(origin: NodeId, payload: impl Into<Vec<u8>>) -> Publication {
        let payload = payload.into();
        Publication {
            key: pub_hash(origin, &payload),
            origin,
            payload,
        }
    }

    /// A publication with an explicitly chosen key.
    pub fn with_key(origin: NodeId, payload: impl Into<Vec<u8>>, key: Bits) -> Publication {
        Publication {
            key,
            origin,
            payload: payload.into(),
        }
    }
}

/// What travels in `CheckTrie`: a node's label and hash, no edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrieSummary {
    pub label: Bits,
    pub hash: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrieError {
    #[error("key {0} already stored with a different publication")]
    Collision(Bits),
    #[error("key length {got} differs from trie width {want}")]
    KeyWidth { got: u8, want: u8 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrieNode {
    Leaf {
        hash: u64,
        publication: Publication,
    },
    Inner {
        label: Bits,
        hash: u64,
        children: Box<[TrieNode; 2]>,
    },
}

fn leaf_hash(key: Bits) -> u64 {
    digest(&key.to_bytes())
}

fn inner_hash(a: u64, b: u64) -> u64 {
    let mut bytes = [0u8; 16];
    bytes[..8].copy_from_slice(&a.to_be_bytes());
    bytes[8..].copy_from_slice(&b.to_be_bytes());
    digest(&bytes)
}

impl TrieNode {
    fn leaf(publication: Publication) -> TrieNode {
        TrieNode::Leaf {
            hash: leaf_hash(publication.key),
            publication,
        }
    }

    /// Inner node over two subtries whose labels diverge right after `label`.
    fn inner(label: Bits, a: TrieNode, b: TrieNode) -> TrieNode {
        let (c0, c1) = if a.label().bit(label.len()) { (b, a) } else { (a, b) };
        TrieNode::Inner {
            label,
            hash: inner_hash(c0.hash(), c1.hash()),
            children: Box::new([c0, c1]),
        }
    }

    pub fn label(&self) -> Bits {
        match self {
            TrieNode::Leaf { publication, .. } => publication.key,
            TrieNode::Inner { label, .. } => *label,
        }
    }

    pub fn hash(&self) -> u64 {
        match self {
            TrieNode::Leaf { hash, .. } | TrieNode::Inner { hash, .. } => *hash,
        }
    }

    pub fn summary(&self) -> TrieSummary {
        TrieSummary {
            label: self.label(),
            hash: self.hash(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TrieNode::Leaf { .. })
    }

    pub fn children(&self) -> Option<&[TrieNode; 2]> {
        match self {
            TrieNode::Inner { children, .. } => Some(children),
            TrieNode::Leaf { .. } => None,
        }
    }

    fn collect(&self, out: &mut Vec<Publication>) {
        match self {
            TrieNode::Leaf { publication, .. } => out.push(publication.clone()),
            TrieNode::Inner { children, .. } => {
                children[0].collect(out);
                children[1].collect(out);
            }
        }
    }

    fn insert(self, p: Publication) -> Result<(TrieNode, bool), (TrieNode, TrieError)> {
        let label = self.label();
        match self {
            TrieNode::Leaf { ref publication, .. } if label == p.key => {
                if *publication == p {
                    Ok((self, false))
                } else {
                    Err((self, TrieError::Collision(p.key)))
                }
            }
            TrieNode::Inner { label, children, .. } if label.is_prefix_of(&p.key) => {
                let side = p.key.bit(label.len()) as usize;
                let [c0, c1] = *children;
                let (target, other) = if side == 0 { (c0, c1) } else { (c1, c0) };
                match target.insert(p) {
                    Ok((t, changed)) => Ok((TrieNode::inner(label, t, other), changed)),
                    Err((t, e)) => Err((TrieNode::inner(label, t, other), e)),
                }
            }
            node => {
                let cp = label.common_prefix(&p.key);
                Ok((TrieNode::inner(cp, node, TrieNode::leaf(p)), true))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatriciaTrie {
    width: u8,
    root: Option<TrieNode>,
    len: usize,
}

impl Default for PatriciaTrie {
    fn default() -> Self {
        PatriciaTrie::new()
    }
}

impl PatriciaTrie {
    pub fn new() -> PatriciaTrie {
        PatriciaTrie::with_width(KEY_BITS)
    }

    /// A trie over keys of `width` bits.
    pub fn with_width(width: u8) -> PatriciaTrie {
        assert!((1..=64).contains(&width));
        PatriciaTrie {
            width,
            root: None,
            len: 0,
        }
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn root(&self) -> Option<&TrieNode> {
        self.root.as_ref()
    }

    pub fn root_hash(&self) -> Option<u64> {
        self.root.as_ref().map(TrieNode::hash)
    }

    /// Insert `p`. Returns whether the trie changed.
    pub fn insert(&mut self, p: Publication) -> Result<bool, TrieError> {
        if p.key.len() != self.width {
            return Err(TrieError::KeyWidth {
                got: p.key.len(),
                want: self.width,
            });
        }
        let (root, res) = match self.root.take() {
            None => (TrieNode::leaf(p), Ok(true)),
            Some(r) => match r.insert(p) {
                Ok((r, changed)) => (r, Ok(changed)),
                Err((r, e)) => (r, Err(e)),
            },
        };
        self.root = Some(root);
        if res == Ok(true) {
            self.len += 1;
        }
        res
    }

    pub fn contains(&self, p: &Publication) -> bool {
        match self.search_node(p.key) {
            Some(TrieNode::Leaf { publication, .. }) => publication == p,
            _ => false,
        }
    }

    pub fn contains_key(&self, key: Bits) -> bool {
        matches!(self.search_node(key), Some(TrieNode::Leaf { .. }))
    }

    /// The node whose label equals `label` exactly.
    pub fn search_node(&self, label: Bits) -> Option<&TrieNode> {
        let mut node = self.root.as_ref()?;
        loop {
            let nl = node.label();
            if nl == label {
                return Some(node);
            }
            match node.children() {
                Some(ch) if nl.is_prefix_of(&label) => node = &ch[label.bit(nl.len()) as usize],
                _ => return None,
            }
        }
    }

    /// The shortest-labelled node whose label has `prefix` as a prefix.
    pub fn min_extension(&self, prefix: Bits) -> Option<&TrieNode> {
        let mut node = self.root.as_ref()?;
        loop {
            let nl = node.label();
            if prefix.is_prefix_of(&nl) {
                return Some(node);
            }
            match node.children() {
                Some(ch) if nl.is_prefix_of(&prefix) => node = &ch[prefix.bit(nl.len()) as usize],
                _ => return None,
            }
        }
    }

    /// All stored publications whose key starts with `prefix`.
    pub fn with_prefix(&self, prefix: Bits) -> Vec<Publication> {
        let mut out = Vec::new();
        if let Some(n) = self.min_extension(prefix) {
            n.collect(&mut out);
        }
        out
    }

    pub fn publications(&self) -> Vec<Publication> {
        self.with_prefix(Bits::EMPTY)
    }

    /// Stored keys in ascending order.
    pub fn keys(&self) -> Vec<Bits> {
        self.publications().into_iter().map(|p| p.key).collect()
    }

    pub fn clear(&mut self) {
        self.root = None;
        self.len = 0;
    }
}
