use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::EmbedError;

/// Version of the tie-breaking rule below. Stored in model files so that a
/// reloaded model rebuilds exactly the same tree.
pub const TIE_BREAK_VERSION: u32 = 1;

/// Binary prefix-code tree over the vocabulary.
///
/// Internal nodes are numbered `0..V-1` in creation order, so the root is the
/// last one. For every word, `path` lists the internal nodes from the root
/// down and `code` the branch taken at each of them (`false` = left = bit 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTree {
    codes: Vec<Vec<bool>>,
    paths: Vec<Vec<u32>>,
    internal_nodes: usize,
}

impl HuffmanTree {
    pub fn code(&self, leaf: usize) -> &[bool] {
        &self.codes[leaf]
    }

    pub fn path(&self, leaf: usize) -> &[u32] {
        &self.paths[leaf]
    }

    pub fn internal_node_count(&self) -> usize {
        self.internal_nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.codes.len()
    }

    /// Σ count(w) · |code(w)|
    pub fn weighted_length(&self, counts: &[u64]) -> u64 {
        self.codes.iter().zip(counts).map(|(c, &n)| c.len() as u64 * n).sum()
    }
}

/// Builds the Huffman tree for `(word, count)` leaves. Codes are indexed by
/// position in `leaves`.
///
/// The two lightest nodes are merged first; the lighter of the two becomes
/// the left child. Equal counts are ordered leaves-before-internal, leaves by
/// word and internal nodes by creation order, which makes the tree a pure
/// function of the input multiset.
pub fn build_huffman<S: AsRef<str>>(leaves: &[(S, u64)]) -> Result<HuffmanTree, EmbedError> {
    let n = leaves.len();
    if n == 0 {
        return Err(EmbedError::EmptyVocabulary);
    }
    if n == 1 {
        return Ok(HuffmanTree {
            codes: vec![Vec::new()],
            paths: vec![Vec::new()],
            internal_nodes: 0,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| leaves[a].0.as_ref().cmp(leaves[b].0.as_ref()));
    let mut rank = vec![0usize; n];
    for (r, &leaf) in order.iter().enumerate() {
        rank[leaf] = r;
    }

    // Node ids: leaves 0..n, internal node k is n + k.
    let mut parent = vec![0usize; 2 * n - 1];
    let mut branch = vec![false; 2 * n - 1];
    let mut heap = BinaryHeap::with_capacity(n);
    for (leaf, (_, count)) in leaves.iter().enumerate() {
        heap.push(Reverse((*count, rank[leaf], leaf)));
    }
    for k in 0..n - 1 {
        let Reverse((c0, _, left)) = heap.pop().unwrap();
        let Reverse((c1, _, right)) = heap.pop().unwrap();
        let id = n + k;
        parent[left] = id;
        parent[right] = id;
        branch[right] = true;
        heap.push(Reverse((c0 + c1, n + k, id)));
    }
    let root = 2 * n - 2;

    let mut codes = Vec::with_capacity(n);
    let mut paths = Vec::with_capacity(n);
    for leaf in 0..n {
        let mut code = Vec::new();
        let mut path = Vec::new();
        let mut node = leaf;
        while node != root {
            code.push(branch[node]);
            node = parent[node];
            path.push((node - n) as u32);
        }
        code.reverse();
        path.reverse();
        codes.push(code);
        paths.push(path);
    }
    Ok(HuffmanTree {
        codes,
        paths,
        internal_nodes: n - 1,
    })
}
