//! Hierarchical softmax along a Huffman path.
//!
//! At internal node `n` with output vector `v_n`, the left branch (bit 0) is
//! taken with probability `σ(v_n · h)` and the right branch with
//! `1 − σ(v_n · h) = σ(−v_n · h)`. A word's probability is the product over
//! its path.

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)`, stable for large |x|.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn branch_sign(bit: bool) -> f64 {
    if bit {
        -1.0
    } else {
        1.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Probability of the leaf reached by `code`, given per-node output vectors
/// `nodes` along the path (root first) and context `h`.
pub fn path_probability<N: AsRef<[f64]>>(nodes: &[N], code: &[bool], h: &[f64]) -> f64 {
    nodes
        .iter()
        .zip(code)
        .map(|(v, &bit)| sigmoid(branch_sign(bit) * dot(v.as_ref(), h)))
        .product()
}

/// Loss `−ln p(word | h)` and its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGradient {
    pub loss: f64,
    /// ∂loss/∂h
    pub context: Vec<f64>,
    /// ∂loss/∂v_n for each node on the path, in path order.
    pub nodes: Vec<Vec<f64>>,
}

pub fn path_loss_gradient<N: AsRef<[f64]>>(nodes: &[N], code: &[bool], h: &[f64]) -> PathGradient {
    let mut loss = 0.0;
    let mut d_context = vec![0.0; h.len()];
    let mut d_nodes = Vec::with_capacity(nodes.len());
    for (v, &bit) in nodes.iter().zip(code) {
        let v = v.as_ref();
        let s = branch_sign(bit);
        let z = s * dot(v, h);
        loss -= log_sigmoid(z);
        // d/dz[−ln σ(z)] = −(1 − σ(z)); chain through z = s·v·h
        let coeff = -(1.0 - sigmoid(z)) * s;
        for (d, &vk) in d_context.iter_mut().zip(v) {
            *d += coeff * vk;
        }
        d_nodes.push(h.iter().map(|&hk| coeff * hk).collect());
    }
    PathGradient {
        loss,
        context: d_context,
        nodes: d_nodes,
    }
}

pub fn path_loss<N: AsRef<[f64]>>(nodes: &[N], code: &[bool], h: &[f64]) -> f64 {
    nodes
        .iter()
        .zip(code)
        .map(|(v, &bit)| -log_sigmoid(branch_sign(bit) * dot(v.as_ref(), h)))
        .sum()
}
