//! Multipoint polynomial evaluation by product and remainder trees.

use crate::error::Result;

use super::poly::{poly_mod, poly_mul, Polynomial};

/// Binary tree over a power-of-two point set: the leaves are the linear
/// factors (x - a_i), each internal node the product of its children, and the
/// root the full product over all points.
#[derive(Debug, Clone)]
pub struct ProductTree {
    /// levels[0] holds the leaves; the last level holds only the root.
    levels: Vec<Vec<Polynomial>>,
    p: u64,
}

/// Builds the product tree over `points`, padding with the point 0 up to the
/// next power of two. Evaluations at padded slots are the caller's to
/// discard.
pub fn product_tree(points: &[u64], p: u64) -> ProductTree {
    assert!(!points.is_empty());
    let padded_len = points.len().next_power_of_two();
    let mut leaves: Vec<Polynomial> = Vec::with_capacity(padded_len);
    for i in 0..padded_len {
        let point = points.get(i).copied().unwrap_or(0);
        leaves.push(Polynomial::linear_root(point, p));
    }
    let mut levels = vec![leaves];
    while levels.last().unwrap().len() > 1 {
        let prev = levels.last().unwrap();
        let next: Vec<Polynomial> = prev
            .chunks(2)
            .map(|pair| poly_mul(&pair[0], &pair[1], p))
            .collect();
        levels.push(next);
    }
    ProductTree { levels, p }
}

impl ProductTree {
    pub fn root(&self) -> &Polynomial {
        &self.levels.last().unwrap()[0]
    }

    pub fn num_points(&self) -> usize {
        self.levels[0].len()
    }

    /// Evaluates `g` at every point of the tree (padded slots included) by
    /// descending with remainders: the value at a leaf (x - a) is the
    /// remainder of g modulo that leaf, a constant.
    ///
    /// Exact for any degree of `g`; when deg g reaches or exceeds the number
    /// of points the first reduction by the root brings it down, since
    /// remainders preserve evaluations at the roots of the divisor.
    pub fn evaluate(&self, g: &Polynomial) -> Result<Vec<u64>> {
        let depth = self.levels.len() - 1;
        let reduced_root = poly_mod(g, self.root(), self.p)?;
        let mut current = vec![reduced_root];
        for level in (0..depth).rev() {
            let nodes = &self.levels[level];
            let mut next = Vec::with_capacity(nodes.len());
            for (parent_idx, residue) in current.iter().enumerate() {
                for child in 0..2 {
                    let node = &nodes[2 * parent_idx + child];
                    next.push(poly_mod(residue, node, self.p)?);
                }
            }
            current = next;
        }
        Ok(current
            .iter()
            .map(|r| r.coeffs().first().copied().unwrap_or(0))
            .collect())
    }
}

/// Evaluates `g` at each point, exactly.
pub fn mpe(g: &Polynomial, points: &[u64], p: u64) -> Result<Vec<u64>> {
    let tree = product_tree(points, p);
    let mut values = tree.evaluate(g)?;
    values.truncate(points.len());
    Ok(values)
}
