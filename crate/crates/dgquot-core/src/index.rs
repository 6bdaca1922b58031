//! Deterministic basis indexing for tensor Hom spaces.
//!
//! Every graded component downstream carries a basis of elementary maps, and
//! all enumeration order is fixed here: row-major mixed radix (last digit
//! fastest) and lexicographic compositions.  Serialized labels, report lines
//! and structure constants all inherit their order from this module, so the
//! conventions must never change.

use alloc::vec;
use alloc::vec::Vec;

/// `dim Hom(V_1 (x) ... (x) V_k, W) = (prod dim V_i) * dim W`.
/// The empty tensor product is the ground field, so no inputs gives `dim W`.
pub fn tensor_hom_dims(input_dims: &[usize], output_dim: usize) -> usize {
    input_dims.iter().product::<usize>() * output_dim
}

/// Row-major mixed-radix indexing over a fixed shape: the last digit varies
/// fastest.  The empty shape has exactly one tuple, the empty one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedRadix {
    dims: Vec<usize>,
}

impl MixedRadix {
    pub fn new(dims: Vec<usize>) -> Self {
        MixedRadix { dims }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.dims.len(), "digit count mismatch");
        let mut idx = 0;
        for (d, &n) in digits.iter().zip(&self.dims) {
            debug_assert!(*d < n, "digit out of range");
            idx = idx * n + d;
        }
        idx
    }

    pub fn digits_of(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &n) in out.iter_mut().zip(&self.dims).rev() {
            *slot = idx % n;
            idx /= n;
        }
        debug_assert_eq!(idx, 0, "index out of range");
        out
    }

    /// All tuples in index order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len()).map(|i| self.digits_of(i))
    }
}

/// All length-`k` integer tuples with entries in `[min_part, max_part]` and
/// the given sum, in lexicographic order.
pub fn compositions(k: usize, total: i64, min_part: i64, max_part: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fill_compositions(k, total, min_part, max_part, &mut current, &mut out);
    out
}

fn fill_compositions(
    k: usize,
    total: i64,
    min_part: i64,
    max_part: i64,
    current: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if k == 0 {
        if total == 0 {
            out.push(current.clone());
        }
        return;
    }
    let rest = (k - 1) as i64;
    let lo = min_part.max(total - rest * max_part);
    let hi = max_part.min(total - rest * min_part);
    for part in lo..=hi {
        current.push(part);
        fill_compositions(k - 1, total - part, min_part, max_part, current, out);
        current.pop();
    }
}
