//! Fixed-magnetization computational basis with combinatorial ranking.

use crate::error::{Error, Result};

/// Largest supported site count; states are stored as `u32` masks.
pub const MAX_SITES: usize = 32;

/// Default limit on the number of basis states.
pub const DEFAULT_MAX_STATES: usize = 50_000_000;

/// Binomial coefficient `C(n, k)` for `n <= 64` (saturating).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).unwrap_or(u64::MAX)
}

/// All `n`-bit masks with exactly `n_up` set bits, in ascending order.
///
/// Bit `i` set means spin `i` points up. For a fixed popcount, ascending
/// numeric order coincides with colexicographic order of the set-bit
/// positions, so the index of a mask is
/// `sum_j C(p_j, j + 1)` over its set-bit positions `p_0 < p_1 < ...`.
#[derive(Debug, Clone)]
pub struct BandBasis {
    n: usize,
    n_up: usize,
    states: Vec<u32>,
    // binom[p][j] = C(p, j)
    binom: Vec<Vec<u64>>,
}

impl BandBasis {
    /// Central band: `n_up = floor(n / 2)`.
    pub fn central(n: usize) -> Result<Self> {
        Self::new(n, n / 2)
    }

    pub fn new(n: usize, n_up: usize) -> Result<Self> {
        Self::with_limit(n, n_up, DEFAULT_MAX_STATES)
    }

    pub fn with_limit(n: usize, n_up: usize, max_states: usize) -> Result<Self> {
        if n > MAX_SITES {
            return Err(Error::Capacity {
                what: "site count",
                requested: n,
                limit: MAX_SITES,
                hint: "",
            });
        }
        if n_up > n {
            return Err(Error::param(
                "n_up",
                format!("{n_up} exceeds site count {n}"),
            ));
        }
        let dim = binomial(n, n_up);
        if dim > max_states as u64 {
            return Err(Error::Capacity {
                what: "band basis states",
                requested: usize::try_from(dim).unwrap_or(usize::MAX),
                limit: max_states,
                hint: "",
            });
        }
        let dim = dim as usize;
        let mut states = Vec::with_capacity(dim);
        if n_up == 0 {
            states.push(0);
        } else {
            let limit: u64 = 1u64 << n;
            let mut v: u64 = (1u64 << n_up) - 1;
            while v < limit {
                states.push(v as u32);
                // Gosper's hack: next integer with the same popcount.
                let c = v & v.wrapping_neg();
                let r = v + c;
                v = (((r ^ v) >> 2) / c) | r;
            }
        }
        debug_assert_eq!(states.len(), dim);
        let binom = (0..=n)
            .map(|p| (0..=n_up.max(1)).map(|j| binomial(p, j)).collect())
            .collect();
        Ok(Self {
            n,
            n_up,
            states,
            binom,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn state(&self, k: usize) -> u32 {
        self.states[k]
    }

    /// Index of `mask` in the basis, or `None` if it is not a band state.
    pub fn rank(&self, mask: u32) -> Option<usize> {
        if mask.count_ones() as usize != self.n_up || (self.n < 32 && mask >> self.n != 0) {
            return None;
        }
        let mut rest = mask;
        let mut idx = 0u64;
        let mut j = 0;
        while rest != 0 {
            let p = rest.trailing_zeros() as usize;
            idx += self.binom[p][j + 1];
            j += 1;
            rest &= rest - 1;
        }
        Some(idx as usize)
    }
}
