//! Structure-wide tuning constants derived from `⌈log₂ n⌉`.

/// Smallest `log_n` the parameters are ever computed for.
pub const MIN_LOG_N: u32 = 4;

/// Arity base `a`, leaf capacity `b` (in bits) and the flatten cap, all
/// derived from the `⌈log₂ n⌉` the structure was last (re)built for.
///
/// Internal nodes hold between `a/4` and `4a` children and dynamic leaves
/// hold between `b/4` and `b` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Params {
    pub log_n: u32,
    pub a: usize,
    pub b: usize,
    /// Largest subtree size that may be flattened, `⌊2^log_n / log_n⌋`.
    pub flatten_cap: usize,
}

impl Params {
    /// Computes the parameters for `log_n`, clamped below at [`MIN_LOG_N`].
    pub fn compute(log_n: u32) -> Params {
        let log_n = log_n.max(MIN_LOG_N);
        let l = log_n as f64;

        let a = (l.sqrt().ceil() as usize).max(16);

        // b = 16 * ceil(log² / (16 * log log)), with the inner log clamped at 1.
        let loglog = l.log2().max(1.0);
        let b = 16 * ((l * l) / (16.0 * loglog)).ceil() as usize;

        Params {
            log_n,
            a,
            b,
            flatten_cap: flatten_cap(log_n),
        }
    }

    /// Parameters appropriate for a structure currently holding `n` units.
    pub fn for_len(n: usize) -> Params {
        Params::compute(ceil_log2(n.max(16)))
    }
}

/// `⌊2^log_n / log_n⌋`, saturating at `usize::MAX`.
pub fn flatten_cap(log_n: u32) -> usize {
    let log_n = log_n.max(1);
    match 1usize.checked_shl(log_n) {
        Some(p) if log_n < usize::BITS => p / log_n as usize,
        _ => usize::MAX / log_n as usize,
    }
}

/// `⌈log₂ n⌉` for `n ≥ 1`; `0` for `n ≤ 1`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Whether a structure built for `built_log_n` must be rebuilt now that
/// `⌈log₂ n⌉ = current_log_n`: it grew by one, or shrank by two.
pub fn rebuild_due(current_log_n: u32, built_log_n: u32) -> bool {
    current_log_n > built_log_n || current_log_n + 2 <= built_log_n
}
