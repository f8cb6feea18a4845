//! Numerical checks of the probability bounds behind the regret analysis.

pub mod conjecture;
pub mod inequalities;
pub mod sandwich;

/// Monte Carlo proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub hits: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        Self {
            value: hits as f64 / trials as f64,
            se: binomial_se(hits, trials),
            hits,
            trials,
        }
    }
}

/// Wald standard error `sqrt(p(1-p)/n)`. When the count sits on the boundary
/// (no hits or all hits) the Agresti-Coull proportion `(x+2)/(n+4)` is used
/// instead so the error is never reported as exactly zero.
pub fn binomial_se(hits: u64, trials: u64) -> f64 {
    let n = trials as f64;
    if hits == 0 || hits == trials {
        let p = (hits as f64 + 2.0) / (n + 4.0);
        (p * (1.0 - p) / (n + 4.0)).sqrt()
    } else {
        let p = hits as f64 / n;
        (p * (1.0 - p) / n).sqrt()
    }
}

/// Paths per rayon task in the Monte Carlo routines; fixes the stream layout.
pub(crate) const CHUNK: u64 = 1 << 14;

pub(crate) fn chunks(total: u64) -> impl rayon::iter::ParallelIterator<Item = (u64, u64)> {
    use rayon::prelude::*;
    let n_chunks = total.div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .map(move |c| (c, CHUNK.min(total - c * CHUNK)))
}
