//! Shared inputs for the criterion benchmarks: the bundled example terms
//! plus a few deterministically generated larger ones.

use lamhat::gen::{gen_closed_term, gen_registry};
use lamhat::syntax::TagRegistry;
use lamhat::Term;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The registry the generated inputs draw their tags from.
pub fn registry() -> TagRegistry {
    gen_registry()
}

/// Deterministic corpus of closed terms for throughput benchmarks.
pub fn closed_corpus(count: usize, depth: usize) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBE7C);
    (0..count)
        .map(|_| gen_closed_term(&mut rng, depth))
        .collect()
}
