//! Codewords, normalized Hamming geometry, and the entropy bounds on how
//! many Hamming balls it takes to cover a block code.

mod bounds;
mod word;

pub use bounds::{ball_volume_log2, binary_entropy, block_cover_bound_log2, perturbed_cover_bound_log2, BoundParams};
pub use word::{ball_threshold, normalized_hamming, Codeword};
