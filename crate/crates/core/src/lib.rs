//! Sorting-network based routing for distributed and parallel quantum
//! computation.
//!
//! The crate is organised bottom-up:
//!
//! * [`topology`] builds host graphs (line, grid, hypercube, complete, custom).
//! * [`sortnet`] builds graph-local comparator networks, verifies them with
//!   the 0-1 principle and compiles them into reversible circuits.
//! * [`revcirc`] is the reversible gate-level IR with a bit-sliced simulator
//!   and depth/size/width accounting.
//! * [`datamove`] synthesizes the data-moving permutation circuit and the
//!   compile-time SWAP schedule variant.
//! * [`pram`] synthesizes single and parallel memory lookups.
//! * [`emulator`] rewrites arbitrary circuits into graph-local ones.
//! * [`qsim`] is a dense statevector simulator used for verification and
//!   Grover dynamics.
//! * [`algorithms`] holds oracle composition, Multi-Grover, Element
//!   Distinctness and Collision Finding.
//! * [`bench`] produces the depth/width tables and scaling fits.

pub mod algorithms;
pub mod bench;
pub mod datamove;
pub mod emulator;
mod error;
pub mod fit;
pub mod pram;
pub mod qsim;
pub mod revcirc;
pub mod sortnet;
pub mod topology;

pub use error::{Error, Result};

/// Number of bits needed to write any value in `0..n` (at least 0).
pub fn bits_for(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// `ceil(log2(n))` for `n >= 1`.
pub fn ceil_log2(n: usize) -> usize {
    bits_for(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_counts() {
        assert_eq!(bits_for(1), 0);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(4), 2);
        assert_eq!(bits_for(5), 3);
        assert_eq!(bits_for(64), 6);
        assert_eq!(ceil_log2(16), 4);
    }
}
