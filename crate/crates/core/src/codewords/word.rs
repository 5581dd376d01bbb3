use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{contract, Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Packed {
    /// Binary alphabet, symbol `i` at bit `i % 64` of word `i / 64`; unused bits are zero.
    Bits(Vec<u64>),
    Bytes(Vec<u8>),
}

/// A fixed-length word over the alphabet `{0, .., r-1}`.
///
/// Binary words are stored bit-packed so that the distance kernel is an
/// XOR followed by a population count.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    alphabet: u16,
    len: usize,
    packed: Packed,
}

impl Codeword {
    pub fn new(symbols: &[u8], alphabet: usize) -> Result<Self> {
        contract!((2..=256).contains(&alphabet), "alphabet size {alphabet} outside [2, 256]");
        contract!(!symbols.is_empty(), "codewords have positive length");
        if let Some(bad) = symbols.iter().find(|&&s| s as usize >= alphabet) {
            return Err(Error::Contract(format!("symbol {bad} not below alphabet size {alphabet}")));
        }
        Ok(Self::from_symbols_unchecked(symbols, alphabet))
    }

    /// Caller guarantees every symbol is below `alphabet` and `alphabet` is in `[2, 256]`.
    pub(crate) fn from_symbols_unchecked(symbols: &[u8], alphabet: usize) -> Self {
        let packed = if alphabet == 2 {
            let mut bits = vec![0u64; symbols.len().div_ceil(64)];
            for (i, &s) in symbols.iter().enumerate() {
                bits[i / 64] |= (s as u64 & 1) << (i % 64);
            }
            Packed::Bits(bits)
        } else {
            Packed::Bytes(symbols.to_vec())
        };
        Codeword { alphabet: alphabet as u16, len: symbols.len(), packed }
    }

    /// Parses a digit string such as `"0110"`.
    pub fn parse(digits: &str, alphabet: usize) -> Result<Self> {
        let symbols = digits
            .chars()
            .map(|c| c.to_digit(36).map(|d| d as u8).ok_or_else(|| Error::Contract(format!("bad symbol {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(&symbols, alphabet)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet as usize
    }

    pub fn symbol(&self, i: usize) -> u8 {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        match &self.packed {
            Packed::Bits(b) => ((b[i / 64] >> (i % 64)) & 1) as u8,
            Packed::Bytes(b) => b[i],
        }
    }

    pub fn symbols(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.symbol(i)).collect()
    }

    pub fn concat(&self, other: &Codeword) -> Result<Codeword> {
        contract!(self.alphabet == other.alphabet, "alphabet mismatch in concatenation");
        let mut s = self.symbols();
        s.extend(other.symbols());
        Ok(Self::from_symbols_unchecked(&s, self.alphabet()))
    }

    fn check_comparable(&self, other: &Codeword) -> Result<()> {
        contract!(
            self.len == other.len && self.alphabet == other.alphabet,
            "codewords not comparable: lengths {} vs {}, alphabets {} vs {}",
            self.len,
            other.len,
            self.alphabet,
            other.alphabet
        );
        Ok(())
    }

    /// Number of positions where the words differ.
    pub fn mismatches(&self, other: &Codeword) -> Result<usize> {
        self.check_comparable(other)?;
        Ok(self.mismatches_unchecked(other))
    }

    #[inline]
    pub(crate) fn mismatches_unchecked(&self, other: &Codeword) -> usize {
        match (&self.packed, &other.packed) {
            (Packed::Bits(a), Packed::Bits(b)) => a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as usize).sum(),
            (Packed::Bytes(a), Packed::Bytes(b)) => a.iter().zip(b).filter(|(x, y)| x != y).count(),
            _ => unreachable!("comparable codewords share a representation"),
        }
    }

    /// Normalized Hamming distance `#{i : w_i != w'_i} / n`.
    pub fn normalized_hamming(&self, other: &Codeword) -> Result<Ratio<u64>> {
        let m = self.mismatches(other)?;
        Ok(Ratio::new(m as u64, self.len as u64))
    }
}

/// Free-function form of [`Codeword::normalized_hamming`].
pub fn normalized_hamming(w: &Codeword, v: &Codeword) -> Result<Ratio<u64>> {
    w.normalized_hamming(v)
}

/// Largest mismatch count `k` with `k / n < radius`, i.e. the membership
/// threshold of an open ball of the given radius. `None` when the ball is empty.
pub fn ball_threshold(radius: &BigRational, n: usize) -> Option<usize> {
    if !radius.is_positive() {
        return None;
    }
    let scaled = radius * BigRational::from_integer(BigInt::from(n));
    let floor = scaled.floor().to_integer();
    let k = if scaled.is_integer() { floor - 1 } else { floor };
    let k = if k.is_negative() { BigInt::zero() } else { k };
    Some(k.to_usize().unwrap_or(usize::MAX).min(n))
}

impl Ord for Codeword {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = (self.alphabet, self.len).cmp(&(other.alphabet, other.len));
        if key != Ordering::Equal {
            return key;
        }
        match (&self.packed, &other.packed) {
            (Packed::Bits(a), Packed::Bits(b)) => {
                for (x, y) in a.iter().zip(b) {
                    let diff = x ^ y;
                    if diff != 0 {
                        // The lowest differing bit is the first differing symbol.
                        let bit = diff.trailing_zeros();
                        return if (x >> bit) & 1 == 0 { Ordering::Less } else { Ordering::Greater };
                    }
                }
                Ordering::Equal
            }
            (Packed::Bytes(a), Packed::Bytes(b)) => a.cmp(b),
            _ => unreachable!(),
        }
    }
}

impl PartialOrd for Codeword {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet <= 36 {
            for i in 0..self.len {
                let c = std::char::from_digit(self.symbol(i) as u32, 36).unwrap();
                write!(f, "{c}")?;
            }
            Ok(())
        } else {
            let s: Vec<String> = self.symbols().iter().map(u8::to_string).collect();
            write!(f, "{}", s.join("."))
        }
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Codeword({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Weight;
    use proptest::prelude::*;

    fn w(s: &str) -> Codeword {
        Codeword::parse(s, 2).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(w("0101").normalized_hamming(&w("0101")).unwrap(), Ratio::new(0, 1));
        assert_eq!(w("00").normalized_hamming(&w("11")).unwrap(), Ratio::new(1, 1));
        assert_eq!(w("0011").normalized_hamming(&w("0001")).unwrap(), Ratio::new(1, 4));
    }

    #[test]
    fn incomparable_words_are_rejected() {
        assert!(w("01").mismatches(&w("011")).is_err());
        let ternary = Codeword::parse("01", 3).unwrap();
        assert!(w("01").mismatches(&ternary).is_err());
        assert!(Codeword::new(&[0, 3], 3).is_err());
        assert!(Codeword::new(&[], 2).is_err());
    }

    #[test]
    fn threshold_is_strict() {
        let r = |n, d| BigRational::from_ratio(n, d);
        assert_eq!(ball_threshold(&r(1, 4), 4), Some(0));
        assert_eq!(ball_threshold(&r(3, 10), 4), Some(1));
        assert_eq!(ball_threshold(&r(0, 1), 4), None);
        assert_eq!(ball_threshold(&r(3, 2), 4), Some(4));
        assert_eq!(ball_threshold(&r(1, 10), 20), Some(1));
    }

    #[test]
    fn ordering_is_lexicographic_across_words() {
        let long_a: String = "0".repeat(70) + "1";
        let long_b: String = "1".to_string() + &"0".repeat(70);
        assert!(w(&long_a) < w(&long_b));
        assert!(w("0011") < w("0100"));
        assert!(Codeword::parse("012", 3).unwrap() < Codeword::parse("020", 3).unwrap());
    }

    fn naive(a: &[u8], b: &[u8]) -> usize {
        a.iter().zip(b).filter(|(x, y)| x != y).count()
    }

    proptest! {
        #[test]
        fn packed_kernel_matches_naive(pair in (1usize..150).prop_flat_map(|n| (
            proptest::collection::vec(0u8..2, n), proptest::collection::vec(0u8..2, n)))) {
            let (a, b) = pair;
            let d = Codeword::new(&a, 2).unwrap().mismatches(&Codeword::new(&b, 2).unwrap()).unwrap();
            prop_assert_eq!(d, naive(&a, &b));
        }

        #[test]
        fn hamming_is_a_metric(triple in (1usize..40).prop_flat_map(|n| (
            proptest::collection::vec(0u8..3, n),
            proptest::collection::vec(0u8..3, n),
            proptest::collection::vec(0u8..3, n)))) {
            let (a, b, c) = triple;
            let (a, b, c) = (Codeword::new(&a, 3).unwrap(), Codeword::new(&b, 3).unwrap(), Codeword::new(&c, 3).unwrap());
            let d = |x: &Codeword, y: &Codeword| x.normalized_hamming(y).unwrap();
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert_eq!(d(&a, &b) == Ratio::new(0, 1), a == b);
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        }

        #[test]
        fn ordering_matches_symbol_vectors(pair in (1usize..130).prop_flat_map(|n| (
            proptest::collection::vec(0u8..2, n), proptest::collection::vec(0u8..2, n)))) {
            let (a, b) = pair;
            prop_assert_eq!(Codeword::new(&a, 2).unwrap().cmp(&Codeword::new(&b, 2).unwrap()), a.cmp(&b));
        }
    }

    /// For any `u` in the open ball `B_eps(v)`, `B_eps(v)` is inside `B_2eps(u)`.
    #[test]
    fn doubling_property_exhaustive() {
        for n in [4usize, 7, 12] {
            let words: Vec<Codeword> = (0u32..1 << n)
                .map(|x| Codeword::from_symbols_unchecked(&(0..n).map(|i| ((x >> i) & 1) as u8).collect::<Vec<_>>(), 2))
                .collect();
            for k in 1..=n.min(3) {
                // eps = k / (2n) so that thresholds differ between the two radii
                let eps = BigRational::from_ratio(k as u64, 2 * n as u64);
                let t1 = ball_threshold(&eps, n).unwrap();
                let t2 = ball_threshold(&(eps.clone() * BigRational::from_count(2)), n).unwrap();
                let v = &words[words.len() / 3];
                let ball: Vec<&Codeword> = words.iter().filter(|x| x.mismatches_unchecked(v) <= t1).collect();
                for u in &ball {
                    for x in &ball {
                        assert!(x.mismatches_unchecked(u) <= t2);
                    }
                }
            }
        }
    }
}
