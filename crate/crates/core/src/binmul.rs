//! Classical binary multiplication with explicit carry propagation.
//!
//! Long multiplication of two radix-2 numbers, kept column by column: the
//! partial-product sums `S_i`, the integer carries `C_i` flowing upward, and
//! the result bits `r_i`. This is the forward oracle that every optimization
//! model in this crate is checked against.

use crate::error::{Error, Result};

/// Little-endian bit vector: index 0 is the least significant bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVec {
    bits: Vec<u8>,
}

impl BitVec {
    /// Wraps a raw bit sequence. Every element must be 0 or 1.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Shape("bit vector contains a non-bit element".into()));
        }
        Ok(BitVec { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Sum of `bits[i] * 2^i`.
    pub fn reconstruct(&self) -> u128 {
        self.bits
            .iter()
            .enumerate()
            .map(|(i, &b)| (b as u128) << i)
            .sum()
    }
}

/// Radix-2 encoding of `x` into `n + 1` bits, least significant first.
///
/// `n` is the highest bit index, so the result always has length `n + 1`.
pub fn encode_bits(x: u128, n: u32) -> Result<BitVec> {
    let max = max_value(n);
    if x > max {
        return Err(Error::Range { value: x, n, max });
    }
    let bits = (0..=n).map(|i| ((x >> i) & 1) as u8).collect();
    Ok(BitVec { bits })
}

/// Largest value representable with highest bit index `n`, i.e. `2^(n+1) - 1`.
fn max_value(n: u32) -> u128 {
    if n >= 127 {
        u128::MAX
    } else {
        (1u128 << (n + 1)) - 1
    }
}

/// Column sums of partial products: `S[i] = sum_{j+k=i} p_j * q_k`.
///
/// Both factors must have the same length `n + 1`; the result has length
/// `2n + 1`. The two index branches (`i <= n` and `i > n`) fall out of the
/// same convolution loop.
pub fn partial_sums(p: &BitVec, q: &BitVec) -> Result<Vec<u64>> {
    if p.len() != q.len() {
        return Err(Error::Shape(format!(
            "factor bit vectors differ in length: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    if p.is_empty() {
        return Err(Error::Shape("factor bit vectors are empty".into()));
    }
    let n = p.len() - 1;
    let mut s = vec![0u64; 2 * n + 1];
    for j in 0..=n {
        if p.bit(j) == 0 {
            continue;
        }
        for k in 0..=n {
            s[j + k] += (q.bit(k)) as u64;
        }
    }
    Ok(s)
}

/// Propagates carries through the column sums.
///
/// `C[i] = floor((S[i] + C[i-1]) / 2)` with `C[-1] = 0`, and
/// `r[i] = S[i] + C[i-1] - 2*C[i]`. The result bits get one extra position:
/// `r[2n+1] = C[2n]`.
pub fn carry_and_result(s: &[u64]) -> (Vec<u64>, BitVec) {
    let mut carries = Vec::with_capacity(s.len());
    let mut bits = Vec::with_capacity(s.len() + 1);
    let mut carry_in = 0u64;
    for &si in s {
        let total = si + carry_in;
        let c = total / 2;
        let r = total - 2 * c;
        debug_assert!(r <= 1);
        carries.push(c);
        bits.push(r as u8);
        carry_in = c;
    }
    // Top carry becomes the most significant result bit. For valid products
    // of (n+1)-bit factors this carry is at most 1.
    debug_assert!(carry_in <= 1, "top carry {} exceeds one bit", carry_in);
    bits.push(carry_in as u8);
    (carries, BitVec { bits })
}

/// Worst-case carry at position `i` for factors with highest bit index `n`:
/// 0 at i = 0, `i` for 0 < i <= n, and `2n + 1 - i` above.
///
/// The all-ones factors attain these values, and no pair exceeds them.
pub fn carry_bound(i: u32, n: u32) -> Result<u64> {
    if i > 2 * n {
        return Err(Error::Range {
            value: i as u128,
            n,
            max: (2 * n) as u128,
        });
    }
    Ok(if i == 0 {
        0
    } else if i <= n {
        i as u64
    } else {
        (2 * n + 1 - i) as u64
    })
}

/// Full column-by-column multiplication table for `p * q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulTable {
    /// Highest factor bit index; factors have `n + 1` bits.
    pub n: u32,
    /// Column sums of partial products, length `2n + 1`.
    pub s: Vec<u64>,
    /// Upward carries, length `2n + 1`.
    pub c: Vec<u64>,
    /// Result bits, length `2n + 2`.
    pub r: BitVec,
}

impl MulTable {
    /// The product the table encodes, `sum r[i] * 2^i`.
    pub fn product(&self) -> u128 {
        self.r.reconstruct()
    }
}

/// Builds the multiplication table for `p * q` with factor bit index bound `n`.
pub fn multiplication_table(p: u128, q: u128, n: u32) -> Result<MulTable> {
    if p == 0 || q == 0 {
        return Err(Error::Parameter("factors must be positive".into()));
    }
    let pb = encode_bits(p, n)?;
    let qb = encode_bits(q, n)?;
    let s = partial_sums(&pb, &qb)?;
    let (c, r) = carry_and_result(&s);
    debug_assert_eq!(r.reconstruct(), p * q);
    Ok(MulTable { n, s, c, r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_bits_examples() {
        assert_eq!(encode_bits(15, 3).unwrap().bits(), &[1, 1, 1, 1]);
        assert_eq!(encode_bits(0, 0).unwrap().bits(), &[0]);
        let b = encode_bits(29, 4).unwrap();
        assert_eq!(b.bits(), &[1, 0, 1, 1, 1]);
        assert_eq!(b.reconstruct(), 29);
    }

    #[test]
    fn encode_bits_out_of_range() {
        let err = encode_bits(16, 3).unwrap_err();
        assert!(matches!(err, Error::Range { value: 16, n: 3, .. }));
    }

    #[test]
    fn partial_sums_all_ones() {
        let p = encode_bits(15, 3).unwrap();
        let s = partial_sums(&p, &p).unwrap();
        assert_eq!(s, vec![1, 2, 3, 4, 3, 2, 1]);
    }

    #[test]
    fn partial_sums_single_bit() {
        let one = encode_bits(1, 0).unwrap();
        assert_eq!(partial_sums(&one, &one).unwrap(), vec![1]);
    }

    #[test]
    fn partial_sums_five_times_three() {
        let p = encode_bits(5, 2).unwrap();
        let q = encode_bits(3, 2).unwrap();
        let s = partial_sums(&p, &q).unwrap();
        assert_eq!(s, vec![1, 1, 1, 1, 0]);
        let (_, r) = carry_and_result(&s);
        assert_eq!(r.reconstruct(), 15);
    }

    #[test]
    fn partial_sums_shape_error() {
        let p = encode_bits(5, 2).unwrap();
        let q = encode_bits(3, 1).unwrap();
        assert!(matches!(partial_sums(&p, &q), Err(Error::Shape(_))));
    }

    #[test]
    fn carry_and_result_worked_table() {
        let (c, r) = carry_and_result(&[1, 2, 3, 4, 3, 2, 1]);
        assert_eq!(c, vec![0, 1, 2, 3, 3, 2, 1]);
        assert_eq!(r.bits(), &[1, 0, 0, 0, 0, 1, 1, 1]);
        assert_eq!(r.reconstruct(), 225);
    }

    #[test]
    fn carry_and_result_trivial() {
        let (c, r) = carry_and_result(&[1]);
        assert_eq!(c, vec![0]);
        assert_eq!(r.bits(), &[1, 0]);
    }

    #[test]
    fn carry_bound_branches() {
        assert_eq!(carry_bound(0, 3).unwrap(), 0);
        assert_eq!(carry_bound(3, 3).unwrap(), 3);
        assert_eq!(carry_bound(5, 3).unwrap(), 2);
        assert!(carry_bound(7, 3).is_err());
    }

    #[test]
    fn carry_bound_dominates_exhaustively() {
        // Max over all factor pairs of the actual carry equals the bound.
        for n in 0..=4u32 {
            let hi = 1u128 << (n + 1);
            let mut max_seen = vec![0u64; 2 * n as usize + 1];
            for p in 1..hi {
                for q in 1..hi {
                    let t = multiplication_table(p, q, n).unwrap();
                    for (i, &ci) in t.c.iter().enumerate() {
                        assert!(
                            ci <= carry_bound(i as u32, n).unwrap(),
                            "carry exceeded bound at n={n}, i={i}, p={p}, q={q}"
                        );
                        max_seen[i] = max_seen[i].max(ci);
                    }
                }
            }
            for (i, &m) in max_seen.iter().enumerate() {
                assert_eq!(m, carry_bound(i as u32, n).unwrap(), "n={n}, i={i}");
            }
        }
    }

    #[test]
    fn all_ones_closed_forms() {
        // S follows i+1 / 2n+1-i and C follows the piecewise carry bound.
        for n in 0..=16u32 {
            let ones = encode_bits(max_value_checked(n), n).unwrap();
            let s = partial_sums(&ones, &ones).unwrap();
            let (c, _) = carry_and_result(&s);
            for i in 0..=(2 * n) {
                let expect_s = if i <= n { i as u64 + 1 } else { (2 * n - i) as u64 + 1 };
                assert_eq!(s[i as usize], expect_s, "S mismatch at n={n}, i={i}");
                assert_eq!(
                    c[i as usize],
                    carry_bound(i, n).unwrap(),
                    "C mismatch at n={n}, i={i}"
                );
            }
        }
    }

    fn max_value_checked(n: u32) -> u128 {
        (1u128 << (n + 1)) - 1
    }

    #[test]
    fn table_worked_example() {
        let t = multiplication_table(15, 15, 3).unwrap();
        assert_eq!(t.s, vec![1, 2, 3, 4, 3, 2, 1]);
        assert_eq!(t.c, vec![0, 1, 2, 3, 3, 2, 1]);
        assert_eq!(t.r.bits(), &[1, 0, 0, 0, 0, 1, 1, 1]);
        assert_eq!(t.product(), 225);
    }

    #[test]
    fn table_trivial_and_flagship() {
        let t = multiplication_table(1, 1, 0).unwrap();
        assert_eq!(t.s, vec![1]);
        assert_eq!(t.c, vec![0]);
        assert_eq!(t.r.bits(), &[1, 0]);

        let t = multiplication_table(29, 31, 4).unwrap();
        assert_eq!(t.product(), 899);
    }

    #[test]
    fn round_trip_exhaustive_small() {
        for n in 0..=4u32 {
            let hi = 1u128 << (n + 1);
            for p in 1..hi {
                for q in 1..hi {
                    let t = multiplication_table(p, q, n).unwrap();
                    assert_eq!(t.product(), p * q);
                    assert!(t.r.bits().iter().all(|&b| b <= 1));
                }
            }
        }
    }

    #[test]
    fn round_trip_random_wide() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=31u32);
            let hi = 1u128 << (n + 1);
            let p = rng.gen_range(1..hi);
            let q = rng.gen_range(1..hi);
            let t = multiplication_table(p, q, n).unwrap();
            assert_eq!(t.product(), p * q);
        }
    }

    #[test]
    fn partial_sums_symmetry() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(0..=10u32);
            let hi = 1u128 << (n + 1);
            let p = encode_bits(rng.gen_range(0..hi), n).unwrap();
            let q = encode_bits(rng.gen_range(0..hi), n).unwrap();
            assert_eq!(partial_sums(&p, &q).unwrap(), partial_sums(&q, &p).unwrap());
        }
    }
}
