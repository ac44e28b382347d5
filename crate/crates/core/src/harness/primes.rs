//! Seeded prime and semiprime generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Below this bound primality is settled by trial division alone.
const TRIAL_DIVISION_BOUND: u64 = 1 << 20;
/// Strong-pseudoprime rounds above the trial-division bound.
const MILLER_RABIN_ROUNDS: u32 = 40;

/// Draws an odd prime with exactly `bits` bits (top bit set).
pub fn gen_prime(bits: u32, seed: u64) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_prime_with_rng(bits, &mut rng)
}

pub(crate) fn gen_prime_with_rng(bits: u32, rng: &mut ChaCha8Rng) -> Result<u64> {
    if bits < 2 {
        return Err(Error::Parameter(format!(
            "prime bit-length must be at least 2, got {bits}"
        )));
    }
    if bits > 62 {
        return Err(Error::Parameter(format!(
            "prime bit-length {bits} exceeds the 62-bit desk-scale cap"
        )));
    }
    let top = 1u64 << (bits - 1);
    loop {
        // Top bit and LSB set; middle bits random.
        let candidate = top | rng.gen_range(0..top) | 1;
        if is_prime(candidate, rng) {
            return Ok(candidate);
        }
    }
}

/// Primality check: deterministic trial division below 2^20, strong
/// pseudoprime rounds above.
pub(crate) fn is_prime(x: u64, rng: &mut ChaCha8Rng) -> bool {
    if x < 2 {
        return false;
    }
    if x < TRIAL_DIVISION_BOUND {
        return trial_division_prime(x);
    }
    // Quick screen before the expensive rounds.
    for d in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        if x == d {
            return true;
        }
        if x % d == 0 {
            return false;
        }
    }
    miller_rabin(x, rng)
}

fn trial_division_prime(x: u64) -> bool {
    if x < 4 {
        return x >= 2;
    }
    if x % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d * d <= x {
        if x % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn miller_rabin(x: u64, rng: &mut ChaCha8Rng) -> bool {
    let n_minus_1 = x - 1;
    let s = n_minus_1.trailing_zeros();
    let d = n_minus_1 >> s;

    'rounds: for _ in 0..MILLER_RABIN_ROUNDS {
        let base = rng.gen_range(2..x - 1);
        let mut acc = pow_mod(base, d, x);
        if acc == 1 || acc == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            acc = mul_mod(acc, acc, x);
            if acc == n_minus_1 {
                continue 'rounds;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// A generated semiprime with its ground truth, which is retained for
/// validation only and never handed to a solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Semiprime {
    pub n: u128,
    pub p: u64,
    pub q: u64,
    /// Highest factor bit index, `bits/2 rounded up, minus 1`.
    pub msb: u32,
}

/// Draws two equal-bit-length primes until their product has exactly `bits`
/// bits. Factors come back sorted, `p <= q`.
pub fn gen_semiprime(bits: u32, seed: u64) -> Result<Semiprime> {
    if bits < 4 {
        return Err(Error::Parameter(format!(
            "semiprime bit-length must be at least 4, got {bits}"
        )));
    }
    let factor_bits = bits.div_ceil(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100_000 {
        let p = gen_prime_with_rng(factor_bits, &mut rng)?;
        let q = gen_prime_with_rng(factor_bits, &mut rng)?;
        let n = p as u128 * q as u128;
        if 128 - n.leading_zeros() == bits {
            return Ok(Semiprime {
                n,
                p: p.min(q),
                q: p.max(q),
                msb: factor_bits - 1,
            });
        }
    }
    Err(Error::Parameter(format!(
        "no {bits}-bit product of two {factor_bits}-bit primes found"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::verify_factorization;

    /// Independent oracle: naive trial division, shared with nothing above.
    fn oracle_is_prime(x: u64) -> bool {
        if x < 2 {
            return false;
        }
        let mut d = 2u64;
        while d * d <= x {
            if x % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn two_bit_prime_is_three() {
        for seed in 0..10 {
            assert_eq!(gen_prime(2, seed).unwrap(), 3);
        }
    }

    #[test]
    fn five_bit_primes_come_from_the_known_set() {
        let known = [17u64, 19, 23, 29, 31];
        for seed in 0..50 {
            let p = gen_prime(5, seed).unwrap();
            assert!(known.contains(&p), "{p} is not a 5-bit prime");
        }
    }

    #[test]
    fn generated_primes_pass_the_oracle() {
        for bits in [2u32, 5, 8, 12, 16, 20] {
            for seed in 0..20 {
                let p = gen_prime(bits, seed).unwrap();
                assert!(oracle_is_prime(p), "{p} is composite");
                assert_eq!(64 - p.leading_zeros(), bits, "{p} has the wrong width");
                assert_eq!(p % 2, 1);
            }
        }
    }

    #[test]
    fn miller_rabin_path_agrees_with_oracle() {
        // Values straddling the trial-division bound, including known
        // primes, composites and a strong-pseudoprime candidate base.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for x in [
            1_048_573u64, // prime below the bound
            1_048_583,    // prime above the bound
            1_048_585,    // composite (5 * ...)
            2_147_483_647, // Mersenne prime 2^31 - 1
            3_215_031_751, // strong pseudoprime to bases 2,3,5,7
            67_280_421_310_721, // prime
        ] {
            assert_eq!(is_prime(x, &mut rng), oracle_is_prime(x), "mismatch at {x}");
        }
    }

    #[test]
    fn four_bit_semiprime_is_nine() {
        let sp = gen_semiprime(4, 123).unwrap();
        assert_eq!((sp.n, sp.p, sp.q, sp.msb), (9, 3, 3, 1));
    }

    #[test]
    fn ten_bit_semiprimes_have_five_bit_factors() {
        for seed in 0..20 {
            let sp = gen_semiprime(10, seed).unwrap();
            assert_eq!(128 - sp.n.leading_zeros(), 10);
            assert_eq!(sp.msb, 4);
            assert!(verify_factorization(sp.p as u128, sp.q as u128, sp.n).valid);
        }
    }

    #[test]
    fn hundred_sixteen_bit_draws_are_valid() {
        for seed in 0..100 {
            let sp = gen_semiprime(16, seed).unwrap();
            assert!(verify_factorization(sp.p as u128, sp.q as u128, sp.n).valid);
            assert!(sp.p <= sp.q);
            assert!(oracle_is_prime(sp.p) && oracle_is_prime(sp.q));
        }
    }

    #[test]
    fn rejects_tiny_requests() {
        assert!(gen_prime(1, 0).is_err());
        assert!(gen_semiprime(3, 0).is_err());
    }
}
