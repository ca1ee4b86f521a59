//! Systematic CRC outer code and its split into list-pruning and
//! error-detection parity constraints.
//!
//! The split realizes the two cascaded outer codes as a partition of the
//! parity-check equations of the single base CRC: the check matrix is put
//! in reduced row echelon form (a canonical basis of the dual code), the
//! first `delta1` rows become the pruning constraints and the remaining
//! `delta2` rows the detection constraints. The conjunction of the two
//! constraint sets is exactly CRC membership, so the concatenation is
//! equivalent to the base code by construction.

use crate::bits::{dot, parse_hex_poly};
use crate::error::{Error, Result};

/// A systematic CRC code appending `delta` parity bits to `message_len`
/// message bits.
///
/// Register semantics are plain polynomial division: all-zero initial
/// state, no final XOR, no bit reflection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrcSpec {
    poly: Vec<u8>,
    delta: usize,
    message_len: usize,
}

impl CrcSpec {
    /// Build from an explicit polynomial bit vector (degree-`delta`
    /// polynomial as `delta + 1` bits, most-significant first, leading 1).
    pub fn new(poly: Vec<u8>, message_len: usize) -> Result<Self> {
        if poly.is_empty() || poly[0] != 1 {
            return Err(Error::invalid(
                "CRC polynomial must be non-empty with a leading 1 bit",
            ));
        }
        if poly.iter().any(|&b| b > 1) {
            return Err(Error::invalid("CRC polynomial bits must be 0/1"));
        }
        if message_len == 0 {
            return Err(Error::invalid("message length must be positive"));
        }
        let delta = poly.len() - 1;
        Ok(Self {
            poly,
            delta,
            message_len,
        })
    }

    /// Build from a hex literal such as `0x43` (see [`parse_hex_poly`]).
    pub fn from_hex(hex: &str, message_len: usize) -> Result<Self> {
        Self::new(parse_hex_poly(hex)?, message_len)
    }

    /// The degenerate "no outer code" case (`delta = 0`).
    pub fn none(message_len: usize) -> Self {
        Self::new(vec![1], message_len).expect("trivial polynomial is valid")
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn message_len(&self) -> usize {
        self.message_len
    }

    /// Codeword length `h = k + delta`.
    pub fn codeword_len(&self) -> usize {
        self.message_len + self.delta
    }

    pub fn poly(&self) -> &[u8] {
        &self.poly
    }

    /// Remainder of the bit string (interpreted MSB-first as a polynomial)
    /// modulo the CRC polynomial. Output has `delta` bits.
    fn remainder(&self, word: &[u8]) -> Vec<u8> {
        let mut work = word.to_vec();
        if work.len() < self.delta {
            // Pad from the left; degree below delta is already reduced.
            let mut padded = vec![0u8; self.delta];
            let off = self.delta - work.len();
            padded[off..].copy_from_slice(&work);
            return padded;
        }
        for i in 0..work.len() - self.delta {
            if work[i] == 1 {
                for (j, &p) in self.poly.iter().enumerate() {
                    work[i + j] ^= p;
                }
            }
        }
        work[work.len() - self.delta..].to_vec()
    }
}

/// Systematic CRC encoding: the message followed by `delta` parity bits.
pub fn crc_encode(msg: &[u8], spec: &CrcSpec) -> Result<Vec<u8>> {
    if msg.len() != spec.message_len {
        return Err(Error::invalid(format!(
            "message length {} does not match spec ({})",
            msg.len(),
            spec.message_len
        )));
    }
    let mut shifted = msg.to_vec();
    shifted.extend(std::iter::repeat(0u8).take(spec.delta));
    let parity = spec.remainder(&shifted);
    let mut out = msg.to_vec();
    out.extend_from_slice(&parity);
    Ok(out)
}

/// True iff `word` is a codeword of the systematic CRC code.
pub fn crc_check(word: &[u8], spec: &CrcSpec) -> Result<bool> {
    if word.len() != spec.codeword_len() {
        return Err(Error::invalid(format!(
            "word length {} does not match codeword length {}",
            word.len(),
            spec.codeword_len()
        )));
    }
    Ok(spec.remainder(word).iter().all(|&b| b == 0))
}

/// The base CRC with its parity constraints partitioned into `delta1`
/// pruning equations and `delta2 = delta - delta1` detection equations.
#[derive(Debug, Clone)]
pub struct OuterSplit {
    base: CrcSpec,
    delta1: usize,
    /// RREF rows of the parity-check matrix, pivot columns ascending.
    rows: Vec<Vec<u8>>,
}

/// Parity-check matrix of the CRC code (delta rows, h columns): row i of
/// the reduced row echelon form of the matrix whose column j is the
/// remainder of x^(h-1-j) modulo the generator polynomial.
fn parity_rows(spec: &CrcSpec) -> Vec<Vec<u8>> {
    let h = spec.codeword_len();
    let delta = spec.delta();
    if delta == 0 {
        return Vec::new();
    }
    // Raw rows: remainder coefficients of each unit word.
    let mut rows = vec![vec![0u8; h]; delta];
    for j in 0..h {
        let mut unit = vec![0u8; h];
        unit[j] = 1;
        let rem = spec.remainder(&unit);
        for (i, &bit) in rem.iter().enumerate() {
            rows[i][j] = bit;
        }
    }
    // Gauss-Jordan to reduced row echelon form over GF(2).
    let mut pivot_row = 0;
    for col in 0..h {
        if pivot_row == delta {
            break;
        }
        let Some(r) = (pivot_row..delta).find(|&r| rows[r][col] == 1) else {
            continue;
        };
        rows.swap(pivot_row, r);
        for r in 0..delta {
            if r != pivot_row && rows[r][col] == 1 {
                let (a, b) = if r < pivot_row {
                    let (lo, hi) = rows.split_at_mut(pivot_row);
                    (&mut lo[r], &hi[0])
                } else {
                    let (lo, hi) = rows.split_at_mut(r);
                    (&mut hi[0], &lo[pivot_row])
                };
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x ^= y;
                }
            }
        }
        pivot_row += 1;
    }
    debug_assert_eq!(pivot_row, delta, "CRC parity rows must be independent");
    rows
}

/// Partition the CRC parity constraints: the first `delta1` canonical
/// equations prune the decoder list, the rest detect errors.
pub fn split_outer(spec: &CrcSpec, delta1: usize) -> Result<OuterSplit> {
    if delta1 > spec.delta() {
        return Err(Error::invalid(format!(
            "delta1 = {delta1} exceeds the CRC parity bit count {}",
            spec.delta()
        )));
    }
    Ok(OuterSplit {
        rows: parity_rows(spec),
        base: spec.clone(),
        delta1,
    })
}

impl OuterSplit {
    pub fn base(&self) -> &CrcSpec {
        &self.base
    }

    pub fn delta1(&self) -> usize {
        self.delta1
    }

    pub fn delta2(&self) -> usize {
        self.base.delta() - self.delta1
    }

    /// Bit i of the result is parity equation i evaluated on `word`
    /// (1 = violated). Equation indices follow the canonical RREF order,
    /// so the pruning set is the low `delta1` bits.
    pub fn syndrome(&self, word: &[u8]) -> Result<u64> {
        if word.len() != self.base.codeword_len() {
            return Err(Error::invalid(format!(
                "word length {} does not match codeword length {}",
                word.len(),
                self.base.codeword_len()
            )));
        }
        assert!(self.rows.len() <= 64, "syndrome mask limited to 64 rows");
        let mut s = 0u64;
        for (i, row) in self.rows.iter().enumerate() {
            s |= u64::from(dot(row, word)) << i;
        }
        Ok(s)
    }

    pub fn prune_mask(&self) -> u64 {
        mask_lo(self.delta1)
    }

    pub fn detect_mask(&self) -> u64 {
        mask_lo(self.base.delta()) & !self.prune_mask()
    }

    /// Row `i` of the canonical parity system (test and construction use).
    pub fn row(&self, i: usize) -> &[u8] {
        &self.rows[i]
    }

    /// Column index of the pivot of row `i`.
    pub fn pivot_col(&self, i: usize) -> usize {
        self.rows[i]
            .iter()
            .position(|&b| b == 1)
            .expect("RREF row is nonzero")
    }
}

fn mask_lo(n: usize) -> u64 {
    if n == 0 {
        0
    } else if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Evaluate only the pruning subset of parity equations.
pub fn check_prune(word: &[u8], split: &OuterSplit) -> Result<bool> {
    Ok(split.syndrome(word)? & split.prune_mask() == 0)
}

/// Evaluate only the detection subset of parity equations.
pub fn check_detect(word: &[u8], split: &OuterSplit) -> Result<bool> {
    Ok(split.syndrome(word)? & split.detect_mask() == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent long-division oracle working on integers: the word is
    /// packed MSB-first into a u128 and reduced from the top bit down.
    fn crc_remainder_u128(word: &[u8], poly: &[u8]) -> u128 {
        assert!(word.len() <= 120);
        let delta = poly.len() - 1;
        let mut w: u128 = 0;
        for &b in word {
            w = (w << 1) | u128::from(b);
        }
        let mut g: u128 = 0;
        for &b in poly {
            g = (g << 1) | u128::from(b);
        }
        let mut bit = word.len();
        while bit > delta {
            bit -= 1;
            if (w >> bit) & 1 == 1 {
                w ^= g << (bit - delta);
            }
        }
        w
    }

    fn oracle_encode(msg: &[u8], poly: &[u8]) -> Vec<u8> {
        let delta = poly.len() - 1;
        let mut shifted = msg.to_vec();
        shifted.extend(std::iter::repeat(0u8).take(delta));
        let rem = crc_remainder_u128(&shifted, poly);
        let mut out = msg.to_vec();
        for i in (0..delta).rev() {
            out.push(((rem >> i) & 1) as u8);
        }
        out
    }

    #[test]
    fn all_zero_message_maps_to_all_zero_codeword() {
        let spec = CrcSpec::from_hex("0x43", 16).unwrap();
        let cw = crc_encode(&vec![0; 16], &spec).unwrap();
        assert!(cw.iter().all(|&b| b == 0));
        assert!(crc_check(&cw, &spec).unwrap());
    }

    #[test]
    fn crc6_matches_independent_division_oracle() {
        let spec = CrcSpec::from_hex("0x43", 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // One fixed message plus a fuzz batch.
        let fixed: Vec<u8> = (0..32).map(|i| ((i * 7 + 3) % 5 == 0) as u8).collect();
        let mut messages = vec![fixed];
        for _ in 0..200 {
            messages.push(random_bits(32, &mut rng));
        }
        for msg in messages {
            assert_eq!(
                crc_encode(&msg, &spec).unwrap(),
                oracle_encode(&msg, spec.poly()),
            );
        }
    }

    #[test]
    fn delta_zero_encode_is_identity() {
        let spec = CrcSpec::none(10);
        let msg = vec![1, 0, 1, 1, 0, 0, 1, 0, 1, 1];
        assert_eq!(crc_encode(&msg, &spec).unwrap(), msg);
        assert!(crc_check(&msg, &spec).unwrap());
        assert_eq!(spec.delta(), 0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let spec = CrcSpec::from_hex("0x43", 16).unwrap();
        assert!(crc_encode(&vec![0; 15], &spec).is_err());
        assert!(crc_check(&vec![0; 16], &spec).is_err());
        let split = split_outer(&spec, 3).unwrap();
        assert!(check_prune(&vec![0; 21], &split).is_err());
    }

    #[test]
    fn every_single_bit_flip_is_detected_by_crc6() {
        // x^6 + x + 1: x^i mod g is never zero, so all weight-1 errors
        // are caught. Verified here by enumeration.
        let spec = CrcSpec::from_hex("0x43", 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let cw = crc_encode(&random_bits(24, &mut rng), &spec).unwrap();
            for pos in 0..cw.len() {
                let mut bad = cw.clone();
                bad[pos] ^= 1;
                assert!(!crc_check(&bad, &spec).unwrap(), "flip at {pos} accepted");
            }
        }
    }

    #[test]
    fn random_word_acceptance_rate_near_two_to_minus_delta() {
        let spec = CrcSpec::from_hex("0x89", 25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 200_000u64;
        let mut accepted = 0u64;
        for _ in 0..trials {
            let w = random_bits(spec.codeword_len(), &mut rng);
            if crc_check(&w, &spec).unwrap() {
                accepted += 1;
            }
        }
        let p = 2f64.powi(-(spec.delta() as i32));
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        let rate = accepted as f64 / trials as f64;
        assert!(
            (rate - p).abs() < 4.0 * se,
            "acceptance rate {rate} vs {p} (se {se})"
        );
    }

    #[test]
    fn split_covers_trivial_partitions() {
        let spec = CrcSpec::from_hex("0x89", 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let all_prune = split_outer(&spec, spec.delta()).unwrap();
        let all_detect = split_outer(&spec, 0).unwrap();
        assert_eq!(all_prune.delta2(), 0);
        assert_eq!(all_detect.delta1(), 0);
        for _ in 0..2_000 {
            let w = random_bits(spec.codeword_len(), &mut rng);
            // delta1 = delta: detection is vacuous, pruning = full check.
            assert!(check_detect(&w, &all_prune).unwrap());
            assert_eq!(
                check_prune(&w, &all_prune).unwrap(),
                crc_check(&w, &spec).unwrap()
            );
            // delta1 = 0: pruning is vacuous.
            assert!(check_prune(&w, &all_detect).unwrap());
            assert_eq!(
                check_detect(&w, &all_detect).unwrap(),
                crc_check(&w, &spec).unwrap()
            );
        }
    }

    #[test]
    fn split_conjunction_equals_full_check() {
        let spec = CrcSpec::from_hex("0x1D5", 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for delta1 in 0..=spec.delta() {
            let split = split_outer(&spec, delta1).unwrap();
            for _ in 0..3_000 {
                let w = random_bits(spec.codeword_len(), &mut rng);
                let both =
                    check_prune(&w, &split).unwrap() && check_detect(&w, &split).unwrap();
                assert_eq!(both, crc_check(&w, &spec).unwrap());
            }
        }
    }

    #[test]
    fn pivot_flip_violates_exactly_one_detection_row() {
        let spec = CrcSpec::from_hex("0x89", 20).unwrap();
        let split = split_outer(&spec, 3).unwrap();
        let cw = crc_encode(&random_bits(20, &mut ChaCha8Rng::seed_from_u64(2)), &spec).unwrap();
        // Flipping the pivot bit of a detection-set row flips only that
        // equation (RREF: the pivot column is zero in every other row).
        let detect_row = split.delta1(); // first detection equation
        let mut bad = cw.clone();
        bad[split.pivot_col(detect_row)] ^= 1;
        assert!(check_prune(&bad, &split).unwrap());
        assert!(!check_detect(&bad, &split).unwrap());
        assert_eq!(
            split.syndrome(&bad).unwrap(),
            1u64 << detect_row,
            "exactly one violated equation expected"
        );
    }

    #[test]
    fn detect_only_acceptance_rate_is_two_to_minus_delta2() {
        let spec = CrcSpec::from_hex("0x1D5", 16).unwrap();
        let split = split_outer(&spec, 5).unwrap(); // delta2 = 3
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let trials = 100_000u64;
        let mut pass = 0u64;
        for _ in 0..trials {
            if check_detect(&random_bits(spec.codeword_len(), &mut rng), &split).unwrap() {
                pass += 1;
            }
        }
        let p = 2f64.powi(-(split.delta2() as i32));
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((pass as f64 / trials as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn split_delta1_out_of_range_rejected() {
        let spec = CrcSpec::from_hex("0x43", 10).unwrap();
        assert!(split_outer(&spec, 7).is_err());
        assert!(split_outer(&spec, 6).is_ok());
    }

    proptest! {
        #[test]
        fn prop_round_trip(msg in proptest::collection::vec(0u8..2, 24)) {
            let spec = CrcSpec::from_hex("0x89", 24).unwrap();
            let cw = crc_encode(&msg, &spec).unwrap();
            prop_assert!(crc_check(&cw, &spec).unwrap());
        }

        #[test]
        fn prop_linearity(
            a in proptest::collection::vec(0u8..2, 24),
            b in proptest::collection::vec(0u8..2, 24),
        ) {
            let spec = CrcSpec::from_hex("0x1D5", 24).unwrap();
            let ea = crc_encode(&a, &spec).unwrap();
            let eb = crc_encode(&b, &spec).unwrap();
            let ab = crate::bits::xor(&a, &b);
            prop_assert_eq!(crc_encode(&ab, &spec).unwrap(), crate::bits::xor(&ea, &eb));
        }

        #[test]
        fn prop_split_equivalence(
            w in proptest::collection::vec(0u8..2, 30),
            delta1 in 0usize..=6,
        ) {
            let spec = CrcSpec::from_hex("0x43", 24).unwrap();
            let split = split_outer(&spec, delta1).unwrap();
            let both = check_prune(&w, &split).unwrap() && check_detect(&w, &split).unwrap();
            prop_assert_eq!(both, crc_check(&w, &spec).unwrap());
        }
    }
}
