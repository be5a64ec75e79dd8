//! Adaptive Golomb-Rice coding of zigzagged quantization indices.

use super::bits::{BitReader, BitWriter};

/// Unary prefixes of this length switch to a raw 32-bit escape.
pub const ESCAPE_LENGTH: u32 = 24;
pub const MAX_K: u32 = 24;

const INITIAL_A: u64 = 4;
const INITIAL_N: u32 = 1;
const RESET_N: u32 = 64;

/// `0, -1, 1, -2, 2, ...` to `0, 1, 2, 3, 4, ...`.
#[inline]
pub fn zigzag(m: i32) -> u32 {
    ((m << 1) ^ (m >> 31)) as u32
}

#[inline]
pub fn unzigzag(u: u32) -> i32 {
    ((u >> 1) as i32) ^ -((u & 1) as i32)
}

pub fn rice_encode(out: &mut BitWriter, u: u32, k: u32) {
    debug_assert!(k <= MAX_K);
    let q = u >> k;
    if q < ESCAPE_LENGTH {
        out.write_zeros(q);
        out.write_bit(true);
        out.write_bits(u & ((1 << k) - 1), k);
    } else {
        out.write_zeros(ESCAPE_LENGTH);
        out.write_bits(u, 32);
    }
}

/// `None` when the input runs out mid-codeword.
pub fn rice_decode(input: &mut BitReader<'_>, k: u32) -> Option<u32> {
    let mut q = 0;
    while q < ESCAPE_LENGTH {
        if input.read_bit()? {
            let r = input.read_bits(k)?;
            return Some((q << k) | r);
        }
        q += 1;
    }
    input.read_bits(32)
}

/// Running magnitude statistics of one coding context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RiceContext {
    a: u64,
    n: u32,
}

impl Default for RiceContext {
    fn default() -> Self {
        Self { a: INITIAL_A, n: INITIAL_N }
    }
}

impl RiceContext {
    pub fn with_state(a: u64, n: u32) -> Self {
        assert!(n >= 1);
        Self { a, n }
    }

    pub fn state(&self) -> (u64, u32) {
        (self.a, self.n)
    }

    /// Smallest `k` with `N·2^k >= A`.
    #[inline]
    pub fn k(&self) -> u32 {
        let n = u64::from(self.n);
        let mut k = 0;
        while k < MAX_K && (n << k) < self.a {
            k += 1;
        }
        k
    }

    #[inline]
    pub fn update(&mut self, u: u32) {
        self.a += u64::from(u);
        self.n += 1;
        if self.n == RESET_N {
            self.a = self.a.div_ceil(2);
            self.n = RESET_N / 2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    fn bits_of(f: impl FnOnce(&mut BitWriter)) -> String {
        let mut w = BitWriter::new();
        f(&mut w);
        let len = w.bit_len();
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        (0..len).map(|_| if r.read_bit().unwrap() { '1' } else { '0' }).collect()
    }

    #[test]
    fn zigzag_order() {
        let expected = [(0, 0), (-1, 1), (1, 2), (-2, 3), (2, 4)];
        for (m, u) in expected {
            assert_eq!(zigzag(m), u);
        }
        for m in -1000..=1000 {
            assert_eq!(unzigzag(zigzag(m)), m);
        }
        for m in [i32::MIN, i32::MAX] {
            assert_eq!(unzigzag(zigzag(m)), m);
        }
    }

    #[test]
    fn codewords() {
        assert_eq!(bits_of(|w| rice_encode(w, 0, 0)), "1");
        assert_eq!(bits_of(|w| rice_encode(w, 5, 1)), "0011");
        assert_eq!(bits_of(|w| rice_encode(w, 0, 2)), "100");
        assert_eq!(bits_of(|w| rice_encode(w, 23, 0)), "0".repeat(23) + "1");
    }

    #[test]
    fn escape_codeword() {
        let s = bits_of(|w| rice_encode(w, 24, 0));
        assert_eq!(s.len(), 24 + 32);
        assert_eq!(&s[..24], "0".repeat(24));
        assert_eq!(&s[24..], alloc::format!("{:032b}", 24));
        let mut w = BitWriter::new();
        rice_encode(&mut w, u32::MAX, 3);
        let bytes = w.finish();
        assert_eq!(rice_decode(&mut BitReader::new(&bytes), 3), Some(u32::MAX));
    }

    #[test]
    fn decode_inverts_encode() {
        for k in [0, 1, 2, 5, 24] {
            for u in (0..2000).chain([1 << 20, 1 << 29, u32::MAX]) {
                let mut w = BitWriter::new();
                rice_encode(&mut w, u, k);
                let bytes = w.finish();
                assert_eq!(rice_decode(&mut BitReader::new(&bytes), k), Some(u), "u={u} k={k}");
            }
        }
    }

    #[test]
    fn truncated_codeword() {
        assert_eq!(rice_decode(&mut BitReader::new(&[0x00]), 0), None);
        // "01" then k=8 remainder bits that are not there
        assert_eq!(rice_decode(&mut BitReader::new(&[0b0100_0000]), 8), None);
    }

    #[test]
    fn k_selection() {
        assert_eq!(RiceContext::with_state(0, 1).k(), 0);
        assert_eq!(RiceContext::with_state(9, 2).k(), 3);
        assert_eq!(RiceContext::with_state(8, 2).k(), 2);
        assert_eq!(RiceContext::default().k(), 2);
        assert_eq!(RiceContext::with_state(u64::MAX, 1).k(), MAX_K);
    }

    #[test]
    fn counters_halve_at_64() {
        let mut ctx = RiceContext::default();
        for _ in 0..62 {
            ctx.update(3);
        }
        assert_eq!(ctx.state(), (4 + 62 * 3, 63));
        ctx.update(3);
        assert_eq!(ctx.state(), ((4u64 + 63 * 3).div_ceil(2), 32));
    }

    #[test]
    fn halving_keeps_k_for_a_steady_source() {
        for u in [0u32, 1, 2, 5, 13, 40, 300] {
            let mut ctx = RiceContext::default();
            for _ in 0..200 {
                ctx.update(u);
            }
            // drive to just before the reset and compare across it
            while ctx.state().1 != RESET_N - 1 {
                ctx.update(u);
            }
            let mut before = ctx;
            before.a += u64::from(u);
            before.n += 1;
            let k_before = before.k();
            ctx.update(u);
            assert_eq!(ctx.state().1, RESET_N / 2);
            assert_eq!(ctx.k(), k_before, "u={u}");
        }
    }
}
