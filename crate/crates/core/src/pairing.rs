//! Cantor pairing.

/// `pair(a, b) = (a+b)(a+b+1)/2 + b`. Panics on overflow; see [`checked_pair`].
pub fn pair(a: u64, b: u64) -> u64 {
    checked_pair(a, b).expect("pair overflow")
}

pub fn checked_pair(a: u64, b: u64) -> Option<u64> {
    let s = a.checked_add(b)?;
    let t = (s as u128) * (s as u128 + 1) / 2 + b as u128;
    u64::try_from(t).ok()
}

/// Inverse of [`pair`]; total on `u64`.
pub fn unpair(c: u64) -> (u64, u64) {
    // largest s with s(s+1)/2 <= c
    let c128 = c as u128;
    let mut s = ((8 * c128 + 1).isqrt() - 1) / 2;
    while s * (s + 1) / 2 > c128 {
        s -= 1;
    }
    while (s + 1) * (s + 2) / 2 <= c128 {
        s += 1;
    }
    let b = c128 - s * (s + 1) / 2;
    ((s - b) as u64, b as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 2), 8);
        assert_eq!(unpair(8), (1, 2));
    }

    #[test]
    fn agrees_with_diagonal_walk() {
        // walk the anti-diagonals explicitly
        let mut c = 0;
        for s in 0..60u64 {
            for b in 0..=s {
                assert_eq!(pair(s - b, b), c);
                assert_eq!(unpair(c), (s - b, b));
                c += 1;
            }
        }
    }

    #[test]
    fn large_inputs() {
        for c in [u64::MAX, u64::MAX - 1, 1 << 63, (1 << 40) + 12345] {
            let (a, b) = unpair(c);
            assert_eq!(checked_pair(a, b), Some(c));
        }
        assert_eq!(checked_pair(u64::MAX, 1), None);
    }
}
