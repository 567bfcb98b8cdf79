//! The two position signals under study.
//!
//! `sinusoidal_encoding` is the classic absolute encoding: interleaved
//! sine/cosine pairs at wavelengths geometrically spaced between 1 and
//! 10^4. `positionwise_masked_embedding` instead marks a digit's place
//! inside its number: for the `i`-th digit (big-endian, `i = n` at the
//! most significant place) of an `n`-digit number, the slice
//! `[floor(d/n)*(n-i), floor(d/n)*(n-i+1))` is set to one and the rest
//! to zero, so digits of equal significance share a slice regardless of
//! where the number sits in the sequence.

use super::{ModelError, Real};
use ndarray::Array1;

/// Sine/cosine absolute position vector of width `d`.
pub fn sinusoidal_encoding<A: Real>(position: usize, d: usize) -> Array1<A> {
    let mut out = Array1::zeros(d);
    for k in 0..d / 2 {
        let rate = 1.0 / 10_000f64.powf(2.0 * k as f64 / d as f64);
        let angle = position as f64 * rate;
        out[2 * k] = A::fr(angle.sin());
        out[2 * k + 1] = A::fr(angle.cos());
    }
    if d % 2 == 1 {
        let k = d / 2;
        let rate = 1.0 / 10_000f64.powf(2.0 * k as f64 / d as f64);
        out[d - 1] = A::fr((position as f64 * rate).sin());
    }
    out
}

/// Ones on the digit's slice, zeros elsewhere. `i` is the big-endian
/// digit index in `[1, n]`; `n` the digit count of the enclosing
/// number; `d` the embedding width. Fails when `floor(d/n)` is zero,
/// i.e. the number has more digits than the width can slice.
pub fn positionwise_masked_embedding<A: Real>(
    i: usize,
    n: usize,
    d: usize,
) -> Result<Array1<A>, ModelError> {
    assert!(i >= 1 && i <= n, "digit index {i} outside [1, {n}]");
    let slot = d / n;
    if slot == 0 {
        return Err(ModelError::NumberTooLongForWidth { digits: n, width: d });
    }
    let u = slot * (n - i);
    let v = slot * (n - i + 1);
    let mut out = Array1::zeros(d);
    for x in out.slice_mut(ndarray::s![u..v]).iter_mut() {
        *x = A::one();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones_span(v: &Array1<f64>) -> (usize, usize, usize) {
        let idx: Vec<usize> = v
            .iter()
            .enumerate()
            .filter_map(|(i, &x)| (x == 1.0).then_some(i))
            .collect();
        let zeros = v.iter().filter(|&&x| x == 0.0).count();
        (idx[0], idx[idx.len() - 1] + 1, zeros)
    }

    #[test]
    fn masked_slices_follow_the_big_endian_index() {
        // digits of "271": i = 3 is the most significant digit
        let msd = positionwise_masked_embedding::<f64>(3, 3, 6).unwrap();
        assert_eq!(ones_span(&msd), (0, 2, 4));
        let mid = positionwise_masked_embedding::<f64>(2, 3, 6).unwrap();
        assert_eq!(ones_span(&mid), (2, 4, 4));
        let lsd = positionwise_masked_embedding::<f64>(1, 3, 6).unwrap();
        assert_eq!(ones_span(&lsd), (4, 6, 4));
    }

    #[test]
    fn single_digit_numbers_cover_the_whole_vector() {
        let v = positionwise_masked_embedding::<f64>(1, 1, 6).unwrap();
        assert!(v.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn slices_partition_the_used_prefix() {
        let (n, d) = (5, 32);
        let slot = d / n;
        let mut coverage = vec![0u32; d];
        for i in 1..=n {
            let v = positionwise_masked_embedding::<f64>(i, n, d).unwrap();
            assert_eq!(v.iter().filter(|&&x| x == 1.0).count(), slot);
            for (j, &x) in v.iter().enumerate() {
                if x == 1.0 {
                    coverage[j] += 1;
                }
            }
        }
        // adjacent, disjoint, and exactly the first slot*n entries
        assert!(coverage[..slot * n].iter().all(|&c| c == 1));
        assert!(coverage[slot * n..].iter().all(|&c| c == 0));
    }

    #[test]
    fn too_many_digits_for_the_width_is_an_error() {
        let err = positionwise_masked_embedding::<f64>(1, 7, 6).unwrap_err();
        assert_eq!(err, ModelError::NumberTooLongForWidth { digits: 7, width: 6 });
    }

    #[test]
    fn sinusoidal_position_zero_alternates_zero_one() {
        let v = sinusoidal_encoding::<f64>(0, 8);
        assert_eq!(v.to_vec(), vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn sinusoidal_values_stay_in_unit_range() {
        for pos in [0, 1, 17, 63, 500] {
            let v = sinusoidal_encoding::<f32>(pos, 30);
            assert!(v.iter().all(|&x| (-1.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn sinusoidal_positions_are_distinct_up_to_max_length() {
        let max_len = 64;
        let encs: Vec<Array1<f64>> =
            (0..max_len).map(|p| sinusoidal_encoding(p, 16)).collect();
        for a in 0..max_len {
            for b in a + 1..max_len {
                assert_ne!(encs[a], encs[b], "positions {a} and {b} collide");
            }
        }
    }
}
