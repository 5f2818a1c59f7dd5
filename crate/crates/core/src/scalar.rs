//! Floating-point scalar abstraction used by the perceptron.
//!
//! Everything numeric in the network (weights, activations, normalized
//! inputs) is generic over [`Scalar`], which is implemented for `f32` and
//! `f64`. Pixel data stays `u8` regardless of the scalar type.
//!
//! The kernels are branch-free straight-line code so that the compiler can
//! vectorize them for whatever instruction set the caller is built for.
//! They never fuse multiply-adds and always reduce in the same order, so
//! results are bit-identical whichever vector width ends up being used.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Independent partial sums kept by [`Scalar::dot`].
const DOT_LANES: usize = 8;

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Copy + Send + Sync + Debug + Display + 'static
{
    /// Converts a literal; the value must be representable.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable in scalar type")
    }

    /// Widens to `f64` without loss (exact for `f32` and `f64`).
    #[inline]
    fn widen(self) -> f64 {
        self.to_f64().expect("scalar to f64")
    }

    /// Logistic sigmoid `1 / (1 + e^-x)`, accurate to a few ulps.
    fn sigmoid(self) -> Self;

    /// Applies [`Scalar::sigmoid`] elementwise.
    #[inline(always)]
    fn sigmoid_slice(xs: &mut [Self]) {
        for x in xs {
            *x = x.sigmoid();
        }
    }

    /// Inner product of two equal-length slices.
    #[inline(always)]
    fn dot(a: &[Self], b: &[Self]) -> Self {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = [Self::zero(); DOT_LANES];
        let (ca, cb) = (a.chunks_exact(DOT_LANES), b.chunks_exact(DOT_LANES));
        let (ra, rb) = (ca.remainder(), cb.remainder());
        for (x, y) in ca.zip(cb) {
            for k in 0..DOT_LANES {
                acc[k] += x[k] * y[k];
            }
        }
        for (k, (x, y)) in ra.iter().zip(rb).enumerate() {
            acc[k] += *x * *y;
        }
        ((acc[0] + acc[4]) + (acc[2] + acc[6])) + ((acc[1] + acc[5]) + (acc[3] + acc[7]))
    }
}

/// `e^x` by Cody-Waite reduction to `r = x - n ln 2`, a Taylor polynomial
/// in `r` (Estrin's scheme, for a short dependency chain), and a scale by
/// `2^n` assembled directly in the exponent bits. Inputs are clamped so
/// `2^n` stays a normal number.
macro_rules! scalar_impl {
    (
        $t:ty, mantissa: $mant:expr, bias: $bias:expr, clamp: $clamp:expr,
        log2e: $log2e:expr, ln2: ($hi:expr, $lo:expr), poly: $poly:ident
    ) => {
        impl Scalar for $t {
            #[inline(always)]
            fn sigmoid(self) -> Self {
                // Adding 1.5 * 2^mantissa rounds to an integer that also
                // sits in the low mantissa bits.
                const SHIFTER: $t = 1.5 * (1u64 << $mant) as $t;
                let z = (-self).clamp(-$clamp, $clamp);
                let t = z * $log2e + SHIFTER;
                let n = t - SHIFTER;
                let r = (z - n * $hi) - n * $lo;
                let scale = <$t>::from_bits(t.to_bits().wrapping_add($bias) << $mant);
                1.0 / (1.0 + $poly(r) * scale)
            }
        }
    };
}

/// Degree-7 Taylor polynomial of `e^r`; |r| <= ln2 / 2.
#[inline(always)]
fn exp_poly_f32(r: f32) -> f32 {
    let r2 = r * r;
    let r4 = r2 * r2;
    let q0 = 1.0 + r;
    let q1 = 1.0 / 2.0 + r * (1.0 / 6.0);
    let q2 = 1.0 / 24.0 + r * (1.0 / 120.0);
    let q3 = 1.0 / 720.0 + r * (1.0 / 5040.0);
    (q0 + r2 * q1) + r4 * (q2 + r2 * q3)
}

/// Degree-13 Taylor polynomial of `e^r`; |r| <= ln2 / 2.
#[inline(always)]
fn exp_poly_f64(r: f64) -> f64 {
    let r2 = r * r;
    let r4 = r2 * r2;
    let r8 = r4 * r4;
    let q0 = 1.0 + r;
    let q1 = 1.0 / 2.0 + r * (1.0 / 6.0);
    let q2 = 1.0 / 24.0 + r * (1.0 / 120.0);
    let q3 = 1.0 / 720.0 + r * (1.0 / 5040.0);
    let q4 = 1.0 / 40_320.0 + r * (1.0 / 362_880.0);
    let q5 = 1.0 / 3_628_800.0 + r * (1.0 / 39_916_800.0);
    let q6 = 1.0 / 479_001_600.0 + r * (1.0 / 6_227_020_800.0);
    let low = (q0 + r2 * q1) + r4 * (q2 + r2 * q3);
    let high = (q4 + r2 * q5) + r4 * q6;
    low + r8 * high
}

scalar_impl!(
    f32, mantissa: 23, bias: 127, clamp: 87.0,
    log2e: std::f32::consts::LOG2_E, ln2: (0.693_359_4, -2.121_944_4e-4), poly: exp_poly_f32
);

scalar_impl!(
    f64, mantissa: 52, bias: 1023, clamp: 708.0,
    log2e: std::f64::consts::LOG2_E, ln2: (6.931_471_803_691_238e-1, 1.908_214_929_270_587_7e-10),
    poly: exp_poly_f64
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_of_zero_is_half() {
        assert_eq!(0.0f64.sigmoid(), 0.5);
        assert_eq!(0.0f32.sigmoid(), 0.5);
    }

    #[test]
    fn sigmoid_matches_std_exp() {
        for i in -20_000..20_000 {
            let x = i as f64 * 0.0371;
            let reference = 1.0 / (1.0 + (-x).exp());
            assert!((x.sigmoid() - reference).abs() <= 4.0 * f64::EPSILON, "{x}");
            let xf = x as f32;
            let reference = 1.0 / (1.0 + (-xf).exp());
            assert!((xf.sigmoid() - reference).abs() <= 4.0 * f32::EPSILON, "{x}");
        }
    }

    #[test]
    fn sigmoid_saturates_without_nan() {
        for x in [f64::MAX, 1e300, 800.0, -800.0, -1e300, f64::MIN, f64::INFINITY, f64::NEG_INFINITY] {
            let s = x.sigmoid();
            assert!((0.0..=1.0).contains(&s), "{x} -> {s}");
            let s = (x as f32).sigmoid();
            assert!((0.0..=1.0).contains(&s), "{x} -> {s}");
        }
        assert_eq!(1000.0f64.sigmoid(), 1.0);
        assert!((-1000.0f64).sigmoid() < 1e-300);
    }

    #[test]
    fn slice_kernel_agrees_with_single_values() {
        let mut xs: Vec<f64> = (0..11).map(|i| i as f64 * 0.7 - 3.0).collect();
        let expected: Vec<f64> = xs.iter().map(|x| x.sigmoid()).collect();
        f64::sigmoid_slice(&mut xs);
        assert_eq!(xs, expected);
        let mut ys: Vec<f32> = (0..13).map(|i| i as f32 * 0.3 - 2.0).collect();
        let expected: Vec<f32> = ys.iter().map(|x| x.sigmoid()).collect();
        f32::sigmoid_slice(&mut ys);
        assert_eq!(ys, expected);
    }

    #[test]
    fn dot_handles_remainders() {
        let a: Vec<f64> = (1..=7).map(f64::from).collect();
        let b = vec![1.0; 7];
        assert_eq!(f64::dot(&a, &b), 28.0);
        let a: Vec<f32> = (1..=10).map(|v| v as f32).collect();
        assert_eq!(f32::dot(&a, &a), 385.0);
        let a: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let naive: f64 = a.iter().map(|v| v * v).sum();
        assert!((f64::dot(&a, &a) - naive).abs() < 1e-12);
    }

    #[test]
    fn widen_is_exact() {
        let x = 0.1f32;
        assert_eq!(x.widen() as f32, x);
    }
}
