//! The 6 -> H -> 2 pair-similarity perceptron.
//!
//! Input is the color pair `(r, g, b, r', g', b')` divided by the
//! normalization constant; both layers use the logistic sigmoid. Output 0
//! scores "join", output 1 scores "reject".

mod format;
mod train;

pub use format::{parse_model, serialize_model, MSF_MAGIC};
pub use train::{EpochProgress, Gradients, TrainConfig, TrainReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::Rgb;
use crate::scalar::Scalar;

pub const INPUTS: usize = 6;
pub const OUTPUTS: usize = 2;
pub const DEFAULT_HIDDEN: usize = 50;
/// Channel divisor mapping 8-bit values onto `[0, 1]`.
pub const DEFAULT_NORM: f64 = 255.0;

/// Initial weights are drawn from `[-INIT_RANGE, INIT_RANGE]`.
const INIT_RANGE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Join,
    Reject,
}

impl Decision {
    /// One-hot training target `(join, reject)`.
    pub fn target<T: Scalar>(self) -> [T; OUTPUTS] {
        match self {
            Decision::Join => [T::one(), T::zero()],
            Decision::Reject => [T::zero(), T::one()],
        }
    }
}

/// A normalized pair vector with its expected decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub input: [T; INPUTS],
    pub target: Decision,
}

impl<T: Scalar> Sample<T> {
    pub fn new(input: [T; INPUTS], target: Decision) -> Result<Self> {
        if input.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(Error::Range(format!("sample input {input:?} outside [0, 1]")));
        }
        Ok(Self { input, target })
    }

    /// Builds the sample for the ordered pair `(first, second)`.
    pub fn from_pair(first: Rgb, second: Rgb, target: Decision) -> Self {
        Self { input: pair_input(first, second, T::lit(DEFAULT_NORM)), target }
    }
}

/// The six-component network input for an ordered color pair.
#[inline]
pub fn pair_input<T: Scalar>(first: Rgb, second: Rgb, norm: T) -> [T; INPUTS] {
    let c = |v: u8| T::lit(v as f64) / norm;
    [c(first.r), c(first.g), c(first.b), c(second.r), c(second.g), c(second.b)]
}

/// Weights of a three-layer perceptron with `hidden` sigmoid units.
///
/// The first layer is stored input-major: `w1[i * hidden + j]` connects
/// input `i` to hidden unit `j`. `w2` holds one row of `hidden` weights per
/// output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    hidden: usize,
    pub(crate) w1: Vec<T>,
    pub(crate) b1: Vec<T>,
    pub(crate) w2: Vec<T>,
    pub(crate) b2: [T; OUTPUTS],
    norm: T,
}

impl<T: Scalar> Mlp<T> {
    /// Seeded uniform initialization in `[-0.5, 0.5]`. Draw order: hidden
    /// unit rows of w1, b1, w2 rows, b2.
    pub fn init(hidden: usize, seed: u64) -> Result<Self> {
        let mut mlp = Self::zeros(hidden)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || T::lit(rng.gen_range(-INIT_RANGE..=INIT_RANGE));
        for j in 0..hidden {
            for i in 0..INPUTS {
                mlp.w1[i * hidden + j] = draw();
            }
        }
        for p in mlp.b1.iter_mut().chain(&mut mlp.w2).chain(&mut mlp.b2) {
            *p = draw();
        }
        Ok(mlp)
    }

    pub fn zeros(hidden: usize) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::Config("hidden layer needs at least one neuron".into()));
        }
        Ok(Self {
            hidden,
            w1: vec![T::zero(); hidden * INPUTS],
            b1: vec![T::zero(); hidden],
            w2: vec![T::zero(); OUTPUTS * hidden],
            b2: [T::zero(); OUTPUTS],
            norm: T::lit(DEFAULT_NORM),
        })
    }

    /// Assembles a model from one weight row per hidden unit, the hidden
    /// biases, one weight row per output and the output biases.
    pub fn from_parts(
        w1_rows: &[[T; INPUTS]],
        b1: Vec<T>,
        w2_rows: [Vec<T>; OUTPUTS],
        b2: [T; OUTPUTS],
        norm: T,
    ) -> Result<Self> {
        let hidden = b1.len();
        if hidden == 0 {
            return Err(Error::Config("hidden layer needs at least one neuron".into()));
        }
        if w1_rows.len() != hidden || w2_rows.iter().any(|r| r.len() != hidden) {
            return Err(Error::DimensionMismatch(format!(
                "hidden size {hidden} needs {hidden} w1 rows and w2 rows of {hidden}, got {} and {:?}",
                w1_rows.len(),
                w2_rows.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        let mut w1 = vec![T::zero(); hidden * INPUTS];
        for (j, row) in w1_rows.iter().enumerate() {
            for (i, w) in row.iter().enumerate() {
                w1[i * hidden + j] = *w;
            }
        }
        let w2 = w2_rows.concat();
        let mlp = Self { hidden, w1, b1, w2, b2, norm };
        if !mlp.params().all(|p| p.is_finite()) || !(norm.is_finite() && norm > T::zero()) {
            return Err(Error::Range("model parameters must be finite".into()));
        }
        Ok(mlp)
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn norm(&self) -> T {
        self.norm
    }

    /// Weight from `input` into hidden unit `unit`.
    pub fn w1_at(&self, unit: usize, input: usize) -> T {
        self.w1[input * self.hidden + unit]
    }

    /// First-layer weights as one row per hidden unit.
    pub fn w1_rows(&self) -> Vec<[T; INPUTS]> {
        (0..self.hidden).map(|j| std::array::from_fn(|i| self.w1_at(j, i))).collect()
    }

    pub fn b1(&self) -> &[T] {
        &self.b1
    }

    /// Second-layer weights feeding output `k`.
    pub fn w2_row(&self, k: usize) -> &[T] {
        &self.w2[k * self.hidden..(k + 1) * self.hidden]
    }

    pub fn b2(&self) -> [T; OUTPUTS] {
        self.b2
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + OUTPUTS
    }

    /// All parameters: w1 (input-major), b1, w2, b2.
    pub fn params(&self) -> impl Iterator<Item = &T> {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2)
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.w1.iter_mut().chain(&mut self.b1).chain(&mut self.w2).chain(&mut self.b2)
    }

    /// Writes the hidden activations into `hidden` and returns the outputs.
    #[inline(always)]
    pub(crate) fn forward_into(&self, input: &[T; INPUTS], hidden: &mut [T]) -> [T; OUTPUTS] {
        hidden.copy_from_slice(&self.b1);
        for (col, x) in self.w1.chunks_exact(self.hidden).zip(input) {
            for (h, w) in hidden.iter_mut().zip(col) {
                *h += *w * *x;
            }
        }
        T::sigmoid_slice(hidden);
        let (row0, row1) = self.w2.split_at(self.hidden);
        [(self.b2[0] + T::dot(row0, hidden)).sigmoid(), (self.b2[1] + T::dot(row1, hidden)).sigmoid()]
    }

    /// Network outputs `(join, reject)`, each in `(0, 1)`.
    pub fn forward(&self, input: &[T; INPUTS]) -> (T, T) {
        let mut hidden = vec![T::zero(); self.hidden];
        let [j, r] = self.forward_into(input, &mut hidden);
        (j, r)
    }

    /// `Join` iff the join output strictly exceeds the reject output.
    pub fn decide(&self, input: &[T; INPUTS]) -> Decision {
        let (j, r) = self.forward(input);
        if j > r {
            Decision::Join
        } else {
            Decision::Reject
        }
    }

    /// Decision for an ordered color pair, normalized with this model's divisor.
    pub fn decide_pair(&self, first: Rgb, second: Rgb) -> Decision {
        self.decide(&pair_input(first, second, self.norm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic() {
        let a = Mlp::<f64>::init(50, 9).unwrap();
        let b = Mlp::<f64>::init(50, 9).unwrap();
        assert!(a.params().zip(b.params()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, Mlp::<f64>::init(50, 10).unwrap());
    }

    #[test]
    fn init_shapes_and_range() {
        let m = Mlp::<f64>::init(1, 3).unwrap();
        assert_eq!((m.w1_rows().len(), m.w2_row(0).len() + m.w2_row(1).len()), (1, 2));
        assert_eq!(m.param_count(), 6 + 1 + 2 + 2);
        let m = Mlp::<f64>::init(50, 3).unwrap();
        assert_eq!(m.param_count(), 452);
        assert!(m.params().all(|p| (-0.5..=0.5).contains(p)));
        assert!(matches!(Mlp::<f32>::init(0, 3), Err(Error::Config(_))));
    }

    #[test]
    fn zero_model_ties_and_rejects() {
        let m = Mlp::<f64>::zeros(5).unwrap();
        let x = [0.3; 6];
        assert_eq!(m.forward(&x), (0.5, 0.5));
        assert_eq!(m.decide(&x), Decision::Reject);
    }

    #[test]
    fn single_hidden_unit_by_hand() {
        let m = Mlp::<f64>::from_parts(&[[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]], vec![0.0], [vec![1.0], vec![-1.0]], [0.0; 2], 255.0)
            .unwrap();
        let x = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let (j, r) = m.forward(&x);
        assert!((j - 0.675_037_527_376_823_7).abs() < 1e-12, "{j}");
        assert!((r - 0.324_962_472_623_176_3).abs() < 1e-12, "{r}");
        assert_eq!(m.decide(&x), Decision::Join);
        assert_eq!(m.decide(&x), m.decide(&x));
    }

    #[test]
    fn from_parts_validates() {
        assert!(matches!(
            Mlp::<f64>::from_parts(&[[0.0; 6]; 2], vec![0.0], [vec![0.0], vec![0.0]], [0.0; 2], 255.0),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            Mlp::<f64>::from_parts(&[[f64::NAN; 6]], vec![0.0], [vec![0.0], vec![0.0]], [0.0; 2], 255.0),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn row_accessors_round_trip() {
        let m = Mlp::<f64>::init(3, 5).unwrap();
        let rebuilt =
            Mlp::from_parts(&m.w1_rows(), m.b1().to_vec(), [m.w2_row(0).to_vec(), m.w2_row(1).to_vec()], m.b2(), 255.0)
                .unwrap();
        assert_eq!(rebuilt, m);
    }

    #[test]
    fn sample_range_is_checked() {
        assert!(Sample::<f64>::new([0.0, 1.0, 0.5, 0.5, 0.5, 0.5], Decision::Join).is_ok());
        assert!(Sample::<f64>::new([1.5, 0.0, 0.0, 0.0, 0.0, 0.0], Decision::Join).is_err());
        let s = Sample::<f32>::from_pair(Rgb::new(255, 0, 51), Rgb::new(0, 0, 0), Decision::Reject);
        assert_eq!(s.input, [1.0, 0.0, 0.2, 0.0, 0.0, 0.0]);
    }
}
