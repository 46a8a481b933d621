//! Field scalars for codomain values: reals and complex numbers.

use nalgebra::ComplexField;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A scalar of the codomain field. Implemented for `f64` and `Complex64`.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + Default + Send + Sync + Serialize + DeserializeOwned
{
    const IS_COMPLEX: bool;

    /// Narrows a complex value into this field, or `None` when the imaginary
    /// part would be lost.
    fn from_complex(z: Complex64) -> Option<Self>;

    fn to_complex(self) -> Complex64;

    fn from_re(x: f64) -> Self {
        <Self as ComplexField>::from_real(x)
    }

    fn abs_val(self) -> f64 {
        self.modulus()
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_complex(z: Complex64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn from_complex(z: Complex64) -> Option<Self> {
        Some(z)
    }

    fn to_complex(self) -> Complex64 {
        self
    }
}
