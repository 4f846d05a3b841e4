use ndarray_linalg::{c32, c64, Lapack, Scalar};

/// Complex scalar the numerical core is generic over: `c32` or `c64`.
///
/// `Scalar<Complex = Self>` restricts implementors to complex types (a real
/// type's associated `Complex` differs from itself), and `Lapack` provides
/// the dense factorizations. Real-valued data enters the core as complex
/// numbers with zero imaginary part.
pub trait Field: Scalar<Complex = Self> + Lapack {}

impl Field for c32 {}
impl Field for c64 {}

/// Lossy conversion of an `f64` constant into the real part type.
pub(crate) fn real<R: num_traits::NumCast>(x: f64) -> R {
    num_traits::NumCast::from(x).expect("constant representable in f32 and f64")
}
