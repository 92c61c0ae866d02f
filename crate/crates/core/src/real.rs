use std::cmp::Ordering;
use std::fmt;

/// Floating-point element type a [`Sample`](crate::Sample) can hold.
///
/// Objective sums are always accumulated in `f64`; widening an `f32` is
/// exact, so comparisons against a pivot never lose information.
pub trait Real: Copy + PartialOrd + Send + Sync + fmt::Debug + fmt::Display + 'static {
    /// Short name used in reports (`f32` or `f64`).
    const NAME: &'static str;
    /// Width of one element in the binary dataset format.
    const BYTES: usize;

    fn to_f64(self) -> f64;
    /// Rounds to the nearest representable value.
    fn from_f64(v: f64) -> Self;
    fn is_finite(self) -> bool;
    fn total_cmp(&self, other: &Self) -> Ordering;
    fn write_le(self, out: &mut Vec<u8>);
    /// `bytes.len()` must equal [`Self::BYTES`].
    fn read_le(bytes: &[u8]) -> Self;
}

impl Real for f32 {
    const NAME: &'static str = "f32";
    const BYTES: usize = 4;

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
    #[inline]
    fn total_cmp(&self, other: &Self) -> Ordering {
        f32::total_cmp(self, other)
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4-byte element"))
    }
}

impl Real for f64 {
    const NAME: &'static str = "f64";
    const BYTES: usize = 8;

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8-byte element"))
    }
}
