//! Hausdorff dimension, zeros of `L(s, θ)`, the factorisation check and the
//! cover experiments.

mod cover;
mod delta;
mod euler;
mod zeros;

use std::fmt;

use num_complex::Complex64;

pub use cover::{
    artin_takagi_check, cover_gap_report, character_classes, ArtinTakagiReport, CharacterZeros, CoverScan,
    GapReport, ScanSettings, TermResidual,
};
pub use delta::{hausdorff_dimension, DeltaEstimate};
pub use euler::{euler_product_truncated, EulerProduct};
pub use zeros::{
    count_zeros, estimate_c1, locate_zeros, nearest_zero, track_zero, LFunction, ResonanceSet, TrackPoint, TrackingReport,
    Zero, ZeroCount, MAX_DEPTH, TOPOLOGICAL_TOL,
};

/// Closed axis-parallel rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    /// Square of half-width `radius` centred at `center`.
    pub fn centered(center: Complex64, radius: f64) -> Self {
        Rect::new(
            center.re - radius,
            center.re + radius,
            center.im - radius,
            center.im + radius,
        )
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn is_valid(&self) -> bool {
        [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|x| x.is_finite())
            && self.re_min < self.re_max
            && self.im_min < self.im_max
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    pub fn expand(&self, h: f64) -> Rect {
        Rect::new(self.re_min - h, self.re_max + h, self.im_min - h, self.im_max + h)
    }

    /// Corners counter-clockwise from the south-west one.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Splits at the given relative positions, returning SW, SE, NW, NE.
    pub fn split_at(&self, fx: f64, fy: f64) -> [Rect; 4] {
        let x = self.re_min + fx * self.width();
        let y = self.im_min + fy * self.height();
        [
            Rect::new(self.re_min, x, self.im_min, y),
            Rect::new(x, self.re_max, self.im_min, y),
            Rect::new(self.re_min, x, y, self.im_max),
            Rect::new(x, self.re_max, y, self.im_max),
        ]
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}] x [{}, {}]",
            self.re_min, self.re_max, self.im_min, self.im_max
        )
    }
}
