//! Low-discrepancy points in an axis-aligned box.

use nalgebra::Vector3;

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// `[xmin, xmax] x [ymin, ymax] x [zmin, zmax]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleBox {
    pub lo: Vector3<f64>,
    pub hi: Vector3<f64>,
}

impl SampleBox {
    pub fn cube(half_width: f64) -> Self {
        SampleBox {
            lo: Vector3::repeat(-half_width),
            hi: Vector3::repeat(half_width),
        }
    }

    /// From `[xmin, xmax, ymin, ymax, zmin, zmax]`; `None` unless every `min < max`.
    pub fn from_bounds(b: [f64; 6]) -> Option<Self> {
        let lo = Vector3::new(b[0], b[2], b[4]);
        let hi = Vector3::new(b[1], b[3], b[5]);
        (0..3)
            .all(|i| lo[i] < hi[i])
            .then_some(SampleBox { lo, hi })
    }

    /// The `i`-th Halton point (bases 2, 3, 5), starting from index 1.
    pub fn halton_point(&self, i: u64) -> Vector3<f64> {
        let u = Vector3::new(halton(i + 1, 2), halton(i + 1, 3), halton(i + 1, 5));
        self.lo + (self.hi - self.lo).component_mul(&u)
    }

    pub fn halton_points(&self, count: usize) -> impl Iterator<Item = Vector3<f64>> + '_ {
        (0..count as u64).map(|i| self.halton_point(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(1, 3) - 1.0 / 3.0).abs() < 1e-16);
        assert!((halton(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn points_inside_box() {
        let b = SampleBox::from_bounds([-1.0, 3.0, 0.0, 1.0, -2.0, 2.0]).unwrap();
        for p in b.halton_points(500) {
            assert!((0..3).all(|i| p[i] >= b.lo[i] && p[i] < b.hi[i]));
        }
        assert!(SampleBox::from_bounds([1.0, 1.0, 0.0, 1.0, 0.0, 1.0]).is_none());
    }
}
