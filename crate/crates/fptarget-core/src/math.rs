//! Minimal 3D vector and affine-map types.
//!
//! Just enough linear algebra for the mesh pipeline; nothing here is generic
//! over scalar type. `num_traits::Float` supplies `sqrt` and friends so the
//! crate builds without `std`.

use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[allow(unused_imports)]
use num_traits::Float;

/// A point or direction in 3-space, in millimetres.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).length()
    }

    /// Unit vector in the same direction, or `None` for (near-)zero input.
    pub fn normalized(self) -> Option<Vec3> {
        let len = self.length();
        if len <= f64::EPSILON {
            None
        } else {
            Some(self / len)
        }
    }

    /// Distance from the z axis; the pipeline measures wall thickness radially.
    pub fn radial(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// Empty box, ready to be grown with [`Aabb::include`].
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn include(&mut self, p: Vec3) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.min.z = self.min.z.min(p.z);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
        self.max.z = self.max.z.max(p.z);
    }

    /// (x, y, z) edge lengths; zero for an empty box.
    pub fn extent(&self) -> Vec3 {
        if self.min.x > self.max.x {
            Vec3::ZERO
        } else {
            self.max - self.min
        }
    }
}

/// Affine map `p -> linear * p + translation` with a row-major linear part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub linear: [[f64; 3]; 3],
    pub translation: Vec3,
}

impl Affine {
    pub fn identity() -> Self {
        Affine {
            linear: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: Vec3::ZERO,
        }
    }

    pub fn translation(t: Vec3) -> Self {
        Affine { translation: t, ..Affine::identity() }
    }

    pub fn scale(sx: f64, sy: f64, sz: f64) -> Self {
        Affine {
            linear: [[sx, 0.0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, sz]],
            translation: Vec3::ZERO,
        }
    }

    pub fn uniform_scale(s: f64) -> Self {
        Affine::scale(s, s, s)
    }

    /// Rotation about the x axis by `angle` radians (right-handed).
    pub fn rotation_x(angle: f64) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        Affine {
            linear: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
            translation: Vec3::ZERO,
        }
    }

    /// Rotation about the z axis by `angle` radians (right-handed).
    pub fn rotation_z(angle: f64) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        Affine {
            linear: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
            translation: Vec3::ZERO,
        }
    }

    /// Same map followed by a translation.
    pub fn then_translate(mut self, t: Vec3) -> Self {
        self.translation += t;
        self
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        let m = &self.linear;
        Vec3 {
            x: m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
            y: m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
            z: m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z,
        } + self.translation
    }

    /// Determinant of the linear part. Negative values flip orientation.
    pub fn determinant(&self) -> f64 {
        let m = &self.linear;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_product_follows_right_hand_rule() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(x.cross(y), Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(y.cross(x), Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn normalized_rejects_zero_and_unit_lengths_hold() {
        assert!(Vec3::ZERO.normalized().is_none());
        let v = Vec3::new(3.0, -4.0, 12.0).normalized().unwrap();
        assert!((v.length() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn determinant_tracks_scaling_and_rotations() {
        assert!((Affine::scale(2.0, 3.0, 4.0).determinant() - 24.0).abs() < 1e-12);
        assert!((Affine::rotation_x(0.7).determinant() - 1.0).abs() < 1e-12);
        assert!((Affine::rotation_z(-1.3).determinant() - 1.0).abs() < 1e-12);
        // Mirrors flip orientation.
        assert!(Affine::scale(-1.0, 1.0, 1.0).determinant() < 0.0);
    }

    #[test]
    fn apply_composes_linear_part_and_translation() {
        let m = Affine::rotation_z(core::f64::consts::FRAC_PI_2)
            .then_translate(Vec3::new(10.0, 0.0, 1.0));
        let p = m.apply(Vec3::new(1.0, 0.0, 0.0));
        assert!((p.x - 10.0).abs() < 1e-12);
        assert!((p.y - 1.0).abs() < 1e-12);
        assert!((p.z - 1.0).abs() < 1e-12);
    }
}
