//! Plücker-coordinate spatial algebra, expressed in the world frame about the world origin.

use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Spatial motion vector: angular velocity and the velocity of the body point at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Motion {
    pub ang: Vec3,
    pub lin: Vec3,
}

/// Spatial force vector: moment about the origin and resultant force.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Force {
    pub ang: Vec3,
    pub lin: Vec3,
}

impl Motion {
    pub const ZERO: Motion = Motion {
        ang: Vec3::new(0.0, 0.0, 0.0),
        lin: Vec3::new(0.0, 0.0, 0.0),
    };

    pub fn new(ang: Vec3, lin: Vec3) -> Self {
        Self { ang, lin }
    }

    pub fn scale(&self, s: f64) -> Motion {
        Motion::new(self.ang * s, self.lin * s)
    }

    pub fn add(&self, o: &Motion) -> Motion {
        Motion::new(self.ang + o.ang, self.lin + o.lin)
    }

    /// Motion cross product `self ×m other`.
    pub fn cross_motion(&self, o: &Motion) -> Motion {
        Motion::new(
            self.ang.cross(&o.ang),
            self.ang.cross(&o.lin) + self.lin.cross(&o.ang),
        )
    }

    /// Force cross product `self ×f f`.
    pub fn cross_force(&self, f: &Force) -> Force {
        Force {
            ang: self.ang.cross(&f.ang) + self.lin.cross(&f.lin),
            lin: self.ang.cross(&f.lin),
        }
    }

    /// Power pairing with a force.
    pub fn dot(&self, f: &Force) -> f64 {
        self.ang.dot(&f.ang) + self.lin.dot(&f.lin)
    }

    /// Velocity of the body-fixed point currently at `p`.
    pub fn point_velocity(&self, p: &Vec3) -> Vec3 {
        self.lin + self.ang.cross(p)
    }
}

impl Force {
    pub const ZERO: Force = Force {
        ang: Vec3::new(0.0, 0.0, 0.0),
        lin: Vec3::new(0.0, 0.0, 0.0),
    };

    /// Pure force `f` acting through point `p`.
    pub fn at_point(p: &Vec3, f: &Vec3) -> Force {
        Force { ang: p.cross(f), lin: *f }
    }

    pub fn add_assign(&mut self, o: &Force) {
        self.ang += o.ang;
        self.lin += o.lin;
    }
}

/// Rigid-body inertia about the world origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialInertia {
    pub mass: f64,
    /// First mass moment `m·c`.
    pub h: Vec3,
    /// Rotational inertia about the origin.
    pub inertia_o: Mat3,
}

impl SpatialInertia {
    pub const ZERO: SpatialInertia = SpatialInertia {
        mass: 0.0,
        h: Vec3::new(0.0, 0.0, 0.0),
        inertia_o: Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    };

    /// Body of mass `m` with centre `c` and centroidal inertia `ic`, all in world axes.
    pub fn from_centroidal(m: f64, c: &Vec3, ic: &Mat3) -> Self {
        let cc = c.dot(c);
        let parallel = Mat3::identity() * cc - c * c.transpose();
        SpatialInertia {
            mass: m,
            h: c * m,
            inertia_o: ic + parallel * m,
        }
    }

    pub fn add_assign(&mut self, o: &SpatialInertia) {
        self.mass += o.mass;
        self.h += o.h;
        self.inertia_o += o.inertia_o;
    }

    /// Momentum `I·v`.
    pub fn mul(&self, v: &Motion) -> Force {
        Force {
            ang: self.inertia_o * v.ang + self.h.cross(&v.lin),
            lin: v.lin * self.mass + v.ang.cross(&self.h),
        }
    }
}

/// Rotation by `angle` about unit `axis` (Rodrigues).
pub fn axis_angle(axis: &Vec3, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    let k = Mat3::new(
        0.0, -axis.z, axis.y, //
        axis.z, 0.0, -axis.x, //
        -axis.y, axis.x, 0.0,
    );
    Mat3::identity() + k * s + k * k * (1.0 - c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn momentum_matches_point_mass() {
        let c = Vec3::new(0.1, -0.2, 0.3);
        let si = SpatialInertia::from_centroidal(2.0, &c, &Mat3::zeros());
        let v = Motion::new(Vec3::new(0.3, 0.1, -0.5), Vec3::new(1.0, 2.0, 3.0));
        let vc = v.point_velocity(&c);
        let f = si.mul(&v);
        assert!((f.lin - vc * 2.0).norm() < 1e-14);
        assert!((f.ang - c.cross(&(vc * 2.0))).norm() < 1e-14);
    }

    #[test]
    fn rodrigues_is_orthonormal() {
        let axis = Vec3::new(1.0, 2.0, -0.5).normalize();
        let r = axis_angle(&axis, 0.7);
        assert!((r.transpose() * r - Mat3::identity()).norm() < 1e-14);
        assert!((r * axis - axis).norm() < 1e-14);
    }
}
