use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::body::{IlluminatingBody, PatchId, SurfaceFrame};
use crate::geometry::Vec3;

/// Point expressed as `(s, σ₁, σ₂)`: signed distance `s` along the outward
/// normal ray from the surface point `X⁰(σ₁, σ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IlluminatingCoords {
    pub patch: PatchId,
    pub s: f64,
    pub sigma: [f64; 2],
}

/// Metric data of the illuminating coordinate map at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    /// `|X_σᵢ| = (κᵢ s + 1)|X⁰_σᵢ|`, indexed by parameter.
    pub lengths: [f64; 2],
    /// `Λ (κ₁ s + 1)(κ₂ s + 1)`.
    pub jacobian: f64,
}

/// Normal and tangential components of a Cartesian gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientSplit {
    pub normal: f64,
    /// `(∇*₁f, ∇*₂f)` along the `κ₁` and `κ₂` tangents.
    pub tangential: [f64; 2],
}

impl GradientSplit {
    pub fn tangential_sq(&self) -> f64 {
        self.tangential[0].powi(2) + self.tangential[1].powi(2)
    }

    pub fn norm_sq(&self) -> f64 {
        self.normal * self.normal + self.tangential_sq()
    }
}

/// Membership flags of a point relative to the truncated cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionFlags {
    pub in_d_t: bool,
    pub on_mantle: bool,
}

fn check_ray(frame: &SurfaceFrame, s: f64) -> Result<()> {
    let f1 = frame.kappa_param[0] * s + 1.0;
    let f2 = frame.kappa_param[1] * s + 1.0;
    if f1 > 0.0 && f2 > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "degenerate ray: κs + 1 = ({f1:.3e}, {f2:.3e}) at s = {s}"
        )))
    }
}

impl IlluminatingBody {
    pub fn from_illuminating_coords(&self, c: &IlluminatingCoords) -> Result<Vec3> {
        let frame = self.surface_frame(c.patch, c.sigma)?;
        check_ray(&frame, c.s)?;
        Ok(frame.position + c.s * frame.normal)
    }

    pub fn to_illuminating_coords(&self, x: &Vec3) -> Result<IlluminatingCoords> {
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("non-finite point".into()));
        }
        let (theta, phi, s) = self.foot_point(*x).ok_or(Error::Inversion {
            x: x.x,
            y: x.y,
            z: x.z,
        })?;
        let coords = IlluminatingCoords {
            patch: 0,
            s,
            sigma: [theta, phi],
        };
        let frame = self.frame_unchecked(coords.sigma);
        check_ray(&frame, s)?;
        let back = frame.position + s * frame.normal;
        if (back - x).norm() > 1e-9 * (1.0 + x.norm()) {
            return Err(Error::Inversion {
                x: x.x,
                y: x.y,
                z: x.z,
            });
        }
        Ok(coords)
    }

    /// Coordinates together with the surface frame at the foot point.
    pub fn locate(&self, x: &Vec3) -> Result<(IlluminatingCoords, SurfaceFrame)> {
        let c = self.to_illuminating_coords(x)?;
        Ok((c, self.frame_unchecked(c.sigma)))
    }

    pub fn jacobian_metric(&self, c: &IlluminatingCoords) -> Result<Metric> {
        let frame = self.surface_frame(c.patch, c.sigma)?;
        check_ray(&frame, c.s)?;
        let f1 = frame.kappa_param[0] * c.s + 1.0;
        let f2 = frame.kappa_param[1] * c.s + 1.0;
        Ok(Metric {
            lengths: [f1 * frame.d_sigma[0].norm(), f2 * frame.d_sigma[1].norm()],
            jacobian: frame.area_factor * f1 * f2,
        })
    }

    /// `in_d_t ⇔ s + ρ₂M ≤ T + M`; `on_mantle ⇔ |s + ρ₂M − (T + M)| ≤ h/2`.
    pub fn region_predicates(&self, c: &IlluminatingCoords, t: f64, m: f64, h: f64) -> RegionFlags {
        let level = c.s + self.rho2m();
        RegionFlags {
            in_d_t: level <= t + m,
            on_mantle: (level - (t + m)).abs() <= 0.5 * h,
        }
    }
}

/// Split a gradient into `∂_s f = ∇f·ν` and the components along the unit
/// principal tangents.
pub fn decompose_gradient(grad: &Vec3, frame: &SurfaceFrame) -> GradientSplit {
    let [e1, e2] = frame.principal_tangents();
    GradientSplit {
        normal: grad.dot(&frame.normal),
        tangential: [grad.dot(&e1), grad.dot(&e2)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_sphere() -> IlluminatingBody {
        IlluminatingBody::sphere(Vec3::zeros(), 1.0).unwrap()
    }

    #[test]
    fn radial_ray_on_sphere() {
        let body = unit_sphere();
        let mut c = IlluminatingCoords {
            patch: 0,
            s: 1.0,
            sigma: [PI / 2.0, 0.0],
        };
        let x = body.from_illuminating_coords(&c).unwrap();
        assert_relative_eq!((x - Vec3::new(2.0, 0.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        c.s = 0.0;
        let x0 = body.from_illuminating_coords(&c).unwrap();
        assert_relative_eq!(x0.norm(), 1.0, epsilon = 1e-15);
        c.s = -0.5;
        let xi = body.from_illuminating_coords(&c).unwrap();
        assert_relative_eq!((xi - Vec3::new(0.5, 0.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn inverse_of_radial_ray() {
        let body = unit_sphere();
        let c = body.to_illuminating_coords(&Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(c.s, 1.0, epsilon = 1e-14);
        assert_relative_eq!(c.sigma[0], PI / 2.0, epsilon = 1e-14);
        assert_relative_eq!(c.sigma[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn spheroid_axis_point_maps_to_pole() {
        let body = IlluminatingBody::spheroid(Vec3::zeros(), 1.0, 2.0).unwrap();
        for z in [2.5, 3.0, 7.0] {
            let c = body.to_illuminating_coords(&Vec3::new(0.0, 0.0, z)).unwrap();
            assert!(c.sigma[0].abs() < 1e-12);
            assert_relative_eq!(c.s, z - 2.0, epsilon = 1e-14);
            let c = body.to_illuminating_coords(&Vec3::new(0.0, 0.0, -z)).unwrap();
            assert_relative_eq!(c.sigma[0], PI, epsilon = 1e-15);
            assert_relative_eq!(c.s, z - 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn degenerate_ray_rejected() {
        let body = unit_sphere();
        let c = IlluminatingCoords {
            patch: 0,
            s: -1.0,
            sigma: [1.0, 0.0],
        };
        assert!(matches!(body.from_illuminating_coords(&c), Err(Error::Domain(_))));
        assert!(matches!(body.jacobian_metric(&c), Err(Error::Domain(_))));
        // The center of a sphere sits on every ray at s = -R.
        assert!(body.to_illuminating_coords(&Vec3::zeros()).is_err());
    }

    #[test]
    fn jacobian_special_values() {
        let body = unit_sphere();
        let sigma = [0.7, 1.1];
        let lambda = body.surface_frame(0, sigma).unwrap().area_factor;
        let j1 = body
            .jacobian_metric(&IlluminatingCoords { patch: 0, s: 1.0, sigma })
            .unwrap();
        assert_relative_eq!(j1.jacobian, 4.0 * lambda, epsilon = 1e-14);
        let j0 = body
            .jacobian_metric(&IlluminatingCoords { patch: 0, s: 0.0, sigma })
            .unwrap();
        assert_relative_eq!(j0.jacobian, lambda, epsilon = 1e-15);
    }

    #[test]
    fn gradient_split_special_cases() {
        let body = unit_sphere();
        let (c, frame) = body.locate(&Vec3::new(1.2, -0.4, 0.9)).unwrap();
        assert!(c.s > 0.0);
        // f = s = r − 1 has gradient ν.
        let split = decompose_gradient(&frame.normal, &frame);
        assert_relative_eq!(split.normal, 1.0, epsilon = 1e-15);
        assert_relative_eq!(split.tangential_sq(), 0.0, epsilon = 1e-15);
        let zero = decompose_gradient(&Vec3::zeros(), &frame);
        assert_eq!(zero.norm_sq(), 0.0);
    }

    #[test]
    fn region_predicate_boundary_cases() {
        let body = unit_sphere();
        let c = body.to_illuminating_coords(&Vec3::new(3.0, 0.0, 0.0)).unwrap();
        assert!(body.region_predicates(&c, 2.0, 1.0, 0.1).in_d_t);
        let c = body.to_illuminating_coords(&Vec3::new(3.01, 0.0, 0.0)).unwrap();
        let flags = body.region_predicates(&c, 2.0, 1.0, 0.1);
        assert!(!flags.in_d_t);
        assert!(flags.on_mantle);
    }
}
