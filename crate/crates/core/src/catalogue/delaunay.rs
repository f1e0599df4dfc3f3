//! Meridian profiles of constant-mean-curvature surfaces of revolution.
//!
//! With arclength `s`, radius `r`, axial coordinate `z` and unit tangent
//! `T = (r', z')`, mean curvature `λ` (sum of principal curvatures) gives
//! `T' = (z'/r − λ) (z', −r')`. Writing `T = (sin ψ, cos ψ)` this is
//! `ψ' = cos ψ / r − λ`. Starting where the tangent is parallel to the axis
//! at radius `r₀`, the shape parameter `σ = λ r₀` selects the member:
//! `σ = 2` sphere, `σ = 1` cylinder, `0 < σ < 2` unduloid, `σ > 2` nodoid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::catalogue::solve::find_root;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DelaunayKind {
    Sphere,
    Unduloid,
    Nodoid,
    Cylinder,
}

impl DelaunayKind {
    pub fn from_shape(sigma: f64) -> Option<Self> {
        const EPS: f64 = 1e-12;
        if !(sigma > 0.0) {
            None
        } else if (sigma - 2.0).abs() <= EPS {
            Some(DelaunayKind::Sphere)
        } else if (sigma - 1.0).abs() <= EPS {
            Some(DelaunayKind::Cylinder)
        } else if sigma < 2.0 {
            Some(DelaunayKind::Unduloid)
        } else {
            Some(DelaunayKind::Nodoid)
        }
    }
}

/// One integrated profile point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileSample {
    pub s: f64,
    pub r: f64,
    pub z: f64,
    /// Integrated tangent `(dr/ds, dz/ds)`; unit up to integration error.
    pub tangent: [f64; 2],
}

impl ProfileSample {
    /// Tangent angle measured from the axis direction.
    pub fn psi(&self) -> f64 {
        self.tangent[0].atan2(self.tangent[1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DelaunayProfile {
    pub kind: DelaunayKind,
    pub lambda: f64,
    pub shape_parameter: f64,
    pub samples: Vec<ProfileSample>,
}

impl DelaunayProfile {
    /// `|κ_meridian + κ_rotation − λ|` from the integrated derivatives.
    pub fn cmc_residual(&self, p: &ProfileSample) -> f64 {
        let [u, w] = p.tangent;
        let speed = (u * u + w * w).sqrt();
        let (du, dw) = rhs_tangent(self.lambda, p.r, u, w);
        let k_meridian = (u * dw - w * du) / speed.powi(3);
        let k_rotation = w / (p.r * speed);
        (k_meridian + k_rotation - self.lambda).abs()
    }

    pub fn max_cmc_residual(&self) -> f64 {
        self.samples.iter().map(|p| self.cmc_residual(p)).fold(0.0, f64::max)
    }

    /// First integral `r cos ψ − λ r² / 2`, constant along exact solutions.
    pub fn flux(&self, p: &ProfileSample) -> f64 {
        p.r * p.psi().cos() - 0.5 * self.lambda * p.r * p.r
    }

    /// Arclength between the first two interior radius maxima or minima
    /// matching the start, located by interpolating ψ = 0 crossings.
    pub fn period(&self) -> Option<f64> {
        let mut crossings = Vec::new();
        for w in self.samples.windows(2) {
            let (a, b) = (w[0].psi(), w[1].psi());
            if a != 0.0 && a.signum() != b.signum() && (a - b).abs() < 1.0 {
                crossings.push(w[0].s + (w[1].s - w[0].s) * a / (a - b));
            }
        }
        // ψ vanishes at both the neck and the bulge; a period spans two crossings
        (crossings.len() >= 2).then(|| 2.0 * (crossings[1] - crossings[0]))
    }
}

fn rhs_tangent(lambda: f64, r: f64, u: f64, w: f64) -> (f64, f64) {
    let k = w / r - lambda;
    (k * w, -k * u)
}

type State = [f64; 4];

fn rhs(lambda: f64, y: &State) -> State {
    let (du, dw) = rhs_tangent(lambda, y[0], y[2], y[3]);
    [y[2], y[3], du, dw]
}

/// One Dormand–Prince 5(4) step; returns the 5th-order state and an error estimate.
fn dp_step(lambda: f64, y: &State, h: f64) -> (State, f64) {
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut k: [State; 7] = [[0.0; 4]; 7];
    k[0] = rhs(lambda, y);
    for stage in 0..6 {
        let mut yt = *y;
        for (j, kj) in k.iter().enumerate().take(stage + 1) {
            for d in 0..4 {
                yt[d] += h * C[stage][j] * kj[d];
            }
        }
        k[stage + 1] = rhs(lambda, &yt);
        if stage == 5 {
            let mut err: f64 = 0.0;
            for d in 0..4 {
                let e: f64 = (0..7).map(|j| E[j] * k[j][d]).sum::<f64>() * h;
                err = err.max(e.abs());
            }
            return (yt, err);
        }
    }
    unreachable!()
}

/// Stop rule for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub enum Stop {
    /// Integrate until arclength `s` (may be negative for backward integration).
    Arclength(f64),
    /// Integrate forward until ψ reaches the given angle, radians.
    Psi(f64),
}

/// Integrates the profile ODE from `(r0, z0, ψ0)` with absolute tolerance `tol`.
pub fn integrate(lambda: f64, r0: f64, z0: f64, psi0: f64, stop: Stop, tol: f64) -> Result<Vec<ProfileSample>> {
    let dir = match stop {
        Stop::Arclength(s) if s < 0.0 => -1.0,
        _ => 1.0,
    };
    let scale = r0.max(1.0 / lambda.abs().max(1e-300));
    let hmax = 0.01 * scale;
    let mut h = dir * 1e-3 * scale;
    let mut s = 0.0;
    let mut y: State = [r0, z0, psi0.sin(), psi0.cos()];
    let mut out = vec![sample(s, &y)];
    let psi_of = |y: &State| y[2].atan2(y[3]);
    let s_end = match stop {
        Stop::Arclength(e) => e,
        Stop::Psi(_) => f64::INFINITY,
    };
    let max_len = 1e4 * scale;
    for _ in 0..2_000_000 {
        if let Stop::Arclength(e) = stop {
            if (e - s) * dir <= 0.0 {
                return Ok(out);
            }
            if (s + h - e) * dir > 0.0 {
                h = e - s;
            }
        }
        if h.abs() < 1e-14 * scale {
            return Err(Error::IntegrationFailure(format!("step underflow at s = {s}")));
        }
        let (yn, err) = dp_step(lambda, &y, h);
        if err > tol || !(yn[0] > 0.0) {
            if !(yn[0] > 0.0) && h.abs() < 1e-10 * scale {
                return Err(Error::PinchOff { at: s });
            }
            h *= (0.9 * (tol / err.max(1e-300)).powf(0.2)).clamp(0.1, 0.5);
            continue;
        }
        if let Stop::Psi(target) = stop {
            let (g0, g1) = (psi_of(&y) - target, psi_of(&yn) - target);
            if g0 == 0.0 && out.len() > 1 {
                return Ok(out);
            }
            if g0.signum() != g1.signum() && (g0 - g1).abs() < 1.0 {
                let hh = find_root(&|t| psi_of(&dp_step(lambda, &y, t).0) - target, 0.0, h, 1e-15 * scale)?;
                let (ye, _) = dp_step(lambda, &y, hh);
                out.push(sample(s + hh, &ye));
                return Ok(out);
            }
        }
        s += h;
        y = yn;
        if y[0] < 1e-9 * scale {
            return Err(Error::PinchOff { at: s });
        }
        out.push(sample(s, &y));
        if s.abs() > max_len && s_end.is_infinite() {
            return Err(Error::IntegrationFailure("event not reached".into()));
        }
        let grow = (0.9 * (tol / err.max(1e-300)).powf(0.2)).clamp(0.2, 5.0);
        h = (h * grow).abs().min(hmax) * dir;
    }
    Err(Error::IntegrationFailure("step budget exhausted".into()))
}

fn sample(s: f64, y: &State) -> ProfileSample {
    ProfileSample {
        s,
        r: y[0],
        z: y[1],
        tangent: [y[2], y[3]],
    }
}

/// Profile of mean curvature `lambda` and shape parameter `sigma` over the
/// arclength interval `span`, with `s = 0` at the point `r = σ/λ`, `ψ = 0`.
pub fn generate_delaunay_profile(lambda: f64, sigma: f64, span: (f64, f64)) -> Result<DelaunayProfile> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidSpec(format!("mean curvature must be positive, got {lambda}")));
    }
    let kind = DelaunayKind::from_shape(sigma)
        .ok_or_else(|| Error::InvalidSpec(format!("shape parameter must be positive, got {sigma}")))?;
    let r0 = sigma / lambda;
    let tol = 1e-12 * r0.max(1.0 / lambda);
    let mut samples = Vec::new();
    if span.0 < 0.0 {
        let mut back = integrate(lambda, r0, 0.0, 0.0, Stop::Arclength(span.0), tol)?;
        back.reverse();
        back.pop();
        samples.extend(back);
    }
    samples.extend(integrate(lambda, r0, 0.0, 0.0, Stop::Arclength(span.1.max(0.0)), tol)?);
    samples.retain(|p| p.s >= span.0 - 1e-15 && p.s <= span.1 + 1e-15);
    Ok(DelaunayProfile {
        kind,
        lambda,
        shape_parameter: sigma,
        samples,
    })
}

/// Meridian of the middle surface of a parallel-plane lined-up triple: starts
/// on one plane at radius `rho` with tangent angle `psi0` and runs until the
/// tangent angle is `-psi0`.
pub fn capillary_band(lambda: f64, rho: f64, psi0: f64) -> Result<DelaunayProfile> {
    let tol = 1e-13 * rho.max(1.0 / lambda);
    let samples = integrate(lambda, rho, 0.0, psi0, Stop::Psi(-psi0), tol)?;
    // shape parameter of the member through this point, from the first integral
    let c = rho * psi0.cos() - 0.5 * lambda * rho * rho;
    let disc = 1.0 - 2.0 * lambda * c;
    let r_eq = if disc >= 0.0 { (1.0 + disc.sqrt()) / lambda } else { rho };
    let sigma = lambda * r_eq;
    Ok(DelaunayProfile {
        kind: DelaunayKind::from_shape(sigma).unwrap_or(DelaunayKind::Unduloid),
        lambda,
        shape_parameter: sigma,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_member_is_a_circle() {
        let p = generate_delaunay_profile(2.0, 2.0, (-1.5, 1.5)).unwrap();
        assert_eq!(p.kind, DelaunayKind::Sphere);
        for s in &p.samples {
            assert!(((s.r * s.r + s.z * s.z).sqrt() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn cylinder_member_has_constant_radius() {
        let p = generate_delaunay_profile(2.0, 1.0, (0.0, 3.0)).unwrap();
        assert_eq!(p.kind, DelaunayKind::Cylinder);
        assert!(p.samples.iter().all(|s| (s.r - 0.5).abs() < 1e-10));
    }

    #[test]
    fn sphere_pinches_at_the_pole() {
        let e = generate_delaunay_profile(2.0, 2.0, (0.0, 2.0)).unwrap_err();
        assert!(matches!(e, Error::PinchOff { .. }), "{e:?}");
    }

    #[test]
    fn capillary_band_for_sphere_radius() {
        let r = 1.0;
        let rho = r * 3f64.sqrt() / 2.0;
        let p = capillary_band(2.0 / r, rho, 30f64.to_radians()).unwrap();
        let last = p.samples.last().unwrap();
        assert!((last.z - r).abs() < 1e-10, "{}", last.z);
        assert!((last.r - rho).abs() < 1e-10);
        assert_eq!(p.kind, DelaunayKind::Sphere);
    }
}
