//! Closed forms, quadrature and root finding for the catalogue geometry.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Volume of a ball of radius `r`.
pub fn ball_volume(r: f64) -> f64 {
    4.0 / 3.0 * PI * r.powi(3)
}

pub fn ball_radius(volume: f64) -> Result<f64> {
    check_positive(volume)?;
    Ok((3.0 * volume / (4.0 * PI)).cbrt())
}

/// Volume of the cap of height `h` cut from a ball of radius `r`.
pub fn cap_volume(r: f64, h: f64) -> f64 {
    PI * h * h * (3.0 * r - h) / 3.0
}

/// Volume of one lobe of the equal-volume double bubble: a ball of radius `r`
/// minus the cap beyond a plane at distance `r/2` from its center.
pub fn double_bubble_lobe_volume(r: f64) -> f64 {
    ball_volume(r) - cap_volume(r, r / 2.0)
}

/// Sphere radius of the equal-volume double bubble with lobe volume `volume`.
pub fn solve_double_bubble_radius(volume: f64) -> Result<f64> {
    check_positive(volume)?;
    let unit = double_bubble_lobe_volume(1.0);
    Ok((volume / unit).cbrt())
}

/// Middle-cell volume of a lined-up triple with non-parallel or parallel
/// planes: a ball minus two disjoint caps of height `r/2`.
pub fn lined_up_middle_volume(r: f64) -> f64 {
    ball_volume(r) - 2.0 * cap_volume(r, r / 2.0)
}

/// Area of the disk segment beyond a chord at distance `d` from the center.
fn segment_area(radius: f64, d: f64) -> f64 {
    if d >= radius {
        return 0.0;
    }
    radius * radius * (d / radius).acos() - d * (radius * radius - d * d).sqrt()
}

/// Area of a disk of radius `radius` intersected with a wedge of opening
/// `beta ≤ 2π/3` whose apex is at distance `s` from the disk center, the
/// center lying on the wedge bisector.
pub fn disk_wedge_area(radius: f64, s: f64, beta: f64) -> f64 {
    if radius <= 0.0 {
        return 0.0;
    }
    let d = s * (beta / 2.0).sin();
    let mut area = PI * radius * radius - 2.0 * segment_area(radius, d);
    if s < radius {
        // both half-planes' complements overlap in the opposite wedge
        let rho = |th: f64| {
            let c = th.cos();
            s * c + (radius * radius - s * s + s * s * c * c).sqrt()
        };
        area += adaptive_simpson(&|th| 0.5 * rho(th).powi(2), PI - beta / 2.0, PI + beta / 2.0, 1e-14 * radius * radius);
    }
    area
}

/// Volume of a ball of radius `r` intersected with a wedge of opening `beta`
/// whose edge is at distance `s` from the center, center on the bisector.
pub fn ball_wedge_volume(r: f64, s: f64, beta: f64) -> f64 {
    let f = |z: f64| disk_wedge_area((r * r - z * z).max(0.0).sqrt(), s, beta);
    let mut breaks = vec![-r, r];
    for d in [s, s * (beta / 2.0).sin()] {
        if d < r {
            let z = (r * r - d * d).sqrt();
            breaks.extend([-z, z]);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
        .windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], 1e-13 * r.powi(3)))
        .sum()
}

/// Region volume of the standard triple bubble for sphere radius `r`: a ball
/// intersected with a 120° wedge whose edge is at distance `r/√3` from the
/// center, so that each bounding plane is at distance `r/2`.
pub fn standard_triple_volume(r: f64) -> f64 {
    ball_wedge_volume(r, r / 3f64.sqrt(), 2.0 * PI / 3.0)
}

pub fn solve_standard_triple_radius(volume: f64) -> Result<f64> {
    check_positive(volume)?;
    Ok((volume / standard_triple_volume(1.0)).cbrt())
}

fn check_positive(volume: f64) -> Result<()> {
    if !(volume > 0.0) || !volume.is_finite() {
        return Err(Error::NonPositiveVolume(volume));
    }
    Ok(())
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Root of `f` on a bracketing interval by bisection with secant acceleration.
pub fn find_root(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::SolverFailure(format!("no sign change on [{a}, {b}]")));
    }
    for _ in 0..200 {
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        let x = if secant > a.min(b) && secant < a.max(b) && (secant - mid).abs() < 0.25 * (b - a).abs() {
            secant
        } else {
            mid
        };
        let fx = f(x);
        if fx == 0.0 || (b - a).abs() <= tol {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Err(Error::SolverFailure("root finder did not converge".into()))
}
