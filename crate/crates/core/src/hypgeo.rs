//! Hyperbolic geometry in the Poincaré disc and upper half-plane.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("point {0} lies outside the open unit disc")]
    OutsideDisc(Complex64),
    #[error("circle is not contained in the open unit disc")]
    CircleNotInDisc,
    #[error("degenerate triangle")]
    DegenerateTriangle,
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
}

/// Packing radius of the 7-regular triangulation: `cosh r = 1 / (2 sin(pi / 7))`.
pub fn seven_regular_radius() -> f64 {
    (1.0 / (2.0 * (PI / 7.0).sin())).acosh()
}

/// Radius of the `{3, d}` regular triangulation (`d >= 7`) in the hyperbolic
/// plane, as half the edge length.
pub fn regular_radius(d: usize) -> f64 {
    (1.0 / (2.0 * (PI / d as f64).sin())).acosh()
}

fn check_disc(p: Complex64) -> Result<(), GeoError> {
    if p.norm() < 1.0 && p.re.is_finite() && p.im.is_finite() {
        Ok(())
    } else {
        Err(GeoError::OutsideDisc(p))
    }
}

/// `2 atanh(x)` evaluated stably.
fn two_atanh(x: f64) -> f64 {
    (2.0 * x / (1.0 - x)).ln_1p()
}

/// Hyperbolic distance between two points of the disc (curvature -1).
pub fn dist(p: Complex64, q: Complex64) -> Result<f64, GeoError> {
    check_disc(p)?;
    check_disc(q)?;
    let t = ((p - q) / (Complex64::new(1.0, 0.0) - p.conj() * q)).norm();
    Ok(two_atanh(t.min(1.0)))
}

/// Hyperbolic distance from the origin to `p`.
pub fn dist_from_origin(p: Complex64) -> Result<f64, GeoError> {
    check_disc(p)?;
    Ok(two_atanh(p.norm()))
}

/// Möbius map `z -> (a z + b) / (c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    /// Image of `z`, or `None` for the point at infinity.
    pub fn apply(&self, z: Complex64) -> Option<Complex64> {
        let den = self.c * z + self.d;
        if den.norm() == 0.0 {
            None
        } else {
            Some((self.a * z + self.b) / den)
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Preimage of infinity, if finite.
    pub fn pole(&self) -> Option<Complex64> {
        if self.c.norm() == 0.0 {
            None
        } else {
            Some(-self.d / self.c)
        }
    }

    /// Image of the Euclidean circle `(centre, radius)` that avoids the pole.
    pub fn map_circle(&self, centre: Complex64, radius: f64) -> Option<(Complex64, f64)> {
        let img_centre = match self.pole() {
            None => self.apply(centre)?,
            Some(p) => {
                // the image centre is the image of the reflection of the pole
                let w = p - centre;
                let n2 = w.norm_sqr();
                if (n2 - radius * radius).abs() <= f64::EPSILON * n2 {
                    return None;
                }
                let refl = centre + radius * radius / w.conj();
                self.apply(refl)?
            }
        };
        let on = self.apply(centre + radius)?;
        Some((img_centre, (on - img_centre).norm()))
    }
}

/// Map from the disc to the upper half-plane sending `xi` on the unit circle
/// to infinity and the origin to `i`.
pub fn mobius_to_halfplane(xi: Complex64) -> Mobius {
    let i = Complex64::i();
    Mobius { a: -i, b: -i * xi, c: Complex64::new(1.0, 0.0), d: -xi }
}

/// Disc automorphism `z -> (z - a) / (1 - conj(a) z)` sending `a` to 0.
pub fn recentre(a: Complex64) -> Mobius {
    Mobius {
        a: Complex64::new(1.0, 0.0),
        b: -a,
        c: -a.conj(),
        d: Complex64::new(1.0, 0.0),
    }
}

/// Hyperbolic centre and radius of a Euclidean circle inside the disc.
pub fn euclid_to_hyper(centre: Complex64, radius: f64) -> Result<(Complex64, f64), GeoError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(GeoError::BadRadius(radius));
    }
    let m = centre.norm();
    if m + radius >= 1.0 {
        return Err(GeoError::CircleNotInDisc);
    }
    let dir = if m > 0.0 { centre / m } else { Complex64::new(1.0, 0.0) };
    let lo = m - radius;
    let hi = m + radius;
    let signed = |x: f64| x.signum() * two_atanh(x.abs());
    let (a, b) = (signed(lo), signed(hi));
    let mid = 0.5 * (a + b);
    Ok((dir * (0.5 * mid).tanh(), 0.5 * (b - a)))
}

/// Euclidean centre and radius of the hyperbolic circle `(centre, rh)`.
pub fn hyper_to_euclid(centre: Complex64, rh: f64) -> Result<(Complex64, f64), GeoError> {
    check_disc(centre)?;
    if !(rh > 0.0 && rh.is_finite()) {
        return Err(GeoError::BadRadius(rh));
    }
    let m = centre.norm();
    let dir = if m > 0.0 { centre / m } else { Complex64::new(1.0, 0.0) };
    let h = two_atanh(m);
    let lo = ((h - rh) * 0.5).tanh();
    let hi = ((h + rh) * 0.5).tanh();
    Ok((dir * (0.5 * (lo + hi)), 0.5 * (hi - lo)))
}

/// Angle at a circle of radius `r` in a Euclidean triangle formed by three
/// mutually tangent circles.
pub fn euclid_angle(r: f64, r1: f64, r2: f64) -> f64 {
    let x = (r1 * r2 / ((r + r1) * (r + r2))).sqrt();
    2.0 * x.min(1.0).asin()
}

/// Same angle in the hyperbolic plane, with radii given as `s = exp(-h)`
/// (`s = 0` for a horocycle).
pub fn hyper_angle_s(s: f64, s1: f64, s2: f64) -> f64 {
    let num = (1.0 - s1 * s1) * (1.0 - s2 * s2);
    let den = (1.0 - s * s * s1 * s1) * (1.0 - s * s * s2 * s2);
    let x = s * (num / den).sqrt();
    2.0 * x.clamp(0.0, 1.0).asin()
}

/// Same angle with ordinary hyperbolic radii (`f64::INFINITY` for horocycles).
pub fn hyper_angle(r: f64, r1: f64, r2: f64) -> f64 {
    hyper_angle_s((-r).exp(), (-r1).exp(), (-r2).exp())
}

/// Hyperbolic area of the triangle joining the centres of three mutually
/// tangent circles, by Gauss–Bonnet.
pub fn triangle_area(r1: f64, r2: f64, r3: f64) -> Result<f64, GeoError> {
    for r in [r1, r2, r3] {
        if !(r > 0.0) || r.is_nan() {
            return Err(GeoError::DegenerateTriangle);
        }
    }
    let a = hyper_angle(r1, r2, r3) + hyper_angle(r2, r3, r1) + hyper_angle(r3, r1, r2);
    let area = PI - a;
    if area.is_finite() && area >= 0.0 {
        Ok(area)
    } else {
        Err(GeoError::DegenerateTriangle)
    }
}

/// Angles at the vertices of a hyperbolic triangle with given side lengths.
pub fn triangle_angles_from_sides(a: f64, b: f64, c: f64) -> Result<[f64; 3], GeoError> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) || a >= b + c || b >= a + c || c >= a + b {
        return Err(GeoError::DegenerateTriangle);
    }
    let angle = |opp: f64, s1: f64, s2: f64| {
        let cos = (s1.cosh() * s2.cosh() - opp.cosh()) / (s1.sinh() * s2.sinh());
        cos.clamp(-1.0, 1.0).acos()
    };
    Ok([angle(a, b, c), angle(b, c, a), angle(c, a, b)])
}
