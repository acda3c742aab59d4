//! Node geometry, path-loss gains, relay-combined equivalent channels and the
//! standardized `(a, b)` form used by the outer bound.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::awgn::SchemeParams;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Positions of the four nodes and the path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry<T> {
    pub t1: Point<T>,
    pub u1: Point<T>,
    pub t2: Point<T>,
    pub u2: Point<T>,
    pub pathloss_exponent: T,
}

impl<T: Real> Geometry<T> {
    /// Builds and validates a geometry.
    pub fn new(t1: Point<T>, u1: Point<T>, t2: Point<T>, u2: Point<T>, pathloss_exponent: T) -> Result<Self> {
        let g = Self { t1, u1, t2, u2, pathloss_exponent };
        g.validate()?;
        Ok(g)
    }

    /// Reference layout: T1 at the origin, U1 at (1, 0), U2 at (1, -1), exponent 3.
    pub fn reference(t2: Point<T>) -> Result<Self> {
        let o = T::zero();
        let one = T::one();
        Self::new(Point::new(o, o), Point::new(one, o), t2, Point::new(one, -one), T::lit(3.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pathloss_exponent > T::zero()) || !self.pathloss_exponent.is_finite() {
            return Err(Error::Domain(format!(
                "path-loss exponent must be positive, got {}",
                self.pathloss_exponent
            )));
        }
        let nodes = [("T1", &self.t1), ("U1", &self.u1), ("T2", &self.t2), ("U2", &self.u2)];
        for (i, (na, a)) in nodes.iter().enumerate() {
            if !a.x.is_finite() || !a.y.is_finite() {
                return Err(Error::Domain(format!("{na} has a non-finite coordinate")));
            }
            for (nb, b) in nodes.iter().skip(i + 1) {
                if !(a.distance(b) > T::zero()) {
                    return Err(Error::Domain(format!("{na} and {nb} are co-located")));
                }
            }
        }
        Ok(())
    }
}

/// How path-loss gains are scaled before use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Normalization {
    /// Divide every gain by `c11` so that `|c11| = 1`.
    #[default]
    Normalized,
    /// Keep the raw `d^-exponent` amplitudes.
    Raw,
}

/// Complex link amplitudes with unit-variance noise at every receiver.
///
/// `c11`: T1 to U1, `c12`: T1 to U2, `c21`: T2 to U1, `c22`: T2 to U2,
/// `ctt`: T1 to T2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains<T> {
    pub c11: Complex<T>,
    pub c12: Complex<T>,
    pub c21: Complex<T>,
    pub c22: Complex<T>,
    pub ctt: Complex<T>,
}

impl<T: Real> ChannelGains<T> {
    pub fn new(c11: Complex<T>, c12: Complex<T>, c21: Complex<T>, c22: Complex<T>, ctt: Complex<T>) -> Result<Self> {
        let g = Self { c11, c12, c21, c22, ctt };
        for (name, c) in [("c11", c11), ("c12", c12), ("c21", c21), ("c22", c22), ("cTT", ctt)] {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::Domain(format!("{name} is not finite")));
            }
        }
        Ok(g)
    }

    /// Real, co-phased gains.
    pub fn real(c11: T, c12: T, c21: T, c22: T, ctt: T) -> Result<Self> {
        let z = T::zero();
        Self::new(
            Complex::new(c11, z),
            Complex::new(c12, z),
            Complex::new(c21, z),
            Complex::new(c22, z),
            Complex::new(ctt, z),
        )
    }

    /// Phase of `c21`, always derived from the stored amplitude.
    pub fn phi21(&self) -> T {
        self.c21.arg()
    }

    /// Every gain divided by `c11`. Idempotent up to rounding.
    pub fn normalized(&self) -> Result<Self> {
        if self.c11.norm() == T::zero() {
            return Err(Error::Domain("cannot normalize by c11 = 0".into()));
        }
        let d = self.c11;
        Self::new(Complex::new(T::one(), T::zero()), self.c12 / d, self.c21 / d, self.c22 / d, self.ctt / d)
    }

    /// Decodability of the primary message at T2 during listening: `|cTT| > |c11|`.
    pub fn is_decodable(&self) -> bool {
        self.ctt.norm() > self.c11.norm()
    }

    /// Error form of [`Self::is_decodable`].
    pub fn check_decodable(&self) -> Result<()> {
        if self.is_decodable() {
            Ok(())
        } else {
            Err(Error::NotDecodable { ctt: self.ctt.norm().as_f64(), c11: self.c11.norm().as_f64() })
        }
    }

    /// True when `c12` and `c22 e^{-j phi21}` point the same way, so relaying adds
    /// coherently at both receivers and residuals are monotone in the relay split.
    pub fn is_co_phased(&self) -> bool {
        let rot = Complex::from_polar(T::one(), -self.phi21());
        let v = self.c22 * rot;
        if self.c12.norm() == T::zero() || v.norm() == T::zero() {
            return true;
        }
        let cross = self.c12.re * v.im - self.c12.im * v.re;
        let dot = self.c12.re * v.re + self.c12.im * v.im;
        cross.abs() <= T::tol(1e-12) * self.c12.norm() * v.norm() && dot > T::zero()
    }
}

/// Path-loss gains `|c_ij| = d_ij^-exponent` with zero phase.
pub fn gains_from_geometry<T: Real>(geo: &Geometry<T>, norm: Normalization) -> Result<ChannelGains<T>> {
    geo.validate()?;
    let amp = |a: &Point<T>, b: &Point<T>| a.distance(b).powf(-geo.pathloss_exponent);
    let raw = ChannelGains::real(
        amp(&geo.t1, &geo.u1),
        amp(&geo.t1, &geo.u2),
        amp(&geo.t2, &geo.u1),
        amp(&geo.t2, &geo.u2),
        amp(&geo.t1, &geo.t2),
    )?;
    match norm {
        Normalization::Normalized => raw.normalized(),
        Normalization::Raw => Ok(raw),
    }
}

/// Relay-combined amplitudes at U1 and U2 when T2 forwards the primary
/// codeword with power `relay_power`: `c1k + c2k e^{-j phi21} sqrt(relay_power / p1)`.
pub fn relay_combined<T: Real>(g: &ChannelGains<T>, relay_power: T, p1: T) -> (Complex<T>, Complex<T>) {
    let s = (relay_power.max(T::zero()) / p1).sqrt();
    let rot = Complex::from_polar(s, -g.phi21());
    (g.c11 + g.c21 * rot, g.c12 + g.c22 * rot)
}

/// Equivalent primary channels during the secondary phase (`*_p2`) and the
/// clean relay phase (`*_p3`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalentChannels<T> {
    pub c11_p2: Complex<T>,
    pub c12_p2: Complex<T>,
    pub c11_p3: Complex<T>,
    pub c12_p3: Complex<T>,
}

pub fn equivalent_channels<T: Real>(g: &ChannelGains<T>, params: &SchemeParams<T>, p1: T) -> Result<EquivalentChannels<T>> {
    if !(p1 > T::zero()) {
        return Err(Error::Domain(format!("p1 must be positive, got {p1}")));
    }
    let (c11_p2, c12_p2) = relay_combined(g, params.relay_power_phase2(), p1);
    let (c11_p3, c12_p3) = relay_combined(g, params.relay_power_phase3(), p1);
    Ok(EquivalentChannels { c11_p2, c12_p2, c11_p3, c12_p3 })
}

/// Standard-form interference channel used by the outer bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardizedChannel<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub p1_tilde: T,
    pub p2_tilde: T,
}

impl<T: Real> StandardizedChannel<T> {
    pub fn new(a: Complex<T>, b: Complex<T>, p1_tilde: T, p2_tilde: T) -> Result<Self> {
        if !(p1_tilde >= T::zero()) || !(p2_tilde >= T::zero()) {
            return Err(Error::Domain("standardized powers must be nonnegative".into()));
        }
        Ok(Self { a, b, p1_tilde, p2_tilde })
    }

    /// Same channel at a different secondary power.
    pub fn with_p2_tilde(&self, p2_tilde: T) -> Self {
        Self { p2_tilde, ..*self }
    }

    /// U2 sees the primary signal no better than U1 does.
    pub fn is_degraded(&self) -> bool {
        self.b.norm() <= T::one()
    }
}

/// Maps `h11 = c11`, `h12 = c12`, `h21 = c21`, `h22 = c22` to `(a, b, P1~, P2~)`.
pub fn standardize<T: Real>(g: &ChannelGains<T>, p1: T, p2: T) -> Result<StandardizedChannel<T>> {
    let h11 = g.c11.norm();
    let h22 = g.c22.norm();
    if h11 == T::zero() || h22 == T::zero() {
        return Err(Error::Domain("standardization needs nonzero c11 and c22".into()));
    }
    if !(p1 >= T::zero()) || !(p2 >= T::zero()) {
        return Err(Error::Domain("powers must be nonnegative".into()));
    }
    let a = (g.c21 / g.c22) * Complex::from_polar(T::one(), g.c21.arg() - g.c11.arg());
    let b = Complex::new(g.c12.norm() / h11, T::zero());
    StandardizedChannel::new(a, b, h11 * h11 * p1, h22 * h22 * p2)
}

/// Degradedness of U2 relative to U1 for the primary signal on the T2-silent channel.
pub fn is_degraded<T: Real>(g: &ChannelGains<T>) -> bool {
    g.c12.norm() <= g.c11.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_at(x: f64, y: f64) -> Geometry<f64> {
        Geometry::reference(Point::new(x, y)).unwrap()
    }

    #[test]
    fn geometric_amplitudes() {
        let g = gains_from_geometry(&reference_at(0.5, 0.0), Normalization::Raw).unwrap();
        assert_relative_eq!(g.c11.re, 1.0);
        assert_relative_eq!(g.ctt.re, 8.0, epsilon = 1e-12);
        assert_relative_eq!(g.c12.re, 2f64.sqrt().powi(-3), epsilon = 1e-12);
        assert_relative_eq!(g.c21.re, 8.0, epsilon = 1e-12);
        assert_eq!(g.phi21(), 0.0);
    }

    #[test]
    fn co_located_nodes_rejected() {
        let e = Geometry::reference(Point::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
        let p = Point::new(0.0, 0.0);
        assert!(Geometry::new(p, Point::new(1.0, 0.0), Point::new(2.0, 0.0), Point::new(3.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn normalization_sets_unit_direct_gain_and_is_idempotent() {
        let geo = Geometry::new(
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(0.7, 0.3),
            Point::new(1.5, -1.0),
            3.0,
        )
        .unwrap();
        let n1 = gains_from_geometry(&geo, Normalization::Normalized).unwrap();
        let n2 = n1.normalized().unwrap();
        assert_relative_eq!(n1.c11.norm(), 1.0);
        for (a, b) in [(n1.c12, n2.c12), (n1.c21, n2.c21), (n1.c22, n2.c22), (n1.ctt, n2.ctt)] {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-14);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-14);
        }
        let raw = gains_from_geometry(&geo, Normalization::Raw).unwrap();
        assert_eq!(raw.is_decodable(), n1.is_decodable());
    }

    #[test]
    fn relay_combination_matches_hand_value() {
        let g = ChannelGains::real(1.0, 0.9, 0.05, 0.5, 10.0).unwrap();
        let p = SchemeParams::new(0.3, 0.5, 0.0, 0.0, 1.0, 10.0, 0.0).unwrap();
        let e = equivalent_channels(&g, &p, 10.0).unwrap();
        assert_relative_eq!(e.c11_p2.re, 1.05, epsilon = 1e-15);
        assert_relative_eq!(e.c12_p2.re, 1.4, epsilon = 1e-15);
        assert_eq!(e.c11_p3, g.c11);
    }

    #[test]
    fn zero_relay_power_leaves_channels_unchanged() {
        let g = ChannelGains::new(
            Complex::new(1.0, 0.0),
            Complex::new(0.2, 0.4),
            Complex::from_polar(0.7, 1.1),
            Complex::from_polar(0.3, -0.4),
            Complex::new(4.0, 0.0),
        )
        .unwrap();
        let p = SchemeParams::new(0.3, 0.4, 1.0, 1.0, 0.7, 5.0, 5.0).unwrap();
        let e = equivalent_channels(&g, &p, 3.0).unwrap();
        assert_eq!(e.c11_p2, g.c11);
        assert_eq!(e.c12_p2, g.c12);
        assert_eq!(e.c11_p3, g.c11);
        assert_eq!(e.c12_p3, g.c12);
        let no_relay = SchemeParams { rho2: 0.0, gamma: 0.0, ..p };
        let e = equivalent_channels(&g, &no_relay, 3.0).unwrap();
        assert_eq!(e.c11_p2, g.c11);
    }

    #[test]
    fn complex_rotation_aligns_relay_at_u1() {
        let g = ChannelGains::new(
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.5),
            Complex::from_polar(0.6, 2.0),
            Complex::from_polar(0.3, 0.5),
            Complex::new(4.0, 0.0),
        )
        .unwrap();
        let (c11, _) = relay_combined(&g, 4.0, 1.0);
        assert_relative_eq!(c11.re, 1.0 + 0.6 * 2.0, epsilon = 1e-12);
        assert_relative_eq!(c11.im, 0.0, epsilon = 1e-12);
        assert!(!g.is_co_phased());
        assert!(ChannelGains::real(1.0, 0.3, 0.2, 0.4, 3.0).unwrap().is_co_phased());
    }

    #[test]
    fn zero_power_p1_is_a_domain_error() {
        let g = ChannelGains::real(1.0, 0.3, 0.2, 0.4, 3.0).unwrap();
        let p = SchemeParams::silent(0.3, 0.4).unwrap();
        assert!(matches!(equivalent_channels(&g, &p, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn standardization_of_bound_gap_scenario() {
        let g = ChannelGains::real(1.0, 0.9, 0.05, 0.5, 10.0).unwrap();
        let s = standardize(&g, 10.0, 20.0).unwrap();
        assert_relative_eq!(s.a.norm(), 0.1, epsilon = 1e-15);
        assert_relative_eq!(s.b.re, 0.9, epsilon = 1e-15);
        assert_relative_eq!(s.p1_tilde, 10.0);
        assert_relative_eq!(s.p2_tilde, 0.25 * 20.0);
        assert!(s.is_degraded());

        let iso = ChannelGains::real(1.0, 0.0, 0.0, 1.0, 2.0).unwrap();
        let s = standardize(&iso, 1.0, 1.0).unwrap();
        assert_eq!(s.a.norm(), 0.0);
        assert_eq!(s.b.norm(), 0.0);

        let dead = ChannelGains::real(1.0, 0.3, 0.1, 0.0, 2.0).unwrap();
        assert!(standardize(&dead, 1.0, 1.0).is_err());
    }

    #[test]
    fn standardization_works_in_single_precision() {
        let g = ChannelGains::<f32>::real(1.0, 0.9, 0.05, 0.5, 10.0).unwrap();
        let s = standardize(&g, 10.0, 0.0).unwrap();
        assert!((s.a.norm() - 0.1).abs() < 1e-6);
    }
}
