//! Dynamical systems with singular invariant measures.
//!
//! Iterated function systems are iterated as random IFS (one uniform draw per
//! step selects the branch), which samples the balanced measure. Baker, Hénon
//! and Lozi are deterministic; their forward orbits from the basin sample the
//! SRB measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Point in a 1- or 2-dimensional ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: [f64; 2],
    dim: u8,
}

impl Point {
    pub const fn d1(x: f64) -> Self {
        Self { coords: [x, 0.0], dim: 1 }
    }

    pub const fn d2(x: f64, y: f64) -> Self {
        Self { coords: [x, y], dim: 2 }
    }

    pub fn from_slice(c: &[f64]) -> Result<Self> {
        match *c {
            [x] => Ok(Self::d1(x)),
            [x, y] => Ok(Self::d2(x, y)),
            _ => Err(Error::Domain(format!("point must have 1 or 2 coordinates, got {}", c.len()))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite())
    }

    /// Euclidean distance in 2D, absolute difference in 1D.
    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        if self.dim == 1 {
            (self.coords[0] - other.coords[0]).abs()
        } else {
            (self.coords[0] - other.coords[0]).hypot(self.coords[1] - other.coords[1])
        }
    }
}

/// One affine branch `x -> offset + ratio * x` of a 1D IFS, applied with
/// probability `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfsBranch {
    pub offset: f64,
    pub ratio: f64,
    pub weight: f64,
}

/// Sierpinski vertex offsets; the attractor lies in [-1, 1] x [0, 1].
pub const SIERPINSKI_VERTICES: [[f64; 2]; 3] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]];

/// Literature value of the Hénon (a = 1.4, b = 0.3) information dimension.
pub const HENON_DIMENSION: f64 = 1.25826;
/// Lozi (a = 1.7, b = 0.5) information dimension from its Lyapunov exponents.
pub const LOZI_DIMENSION: f64 = 1.40419;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    /// Middle-third Cantor IFS `x -> (x + b)/3`, b = 0 with probability `w`.
    CantorIfs { w: f64 },
    Sierpinski,
    WeightedIfs { branches: Vec<IfsBranch> },
    Baker { alpha: f64, gamma_a: f64, gamma_b: f64 },
    Henon { a: f64, b: f64 },
    Lozi { a: f64, b: f64 },
}

impl SystemSpec {
    pub fn cantor() -> Self {
        SystemSpec::CantorIfs { w: 0.5 }
    }

    pub fn baker_classical() -> Self {
        SystemSpec::Baker { alpha: 1.0 / 3.0, gamma_a: 0.2, gamma_b: 0.25 }
    }

    pub fn henon_classical() -> Self {
        SystemSpec::Henon { a: 1.4, b: 0.3 }
    }

    pub fn lozi_classical() -> Self {
        SystemSpec::Lozi { a: 1.7, b: 0.5 }
    }

    /// Two-branch middle-third IFS with weight `w` on `x/3`.
    pub fn weighted_cantor(w: f64) -> Self {
        SystemSpec::WeightedIfs {
            branches: vec![
                IfsBranch { offset: 0.0, ratio: 1.0 / 3.0, weight: w },
                IfsBranch { offset: 2.0 / 3.0, ratio: 1.0 / 3.0, weight: 1.0 - w },
            ],
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SystemSpec::CantorIfs { .. } => "cantor",
            SystemSpec::Sierpinski => "sierpinski",
            SystemSpec::WeightedIfs { .. } => "weighted_ifs",
            SystemSpec::Baker { .. } => "baker",
            SystemSpec::Henon { .. } => "henon",
            SystemSpec::Lozi { .. } => "lozi",
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            SystemSpec::CantorIfs { .. } | SystemSpec::WeightedIfs { .. } => 1,
            _ => 2,
        }
    }

    pub fn is_ifs(&self) -> bool {
        matches!(
            self,
            SystemSpec::CantorIfs { .. } | SystemSpec::Sierpinski | SystemSpec::WeightedIfs { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSystem(m));
        match self {
            SystemSpec::CantorIfs { w } => {
                if !(*w > 0.0 && *w < 1.0) {
                    return bad(format!("cantor weight {w} not in (0,1)"));
                }
            }
            SystemSpec::Sierpinski => {}
            SystemSpec::WeightedIfs { branches } => {
                if branches.len() < 2 {
                    return bad("weighted IFS needs at least two branches".into());
                }
                let mut total = 0.0;
                for br in branches {
                    if !(br.weight > 0.0) || !br.weight.is_finite() {
                        return bad(format!("branch weight {} not positive", br.weight));
                    }
                    if !(br.ratio > 0.0 && br.ratio < 1.0) {
                        return bad(format!("contraction ratio {} not in (0,1)", br.ratio));
                    }
                    if !br.offset.is_finite() {
                        return bad("non-finite branch offset".into());
                    }
                    total += br.weight;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("branch weights sum to {total}, not 1"));
                }
            }
            SystemSpec::Baker { alpha, gamma_a, gamma_b } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return bad(format!("baker alpha {alpha} not in (0,1)"));
                }
                for g in [gamma_a, gamma_b] {
                    if !(*g > 0.0 && *g <= 0.5) {
                        return bad(format!("baker gamma {g} not in (0, 1/2]"));
                    }
                }
            }
            SystemSpec::Henon { a, b } | SystemSpec::Lozi { a, b } => {
                if !a.is_finite() || !b.is_finite() {
                    return bad("non-finite map parameter".into());
                }
            }
        }
        Ok(())
    }

    /// Image of `p`. Only the IFS variants draw from `rng`. The result is not
    /// checked for finiteness; see [`SystemSpec::step`].
    #[inline]
    pub fn advance(&self, p: Point, rng: &mut RngStream) -> Point {
        match self {
            SystemSpec::CantorIfs { w } => {
                let b = if rng.uniform() < *w { 0.0 } else { 2.0 };
                Point::d1((p.x() + b) / 3.0)
            }
            SystemSpec::Sierpinski => {
                let u = rng.uniform();
                let v = if u < 1.0 / 3.0 {
                    SIERPINSKI_VERTICES[0]
                } else if u < 2.0 / 3.0 {
                    SIERPINSKI_VERTICES[1]
                } else {
                    SIERPINSKI_VERTICES[2]
                };
                Point::d2((p.x() + v[0]) / 2.0, (p.y() + v[1]) / 2.0)
            }
            SystemSpec::WeightedIfs { branches } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                let mut chosen = &branches[branches.len() - 1];
                for br in branches {
                    acc += br.weight;
                    if u < acc {
                        chosen = br;
                        break;
                    }
                }
                Point::d1(chosen.offset + chosen.ratio * p.x())
            }
            SystemSpec::Baker { alpha, gamma_a, gamma_b } => {
                let (x, y) = (p.x(), p.y());
                if y < *alpha {
                    Point::d2((gamma_a * x).rem_euclid(1.0), (y / alpha).rem_euclid(1.0))
                } else {
                    Point::d2(
                        (0.5 + gamma_b * x).rem_euclid(1.0),
                        ((y - alpha) / (1.0 - alpha)).rem_euclid(1.0),
                    )
                }
            }
            SystemSpec::Henon { a, b } => {
                let (x, y) = (p.x(), p.y());
                Point::d2(y + 1.0 - a * x * x, b * x)
            }
            SystemSpec::Lozi { a, b } => {
                let (x, y) = (p.x(), p.y());
                Point::d2(y + 1.0 - a * x.abs(), b * x)
            }
        }
    }

    /// One step of the map. A non-finite image is reported as divergence at
    /// step 1.
    pub fn step(&self, p: Point, rng: &mut RngStream) -> Result<Point> {
        let q = self.advance(p, rng);
        if q.is_finite() {
            Ok(q)
        } else {
            Err(Error::OrbitDivergence { step: 1 })
        }
    }

    /// Orbit of `length` points starting at (and including) `start`.
    pub fn orbit(&self, start: Point, length: usize, rng: &mut RngStream) -> Result<Vec<Point>> {
        if length == 0 {
            return Err(Error::Domain("orbit length must be at least 1".into()));
        }
        self.check_point(&start)?;
        let mut out = Vec::with_capacity(length);
        let mut p = start;
        out.push(p);
        for i in 1..length {
            p = self.advance(p, rng);
            if !p.is_finite() {
                return Err(Error::OrbitDivergence { step: i });
            }
            out.push(p);
        }
        Ok(out)
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.dim() != self.ambient_dim() {
            return Err(Error::Domain(format!(
                "point has dimension {}, system '{}' needs {}",
                p.dim(),
                self.tag(),
                self.ambient_dim()
            )));
        }
        if !p.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn default_burn_in(&self) -> usize {
        if self.is_ifs() {
            1_000
        } else {
            10_000
        }
    }

    /// Starting point used for center selection when none is configured.
    pub fn default_basin_point(&self) -> Point {
        match self {
            SystemSpec::CantorIfs { .. } | SystemSpec::WeightedIfs { .. } => Point::d1(0.5),
            SystemSpec::Sierpinski => Point::d2(0.0, 0.0),
            SystemSpec::Baker { .. } => Point::d2(0.5, 0.5),
            SystemSpec::Henon { .. } => Point::d2(0.0, 0.0),
            SystemSpec::Lozi { .. } => Point::d2(0.1, 0.1),
        }
    }

    /// A point on (exponentially close to) the invariant set, distributed by
    /// the invariant measure. See [`SystemSpec::select_center_from`].
    pub fn select_center(&self, rng: &mut RngStream, burn_in: usize) -> Result<Point> {
        self.select_center_from(self.default_basin_point(), rng, burn_in)
    }

    /// IFS: `burn_in` random IFS steps from `basin` (a deep preimage of the
    /// IFS dynamics). Baker: `burn_in` forward steps from a uniform point of
    /// the unit square. Hénon/Lozi: `burn_in` forward steps from `basin`
    /// jittered by at most 0.01 per coordinate.
    pub fn select_center_from(&self, basin: Point, rng: &mut RngStream, burn_in: usize) -> Result<Point> {
        if burn_in == 0 {
            return Err(Error::Domain("burn-in must be at least 1".into()));
        }
        self.check_point(&basin)?;
        let mut p = match self {
            SystemSpec::Baker { .. } => Point::d2(rng.uniform(), rng.uniform()),
            SystemSpec::Henon { .. } | SystemSpec::Lozi { .. } => Point::d2(
                basin.x() + 0.02 * (rng.uniform() - 0.5),
                basin.y() + 0.02 * (rng.uniform() - 0.5),
            ),
            _ => basin,
        };
        for i in 1..=burn_in {
            p = self.advance(p, rng);
            if !p.is_finite() {
                return Err(Error::OrbitDivergence { step: i });
            }
        }
        Ok(p)
    }

    /// Information dimension of the invariant measure.
    ///
    /// IFS: entropy over Lyapunov exponent of the balanced measure,
    /// `sum w ln w / sum w ln lambda`. Baker: Kaplan-Yorke
    /// `1 + h / |lambda_x|`. Hénon and Lozi: literature constants, available
    /// only for the classical parameters (`None` otherwise).
    pub fn theoretical_dimension(&self) -> Option<f64> {
        match self {
            SystemSpec::CantorIfs { w } => {
                Some(entropy_over_lyapunov(&[(*w, 1.0 / 3.0), (1.0 - w, 1.0 / 3.0)]))
            }
            SystemSpec::Sierpinski => {
                let third = 1.0 / 3.0;
                Some(entropy_over_lyapunov(&[(third, 0.5), (third, 0.5), (third, 0.5)]))
            }
            SystemSpec::WeightedIfs { branches } => {
                let pairs: Vec<(f64, f64)> = branches.iter().map(|b| (b.weight, b.ratio)).collect();
                Some(entropy_over_lyapunov(&pairs))
            }
            SystemSpec::Baker { alpha, gamma_a, gamma_b } => {
                let h = -(alpha * alpha.ln() + (1.0 - alpha) * (1.0 - alpha).ln());
                let lambda_x = alpha * gamma_a.ln() + (1.0 - alpha) * gamma_b.ln();
                Some(1.0 + h / lambda_x.abs())
            }
            SystemSpec::Henon { a, b } => {
                (*a == 1.4 && *b == 0.3).then_some(HENON_DIMENSION)
            }
            SystemSpec::Lozi { a, b } => (*a == 1.7 && *b == 0.5).then_some(LOZI_DIMENSION),
        }
    }
}

/// `sum w ln w / sum w ln lambda` over (weight, ratio) pairs.
fn entropy_over_lyapunov(pairs: &[(f64, f64)]) -> f64 {
    let num: f64 = pairs.iter().map(|(w, _)| w * w.ln()).sum();
    let den: f64 = pairs.iter().map(|(w, l)| w * l.ln()).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> RngStream {
        RngStream::new(42, 0)
    }

    #[test]
    fn cantor_second_branch_from_origin() {
        let sys = SystemSpec::cantor();
        let mut r = rng();
        // draw until the b = 2 branch is taken, then check the image
        loop {
            let mut probe = r.clone();
            let u = probe.uniform();
            let q = sys.step(Point::d1(0.0), &mut r).unwrap();
            if u >= 0.5 {
                assert_eq!(q.x(), 2.0 / 3.0);
                break;
            } else {
                assert_eq!(q.x(), 0.0);
            }
        }
    }

    #[test]
    fn baker_upper_branch() {
        let sys = SystemSpec::baker_classical();
        let q = sys.step(Point::d2(0.5, 0.5), &mut rng()).unwrap();
        assert!((q.x() - 0.625).abs() < 1e-15);
        assert!((q.y() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn henon_origin() {
        let q = SystemSpec::henon_classical().step(Point::d2(0.0, 0.0), &mut rng()).unwrap();
        assert_eq!((q.x(), q.y()), (1.0, 0.0));
    }

    #[test]
    fn deterministic_maps_do_not_consume_randomness() {
        for sys in [SystemSpec::baker_classical(), SystemSpec::henon_classical(), SystemSpec::lozi_classical()] {
            let mut r = rng();
            let before = r.clone().uniform();
            sys.step(Point::d2(0.2, 0.3), &mut r).unwrap();
            assert_eq!(r.uniform(), before);
        }
    }

    #[test]
    fn henon_escape_is_divergence() {
        let sys = SystemSpec::henon_classical();
        let err = sys.orbit(Point::d2(10.0, 10.0), 100, &mut rng()).unwrap_err();
        match err {
            Error::OrbitDivergence { step } => assert!(step > 1 && step < 100),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn orbit_length_one_is_start() {
        let start = Point::d1(0.25);
        let o = SystemSpec::cantor().orbit(start, 1, &mut rng()).unwrap();
        assert_eq!(o, vec![start]);
    }

    #[test]
    fn orbit_reproducible() {
        let sys = SystemSpec::cantor();
        let a = sys.orbit(Point::d1(0.0), 3, &mut RngStream::new(5, 9)).unwrap();
        let b = sys.orbit(Point::d1(0.0), 3, &mut RngStream::new(5, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn orbit_rejects_wrong_dimension() {
        assert!(SystemSpec::cantor().orbit(Point::d2(0.0, 0.0), 3, &mut rng()).is_err());
        assert!(SystemSpec::cantor().orbit(Point::d1(0.0), 0, &mut rng()).is_err());
    }

    #[test]
    fn lozi_orbit_bounded() {
        let o = SystemSpec::lozi_classical().orbit(Point::d2(0.1, 0.1), 10_000, &mut rng()).unwrap();
        assert!(o.iter().all(|p| p.x().abs() <= 2.0 && p.y().abs() <= 1.0));
    }

    #[test]
    fn baker_stays_in_unit_square() {
        let o = SystemSpec::baker_classical().orbit(Point::d2(0.9, 0.123), 100_000, &mut rng()).unwrap();
        assert!(o.iter().all(|p| (0.0..=1.0).contains(&p.x()) && (0.0..=1.0).contains(&p.y())));
    }

    /// Ternary digits of a Cantor-set point are all 0 or 2.
    fn ternary_digits(mut x: f64, count: usize) -> Vec<u8> {
        (0..count)
            .map(|_| {
                x *= 3.0;
                let d = x.floor().clamp(0.0, 2.0);
                x -= d;
                d as u8
            })
            .collect()
    }

    #[test]
    fn cantor_center_on_attractor() {
        for s in 0..20 {
            let c = SystemSpec::cantor().select_center(&mut RngStream::new(s, 1), 1_000).unwrap();
            let digits = ternary_digits(c.x(), 25);
            assert!(digits.iter().all(|&d| d != 1), "center {} digits {:?}", c.x(), digits);
        }
    }

    #[test]
    fn sierpinski_center_in_hull() {
        for s in 0..20 {
            let c = SystemSpec::Sierpinski.select_center(&mut RngStream::new(s, 1), 1_000).unwrap();
            // triangle with vertices (1,0), (-1,0), (0,1)
            assert!(c.y() >= 0.0 && c.y() <= 1.0 - c.x().abs() + 1e-12);
        }
    }

    #[test]
    fn henon_center_bounded() {
        let c = SystemSpec::henon_classical().select_center(&mut rng(), 10_000).unwrap();
        assert!(c.is_finite() && c.x().abs() < 1.5);
    }

    #[test]
    fn select_center_needs_burn_in() {
        assert!(SystemSpec::cantor().select_center(&mut rng(), 0).is_err());
    }

    #[test]
    fn theoretical_dimensions() {
        let cantor = SystemSpec::cantor().theoretical_dimension().unwrap();
        assert!((cantor - 2f64.ln() / 3f64.ln()).abs() < 1e-14);
        assert!((cantor - 0.6309).abs() < 1e-4);

        let sier = SystemSpec::Sierpinski.theoretical_dimension().unwrap();
        assert!((sier - 3f64.ln() / 2f64.ln()).abs() < 1e-14);

        let baker = SystemSpec::baker_classical().theoretical_dimension().unwrap();
        // quoted as 1.4357, truncated to four decimals
        assert!((1.4357..1.4358).contains(&baker), "{baker}");

        let w = SystemSpec::weighted_cantor(0.4).theoretical_dimension().unwrap();
        let expected = (0.4 * 0.4f64.ln() + 0.6 * 0.6f64.ln()) / (1.0f64 / 3.0).ln();
        assert!((w - expected).abs() < 1e-14);
        assert!((w - 0.6126).abs() < 1e-4);

        assert_eq!(SystemSpec::henon_classical().theoretical_dimension(), Some(1.25826));
        assert_eq!(SystemSpec::lozi_classical().theoretical_dimension(), Some(1.40419));
        assert_eq!(SystemSpec::Henon { a: 1.3, b: 0.3 }.theoretical_dimension(), None);
    }

    #[test]
    fn weighted_equal_weights_matches_cantor() {
        let a = SystemSpec::weighted_cantor(0.5).theoretical_dimension().unwrap();
        let b = SystemSpec::cantor().theoretical_dimension().unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(SystemSpec::CantorIfs { w: 1.0 }.validate().is_err());
        assert!(SystemSpec::Baker { alpha: 0.3, gamma_a: 0.6, gamma_b: 0.2 }.validate().is_err());
        let bad = SystemSpec::WeightedIfs {
            branches: vec![
                IfsBranch { offset: 0.0, ratio: 0.3, weight: 0.5 },
                IfsBranch { offset: 0.7, ratio: 0.3, weight: 0.6 },
            ],
        };
        assert!(bad.validate().is_err());
        assert!(SystemSpec::weighted_cantor(0.35).validate().is_ok());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn dimension_symmetric_under_branch_permutation(
                w in 0.05f64..0.95, l1 in 0.05f64..0.45, l2 in 0.05f64..0.45, o in 0.5f64..0.55,
            ) {
                let a = SystemSpec::WeightedIfs { branches: vec![
                    IfsBranch { offset: 0.0, ratio: l1, weight: w },
                    IfsBranch { offset: o, ratio: l2, weight: 1.0 - w },
                ]};
                let b = SystemSpec::WeightedIfs { branches: vec![
                    IfsBranch { offset: o, ratio: l2, weight: 1.0 - w },
                    IfsBranch { offset: 0.0, ratio: l1, weight: w },
                ]};
                let (da, db) = (a.theoretical_dimension().unwrap(), b.theoretical_dimension().unwrap());
                prop_assert!((da - db).abs() <= 1e-12 * da.abs());
            }

            #[test]
            fn cantor_burn_in_within_contraction_bound(seed in any::<u64>()) {
                // after b steps the point is within 3^-b of the set; check the
                // first 20 ternary digits
                let c = SystemSpec::cantor().select_center(&mut RngStream::new(seed, 0), 200).unwrap();
                let mut x = c.x();
                for _ in 0..20 {
                    x *= 3.0;
                    let d = x.floor();
                    prop_assert!(d != 1.0);
                    x -= d;
                }
            }
        }
    }
}
