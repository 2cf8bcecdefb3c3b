//! Steiner-like representations of generators: monophase coefficient
//! extraction from convex polygons, pluriphase piecewise tables, and the
//! scaled tile tube function gamma(x, eps).

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use serde::{Deserialize, Serialize};

/// Relative tolerance of the monophase fit against exact erosion.
const MONOPHASE_FIT_TOL: f64 = 1e-10;

/// Number of grid points used to verify a monophase candidate on (0, g].
const MONOPHASE_GRID: usize = 1000;

/// Tube polynomial data of a single generator.
///
/// A monophase generator has `V(G, eps) = sum_{k<d} kappa_k eps^{d-k}` for
/// `eps < g`; a pluriphase generator has a piecewise polynomial table with
/// breakpoints `0 = e_0 < ... < e_m = g`, each piece a coefficient row over
/// `eps^{d-k}` for `k = 0..=d` (the `k = d` entry is the constant term).
/// The measure of the generator is stored as a positive `volume`; the
/// `kappa_d = -volume` sign convention is applied at evaluation sites.
#[derive(Clone, Debug)]
pub struct SteinerRep {
    d: usize,
    g: f64,
    volume: f64,
    kind: SteinerKind,
}

#[derive(Clone, Debug)]
pub enum SteinerKind {
    Monophase { kappa: Vec<f64> },
    Pluriphase { breakpoints: Vec<f64>, pieces: Vec<Vec<f64>> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RepJson {
    Monophase {
        d: usize,
        g: f64,
        kappa: Vec<f64>,
        volume: f64,
    },
    Pluriphase {
        d: usize,
        g: f64,
        breakpoints: Vec<f64>,
        pieces: Vec<Vec<f64>>,
        volume: f64,
    },
}

impl Serialize for SteinerRep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let json = match &self.kind {
            SteinerKind::Monophase { kappa } => RepJson::Monophase {
                d: self.d,
                g: self.g,
                kappa: kappa.clone(),
                volume: self.volume,
            },
            SteinerKind::Pluriphase { breakpoints, pieces } => RepJson::Pluriphase {
                d: self.d,
                g: self.g,
                breakpoints: breakpoints.clone(),
                pieces: pieces.clone(),
                volume: self.volume,
            },
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SteinerRep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RepJson::deserialize(d)? {
            RepJson::Monophase { d, g, kappa, volume } => {
                SteinerRep::monophase(d, g, kappa, volume).map_err(serde::de::Error::custom)
            }
            RepJson::Pluriphase {
                d,
                g,
                breakpoints,
                pieces,
                volume,
            } => SteinerRep::pluriphase(d, g, breakpoints, pieces, volume)
                .map_err(serde::de::Error::custom),
        }
    }
}

impl SteinerRep {
    /// Monophase representation with coefficients `kappa_0..kappa_{d-1}`.
    /// The tube polynomial must reach the full volume continuously at
    /// `eps = g`, i.e. `sum kappa_k g^{d-k} = volume`.
    pub fn monophase(d: usize, g: f64, kappa: Vec<f64>, volume: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidModel("ambient dimension must be >= 1".into()));
        }
        if !(g > 0.0) {
            return Err(Error::InvalidModel(format!("inradius g = {g} must be positive")));
        }
        if !(volume > 0.0) {
            return Err(Error::InvalidModel(format!("volume = {volume} must be positive")));
        }
        if kappa.len() != d {
            return Err(Error::InvalidModel(format!(
                "need {} monophase coefficients, got {}",
                d,
                kappa.len()
            )));
        }
        let at_g: f64 = kappa
            .iter()
            .enumerate()
            .map(|(k, c)| c * g.powi((d - k) as i32))
            .sum();
        if (at_g - volume).abs() > 1e-9 * volume.max(1.0) {
            return Err(Error::InvalidModel(format!(
                "tube polynomial at eps = g gives {at_g}, volume is {volume}"
            )));
        }
        Ok(SteinerRep {
            d,
            g,
            volume,
            kind: SteinerKind::Monophase { kappa },
        })
    }

    /// Pluriphase representation. `breakpoints` is `0 = e_0 < ... < e_m = g`
    /// and `pieces[i]` is the coefficient row of the polynomial on
    /// `[e_i, e_{i+1}]`, indexed by `k = 0..=d` over `eps^{d-k}`. Pieces must
    /// agree at interior breakpoints, vanish at 0, and reach `volume` at `g`.
    pub fn pluriphase(
        d: usize,
        g: f64,
        breakpoints: Vec<f64>,
        pieces: Vec<Vec<f64>>,
        volume: f64,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidModel("ambient dimension must be >= 1".into()));
        }
        if !(g > 0.0) || !(volume > 0.0) {
            return Err(Error::InvalidModel("g and volume must be positive".into()));
        }
        if breakpoints.len() < 2 || pieces.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidModel(
                "need m+1 breakpoints for m pieces".into(),
            ));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidModel("first breakpoint must be 0".into()));
        }
        if (breakpoints[breakpoints.len() - 1] - g).abs() > 1e-12 * g {
            return Err(Error::InvalidModel("last breakpoint must equal g".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidModel("breakpoints must be increasing".into()));
        }
        if pieces.iter().any(|row| row.len() != d + 1) {
            return Err(Error::InvalidModel(format!(
                "each piece needs {} coefficients",
                d + 1
            )));
        }
        let eval = |row: &[f64], eps: f64| -> f64 {
            row.iter()
                .enumerate()
                .map(|(k, c)| c * eps.powi((d - k) as i32))
                .sum()
        };
        let scale = volume.max(1.0);
        if eval(&pieces[0], 0.0).abs() > 1e-12 * scale {
            return Err(Error::InvalidModel("tube value at eps = 0 must vanish".into()));
        }
        for i in 1..pieces.len() {
            let e = breakpoints[i];
            let left = eval(&pieces[i - 1], e);
            let right = eval(&pieces[i], e);
            if (left - right).abs() > 1e-12 * scale {
                return Err(Error::InvalidModel(format!(
                    "pieces disagree at breakpoint {e}: {left} vs {right}"
                )));
            }
        }
        let at_g = eval(&pieces[pieces.len() - 1], g);
        if (at_g - volume).abs() > 1e-9 * scale {
            return Err(Error::InvalidModel(format!(
                "tube value at eps = g gives {at_g}, volume is {volume}"
            )));
        }
        Ok(SteinerRep {
            d,
            g,
            volume,
            kind: SteinerKind::Pluriphase { breakpoints, pieces },
        })
    }

    /// One-dimensional interval generator of the given length:
    /// `kappa_0 = 2`, `g = len/2`, volume = len.
    pub fn interval(len: f64) -> Result<Self> {
        if !(len > 0.0) {
            return Err(Error::InvalidModel(format!("interval length {len} must be positive")));
        }
        Self::monophase(1, len / 2.0, vec![2.0], len)
    }

    /// Extracts the monophase representation of a convex polygon, or reports
    /// the first grid point at which the single tube polynomial breaks.
    ///
    /// The candidate is always `V = P eps - c eps^2` with `P` the perimeter
    /// and `c` the angle-cotangent sum; it is verified against exact erosion
    /// on a 1000-point grid over (0, g].
    pub fn from_polygon(p: &ConvexPolygon) -> Result<Self> {
        let area = p.area();
        let g = p.inradius();
        let kappa = vec![-p.angle_cotangent_sum(), p.perimeter()];
        let tol = MONOPHASE_FIT_TOL * area;
        for i in 1..=MONOPHASE_GRID {
            let eps = g * i as f64 / MONOPHASE_GRID as f64;
            let candidate = kappa[1] * eps + kappa[0] * eps * eps;
            let exact = p.tube_area(eps);
            if (candidate - exact).abs() > tol {
                return Err(Error::NotMonophase { breakpoint: eps });
            }
        }
        Self::monophase(2, g, kappa, area)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn inradius(&self) -> f64 {
        self.g
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn kind(&self) -> &SteinerKind {
        &self.kind
    }

    pub fn is_monophase(&self) -> bool {
        matches!(self.kind, SteinerKind::Monophase { .. })
    }

    /// Monophase coefficients `kappa_0..kappa_{d-1}` followed by
    /// `kappa_d = -volume`; `None` for pluriphase representations.
    pub fn kappa_full(&self) -> Option<Vec<f64>> {
        match &self.kind {
            SteinerKind::Monophase { kappa } => {
                let mut full = kappa.clone();
                full.push(-self.volume);
                Some(full)
            }
            SteinerKind::Pluriphase { .. } => None,
        }
    }

    pub fn breakpoints(&self) -> Option<&[f64]> {
        match &self.kind {
            SteinerKind::Pluriphase { breakpoints, .. } => Some(breakpoints),
            SteinerKind::Monophase { .. } => None,
        }
    }

    /// Evaluates piece `i` of a pluriphase table at `eps`, without clamping.
    pub fn piece_value(&self, i: usize, eps: f64) -> Option<f64> {
        match &self.kind {
            SteinerKind::Pluriphase { pieces, .. } => pieces.get(i).map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(k, c)| c * eps.powi((self.d - k) as i32))
                    .sum()
            }),
            SteinerKind::Monophase { .. } => None,
        }
    }

    /// Inner tube volume `V(G, eps)` of the unscaled generator; equals the
    /// full volume for `eps >= g`.
    pub fn tube(&self, eps: f64) -> f64 {
        assert!(eps >= 0.0);
        if eps >= self.g {
            return self.volume;
        }
        match &self.kind {
            SteinerKind::Monophase { kappa } => kappa
                .iter()
                .enumerate()
                .map(|(k, c)| c * eps.powi((self.d - k) as i32))
                .sum(),
            SteinerKind::Pluriphase { breakpoints, pieces } => {
                let mut idx = pieces.len() - 1;
                for i in 0..pieces.len() {
                    if eps <= breakpoints[i + 1] {
                        idx = i;
                        break;
                    }
                }
                self.piece_value(idx, eps).unwrap()
            }
        }
    }

    /// Tube volume of a tile congruent to `(1/x) G`: the scaled tile is
    /// saturated for `eps >= g/x` where its value is `volume / x^d`.
    pub fn gamma(&self, x: f64, eps: f64) -> f64 {
        assert!(x > 0.0 && eps >= 0.0);
        if eps >= self.g / x {
            return self.volume * x.powi(-(self.d as i32));
        }
        match &self.kind {
            SteinerKind::Monophase { kappa } => kappa
                .iter()
                .enumerate()
                .map(|(k, c)| c * x.powi(-(k as i32)) * eps.powi((self.d - k) as i32))
                .sum(),
            SteinerKind::Pluriphase { .. } => {
                x.powi(-(self.d as i32)) * self.tube(x * eps)
            }
        }
    }

    /// Representation of the scaled generator `lambda G`: homogeneity sends
    /// `g -> lambda g`, `kappa_k -> lambda^k kappa_k`, volume -> lambda^d volume.
    pub fn scale(&self, lambda: f64) -> SteinerRep {
        assert!(lambda > 0.0);
        let kind = match &self.kind {
            SteinerKind::Monophase { kappa } => SteinerKind::Monophase {
                kappa: kappa
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * lambda.powi(k as i32))
                    .collect(),
            },
            SteinerKind::Pluriphase { breakpoints, pieces } => SteinerKind::Pluriphase {
                breakpoints: breakpoints.iter().map(|e| e * lambda).collect(),
                pieces: pieces
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .map(|(k, c)| c * lambda.powi(k as i32))
                            .collect()
                    })
                    .collect(),
            },
        };
        SteinerRep {
            d: self.d,
            g: self.g * lambda,
            volume: self.volume * lambda.powi(self.d as i32),
            kind,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    #[test]
    fn interval_rep_values() {
        let r = SteinerRep::interval(2.0).unwrap();
        assert_eq!(r.kappa_full().unwrap(), vec![2.0, -2.0]);
        assert!((r.inradius() - 1.0).abs() < 1e-15);

        let cantor_gap = SteinerRep::interval(1.0 / 3.0).unwrap();
        assert!((cantor_gap.inradius() - 1.0 / 6.0).abs() < 1e-15);

        let unit = SteinerRep::interval(1.0).unwrap();
        assert!((unit.tube(0.4) - 0.8).abs() < 1e-15);
        assert!((unit.tube(0.6) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_monophase_extraction() {
        let t = ConvexPolygon::equilateral_triangle(0.5).unwrap();
        let rep = SteinerRep::from_polygon(&t).unwrap();
        let kappa = rep.kappa_full().unwrap();
        assert!((kappa[0] + 3.0 * SQRT3).abs() < 1e-9);
        assert!((kappa[1] - 1.5).abs() < 1e-9);
        assert!((rep.inradius() - 1.0 / (4.0 * SQRT3)).abs() < 1e-12);
        assert!((rep.volume() - SQRT3 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn square_monophase_extraction() {
        let sq = ConvexPolygon::square(1.0).unwrap();
        let rep = SteinerRep::from_polygon(&sq).unwrap();
        let kappa = rep.kappa_full().unwrap();
        assert!((kappa[0] + 4.0).abs() < 1e-9);
        assert!((kappa[1] - 4.0).abs() < 1e-9);
        assert!((rep.inradius() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rounded_corner_square_proxy_is_not_monophase() {
        // 2x2 square with the origin corner replaced by an inscribed arc of
        // radius 1/2, approximated by chords. The single polynomial breaks
        // once the chord edges collapse, near eps = 1/2.
        let n = 48;
        let mut pts: Vec<[f64; 2]> = vec![[2.0, 0.0], [2.0, 2.0], [0.0, 2.0], [0.0, 0.5]];
        for i in 1..n {
            let th = std::f64::consts::PI * (1.0 + 0.5 * i as f64 / n as f64);
            pts.push([0.5 + 0.5 * th.cos(), 0.5 + 0.5 * th.sin()]);
        }
        pts.push([0.5, 0.0]);
        let p = ConvexPolygon::new(pts).unwrap();
        match SteinerRep::from_polygon(&p) {
            Err(Error::NotMonophase { breakpoint }) => {
                assert!(
                    (breakpoint - 0.5).abs() < 0.02,
                    "breakpoint {breakpoint} not near 1/2"
                );
            }
            other => panic!("expected NotMonophase, got {other:?}"),
        }
    }

    #[test]
    fn gamma_matches_scaled_erosion() {
        let t = ConvexPolygon::equilateral_triangle(1.0 / 3.0).unwrap();
        let rep = SteinerRep::from_polygon(&t).unwrap();
        let g = rep.inradius();
        // x = 1 at eps = g/2 equals the closed-form erosion of the triangle
        let v = rep.gamma(1.0, g / 2.0);
        let expected = 3.0 * SQRT3 * (2.0 * g * (g / 2.0) - (g / 2.0) * (g / 2.0));
        assert!((v - expected).abs() < 1e-12);

        // random scales against exact polygon erosion
        let mut state = 0x243f_6a88_85a3_08d3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let x = 0.25 + 4.0 * next();
            let eps = (g / x) * (0.05 + 0.9 * next());
            let exact = t.scale(1.0 / x).tube_area(eps);
            let got = rep.gamma(x, eps);
            assert!(
                (got - exact).abs() <= 1e-10 * exact.abs().max(1e-300),
                "x={x} eps={eps}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn gamma_continuous_at_saturation() {
        let t = ConvexPolygon::equilateral_triangle(0.5).unwrap();
        let rep = SteinerRep::from_polygon(&t).unwrap();
        for &x in &[0.3, 1.0, 2.7] {
            let at = rep.inradius() / x;
            let below = rep.gamma(x, at * (1.0 - 1e-13));
            let above = rep.gamma(x, at);
            assert!((below - above).abs() < 1e-12 * above.max(1.0));
            assert!((above - rep.volume() * x.powi(-2)).abs() < 1e-14);
        }
    }

    #[test]
    fn interval_gamma_saturates() {
        let r = SteinerRep::interval(2.0).unwrap();
        assert!((r.gamma(4.0, 0.3) - 0.5).abs() < 1e-15);
        assert!((r.gamma(4.0, 0.25) - 0.5).abs() < 1e-15);
        assert!((r.gamma(4.0, 0.1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn scale_rep_square_doubling() {
        let sq = ConvexPolygon::square(1.0).unwrap();
        let rep = SteinerRep::from_polygon(&sq).unwrap();
        let doubled = rep.scale(2.0);
        let kappa = doubled.kappa_full().unwrap();
        assert!((kappa[1] - 8.0).abs() < 1e-9);
        assert!((doubled.inradius() - 1.0).abs() < 1e-12);
        assert!((doubled.volume() - 4.0).abs() < 1e-12);

        let id = rep.scale(1.0);
        assert_eq!(id.kappa_full(), rep.kappa_full());
    }

    #[test]
    fn monophase_constructor_rejects_discontinuity() {
        assert!(SteinerRep::monophase(2, 0.5, vec![-4.0, 5.0], 1.0).is_err());
        assert!(SteinerRep::monophase(2, 0.5, vec![-4.0, 4.0], 1.0).is_ok());
    }

    #[test]
    fn pluriphase_validation_and_eval() {
        // toy table: V = eps on [0, 1/2], V = 1/4 + eps^2 on [1/2, 1], volume 5/4
        let rep = SteinerRep::pluriphase(
            2,
            1.0,
            vec![0.0, 0.5, 1.0],
            vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.25]],
            1.25,
        )
        .unwrap();
        assert!((rep.tube(0.25) - 0.25).abs() < 1e-15);
        assert!((rep.tube(0.75) - (0.25 + 0.5625)).abs() < 1e-15);
        assert!((rep.tube(2.0) - 1.25).abs() < 1e-15);
        // scaled evaluation goes through the piece at x*eps
        assert!((rep.gamma(2.0, 0.125) - 0.25 / 4.0).abs() < 1e-15);

        // discontinuous table is rejected
        assert!(SteinerRep::pluriphase(
            2,
            1.0,
            vec![0.0, 0.5, 1.0],
            vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.5]],
            1.5,
        )
        .is_err());
    }

    #[test]
    fn serde_round_trip() {
        let t = ConvexPolygon::equilateral_triangle(0.5).unwrap();
        let rep = SteinerRep::from_polygon(&t).unwrap();
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"kind\":\"monophase\""));
        let back: SteinerRep = serde_json::from_str(&json).unwrap();
        assert_eq!(back.kappa_full(), rep.kappa_full());
        assert_eq!(back.inradius(), rep.inradius());

        let pluri = SteinerRep::pluriphase(
            2,
            1.0,
            vec![0.0, 0.5, 1.0],
            vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.25]],
            1.25,
        )
        .unwrap();
        let json = serde_json::to_string(&pluri).unwrap();
        assert!(json.contains("\"kind\":\"pluriphase\""));
        let back: SteinerRep = serde_json::from_str(&json).unwrap();
        assert_eq!(back.tube(0.75), pluri.tube(0.75));
        assert_eq!(back.breakpoints(), pluri.breakpoints());
    }

    proptest! {
        #[test]
        fn homogeneity_of_tube(lambda in 0.1f64..4.0, frac in 0.0f64..1.5) {
            let t = ConvexPolygon::equilateral_triangle(0.5).unwrap();
            let rep = SteinerRep::from_polygon(&t).unwrap();
            let eps = frac * rep.inradius();
            let lhs = rep.scale(lambda).tube(lambda * eps);
            let rhs = lambda.powi(2) * rep.tube(eps);
            prop_assert!((lhs - rhs).abs() <= 1e-11 * rhs.abs().max(1.0));
        }

        #[test]
        fn scale_commutes_with_gamma(lambda in 0.2f64..3.0, x in 0.2f64..3.0, frac in 0.0f64..1.4) {
            let sq = ConvexPolygon::square(1.0).unwrap();
            let rep = SteinerRep::from_polygon(&sq).unwrap();
            let eps = frac * rep.inradius();
            let lhs = rep.scale(lambda).gamma(x, eps);
            let rhs = rep.gamma(x / lambda, eps);
            prop_assert!((lhs - rhs).abs() <= 1e-11 * rhs.abs().max(1.0));
        }

        #[test]
        fn gamma_monotone_then_constant(x in 0.3f64..3.0, f1 in 0.0f64..2.0, f2 in 0.0f64..2.0) {
            let t = ConvexPolygon::equilateral_triangle(0.5).unwrap();
            let rep = SteinerRep::from_polygon(&t).unwrap();
            let scale = rep.inradius() / x;
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            prop_assert!(rep.gamma(x, lo * scale) <= rep.gamma(x, hi * scale) + 1e-12);
            prop_assert!((rep.gamma(x, (1.0 + f1) * scale) - rep.volume() * x.powi(-2)).abs() < 1e-12);
        }
    }
}
