//! Built-in tilings and shapes: the Cantor, Koch, Sierpinski gasket, and
//! pentagasket tilings, the nonlattice Koch family, and the pluriphase
//! rounded-corner square.

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, ShapeSampler};
use crate::ifs::{Generator, SelfSimilarSystem};
use crate::steiner::SteinerRep;
use crate::tube::TilingModel;
use num_complex::Complex64;

/// Names accepted by [`builtin`]; `koch-nonlattice` takes `:<re>,<im>`.
pub const BUILTIN_NAMES: [&str; 6] = [
    "cantor",
    "koch",
    "koch-nonlattice:<re>,<im>",
    "sierpinski",
    "pentagasket",
    "pluriphase-square",
];

/// The Cantor tiling: ratios {1/3, 1/3}, one gap interval of length 1/3.
pub fn cantor_system() -> SelfSimilarSystem {
    SelfSimilarSystem::new(
        vec![1.0 / 3.0, 1.0 / 3.0],
        1,
        vec![Generator::interval(1.0 / 3.0, "gap")],
        Some(1.0),
    )
    .expect("valid by construction")
}

pub fn cantor() -> TilingModel {
    TilingModel::from_system(&cantor_system()).expect("valid by construction")
}

/// The Koch tiling: ratios {1/sqrt(3), 1/sqrt(3)}, one equilateral triangle
/// of side 1/3.
pub fn koch_system() -> SelfSimilarSystem {
    let r = 3f64.powf(-0.5);
    SelfSimilarSystem::new(
        vec![r, r],
        2,
        vec![Generator::polygon(
            ConvexPolygon::equilateral_triangle(1.0 / 3.0).expect("valid triangle"),
            "triangle",
        )],
        Some(3f64.sqrt() / 12.0),
    )
    .expect("valid by construction")
}

pub fn koch() -> TilingModel {
    TilingModel::from_system(&koch_system()).expect("valid by construction")
}

/// Nonlattice Koch variants: the two maps scale by |xi| and |1 - xi|; the
/// gap of the first iterate is the triangle with vertices (|xi|^2, 0),
/// (1 - |1-xi|^2, 0) and xi. Requires |xi|^2 + |1 - xi|^2 < 1 and Im xi != 0.
pub fn koch_nonlattice_system(xi: Complex64) -> Result<SelfSimilarSystem> {
    let a = xi.norm();
    let b = (Complex64::new(1.0, 0.0) - xi).norm();
    if a * a + b * b >= 1.0 {
        return Err(Error::InvalidModel(format!(
            "|xi|^2 + |1-xi|^2 = {} must be below 1",
            a * a + b * b
        )));
    }
    if xi.im.abs() < 1e-12 {
        return Err(Error::InvalidModel("xi must not be real".into()));
    }
    let left = a * a;
    let right = 1.0 - b * b;
    let apex = [xi.re, xi.im.abs()];
    let triangle = ConvexPolygon::new(vec![[left, 0.0], [right, 0.0], apex])?;
    SelfSimilarSystem::new(
        vec![a, b],
        2,
        vec![Generator::polygon(triangle, "gap triangle")],
        None,
    )
}

pub fn koch_nonlattice(xi: Complex64) -> Result<TilingModel> {
    TilingModel::from_system(&koch_nonlattice_system(xi)?)
}

/// The Sierpinski gasket tiling: ratios {1/2, 1/2, 1/2}, one equilateral
/// triangle of side 1/2.
pub fn sierpinski_system() -> SelfSimilarSystem {
    SelfSimilarSystem::new(
        vec![0.5, 0.5, 0.5],
        2,
        vec![Generator::polygon(
            ConvexPolygon::equilateral_triangle(0.5).expect("valid triangle"),
            "triangle",
        )],
        Some(3f64.sqrt() / 4.0),
    )
    .expect("valid by construction")
}

pub fn sierpinski() -> TilingModel {
    TilingModel::from_system(&sierpinski_system()).expect("valid by construction")
}

/// Pentagasket generator constants: the pentagon and the five congruent
/// isosceles triangles, entered through their closed-form inradii and
/// normalized area coefficients alpha_q (area = alpha_q g_q^2,
/// kappa_0 = -alpha_q, kappa_1 = 2 alpha_q g_q).
pub fn pentagasket_constants() -> (f64, f64, f64, f64) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let alpha_p = 5.0 / (0.3 * std::f64::consts::PI).tan();
    let g_p = phi * phi / 2.0 * (0.3 * std::f64::consts::PI).tan();
    let t = (std::f64::consts::PI / 5.0).tan();
    let alpha_t = (1.0 / t) / (1.0 - t * t);
    let g_t = phi.powi(3) / 2.0 * t;
    (alpha_p, g_p, alpha_t, g_t)
}

/// The pentagasket tiling: five maps with ratio phi^{-2}, one pentagonal
/// generator and five congruent triangular generators.
pub fn pentagasket_system() -> SelfSimilarSystem {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let r = phi.powi(-2);
    let (alpha_p, g_p, alpha_t, g_t) = pentagasket_constants();
    let pentagon = SteinerRep::monophase(
        2,
        g_p,
        vec![-alpha_p, 2.0 * alpha_p * g_p],
        alpha_p * g_p * g_p,
    )
    .expect("valid pentagon data");
    let triangle = SteinerRep::monophase(
        2,
        g_t,
        vec![-alpha_t, 2.0 * alpha_t * g_t],
        alpha_t * g_t * g_t,
    )
    .expect("valid triangle data");
    let mut generators = vec![Generator::steiner(pentagon, "pentagon")];
    for i in 0..5 {
        generators.push(Generator::steiner(triangle.clone(), &format!("triangle-{i}")));
    }
    SelfSimilarSystem::new(vec![r; 5], 2, generators, None).expect("valid by construction")
}

pub fn pentagasket() -> TilingModel {
    TilingModel::from_system(&pentagasket_system()).expect("valid by construction")
}

/// The 2x2 square with one corner replaced by a circular arc of radius 1/2
/// (centered at (1/2, 1/2), tangent to both adjacent edges). Convex,
/// pluriphase but not monophase, with inradius 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct RoundedSquare;

impl RoundedSquare {
    /// Exact piecewise tube formula, derived from the erosion: the core is
    /// the eroded square minus the corner square [eps,1/2]^2 less its
    /// inscribed quarter disk of radius 1/2 - eps, until eps reaches 1/2;
    /// afterwards the core is the eroded square alone.
    pub fn closed_tube(eps: f64) -> f64 {
        let quarter = std::f64::consts::FRAC_PI_4;
        let area_defect = (std::f64::consts::PI - 4.0) / 16.0;
        if eps < 0.0 {
            0.0
        } else if eps <= 0.5 {
            (7.0 + quarter) * eps - (3.0 + quarter) * eps * eps
        } else if eps <= 1.0 {
            area_defect + 8.0 * eps - 4.0 * eps * eps
        } else {
            area_defect + 4.0
        }
    }

    /// The pluriphase table matching [`RoundedSquare::closed_tube`].
    pub fn pluriphase_rep() -> SteinerRep {
        let quarter = std::f64::consts::FRAC_PI_4;
        let area_defect = (std::f64::consts::PI - 4.0) / 16.0;
        SteinerRep::pluriphase(
            2,
            1.0,
            vec![0.0, 0.5, 1.0],
            vec![
                vec![-(3.0 + quarter), 7.0 + quarter, 0.0],
                vec![-4.0, 8.0, area_defect],
            ],
            4.0 + area_defect,
        )
        .expect("valid by construction")
    }
}

impl ShapeSampler for RoundedSquare {
    fn contains(&self, x: f64, y: f64) -> bool {
        if !(0.0..=2.0).contains(&x) || !(0.0..=2.0).contains(&y) {
            return false;
        }
        if x <= 0.5 && y <= 0.5 {
            let dx = x - 0.5;
            let dy = y - 0.5;
            return dx * dx + dy * dy <= 0.25;
        }
        true
    }

    fn boundary_distance(&self, x: f64, y: f64) -> f64 {
        let mut d = x.min(y).min(2.0 - x).min(2.0 - y);
        if x <= 0.5 && y <= 0.5 {
            d = d.min(0.5 - ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt());
        }
        d
    }

    fn bounding_box(&self) -> [f64; 4] {
        [0.0, 0.0, 2.0, 2.0]
    }
}

/// A named builtin: either a self-similar tiling model or the pluriphase
/// sampler-plus-table pair.
pub enum Builtin {
    Tiling {
        name: String,
        system: SelfSimilarSystem,
        model: TilingModel,
    },
    PluriphaseSquare {
        sampler: RoundedSquare,
        rep: SteinerRep,
    },
}

/// Looks up a builtin by name: `cantor`, `koch`, `koch-nonlattice:<re>,<im>`,
/// `sierpinski`, `pentagasket`, or `pluriphase-square`.
pub fn builtin(name: &str) -> Result<Builtin> {
    let tiling = |name: &str, system: SelfSimilarSystem| -> Result<Builtin> {
        let model = TilingModel::from_system(&system)?;
        Ok(Builtin::Tiling {
            name: name.to_string(),
            system,
            model,
        })
    };
    match name {
        "cantor" => tiling("cantor", cantor_system()),
        "koch" => tiling("koch", koch_system()),
        "sierpinski" => tiling("sierpinski", sierpinski_system()),
        "pentagasket" => tiling("pentagasket", pentagasket_system()),
        "pluriphase-square" => Ok(Builtin::PluriphaseSquare {
            sampler: RoundedSquare,
            rep: RoundedSquare::pluriphase_rep(),
        }),
        other => {
            if let Some(args) = other.strip_prefix("koch-nonlattice:") {
                let parts: Vec<&str> = args.split(',').collect();
                if parts.len() != 2 {
                    return Err(Error::InvalidModel(
                        "koch-nonlattice needs <re>,<im>".into(),
                    ));
                }
                let re: f64 = parts[0]
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidModel(format!("bad number {}", parts[0])))?;
                let im: f64 = parts[1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidModel(format!("bad number {}", parts[1])))?;
                tiling(other, koch_nonlattice_system(Complex64::new(re, im))?)
            } else {
                Err(Error::InvalidModel(format!("unknown builtin model {other}")))
            }
        }
    }
}
