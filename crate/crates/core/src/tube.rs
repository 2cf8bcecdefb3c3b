//! The tubular zeta function of a tiling model, its residues, the truncated
//! tube formula V(T, eps), the exact word-sum oracle, coefficient
//! extraction, measurability classification, and the fractal-string adapter.

use crate::error::{Error, Result};
use crate::ifs::SelfSimilarSystem;
use crate::steiner::SteinerRep;
use crate::zeta::{real_pow, ComplexDimension, ScalingZeta, Window};
use num_complex::Complex64;
use serde::Serialize;

/// Tolerance for deciding that a scaling pole coincides with an integer.
const INTEGER_COINCIDENCE: f64 = 1e-9;

/// Budget on the number of distinct letter-count classes in the oracle.
const ORACLE_BUDGET: f64 = 1e8;

/// A scaling zeta function paired with one Steiner representation per
/// generator; the data a tube formula needs.
#[derive(Clone, Debug)]
pub struct TilingModel {
    zeta: ScalingZeta,
    reps: Vec<SteinerRep>,
    d: usize,
}

/// Truncation-averaging mode for the residue sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Averaging {
    None,
    Cesaro,
}

/// Value of the truncated tube formula with its imaginary-part diagnostic;
/// the imaginary residual must vanish to roundoff after conjugate pairing.
#[derive(Clone, Copy, Debug)]
pub struct TubeFormulaValue {
    pub value: f64,
    pub im_residual: f64,
}

/// Closed coefficient expansion of the tube formula: one `(omega, c_omega)`
/// per scaling pole in the truncation band plus the integer terms
/// `(k, kappa_k zeta_s(k))`.
#[derive(Clone, Debug)]
pub struct TubeExpansion {
    pub scaling_terms: Vec<(Complex64, Complex64)>,
    pub integer_terms: Vec<(usize, f64)>,
    pub truncation_im: f64,
    pub dimension: usize,
}

/// A sampled tube-volume curve.
#[derive(Clone, Debug)]
pub struct TubeCurve {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub source: CurveSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveSource {
    Formula,
    Oracle,
}

impl TubeCurve {
    /// Checks the structural invariants: nonnegative, nondecreasing, and
    /// bounded by the total tiling volume.
    pub fn validate(&self, total_volume: f64) -> Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            if *v < -1e-9 {
                return Err(Error::NumericalFailure(format!(
                    "negative tube volume {v} at grid index {i}"
                )));
            }
            if *v > total_volume + 1e-9 {
                return Err(Error::NumericalFailure(format!(
                    "tube volume {v} exceeds total volume {total_volume}"
                )));
            }
            if i > 0 && self.values[i - 1] > *v + 1e-9 {
                return Err(Error::NumericalFailure(format!(
                    "tube volume decreases at grid index {i}"
                )));
            }
        }
        Ok(())
    }
}

/// Log- or linearly-spaced evaluation grid.
pub fn epsilon_grid(min: f64, max: f64, count: usize, log_spaced: bool) -> Vec<f64> {
    assert!(min > 0.0 && count >= 1);
    if count == 1 {
        return vec![min];
    }
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if log_spaced {
                min * (max / min).powf(t)
            } else {
                min + (max - min) * t
            }
        })
        .collect()
}

impl TilingModel {
    pub fn new(zeta: ScalingZeta, reps: Vec<SteinerRep>) -> Result<Self> {
        if reps.is_empty() {
            return Err(Error::InvalidModel("need at least one generator".into()));
        }
        let d = reps[0].dimension();
        if reps.iter().any(|r| r.dimension() != d) {
            return Err(Error::InvalidModel(
                "generators disagree on the ambient dimension".into(),
            ));
        }
        let s: f64 = zeta.ratios().iter().map(|r| r.powi(d as i32)).sum();
        if s >= 1.0 {
            return Err(Error::DivergentSeries { sum: s });
        }
        Ok(TilingModel { zeta, reps, d })
    }

    pub fn from_system(sys: &SelfSimilarSystem) -> Result<Self> {
        Self::new(ScalingZeta::new(sys.ratios())?, sys.reps().to_vec())
    }

    pub fn zeta(&self) -> &ScalingZeta {
        &self.zeta
    }

    pub fn reps(&self) -> &[SteinerRep] {
        &self.reps
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Total volume of all tiles: `sum_q vol(G_q) / (1 - sum_j r_j^d)`.
    pub fn total_volume(&self) -> f64 {
        let s: f64 = self
            .zeta
            .ratios()
            .iter()
            .map(|r| r.powi(self.d as i32))
            .sum();
        self.reps.iter().map(|r| r.volume()).sum::<f64>() / (1.0 - s)
    }

    fn monophase_kappas(&self) -> Result<Vec<Vec<f64>>> {
        self.reps
            .iter()
            .map(|r| {
                r.kappa_full().ok_or_else(|| {
                    Error::NoClosedExpansion(
                        "pluriphase generator: residue machinery needs monophase data".into(),
                    )
                })
            })
            .collect()
    }

    /// The inner sum of the tubular zeta function at `s`:
    /// `sum_q sum_{k=0..d} g_q^{s-k} kappa_{q,k} / (s - k)`.
    fn generator_factor(&self, s: Complex64) -> Result<Complex64> {
        let kappas = self.monophase_kappas()?;
        let mut total = Complex64::new(0.0, 0.0);
        for (rep, kappa) in self.reps.iter().zip(&kappas) {
            let g = rep.inradius();
            for (k, c) in kappa.iter().enumerate() {
                total += real_pow(g, s - k as f64) * *c / (s - k as f64);
            }
        }
        Ok(total)
    }

    /// Tubular zeta function `eps^{d-s} zeta_s(s) sum_q sum_k g_q^{s-k} kappa_{q,k}/(s-k)`.
    pub fn tubular_zeta(&self, eps: f64, s: Complex64) -> Result<Complex64> {
        if !(eps > 0.0) {
            return Err(Error::InvalidModel("eps must be positive".into()));
        }
        for k in 0..=self.d {
            if (s - k as f64).norm() < INTEGER_COINCIDENCE {
                return Err(Error::NearPole {
                    dist: (s - k as f64).norm(),
                });
            }
        }
        let zeta_val = self.zeta.eval(s)?;
        Ok(real_pow(eps, self.d as f64 - s) * zeta_val * self.generator_factor(s)?)
    }

    /// Same expression without pole guards, for contour quadrature.
    fn tubular_zeta_raw(&self, eps: f64, s: Complex64) -> Result<Complex64> {
        let den = self.zeta.denominator(s);
        Ok(real_pow(eps, self.d as f64 - s) * den.inv() * self.generator_factor(s)?)
    }

    /// Scaling poles with `|Im| <= im_max`, residues attached.
    pub fn scaling_dimensions(&self, im_max: f64) -> Result<Vec<ComplexDimension>> {
        let win = Window::new(self.left_bound(), self.zeta.similarity_dimension() + 0.5, im_max)?;
        self.zeta.complex_dimensions(&win)
    }

    /// A real part below which the Moran equation has no roots: once the
    /// smallest-ratio group dominates the rest of the sum by more than 1.
    fn left_bound(&self) -> f64 {
        let ratios = self.zeta.ratios();
        let r_min = ratios[ratios.len() - 1];
        let m_min = ratios.iter().filter(|r| (*r - r_min).abs() <= 1e-14).count() as f64;
        let mut sigma = 0.0f64;
        while sigma > -60.0 {
            let dominant = m_min * r_min.powf(sigma);
            let rest: f64 = ratios
                .iter()
                .filter(|r| (*r - r_min).abs() > 1e-14)
                .map(|r| r.powf(sigma))
                .sum();
            if dominant - rest > 1.0 {
                return sigma - 0.25;
            }
            sigma -= 0.5;
        }
        -60.0
    }

    /// Residue of the tubular zeta function at `omega` for a fixed `eps`.
    ///
    /// Simple scaling poles away from the integers and integer poles away
    /// from the scaling set have closed forms; coinciding or multiple poles
    /// fall back to contour quadrature.
    pub fn residue_tubular(&self, omega: Complex64, eps: f64) -> Result<Complex64> {
        let den_norm = self.zeta.denominator(omega).norm();
        let is_scaling_pole = den_norm <= crate::zeta::POLE_RESIDUAL;
        let near_integer = (0..self.d).find(|k| (omega - *k as f64).norm() < INTEGER_COINCIDENCE);
        match (is_scaling_pole, near_integer) {
            (true, None) => {
                let dprime = self.zeta.denominator_derivative(omega);
                if dprime.norm() < 1e-8 {
                    return self.residue_tubular_contour_auto(omega, eps);
                }
                Ok(dprime.inv() * real_pow(eps, self.d as f64 - omega)
                    * self.generator_factor(omega)?)
            }
            (false, Some(k)) => {
                let kappas = self.monophase_kappas()?;
                let kappa_sum: f64 = kappas.iter().map(|row| row[k]).sum();
                let zeta_k = self.zeta.eval(Complex64::new(k as f64, 0.0))?;
                Ok(zeta_k * kappa_sum * eps.powi((self.d - k) as i32))
            }
            (true, Some(_)) => self.residue_tubular_contour_auto(omega, eps),
            (false, None) => Err(Error::NumericalFailure(format!(
                "{omega} is not a pole of the tubular zeta function"
            ))),
        }
    }

    fn nearest_other_pole(&self, omega: Complex64) -> Result<f64> {
        let mut best = f64::INFINITY;
        for k in 0..self.d {
            let dist = (omega - k as f64).norm();
            if dist > 1e-12 {
                best = best.min(dist);
            }
        }
        let band = omega.im.abs() + 2.0;
        for dim in self.scaling_dimensions(band)? {
            let dist = (omega - dim.omega).norm();
            if dist > 1e-12 {
                best = best.min(dist);
            }
        }
        Ok(best)
    }

    fn residue_tubular_contour_auto(&self, omega: Complex64, eps: f64) -> Result<Complex64> {
        let sep = self.nearest_other_pole(omega)?;
        if sep < 1e-9 {
            return Err(Error::PoleCluster { separation: sep });
        }
        Ok(self.residue_tubular_contour(omega, eps, (1e-3f64).min(0.5 * sep), 128))
    }

    /// Residue by trapezoid quadrature of the tubular zeta function on a
    /// circle around `omega`.
    pub fn residue_tubular_contour(
        &self,
        omega: Complex64,
        eps: f64,
        radius: f64,
        nodes: usize,
    ) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..nodes {
            let th = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
            let offset = Complex64::from_polar(radius, th);
            let v = self
                .tubular_zeta_raw(eps, omega + offset)
                .expect("monophase checked by caller");
            sum += v * offset;
        }
        sum / nodes as f64
    }

    /// Closed coefficients of the truncated tube formula. Requires every
    /// scaling pole in the band to be simple and distinct from the integers
    /// 0..d-1, and all generators monophase.
    pub fn tube_expansion(&self, im_max: f64) -> Result<TubeExpansion> {
        let kappas = self.monophase_kappas()?;
        let dims = self.scaling_dimensions(im_max)?;
        let mut scaling_terms = Vec::with_capacity(dims.len());
        for dim in &dims {
            if dim.multiplicity != 1 {
                return Err(Error::NoClosedExpansion(format!(
                    "scaling pole at {} has multiplicity {}",
                    dim.omega, dim.multiplicity
                )));
            }
            if (0..self.d).any(|k| (dim.omega - k as f64).norm() < INTEGER_COINCIDENCE) {
                return Err(Error::NoClosedExpansion(format!(
                    "scaling pole at {} coincides with an integer dimension",
                    dim.omega
                )));
            }
            let residue = dim.residue.ok_or(Error::NotSimplePole {
                re: dim.omega.re,
                im: dim.omega.im,
            })?;
            let c = residue * self.generator_factor(dim.omega)?;
            scaling_terms.push((dim.omega, c));
        }
        let mut integer_terms = Vec::with_capacity(self.d);
        for k in 0..self.d {
            let zeta_k = self.zeta.eval(Complex64::new(k as f64, 0.0))?;
            let kappa_sum: f64 = kappas.iter().map(|row| row[k]).sum();
            integer_terms.push((k, zeta_k.re * kappa_sum));
        }
        Ok(TubeExpansion {
            scaling_terms,
            integer_terms,
            truncation_im: im_max,
            dimension: self.d,
        })
    }

    /// Truncated residue sum over the complex dimensions with `|Im| <= im_max`.
    ///
    /// Poles are grouped by |Im| into conjugate levels; the Cesaro option
    /// returns the mean of the partial sums over levels, damping truncation
    /// ringing of the lattice Fourier series.
    pub fn tube_volume_formula(
        &self,
        eps: f64,
        im_max: f64,
        averaging: Averaging,
    ) -> Result<TubeFormulaValue> {
        if !(eps > 0.0) {
            return Err(Error::InvalidModel("eps must be positive".into()));
        }
        let total = match self.tube_expansion(im_max) {
            Ok(exp) => exp.evaluate(eps, averaging),
            Err(Error::NoClosedExpansion(_)) => {
                // coinciding or multiple poles: per-eps contour residues
                let dims = self.scaling_dimensions(im_max)?;
                let mut terms: Vec<(f64, Complex64)> = Vec::new();
                for dim in &dims {
                    terms.push((dim.omega.im.abs(), self.residue_tubular(dim.omega, eps)?));
                }
                for k in 0..self.d {
                    let on_scaling = dims
                        .iter()
                        .any(|d| (d.omega - k as f64).norm() < INTEGER_COINCIDENCE);
                    if !on_scaling {
                        terms.push((0.0, self.residue_tubular(Complex64::new(k as f64, 0.0), eps)?));
                    }
                }
                cesaro_sum(terms, averaging)
            }
            Err(e) => return Err(e),
        };
        Ok(TubeFormulaValue {
            value: total.re,
            im_residual: total.im.abs(),
        })
    }

    /// Smallest depth N (possibly -1) such that every tile addressed by a
    /// word of length N+1 is saturated at `eps`.
    pub fn saturation_depth(&self, eps: f64) -> Result<i64> {
        if !(eps > 0.0) {
            return Err(Error::InvalidModel("eps must be positive".into()));
        }
        let g_max = self
            .reps
            .iter()
            .map(|r| r.inradius())
            .fold(0.0f64, f64::max);
        let r1 = self.zeta.ratios()[0];
        let mut n: i64 = -1;
        while g_max * r1.powi((n + 1) as i32) > eps {
            n += 1;
            if n > 10_000 {
                return Err(Error::NumericalFailure(
                    "saturation depth exceeds 10000".into(),
                ));
            }
        }
        Ok(n)
    }

    /// Exact tube volume by summation over all words of length <= N plus the
    /// geometric tail of fully saturated deeper tiles.
    pub fn tube_volume_oracle(&self, eps: f64) -> Result<f64> {
        let n = self.saturation_depth(eps)?;
        self.tube_volume_oracle_at_depth(eps, n)
    }

    /// Oracle at an explicit enumeration depth `n >= saturation_depth(eps)`.
    /// Deeper enumeration moves saturated terms from the tail into the sum
    /// and must not change the value.
    pub fn tube_volume_oracle_at_depth(&self, eps: f64, n: i64) -> Result<f64> {
        if n < self.saturation_depth(eps)? {
            return Err(Error::InvalidModel(format!(
                "depth {n} leaves unsaturated tiles outside the enumerated words"
            )));
        }
        let ratios = self.zeta.ratios();
        let d = self.d as i32;
        let s_d: f64 = ratios.iter().map(|r| r.powi(d)).sum();
        let tail_base: f64 = self.reps.iter().map(|r| r.volume()).sum();
        let tail = tail_base * s_d.powi((n + 1) as i32) / (1.0 - s_d);
        if n < 0 {
            return Ok(tail);
        }
        let mut acc = KahanSum::default();
        let all_equal = ratios.iter().all(|r| (r - ratios[0]).abs() <= 1e-14);
        if all_equal {
            let j = ratios.len() as f64;
            let mut mult = 1.0f64;
            for m in 0..=n {
                let r_w = ratios[0].powi(m as i32);
                let mut per_word = 0.0;
                for rep in &self.reps {
                    per_word += rep.gamma(1.0 / r_w, eps);
                }
                acc.add(mult * per_word);
                mult *= j;
            }
        } else {
            // aggregate words by letter counts: a class (e_1..e_J) covers
            // multinomial(sum e; e) words sharing one ratio product
            let class_count = multiset_count(n as usize, ratios.len());
            if class_count > ORACLE_BUDGET {
                return Err(Error::BudgetExceeded {
                    count: class_count as u128,
                    budget: ORACLE_BUDGET as u128,
                });
            }
            self.oracle_classes(eps, n as usize, 0, 1.0, 0, 1.0, &mut acc);
        }
        Ok(acc.value() + tail)
    }

    #[allow(clippy::too_many_arguments)]
    fn oracle_classes(
        &self,
        eps: f64,
        budget: usize,
        letter: usize,
        ratio_product: f64,
        used: usize,
        multiplicity: f64,
        acc: &mut KahanSum,
    ) {
        let ratios = self.zeta.ratios();
        if letter == ratios.len() {
            let mut per_word = 0.0;
            for rep in &self.reps {
                per_word += rep.gamma(1.0 / ratio_product, eps);
            }
            acc.add(multiplicity * per_word);
            return;
        }
        let mut r_pow = 1.0f64;
        let mut mult = multiplicity;
        for e in 0..=(budget - used) {
            if e > 0 {
                r_pow *= ratios[letter];
                // C(used + e, e) built incrementally
                mult *= (used + e) as f64 / e as f64;
            }
            self.oracle_classes(
                eps,
                budget,
                letter + 1,
                ratio_product * r_pow,
                used + e,
                mult,
                acc,
            );
        }
    }

    /// Lattice/nonlattice classification, Minkowski measurability, the
    /// content (or average-content proxy) from the coefficient at D, and the
    /// nondegeneracy functional.
    pub fn measurability_report(&self, im_max: f64) -> Result<MeasurabilityReport> {
        let d_sim = self.zeta.similarity_dimension();
        let omega = Complex64::new(d_sim, 0.0);
        let residue = self.zeta.residue(omega)?;
        let c_d = residue * self.generator_factor(omega)?;
        let kappas = self.monophase_kappas()?;
        let mut nondeg = 0.0f64;
        for (rep, kappa) in self.reps.iter().zip(&kappas) {
            let g = rep.inradius();
            for (k, c) in kappa.iter().enumerate().take(self.d) {
                nondeg += g.powf(d_sim - k as f64) / (d_sim - k as f64)
                    * (self.d - k) as f64
                    * c;
            }
        }
        let nondegeneracy = nondeg.abs();
        let lattice = self.zeta.lattice().is_some();
        // the dichotomy needs D > d-1 and a nonvanishing coefficient functional
        let degenerate = nondegeneracy <= 1e-12 || d_sim <= (self.d - 1) as f64;
        Ok(MeasurabilityReport {
            classification: if lattice { "lattice" } else { "nonlattice" }.into(),
            measurable: !lattice,
            content_or_average: c_d.re,
            nondegeneracy,
            degenerate,
            similarity_dimension: d_sim,
            oscillatory_period: self.zeta.lattice().map(|l| l.period),
            truncation_im: im_max,
        })
    }
}

impl TubeExpansion {
    /// Evaluates the truncated sum at `eps`, optionally Cesaro-averaged over
    /// the conjugate levels ordered by |Im omega|.
    pub fn evaluate(&self, eps: f64, averaging: Averaging) -> Complex64 {
        let d = self.dimension as f64;
        let mut terms: Vec<(f64, Complex64)> = Vec::with_capacity(
            self.scaling_terms.len() + self.integer_terms.len(),
        );
        for (omega, c) in &self.scaling_terms {
            terms.push((omega.im.abs(), c * real_pow(eps, d - omega)));
        }
        for (k, c) in &self.integer_terms {
            terms.push((
                0.0,
                Complex64::new(c * eps.powi((self.dimension - k) as i32), 0.0),
            ));
        }
        cesaro_sum(terms, averaging)
    }
}

/// Groups terms into levels by |Im|, accumulates partial sums in level
/// order, and either returns the last partial sum or the Cesaro mean.
fn cesaro_sum(mut terms: Vec<(f64, Complex64)>, averaging: Averaging) -> Complex64 {
    if terms.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    terms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut levels: Vec<Complex64> = Vec::new();
    let mut current_key = f64::NEG_INFINITY;
    for (key, value) in terms {
        if (key - current_key).abs() > 1e-9 {
            levels.push(Complex64::new(0.0, 0.0));
            current_key = key;
        }
        *levels.last_mut().unwrap() += value;
    }
    match averaging {
        Averaging::None => levels.iter().sum(),
        Averaging::Cesaro => {
            let mut partial = Complex64::new(0.0, 0.0);
            let mut total = Complex64::new(0.0, 0.0);
            for level in &levels {
                partial += level;
                total += partial;
            }
            total / levels.len() as f64
        }
    }
}

fn multiset_count(n: usize, j: usize) -> f64 {
    // number of (e_1..e_J) with sum <= n: C(n + J, J)
    let mut c = 1.0f64;
    for i in 1..=j {
        c *= (n + i) as f64 / i as f64;
    }
    c
}

#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Measurability classification of a tiling model.
#[derive(Clone, Debug, Serialize)]
pub struct MeasurabilityReport {
    pub classification: String,
    pub measurable: bool,
    pub content_or_average: f64,
    pub nondegeneracy: f64,
    pub degenerate: bool,
    pub similarity_dimension: f64,
    pub oscillatory_period: Option<f64>,
    pub truncation_im: f64,
}

/// A self-similar fractal string realized as a spray on the interval (0, 2),
/// rescaled so the first tile has inradius `scale`.
#[derive(Clone, Debug)]
pub struct StringModel {
    model: TilingModel,
    scale: f64,
}

/// Builds the d=1 model of a self-similar string with the given ratios; the
/// generator is the interval (0, 2) scaled by `scale`.
pub fn string_adapter(ratios: &[f64], scale: f64) -> Result<StringModel> {
    if !(scale > 0.0) {
        return Err(Error::InvalidModel("scale must be positive".into()));
    }
    let rep = SteinerRep::interval(2.0)?.scale(scale);
    let model = TilingModel::new(ScalingZeta::new(ratios)?, vec![rep])?;
    Ok(StringModel { model, scale })
}

impl StringModel {
    pub fn model(&self) -> &TilingModel {
        &self.model
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Scaling zeta function of the scaled spray: the tile inradii are
    /// `scale * r_w`, so the Mellin transform picks up a `scale^s` factor
    /// relative to the bare Moran zeta function.
    pub fn scaling_zeta_value(&self, s: Complex64) -> Result<Complex64> {
        Ok(real_pow(self.scale, s) * self.model.zeta.eval(s)?)
    }

    /// Geometric zeta function of the underlying string: lengths are
    /// `2 scale r_w`, so `zeta_L(s) = (2 scale)^s zeta_s(s)`.
    pub fn zeta_l(&self, s: Complex64) -> Result<Complex64> {
        Ok(real_pow(2.0 * self.scale, s) * self.model.zeta.eval(s)?)
    }

    /// The string form of the tubular zeta function,
    /// `zeta_L(s) (2 eps)^{1-s} / (s (1-s))`.
    pub fn tubular_zeta_string_form(&self, eps: f64, s: Complex64) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        Ok(self.zeta_l(s)? * real_pow(2.0 * eps, one - s) / (s * (one - s)))
    }
}

/// Finitely many scaled copies of one generator: the scaling measure is a
/// finite list, the zeta function has no poles, and the tube formula
/// degenerates to a sum of Steiner polynomials.
#[derive(Clone, Debug)]
pub struct FiniteSpray {
    scales: Vec<f64>,
    rep: SteinerRep,
}

impl FiniteSpray {
    pub fn new(scales: Vec<f64>, rep: SteinerRep) -> Result<Self> {
        if scales.is_empty() || scales.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidModel(
                "finite spray needs positive scales".into(),
            ));
        }
        Ok(FiniteSpray { scales, rep })
    }

    /// Direct sum of the per-tile tube volumes.
    pub fn tube_volume_direct(&self, eps: f64) -> f64 {
        self.scales
            .iter()
            .map(|rho| self.rep.gamma(1.0 / rho, eps))
            .sum()
    }

    /// Sum of Steiner polynomials, `sum_k (sum_n rho_n^k) kappa_k eps^{d-k}`;
    /// agrees with the direct sum below every saturation threshold.
    pub fn tube_volume_steiner(&self, eps: f64) -> Result<f64> {
        let kappa = self.rep.kappa_full().ok_or_else(|| {
            Error::NoClosedExpansion("finite spray polynomial needs a monophase generator".into())
        })?;
        let d = self.rep.dimension();
        let mut total = 0.0;
        for (k, c) in kappa.iter().enumerate().take(d) {
            let moment: f64 = self.scales.iter().map(|rho| rho.powi(k as i32)).sum();
            total += moment * c * eps.powi((d - k) as i32);
        }
        Ok(total)
    }

    /// First scale at which some tile saturates.
    pub fn min_saturation(&self) -> f64 {
        self.scales
            .iter()
            .map(|rho| rho * self.rep.inradius())
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexPolygon;

    const LN3: f64 = 1.0986122886681098;

    fn cantor_model() -> TilingModel {
        TilingModel::new(
            ScalingZeta::new(&[1.0 / 3.0, 1.0 / 3.0]).unwrap(),
            vec![SteinerRep::interval(1.0 / 3.0).unwrap()],
        )
        .unwrap()
    }

    fn sierpinski_model() -> TilingModel {
        let rep =
            SteinerRep::from_polygon(&ConvexPolygon::equilateral_triangle(0.5).unwrap()).unwrap();
        TilingModel::new(ScalingZeta::new(&[0.5, 0.5, 0.5]).unwrap(), vec![rep]).unwrap()
    }

    #[test]
    fn tubular_zeta_decays_to_the_right() {
        // the dominant factor is (g/eps)^s, so the decay direction needs
        // eps above the generating inradius
        let m = cantor_model();
        let g = m.reps()[0].inradius();
        let eps = 2.0 * g;
        let v = m.tubular_zeta(eps, Complex64::new(50.0, 0.0)).unwrap();
        assert!(v.norm() < 1e-6);
        let v2 = m.tubular_zeta(eps, Complex64::new(80.0, 0.0)).unwrap();
        assert!(v2.norm() < v.norm());
    }

    #[test]
    fn tubular_zeta_conjugate_symmetry() {
        let m = sierpinski_model();
        let mut state = 3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut checked = 0;
        while checked < 20 {
            let s = Complex64::new(6.0 * next() - 2.0, 30.0 * next() + 0.1);
            if let (Ok(a), Ok(b)) = (
                m.tubular_zeta(0.05, s),
                m.tubular_zeta(0.05, s.conj()),
            ) {
                assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
                checked += 1;
            }
        }
    }

    #[test]
    fn oracle_saturated_values() {
        let cantor = cantor_model();
        // every tile saturated at eps >= g: total length 1
        assert!((cantor.tube_volume_oracle(1.0 / 6.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((cantor.tube_volume_oracle(0.4).unwrap() - 1.0).abs() < 1e-12);

        let sierpinski = sierpinski_model();
        let g = sierpinski.reps()[0].inradius();
        let total = 3f64.sqrt() / 4.0;
        assert!((sierpinski.tube_volume_oracle(g).unwrap() - total).abs() < 1e-9);
        assert!((sierpinski.total_volume() - total).abs() < 1e-9);
    }

    #[test]
    fn oracle_depth_consistency() {
        let m = sierpinski_model();
        let g = m.reps()[0].inradius();
        for &eps in &[g / 3.0, g / 17.0, g / 99.0] {
            let n = m.saturation_depth(eps).unwrap();
            let a = m.tube_volume_oracle_at_depth(eps, n).unwrap();
            let b = m.tube_volume_oracle_at_depth(eps, n + 2).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "eps={eps}: {a} vs {b}");
        }
        // depth below saturation is rejected
        let n = m.saturation_depth(g / 10.0).unwrap();
        assert!(m.tube_volume_oracle_at_depth(g / 10.0, n - 1).is_err());
    }

    #[test]
    fn oracle_mixed_ratios_matches_explicit_enumeration() {
        // two distinct ratios exercise the multiset aggregation
        let rep = SteinerRep::interval(1.0 / 6.0).unwrap();
        let m = TilingModel::new(ScalingZeta::new(&[0.5, 1.0 / 3.0]).unwrap(), vec![rep.clone()])
            .unwrap();
        let eps = rep.inradius() / 7.0;
        let n = m.saturation_depth(eps).unwrap();
        // explicit J^k enumeration as an independent route
        let sys = crate::ifs::SelfSimilarSystem::new(
            vec![0.5, 1.0 / 3.0],
            1,
            vec![crate::ifs::Generator::interval(1.0 / 6.0, "gap")],
            None,
        )
        .unwrap();
        let mut explicit = 0.0;
        for (_, r_w) in sys.words_explicit(n as usize).unwrap() {
            explicit += rep.gamma(1.0 / r_w, eps);
        }
        let s_d = 0.5f64 + 1.0 / 3.0;
        explicit += rep.volume() * s_d.powi((n + 1) as i32) / (1.0 - s_d);
        let got = m.tube_volume_oracle(eps).unwrap();
        assert!((got - explicit).abs() <= 1e-13 * explicit.max(1.0));
    }

    #[test]
    fn koch_integer_term_residues() {
        let rep = SteinerRep::from_polygon(&ConvexPolygon::equilateral_triangle(1.0 / 3.0).unwrap())
            .unwrap();
        let m = TilingModel::new(
            ScalingZeta::new(&[3f64.powf(-0.5), 3f64.powf(-0.5)]).unwrap(),
            vec![rep],
        )
        .unwrap();
        // residue at 0: kappa_0 zeta_s(0) eps^2 = (-3 sqrt 3)(-1) eps^2
        let eps = 0.01;
        let r0 = m.residue_tubular(Complex64::new(0.0, 0.0), eps).unwrap();
        assert!((r0.re - 3.0 * 3f64.sqrt() * eps * eps).abs() < 1e-9 * eps * eps);
        assert!(r0.im.abs() < 1e-15);
    }

    #[test]
    fn sierpinski_linear_term_residue() {
        let m = sierpinski_model();
        let eps = 0.02;
        let r1 = m.residue_tubular(Complex64::new(1.0, 0.0), eps).unwrap();
        assert!((r1.re - (-3.0 * eps)).abs() < 1e-9 * eps);
    }

    #[test]
    fn scaling_residue_closed_vs_contour() {
        let m = cantor_model();
        let d = m.zeta().similarity_dimension();
        let p = m.zeta().lattice().unwrap().period;
        let eps = 0.03;
        for n in -3i32..=3 {
            let omega = Complex64::new(d, n as f64 * p);
            let closed = m.residue_tubular(omega, eps).unwrap();
            let contour = m.residue_tubular_contour(omega, eps, 1e-3, 128);
            assert!(
                (closed - contour).norm() <= 1e-9 * closed.norm().max(1.0),
                "n={n}: {closed} vs {contour}"
            );
        }
    }

    #[test]
    fn cantor_expansion_terms() {
        let m = cantor_model();
        let exp = m.tube_expansion(30.0).unwrap();
        // integer term: kappa_0 zeta_s(0) = 2 * (-1) = -2
        assert_eq!(exp.integer_terms.len(), 1);
        assert!((exp.integer_terms[0].1 - (-2.0)).abs() < 1e-12);
        // n = 0 coefficient matches (1/(3 ln 3)) (1/D - 1/(D-1)) g^{D-1}
        let d = m.zeta().similarity_dimension();
        let g: f64 = 1.0 / 6.0;
        let expected = 1.0 / (3.0 * LN3) * (1.0 / d - 1.0 / (d - 1.0)) * g.powf(d - 1.0);
        let c0 = exp
            .scaling_terms
            .iter()
            .find(|(om, _)| om.im.abs() < 1e-9)
            .unwrap()
            .1;
        assert!((c0.re - expected).abs() < 1e-12 * expected.abs());
        assert!(c0.im.abs() < 1e-13);
        // conjugate closure with conjugate coefficients
        for (om, c) in &exp.scaling_terms {
            let mirror = exp
                .scaling_terms
                .iter()
                .find(|(o2, _)| (o2 - om.conj()).norm() < 1e-9)
                .expect("conjugate pole present");
            assert!((mirror.1 - c.conj()).norm() < 1e-12 * c.norm().max(1e-30));
        }
    }

    #[test]
    fn formula_tracks_oracle_for_cantor() {
        let m = cantor_model();
        let g = 1.0 / 6.0;
        for &eps in &[g / 50.0, g / 7.0, g / 2.0, g * 0.99] {
            let oracle = m.tube_volume_oracle(eps).unwrap();
            let formula = m.tube_volume_formula(eps, 400.0, Averaging::Cesaro).unwrap();
            assert!(
                (formula.value - oracle).abs() <= 0.01 * oracle.abs(),
                "eps={eps}: formula={} oracle={oracle}",
                formula.value
            );
            assert!(formula.im_residual < 1e-10);
        }
    }

    #[test]
    fn term_modulus_scales_with_epsilon() {
        let m = cantor_model();
        let exp = m.tube_expansion(30.0).unwrap();
        let (omega, c) = exp.scaling_terms[0];
        let d = m.dimension() as f64;
        let eps = 0.01;
        let lambda = 1.7;
        let t1 = (c * real_pow(eps, d - omega)).norm();
        let t2 = (c * real_pow(lambda * eps, d - omega)).norm();
        assert!((t2 / t1 - lambda.powf(d - omega.re)).abs() < 1e-12);
    }

    #[test]
    fn string_adapter_identities() {
        let s_model = string_adapter(&[1.0 / 3.0, 1.0 / 3.0], 1.0 / 6.0).unwrap();
        let mut state = 11u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut checked = 0;
        while checked < 20 {
            let s = Complex64::new(3.0 * next() - 1.0, 12.0 * next() - 6.0);
            let eps = 0.01 + 0.3 * next();
            if s.norm() < 0.05 || (s - Complex64::new(1.0, 0.0)).norm() < 0.05 {
                continue;
            }
            let via_machinery = match s_model.model().tubular_zeta(eps, s) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let via_string = s_model.tubular_zeta_string_form(eps, s).unwrap();
            assert!(
                (via_machinery - via_string).norm() <= 1e-12 * via_string.norm().max(1e-30),
                "s={s} eps={eps}"
            );
            // zeta_s = 2^{-s} zeta_L for the scaled spray
            let lhs = s_model.scaling_zeta_value(s).unwrap();
            let rhs = real_pow(2.0, -s) * s_model.zeta_l(s).unwrap();
            assert!((lhs - rhs).norm() <= 1e-13 * lhs.norm().max(1e-30));
            checked += 1;
        }
    }

    #[test]
    fn string_adapter_matches_cantor_tiling() {
        let s_model = string_adapter(&[1.0 / 3.0, 1.0 / 3.0], 1.0 / 6.0).unwrap();
        let tiling = cantor_model();
        assert!(
            (s_model.model().zeta().similarity_dimension()
                - tiling.zeta().similarity_dimension())
            .abs()
                < 1e-15
        );
        for &eps in &[0.002, 0.01, 0.05, 0.16] {
            let a = s_model
                .model()
                .tube_volume_formula(eps, 200.0, Averaging::Cesaro)
                .unwrap();
            let b = tiling.tube_volume_formula(eps, 200.0, Averaging::Cesaro).unwrap();
            assert!((a.value - b.value).abs() <= 1e-12 * b.value.abs().max(1.0));
        }
    }

    #[test]
    fn measurability_classifications() {
        let m = sierpinski_model();
        let rep = m.measurability_report(400.0).unwrap();
        assert_eq!(rep.classification, "lattice");
        assert!(!rep.measurable);
        assert!(rep.nondegeneracy > 1e-12);

        let square = SteinerRep::from_polygon(&ConvexPolygon::square(1.0).unwrap()).unwrap();
        let nl = TilingModel::new(
            ScalingZeta::new(&[0.5, 1.0 / 3.0]).unwrap(),
            vec![square],
        )
        .unwrap();
        let rep = nl.measurability_report(400.0).unwrap();
        assert_eq!(rep.classification, "nonlattice");
        assert!(rep.measurable);
        // D ~ 0.788 < d - 1 = 1: the dichotomy hypothesis fails, flag it
        assert!(rep.degenerate);

        let cantor = cantor_model();
        let rep = cantor.measurability_report(400.0).unwrap();
        assert!(!rep.degenerate); // D ~ 0.63 > d - 1 = 0
        assert!(rep.nondegeneracy > 0.0);
    }

    #[test]
    fn finite_spray_degeneration() {
        let square = SteinerRep::from_polygon(&ConvexPolygon::square(1.0).unwrap()).unwrap();
        let spray = FiniteSpray::new(vec![1.0, 0.6, 0.25], square).unwrap();
        let sat = spray.min_saturation();
        for i in 1..20 {
            let eps = sat * i as f64 / 20.0;
            let a = spray.tube_volume_direct(eps);
            let b = spray.tube_volume_steiner(eps).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "eps={eps}");
        }
        // beyond saturation the polynomial overshoots while the direct sum clamps
        let beyond = spray.tube_volume_direct(2.0);
        assert!((beyond - spray.tube_volume_steiner(2.0).unwrap()).abs() > 1e-6);
    }

    #[test]
    fn epsilon_grid_shapes() {
        let lin = epsilon_grid(0.1, 0.5, 5, false);
        assert_eq!(lin.len(), 5);
        assert!((lin[2] - 0.3).abs() < 1e-15);
        let log = epsilon_grid(0.01, 1.0, 3, true);
        assert!((log[1] - 0.1).abs() < 1e-12);
        assert_eq!(epsilon_grid(0.2, 0.4, 1, true), vec![0.2]);
    }
}
