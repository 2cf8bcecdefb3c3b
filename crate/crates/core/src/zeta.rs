//! The scaling zeta function 1/(1 - sum r_j^s): evaluation, the similarity
//! dimension, lattice/nonlattice classification, pole location in a window,
//! and residues.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Threshold on the denominator below which evaluation refuses to proceed.
pub const POLE_GUARD: f64 = 1e-12;

/// Poles closer than this are merged (and counted with multiplicity).
pub const ROOT_MERGE_TOL: f64 = 1e-8;

/// Residual required of located poles: |1 - sum r_j^omega| <= this.
pub const POLE_RESIDUAL: f64 = 1e-10;

/// Denominator bound for continued-fraction lattice detection.
pub const LATTICE_DENOM_BOUND: u64 = 1_000_000;

/// Default tolerance for lattice detection.
pub const LATTICE_TOL: f64 = 1e-12;

/// `base^s` for a positive real base.
pub fn real_pow(base: f64, s: Complex64) -> Complex64 {
    (s * base.ln()).exp()
}

/// The unique real root of `sum_j r_j^s = 1`; the function is strictly
/// decreasing in `s`, so bisection brackets the root and Newton polishes it
/// to residual <= 1e-13.
pub fn similarity_dimension(ratios: &[f64]) -> Result<f64> {
    if ratios.len() < 2 {
        return Err(Error::InvalidModel("need at least 2 ratios".into()));
    }
    if ratios.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::InvalidModel("ratios must lie in (0, 1)".into()));
    }
    let f = |s: f64| -> f64 { ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0 };
    let fp = |s: f64| -> f64 { ratios.iter().map(|r| r.powf(s) * r.ln()).sum::<f64>() };
    let mut lo = 0.0f64; // f(0) = J - 1 > 0
    let mut hi = 1.0f64;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NumericalFailure(
                "similarity dimension bracket not found".into(),
            ));
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..8 {
        let v = f(s);
        let d = fp(s);
        if d == 0.0 {
            break;
        }
        let step = v / d;
        s -= step;
        if step.abs() <= 1e-16 * s.abs().max(1.0) {
            break;
        }
    }
    if f(s).abs() > 1e-13 {
        return Err(Error::NumericalFailure(format!(
            "similarity dimension residual {} exceeds 1e-13",
            f(s).abs()
        )));
    }
    Ok(s)
}

/// Lattice structure of a ratio list: `r_j = r^{k_j}` with gcd(k_j) = 1 and
/// oscillatory period `2 pi / ln(1/r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeStructure {
    pub base: f64,
    pub exponents: Vec<u64>,
    pub period: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LatticeClass {
    Lattice(LatticeStructure),
    Nonlattice,
}

/// Continued-fraction reconstruction of `x` as `p/q` with `q <= qmax`.
///
/// A convergent is accepted only when the remaining fractional part is below
/// `1/qmax`, i.e. the next partial quotient would exceed the denominator
/// bound. Without this exactness certificate, irrational ratios such as
/// log_3(2) admit convergents with error below 1e-12 at denominators under
/// 1e6 and would be misclassified as rational.
fn rational_reconstruct(x: f64, tol: f64, qmax: u64) -> Option<(u64, u64)> {
    if !(x > 0.0) || !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0): (u64, u64) = (0, 1);
    let (mut p1, mut q1): (u64, u64) = (1, 0);
    let mut t = x;
    for _ in 0..128 {
        let a = t.floor();
        if a < 0.0 || a > qmax as f64 {
            return None;
        }
        let a_int = a as u64;
        let p = a_int.checked_mul(p1)?.checked_add(p0)?;
        let q = a_int.checked_mul(q1)?.checked_add(q0)?;
        if q > qmax {
            return None;
        }
        p0 = p1;
        q0 = q1;
        p1 = p;
        q1 = q;
        let frac = t - a;
        if frac.abs() <= 1.0 / qmax as f64 {
            let err = (x - p as f64 / q as f64).abs();
            return (err <= tol).then_some((p, q));
        }
        t = 1.0 / frac;
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Classifies the ratio list as lattice (all `ln r_j` integer multiples of a
/// common logarithm) or nonlattice, at the given reconstruction tolerance.
pub fn detect_lattice(ratios: &[f64], tol: f64) -> LatticeClass {
    let mut sorted = ratios.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let r_min = sorted[sorted.len() - 1];
    let ln_min = r_min.ln();
    // x_j = ln r_j / ln r_J in (0, 1]
    let mut fractions = Vec::with_capacity(sorted.len());
    for r in &sorted {
        match rational_reconstruct(r.ln() / ln_min, tol, LATTICE_DENOM_BOUND) {
            Some(pq) => fractions.push(pq),
            None => return LatticeClass::Nonlattice,
        }
    }
    // common grid: k_j / k_J = p_j / q_j with k_J = lcm of the q_j
    let mut lcm: u64 = 1;
    for &(_, q) in &fractions {
        lcm = match (lcm / gcd(lcm, q)).checked_mul(q) {
            Some(v) if v <= LATTICE_DENOM_BOUND => v,
            _ => return LatticeClass::Nonlattice,
        };
    }
    let mut exponents: Vec<u64> = fractions.iter().map(|&(p, q)| p * (lcm / q)).collect();
    let g = exponents.iter().fold(0u64, |acc, &k| gcd(acc, k));
    if g == 0 {
        return LatticeClass::Nonlattice;
    }
    for k in &mut exponents {
        *k /= g;
    }
    let k_last = exponents[exponents.len() - 1];
    let base = r_min.powf(1.0 / k_last as f64);
    let verified = sorted
        .iter()
        .zip(&exponents)
        .all(|(r, &k)| (r - base.powi(k as i32)).abs() <= 1e-12);
    if !verified {
        return LatticeClass::Nonlattice;
    }
    LatticeClass::Lattice(LatticeStructure {
        base,
        exponents,
        period: 2.0 * std::f64::consts::PI / (1.0 / base).ln(),
    })
}

/// A pole of the scaling zeta function, with multiplicity and (for simple
/// poles) the residue.
#[derive(Clone, Copy, Debug)]
pub struct ComplexDimension {
    pub omega: Complex64,
    pub multiplicity: usize,
    pub residue: Option<Complex64>,
}

/// Rectangular search window: `re_min <= Re s <= re_max`, `|Im s| <= im_max`.
#[derive(Clone, Copy, Debug)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_max: f64) -> Result<Self> {
        let bounded = re_min.is_finite() && re_max.is_finite() && im_max.is_finite();
        if !bounded || !(re_min < re_max) || !(im_max > 0.0) {
            return Err(Error::InvalidModel(format!(
                "invalid window [{re_min}, {re_max}] x [-{im_max}, {im_max}]"
            )));
        }
        Ok(Window {
            re_min,
            re_max,
            im_max,
        })
    }

    fn contains(&self, s: Complex64, slack: f64) -> bool {
        s.re >= self.re_min - slack
            && s.re <= self.re_max + slack
            && s.im.abs() <= self.im_max + slack
    }
}

/// The meromorphic scaling zeta function of a ratio list, together with its
/// similarity dimension and lattice classification.
#[derive(Clone, Debug)]
pub struct ScalingZeta {
    ratios: Vec<f64>,
    dim: f64,
    lattice: Option<LatticeStructure>,
}

impl ScalingZeta {
    pub fn new(ratios: &[f64]) -> Result<Self> {
        let dim = similarity_dimension(ratios)?;
        let mut sorted = ratios.to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let lattice = match detect_lattice(&sorted, LATTICE_TOL) {
            LatticeClass::Lattice(l) => Some(l),
            LatticeClass::Nonlattice => None,
        };
        Ok(ScalingZeta {
            ratios: sorted,
            dim,
            lattice,
        })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn similarity_dimension(&self) -> f64 {
        self.dim
    }

    pub fn lattice(&self) -> Option<&LatticeStructure> {
        self.lattice.as_ref()
    }

    /// `1 - sum_j r_j^s`, the denominator whose zeros are the poles.
    pub fn denominator(&self, s: Complex64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for r in &self.ratios {
            sum += real_pow(*r, s);
        }
        Complex64::new(1.0, 0.0) - sum
    }

    /// Derivative of the denominator: `sum_j r_j^s ln(1/r_j)`.
    pub fn denominator_derivative(&self, s: Complex64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for r in &self.ratios {
            sum += real_pow(*r, s) * (1.0 / r).ln();
        }
        sum
    }

    /// Evaluates the zeta function away from poles.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let den = self.denominator(s);
        if den.norm() < POLE_GUARD {
            return Err(Error::NearPole { dist: den.norm() });
        }
        Ok(den.inv())
    }

    /// Closed-form residue at a simple pole from the derivative of the
    /// denominator.
    pub fn residue(&self, omega: Complex64) -> Result<Complex64> {
        if self.denominator(omega).norm() > POLE_RESIDUAL {
            return Err(Error::NumericalFailure(format!(
                "residue requested away from a pole (|den| = {:.3e})",
                self.denominator(omega).norm()
            )));
        }
        let d = self.denominator_derivative(omega);
        if d.norm() < 1e-8 {
            return Err(Error::NotSimplePole {
                re: omega.re,
                im: omega.im,
            });
        }
        Ok(d.inv())
    }

    /// Residue by trapezoid quadrature of `zeta` on a circle around `omega`.
    pub fn residue_contour(&self, omega: Complex64, radius: f64, nodes: usize) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..nodes {
            let th = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
            let offset = Complex64::from_polar(radius, th);
            sum += self.denominator(omega + offset).inv() * offset;
        }
        sum / nodes as f64
    }

    /// Poles inside the window. Uses the exact line structure in the lattice
    /// case and a Newton search validated by the argument principle otherwise.
    pub fn complex_dimensions(&self, win: &Window) -> Result<Vec<ComplexDimension>> {
        match &self.lattice {
            Some(lat) => self.complex_dimensions_lattice(lat, win),
            None => self.complex_dimensions_nonlattice(win, DEFAULT_GRID_STEP),
        }
    }

    /// Lattice case: substituting `u = r^s` turns the Moran equation into a
    /// polynomial; every root line is periodic with the lattice period.
    pub fn complex_dimensions_lattice(
        &self,
        lat: &LatticeStructure,
        win: &Window,
    ) -> Result<Vec<ComplexDimension>> {
        let degree = *lat.exponents.iter().max().unwrap() as usize;
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[0] = -1.0;
        for &k in &lat.exponents {
            coeffs[k as usize] += 1.0;
        }
        let roots = aberth_roots(&coeffs)?;
        let clusters = cluster_roots(&roots, ROOT_MERGE_TOL);
        let ln_r = lat.base.ln(); // negative
        let mut dims: Vec<ComplexDimension> = Vec::new();
        for (u0, mult) in clusters {
            if u0.norm() < 1e-14 {
                continue;
            }
            let re = u0.norm().ln() / ln_r;
            let im0 = u0.arg() / ln_r;
            if re < win.re_min - 1e-9 || re > win.re_max + 1e-9 {
                continue;
            }
            // the full line: im0 + n * period covers arg + 2 pi n over ln r
            let n_lo = ((-win.im_max - im0) / lat.period).floor() as i64 - 1;
            let n_hi = ((win.im_max - im0) / lat.period).ceil() as i64 + 1;
            for n in n_lo..=n_hi {
                let omega = Complex64::new(re, im0 + n as f64 * lat.period);
                if !win.contains(omega, 1e-9) {
                    continue;
                }
                let residue = if mult == 1 {
                    Some(self.residue(omega)?)
                } else {
                    None
                };
                dims.push(ComplexDimension {
                    omega,
                    multiplicity: mult,
                    residue,
                });
            }
        }
        dedup_dims(&mut dims);
        Ok(dims)
    }

    /// Nonlattice case: Newton iterations seeded on a grid over the window,
    /// validated by comparing against the argument-principle count.
    pub fn complex_dimensions_nonlattice(
        &self,
        win: &Window,
        grid_step: f64,
    ) -> Result<Vec<ComplexDimension>> {
        if !(grid_step > 0.0) {
            return Err(Error::InvalidModel("grid_step must be positive".into()));
        }
        let mut found: Vec<Complex64> = Vec::new();
        let mut re = win.re_min;
        while re <= win.re_max + 1e-12 {
            let mut im = 0.0;
            while im <= win.im_max + 1e-12 {
                if let Some(root) = self.newton_root(Complex64::new(re, im)) {
                    if win.contains(root, 1e-9)
                        && !found.iter().any(|r| (r - root).norm() < ROOT_MERGE_TOL)
                    {
                        found.push(root);
                    }
                }
                im += grid_step;
            }
            re += grid_step;
        }
        // conjugate closure: the window is a symmetric band
        let mut closed = found.clone();
        for r in &found {
            if r.im.abs() > 1e-9 {
                let conj = r.conj();
                if !closed.iter().any(|c| (c - conj).norm() < ROOT_MERGE_TOL) {
                    closed.push(conj);
                }
            }
        }
        let contour = self.argument_principle_count(win)?;
        if contour != closed.len() {
            return Err(Error::IncompleteRootSet {
                contour,
                found: closed.len(),
            });
        }
        let mut dims = closed
            .into_iter()
            .map(|omega| {
                Ok(ComplexDimension {
                    omega,
                    multiplicity: 1,
                    residue: Some(self.residue(omega)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        dedup_dims(&mut dims);
        Ok(dims)
    }

    fn newton_root(&self, seed: Complex64) -> Option<Complex64> {
        let mut z = seed;
        for _ in 0..80 {
            if z.re.abs() > 400.0 || z.im.abs() > 1e4 {
                return None;
            }
            let d = self.denominator_derivative(z);
            if d.norm() < 1e-300 {
                return None;
            }
            let step = self.denominator(z) / d;
            z -= step;
            if step.norm() <= 1e-13 * z.norm().max(1.0) {
                return (self.denominator(z).norm() <= POLE_RESIDUAL).then_some(z);
            }
        }
        None
    }

    /// Number of zeros (with multiplicity) of the denominator inside the
    /// window rectangle, by continuation of the argument along the boundary.
    pub fn argument_principle_count(&self, win: &Window) -> Result<usize> {
        let corners = [
            Complex64::new(win.re_min, -win.im_max),
            Complex64::new(win.re_max, -win.im_max),
            Complex64::new(win.re_max, win.im_max),
            Complex64::new(win.re_min, win.im_max),
        ];
        let mut total = 0.0f64;
        for i in 0..4 {
            total += self.edge_phase_change(corners[i], corners[(i + 1) % 4])?;
        }
        let winding = total / (2.0 * std::f64::consts::PI);
        let rounded = winding.round();
        if (winding - rounded).abs() > 0.01 || rounded < 0.0 {
            return Err(Error::NumericalFailure(format!(
                "argument principle winding {winding} is not a nonnegative integer"
            )));
        }
        Ok(rounded as usize)
    }

    fn edge_phase_change(&self, a: Complex64, b: Complex64) -> Result<f64> {
        // subdivide until consecutive phase jumps are < pi/2
        let init = ((b - a).norm() / 0.25).ceil().max(8.0) as usize;
        let mut stack: Vec<(Complex64, Complex64, f64, f64, usize)> = Vec::new();
        let phase = |z: Complex64| -> Result<f64> {
            let v = self.denominator(z);
            if v.norm() < 1e-300 {
                return Err(Error::NumericalFailure(
                    "zero of the denominator on the window boundary".into(),
                ));
            }
            Ok(v.arg())
        };
        let mut total = 0.0;
        for k in (0..init).rev() {
            let t0 = k as f64 / init as f64;
            let t1 = (k + 1) as f64 / init as f64;
            let pa = a + (b - a) * t0;
            let pb = a + (b - a) * t1;
            stack.push((pa, pb, phase(pa)?, phase(pb)?, 0));
        }
        while let Some((pa, pb, fa, fb, depth)) = stack.pop() {
            let mut d = fb - fa;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            if d.abs() < std::f64::consts::FRAC_PI_2 {
                total += d;
                continue;
            }
            if depth > 48 {
                return Err(Error::NumericalFailure(
                    "argument continuation did not resolve; a pole sits on the window boundary"
                        .into(),
                ));
            }
            let mid = (pa + pb) * 0.5;
            let fm = phase(mid)?;
            stack.push((mid, pb, fm, fb, depth + 1));
            stack.push((pa, mid, fa, fm, depth + 1));
        }
        Ok(total)
    }
}

/// Default Newton seed spacing for nonlattice searches.
pub const DEFAULT_GRID_STEP: f64 = 0.25;

fn dedup_dims(dims: &mut Vec<ComplexDimension>) {
    dims.sort_by(|a, b| {
        (a.omega.im, a.omega.re)
            .partial_cmp(&(b.omega.im, b.omega.re))
            .unwrap()
    });
    dims.dedup_by(|a, b| (a.omega - b.omega).norm() < ROOT_MERGE_TOL);
}

/// All complex roots of a real-coefficient polynomial by the Aberth-Ehrlich
/// simultaneous iteration, polished with Newton steps.
fn aberth_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut cs: Vec<f64> = coeffs.to_vec();
    while cs.last().is_some_and(|c| c.abs() < 1e-300) {
        cs.pop();
    }
    let n = cs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        // Horner for value and derivative
        let mut p = Complex64::new(cs[n], 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (0..n).rev() {
            dp = dp * z + p;
            p = p * z + cs[k];
        }
        (p, dp)
    };
    // starting ring from the geometric mean estimate |a0/an|^(1/n)
    let r0 = (cs[0].abs() / cs[n].abs()).powf(1.0 / n as f64).max(1e-3);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.3) / n as f64 + 0.42;
            Complex64::from_polar(r0 * (1.0 + 0.05 * k as f64 / n as f64), th)
        })
        .collect();
    let mut converged = false;
    for _ in 0..400 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval(roots[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let w = if dp.norm() > 0.0 { p / dp } else { p };
            let mut rep = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = roots[i] - roots[j];
                    if diff.norm() > 1e-300 {
                        rep += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - w * rep;
            let step = if denom.norm() > 1e-300 { w / denom } else { w };
            roots[i] -= step;
            max_step = max_step.max(step.norm() / roots[i].norm().max(1.0));
        }
        if max_step < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged {
        // multiple roots stall the joint iteration; accept if residuals are small
        let bad = roots.iter().any(|z| eval(*z).0.norm() > 1e-6);
        if bad {
            return Err(Error::NumericalFailure(
                "polynomial root iteration did not converge".into(),
            ));
        }
    }
    for z in &mut roots {
        for _ in 0..4 {
            let (p, dp) = eval(*z);
            if dp.norm() < 1e-300 {
                break;
            }
            *z -= p / dp;
        }
    }
    Ok(roots)
}

fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &z in roots {
        match clusters
            .iter_mut()
            .find(|(c, m)| (*c / *m as f64 - z).norm() < tol)
        {
            Some((c, m)) => {
                *c += z;
                *m += 1;
            }
            None => clusters.push((z, 1)),
        }
    }
    clusters
        .into_iter()
        .map(|(sum, m)| (sum / m as f64, m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;
    const LN3: f64 = 1.0986122886681098;

    fn cantor_ratios() -> Vec<f64> {
        vec![1.0 / 3.0, 1.0 / 3.0]
    }

    fn koch_ratios() -> Vec<f64> {
        vec![3f64.powf(-0.5), 3f64.powf(-0.5)]
    }

    fn sierpinski_ratios() -> Vec<f64> {
        vec![0.5, 0.5, 0.5]
    }

    #[test]
    fn similarity_dimension_golden() {
        let d = similarity_dimension(&cantor_ratios()).unwrap();
        assert!((d - LN2 / LN3).abs() < 1e-13);
        let d = similarity_dimension(&koch_ratios()).unwrap();
        assert!((d - 2.0 * LN2 / LN3).abs() < 1e-13);
        let d = similarity_dimension(&sierpinski_ratios()).unwrap();
        assert!((d - LN3 / LN2).abs() < 1e-13);
    }

    #[test]
    fn similarity_dimension_mixed_ratios() {
        let d = similarity_dimension(&[0.5, 1.0 / 3.0]).unwrap();
        // bracket check: the Moran sum crosses 1 at the root
        let f = |s: f64| 0.5f64.powf(s) + (1.0f64 / 3.0).powf(s) - 1.0;
        assert!(f(d - 1e-11) > 0.0 && f(d + 1e-11) < 0.0);
        assert!((d - 0.7878849110258698).abs() < 1e-12);
    }

    #[test]
    fn lattice_detection_golden() {
        match detect_lattice(&cantor_ratios(), LATTICE_TOL) {
            LatticeClass::Lattice(l) => {
                assert!((l.base - 1.0 / 3.0).abs() < 1e-14);
                assert_eq!(l.exponents, vec![1, 1]);
                assert!((l.period - 2.0 * std::f64::consts::PI / LN3).abs() < 1e-12);
            }
            LatticeClass::Nonlattice => panic!("cantor ratios are lattice"),
        }
        match detect_lattice(&koch_ratios(), LATTICE_TOL) {
            LatticeClass::Lattice(l) => {
                assert!((l.base - 3f64.powf(-0.5)).abs() < 1e-14);
                assert!((l.period - 4.0 * std::f64::consts::PI / LN3).abs() < 1e-12);
            }
            LatticeClass::Nonlattice => panic!("koch ratios are lattice"),
        }
        match detect_lattice(&[0.5, 0.25], LATTICE_TOL) {
            LatticeClass::Lattice(l) => {
                assert!((l.base - 0.5).abs() < 1e-14);
                assert_eq!(l.exponents, vec![1, 2]);
            }
            LatticeClass::Nonlattice => panic!("{{1/2, 1/4}} is lattice"),
        }
        assert_eq!(
            detect_lattice(&[0.5, 1.0 / 3.0], LATTICE_TOL),
            LatticeClass::Nonlattice
        );
    }

    #[test]
    fn zeta_eval_golden() {
        let cantor = ScalingZeta::new(&cantor_ratios()).unwrap();
        let v = cantor.eval(Complex64::new(0.0, 0.0)).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-14);

        let sierpinski = ScalingZeta::new(&sierpinski_ratios()).unwrap();
        let v = sierpinski.eval(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v - Complex64::new(-2.0, 0.0)).norm() < 1e-14);

        let koch = ScalingZeta::new(&koch_ratios()).unwrap();
        let v = koch.eval(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - (-6.464101615137754)).abs() < 1e-9);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn near_pole_guard() {
        let cantor = ScalingZeta::new(&cantor_ratios()).unwrap();
        let d = cantor.similarity_dimension();
        assert!(matches!(
            cantor.eval(Complex64::new(d, 0.0)),
            Err(Error::NearPole { .. })
        ));
    }

    #[test]
    fn conjugate_symmetry() {
        let zeta = ScalingZeta::new(&[0.5, 1.0 / 3.0]).unwrap();
        let mut state = 0x9e3779b9u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let s = Complex64::new(4.0 * next() - 2.0, 20.0 * next());
            if let (Ok(a), Ok(b)) = (zeta.eval(s), zeta.eval(s.conj())) {
                assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn lattice_periodicity_of_denominator() {
        let sierpinski = ScalingZeta::new(&sierpinski_ratios()).unwrap();
        let p = sierpinski.lattice().unwrap().period;
        let mut state = 7u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let s = Complex64::new(6.0 * next() - 3.0, 50.0 * next() - 25.0);
            let a = sierpinski.denominator(s);
            let b = sierpinski.denominator(s + Complex64::new(0.0, p));
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn cantor_dimensions_in_band() {
        let cantor = ScalingZeta::new(&cantor_ratios()).unwrap();
        let win = Window::new(-1.0, 1.0, 20.0).unwrap();
        let dims = cantor.complex_dimensions(&win).unwrap();
        assert_eq!(dims.len(), 7); // n = 0, +-1, +-2, +-3 at p ~ 5.7192
        let d = LN2 / LN3;
        let p = 2.0 * std::f64::consts::PI / LN3;
        for (i, dim) in dims.iter().enumerate() {
            let n = i as f64 - 3.0;
            assert!((dim.omega - Complex64::new(d, n * p)).norm() < 1e-10);
            assert_eq!(dim.multiplicity, 1);
            assert!(cantor.denominator(dim.omega).norm() <= POLE_RESIDUAL);
        }
    }

    #[test]
    fn sierpinski_dimensions_in_band() {
        let z = ScalingZeta::new(&sierpinski_ratios()).unwrap();
        let win = Window::new(0.0, 2.0, 10.0).unwrap();
        let dims = z.complex_dimensions(&win).unwrap();
        assert_eq!(dims.len(), 3); // p ~ 9.0647: n = 0, +-1
        assert!((dims[1].omega - Complex64::new(LN3 / LN2, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pentagasket_base_line() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let r = phi.powi(-2);
        let z = ScalingZeta::new(&[r; 5]).unwrap();
        let d_expected = 5f64.ln() / (2.0 * phi.ln());
        assert!((z.similarity_dimension() - d_expected).abs() < 1e-12);
        let win = Window::new(0.0, 2.0, 1.0).unwrap();
        let dims = z.complex_dimensions(&win).unwrap();
        assert_eq!(dims.len(), 1);
        assert!((dims[0].omega.re - d_expected).abs() < 1e-11);
    }

    #[test]
    fn residues_closed_form() {
        let cantor = ScalingZeta::new(&cantor_ratios()).unwrap();
        let d = cantor.similarity_dimension();
        let res = cantor.residue(Complex64::new(d, 0.0)).unwrap();
        assert!((res - Complex64::new(1.0 / LN3, 0.0)).norm() < 1e-13);

        let p = 2.0 * std::f64::consts::PI / LN3;
        let res_osc = cantor.residue(Complex64::new(d, p)).unwrap();
        assert!((res_osc - Complex64::new(1.0 / LN3, 0.0)).norm() < 1e-10);

        let sierpinski = ScalingZeta::new(&sierpinski_ratios()).unwrap();
        let res = sierpinski
            .residue(Complex64::new(sierpinski.similarity_dimension(), 0.0))
            .unwrap();
        assert!((res - Complex64::new(1.0 / LN2, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn residue_matches_contour_quadrature() {
        for ratios in [cantor_ratios(), sierpinski_ratios()] {
            let zeta = ScalingZeta::new(&ratios).unwrap();
            let d = zeta.similarity_dimension();
            let p = zeta.lattice().unwrap().period;
            for n in -3i32..=3 {
                let omega = Complex64::new(d, n as f64 * p);
                let closed = zeta.residue(omega).unwrap();
                let contour = zeta.residue_contour(omega, 1e-3, 64);
                assert!(
                    (closed - contour).norm() <= 1e-9 * closed.norm().max(1.0),
                    "n={n}: {closed} vs {contour}"
                );
            }
        }
    }

    #[test]
    fn nonlattice_single_root_small_window() {
        let z = ScalingZeta::new(&[0.5, 1.0 / 3.0]).unwrap();
        let win = Window::new(0.0, 1.0, 1.0).unwrap();
        let dims = z.complex_dimensions_nonlattice(&win, 0.25).unwrap();
        assert_eq!(dims.len(), 1);
        assert!((dims[0].omega.re - 0.7878849110258698).abs() < 1e-10);
        assert!(dims[0].omega.im.abs() < 1e-10);
    }

    #[test]
    fn nonlattice_band_validated_by_argument_principle() {
        let z = ScalingZeta::new(&[0.5, 1.0 / 3.0]).unwrap();
        let win = Window::new(-2.0, 1.0, 40.0).unwrap();
        let dims = z.complex_dimensions_nonlattice(&win, 0.25).unwrap();
        assert_eq!(z.argument_principle_count(&win).unwrap(), dims.len());
        assert_eq!(dims.len(), 15); // 7 conjugate pairs plus the real root
        let d = z.similarity_dimension();
        for dim in &dims {
            assert!(z.denominator(dim.omega).norm() <= POLE_RESIDUAL);
            if dim.omega.im.abs() > 1e-9 {
                assert!(dim.omega.re <= d - 1e-9, "nonreal root at Re = D");
                assert!(
                    dims.iter()
                        .any(|o| (o.omega - dim.omega.conj()).norm() < 1e-8),
                    "conjugate missing"
                );
            }
        }
    }

    #[test]
    fn lattice_system_through_nonlattice_search() {
        let z = ScalingZeta::new(&cantor_ratios()).unwrap();
        let win = Window::new(0.0, 1.0, 12.0).unwrap();
        let lat = z.complex_dimensions(&win).unwrap();
        let newton = z.complex_dimensions_nonlattice(&win, 0.25).unwrap();
        assert_eq!(lat.len(), newton.len());
        for (a, b) in lat.iter().zip(newton.iter()) {
            assert!((a.omega - b.omega).norm() < 1e-8);
        }
    }
}
