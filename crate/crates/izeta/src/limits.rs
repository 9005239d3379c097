//! Infinite-volume limit laws for the rescaled edge-plus-adjacency ensemble.
//!
//! Everything here is closed-form: Catalan-weighted moment formulas and their
//! recurrence, the shifted semicircle law with density, distribution function
//! and moments, the two Stieltjes transforms solving quadratic fixed-point
//! equations, the first-order finite-density moment correction, two exact
//! combinatorial identities used as cross-checks, and the log-determinant
//! integral evaluated by Gauss-Chebyshev quadrature.

use crate::linalg::gauss_chebyshev2_nodes;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, PI};

/// Largest index for which the Catalan number is guaranteed to fit the u64
/// intermediate products used by the recurrence.
pub const CATALAN_MAX_INDEX: u32 = 30;

/// Largest moment order accepted by the closed form and the recurrence.
pub const MOMENT_MAX_ORDER: u32 = 40;

/// Catalan number t_p = (2p)!/(p!(p+1)!), exact.
///
/// Computed by t_{p+1} = t_p * 2(2p+1)/(p+2); the product divides exactly at
/// every step.
pub fn catalan(p: u32) -> Result<u64> {
    if p > CATALAN_MAX_INDEX {
        return Err(Error::InvalidParam(format!(
            "catalan index {p} exceeds {CATALAN_MAX_INDEX}"
        )));
    }
    let mut t: u64 = 1;
    for i in 0..p as u64 {
        t = t * (4 * i + 2) / (i + 2);
    }
    Ok(t)
}

/// Binomial coefficient, exact in u128. Stepwise products divide exactly.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// k-th moment of the limiting spectral law, closed form:
/// sum over p of v^(2k-2p) * C(k,2p) * t_p.
pub fn limit_moment_closed(k: u32, v: f64) -> Result<f64> {
    if k > MOMENT_MAX_ORDER {
        return Err(Error::InvalidParam(format!(
            "moment order {k} exceeds {MOMENT_MAX_ORDER}"
        )));
    }
    let mut acc = 0.0;
    for p in 0..=k / 2 {
        let coef = binomial(k, 2 * p) as f64 * catalan(p)? as f64;
        acc += coef * v.powi((2 * k - 2 * p) as i32);
    }
    Ok(acc)
}

/// Moments 0..=k_max of the limiting law via the quadratic recurrence
/// m_{k+1} = v^2 m_k + v^2 sum_{j} m_{k-1-j} m_j, started from m_0 = 1,
/// m_1 = v^2. Agrees with [`limit_moment_closed`]; at v = 1 it generates the
/// Motzkin numbers.
pub fn limit_moment_recurrence(k_max: u32, v: f64) -> Result<Vec<f64>> {
    if k_max > MOMENT_MAX_ORDER {
        return Err(Error::InvalidParam(format!(
            "moment order {k_max} exceeds {MOMENT_MAX_ORDER}"
        )));
    }
    let v2 = v * v;
    let len = k_max as usize + 1;
    let mut m = vec![0.0; len];
    m[0] = 1.0;
    if len > 1 {
        m[1] = v2;
    }
    for k in 1..len - 1 {
        let conv: f64 = (0..k).map(|j| m[k - 1 - j] * m[j]).sum();
        m[k + 1] = v2 * (m[k] + conv);
    }
    Ok(m)
}

/// Support interval [v^2 - 2|v|, v^2 + 2|v|] of the limiting law.
pub fn semicircle_support(v: f64) -> (f64, f64) {
    let r = 2.0 * v.abs();
    (v * v - r, v * v + r)
}

/// Density of the semicircle law of radius 2|v| centered at v^2. For v = 0 the
/// law degenerates to a point mass at 0 and the density is reported as 0 away
/// from the atom.
pub fn semicircle_pdf(v: f64, lambda: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let r = 2.0 * v.abs();
    let x = lambda - v * v;
    let disc = r * r - x * x;
    if disc <= 0.0 {
        0.0
    } else {
        disc.sqrt() / (2.0 * PI * v * v)
    }
}

/// Distribution function of the same law, closed form via arcsine. Clamps the
/// argument to the support, so it is exact 0/1 outside. At v = 0 it is the
/// unit step at 0.
pub fn semicircle_cdf(v: f64, lambda: f64) -> f64 {
    if v == 0.0 {
        return if lambda >= 0.0 { 1.0 } else { 0.0 };
    }
    let r = 2.0 * v.abs();
    let x = (lambda - v * v).clamp(-r, r);
    0.5 + x * (r * r - x * x).sqrt() / (PI * r * r) + (x / r).asin() / PI
}

/// k-th moment of the limiting law by quadrature of (v^2 + 2v nu)^k against
/// the Chebyshev weight. The node count makes the rule exact for the
/// polynomial integrand.
pub fn semicircle_moment(v: f64, k: u32) -> Result<f64> {
    let count = k as usize / 2 + 1;
    let nodes = gauss_chebyshev2_nodes(count)?;
    let mut s = 0.0;
    for &(nu, w) in &nodes {
        s += w * (v * v + 2.0 * v * nu).powi(k as i32);
    }
    Ok(s * FRAC_2_PI)
}

/// Stieltjes transform of the centered semicircle law of radius 2|v|: the
/// root of v^2 f^2 + xi f + 1 = 0 decaying like -1/xi at infinity.
///
/// The branch is selected without cancellation by aligning the square root
/// with xi. Real xi inside the closed support is rejected.
pub fn stieltjes_f(v: f64, xi: Complex64) -> Result<Complex64> {
    if xi.im == 0.0 && xi.re.abs() <= 2.0 * v.abs() {
        return Err(Error::Domain(format!(
            "stieltjes transform evaluated on the support at xi = {}",
            xi.re
        )));
    }
    if v == 0.0 {
        return Ok(-1.0 / xi);
    }
    let disc = xi * xi - 4.0 * v * v;
    let mut w = disc.sqrt();
    if (xi.conj() * w).re < 0.0 {
        w = -w;
    }
    Ok(-2.0 / (xi + w))
}

/// Stieltjes transform of the shifted law: g(xi) = f(xi - v^2), the root of
/// the fixed-point equation g = 1/(v^2 - xi - v^2 g) on the decaying branch.
pub fn stieltjes_g(v: f64, xi: Complex64) -> Result<Complex64> {
    stieltjes_f(v, xi - v * v)
}

/// Defect of the quadratic equation for f; used by tests and verification.
pub fn stieltjes_f_residual(v: f64, xi: Complex64, f: Complex64) -> f64 {
    (v * v * f * f + xi * f + 1.0).norm()
}

/// Weighting convention for [`correction_r1`]: the combinatorial prefactor
/// v^(2k-2p) t_p multiplies every term of each partial sum at that term's own
/// power p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionWeighting {
    PerTermPower,
}

/// First-order finite-density correction R_k to the k-th limit moment, as a
/// three-part sum over split points with Catalan weights.
///
/// The three coefficient families are exact integers: C(2p, p-2) counts the
/// excess-crossing walks, t_p * p the edge-marked walks, and t_{p+1} the
/// vertex-marked trees. For k = 3 this evaluates to 3v^6 + 4v^4, which
/// disagrees with the exact expansion of the third moment expectation
/// (3v^6 + 3v^4); the test suite records that comparison rather than patching
/// either side.
pub fn correction_r1(k: u32, v: f64, _weighting: CorrectionWeighting) -> Result<f64> {
    if k == 0 || k > MOMENT_MAX_ORDER {
        return Err(Error::InvalidParam(format!(
            "correction order {k} outside 1..={MOMENT_MAX_ORDER}"
        )));
    }
    let pw = |p: u32| v.powi((2 * k - 2 * p) as i32);
    let mut acc = 0.0;
    for p in 2..=k / 2 {
        acc += binomial(k, 2 * p) as f64 * binomial(2 * p, p - 2) as f64 * pw(p);
    }
    if k >= 1 {
        for p in 1..=(k - 1) / 2 {
            acc += 4.0 * binomial(k, 2 * p + 1) as f64 * (catalan(p)? * p as u64) as f64 * pw(p);
        }
    }
    if k >= 2 {
        for p in 0..=(k - 2) / 2 {
            acc += binomial(k, 2 * p + 2) as f64 * catalan(p + 1)? as f64 * pw(p);
        }
    }
    Ok(acc)
}

/// Exact identity between the direct factorial count of excess-crossing walks
/// and its Catalan form: (2p)!/((p-2)!(p+2)!) = t_p p(p-1)/(p+2). Returns the
/// two sides as exact integers.
pub fn walk_count_identity(p: u32) -> Result<(u128, u128)> {
    if !(2..=CATALAN_MAX_INDEX).contains(&p) {
        return Err(Error::InvalidParam(format!(
            "walk-count identity index {p} outside 2..={CATALAN_MAX_INDEX}"
        )));
    }
    let lhs = binomial(2 * p, p - 2);
    let t = catalan(p)? as u128;
    let num = t * p as u128 * (p - 1) as u128;
    debug_assert_eq!(num % (p + 2) as u128, 0);
    Ok((lhs, num / (p + 2) as u128))
}

/// Exact identity for marked tree counts:
/// sum_{a+b=p} (2a+1) t_a t_b = (p+1) t_{p+1}. Returns both sides.
pub fn marked_tree_identity(p: u32) -> Result<(u128, u128)> {
    if p + 1 > CATALAN_MAX_INDEX {
        return Err(Error::InvalidParam(format!(
            "marked-tree identity index {p} exceeds {}",
            CATALAN_MAX_INDEX - 1
        )));
    }
    let mut lhs: u128 = 0;
    for a in 0..=p {
        lhs += (2 * a + 1) as u128 * catalan(a)? as u128 * catalan(p - a)? as u128;
    }
    let rhs = (p + 1) as u128 * catalan(p + 1)? as u128;
    Ok((lhs, rhs))
}

const XI_RADIUS_LIMIT: f64 = 1.0 - 1e-6;

/// Log-determinant integral of the limiting law:
/// (2/pi) * integral of log(1 + v^2 + 2 v nu) sqrt(1 - nu^2) d nu,
/// evaluated by Gauss-Chebyshev quadrature at a fixed node count.
/// For real |v| <= 1 this equals v^2/2 exactly.
pub fn xi_limit(v: f64, node_count: usize) -> Result<f64> {
    xi_limit_complex(Complex64::new(v, 0.0), node_count).map(|z| z.re)
}

/// Complex-argument version of [`xi_limit`] using the principal logarithm.
/// The integrand never touches the branch cut for |v| < 1.
pub fn xi_limit_complex(v: Complex64, node_count: usize) -> Result<Complex64> {
    if v.norm() > XI_RADIUS_LIMIT {
        return Err(Error::Domain(format!(
            "xi integral requires |v| <= {XI_RADIUS_LIMIT}, got {}",
            v.norm()
        )));
    }
    let nodes = gauss_chebyshev2_nodes(node_count)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(nu, w) in &nodes {
        let arg = 1.0 + v * v + 2.0 * nu * v;
        if arg.im == 0.0 && arg.re <= 0.0 {
            return Err(Error::Domain(format!(
                "log integrand on the branch cut at node {nu}"
            )));
        }
        acc += w * arg.ln();
    }
    Ok(acc * FRAC_2_PI)
}

/// Result of the self-refining quadrature: the value, the node count actually
/// used, and the last successive difference observed.
#[derive(Debug, Clone, Copy)]
pub struct XiQuadrature {
    pub value: f64,
    pub node_count: usize,
    pub last_delta: f64,
}

const XI_NODES_DEFAULT: usize = 64;
const XI_NODES_CAP: usize = 1024;
const XI_REFINE_TOL: f64 = 1e-12;

/// [`xi_limit`] with automatic refinement: starts at 64 nodes and doubles
/// until successive values differ by less than 1e-12, capped at 1024 nodes.
/// The cap is not an error; the caller sees the residual in `last_delta`.
pub fn xi_limit_auto(v: f64) -> Result<XiQuadrature> {
    let mut nodes = XI_NODES_DEFAULT;
    let mut prev = xi_limit(v, nodes)?;
    loop {
        nodes *= 2;
        let cur = xi_limit(v, nodes)?;
        let delta = (cur - prev).abs();
        if delta < XI_REFINE_TOL || nodes >= XI_NODES_CAP {
            return Ok(XiQuadrature {
                value: cur,
                node_count: nodes,
                last_delta: delta,
            });
        }
        prev = cur;
    }
}

/// Gap |v^2/2 - xi(v)| for each grid point, all at the same node count. Zero
/// up to quadrature error for real |v| < 1.
pub fn rh_defect(v_grid: &[f64], node_count: usize) -> Result<Vec<f64>> {
    v_grid
        .iter()
        .map(|&v| xi_limit(v, node_count).map(|x| (v * v / 2.0 - x).abs()))
        .collect()
}

/// The limiting spectral law as a value: a semicircle of radius 2|v| centered
/// at v^2.
#[derive(Debug, Clone, Copy)]
pub struct LimitLaw {
    v: f64,
}

impl LimitLaw {
    pub fn new(v: f64) -> Result<Self> {
        if v == 0.0 {
            return Err(Error::InvalidParam(
                "limit law degenerates at v = 0".into(),
            ));
        }
        if !v.is_finite() {
            return Err(Error::InvalidParam("limit law requires finite v".into()));
        }
        Ok(LimitLaw { v })
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn support(&self) -> (f64, f64) {
        semicircle_support(self.v)
    }

    pub fn pdf(&self, lambda: f64) -> f64 {
        semicircle_pdf(self.v, lambda)
    }

    pub fn cdf(&self, lambda: f64) -> f64 {
        semicircle_cdf(self.v, lambda)
    }

    pub fn moment(&self, k: u32) -> Result<f64> {
        semicircle_moment(self.v, k)
    }
}
