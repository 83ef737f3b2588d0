//! Bound states of a kink trapped by one or two weak links.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, Tridiagonal};
use crate::lattice::{Boundary, LatticeSpec};
use crate::linalg::{inverse_iteration, kth_eigenvalue, lowest_eigenpairs, MirrorSector, MirrorSplit};

/// Required accuracy of a double-well root, checked by substitution.
pub const ROOT_RESIDUAL: f64 = 1e-12;

/// γ₀ = asinh(w/g).
pub fn inverse_decay_length(w: f64, g: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::param("g", format!("must be positive, got {g}")));
    }
    if !(w >= 0.0) {
        return Err(Error::param("w", format!("must be >= 0, got {w}")));
    }
    Ok((w / g).asinh())
}

/// E₀ = -2√(g² + w²).
pub fn single_well_energy(w: f64, g: f64) -> f64 {
    -2.0 * (g * g + w * w).sqrt()
}

/// Unit-norm `e^{-γ|n - center|}` on `n_links` links.
pub fn single_well_profile(n_links: usize, center: usize, gamma: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n_links).map(|n| (-gamma * (n as f64 - center as f64).abs()).exp()).collect();
    unit(raw)
}

/// Unit-norm `e^{-γ|n-n₀|} + sign·e^{-γ|n-n₀-L|}`.
pub fn double_well_profile(n_links: usize, left: usize, separation: usize, gamma: f64, sign: f64) -> Vec<f64> {
    let right = (left + separation) as f64;
    let raw: Vec<f64> = (0..n_links)
        .map(|n| {
            let x = n as f64;
            (-gamma * (x - left as f64).abs()).exp() + sign * (-gamma * (x - right).abs()).exp()
        })
        .collect();
    unit(raw)
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= nrm;
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleWellState {
    pub link: usize,
    pub gamma: f64,
    pub energy: f64,
    pub vector: Vec<f64>,
}

pub fn single_well_bound_state(spec: &LatticeSpec) -> Result<SingleWellState> {
    let wells: Vec<(usize, f64)> = spec.active_wells().collect();
    if wells.len() != 1 {
        return Err(Error::WellCount { expected: 1, found: wells.len() });
    }
    let (link, w) = wells[0];
    let gamma = inverse_decay_length(w, spec.g())?;
    Ok(SingleWellState {
        link,
        gamma,
        energy: single_well_energy(w, spec.g()),
        vector: single_well_profile(spec.n_links(), link, gamma),
    })
}

/// Half-width (in links) of a lattice on which truncation of a bound state
/// is negligible: `max(40/γ₀, L + 40/γ₀)`.
pub fn validation_half_width(gamma0: f64, separation: usize) -> usize {
    (separation as f64 + 40.0 / gamma0).ceil() as usize
}

/// Hard-wall lattice with one well of strength `w` on its central link.
pub fn single_well_validation_lattice(w: f64, g: f64) -> Result<LatticeSpec> {
    let gamma0 = inverse_decay_length(w, g)?;
    if gamma0 == 0.0 {
        return Err(Error::param("w", "a well of zero strength has no bound state"));
    }
    let half = validation_half_width(gamma0, 0);
    LatticeSpec::with_links(2 * half + 1, g, Boundary::HardWall)?.with_well(half, w)
}

/// Mirror-symmetric hard-wall lattice with wells at `n₀` and `n₀ + L`.
pub fn double_well_validation_lattice(w: f64, g: f64, separation: usize) -> Result<LatticeSpec> {
    let gamma0 = inverse_decay_length(w, g)?;
    if gamma0 == 0.0 {
        return Err(Error::param("w", "a well of zero strength has no bound state"));
    }
    let half = validation_half_width(gamma0, separation);
    let n_links = 2 * half + separation + 1;
    let left = half;
    LatticeSpec::with_links(n_links, g, Boundary::HardWall)?
        .with_well(left, w)?
        .with_well(left + separation, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `1 - (g/w) sinh γ = -e^{-γL}`, the symmetric state.
    Symmetric,
    /// `1 - (g/w) sinh γ = +e^{-γL}`, the antisymmetric state.
    Antisymmetric,
}

/// Residual of the branch equation written as `f(γ)`; the symmetric branch
/// is positive below its root and the antisymmetric branch is positive on
/// `(0, root)`.
pub fn branch_residual(branch: Branch, gamma: f64, w: f64, g: f64, separation: usize) -> f64 {
    let l = separation as f64;
    match branch {
        Branch::Symmetric => 1.0 - (g / w) * gamma.sinh() + (-gamma * l).exp(),
        Branch::Antisymmetric => -(-gamma * l).exp_m1() - (g / w) * gamma.sinh(),
    }
}

fn bisect_branch(branch: Branch, w: f64, g: f64, separation: usize, lo: f64, hi: f64) -> Result<f64> {
    let f = |x: f64| branch_residual(branch, x, w, g, separation);
    if f(hi) >= 0.0 {
        return Err(Error::BracketFailure { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..400 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let root = if f(a).abs() <= f(b).abs() { a } else { b };
    if f(root).abs() > ROOT_RESIDUAL {
        return Err(Error::BracketFailure { lo, hi });
    }
    Ok(root)
}

/// Decay exponents `(γ₊, γ₋)` of the double well. `γ₋` is `None` when the
/// antisymmetric state is not bound.
pub fn double_well_gammas(w: f64, g: f64, separation: usize) -> Result<(f64, Option<f64>)> {
    if !(w > 0.0) {
        return Err(Error::param("w", format!("must be positive, got {w}")));
    }
    if !(g > 0.0) {
        return Err(Error::param("g", format!("must be positive, got {g}")));
    }
    if separation == 0 {
        return Err(Error::param("L", "well separation must be at least 1"));
    }
    let hi = (2.0 * w / g).asinh() + 1.0;
    let plus = bisect_branch(Branch::Symmetric, w, g, separation, 0.0, hi)?;
    // f(γ) for the antisymmetric branch vanishes at 0, is concave, and has
    // slope L - g/w there: a positive root exists iff L w > g.
    let minus = if (separation as f64) * w > g {
        Some(bisect_branch(Branch::Antisymmetric, w, g, separation, 0.0, hi)?)
    } else {
        None
    };
    Ok((plus, minus))
}

/// Tight-binding tunneling gap `2ω = 4w² e^{-γ₀L} / √(g² + w²)`.
pub fn tunneling_gap(w: f64, g: f64, separation: usize) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let gamma0 = (w / g).asinh();
    warn_if_overlapping(gamma0, separation);
    4.0 * w * w * (-gamma0 * separation as f64).exp() / (g * g + w * w).sqrt()
}

/// The same expression with the exponent `-2γ₀L`. It underestimates the
/// splitting by `e^{-γ₀L}`.
pub fn double_exponent_tunneling_gap(w: f64, g: f64, separation: usize) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let gamma0 = (w / g).asinh();
    4.0 * w * w * (-2.0 * gamma0 * separation as f64).exp() / (g * g + w * w).sqrt()
}

fn warn_if_overlapping(gamma0: f64, separation: usize) {
    if (-gamma0 * separation as f64).exp() > 0.1 {
        log::warn!("wells overlap strongly (e^(-γ₀L) = {:.3}); the tight-binding gap is unreliable", (-gamma0 * separation as f64).exp());
    }
}

/// `2g(cosh γ₊ - cosh γ₋)` from the roots, written as a product of sinh
/// terms to avoid cancellation.
pub fn exact_tunneling_gap(w: f64, g: f64, separation: usize) -> Result<Option<f64>> {
    let (gp, gm) = double_well_gammas(w, g, separation)?;
    Ok(gm.map(|gm| 4.0 * g * (0.5 * (gp + gm)).sinh() * (0.5 * (gp - gm)).sinh()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateSolution {
    pub gamma_plus: f64,
    pub gamma_minus: Option<f64>,
    pub energy_plus: f64,
    pub energy_minus: Option<f64>,
    pub gap: Option<f64>,
    pub psi_plus: Vec<f64>,
    pub psi_minus: Option<Vec<f64>>,
    /// Lowest eigenpair of the even sector of the tridiagonal Hamiltonian.
    pub exact_plus: (f64, Vec<f64>),
    /// Lowest odd eigenpair (a continuum state if γ₋ is absent).
    pub exact_minus: (f64, Vec<f64>),
}

/// Two lowest eigenpairs of a double-well Hamiltonian as (symmetric,
/// antisymmetric). Mirror-symmetric lattices are solved sector by sector,
/// which keeps the pair apart even when their splitting is below rounding.
pub fn exact_double_well_pair(h: &Tridiagonal) -> ((f64, Vec<f64>), (f64, Vec<f64>)) {
    if let Some(split) = MirrorSplit::new(h) {
        let solve = |sector| {
            let block = split.block(sector).expect("mirror block");
            let lambda = kth_eigenvalue(block, 0);
            let v = inverse_iteration(block, lambda, &[]);
            (lambda, split.expand(sector, &v))
        };
        let even = solve(MirrorSector::Even);
        let odd = solve(MirrorSector::Odd);
        return (even, odd);
    }
    let mut pairs = lowest_eigenpairs(h, 2);
    let second = pairs.pop().expect("two eigenpairs");
    let first = pairs.pop().expect("two eigenpairs");
    (first, second)
}

fn two_equal_wells(spec: &LatticeSpec) -> Result<(usize, usize, f64)> {
    let wells: Vec<(usize, f64)> = spec.active_wells().collect();
    if wells.len() != 2 {
        return Err(Error::WellCount { expected: 2, found: wells.len() });
    }
    let ((a, wa), (b, wb)) = (wells[0], wells[1]);
    if wa != wb {
        return Err(Error::UnequalWells { left: wa, right: wb });
    }
    Ok((a, b - a, wa))
}

/// Left well, separation and depth of a double-well lattice.
pub fn double_well_geometry(spec: &LatticeSpec) -> Result<(usize, usize, f64)> {
    two_equal_wells(spec)
}

pub fn double_well_bound_states(spec: &LatticeSpec) -> Result<BoundStateSolution> {
    let (left, separation, w) = two_equal_wells(spec)?;
    let g = spec.g();
    let (gp, gm) = double_well_gammas(w, g, separation)?;
    let n = spec.n_links();
    let psi_plus = double_well_profile(n, left, separation, gp, 1.0);
    let psi_minus = gm.map(|gm| double_well_profile(n, left, separation, gm, -1.0));
    let energy_plus = -2.0 * g * gp.cosh();
    let energy_minus = gm.map(|gm| -2.0 * g * gm.cosh());
    let gap = gm.map(|gm| 4.0 * g * (0.5 * (gp + gm)).sinh() * (0.5 * (gp - gm)).sinh());

    let h = build_hamiltonian(spec);
    let (mut exact_plus, mut exact_minus) = exact_double_well_pair(&h);
    align_sign(&mut exact_plus.1, &psi_plus);
    // odd states: positive on the left well
    if exact_minus.1[left] < 0.0 {
        for x in exact_minus.1.iter_mut() {
            *x = -*x;
        }
    }
    Ok(BoundStateSolution {
        gamma_plus: gp,
        gamma_minus: gm,
        energy_plus,
        energy_minus,
        gap,
        psi_plus,
        psi_minus,
        exact_plus,
        exact_minus,
    })
}

fn align_sign(v: &mut [f64], reference: &[f64]) {
    let dot: f64 = v.iter().zip(reference).map(|(a, b)| a * b).sum();
    if dot < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// |⟨a|b⟩| for real vectors.
pub fn overlap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().abs()
}

/// Number of sign changes, ignoring entries below `floor` in magnitude.
pub fn sign_changes(v: &[f64], floor: f64) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &x in v {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = x;
    }
    count
}
