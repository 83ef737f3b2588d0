//! Pure and mixed kink states and recorded probability traces.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::distribution::{norm_sqr, normalize, probabilities};
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// Tolerance on the norm of a pure state after propagation.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Pure state `Σₙ ψₙ |n⟩` over kink links.
#[derive(Debug, Clone, PartialEq)]
pub struct KinkState {
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl KinkState {
    /// Normalizes `amplitudes` and stamps time 0.
    pub fn new(amplitudes: &[Complex64]) -> Result<Self> {
        Ok(Self { amplitudes: normalize(amplitudes)?, time: 0.0 })
    }

    pub fn from_real(profile: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = profile.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(&v)
    }

    /// Kink sitting on a single link.
    pub fn localized(n_links: usize, link: usize) -> Result<Self> {
        if link >= n_links {
            return Err(Error::LinkOutOfRange { link, n_links });
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n_links];
        v[link] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: v, time: 0.0 })
    }

    /// Wraps already-normalized amplitudes (used by the propagators, which
    /// preserve the norm).
    pub(crate) fn from_parts(amplitudes: Vec<Complex64>, time: f64) -> Self {
        Self { amplitudes, time }
    }

    pub fn at_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        probabilities(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &KinkState) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Copies the state into a zero-padded lattice of `n_links` links,
    /// shifting link `n` to `n + offset`.
    pub fn embedded(&self, n_links: usize, offset: usize) -> Result<Self> {
        if offset + self.len() > n_links {
            return Err(Error::LengthMismatch { left: offset + self.len(), right: n_links });
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n_links];
        v[offset..offset + self.len()].copy_from_slice(&self.amplitudes);
        Ok(Self { amplitudes: v, time: self.time })
    }
}

/// Mixed state `ρ = Σ_{m,n} ρ_{m,n} |m⟩⟨n|`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KinkDensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    time: f64,
}

pub const DENSITY_TOLERANCE: f64 = 1e-10;

impl KinkDensityMatrix {
    pub fn pure(state: &KinkState) -> Self {
        let a = state.amplitudes();
        let dim = a.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for m in 0..dim {
            for n in 0..dim {
                entries[m * dim + n] = a[m] * a[n].conj();
            }
        }
        Self { dim, entries, time: state.time() }
    }

    /// Validates Hermiticity, unit trace and a non-negative diagonal.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>, time: f64) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch { left: entries.len(), right: dim * dim });
        }
        let rho = Self { dim, entries, time };
        rho.check(DENSITY_TOLERANCE)?;
        Ok(rho)
    }

    pub(crate) fn from_raw(dim: usize, entries: Vec<Complex64>, time: f64) -> Self {
        Self { dim, entries, time }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[m * self.dim + n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in 0..self.dim {
            for n in m..self.dim {
                worst = worst.max((self.get(m, n) - self.get(n, m).conj()).norm());
            }
        }
        worst
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).fold(f64::INFINITY, f64::min)
    }

    /// Largest imaginary part on the diagonal.
    pub fn diagonal_imaginary(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).im.abs()).fold(0.0, f64::max)
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let t = self.time;
        let h = self.hermiticity_defect();
        if h > tol {
            return Err(Error::InvariantViolation { what: "hermiticity", time: t, value: h });
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvariantViolation { what: "trace", time: t, value: tr - 1.0 });
        }
        let d = self.min_diagonal();
        if d < -tol {
            return Err(Error::InvariantViolation { what: "diagonal positivity", time: t, value: d });
        }
        Ok(())
    }
}

/// Run metadata carried alongside a trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceMetadata {
    pub lattice: Option<LatticeSpec>,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
}

impl TraceMetadata {
    pub fn for_lattice(lattice: &LatticeSpec) -> Self {
        Self { lattice: Some(lattice.clone()), ..Self::default() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }
}

pub const TRACE_SUM_TOLERANCE: f64 = 1e-8;

/// Time series of link-resolved kink probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTrace {
    times: Vec<f64>,
    distributions: Vec<Vec<f64>>,
    metadata: TraceMetadata,
}

impl ProbabilityTrace {
    pub fn new(metadata: TraceMetadata) -> Self {
        Self { times: Vec::new(), distributions: Vec::new(), metadata }
    }

    /// Appends one time slice. Times must increase strictly, every slice
    /// must have the same length and sum to one.
    pub fn push(&mut self, time: f64, distribution: Vec<f64>) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(time > last) {
                return Err(Error::param("time", alloc::format!("{time} does not follow {last}")));
            }
        }
        if let Some(first) = self.distributions.first() {
            if first.len() != distribution.len() {
                return Err(Error::LengthMismatch { left: first.len(), right: distribution.len() });
            }
        }
        let total: f64 = distribution.iter().sum();
        if !((total - 1.0).abs() <= TRACE_SUM_TOLERANCE) {
            return Err(Error::InvariantViolation { what: "distribution sum", time, value: total - 1.0 });
        }
        self.times.push(time);
        self.distributions.push(distribution);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn distributions(&self) -> &[Vec<f64>] {
        &self.distributions
    }

    pub fn distribution(&self, index: usize) -> &[f64] {
        &self.distributions[index]
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.times.last().map(|&t| (t, self.distributions.last().unwrap().as_slice()))
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_links(&self) -> usize {
        self.distributions.first().map_or(0, Vec::len)
    }

    pub fn metadata(&self) -> &TraceMetadata {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut TraceMetadata {
        &mut self.metadata
    }

    /// Same samples, different metadata; used when comparing a re-parsed
    /// trace against the original.
    /// Same output times and lattice size.
    pub fn same_grid(&self, other: &ProbabilityTrace) -> bool {
        self.times == other.times && self.n_links() == other.n_links()
    }

    pub fn same_samples(&self, other: &ProbabilityTrace) -> bool {
        self.times == other.times && self.distributions == other.distributions
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_density_matrix_is_valid() {
        let s = KinkState::new(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.5, 0.5)])
            .unwrap();
        let rho = KinkDensityMatrix::pure(&s);
        rho.check(1e-14).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let bad_trace = KinkDensityMatrix::from_entries(2, vec![one, zero, zero, one], 0.0);
        assert!(matches!(bad_trace, Err(Error::InvariantViolation { what: "trace", .. })));
        let non_herm = KinkDensityMatrix::from_entries(
            2,
            vec![Complex64::new(0.5, 0.0), Complex64::new(0.1, 0.1), Complex64::new(0.1, 0.1), Complex64::new(0.5, 0.0)],
            0.0,
        );
        assert!(matches!(non_herm, Err(Error::InvariantViolation { what: "hermiticity", .. })));
    }

    #[test]
    fn trace_push_rules() {
        let mut tr = ProbabilityTrace::new(TraceMetadata::default());
        tr.push(0.0, vec![0.5, 0.5]).unwrap();
        assert!(tr.push(0.0, vec![0.5, 0.5]).is_err());
        assert!(tr.push(1.0, vec![1.0]).is_err());
        assert!(tr.push(1.0, vec![0.5, 0.6]).is_err());
        tr.push(1.0, vec![0.25, 0.75]).unwrap();
        assert_eq!(tr.len(), 2);
    }

    #[test]
    fn embedding_shifts_links() {
        let s = KinkState::localized(3, 1).unwrap();
        let e = s.embedded(7, 2).unwrap();
        assert_eq!(e.probabilities(), vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(s.embedded(3, 1).is_err());
    }
}
