//! Lattice geometry of the one-kink sector.
//!
//! A chain of `n_sites` spins hosts `n_sites - 1` kink positions. Link `n`
//! sits between spins `n` and `n + 1` (0-based). An Ising bond with coupling
//! `1 - w` acts as a trap of depth `2w` for the kink sitting on that link.

use alloc::collections::BTreeMap;
use alloc::format;

use crate::error::{Error, Result};

/// Default guard band (in links) that must stay empty on an
/// effectively-infinite lattice.
pub const DEFAULT_GUARD_LINKS: usize = 10;

/// Weight allowed inside the guard band before the run is rejected.
pub const GUARD_WEIGHT_LIMIT: f64 = 1e-10;

/// Default tight-binding validity margin: `g² < 0.1 (1 - max w)`.
pub const DEFAULT_TIGHT_BINDING_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// The tridiagonal Hamiltonian is truncated at the first and last link.
    HardWall,
    /// The lattice is large enough that nothing reaches the edge; engines
    /// check the guard band at every output time.
    EffectivelyInfinite,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::HardWall => "hard-wall",
            Boundary::EffectivelyInfinite => "effectively-infinite",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hard-wall" => Some(Boundary::HardWall),
            "effectively-infinite" => Some(Boundary::EffectivelyInfinite),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    n_sites: usize,
    g: f64,
    wells: BTreeMap<usize, f64>,
    boundary: Boundary,
    guard_links: usize,
    tight_binding_margin: f64,
}

impl LatticeSpec {
    pub fn new(n_sites: usize, g: f64, boundary: Boundary) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::param("n_sites", format!("need at least 2 spins, got {n_sites}")));
        }
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::param("g", format!("must be positive and finite, got {g}")));
        }
        Ok(Self {
            n_sites,
            g,
            wells: BTreeMap::new(),
            boundary,
            guard_links: DEFAULT_GUARD_LINKS,
            tight_binding_margin: DEFAULT_TIGHT_BINDING_MARGIN,
        })
    }

    /// Lattice with `n_links` kink positions (i.e. `n_links + 1` spins).
    pub fn with_links(n_links: usize, g: f64, boundary: Boundary) -> Result<Self> {
        Self::new(n_links + 1, g, boundary)
    }

    /// Adds (or replaces) a weak link of strength `w`.
    pub fn with_well(mut self, link: usize, w: f64) -> Result<Self> {
        self.set_well(link, w)?;
        Ok(self)
    }

    pub fn set_well(&mut self, link: usize, w: f64) -> Result<()> {
        if link >= self.n_links() {
            return Err(Error::LinkOutOfRange { link, n_links: self.n_links() });
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::param("w", format!("well strength must be >= 0, got {w}")));
        }
        self.wells.insert(link, w);
        Ok(())
    }

    pub fn with_guard_links(mut self, guard: usize) -> Self {
        self.guard_links = guard;
        self
    }

    pub fn with_tight_binding_margin(mut self, margin: f64) -> Self {
        self.tight_binding_margin = margin;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Dimension of the one-kink basis.
    pub fn n_links(&self) -> usize {
        self.n_sites - 1
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn guard_links(&self) -> usize {
        self.guard_links
    }

    pub fn tight_binding_margin(&self) -> f64 {
        self.tight_binding_margin
    }

    pub fn wells(&self) -> &BTreeMap<usize, f64> {
        &self.wells
    }

    /// Wells with nonzero strength, in link order.
    pub fn active_wells(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.wells.iter().filter(|(_, &w)| w > 0.0).map(|(&n, &w)| (n, w))
    }

    pub fn well_strength(&self, link: usize) -> f64 {
        self.wells.get(&link).copied().unwrap_or(0.0)
    }

    pub fn max_well(&self) -> f64 {
        self.wells.values().copied().fold(0.0, f64::max)
    }

    /// Whether the transverse field is too weak to mix in the 3-, 5-, ...
    /// kink sectors: `g² < margin · (1 - max w)`.
    pub fn is_tight_binding(&self) -> bool {
        self.g * self.g < self.tight_binding_margin * (1.0 - self.max_well())
    }

    /// Same geometry with every well switched off.
    pub fn without_wells(&self) -> Self {
        let mut out = self.clone();
        out.wells.clear();
        out
    }

    /// Same geometry with every well depth multiplied by `s`.
    pub fn scaled_wells(&self, s: f64) -> Self {
        let mut out = self.clone();
        for w in out.wells.values_mut() {
            *w *= s;
        }
        out
    }

    /// Link with the largest index distance from both edges, i.e. the
    /// mirror axis of the lattice (lower one for an even number of links).
    pub fn center_link(&self) -> usize {
        (self.n_links() - 1) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_dimension_is_links() {
        let spec = LatticeSpec::new(4, 1.0, Boundary::HardWall).unwrap();
        assert_eq!(spec.n_links(), 3);
        assert_eq!(spec.center_link(), 1);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LatticeSpec::new(1, 1.0, Boundary::HardWall).is_err());
        assert!(LatticeSpec::new(5, 0.0, Boundary::HardWall).is_err());
        assert!(LatticeSpec::new(5, -1.0, Boundary::HardWall).is_err());
        let spec = LatticeSpec::new(5, 1.0, Boundary::HardWall).unwrap();
        assert_eq!(
            spec.clone().with_well(4, 0.1).unwrap_err(),
            Error::LinkOutOfRange { link: 4, n_links: 4 }
        );
        assert!(spec.with_well(1, -0.1).is_err());
    }

    #[test]
    fn tight_binding_flag() {
        let weak = LatticeSpec::new(10, 0.1, Boundary::HardWall).unwrap();
        assert!(weak.is_tight_binding());
        let weak = weak.with_well(3, 0.5).unwrap();
        // 0.01 < 0.1 * 0.5
        assert!(weak.is_tight_binding());
        let strong = LatticeSpec::new(10, 1.0, Boundary::HardWall).unwrap();
        assert!(!strong.is_tight_binding());
    }

    #[test]
    fn boundary_names_round_trip() {
        for b in [Boundary::HardWall, Boundary::EffectivelyInfinite] {
            assert_eq!(Boundary::parse(b.as_str()), Some(b));
        }
        assert_eq!(Boundary::parse("periodic"), None);
    }
}
