use crate::error::{Error, Result};

/// Index codec for the single-excitation site basis tensored with truncated
/// Fock spaces.
///
/// Flat index = `site · bath_dim + Σ_k n_k · stride_k`, with the last mode
/// varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductBasis {
    n_sites: usize,
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    bath_dim: usize,
    total_dim: usize,
}

impl ProductBasis {
    pub fn new(n_sites: usize, cutoffs: Vec<usize>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::invalid("basis.n_sites", "must be positive"));
        }
        if cutoffs.contains(&0) {
            return Err(Error::invalid("basis.cutoffs", "every Fock cutoff must be ≥ 1"));
        }
        let (bath_dim, total_dim) = Self::projected_dims(n_sites, &cutoffs).ok_or_else(|| {
            Error::Resource("product basis dimension overflows the index type".into())
        })?;
        let mut strides = vec![1; cutoffs.len()];
        for k in (0..cutoffs.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (cutoffs[k + 1] + 1);
        }
        Ok(Self {
            n_sites,
            cutoffs,
            strides,
            bath_dim,
            total_dim,
        })
    }

    /// `(Π_k (n_max_k + 1), n_sites · Π_k (n_max_k + 1))`, or `None` on overflow.
    pub fn projected_dims(n_sites: usize, cutoffs: &[usize]) -> Option<(usize, usize)> {
        let bath = cutoffs
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c.checked_add(1)?))?;
        Some((bath, bath.checked_mul(n_sites)?))
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn bath_dim(&self) -> usize {
        self.bath_dim
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    pub fn encode(&self, site: usize, occupations: &[usize]) -> Result<usize> {
        if site >= self.n_sites {
            return Err(Error::invalid("basis.site", format!("site {site} out of range")));
        }
        if occupations.len() != self.cutoffs.len() {
            return Err(Error::invalid(
                "basis.occupations",
                format!(
                    "expected {} occupations, got {}",
                    self.cutoffs.len(),
                    occupations.len()
                ),
            ));
        }
        let mut idx = 0;
        for (k, (&n, &cut)) in occupations.iter().zip(&self.cutoffs).enumerate() {
            if n > cut {
                return Err(Error::invalid(
                    "basis.occupations",
                    format!("mode {k} occupation {n} exceeds cutoff {cut}"),
                ));
            }
            idx += n * self.strides[k];
        }
        Ok(site * self.bath_dim + idx)
    }

    /// Inverse of [`encode`](Self::encode). Panics if `index ≥ total_dim`.
    pub fn decode(&self, index: usize) -> (usize, Vec<usize>) {
        assert!(index < self.total_dim, "basis index out of range");
        let site = index / self.bath_dim;
        let mut rem = index % self.bath_dim;
        let occ = self
            .strides
            .iter()
            .map(|&s| {
                let n = rem / s;
                rem %= s;
                n
            })
            .collect();
        (site, occ)
    }

    /// Occupation of `mode` in the bath part of `index`, without allocating.
    #[inline]
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index % self.bath_dim) / self.strides[mode] % (self.cutoffs[mode] + 1)
    }

    #[inline]
    pub fn site_of(&self, index: usize) -> usize {
        index / self.bath_dim
    }
}
