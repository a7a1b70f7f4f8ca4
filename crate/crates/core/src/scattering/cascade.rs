//! Breadth-first moment cascade.
//!
//! Each first-layer scale owns an independent subtree. Within a subtree,
//! layer k holds every propagated signal U[j₁,…,j_k]f as one column of an
//! `n_nodes × paths` matrix, so the next layer is two dense products: the
//! analysis matrix maps all parents to coefficients at once, and the
//! eigenfunction matrix synthesizes every (parent, child) pair at once.
//! Prefixes are computed exactly once.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_moment_exponent, same_spectrum, MomentTable, ScatteringPath};
use crate::error::{Error, Result};
use crate::filters::WaveletBank;
use crate::spectra::Spectrum;
use crate::transform::{weighted_lq, Signal};

pub const DEFAULT_PATH_CAP: usize = 100_000;

/// Projection losses of the cascade.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CascadeDiagnostics {
    /// Per layer k < m: the largest relative energy of U[j₁,…,j_k]f outside
    /// the retained modes, (‖U‖₂² − Σ_n Û(n)²)/‖U‖₂².
    pub discarded_energy: Vec<f64>,
}

impl CascadeDiagnostics {
    pub fn max_discarded_energy(&self) -> f64 {
        self.discarded_energy.iter().cloned().fold(0.0, f64::max)
    }

    fn merge(&mut self, other: &CascadeDiagnostics) {
        if self.discarded_energy.len() < other.discarded_energy.len() {
            self.discarded_energy.resize(other.discarded_energy.len(), 0.0);
        }
        for (a, b) in self.discarded_energy.iter_mut().zip(&other.discarded_energy) {
            *a = a.max(*b);
        }
    }
}

/// Moments of order `m` over the bank's full window.
pub fn moments(f: &Signal, bank: &WaveletBank, m: usize, q: f64) -> Result<MomentTable> {
    moments_with_cap(f, bank, m, q, DEFAULT_PATH_CAP)
}

pub fn moments_with_cap(f: &Signal, bank: &WaveletBank, m: usize, q: f64, cap: usize) -> Result<MomentTable> {
    let mut tables = cascade(f, bank, m, q, cap)?;
    Ok(tables.pop().expect("m ≥ 1 yields at least one table"))
}

/// Tables for every order 1..=m from a single cascade.
pub fn moments_up_to(f: &Signal, bank: &WaveletBank, m: usize, q: f64) -> Result<Vec<MomentTable>> {
    cascade(f, bank, m, q, DEFAULT_PATH_CAP)
}

fn grid_size(n_scales: usize, m: usize) -> Option<usize> {
    let mut total = 1usize;
    for _ in 0..m {
        total = total.checked_mul(n_scales)?;
    }
    Some(total)
}

struct Subtree {
    /// Per order, (path, moment) pairs in lexicographic order.
    layers: Vec<Vec<(ScatteringPath, f64)>>,
    diagnostics: CascadeDiagnostics,
}

fn cascade(f: &Signal, bank: &WaveletBank, m: usize, q: f64, cap: usize) -> Result<Vec<MomentTable>> {
    if m == 0 {
        return Err(Error::InvalidArgument("moment order must be at least 1".into()));
    }
    check_moment_exponent(q)?;
    let spectrum = same_spectrum(f, bank)?;
    let paths = grid_size(bank.n_scales(), m).unwrap_or(usize::MAX);
    if paths > cap {
        return Err(Error::GridCap { paths, cap });
    }
    let psi: Vec<&[f64]> = bank.scales().map(|j| bank.coefficients(j)).collect::<Result<_>>()?;
    let scales: Vec<i32> = bank.scales().collect();
    let coefficients = f.coefficients();

    let subtrees: Vec<Subtree> = scales
        .par_iter()
        .enumerate()
        .map(|(k, &j1)| subtree(&spectrum, coefficients, &psi, &scales, k, j1, m, q))
        .collect();

    let mut layers: Vec<BTreeMap<ScatteringPath, f64>> = vec![BTreeMap::new(); m];
    let mut diagnostics = CascadeDiagnostics::default();
    for tree in subtrees {
        for (order, entries) in tree.layers.into_iter().enumerate() {
            layers[order].extend(entries);
        }
        diagnostics.merge(&tree.diagnostics);
    }

    Ok(layers
        .into_iter()
        .enumerate()
        .map(|(index, entries)| MomentTable {
            q,
            order: index + 1,
            j_min: bank.j_min(),
            j_max: bank.j_max(),
            profile: bank.profile().kind(),
            zero_value: bank.profile().zero_value(),
            n_modes: spectrum.n_modes(),
            seed: None,
            sparsity: None,
            metadata: Vec::new(),
            entries,
            diagnostics: CascadeDiagnostics {
                discarded_energy: diagnostics.discarded_energy.iter().take(index).cloned().collect(),
            },
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn subtree(
    spectrum: &Spectrum,
    coefficients: &[f64],
    psi: &[&[f64]],
    scales: &[i32],
    first: usize,
    j1: i32,
    m: usize,
    q: f64,
) -> Subtree {
    let modes = spectrum.n_modes();
    let weights = spectrum.weights();
    let e = spectrum.eigenfunctions();

    let seed = DMatrix::from_fn(modes, 1, |n, _| coefficients[n] * psi[first][n]);
    let mut current = (e * seed).map(f64::abs);
    let mut paths = vec![ScatteringPath::new(vec![j1])];
    let mut layers = Vec::with_capacity(m);
    let mut diagnostics = CascadeDiagnostics::default();

    for order in 1..=m {
        let mut entries = Vec::with_capacity(paths.len());
        for (column, path) in current.column_iter().zip(&paths) {
            entries.push((path.clone(), weighted_lq(column.as_slice(), weights, q)));
        }
        layers.push(entries);
        if order == m {
            break;
        }

        // Project every parent onto the retained modes in one product.
        let parents = spectrum.analysis_matrix() * &current;
        let mut worst = 0.0f64;
        for (values, coeffs) in current.column_iter().zip(parents.column_iter()) {
            let total = weighted_lq(values.as_slice(), weights, 2.0).powi(2);
            if total > 0.0 {
                let kept: f64 = coeffs.iter().map(|c| c * c).sum();
                worst = worst.max(((total - kept) / total).max(0.0));
            }
        }
        diagnostics.discarded_energy.push(worst);

        let n_parents = paths.len();
        let n_children = scales.len();
        let products = DMatrix::from_fn(modes, n_parents * n_children, |n, col| {
            let (parent, child) = (col / n_children, col % n_children);
            parents[(n, parent)] * psi[child][n]
        });
        current = (e * products).map(f64::abs);
        paths = paths
            .iter()
            .flat_map(|p| scales.iter().map(move |&j| p.extend(j)))
            .collect();
    }
    Subtree { layers, diagnostics }
}
