use nalgebra::DMatrix;

use super::{Basis, QuadratureNodes, Spectrum, Trig};
use crate::error::{Error, Result};

/// Nodes per unit of the highest retained frequency. Products created by the
/// modulus nonlinearity need headroom above the Nyquist rate.
const OVERSAMPLING: usize = 4;

fn check_sampling(n_modes: usize, n_nodes: usize, max_frequency: usize) -> Result<()> {
    if n_modes == 0 {
        return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
    }
    if n_nodes == 0 {
        return Err(Error::InvalidArgument("n_nodes must be at least 1".into()));
    }
    let required = (OVERSAMPLING * max_frequency).max(1);
    if n_nodes < required {
        return Err(Error::Aliasing {
            n_nodes,
            max_frequency,
            required,
        });
    }
    Ok(())
}

/// Circle modes in order: constant, then cos kθ before sin kθ for k = 1, 2, …
fn circle_modes(n_modes: usize) -> Vec<Trig> {
    let mut modes = Vec::with_capacity(n_modes);
    modes.push(Trig::Constant);
    let mut k = 1;
    while modes.len() < n_modes {
        modes.push(Trig::Cos(k));
        if modes.len() < n_modes {
            modes.push(Trig::Sin(k));
        }
        k += 1;
    }
    modes
}

/// Spectrum of the unit circle: λ = k², eigenfunctions 1/√(2π), cos kθ/√π,
/// sin kθ/√π on the uniform trapezoid grid.
pub fn build_circle_spectrum(n_modes: usize, n_nodes: usize) -> Result<Spectrum> {
    let modes = if n_modes == 0 {
        Vec::new()
    } else {
        circle_modes(n_modes)
    };
    let max_frequency = modes.iter().map(|t| t.frequency()).max().unwrap_or(0) as usize;
    check_sampling(n_modes, n_nodes, max_frequency)?;

    let nodes = QuadratureNodes::circle_grid(n_nodes);
    let eigenvalues = modes
        .iter()
        .map(|t| {
            let k = t.frequency() as f64;
            k * k
        })
        .collect();
    let eigenfunctions = DMatrix::from_fn(n_nodes, n_modes, |i, n| modes[n].eval(nodes.coord(i)[0]));
    Spectrum::new(eigenvalues, eigenfunctions, nodes, 1, Basis::Circle(modes))
}

fn axis_factors(k: u32) -> Vec<Trig> {
    if k == 0 {
        vec![Trig::Constant]
    } else {
        vec![Trig::Cos(k), Trig::Sin(k)]
    }
}

/// Torus modes sorted by eigenvalue k₁² + k₂², then by frequency pair, then
/// by phase (cos before sin, first axis major).
fn torus_modes(n_modes: usize) -> Vec<(Trig, Trig)> {
    let bound = (n_modes as f64).sqrt().ceil() as u32 + 1;
    let mut modes = Vec::new();
    for k1 in 0..=bound {
        for k2 in 0..=bound {
            for f1 in axis_factors(k1) {
                for &f2 in &axis_factors(k2) {
                    modes.push((f1, f2));
                }
            }
        }
    }
    let eigenvalue = |(a, b): &(Trig, Trig)| a.frequency().pow(2) + b.frequency().pow(2);
    modes.sort_by_key(|m| (eigenvalue(m), m.0.frequency(), m.1.frequency(), m.0, m.1));
    modes.truncate(n_modes);
    modes
}

/// Spectrum of the flat torus S¹×S¹: λ = k₁² + k₂² with product
/// eigenfunctions on the tensor trapezoid grid.
pub fn build_torus_spectrum(n_modes: usize, n_nodes_per_axis: usize) -> Result<Spectrum> {
    let modes = if n_modes == 0 { Vec::new() } else { torus_modes(n_modes) };
    let max_frequency = modes
        .iter()
        .map(|(a, b)| a.frequency().max(b.frequency()))
        .max()
        .unwrap_or(0) as usize;
    check_sampling(n_modes, n_nodes_per_axis, max_frequency)?;

    let nodes = QuadratureNodes::torus_grid(n_nodes_per_axis);
    let eigenvalues = modes
        .iter()
        .map(|(a, b)| (a.frequency().pow(2) + b.frequency().pow(2)) as f64)
        .collect();
    let eigenfunctions = DMatrix::from_fn(nodes.len(), n_modes, |i, n| {
        let p = nodes.coord(i);
        modes[n].0.eval(p[0]) * modes[n].1.eval(p[1])
    });
    Spectrum::new(eigenvalues, eigenfunctions, nodes, 2, Basis::Torus(modes))
}

/// Node grid and closed-form basis of [`build_circle_spectrum`], for
/// re-attaching geometry to a cached circle spectrum.
pub fn circle_geometry(n_modes: usize, n_nodes: usize) -> (QuadratureNodes, Basis) {
    (
        QuadratureNodes::circle_grid(n_nodes),
        Basis::Circle(circle_modes(n_modes)),
    )
}

/// Node grid and closed-form basis of [`build_torus_spectrum`].
pub fn torus_geometry(n_modes: usize, n_nodes_per_axis: usize) -> (QuadratureNodes, Basis) {
    (
        QuadratureNodes::torus_grid(n_nodes_per_axis),
        Basis::Torus(torus_modes(n_modes)),
    )
}
