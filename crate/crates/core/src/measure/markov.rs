//! Exact invariant densities of piecewise-affine Markov maps.

use crate::error::{Error, Result};
use crate::linalg::nullspace;
use crate::map::PiecewiseMap;
use crate::scalar::Scalar;

use super::PiecewiseMeasure;

/// Transition structure `A_j ⊆ f(A_i)` of a Markov map, with `|slope_i|`.
fn markov_graph<S: Scalar>(map: &PiecewiseMap<S>) -> Result<(Vec<Vec<bool>>, Vec<S>)> {
    if !map.is_affine() {
        return Err(Error::NonAffine);
    }
    let n = map.branch_count();
    let mut adj = vec![vec![false; n]; n];
    let mut slopes = Vec::with_capacity(n);
    for (i, b) in map.branches().iter().enumerate() {
        let image = b.image();
        for e in [image.lo(), image.hi()] {
            if !map.is_boundary(e) {
                return Err(Error::NotMarkov(format!(
                    "image {} of branch {i} has endpoint {} inside a branch domain",
                    image,
                    e.render()
                )));
            }
        }
        for (j, a) in map.branches().iter().enumerate() {
            adj[i][j] = a.domain().within(&image);
        }
        slopes.push(b.slope().expect("affine").abs());
    }
    Ok((adj, slopes))
}

/// Smallest slope product over closed walks through each branch, or `None`
/// when the branch lies on no cycle.
fn min_cycle_products<S: Scalar>(adj: &[Vec<bool>], slopes: &[S]) -> Vec<Option<S>> {
    let n = adj.len();
    let mut best: Vec<Vec<Option<S>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| adj[i][j].then(|| slopes[i].clone()))
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = best[i][k].clone() else {
                continue;
            };
            for j in 0..n {
                let Some(kj) = best[k][j].clone() else {
                    continue;
                };
                let via = ik.clone() * kj;
                if best[i][j].as_ref().is_none_or(|cur| via < *cur) {
                    best[i][j] = Some(via);
                }
            }
        }
    }
    (0..n).map(|i| best[i][i].clone()).collect()
}

/// The stationary piecewise-constant probability density, one height per
/// branch domain.
pub fn markov_invariant_density<S: Scalar>(map: &PiecewiseMap<S>) -> Result<PiecewiseMeasure<S>> {
    let (adj, slopes) = markov_graph(map)?;
    let n = adj.len();
    for (i, p) in min_cycle_products(&adj, &slopes).into_iter().enumerate() {
        if let Some(p) = p {
            if p <= S::one() {
                return Err(Error::NoStationaryDensity(format!(
                    "branch {i} lies on a cycle with slope product {}",
                    p.render_compact()
                )));
            }
        }
    }
    // c_j = Σ_i [A_j ⊆ f(A_i)] c_i / |s_i|
    let rows: Vec<Vec<S>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let t = if adj[i][j] {
                        S::one() / slopes[i].clone()
                    } else {
                        S::zero()
                    };
                    if i == j {
                        t - S::one()
                    } else {
                        t
                    }
                })
                .collect()
        })
        .collect();
    let kernel = nullspace(rows, n);
    if kernel.len() != 1 {
        return Err(Error::NoStationaryDensity(format!(
            "solution space has dimension {}",
            kernel.len()
        )));
    }
    let mut c = kernel.into_iter().next().expect("one vector");
    if c.iter().all(|x| !x.is_positive()) {
        c = c.into_iter().map(|x| -x).collect();
    }
    if c.iter().any(|x| x.is_negative()) {
        return Err(Error::NoStationaryDensity(
            "stationary vector changes sign".into(),
        ));
    }
    let pieces = map
        .branches()
        .iter()
        .zip(c)
        .map(|(b, h)| (b.domain().clone(), h))
        .collect();
    PiecewiseMeasure::new(pieces, Vec::new())?.normalized()
}
