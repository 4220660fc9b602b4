//! Small dense linear algebra over a [`Scalar`].

use crate::scalar::Scalar;

fn negligible<S: Scalar>(x: &S) -> bool {
    x.is_zero() || x.to_f64().abs() <= S::tolerance()
}

/// Basis of the right nullspace of `a` (rows of equal length), by
/// Gauss–Jordan elimination.
pub fn nullspace<S: Scalar>(mut a: Vec<Vec<S>>, cols: usize) -> Vec<Vec<S>> {
    let rows = a.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).max_by(|&i, &j| {
            a[i][c]
                .abs()
                .partial_cmp(&a[j][c].abs())
                .expect("comparable")
        }) else {
            continue;
        };
        if negligible(&a[p][c]) {
            continue;
        }
        a.swap(r, p);
        let inv = S::one() / a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                for k in 0..cols {
                    let delta = factor.clone() * a[r][k].clone();
                    a[i][k] = a[i][k].clone() - delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); cols];
            v[f] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f].clone();
            }
            v
        })
        .collect()
}
