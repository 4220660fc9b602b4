//! Measures with a piecewise-constant density plus finitely many atoms, the
//! lift operator, tower inducing and the Kac round trip.

pub mod induce;
pub mod kac;
pub mod lift;
pub mod markov;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::interval::{merge_closures, Interval};
use crate::map::{Branch, PiecewiseMap};
use crate::scalar::Scalar;

pub use induce::{check_invariance, induce_measure};
pub use kac::{kac_roundtrip_check, KacOutcome};
pub use lift::{lift_measure, LiftResult};
pub use markov::markov_invariant_density;

/// A set on which two measures disagree, with both masses.
#[derive(Clone, Debug, PartialEq)]
pub struct Discrepancy<S> {
    pub set: String,
    pub left: S,
    pub right: S,
}

/// Density pieces are kept disjoint and sorted; atoms are sorted by point.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseMeasure<S> {
    pub density_pieces: Vec<(Interval<S>, S)>,
    pub atoms: Vec<(S, S)>,
    pub total_mass: S,
}

impl<S: Scalar> PiecewiseMeasure<S> {
    /// Builds a measure, merging overlapping pieces (heights add) and
    /// repeated atoms. Negative heights or masses are rejected.
    pub fn new(pieces: Vec<(Interval<S>, S)>, atoms: Vec<(S, S)>) -> Result<Self> {
        if pieces.iter().any(|(_, h)| h.is_negative()) || atoms.iter().any(|(_, m)| m.is_negative())
        {
            return Err(Error::InvalidMeasure("negative mass".into()));
        }
        let density_pieces = flatten(pieces);
        let mut atoms: Vec<(S, S)> = atoms.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable"));
        let mut merged: Vec<(S, S)> = Vec::with_capacity(atoms.len());
        for (x, m) in atoms {
            match merged.last_mut() {
                Some((y, acc)) if y.same(&x) => *acc = acc.clone() + m,
                _ => merged.push((x, m)),
            }
        }
        let total_mass = density_pieces
            .iter()
            .fold(S::zero(), |acc, (iv, h)| acc + h.clone() * iv.length())
            + merged.iter().fold(S::zero(), |acc, (_, m)| acc + m.clone());
        Ok(Self {
            density_pieces,
            atoms: merged,
            total_mass,
        })
    }

    pub fn zero() -> Self {
        Self {
            density_pieces: Vec::new(),
            atoms: Vec::new(),
            total_mass: S::zero(),
        }
    }

    /// Lebesgue measure (height 1) on `iv`.
    pub fn lebesgue(iv: &Interval<S>) -> Self {
        Self::new(vec![(iv.interior(), S::one())], Vec::new()).expect("nonnegative")
    }

    /// Normalized Lebesgue measure on `iv`.
    pub fn uniform(iv: &Interval<S>) -> Self {
        Self::new(vec![(iv.interior(), S::one() / iv.length())], Vec::new()).expect("nonnegative")
    }

    /// Equal atoms on the given points.
    pub fn uniform_atoms(points: &[S]) -> Self {
        let m = S::one() / S::from_i64(points.len() as i64);
        Self::new(
            Vec::new(),
            points.iter().map(|p| (p.clone(), m.clone())).collect(),
        )
        .expect("nonnegative")
    }

    pub fn dirac(x: S) -> Self {
        Self::new(Vec::new(), vec![(x, S::one())]).expect("nonnegative")
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass.is_zero()
    }

    pub fn is_atomic(&self) -> bool {
        self.density_pieces.is_empty()
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::new(
            self.density_pieces
                .iter()
                .map(|(iv, h)| (iv.clone(), h.clone() * c.clone()))
                .collect(),
            self.atoms
                .iter()
                .map(|(x, m)| (x.clone(), m.clone() * c.clone()))
                .collect(),
        )
        .expect("nonnegative scale")
    }

    /// Rescaled to total mass 1.
    pub fn normalized(&self) -> Result<Self> {
        if self.total_mass.is_zero() {
            return Err(Error::InvalidMeasure(
                "cannot normalize the zero measure".into(),
            ));
        }
        Ok(self.scale(&(S::one() / self.total_mass.clone())))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut pieces = self.density_pieces.clone();
        pieces.extend(other.density_pieces.iter().cloned());
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Self::new(pieces, atoms).expect("nonnegative sum")
    }

    /// Mass of a point.
    pub fn atom_mass(&self, x: &S) -> S {
        self.atoms
            .iter()
            .filter(|(y, _)| y.same(x))
            .fold(S::zero(), |acc, (_, m)| acc + m.clone())
    }

    /// Exact mass of a finite union of intervals. Atoms on endpoints count
    /// according to the openness flags.
    pub fn measure_of_set(&self, set: &[Interval<S>]) -> S {
        let merged = merge_closures(set.to_vec());
        let density = self.density_pieces.iter().fold(S::zero(), |acc, (iv, h)| {
            merged
                .iter()
                .filter_map(|m| m.intersect(iv))
                .fold(acc, |a, piece| a + h.clone() * piece.length())
        });
        let atoms = self
            .atoms
            .iter()
            .filter(|(x, _)| set.iter().any(|iv| iv.contains(x)))
            .fold(S::zero(), |acc, (_, m)| acc + m.clone());
        density + atoms
    }

    pub fn measure_of(&self, iv: &Interval<S>) -> S {
        self.measure_of_set(std::slice::from_ref(iv))
    }

    /// Restriction to a union of intervals.
    pub fn restrict(&self, set: &[Interval<S>]) -> Self {
        let merged = merge_closures(set.to_vec());
        let pieces = self
            .density_pieces
            .iter()
            .flat_map(|(iv, h)| {
                merged
                    .iter()
                    .filter_map(move |m| m.intersect(iv).map(|p| (p, h.clone())))
            })
            .collect();
        let atoms = self
            .atoms
            .iter()
            .filter(|(x, _)| set.iter().any(|iv| iv.contains(x)))
            .cloned()
            .collect();
        Self::new(pieces, atoms).expect("restriction of a nonnegative measure")
    }

    /// Image under one affine branch of the part of the measure on its domain.
    pub fn push_branch(&self, branch: &Branch<S>) -> Result<Self> {
        let slope = branch.slope().ok_or(Error::NonAffine)?.abs();
        let pieces = self
            .density_pieces
            .iter()
            .filter_map(|(iv, h)| {
                let piece = iv.intersect(branch.domain())?;
                Some((
                    branch.image_of(&piece)?.interior(),
                    h.clone() / slope.clone(),
                ))
            })
            .collect();
        let atoms = self
            .atoms
            .iter()
            .filter(|(x, _)| branch.domain().interior_contains(x))
            .map(|(x, m)| (branch.eval(x), m.clone()))
            .collect();
        Self::new(pieces, atoms)
    }

    /// `f_* μ`. Atoms sitting on ∂P have no image and are reported.
    pub fn pushforward(&self, map: &PiecewiseMap<S>) -> Result<Self> {
        if let Some((x, _)) = self
            .atoms
            .iter()
            .find(|(x, _)| map.branch_index_of(x).is_none())
        {
            return Err(Error::Precondition(format!(
                "atom at {} sits on the partition boundary",
                x.render()
            )));
        }
        let mut out = Self::zero();
        for b in map.branches() {
            out = out.add(&self.push_branch(b)?);
        }
        Ok(out)
    }

    /// Half the ℓ¹ distance of the masses of `cells` and of their endpoints,
    /// with the set carrying the largest discrepancy.
    pub fn distance_on(&self, other: &Self, cells: &[Interval<S>]) -> (S, Option<Discrepancy<S>>) {
        let mut total = S::zero();
        let mut worst_cell: Option<Discrepancy<S>> = None;
        let mut points: Vec<S> = Vec::new();
        for c in cells {
            let c = c.interior();
            let (a, b) = (self.measure_of(&c), other.measure_of(&c));
            total = total + (a.clone() - b.clone()).abs();
            keep_worse(&mut worst_cell, c.to_string(), a, b);
            for p in [c.lo(), c.hi()] {
                if !points.iter().any(|q| q.same(p)) {
                    points.push(p.clone());
                }
            }
        }
        for p in &points {
            total = total + (self.atom_mass(p) - other.atom_mass(p)).abs();
        }
        // Atoms make sharper witnesses than the cells containing them.
        let mut worst_atom: Option<Discrepancy<S>> = None;
        for (x, _) in self.atoms.iter().chain(&other.atoms) {
            keep_worse(
                &mut worst_atom,
                format!("{{{}}}", x.render_compact()),
                self.atom_mass(x),
                other.atom_mass(x),
            );
        }
        (total / S::two(), worst_atom.or(worst_cell))
    }

    /// Text dump: `total=` header, then `piece` and `atom` records.
    pub fn dump(&self) -> String {
        let mut out = format!("total={}\n", self.total_mass.render());
        for (iv, h) in &self.density_pieces {
            let _ = writeln!(out, "piece {} height={}", iv.dots(), h.render());
        }
        for (x, m) in &self.atoms {
            let _ = writeln!(out, "atom {} mass={}", x.render(), m.render());
        }
        out
    }
}

fn keep_worse<S: Scalar>(worst: &mut Option<Discrepancy<S>>, set: String, left: S, right: S) {
    let d = (left.clone() - right.clone()).abs();
    if !d.is_zero()
        && worst
            .as_ref()
            .is_none_or(|w| d > (w.left.clone() - w.right.clone()).abs())
    {
        *worst = Some(Discrepancy { set, left, right });
    }
}

/// Splits overlapping pieces at every endpoint and sums heights; adjacent
/// pieces of equal height are joined.
fn flatten<S: Scalar>(pieces: Vec<(Interval<S>, S)>) -> Vec<(Interval<S>, S)> {
    let pieces: Vec<_> = pieces.into_iter().filter(|(_, h)| !h.is_zero()).collect();
    if pieces.is_empty() {
        return Vec::new();
    }
    // Events: (coordinate, height delta).
    let mut events: Vec<(S, S)> = Vec::with_capacity(2 * pieces.len());
    for (iv, h) in &pieces {
        events.push((iv.lo().clone(), h.clone()));
        events.push((iv.hi().clone(), -h.clone()));
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable"));
    let mut out: Vec<(Interval<S>, S)> = Vec::new();
    let mut height = S::zero();
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0.clone();
        while i < events.len() && events[i].0.same(&x) {
            height = height + events[i].1.clone();
            i += 1;
        }
        if i == events.len() {
            break;
        }
        let next = events[i].0.clone();
        if height.to_f64().abs() <= S::tolerance() || height.is_zero() {
            continue;
        }
        match out.last_mut() {
            Some((last, h)) if last.hi().same(&x) && h.same(&height) => {
                *last = Interval::open(last.lo().clone(), next).expect("increasing");
            }
            _ => out.push((Interval::open(x, next).expect("increasing"), height.clone())),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::doubling_map;
    use crate::scalar::{q, Rational};

    fn iv(a: i64, b: i64, d: i64) -> Interval<Rational> {
        Interval::open(q(a, d), q(b, d)).unwrap()
    }

    #[test]
    fn measure_of_set_examples() {
        let leb = PiecewiseMeasure::lebesgue(&iv(0, 1, 1));
        assert_eq!(leb.measure_of(&iv(1, 2, 3)), q(1, 3));
        assert_eq!(leb.measure_of_set(&[iv(0, 2, 4), iv(1, 3, 4)]), q(3, 4));
        let atoms = PiecewiseMeasure::uniform_atoms(&[q(1, 3), q(2, 3)]);
        assert_eq!(atoms.measure_of(&iv(1, 2, 3)), q(0, 1));
        assert_eq!(
            atoms.measure_of(&Interval::closed(q(1, 3), q(2, 3)).unwrap()),
            q(1, 1)
        );
    }

    #[test]
    fn overlapping_pieces_flatten() {
        let m = PiecewiseMeasure::new(vec![(iv(0, 2, 4), q(1, 1)), (iv(1, 3, 4), q(1, 1))], vec![])
            .unwrap();
        assert_eq!(m.density_pieces.len(), 3);
        assert_eq!(m.density_pieces[1], (iv(1, 2, 4), q(2, 1)));
        assert_eq!(m.total_mass, q(1, 1));
        let joined =
            PiecewiseMeasure::new(vec![(iv(0, 1, 2), q(1, 1)), (iv(1, 2, 2), q(1, 1))], vec![])
                .unwrap();
        assert_eq!(joined.density_pieces, vec![(iv(0, 1, 1), q(1, 1))]);
    }

    #[test]
    fn lebesgue_is_doubling_invariant() {
        let leb = PiecewiseMeasure::lebesgue(&iv(0, 1, 1));
        assert_eq!(leb.pushforward(&doubling_map()).unwrap(), leb);
        let orbit = PiecewiseMeasure::uniform_atoms(&[q(1, 7), q(2, 7), q(4, 7)]);
        assert_eq!(orbit.pushforward(&doubling_map()).unwrap(), orbit);
    }

    #[test]
    fn dump_format() {
        let m =
            PiecewiseMeasure::new(vec![(iv(0, 1, 2), q(4, 3))], vec![(q(3, 4), q(1, 3))]).unwrap();
        assert_eq!(
            m.dump(),
            "total=1/1\npiece 0/1..1/2 height=4/3\natom 3/4 mass=1/3\n"
        );
    }
}
