//! Finite-branch piecewise invertible interval maps.

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Numeric,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Numeric => "numeric",
        }
    }
}

/// Side from which a point is approached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// Limit through points below.
    Left,
    /// Limit through points above.
    Right,
}

impl Side {
    pub fn flip(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BranchKind<S> {
    /// `x -> slope * x + offset`
    Affine { slope: S, offset: S },
    /// `x -> a x^2 + b x + c`, numeric mode only.
    Quadratic { a: S, b: S, c: S },
}

/// A homeomorphism on one element of the monotonicity partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch<S> {
    domain: Interval<S>,
    kind: BranchKind<S>,
}

impl<S: Scalar> Branch<S> {
    pub fn affine(domain: Interval<S>, slope: S, offset: S) -> Result<Self> {
        if slope.is_zero() {
            return Err(Error::InvalidMap("branch slope must be nonzero".into()));
        }
        Ok(Self {
            domain: domain.interior(),
            kind: BranchKind::Affine { slope, offset },
        })
    }

    pub fn quadratic(domain: Interval<S>, a: S, b: S, c: S) -> Result<Self> {
        if S::EXACT {
            return Err(Error::InvalidMap(
                "quadratic branches are only admitted in numeric mode".into(),
            ));
        }
        if a.is_zero() {
            return Err(Error::InvalidMap(
                "quadratic coefficient must be nonzero".into(),
            ));
        }
        let vertex = -b.clone() / (S::two() * a.clone());
        if domain.interior_contains(&vertex) {
            return Err(Error::InvalidMap(format!(
                "quadratic branch is not injective on {domain}: critical point {}",
                vertex.render()
            )));
        }
        Ok(Self {
            domain: domain.interior(),
            kind: BranchKind::Quadratic { a, b, c },
        })
    }

    pub fn domain(&self) -> &Interval<S> {
        &self.domain
    }

    pub fn kind(&self) -> &BranchKind<S> {
        &self.kind
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.kind, BranchKind::Affine { .. })
    }

    pub fn slope(&self) -> Option<&S> {
        match &self.kind {
            BranchKind::Affine { slope, .. } => Some(slope),
            BranchKind::Quadratic { .. } => None,
        }
    }

    pub fn offset(&self) -> Option<&S> {
        match &self.kind {
            BranchKind::Affine { offset, .. } => Some(offset),
            BranchKind::Quadratic { .. } => None,
        }
    }

    /// Evaluates the (continuously extended) branch at any point.
    pub fn eval(&self, x: &S) -> S {
        match &self.kind {
            BranchKind::Affine { slope, offset } => slope.clone() * x.clone() + offset.clone(),
            BranchKind::Quadratic { a, b, c } => {
                (a.clone() * x.clone() + b.clone()) * x.clone() + c.clone()
            }
        }
    }

    pub fn derivative(&self, x: &S) -> S {
        match &self.kind {
            BranchKind::Affine { slope, .. } => slope.clone(),
            BranchKind::Quadratic { a, b, .. } => S::two() * a.clone() * x.clone() + b.clone(),
        }
    }

    pub fn increasing(&self) -> bool {
        self.derivative(&self.domain.midpoint()).is_positive()
    }

    /// Preimage of a point under the extended branch, if it lies in the
    /// closure of the domain.
    pub fn inverse_point(&self, y: &S) -> Option<S> {
        let x = match &self.kind {
            BranchKind::Affine { slope, offset } => (y.clone() - offset.clone()) / slope.clone(),
            BranchKind::Quadratic { a, b, c } => {
                let disc =
                    b.clone() * b.clone() - S::from_i64(4) * a.clone() * (c.clone() - y.clone());
                let root = disc.sqrt_checked()?;
                let two_a = S::two() * a.clone();
                let r1 = (-b.clone() + root.clone()) / two_a.clone();
                let r2 = (-b.clone() - root) / two_a;
                if self.domain.closure_contains(&r1) {
                    r1
                } else {
                    r2
                }
            }
        };
        self.domain.closure_contains(&x).then_some(x)
    }

    /// Image of the whole domain.
    pub fn image(&self) -> Interval<S> {
        self.image_of(&self.domain)
            .expect("injective branch has a nondegenerate image")
    }

    /// Image of a subinterval of the domain closure.
    pub fn image_of(&self, iv: &Interval<S>) -> Option<Interval<S>> {
        iv.monotone_image(|x| self.eval(x), self.increasing())
    }

    /// Exact preimage of `target` inside the domain; the empty marker when
    /// disjoint.
    pub fn inverse(&self, target: &Interval<S>) -> Option<Interval<S>> {
        let t = target.intersect(&self.image())?;
        let a = self.inverse_point(t.lo())?;
        let b = self.inverse_point(t.hi())?;
        if self.increasing() {
            Interval::new(a, b, t.lo_open(), t.hi_open())
        } else {
            Interval::new(b, a, t.hi_open(), t.lo_open())
        }
    }

    /// Preimage of `target` only when all of `target` is attained, so that
    /// the branch maps the result homeomorphically onto `target`.
    pub fn inverse_full(&self, target: &Interval<S>) -> Option<Interval<S>> {
        if !target.within(&self.image()) {
            return None;
        }
        self.inverse(target)
    }
}

/// A piecewise invertible map of a compact interval with finitely many
/// monotone branches whose domains tile the ambient interval.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseMap<S> {
    ambient: Interval<S>,
    branches: Vec<Branch<S>>,
    boundary: Vec<S>,
}

impl<S: Scalar> PiecewiseMap<S> {
    /// Validates the tiling and image conditions. Branches must be listed
    /// left to right.
    pub fn new(ambient: Interval<S>, branches: Vec<Branch<S>>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidMap("at least one branch is required".into()));
        }
        let ambient = ambient.closure();
        if !branches[0].domain.lo().same(ambient.lo()) {
            return Err(Error::InvalidMap(
                "first branch must start at the ambient left endpoint".into(),
            ));
        }
        for pair in branches.windows(2) {
            if !pair[0].domain.hi().same(pair[1].domain.lo()) {
                return Err(Error::InvalidMap(format!(
                    "branch domains {} and {} must be adjacent and ordered",
                    pair[0].domain, pair[1].domain
                )));
            }
        }
        if !branches[branches.len() - 1].domain.hi().same(ambient.hi()) {
            return Err(Error::InvalidMap(
                "last branch must end at the ambient right endpoint".into(),
            ));
        }
        for (i, b) in branches.iter().enumerate() {
            if !b.image().within(&ambient) {
                return Err(Error::InvalidMap(format!(
                    "branch {i} maps {} to {}, outside {}",
                    b.domain,
                    b.image(),
                    ambient
                )));
            }
        }
        let mut boundary = vec![ambient.lo().clone()];
        boundary.extend(branches.iter().map(|b| b.domain.hi().clone()));
        Ok(Self {
            ambient,
            branches,
            boundary,
        })
    }

    pub fn mode(&self) -> Mode {
        if S::EXACT {
            Mode::Exact
        } else {
            Mode::Numeric
        }
    }

    pub fn ambient(&self) -> &Interval<S> {
        &self.ambient
    }

    pub fn branches(&self) -> &[Branch<S>] {
        &self.branches
    }

    pub fn branch(&self, i: usize) -> &Branch<S> {
        &self.branches[i]
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn is_affine(&self) -> bool {
        self.branches.iter().all(Branch::is_affine)
    }

    /// The finite set ∂P, sorted, including the ambient endpoints.
    pub fn boundary(&self) -> &[S] {
        &self.boundary
    }

    pub fn is_boundary(&self, x: &S) -> bool {
        self.boundary.iter().any(|b| b.same(x))
    }

    /// Index of the branch whose open domain contains `x`.
    pub fn branch_index_of(&self, x: &S) -> Option<usize> {
        if self.is_boundary(x) || !self.ambient.interior_contains(x) {
            return None;
        }
        let idx = self.branches.partition_point(|b| b.domain.hi() <= x);
        (idx < self.branches.len()).then_some(idx)
    }

    /// Branch used by the one-sided limit at `x` from `side`.
    pub fn branch_index_from(&self, x: &S, side: Side) -> Option<usize> {
        if let Some(i) = self.branch_index_of(x) {
            return Some(i);
        }
        self.branches.iter().position(|b| match side {
            Side::Right => b.domain.lo().same(x),
            Side::Left => b.domain.hi().same(x),
        })
    }

    /// One-sided image of `x` and the side from which the image is approached.
    pub fn one_sided_step(&self, x: &S, side: Side) -> Option<(S, Side, usize)> {
        let i = self.branch_index_from(x, side)?;
        let b = &self.branches[i];
        let next_side = if b.increasing() { side } else { side.flip() };
        Some((b.eval(x), next_side, i))
    }

    /// One application of `f`; `x` must avoid ∂P.
    pub fn step(&self, x: &S) -> Option<S> {
        self.branch_index_of(x).map(|i| self.branches[i].eval(x))
    }

    /// `f^steps(x)`. For `steps >= 1` every point `f^0(x)..f^steps(x)` must
    /// avoid ∂P; otherwise `BoundaryHit(k)` names the first offending index.
    pub fn eval_map(&self, x: &S, steps: usize) -> Result<S> {
        let mut y = x.clone();
        if steps == 0 {
            return Ok(y);
        }
        for k in 0..steps {
            y = self.step(&y).ok_or(Error::BoundaryHit(k))?;
        }
        if self.is_boundary(&y) {
            return Err(Error::BoundaryHit(steps));
        }
        Ok(y)
    }

    /// Preimage of `target` under one branch, intersected with its domain.
    pub fn inverse_branch(
        &self,
        branch: usize,
        target: Option<&Interval<S>>,
    ) -> Option<Interval<S>> {
        self.branches[branch].inverse(target?)
    }

    /// Points of the cell with itinerary `word` whose `|word|`-th image lies
    /// in `target` (pieces may be truncated by the partition).
    pub fn pull_back_word(&self, word: &[usize], target: &Interval<S>) -> Option<Interval<S>> {
        let mut cur = target.clone();
        for &i in word.iter().rev() {
            cur = self.branches[i].inverse(&cur)?;
        }
        Some(cur)
    }

    /// Like [`PiecewiseMap::pull_back_word`] but only when `f^{|word|}` maps
    /// the result homeomorphically onto all of `target`.
    pub fn pull_back_word_full(&self, word: &[usize], target: &Interval<S>) -> Option<Interval<S>> {
        let mut cur = target.clone();
        for &i in word.iter().rev() {
            cur = self.branches[i].inverse_full(&cur)?;
        }
        Some(cur)
    }

    /// Forward image of `iv` along `word`, checking at each step that the
    /// current set lies in the closure of the prescribed branch domain.
    pub fn push_word(&self, word: &[usize], iv: &Interval<S>) -> Option<Interval<S>> {
        let mut cur = iv.clone();
        for &i in word {
            let b = &self.branches[i];
            if !cur.within(b.domain()) {
                return None;
            }
            cur = b.image_of(&cur)?;
        }
        Some(cur)
    }

    /// Applies the branches of `word` to a point without boundary checks.
    pub fn push_point(&self, word: &[usize], x: &S) -> S {
        word.iter()
            .fold(x.clone(), |y, &i| self.branches[i].eval(&y))
    }

    /// The cell of the `|word|`-fold refinement with itinerary `word`.
    pub fn word_cell(&self, word: &[usize]) -> Option<Interval<S>> {
        let mut cur = self.ambient.interior();
        for &i in word.iter().rev() {
            cur = self.branches[i].inverse(&cur)?;
        }
        Some(cur)
    }

    /// Whether some point of the open interval lies on ∂P.
    pub fn interval_meets_boundary(&self, iv: &Interval<S>) -> bool {
        self.boundary
            .iter()
            .any(|b| iv.interior_contains(b) && !b.same(iv.lo()) && !b.same(iv.hi()))
    }

    /// ΔP = f(∂P), computed from the one-sided images of every boundary point.
    pub fn boundary_images(&self) -> Vec<S> {
        let mut out: Vec<S> = Vec::new();
        for b in &self.branches {
            for e in [b.domain.lo(), b.domain.hi()] {
                let y = b.eval(e);
                if !out.iter().any(|o| o.same(&y)) {
                    out.push(y);
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{doubling_map, markov_map};
    use crate::scalar::q;

    #[test]
    fn doubling_orbits() {
        let d = doubling_map();
        assert_eq!(d.eval_map(&q(1, 3), 2).unwrap(), q(1, 3));
        assert_eq!(d.eval_map(&q(2, 7), 0).unwrap(), q(2, 7));
        assert_eq!(d.eval_map(&q(1, 2), 0).unwrap(), q(1, 2));
        assert_eq!(d.eval_map(&q(1, 4), 1), Err(Error::BoundaryHit(1)));
        assert_eq!(d.eval_map(&q(1, 2), 3), Err(Error::BoundaryHit(0)));
    }

    #[test]
    fn inverse_branch_examples() {
        let d = doubling_map();
        let t = Interval::open(q(1, 3), q(2, 3)).unwrap();
        assert_eq!(
            d.inverse_branch(0, Some(&t)),
            Interval::open(q(1, 6), q(1, 3))
        );
        assert_eq!(
            d.inverse_branch(1, Some(&t)),
            Interval::open(q(2, 3), q(5, 6))
        );
        assert_eq!(d.inverse_branch(1, None), None);
    }

    #[test]
    fn inverse_then_forward_is_identity() {
        let m = markov_map();
        let t = Interval::open(q(1, 5), q(1, 3)).unwrap();
        for i in 0..m.branch_count() {
            if let Some(pre) = m.inverse_branch(i, Some(&t)) {
                let back = m.branch(i).image_of(&pre).unwrap();
                assert!(back.same_closure(
                    &pre.affine_image(m.branch(i).slope().unwrap(), m.branch(i).offset().unwrap())
                        .unwrap()
                ));
                assert!(back.within(&t));
            }
        }
    }

    #[test]
    fn rejects_gaps_and_escaping_images() {
        let amb = Interval::closed(q(0, 1), q(1, 1)).unwrap();
        let gap = vec![
            Branch::affine(Interval::open(q(0, 1), q(1, 3)).unwrap(), q(2, 1), q(0, 1)).unwrap(),
            Branch::affine(Interval::open(q(1, 2), q(1, 1)).unwrap(), q(1, 1), q(-1, 2)).unwrap(),
        ];
        assert!(matches!(
            PiecewiseMap::new(amb.clone(), gap),
            Err(Error::InvalidMap(_))
        ));
        let escape =
            vec![
                Branch::affine(Interval::open(q(0, 1), q(1, 1)).unwrap(), q(2, 1), q(0, 1))
                    .unwrap(),
            ];
        assert!(PiecewiseMap::new(amb, escape).is_err());
    }

    #[test]
    fn quadratic_only_numeric() {
        let dom = Interval::open(q(0, 1), q(1, 2)).unwrap();
        assert!(Branch::quadratic(dom, q(-4, 1), q(4, 1), q(0, 1)).is_err());
        let dom = Interval::open(0.0f64, 0.5).unwrap();
        let b = Branch::quadratic(dom.clone(), -4.0, 4.0, 0.0).unwrap();
        assert!((b.eval(&0.25) - 0.75).abs() < 1e-12);
        let x = b.inverse_point(&0.75).unwrap();
        assert!((x - 0.25).abs() < 1e-12);
        assert!(Branch::quadratic(Interval::open(0.0f64, 1.0).unwrap(), -4.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn boundary_images_of_doubling() {
        let d = doubling_map();
        assert_eq!(d.boundary(), &[q(0, 1), q(1, 2), q(1, 1)]);
        assert_eq!(d.boundary_images(), vec![q(0, 1), q(1, 1)]);
        assert_eq!(
            d.one_sided_step(&q(1, 2), Side::Left),
            Some((q(1, 1), Side::Left, 0))
        );
        assert_eq!(
            d.one_sided_step(&q(1, 2), Side::Right),
            Some((q(0, 1), Side::Right, 1))
        );
    }
}
