//! Comet-shaped quivers: A-type arms meeting at a central node, plus loops
//! at the centre.
//!
//! Arm nodes are indexed from the outer (terminal) node `0` to the central
//! node `m - 1`; arm edge `k` points from node `k` to node `k + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing dimension string `r_1 < ... < r_m` of a partial flag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FlagString(Vec<usize>);

impl FlagString {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        let ok = !entries.is_empty() && entries[0] >= 1 && entries.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(Self(entries))
        } else {
            Err(Error::InvalidFlag(entries))
        }
    }

    /// `(1, 2, ..., r)`.
    pub fn complete(r: usize) -> Self {
        Self((1..=r.max(1)).collect())
    }

    /// `(1, r)`; for `r = 1` this degenerates to `(1)`.
    pub fn minimal(r: usize) -> Self {
        if r <= 1 {
            Self(vec![1])
        } else {
            Self(vec![1, r])
        }
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// Number of nodes `m`, including the central one.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Last entry, which is the rank of the central node.
    pub fn rank(&self) -> usize {
        *self.0.last().expect("flag strings are nonempty")
    }

    pub fn is_complete(&self) -> bool {
        self.0.iter().copied().eq(1..=self.rank())
    }

    pub fn is_minimal(&self) -> bool {
        self.0.len() == 2 && self.0[0] == 1
    }

    /// Complex dimension of the flag variety, `sum r_i (r_{i+1} - r_i)`.
    pub fn dim(&self) -> usize {
        self.0.windows(2).map(|w| w[0] * (w[1] - w[0])).sum()
    }
}

impl TryFrom<Vec<usize>> for FlagString {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FlagString> for Vec<usize> {
    fn from(f: FlagString) -> Self {
        f.0
    }
}

pub fn flag_dim(flag: &FlagString) -> usize {
    flag.dim()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CometQuiver {
    arms: Vec<FlagString>,
    loops: usize,
    multiplicities: Vec<Vec<usize>>,
    central_rank: usize,
}

impl CometQuiver {
    /// Build a comet from arm strings, loop count and optional per-edge
    /// multiplicities (one list per arm, one entry per consecutive node pair).
    pub fn new(arms: Vec<Vec<usize>>, loops: usize, multiplicities: Option<Vec<Vec<usize>>>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidQuiver("a comet without arms needs an explicit central rank".into()));
        }
        let flags = arms.into_iter().map(FlagString::new).collect::<Result<Vec<_>>>()?;
        let rank = flags[0].rank();
        if flags.iter().any(|f| f.rank() != rank) {
            return Err(Error::MismatchedCentralRank(flags.iter().map(FlagString::rank).collect()));
        }
        Self::assemble(flags, loops, multiplicities, rank)
    }

    /// Comet with central rank `r`; `arms` may be empty (a loops-only quiver).
    pub fn with_rank(
        rank: usize,
        arms: Vec<Vec<usize>>,
        loops: usize,
        multiplicities: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidQuiver("central rank must be positive".into()));
        }
        let flags = arms.into_iter().map(FlagString::new).collect::<Result<Vec<_>>>()?;
        if flags.iter().any(|f| f.rank() != rank) {
            let mut ranks: Vec<usize> = vec![rank];
            ranks.extend(flags.iter().map(FlagString::rank));
            return Err(Error::MismatchedCentralRank(ranks));
        }
        Self::assemble(flags, loops, multiplicities, rank)
    }

    fn assemble(
        arms: Vec<FlagString>,
        loops: usize,
        multiplicities: Option<Vec<Vec<usize>>>,
        central_rank: usize,
    ) -> Result<Self> {
        if arms.len() + loops == 0 {
            return Err(Error::InvalidQuiver("need at least one arm or loop".into()));
        }
        if arms.iter().any(|f| f.len() < 2) {
            return Err(Error::InvalidQuiver("each arm needs an outer node besides the central one".into()));
        }
        let multiplicities = match multiplicities {
            None => arms.iter().map(|f| vec![1; f.len() - 1]).collect(),
            Some(m) => {
                if m.len() != arms.len() {
                    return Err(Error::LengthMismatch { expected: arms.len(), got: m.len() });
                }
                for (f, mult) in arms.iter().zip(&m) {
                    if mult.len() != f.len() - 1 {
                        return Err(Error::LengthMismatch { expected: f.len() - 1, got: mult.len() });
                    }
                    if mult.contains(&0) {
                        return Err(Error::InvalidQuiver("edge multiplicities must be positive".into()));
                    }
                }
                m
            }
        };
        Ok(Self { arms, loops, multiplicities, central_rank })
    }

    /// All arms complete, `n` of them.
    pub fn complete(r: usize, n: usize, g: usize) -> Result<Self> {
        Self::with_rank(r, vec![FlagString::complete(r).0; n], g, None)
    }

    /// All arms minimal, `n` of them.
    pub fn minimal(r: usize, n: usize, g: usize) -> Result<Self> {
        Self::with_rank(r, vec![FlagString::minimal(r).0; n], g, None)
    }

    pub fn arms(&self) -> &[FlagString] {
        &self.arms
    }

    pub fn arm(&self, i: usize) -> &FlagString {
        &self.arms[i]
    }

    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn loops(&self) -> usize {
        self.loops
    }

    pub fn central_rank(&self) -> usize {
        self.central_rank
    }

    pub fn multiplicities(&self) -> &[Vec<usize>] {
        &self.multiplicities
    }

    pub fn multiplicity(&self, arm: usize, edge: usize) -> usize {
        self.multiplicities[arm][edge]
    }

    pub fn is_tame(&self) -> bool {
        self.multiplicities.iter().flatten().all(|&m| m == 1)
    }

    /// Total number of `x` arrows along all arms, counting parallel copies.
    pub fn x_edge_count(&self) -> usize {
        self.multiplicities.iter().flatten().sum()
    }

    /// Every arm begins at a rank-one node.
    pub fn is_based(&self) -> bool {
        self.arms.iter().all(|f| f.entries()[0] == 1)
    }

    /// Real dimension of the compact gauge group: `sum r_k^2` over non-central
    /// nodes plus `r^2 - 1`.
    pub fn gauge_dim(&self) -> usize {
        let outer: usize =
            self.arms.iter().map(|f| f.entries()[..f.len() - 1].iter().map(|&d| d * d).sum::<usize>()).sum();
        outer + self.central_rank * self.central_rank - 1
    }

    /// Number of interior arm nodes (neither terminal nor central) where the
    /// general moment-map calculus imposes a condition.
    pub fn interior_node_count(&self) -> usize {
        self.arms.iter().map(|f| f.len().saturating_sub(2)).sum()
    }

    /// The same count using the range `k = 2..m_i - 2` printed in the
    /// hyperpolygon equations.
    pub fn printed_interior_node_count(&self) -> usize {
        self.arms.iter().map(|f| f.len().saturating_sub(3)).sum()
    }
}

/// `build_comet` under its operation name.
pub fn build_comet(arms: Vec<Vec<usize>>, g: usize, multiplicities: Option<Vec<Vec<usize>>>) -> Result<CometQuiver> {
    CometQuiver::new(arms, g, multiplicities)
}

/// `sum_i f(arm_i) + (g - 1)(r^2 - 1)`; negative values mean the space is
/// expected to be empty.
pub fn dim_polygon_space(q: &CometQuiver) -> i64 {
    let r = q.central_rank() as i64;
    let flags: i64 = q.arms().iter().map(|f| f.dim() as i64).sum();
    flags + (q.loops() as i64 - 1) * (r * r - 1)
}

pub fn dim_hyperpolygon_space(q: &CometQuiver) -> i64 {
    2 * dim_polygon_space(q)
}

/// Negative predicted dimension.
pub fn empty_likely(q: &CometQuiver) -> bool {
    dim_polygon_space(q) < 0
}

/// Number of complete arms; rank-2 arms count as complete.
pub fn complete_arm_count(q: &CometQuiver) -> Result<usize> {
    let mut c = 0;
    for (i, f) in q.arms().iter().enumerate() {
        if f.is_complete() {
            c += 1;
        } else if !f.is_minimal() {
            return Err(Error::UnsupportedFlagType { arm: i, flag: f.entries().to_vec() });
        }
    }
    Ok(c)
}

/// `c r(r-1)/2 + (n-c)(r-1) + (g-1)(r^2-1)` with `c` complete arms.
pub fn count_gt_hamiltonians(q: &CometQuiver) -> Result<i64> {
    let c = complete_arm_count(q)? as i64;
    let n = q.n_arms() as i64;
    let r = q.central_rank() as i64;
    let g = q.loops() as i64;
    Ok(c * r * (r - 1) / 2 + (n - c) * (r - 1) + (g - 1) * (r * r - 1))
}

/// Merge `n` identical tame arms into a single arm carrying `n` parallel
/// arrows on every edge.
pub fn wildify(q: &CometQuiver) -> Result<CometQuiver> {
    if !q.is_tame() {
        return Err(Error::InvalidQuiver("wildify expects a tame comet".into()));
    }
    let Some(first) = q.arms().first() else {
        return Ok(q.clone());
    };
    if q.arms().iter().any(|f| f != first) {
        return Err(Error::NonIdenticalArms);
    }
    let n = q.n_arms();
    CometQuiver::with_rank(
        q.central_rank(),
        vec![first.entries().to_vec()],
        q.loops(),
        Some(vec![vec![n; first.len() - 1]]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d4() -> CometQuiver {
        build_comet(vec![vec![1, 2]; 4], 0, None).unwrap()
    }

    #[test]
    fn builds_affine_d4_star() {
        let q = d4();
        assert_eq!(q.central_rank(), 2);
        assert_eq!(q.n_arms(), 4);
        assert_eq!(q.loops(), 0);
    }

    #[test]
    fn builds_single_arm_with_loops() {
        let q = build_comet(vec![vec![1, 2, 3]], 2, None).unwrap();
        assert_eq!((q.central_rank(), q.n_arms(), q.loops()), (3, 1, 2));
    }

    #[test]
    fn rejects_mismatched_ranks_and_bad_flags() {
        assert!(matches!(build_comet(vec![vec![1, 2], vec![1, 3]], 0, None), Err(Error::MismatchedCentralRank(_))));
        assert!(matches!(build_comet(vec![vec![2, 1]], 0, None), Err(Error::InvalidFlag(_))));
        assert!(matches!(build_comet(vec![vec![]], 0, None), Err(Error::InvalidFlag(_))));
        assert!(matches!(build_comet(vec![vec![0, 1]], 0, None), Err(Error::InvalidFlag(_))));
    }

    #[test]
    fn flag_dimensions() {
        assert_eq!(flag_dim(&FlagString::new(vec![1, 2, 3]).unwrap()), 3);
        assert_eq!(flag_dim(&FlagString::new(vec![1, 5]).unwrap()), 4);
        assert_eq!(flag_dim(&FlagString::new(vec![2, 4, 5]).unwrap()), 8);
    }

    #[test]
    fn polygon_dimensions() {
        assert_eq!(dim_polygon_space(&d4()), 1);
        assert_eq!(dim_polygon_space(&CometQuiver::complete(3, 4, 0).unwrap()), 4);
        let loops_only = CometQuiver::with_rank(2, vec![], 1, None).unwrap();
        assert_eq!(dim_polygon_space(&loops_only), 0);
        assert!(empty_likely(&CometQuiver::minimal(3, 3, 0).unwrap()));
    }

    #[test]
    fn hyperpolygon_dimensions() {
        assert_eq!(dim_hyperpolygon_space(&d4()), 2);
        assert_eq!(dim_hyperpolygon_space(&CometQuiver::complete(3, 4, 0).unwrap()), 8);
        let loops_only = CometQuiver::with_rank(2, vec![], 2, None).unwrap();
        assert_eq!(dim_hyperpolygon_space(&loops_only), 6);
    }

    #[test]
    fn gt_tally() {
        assert_eq!(count_gt_hamiltonians(&CometQuiver::complete(2, 4, 0).unwrap()).unwrap(), 1);
        assert_eq!(count_gt_hamiltonians(&CometQuiver::complete(3, 3, 1).unwrap()).unwrap(), 9);
        let odd = build_comet(vec![vec![1, 2, 4], vec![1, 4]], 0, None).unwrap();
        assert!(matches!(count_gt_hamiltonians(&odd), Err(Error::UnsupportedFlagType { arm: 0, .. })));
    }

    #[test]
    fn wildify_merges_identical_arms() {
        let w = wildify(&d4()).unwrap();
        assert_eq!(w.n_arms(), 1);
        assert_eq!(w.multiplicities(), &[vec![4]]);
        assert_eq!(w.central_rank(), 2);

        let single = build_comet(vec![vec![1, 2, 3]], 1, None).unwrap();
        assert_eq!(wildify(&single).unwrap(), single);

        let mixed = build_comet(vec![vec![1, 2], vec![1, 2, 3]], 0, None);
        // mismatched ranks are caught first; use equal ranks with different strings
        assert!(mixed.is_err());
        let mixed = build_comet(vec![vec![1, 3], vec![1, 2, 3]], 0, None).unwrap();
        assert!(matches!(wildify(&mixed), Err(Error::NonIdenticalArms)));
    }

    #[test]
    fn gauge_dim_of_d4() {
        assert_eq!(d4().gauge_dim(), 7);
    }

    #[test]
    fn interior_counts() {
        let q = CometQuiver::complete(4, 2, 0).unwrap();
        assert_eq!(q.interior_node_count(), 4);
        assert_eq!(q.printed_interior_node_count(), 2);
    }

    fn arb_quiver() -> impl Strategy<Value = CometQuiver> {
        (2usize..5, 0usize..5, 0usize..3, any::<u64>()).prop_filter_map("need n+g>=1", |(r, n, g, bits)| {
            if n + g == 0 {
                return None;
            }
            let arms = (0..n)
                .map(|i| if (bits >> i) & 1 == 1 { FlagString::complete(r).0 } else { FlagString::minimal(r).0 })
                .collect();
            CometQuiver::with_rank(r, arms, g, None).ok()
        })
    }

    proptest! {
        #[test]
        fn hyperpolygon_dim_doubles(q in arb_quiver()) {
            prop_assert_eq!(dim_hyperpolygon_space(&q), 2 * dim_polygon_space(&q));
        }

        #[test]
        fn tally_matches_polygon_dim(q in arb_quiver()) {
            prop_assert_eq!(count_gt_hamiltonians(&q).unwrap(), dim_polygon_space(&q));
        }

        #[test]
        fn complete_minus_minimal(r in 1usize..12) {
            let diff = FlagString::complete(r).dim() as i64 - FlagString::minimal(r).dim() as i64;
            let r = r as i64;
            prop_assert_eq!(diff, r * (r - 1) / 2 - (r - 1).max(0));
            prop_assert!(diff >= 0);
        }

        #[test]
        fn wildify_preserves_counts(r in 2usize..5, n in 1usize..5, g in 0usize..3, complete in any::<bool>()) {
            let q = if complete { CometQuiver::complete(r, n, g) } else { CometQuiver::minimal(r, n, g) }.unwrap();
            let w = wildify(&q).unwrap();
            prop_assert_eq!(w.central_rank(), q.central_rank());
            prop_assert_eq!(w.loops(), q.loops());
            prop_assert_eq!(w.x_edge_count(), q.x_edge_count());
        }
    }
}
