//! Admissible decompositions of a variable set.
//!
//! A [`RegionLattice`] is a family of variable subsets that contains the empty
//! region and is closed under pairwise intersection. Regions are stored in a
//! fixed topological order (decreasing size, ties broken lexicographically) so
//! that every superset of a region comes before it, and every iteration over
//! regions, arrows and chains in this crate is deterministic.
//!
//! Arrows are all strict inclusions `α ⊋ β`, not only covering pairs.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VarId = u32;

/// A discrete variable and the size of its state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableSpec {
    pub id: VarId,
    pub cardinality: usize,
}

impl VariableSpec {
    pub fn new(id: VarId, cardinality: usize) -> Self {
        Self { id, cardinality }
    }
}

/// Declared variables, keyed by id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variables {
    cards: BTreeMap<VarId, usize>,
}

impl Variables {
    pub fn new(specs: &[VariableSpec]) -> Result<Self> {
        let mut cards = BTreeMap::new();
        for spec in specs {
            if spec.cardinality < 2 {
                return Err(Error::InvalidVariable(format!(
                    "variable {} has cardinality {} (need at least 2)",
                    spec.id, spec.cardinality
                )));
            }
            if cards.insert(spec.id, spec.cardinality).is_some() {
                return Err(Error::InvalidVariable(format!(
                    "variable {} declared twice",
                    spec.id
                )));
            }
        }
        Ok(Self { cards })
    }

    /// All variables with the same cardinality.
    pub fn uniform(ids: impl IntoIterator<Item = VarId>, cardinality: usize) -> Result<Self> {
        let specs: Vec<_> = ids
            .into_iter()
            .map(|id| VariableSpec::new(id, cardinality))
            .collect();
        Self::new(&specs)
    }

    pub fn cardinality(&self, id: VarId) -> Option<usize> {
        self.cards.get(&id).copied()
    }

    pub fn specs(&self) -> Vec<VariableSpec> {
        self.cards
            .iter()
            .map(|(&id, &cardinality)| VariableSpec { id, cardinality })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    /// The region holding every declared variable.
    pub fn universe(&self) -> Region {
        Region(self.cards.keys().copied().collect())
    }

    pub fn check(&self, region: &Region) -> Result<()> {
        match region.vars().iter().find(|v| !self.cards.contains_key(v)) {
            Some(&v) => Err(Error::UnknownVariable(v)),
            None => Ok(()),
        }
    }

    /// Cardinalities of the region's variables in sorted id order.
    ///
    /// Panics if the region references an undeclared variable.
    pub fn dims(&self, region: &Region) -> Vec<usize> {
        region.vars().iter().map(|v| self.cards[v]).collect()
    }

    /// `|E_region|`, saturating at `u128::MAX`.
    pub fn state_count(&self, region: &Region) -> u128 {
        region
            .vars()
            .iter()
            .map(|v| self.cards[v] as u128)
            .fold(1u128, |acc, k| acc.saturating_mul(k))
    }
}

/// A sorted, duplicate-free set of variable ids. The empty region is valid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "Vec<VarId>", into = "Vec<VarId>")]
pub struct Region(Vec<VarId>);

impl From<Vec<VarId>> for Region {
    fn from(vars: Vec<VarId>) -> Self {
        Region::new(vars)
    }
}

impl From<Region> for Vec<VarId> {
    fn from(region: Region) -> Self {
        region.0
    }
}

impl<const N: usize> From<[VarId; N]> for Region {
    fn from(vars: [VarId; N]) -> Self {
        Region::new(vars.to_vec())
    }
}

impl Region {
    pub fn new(mut vars: Vec<VarId>) -> Self {
        vars.sort_unstable();
        vars.dedup();
        Region(vars)
    }

    pub fn empty() -> Self {
        Region(Vec::new())
    }

    pub fn vars(&self) -> &[VarId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.0.binary_search(&var).is_ok()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        let mut it = other.0.iter();
        'outer: for v in &self.0 {
            for w in it.by_ref() {
                if w == v {
                    continue 'outer;
                }
                if w > v {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn is_strict_subset(&self, other: &Region) -> bool {
        self.len() < other.len() && self.is_subset(other)
    }

    pub fn intersection(&self, other: &Region) -> Region {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        Region(out)
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut vars = self.0.clone();
        vars.extend_from_slice(&other.0);
        Region::new(vars)
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region(
            self.0
                .iter()
                .copied()
                .filter(|v| !other.contains(*v))
                .collect(),
        )
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A strict inclusion `source ⊋ target`, by region index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
}

/// A non-degenerate chain `α₀ ⊋ α₁ ⊋ … ⊋ α_p`, by region index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain {
    pub regions: Vec<usize>,
}

impl Chain {
    pub fn degree(&self) -> usize {
        self.regions.len().saturating_sub(1)
    }

    /// The smallest region of the chain, where its observables live.
    pub fn terminal(&self) -> usize {
        *self.regions.last().expect("chains are non-empty")
    }

    /// The face obtained by dropping the `k`-th region.
    pub fn face(&self, k: usize) -> Chain {
        let mut regions = self.regions.clone();
        regions.remove(k);
        Chain { regions }
    }
}

#[derive(Debug, Clone)]
pub struct RegionLattice {
    variables: Variables,
    regions: Vec<Region>,
    index: HashMap<Region, usize>,
    arrows: Vec<Arrow>,
    arrow_index: HashMap<(usize, usize), usize>,
    // below[a]: indices b with b ⊆ a (a included), ascending
    below: Vec<Vec<usize>>,
    // above[b]: indices a with a ⊇ b (b included), ascending
    above: Vec<Vec<usize>>,
    signature: u64,
}

impl PartialEq for RegionLattice {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.regions == other.regions
            && self.variables == other.variables
    }
}

impl RegionLattice {
    /// Closes `generators` under pairwise intersection and adds the empty region.
    pub fn build(generators: &[Region], variables: &[VariableSpec]) -> Result<Self> {
        let variables = Variables::new(variables)?;
        Self::with_variables(generators, variables)
    }

    pub fn with_variables(generators: &[Region], variables: Variables) -> Result<Self> {
        for g in generators {
            variables.check(g)?;
        }
        let mut set: BTreeSet<Region> = generators.iter().cloned().collect();
        set.insert(Region::empty());
        loop {
            let current: Vec<Region> = set.iter().cloned().collect();
            let mut added = false;
            for (i, a) in current.iter().enumerate() {
                for b in &current[i + 1..] {
                    if set.insert(a.intersection(b)) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        let mut regions: Vec<Region> = set.into_iter().collect();
        regions.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        Ok(Self::from_sorted(regions, variables))
    }

    fn from_sorted(regions: Vec<Region>, variables: Variables) -> Self {
        let n = regions.len();
        let index: HashMap<Region, usize> = regions
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i))
            .collect();
        let mut below = vec![Vec::new(); n];
        let mut above = vec![Vec::new(); n];
        let mut arrows = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if regions[b].is_subset(&regions[a]) {
                    below[a].push(b);
                    above[b].push(a);
                    if a != b {
                        arrows.push(Arrow {
                            source: a,
                            target: b,
                        });
                    }
                }
            }
        }
        let arrow_index = arrows
            .iter()
            .enumerate()
            .map(|(k, ar)| ((ar.source, ar.target), k))
            .collect();
        let mut hasher = DefaultHasher::new();
        regions.hash(&mut hasher);
        variables.hash(&mut hasher);
        Self {
            variables,
            regions,
            index,
            arrows,
            arrow_index,
            below,
            above,
            signature: hasher.finish(),
        }
    }

    pub fn variables(&self) -> &Variables {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// A fingerprint used to reject operands built on different lattices.
    pub fn signature(&self) -> u64 {
        self.signature
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, i: usize) -> &Region {
        &self.regions[i]
    }

    pub fn index_of(&self, region: &Region) -> Option<usize> {
        self.index.get(region).copied()
    }

    pub fn require(&self, region: &Region) -> Result<usize> {
        self.index_of(region)
            .ok_or_else(|| Error::RegionNotInLattice(region.clone()))
    }

    /// Index of the empty region (always the last one).
    pub fn empty_index(&self) -> usize {
        self.regions.len() - 1
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow_index(&self, source: usize, target: usize) -> Option<usize> {
        self.arrow_index.get(&(source, target)).copied()
    }

    /// Indices `β ⊆ α`, `α` included.
    pub fn below(&self, a: usize) -> &[usize] {
        &self.below[a]
    }

    /// Indices `α ⊇ β`, `β` included.
    pub fn above(&self, b: usize) -> &[usize] {
        &self.above[b]
    }

    pub fn includes(&self, a: usize, b: usize) -> bool {
        self.below[a].binary_search(&b).is_ok()
    }

    /// Regions not strictly contained in another region.
    pub fn maximal(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| self.above[a].len() == 1)
            .collect()
    }

    /// `|E_α|` for region index `a`.
    pub fn state_count(&self, a: usize) -> usize {
        self.variables.state_count(&self.regions[a]) as usize
    }

    /// All non-degenerate chains of `p + 1` regions.
    pub fn nerve(&self, p: usize) -> Vec<Chain> {
        let mut out = Vec::new();
        let mut stack = Vec::with_capacity(p + 1);
        for a in 0..self.len() {
            stack.push(a);
            self.extend_chains(&mut stack, p + 1, &mut out);
            stack.pop();
        }
        out
    }

    fn extend_chains(&self, stack: &mut Vec<usize>, len: usize, out: &mut Vec<Chain>) {
        if stack.len() == len {
            out.push(Chain {
                regions: stack.clone(),
            });
            return;
        }
        let last = *stack.last().unwrap();
        for &b in &self.below[last] {
            if b != last {
                stack.push(b);
                self.extend_chains(stack, len, out);
                stack.pop();
            }
        }
    }

    /// Length of the longest non-degenerate chain.
    pub fn dimension(&self) -> usize {
        let mut depth = vec![0usize; self.len()];
        // subsets come later in the order, so walk backwards
        for a in (0..self.len()).rev() {
            depth[a] = self.below[a]
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| depth[b] + 1)
                .max()
                .unwrap_or(0);
        }
        depth.into_iter().max().unwrap_or(0)
    }

    /// `Λ^α`: regions contained in `α`, as indices.
    pub fn subsystem(&self, alpha: &Region) -> Result<Vec<usize>> {
        let a = self.require(alpha)?;
        Ok(self.below[a].clone())
    }

    /// `δΛ^α`: arrows entering the subsystem from outside.
    pub fn coboundary_down(&self, alpha: &Region) -> Result<Vec<Arrow>> {
        let a = self.require(alpha)?;
        Ok(self.coboundary_down_of(a))
    }

    pub(crate) fn coboundary_down_of(&self, a: usize) -> Vec<Arrow> {
        self.arrows
            .iter()
            .filter(|ar| !self.includes(a, ar.source) && self.includes(a, ar.target))
            .copied()
            .collect()
    }

    /// `V_β`: regions containing `β`, as indices.
    pub fn cone_up(&self, beta: &Region) -> Result<Vec<usize>> {
        let b = self.require(beta)?;
        Ok(self.above[b].clone())
    }

    /// `δV_β`: arrows leaving the cone over `β`.
    pub fn coboundary_up(&self, beta: &Region) -> Result<Vec<Arrow>> {
        let b = self.require(beta)?;
        Ok(self.coboundary_up_of(b))
    }

    pub(crate) fn coboundary_up_of(&self, b: usize) -> Vec<Arrow> {
        self.arrows
            .iter()
            .filter(|ar| self.includes(ar.source, b) && !self.includes(ar.target, b))
            .copied()
            .collect()
    }

    pub(crate) fn check_same(&self, signature: u64) -> Result<()> {
        if signature == self.signature {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }
}
