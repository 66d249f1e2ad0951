//! Finite posets given by their cover relation.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Strictly increasing sequence of element ids.
pub type Chain = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PosetError {
    #[error("element name {0:?} appears twice")]
    DuplicateName(String),
    #[error("cover ({0}, {1}) refers to an element outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("cover ({0}, {0}) is a loop")]
    Loop(usize),
    #[error("cover ({0}, {1}) listed twice")]
    DuplicateCover(usize, usize),
    #[error("covers contain a cycle through {0:?}")]
    Cycle(Vec<String>),
    #[error("cover ({0}, {1}) is redundant: implied by a longer path")]
    Redundant(String, String),
    #[error("poset has no global minimum")]
    NoGlobalMinimum,
    #[error("element {0} does not cover the global minimum")]
    NotAnAtom(String),
    #[error("elements {0} and {1} are not comparable")]
    Incomparable(String, String),
}

pub struct Poset {
    names: Vec<String>,
    covers: Vec<(usize, usize)>,
    upper: Vec<Vec<usize>>,
    lower: Vec<Vec<usize>>,
    leq: Vec<Vec<bool>>,
    chains: OnceLock<Vec<Vec<Chain>>>,
}

impl Clone for Poset {
    fn clone(&self) -> Self {
        Self {
            names: self.names.clone(),
            covers: self.covers.clone(),
            upper: self.upper.clone(),
            lower: self.lower.clone(),
            leq: self.leq.clone(),
            chains: OnceLock::new(),
        }
    }
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.covers == other.covers
    }
}

impl Eq for Poset {}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let covers: Vec<String> =
            self.covers.iter().map(|&(a, b)| format!("{}<{}", self.names[a], self.names[b])).collect();
        write!(f, "Poset({:?}; {})", self.names, covers.join(", "))
    }
}

impl Poset {
    /// Validates a cover relation: no loops, duplicates, cycles or covers
    /// implied by longer paths.
    pub fn new(names: Vec<String>, covers: Vec<(usize, usize)>) -> Result<Self, PosetError> {
        let n = names.len();
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(PosetError::DuplicateName(name.clone()));
            }
        }
        let mut set = BTreeSet::new();
        for &(a, b) in &covers {
            if a >= n || b >= n {
                return Err(PosetError::OutOfRange(a, b, n));
            }
            if a == b {
                return Err(PosetError::Loop(a));
            }
            if !set.insert((a, b)) {
                return Err(PosetError::DuplicateCover(a, b));
            }
        }
        let mut upper = vec![Vec::new(); n];
        for &(a, b) in &set {
            upper[a].push(b);
        }
        let order = topological_order(&upper).ok_or_else(|| {
            let cyc = find_cycle(&upper);
            PosetError::Cycle(cyc.into_iter().map(|i| names[i].clone()).collect())
        })?;
        // closure in reverse topological order
        let mut leq = vec![vec![false; n]; n];
        for &a in order.iter().rev() {
            leq[a][a] = true;
            for &b in &upper[a] {
                let row = leq[b].clone();
                for (dst, src) in leq[a].iter_mut().zip(row) {
                    *dst |= src;
                }
            }
        }
        for &(a, b) in &set {
            if upper[a].iter().any(|&c| c != b && leq[c][b]) {
                return Err(PosetError::Redundant(names[a].clone(), names[b].clone()));
            }
        }
        Ok(Self::assemble(names, set.into_iter().collect(), leq))
    }

    /// Builds a poset from a reflexive, antisymmetric, transitive relation.
    pub fn from_leq(names: Vec<String>, leq: Vec<Vec<bool>>) -> Self {
        let n = names.len();
        let mut covers = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && leq[a][b] && !(0..n).any(|c| c != a && c != b && leq[a][c] && leq[c][b]) {
                    covers.push((a, b));
                }
            }
        }
        Self::assemble(names, covers, leq)
    }

    fn assemble(names: Vec<String>, covers: Vec<(usize, usize)>, leq: Vec<Vec<bool>>) -> Self {
        let n = names.len();
        let mut upper = vec![Vec::new(); n];
        let mut lower = vec![Vec::new(); n];
        for &(a, b) in &covers {
            upper[a].push(b);
            lower[b].push(a);
        }
        for l in lower.iter_mut() {
            l.sort_unstable();
        }
        Self { names, covers, upper, lower, leq, chains: OnceLock::new() }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Cover pairs `(u, v)` with `u ≺ v`, sorted.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn upper_covers(&self, x: usize) -> &[usize] {
        &self.upper[x]
    }

    pub fn lower_covers(&self, x: usize) -> &[usize] {
        &self.lower[x]
    }

    pub fn is_cover(&self, u: usize, v: usize) -> bool {
        self.upper[u].contains(&v)
    }

    pub fn leq(&self, u: usize, v: usize) -> bool {
        self.leq[u][v]
    }

    pub fn lt(&self, u: usize, v: usize) -> bool {
        u != v && self.leq[u][v]
    }

    pub fn comparable(&self, u: usize, v: usize) -> bool {
        self.leq[u][v] || self.leq[v][u]
    }

    pub fn leq_matrix(&self) -> &[Vec<bool>] {
        &self.leq
    }

    /// All `k`-chains (k+1 vertices), lexicographic by id.
    pub fn chains(&self, k: usize) -> &[Chain] {
        self.all_chains().get(k).map_or(&[], |v| v.as_slice())
    }

    /// Chains grouped by length; index `k` holds the `k`-chains.
    pub fn all_chains(&self) -> &[Vec<Chain>] {
        self.chains.get_or_init(|| self.enumerate_chains())
    }

    /// Length of the longest chain (−1 for the empty poset is reported as 0).
    pub fn height(&self) -> usize {
        self.all_chains().len().saturating_sub(1)
    }

    fn enumerate_chains(&self) -> Vec<Vec<Chain>> {
        let n = self.len();
        let mut out: Vec<Vec<Chain>> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        fn walk(p: &Poset, stack: &mut Vec<usize>, out: &mut Vec<Vec<Chain>>) {
            let k = stack.len() - 1;
            if out.len() <= k {
                out.push(Vec::new());
            }
            out[k].push(stack.clone());
            let last = *stack.last().unwrap();
            for next in 0..p.len() {
                if p.lt(last, next) {
                    stack.push(next);
                    walk(p, stack, out);
                    stack.pop();
                }
            }
        }
        for x in 0..n {
            stack.push(x);
            walk(self, &mut stack, &mut out);
            stack.pop();
        }
        for level in out.iter_mut() {
            level.sort();
        }
        out
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.lower[x].is_empty()).collect()
    }

    pub fn global_minimum(&self) -> Option<usize> {
        (0..self.len()).find(|&z| (0..self.len()).all(|y| self.leq[z][y]))
    }

    /// Elements covering the global minimum, in id order.
    pub fn atoms(&self) -> Result<Vec<usize>, PosetError> {
        let zero = self.global_minimum().ok_or(PosetError::NoGlobalMinimum)?;
        Ok(self.upper[zero].iter().copied().collect::<BTreeSet<_>>().into_iter().collect())
    }

    pub fn view(&self, members: impl IntoIterator<Item = usize>) -> SubposetView<'_> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        SubposetView { parent: self, members }
    }

    /// `B(x) = {z : x ≤ z}`.
    pub fn up_set(&self, x: usize) -> SubposetView<'_> {
        self.view((0..self.len()).filter(|&z| self.leq[x][z]))
    }

    /// `B̄(x) = B ∖ B(x)`.
    pub fn complement_up_set(&self, x: usize) -> SubposetView<'_> {
        self.view((0..self.len()).filter(|&z| !self.leq[x][z]))
    }

    /// `B(x, y) = {z ∈ B(x) : y ≤ z}`.
    pub fn relative_up_set(&self, x: usize, y: usize) -> SubposetView<'_> {
        self.view((0..self.len()).filter(|&z| self.leq[x][z] && self.leq[y][z]))
    }

    pub fn is_admissible_at(&self, x: usize) -> Result<bool, PosetError> {
        let zero = self.global_minimum().ok_or(PosetError::NoGlobalMinimum)?;
        if !self.is_cover(zero, x) {
            return Err(PosetError::NotAnAtom(self.names[x].clone()));
        }
        let ok =
            self.complement_up_set(x).members().iter().all(|&y| self.relative_up_set(x, y).unique_minimum().is_some());
        Ok(ok)
    }

    /// First atom (in id order) at which the poset is admissible.
    pub fn find_admissible_witness(&self) -> Result<Option<usize>, PosetError> {
        for a in self.atoms()? {
            if self.is_admissible_at(a)? {
                return Ok(Some(a));
            }
        }
        Ok(None)
    }

    /// Decomposition tree when recursively admissible, `None` otherwise.
    pub fn recursive_decomposition(&self) -> Option<DecompositionTree> {
        self.global_minimum()?;
        if self.len() == 1 {
            return Some(DecompositionTree::Leaf { element: self.names[0].clone() });
        }
        for a in self.atoms().ok()? {
            if !self.is_admissible_at(a).ok()? {
                continue;
            }
            let (up, _) = self.up_set(a).to_poset();
            let (down, _) = self.complement_up_set(a).to_poset();
            let Some(upper) = up.recursive_decomposition() else { continue };
            let Some(lower) = down.recursive_decomposition() else { continue };
            return Some(DecompositionTree::Split {
                witness: self.names[a].clone(),
                upper: Box::new(upper),
                lower: Box::new(lower),
            });
        }
        None
    }

    pub fn is_recursively_admissible(&self) -> bool {
        self.recursive_decomposition().is_some()
    }
}

/// Subset of a poset with the inherited order.
#[derive(Clone, Debug)]
pub struct SubposetView<'a> {
    parent: &'a Poset,
    members: Vec<usize>,
}

impl<'a> SubposetView<'a> {
    pub fn parent(&self) -> &'a Poset {
        self.parent
    }

    /// Parent ids, ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    /// The unique minimal member, if there is exactly one.
    pub fn unique_minimum(&self) -> Option<usize> {
        let p = self.parent;
        let mut minimal = self.members.iter().copied().filter(|&z| !self.members.iter().any(|&w| p.lt(w, z)));
        let first = minimal.next()?;
        minimal.next().is_none().then_some(first)
    }

    /// Standalone poset with local ids; `map[local] = parent id`.
    pub fn to_poset(&self) -> (Poset, Vec<usize>) {
        let p = self.parent;
        let names = self.members.iter().map(|&x| p.names[x].clone()).collect();
        let leq = self.members.iter().map(|&a| self.members.iter().map(|&b| p.leq[a][b]).collect()).collect();
        (Poset::from_leq(names, leq), self.members.clone())
    }
}

/// Witness tree of a recursively admissible poset.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum DecompositionTree {
    Leaf { element: String },
    Split { witness: String, upper: Box<DecompositionTree>, lower: Box<DecompositionTree> },
}

impl DecompositionTree {
    pub fn depth(&self) -> usize {
        match self {
            Self::Leaf { .. } => 0,
            Self::Split { upper, lower, .. } => 1 + upper.depth().max(lower.depth()),
        }
    }
}

fn topological_order(upper: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = upper.len();
    let mut indeg = vec![0usize; n];
    for succ in upper {
        for &b in succ {
            indeg[b] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(a) = ready.pop() {
        order.push(a);
        for &b in &upper[a] {
            indeg[b] -= 1;
            if indeg[b] == 0 {
                ready.push(b);
            }
        }
    }
    (order.len() == n).then_some(order)
}

fn find_cycle(upper: &[Vec<usize>]) -> Vec<usize> {
    // 0 unvisited, 1 on stack, 2 done
    fn dfs(a: usize, upper: &[Vec<usize>], state: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        state[a] = 1;
        stack.push(a);
        for &b in &upper[a] {
            if state[b] == 1 {
                let start = stack.iter().position(|&s| s == b).unwrap();
                return Some(stack[start..].to_vec());
            }
            if state[b] == 0 {
                if let Some(c) = dfs(b, upper, state, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        state[a] = 2;
        None
    }
    let mut state = vec![0u8; upper.len()];
    for a in 0..upper.len() {
        if state[a] == 0 {
            if let Some(c) = dfs(a, upper, &mut state, &mut Vec::new()) {
                return c;
            }
        }
    }
    Vec::new()
}

/// Subsets of `{1..n}` ordered by inclusion; ids are bitmasks.
pub fn boolean_lattice(n: usize) -> Poset {
    let size = 1usize << n;
    let names = (0..size)
        .map(|m| {
            let items: Vec<String> = (0..n).filter(|i| m >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
            format!("{{{}}}", items.join(","))
        })
        .collect();
    let covers =
        (0..size).flat_map(|m| (0..n).filter(move |i| m >> i & 1 == 0).map(move |i| (m, m | 1 << i))).collect();
    Poset::new(names, covers).expect("boolean lattice is a valid poset")
}

/// `0 < 1 < … < n-1`.
pub fn chain_poset(n: usize) -> Poset {
    let names = (0..n).map(|i| i.to_string()).collect();
    Poset::new(names, (1..n).map(|i| (i - 1, i)).collect()).expect("chain is a valid poset")
}

/// Antichain with `n` elements.
pub fn antichain(n: usize) -> Poset {
    Poset::new((0..n).map(|i| i.to_string()).collect(), Vec::new()).expect("antichain is valid")
}

/// Each relation `i < j` (i < j as ids) is drawn with probability `density`,
/// then closed transitively.
pub fn random_poset(n: usize, density: f64, seed: u64) -> Poset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_poset_with(n, density, &mut rng)
}

pub fn random_poset_with<R: Rng>(n: usize, density: f64, rng: &mut R) -> Poset {
    let mut leq = vec![vec![false; n]; n];
    for (i, row) in leq.iter_mut().enumerate() {
        row[i] = true;
        for cell in row.iter_mut().skip(i + 1) {
            *cell = rng.gen_bool(density.clamp(0.0, 1.0));
        }
    }
    for k in 0..n {
        for i in 0..n {
            if leq[i][k] {
                for j in 0..n {
                    if leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
    }
    Poset::from_leq((0..n).map(|i| i.to_string()).collect(), leq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn validation_errors() {
        assert!(Poset::new(names(&["a"]), vec![]).is_ok());
        assert!(matches!(Poset::new(names(&["a", "b"]), vec![(0, 1), (1, 0)]), Err(PosetError::Cycle(_))));
        let err = Poset::new(names(&["a", "b", "c"]), vec![(0, 1), (1, 2), (0, 2)]).unwrap_err();
        assert_eq!(err, PosetError::Redundant("a".into(), "c".into()));
        assert!(matches!(Poset::new(names(&["a", "a"]), vec![]), Err(PosetError::DuplicateName(_))));
        assert!(matches!(Poset::new(names(&["a"]), vec![(0, 0)]), Err(PosetError::Loop(0))));
        assert!(matches!(Poset::new(names(&["a"]), vec![(0, 3)]), Err(PosetError::OutOfRange(..))));
    }

    #[test]
    fn order_queries() {
        let c = chain_poset(3);
        assert!(c.leq(0, 2));
        assert!(!c.leq(2, 0));
        let b = boolean_lattice(2);
        assert!(!b.leq(1, 2));
        assert_eq!(b.len(), 4);
        assert_eq!(b.covers().len(), 4);
        assert_eq!(c.covers().len(), 2);
    }

    #[test]
    fn chain_enumeration() {
        let c = chain_poset(3);
        assert_eq!(c.chains(0), &[vec![0], vec![1], vec![2]]);
        assert_eq!(c.chains(1), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        let b = boolean_lattice(2);
        assert_eq!(b.chains(2), &[vec![0, 1, 3], vec![0, 2, 3]]);
        assert!(b.chains(3).is_empty());
        assert_eq!(b.height(), 2);
    }

    #[test]
    fn up_sets() {
        let b = boolean_lattice(2);
        assert_eq!(b.up_set(1).members(), &[1, 3]);
        assert_eq!(b.complement_up_set(1).members(), &[0, 2]);
        assert_eq!(b.relative_up_set(1, 2).members(), &[3]);
        assert_eq!(b.relative_up_set(1, 2).unique_minimum(), Some(3));
        assert_eq!(b.view([]).unique_minimum(), None);
        assert_eq!(antichain(2).view([0, 1]).unique_minimum(), None);
    }

    #[test]
    fn admissibility() {
        let b = boolean_lattice(2);
        assert!(b.is_admissible_at(1).unwrap());
        let v = Poset::new(names(&["0", "a", "b"]), vec![(0, 1), (0, 2)]).unwrap();
        assert!(!v.is_admissible_at(1).unwrap());
        assert!(!v.is_recursively_admissible());
        let c = chain_poset(3);
        assert!(c.is_admissible_at(1).unwrap());
        assert!(matches!(c.is_admissible_at(2), Err(PosetError::NotAnAtom(_))));
        assert!(matches!(antichain(2).is_admissible_at(0), Err(PosetError::NoGlobalMinimum)));
        assert!(chain_poset(2).is_recursively_admissible());
        assert!(chain_poset(1).is_recursively_admissible());
        for n in 1..=4 {
            assert!(boolean_lattice(n).is_recursively_admissible(), "B_{n}");
        }
        assert_eq!(b.find_admissible_witness().unwrap(), Some(1));
    }

    #[test]
    fn random_is_reproducible() {
        assert_eq!(random_poset(6, 0.3, 42), random_poset(6, 0.3, 42));
    }
}
