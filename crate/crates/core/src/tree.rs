//! Leveled rooted trees: base-`r` Hausdorff content by min-cut, fertile
//! ancestry, the content-driven thinning and equal-split flows.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::digits::Radix;
use crate::interval::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub level: u32,
    pub index: u32,
}

impl NodeId {
    pub const ROOT: NodeId = NodeId { level: 0, index: 0 };

    pub fn new(level: u32, index: u32) -> NodeId {
        NodeId { level, index }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeError {
    NoRoot,
    BadParent { node: NodeId, parent: u32 },
    Childless(NodeId),
    PayloadShape,
    EmptyLeafSet,
    TooManyChildren { node: NodeId, children: usize },
    NonPositiveB(f64),
    GammaOrder,
    EpsilonRange(f64),
    RegularityMargin { b_ratio: f64, needed: f64 },
    ContentBelowV { content: f64, v: f64 },
    InequalityFailed(NodeId),
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::NoRoot => write!(f, "level 0 must hold exactly one node"),
            TreeError::BadParent { node, parent } => {
                write!(f, "node {}/{} names missing parent {}", node.level, node.index, parent)
            }
            TreeError::Childless(q) => write!(f, "non-leaf {}/{} has no children", q.level, q.index),
            TreeError::PayloadShape => write!(f, "payloads do not match the level sizes"),
            TreeError::EmptyLeafSet => write!(f, "a subtree needs at least one leaf"),
            TreeError::TooManyChildren { node, children } => {
                write!(f, "node {}/{} has {} children, above r^γ₅", node.level, node.index, children)
            }
            TreeError::NonPositiveB(b) => write!(f, "B = γ₄ − γ₃ − log_r 2 = {b} is not positive"),
            TreeError::GammaOrder => write!(f, "need 0 < γ₃ < γ₄ < γ₅ < γ₄ + ε(γ₄ − γ₃)"),
            TreeError::EpsilonRange(e) => write!(f, "ε = {e} is not in (0, 1)"),
            TreeError::RegularityMargin { b_ratio, needed } => {
                write!(f, "B/(A+B) = {b_ratio} does not exceed 1 − ε = {needed}; r is too small")
            }
            TreeError::ContentBelowV { content, v } => write!(f, "content {content} is below V = {v}"),
            TreeError::InequalityFailed(q) => {
                write!(f, "fertility inequality fails at node {}/{}", q.level, q.index)
            }
        }
    }
}

/// Tree of height `N` whose levels are stored as parent arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree<P = ()> {
    /// `parents[n][i]` is the parent index (in level `n−1`) of node `i` of level `n`; empty for `n = 0`.
    parents: Vec<Vec<u32>>,
    children: Vec<Vec<Vec<u32>>>,
    payloads: Vec<Vec<P>>,
}

impl<P: Clone> Tree<P> {
    pub fn from_parents(parents: Vec<Vec<u32>>, payloads: Vec<Vec<P>>) -> Result<Tree<P>, TreeError> {
        if parents.first().is_none_or(|p| p.len() != 1) {
            return Err(TreeError::NoRoot);
        }
        if payloads.len() != parents.len() || payloads.iter().zip(&parents).any(|(a, b)| a.len() != b.len()) {
            return Err(TreeError::PayloadShape);
        }
        let height = parents.len() - 1;
        let mut children: Vec<Vec<Vec<u32>>> = Vec::with_capacity(height + 1);
        for n in 0..=height {
            children.push(vec![Vec::new(); parents[n].len()]);
        }
        for n in 1..=height {
            let up = parents[n - 1].len() as u32;
            for (i, &p) in parents[n].iter().enumerate() {
                if p >= up {
                    return Err(TreeError::BadParent { node: NodeId::new(n as u32, i as u32), parent: p });
                }
                children[n - 1][p as usize].push(i as u32);
            }
        }
        for n in 0..height {
            if let Some(i) = children[n].iter().position(|c| c.is_empty()) {
                return Err(TreeError::Childless(NodeId::new(n as u32, i as u32)));
            }
        }
        // level 0 stores a dummy parent entry only to fix the root count
        let mut parents = parents;
        parents[0].clear();
        Ok(Tree { parents, children, payloads })
    }

    pub fn height(&self) -> u32 {
        (self.payloads.len() - 1) as u32
    }

    pub fn level_len(&self, n: u32) -> usize {
        self.payloads[n as usize].len()
    }

    pub fn node_count(&self) -> usize {
        self.payloads.iter().map(Vec::len).sum()
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        let n = self.height();
        (0..self.level_len(n) as u32).map(move |i| NodeId::new(n, i))
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..=self.height()).flat_map(move |n| (0..self.level_len(n) as u32).map(move |i| NodeId::new(n, i)))
    }

    pub fn payload(&self, q: NodeId) -> &P {
        &self.payloads[q.level as usize][q.index as usize]
    }

    pub fn parent(&self, q: NodeId) -> Option<NodeId> {
        if q.level == 0 {
            return None;
        }
        Some(NodeId::new(q.level - 1, self.parents[q.level as usize][q.index as usize]))
    }

    pub fn parent_indices(&self, level: u32) -> &[u32] {
        &self.parents[level as usize]
    }

    pub fn children(&self, q: NodeId) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.children[q.level as usize][q.index as usize].iter().map(move |&i| NodeId::new(q.level + 1, i))
    }

    pub fn child_count(&self, q: NodeId) -> usize {
        self.children[q.level as usize][q.index as usize].len()
    }

    /// `A_Γ(Q)`, nearest first.
    pub fn ancestors(&self, q: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let mut cur = q;
        core::iter::from_fn(move || {
            let p = self.parent(cur)?;
            cur = p;
            Some(p)
        })
    }

    /// The subtree determined by a non-empty set of leaf indices.
    pub fn subtree_from_leaves(&self, leaves: &[u32]) -> Result<Tree<P>, TreeError> {
        if leaves.is_empty() {
            return Err(TreeError::EmptyLeafSet);
        }
        let h = self.height() as usize;
        let mut keep: Vec<Vec<bool>> = self.payloads.iter().map(|l| vec![false; l.len()]).collect();
        for &l in leaves {
            keep[h][l as usize] = true;
        }
        for n in (1..=h).rev() {
            for i in 0..keep[n].len() {
                if keep[n][i] {
                    keep[n - 1][self.parents[n][i] as usize] = true;
                }
            }
        }
        Ok(self.restrict(&keep))
    }

    /// Subtree built top-down: `choose(Q, children)` returns the children of
    /// `Q` to keep; an empty choice is replaced by the first child.
    pub fn select_children<F>(&self, mut choose: F) -> Tree<P>
    where
        F: FnMut(NodeId, &[NodeId]) -> Vec<NodeId>,
    {
        let h = self.height() as usize;
        let mut keep: Vec<Vec<bool>> = self.payloads.iter().map(|l| vec![false; l.len()]).collect();
        keep[0][0] = true;
        for n in 0..h {
            for i in 0..keep[n].len() {
                if !keep[n][i] {
                    continue;
                }
                let q = NodeId::new(n as u32, i as u32);
                let kids: Vec<NodeId> = self.children(q).collect();
                let mut chosen = choose(q, &kids);
                if chosen.is_empty() {
                    chosen.push(kids[0]);
                }
                for c in chosen {
                    debug_assert_eq!(self.parent(c), Some(q));
                    keep[n + 1][c.index as usize] = true;
                }
            }
        }
        self.restrict(&keep)
    }

    /// `keep` must be closed under parents, contain the root and give every
    /// kept non-leaf a kept child.
    fn restrict(&self, keep: &[Vec<bool>]) -> Tree<P> {
        let mut new_index: Vec<Vec<u32>> = Vec::with_capacity(keep.len());
        let mut parents = Vec::with_capacity(keep.len());
        let mut payloads = Vec::with_capacity(keep.len());
        for (n, k) in keep.iter().enumerate() {
            let mut map = vec![u32::MAX; k.len()];
            let mut par = Vec::new();
            let mut pay = Vec::new();
            for (i, &kept) in k.iter().enumerate() {
                if !kept {
                    continue;
                }
                map[i] = pay.len() as u32;
                pay.push(self.payloads[n][i].clone());
                par.push(if n == 0 { 0 } else { new_index[n - 1][self.parents[n][i] as usize] });
            }
            new_index.push(map);
            parents.push(par);
            payloads.push(pay);
        }
        Tree::from_parents(parents, payloads).expect("restriction of a tree is a tree")
    }

    /// The induced tree `Γ_Q` rooted at `q`.
    pub fn induced(&self, q: NodeId) -> Tree<P> {
        let mut parents = vec![vec![0u32]];
        let mut payloads = vec![vec![self.payload(q).clone()]];
        let mut frontier = vec![q.index];
        for n in q.level..self.height() {
            let mut next = Vec::new();
            let mut par = Vec::new();
            let mut pay = Vec::new();
            for (pi, &i) in frontier.iter().enumerate() {
                for &c in &self.children[n as usize][i as usize] {
                    next.push(c);
                    par.push(pi as u32);
                    pay.push(self.payloads[n as usize + 1][c as usize].clone());
                }
            }
            parents.push(par);
            payloads.push(pay);
            frontier = next;
        }
        Tree::from_parents(parents, payloads).expect("induced tree is a tree")
    }

    pub fn map_payloads<Q: Clone>(&self, mut f: impl FnMut(NodeId, &P) -> Q) -> Tree<Q> {
        let payloads = self
            .payloads
            .iter()
            .enumerate()
            .map(|(n, l)| l.iter().enumerate().map(|(i, p)| f(NodeId::new(n as u32, i as u32), p)).collect())
            .collect();
        Tree { parents: self.parents.clone(), children: self.children.clone(), payloads }
    }
}

impl Tree<()> {
    pub fn from_parent_lists(parents: Vec<Vec<u32>>) -> Result<Tree<()>, TreeError> {
        let payloads = parents.iter().map(|l| vec![(); l.len()]).collect();
        Tree::from_parents(parents, payloads)
    }

    pub fn path(height: u32) -> Tree<()> {
        Tree::full(1, height)
    }

    /// Every non-leaf has exactly `arity` children.
    pub fn full(arity: u32, height: u32) -> Tree<()> {
        let mut parents = vec![vec![0u32]];
        let mut width = 1u32;
        for _ in 0..height {
            parents.push((0..width * arity).map(|i| i / arity).collect());
            width *= arity;
        }
        Tree::from_parent_lists(parents).expect("full tree is well formed")
    }
}

/// `r^{-γ}` as an enclosure.
fn scale(r: Radix, gamma: f64) -> Interval {
    (-(Interval::point(r.get() as f64).ln() * Interval::point(gamma))).exp()
}

fn log_r(x: Interval, r: Radix) -> Interval {
    x.ln() / Interval::point(r.get() as f64).ln()
}

/// Content of every induced tree `Γ_Q`, measured from `Q` itself:
/// `H(Γ_Q) = min(1, r^{-γ} Σ_C H(Γ_C))`, leaves `1`.
///
/// Node choices (stop here or descend) are made on midpoints; the enclosures
/// are sums of what was chosen, so they bound the witness's cost.
pub fn relative_contents<P: Clone>(t: &Tree<P>, r: Radix, gamma: f64) -> Vec<Vec<Interval>> {
    let h = t.height() as usize;
    let f = scale(r, gamma);
    let mut out: Vec<Vec<Interval>> = t.payloads.iter().map(|l| vec![Interval::point(1.0); l.len()]).collect();
    for n in (0..h).rev() {
        for i in 0..out[n].len() {
            let sum = t.children[n][i].iter().fold(Interval::point(0.0), |acc, &c| acc + out[n + 1][c as usize]);
            let down = f * sum;
            if down.mid() < 1.0 {
                out[n][i] = down;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeContent {
    /// `H_r^γ(Γ)`, enclosed.
    pub value: Interval,
    pub cut: Vec<NodeId>,
}

/// `H_r^γ(Γ) = min over cuts of Σ r^{−height·γ}`, with a realizing cut.
pub fn content<P: Clone>(t: &Tree<P>, r: Radix, gamma: f64) -> TreeContent {
    let rel = relative_contents(t, r, gamma);
    let mut cut = Vec::new();
    let mut stack = vec![NodeId::ROOT];
    while let Some(q) = stack.pop() {
        let v = rel[q.level as usize][q.index as usize];
        // a node stops the cut exactly when its relative content was capped at 1
        if v == Interval::point(1.0) {
            cut.push(q);
        } else {
            stack.extend(t.children(q));
        }
    }
    cut.sort();
    TreeContent { value: rel[0][0], cut }
}

/// Σ over the cut of `r^{−height·γ}`, enclosed.
pub fn cut_cost(cut: &[NodeId], r: Radix, gamma: f64) -> Interval {
    let f = scale(r, gamma);
    cut.iter().fold(Interval::point(0.0), |acc, q| {
        let mut w = Interval::point(1.0);
        for _ in 0..q.level {
            w = w * f;
        }
        acc + w
    })
}

pub fn is_cut<P: Clone>(t: &Tree<P>, cut: &[NodeId]) -> bool {
    let mut marked: Vec<Vec<bool>> = t.payloads.iter().map(|l| vec![false; l.len()]).collect();
    for q in cut {
        marked[q.level as usize][q.index as usize] = true;
    }
    // propagate down: a leaf is covered when it or an ancestor is marked
    for n in 1..marked.len() {
        for i in 0..marked[n].len() {
            if marked[n - 1][t.parents[n][i] as usize] {
                marked[n][i] = true;
            }
        }
    }
    marked.last().is_some_and(|l| l.iter().all(|&m| m))
}

pub fn fertile_ancestor_count<P: Clone>(t: &Tree<P>, q: NodeId, c: f64) -> usize {
    t.ancestors(q).filter(|&a| t.child_count(a) as f64 >= c).count()
}

/// `|F_{Γ,c}(Q)| ≥ ω |A_Γ(Q)|`.
pub fn has_fertile_ancestry<P: Clone>(t: &Tree<P>, q: NodeId, c: f64, omega: f64) -> bool {
    fertile_ancestor_count(t, q, c) as f64 >= omega * q.level as f64
}

/// Fertile ancestor counts for every node, in one top-down pass.
pub fn fertile_counts<P: Clone>(t: &Tree<P>, c: f64) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = t.payloads.iter().map(|l| vec![0; l.len()]).collect();
    for n in 1..out.len() {
        for i in 0..out[n].len() {
            let p = t.parents[n][i] as usize;
            let fert = t.children[n - 1][p].len() as f64 >= c;
            out[n][i] = out[n - 1][p] + fert as u32;
        }
    }
    out
}

/// `A = γ₅ − γ₄ + log_r 2` and `B = γ₄ − γ₃ − log_r 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThinningParams {
    pub r: Radix,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
}

impl ThinningParams {
    fn log_r_2(&self) -> Interval {
        Interval::point(2.0).ln() / Interval::point(self.r.get() as f64).ln()
    }

    pub fn a(&self) -> Interval {
        Interval::point(self.gamma5) - Interval::point(self.gamma4) + self.log_r_2()
    }

    pub fn b(&self) -> Interval {
        Interval::point(self.gamma4) - Interval::point(self.gamma3) - self.log_r_2()
    }

    /// `r^{γ₃}` rounded up: the fertility threshold in children. Values within
    /// a relative `1e-12` of an integer round to it, so that `γ₃` typed as a
    /// decimal with `r^{γ₃}` integral behaves as intended.
    pub fn fertility_threshold(&self) -> usize {
        let c = libm::pow(self.r.get() as f64, self.gamma3);
        libm::ceil(c * (1.0 - 1e-12)) as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Thinning<P> {
    pub tree: Tree<P>,
    /// `log_r H_r^{γ₄}(Γ)` of the input tree, enclosed.
    pub log_content: Interval,
    /// Nodes where many children were kept, and where one child was kept alone.
    pub case_counts: [usize; 2],
}

/// Subtree in which every node `Q` satisfies
/// `|F_{Γ′, r^{γ₃}}(Q)| ≥ (|A_{Γ′}(Q)| B + log_r H_r^{γ₄}(Γ)) / (A + B)`.
///
/// At each kept node the children are ranked by the content of their induced
/// trees (ties by index). If at least `r^{γ₃}` of them reach `H r^{−A}`, all
/// such children are kept; otherwise the top child is kept alone, and it
/// reaches `H r^B`. The first case is preferred when both apply.
pub fn thin<P: Clone>(t: &Tree<P>, p: ThinningParams) -> Result<Thinning<P>, TreeError> {
    let b = p.b();
    if b.lo() <= 0.0 {
        return Err(TreeError::NonPositiveB(b.mid()));
    }
    let cap = Interval::point(p.r.get() as f64).powf(p.gamma5);
    for q in t.nodes() {
        let k = t.child_count(q);
        if !Interval::point(k as f64).certainly_le(cap) && k > 1 {
            return Err(TreeError::TooManyChildren { node: q, children: k });
        }
    }
    let rel = relative_contents(t, p.r, p.gamma4);
    let ra = (-(p.a() * Interval::point(p.r.get() as f64).ln())).exp();
    let need = p.fertility_threshold();
    let mut counts = [0usize; 2];
    let tree = t.select_children(|q, kids| {
        let hq = rel[q.level as usize][q.index as usize];
        let mut ranked: Vec<(Interval, NodeId)> =
            kids.iter().map(|&c| (rel[c.level as usize][c.index as usize], c)).collect();
        ranked.sort_by(|x, y| y.0.mid().partial_cmp(&x.0.mid()).unwrap_or(Ordering::Equal).then(x.1.cmp(&y.1)));
        let floor = (hq * ra).mid();
        let good: Vec<NodeId> = ranked.iter().filter(|(h, _)| h.mid() >= floor).map(|&(_, c)| c).collect();
        if good.len() >= need {
            counts[0] += 1;
            good
        } else {
            counts[1] += 1;
            vec![ranked[0].1]
        }
    });
    let log_content = log_r(rel[0][0], p.r);
    let out = Thinning { tree, log_content, case_counts: counts };
    match check_thinning(&out.tree, out.log_content, p) {
        Some(q) => Err(TreeError::InequalityFailed(q)),
        None => Ok(out),
    }
}

/// First node violating the thinning inequality, decided conservatively:
/// fertile ancestors are counted at the rounded-up threshold and the right
/// side is taken at its upper end.
pub fn check_thinning<P: Clone>(t: &Tree<P>, log_content: Interval, p: ThinningParams) -> Option<NodeId> {
    let need = p.fertility_threshold() as f64;
    let counts = fertile_counts(t, need);
    let (a, b) = (p.a(), p.b());
    for q in t.nodes() {
        let f = counts[q.level as usize][q.index as usize] as f64;
        let rhs = (Interval::point(q.level as f64) * b + log_content) / (a + b);
        if f < rhs.hi() {
            return Some(q);
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularSubtree<P> {
    pub thinning: Thinning<P>,
    /// Height from which fertile ancestry is guaranteed.
    pub n0: u32,
    /// `N < N₀`: the guarantee is vacuous for this tree.
    pub below_n0: bool,
}

/// `N₀` = the least `N ≥ 1` with `(N B + log_r V) / (N(A+B)) > 1 − ε`.
pub fn regular_n0(p: ThinningParams, epsilon: f64, v: f64) -> Result<u32, TreeError> {
    let (a, b) = (p.a(), p.b());
    let one_minus = Interval::point(1.0) - Interval::point(epsilon);
    let d = b - one_minus * (a + b);
    if d.lo() <= 0.0 {
        return Err(TreeError::RegularityMargin { b_ratio: (b / (a + b)).mid(), needed: one_minus.mid() });
    }
    let lv = log_r(Interval::point(v), p.r);
    let x = -lv / d;
    if x.hi() < 0.0 {
        return Ok(1);
    }
    Ok((libm::floor(x.hi()) as u32).saturating_add(1).max(1))
}

/// Thinning whose nodes at height at least `N₀` have `(r^{γ₃}, 1−ε)`-fertile ancestry.
pub fn regular_subtree<P: Clone>(
    t: &Tree<P>,
    p: ThinningParams,
    epsilon: f64,
    v: f64,
) -> Result<RegularSubtree<P>, TreeError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(TreeError::EpsilonRange(epsilon));
    }
    let (g3, g4, g5) = (p.gamma3, p.gamma4, p.gamma5);
    if !(0.0 < g3 && g3 < g4 && g4 < g5 && g5 < g4 + epsilon * (g4 - g3)) {
        return Err(TreeError::GammaOrder);
    }
    let n0 = regular_n0(p, epsilon, v)?;
    let h = content(t, p.r, g4).value;
    if !Interval::point(v).certainly_le(h) {
        return Err(TreeError::ContentBelowV { content: h.mid(), v });
    }
    let thinning = thin(t, p)?;
    let c = p.fertility_threshold() as f64;
    let counts = fertile_counts(&thinning.tree, c);
    for q in thinning.tree.nodes() {
        if q.level >= n0 && (counts[q.level as usize][q.index as usize] as f64) < (1.0 - epsilon) * q.level as f64 {
            return Err(TreeError::InequalityFailed(q));
        }
    }
    Ok(RegularSubtree { below_n0: t.height() < n0, thinning, n0 })
}

/// Equal-split flow from the root: every node's mass is `1 / ∏` of the child
/// counts along its ancestry.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowMeasure {
    denominators: Vec<Vec<BigUint>>,
}

impl FlowMeasure {
    pub fn mass(&self, q: NodeId) -> BigRational {
        BigRational::new(1.into(), self.denominators[q.level as usize][q.index as usize].clone().into())
    }

    pub fn denominator(&self, q: NodeId) -> &BigUint {
        &self.denominators[q.level as usize][q.index as usize]
    }

    /// `log_r` of the mass, for comparisons against powers of `r`.
    pub fn log_mass(&self, q: NodeId, r: Radix) -> f64 {
        -crate::stats::ln_big(self.denominator(q)) / libm::log(r.get() as f64)
    }
}

pub fn flow_measure<P: Clone>(t: &Tree<P>) -> FlowMeasure {
    let mut d: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for n in 1..=t.height() as usize {
        let level: Vec<BigUint> = t.parents[n]
            .iter()
            .map(|&p| &d[n - 1][p as usize] * BigUint::from(t.children[n - 1][p as usize].len()))
            .collect();
        d.push(level);
    }
    FlowMeasure { denominators: d }
}

/// Leaf masses of the equal-split flow, in leaf order.
pub fn leaf_measure<P: Clone>(t: &Tree<P>) -> Vec<BigRational> {
    let f = flow_measure(t);
    t.leaves().map(|l| f.mass(l)).collect()
}
