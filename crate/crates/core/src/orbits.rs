//! Orbits of generator sets on the window, the orbit-crossing permutation
//! and its tree, the finite/infinite orbit builder and the interval
//! construction for eventually bounded groups.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::Builder;
use crate::partial::PartialInjection;
use crate::perm::{base_h, Evaluable, FnSpec};
use crate::trace::Trace;
use crate::window::Window;
use crate::words::{evaluate, evaluation_path, GroupContext, Letter, Word};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// False if already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orbit {
    pub members: Vec<u64>,
    /// some generator maps a member outside the window
    pub truncated: bool,
}

/// Orbits enumerated by their least element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitPartition {
    pub orbits: Vec<Orbit>,
    #[serde(skip)]
    of: Vec<usize>,
}

impl OrbitPartition {
    pub fn orbit_of(&self, n: u64) -> Option<usize> {
        self.of.get(usize::try_from(n).ok()?).copied()
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// Builds a partition from explicit blocks covering `[0, W)`.
    pub fn from_blocks(blocks: Vec<Orbit>, window: &Window) -> Result<Self> {
        let mut of = vec![usize::MAX; window.w as usize];
        let mut blocks = blocks;
        blocks.sort_by_key(|o| o.members.first().copied());
        for (i, o) in blocks.iter().enumerate() {
            for &n in &o.members {
                let slot = of.get_mut(n as usize).ok_or_else(|| Error::Invalid(format!("{n} outside window")))?;
                if *slot != usize::MAX {
                    return Err(Error::Invalid(format!("{n} in two blocks")));
                }
                *slot = i;
            }
        }
        if of.contains(&usize::MAX) {
            return Err(Error::Invalid("blocks do not cover the window".into()));
        }
        Ok(OrbitPartition { orbits: blocks, of })
    }
}

/// Components of the graph `n -- g(n)` on `[0, W)`.
pub fn compute_orbits<E: Evaluable>(gens: &[E], window: &Window) -> OrbitPartition {
    let w = window.w as usize;
    let mut uf = UnionFind::new(w);
    let mut leaks = vec![false; w];
    for g in gens {
        for n in 0..w {
            for m in [g.apply(n as u64), g.apply_inverse(n as u64)] {
                match m.filter(|&m| window.contains(m)) {
                    Some(m) => {
                        uf.union(n, m as usize);
                    }
                    None => leaks[n] = true,
                }
            }
        }
    }
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut orbits: Vec<Orbit> = Vec::new();
    let mut of = vec![0; w];
    for n in 0..w {
        let root = uf.find(n);
        let id = *ids.entry(root).or_insert_with(|| {
            orbits.push(Orbit { members: vec![], truncated: false });
            orbits.len() - 1
        });
        orbits[id].members.push(n as u64);
        orbits[id].truncated |= leaks[n];
        of[n] = id;
    }
    OrbitPartition { orbits, of }
}

/// Each stage joins `n`, the least point missing from `dom` or `ran`, with
/// the least element of the first untruncated orbit that avoids `n`, `dom`
/// and `ran`.
pub fn build_crossing_h(orbits: &OrbitPartition, stages: usize, window: &Window) -> Result<(PartialInjection, Trace)> {
    let mut h = PartialInjection::new();
    let mut trace = Trace { stages, ..Trace::default() };
    let mut touched: BTreeSet<usize> = BTreeSet::new();
    for s in 0..stages {
        let n = h.least_missing_dom().min(h.least_missing_ran());
        let own = orbits.orbit_of(n).ok_or(Error::OrbitsExhausted(s))?;
        let j = (0..orbits.len())
            .find(|&j| j != own && !orbits.orbits[j].truncated && !touched.contains(&j))
            .ok_or(Error::OrbitsExhausted(s))?;
        let m = orbits.orbits[j].members[0];
        let (a, b) = if h.in_dom(n) { (m, n) } else { (n, m) };
        h.insert(a, b)?;
        trace.push(s, if a == n { "domain" } else { "range" }, 0, (a, b));
        touched.insert(own);
        touched.insert(j);
    }
    let _ = window;
    Ok((h, trace))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitEdge {
    pub from: usize,
    pub to: usize,
    pub pair: (u64, u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitTree {
    pub vertices: usize,
    pub edges: Vec<OrbitEdge>,
    #[serde(skip)]
    adj: Vec<Vec<usize>>,
}

impl OrbitTree {
    pub fn new(vertices: usize, edges: Vec<OrbitEdge>) -> Self {
        let mut adj = vec![Vec::new(); vertices];
        for (i, e) in edges.iter().enumerate() {
            adj[e.from].push(i);
            adj[e.to].push(i);
        }
        OrbitTree { vertices, edges, adj }
    }

    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = (usize, &OrbitEdge)> + '_ {
        self.adj.get(v).into_iter().flatten().map(move |&i| {
            let e = &self.edges[i];
            (if e.from == v { e.to } else { e.from }, e)
        })
    }

    /// Tree distances from `root`; unreachable vertices are absent.
    pub fn distances(&self, root: usize) -> BTreeMap<usize, usize> {
        let mut dist = BTreeMap::from([(root, 0)]);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            for (u, _) in self.neighbours(v) {
                if let Entry::Vacant(e) = dist.entry(u) {
                    e.insert(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&OrbitEdge> {
        self.neighbours(a).find(|(u, _)| *u == b).map(|(_, e)| e)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph orbits {\n");
        for v in 0..self.vertices {
            s += &format!("  O{v};\n");
        }
        for e in &self.edges {
            s += &format!("  O{} -- O{} [label=\"{}->{}\"];\n", e.from, e.to, e.pair.0, e.pair.1);
        }
        s + "}\n"
    }
}

/// The graph of `h`-crossings between orbits; fails on a self-loop, a
/// repeated edge or a cycle.
pub fn orbit_tree(h: &PartialInjection, orbits: &OrbitPartition) -> Result<OrbitTree> {
    let mut uf = UnionFind::new(orbits.len());
    let mut edges = Vec::new();
    for (a, b) in h.iter() {
        let (Some(i), Some(j)) = (orbits.orbit_of(a), orbits.orbit_of(b)) else {
            return Err(Error::NotATree(format!("pair ({a},{b}) leaves the window")));
        };
        if i == j {
            return Err(Error::NotATree(format!("pair ({a},{b}) stays inside orbit {i}")));
        }
        if !uf.union(i, j) {
            return Err(Error::NotATree(format!("pair ({a},{b}) closes a cycle through orbits {i} and {j}")));
        }
        edges.push(OrbitEdge { from: i, to: j, pair: (a, b) });
    }
    Ok(OrbitTree::new(orbits.len(), edges))
}

/// Orbit ids along the evaluation path of `n` in `w(h)`; stops where the
/// path stops or leaves the window.
pub fn orbit_path(w: &Word, h: &PartialInjection, orbits: &OrbitPartition, n: u64) -> Vec<usize> {
    let assign = vec![h.clone()];
    evaluation_path(w, &assign, n).points.into_iter().map_while(|p| orbits.orbit_of(p)).collect()
}

/// For a fixed point `n` of `w(h)`: the first path point in an orbit at
/// maximal tree distance from the orbit of `n` is entered and left through
/// the same crossing pair, so the group letter applied there fixes it.
/// Returns that letter's index (counted from the right) and the point.
pub fn fixed_point_witness(
    w: &Word,
    h: &PartialInjection,
    tree: &OrbitTree,
    orbits: &OrbitPartition,
    n: u64,
) -> Result<(usize, u64)> {
    let assign = vec![h.clone()];
    if evaluate(w, &assign, n) != Some(n) {
        return Err(Error::NotAFixedPoint(n));
    }
    let points = evaluation_path(w, &assign, n).points;
    let ids: Vec<usize> = points.iter().map_while(|&p| orbits.orbit_of(p)).collect();
    if ids.len() != points.len() {
        return Err(Error::WitnessNotFound(n));
    }
    let dist = tree.distances(ids[0]);
    let d: Vec<usize> = ids.iter().map(|i| dist.get(i).copied().unwrap_or(usize::MAX)).collect();
    let max = *d.iter().max().expect("path is non-empty");
    if max == 0 || max == usize::MAX {
        return Err(Error::WitnessNotFound(n));
    }
    let i = d.iter().position(|&x| x == max).expect("max exists");
    match w.letter_at(i)? {
        Letter::Group(g) if g.apply(points[i]) == Some(points[i]) => Ok((i, points[i])),
        _ => Err(Error::WitnessNotFound(n)),
    }
}

/// The transitive permutation of `[0, size)` (a cycle) or of an infinite
/// block given by its window enumeration (the base permutation moved along it).
fn block_permutation(members: &[u64], finite: bool, out: &mut Vec<(u64, u64)>) {
    let k = members.len();
    if finite {
        for i in 0..k {
            out.push((members[i], members[(i + 1) % k]));
        }
    } else {
        for i in 0..k {
            let j = base_h(i as u64) as usize;
            if j < k {
                out.push((members[i], members[j]));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub target: usize,
    /// 1: hit on block 0; 2: conjugate hit through block `block`; 0: neither applies
    pub case: u8,
    pub block: usize,
    pub r_size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteOrbitGroup {
    pub generators: Vec<FnSpec>,
    pub blocks: Vec<Orbit>,
    pub cases: Vec<CaseReport>,
    pub trace: Trace,
}

/// Generators whose orbits on the window are `m_fin` finite blocks (sizes
/// 2, 3, ...) followed by `n_inf` infinite blocks (residue classes). The
/// first generator is transitive on each block; one more generator is built
/// per target (at least one) from good extensions inside each infinite block.
pub fn build_finite_orbit_group(
    n_inf: usize,
    m_fin: usize,
    window: &Window,
    stages: usize,
    targets: &[FnSpec],
) -> Result<FiniteOrbitGroup> {
    if n_inf == 0 {
        return Err(Error::Invalid("need at least one infinite block".into()));
    }
    let mut blocks: Vec<Orbit> = Vec::new();
    let mut start = 0u64;
    for i in 0..m_fin {
        let size = i as u64 + 2;
        blocks.push(Orbit { members: (start..start + size).collect(), truncated: false });
        start += size;
    }
    if start + n_inf as u64 > window.w {
        return Err(Error::window("partition does not fit"));
    }
    for j in 0..n_inf as u64 {
        blocks.push(Orbit { members: (start + j..window.w).step_by(n_inf).collect(), truncated: true });
    }
    let partition = OrbitPartition::from_blocks(blocks.clone(), window)?;
    let block_of = |n: u64| partition.orbit_of(n);
    let inf_ids: Vec<usize> = (m_fin..m_fin + n_inf).collect();

    let mut g0_pairs = Vec::new();
    for b in &blocks {
        block_permutation(&b.members, !b.truncated, &mut g0_pairs);
    }
    let g0 = FnSpec::table(g0_pairs.iter().copied())?;
    let ctx = GroupContext::new(vec![("g0".into(), g0.clone())], *window)?;
    let words: Vec<Word> = ["x", "x^2", "g0 x", "g0^-1 x g0 x"]
        .iter()
        .map(|t| Word::parse(t, &ctx))
        .collect::<Result<_>>()?;
    let finite_pairs: Vec<(u64, u64)> = g0_pairs.iter().copied().filter(|&(a, _)| !blocks[block_of(a).unwrap()].truncated).collect();

    let mut generators = vec![g0];
    let mut cases = Vec::new();
    let mut trace = Trace { stages, ..Trace::default() };
    let count = targets.len().max(1);
    for t in 0..count {
        let target = targets.get(t);
        let mut b = Builder::new(&ctx, 1, window.w);
        b.record_fixed_points = false;
        for &(a, c) in &finite_pairs {
            b.maps[0].insert(a, c)?;
        }
        for (i, w) in words.iter().enumerate() {
            b.activate(w, i.min(stages.saturating_sub(1)))?;
        }
        let o0 = inf_ids[0];
        let mut report = CaseReport { target: t, case: 0, block: o0, r_size: 0 };
        let mut r_set: BTreeSet<u64> = BTreeSet::new();
        if let Some(f) = target {
            let into = |bid: usize| {
                blocks[o0].members.iter().filter(|&&n| f.apply(n).and_then(block_of) == Some(bid)).count() as u64
            };
            if !window.is_finite_count(into(o0)) {
                report.case = 1;
            } else if let Some(&bi) = inf_ids[1..].iter().find(|&&bi| !window.is_finite_count(into(bi))) {
                report.case = 2;
                report.block = bi;
                r_set = blocks[o0].members.iter().filter_map(|&n| f.apply(n)).filter(|&m| block_of(m) == Some(bi)).collect();
                report.r_size = r_set.len();
            }
        }
        for s in 0..stages {
            for &bid in &inf_ids {
                let outside = |n: u64| block_of(n) != Some(bid);
                b.extend_domain(s, 0, &outside)?;
                b.extend_range(s, 0, &outside)?;
            }
            let Some(f) = target else { continue };
            let outside0 = |n: u64| block_of(n) != Some(o0);
            match report.case {
                1 => {
                    let restricted = Restricted { f, keep: &|n: u64, m: u64| block_of(n) == Some(o0) && block_of(m) == Some(o0) };
                    b.hit(s, 0, &restricted, &outside0)?;
                }
                2 => {
                    let not_r = |n: u64| !r_set.contains(&n);
                    if let Some(a) = r_set.iter().copied().find(|&a| !b.maps[0].in_dom(a)) {
                        let c = crate::extension::find_domain_extension(&b.maps, 0, a, b.active(), window, &not_r, window.w)
                            .map_err(|e| e.in_context(format!("stage {s}, R step")))?;
                        b.add(s, "hit", 0, a, c)?;
                    }
                    let conj = Conjugated { f, g: b.maps[0].clone() };
                    let restricted = Restricted { f: &conj, keep: &|n: u64, m: u64| block_of(n) == Some(o0) && block_of(m) == Some(o0) };
                    if let Ok(n) = crate::extension::find_hitting_extension(&b.maps, 0, &restricted, b.active(), window, &outside0, window.w) {
                        let m = restricted.apply(n).expect("finder checked");
                        b.add(s, "hit", 0, n, m)?;
                    }
                }
                _ => {}
            }
        }
        let (maps, mut sub) = b.finish(stages);
        for r in &mut sub.records {
            r.var = t + 1;
        }
        trace.push(0, "case", t + 1, (report.case as u64, report.block as u64)).note =
            Some(format!("target {t}: case {} via block {} with |R| = {}", report.case, report.block, report.r_size));
        trace.records.extend(sub.records);
        generators.push(FnSpec::from_partial(&maps[0]));
        cases.push(report);
    }
    Ok(FiniteOrbitGroup { generators, blocks, cases, trace })
}

/// `f` restricted to the pairs accepted by `keep`.
struct Restricted<'a, F: ?Sized> {
    f: &'a F,
    keep: &'a dyn Fn(u64, u64) -> bool,
}

impl<F: Evaluable + ?Sized> Evaluable for Restricted<'_, F> {
    fn apply(&self, n: u64) -> Option<u64> {
        self.f.apply(n).filter(|&m| (self.keep)(n, m))
    }
    fn apply_inverse(&self, m: u64) -> Option<u64> {
        self.f.apply_inverse(m).filter(|&n| (self.keep)(n, m))
    }
}

/// `f^-1 g f`.
struct Conjugated<'a> {
    f: &'a FnSpec,
    g: PartialInjection,
}

impl Evaluable for Conjugated<'_> {
    fn apply(&self, n: u64) -> Option<u64> {
        self.f.apply_inverse(self.g.get(self.f.apply(n)?)?)
    }
    fn apply_inverse(&self, m: u64) -> Option<u64> {
        self.f.apply_inverse(self.g.get_inv(self.f.apply(m)?)?)
    }
}

/// `([i_n, i_{n+1}), p_n)` with `i_0 = 0`, `p_n = f(i_n)`, `i_{n+1} = f(p_n)`,
/// for every `n` with `i_n < W`.
pub fn build_ksigma_partition(f: &impl Evaluable, window: &Window) -> Result<Vec<(u64, u64)>> {
    Ok(ksigma_intervals(f, window.w)?.into_iter().map(|(i, p, _)| (i, p)).collect())
}

/// Intervals `(i_n, p_n, i_{n+1})` while `i_n < limit`.
fn ksigma_intervals(f: &impl Evaluable, limit: u64) -> Result<Vec<(u64, u64, u64)>> {
    let mut out = Vec::new();
    let mut i = 0u64;
    while i < limit {
        let p = f.apply(i).ok_or_else(|| Error::window("bound undefined"))?;
        let next = f.apply(p).ok_or_else(|| Error::window("bound undefined"))?;
        if p <= i || next <= p {
            return Err(Error::Invalid("bound must be strictly increasing with f(0) > 0".into()));
        }
        out.push((i, p, next));
        i = next;
    }
    Ok(out)
}

/// Every interval whose endpoints fit in a `u64`.
fn all_intervals(f: &impl Evaluable) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    let mut i = 0u64;
    loop {
        let Some(p) = f.apply(i) else { break };
        let Some(next) = f.apply(p) else { break };
        if p <= i || next <= p {
            break;
        }
        out.push((i, p, next));
        i = next;
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MainPropertyReport {
    pub threshold_m: u64,
    pub checked: usize,
    pub violations: Vec<(usize, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KsigmaReport {
    /// violations of properties 1 to 4
    pub violations: [Vec<String>; 4],
    pub main: MainPropertyReport,
}

impl KsigmaReport {
    pub fn all_pass(&self) -> bool {
        self.violations.iter().all(Vec::is_empty) && self.main.violations.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KsigmaBuild {
    pub h: PartialInjection,
    pub partition: Vec<(u64, u64)>,
    pub report: KsigmaReport,
    pub trace: Trace,
}

/// Interval of `x`, as an index into `iv`.
fn interval_of(iv: &[(u64, u64, u64)], x: u64) -> Option<usize> {
    let k = iv.partition_point(|&(i, _, _)| i <= x);
    (k > 0 && x < iv[k - 1].2).then(|| k - 1)
}

/// Two substeps per stage: send the least point outside `dom` to the
/// distinguished point of the first interval past everything mentioned,
/// then pull the distinguished point of the next such interval onto the
/// least point outside `ran`. `h` lives on the naturals; intervals are used
/// as far as they fit in a `u64`, and the window only bounds the scan for
/// the main property.
pub fn build_ksigma_h<F: Evaluable, G: Evaluable>(
    f: &F,
    window: &Window,
    stages: usize,
    samples: &[G],
) -> Result<KsigmaBuild> {
    let iv = all_intervals(f);
    let partition = build_ksigma_partition(f, window)?;
    let mut h = PartialInjection::new();
    let mut trace = Trace { stages, ..Trace::default() };
    let fresh_interval = |h: &PartialInjection, extra: u64| -> Result<usize> {
        let top = h.max_point().map_or(extra, |m| m.max(extra));
        let n = match interval_of(&iv, top) {
            Some(k) => k + 1,
            None => return Err(Error::window("interval lookup")),
        };
        if n >= iv.len() {
            return Err(Error::window("intervals exceed u64"));
        }
        Ok(n)
    };
    for s in 0..stages {
        let a = h.least_missing_dom();
        let n = fresh_interval(&h, a)?;
        h.insert(a, iv[n].1)?;
        trace.push(s, "domain", 0, (a, iv[n].1));
        let b = h.least_missing_ran();
        let m = fresh_interval(&h, b)?;
        h.insert(iv[m].1, b)?;
        trace.push(s, "range", 0, (iv[m].1, b));
    }
    let report = KsigmaReport { violations: ksigma_properties(&h, &iv), main: main_property(f, &partition, window, samples) };
    Ok(KsigmaBuild { h, partition, report, trace })
}

/// Exhaustive check of properties 1-4 over all pairs of `h`. Property 4 is
/// read with non-strict conclusions: pairs sharing an endpoint satisfy it.
fn ksigma_properties(h: &PartialInjection, iv: &[(u64, u64, u64)]) -> [Vec<String>; 4] {
    let mut v: [Vec<String>; 4] = Default::default();
    for (a, b) in h.iter() {
        if let Some(n) = interval_of(iv, a).filter(|&n| n > 0) {
            if a != iv[n].1 && b <= iv[n].2 {
                v[0].push(format!("({a},{b})"));
            }
        }
        if let Some(n) = interval_of(iv, b).filter(|&n| n > 0) {
            if b != iv[n].1 && a <= iv[n].2 {
                v[1].push(format!("({a},{b})"));
            }
        }
    }
    for (n, &(i, p, _)) in iv.iter().enumerate().skip(1) {
        if let (Some(a), Some(b)) = (h.get_inv(p), h.get(p)) {
            if a < i && b < i {
                v[2].push(format!("interval {n}: ({a},{p}),({p},{b})"));
            }
        }
    }
    let sym: Vec<(u64, u64)> = h.iter().chain(h.iter().map(|(a, b)| (b, a))).collect();
    for &(a0, b0) in &sym {
        for &(a1, b1) in &sym {
            if a0 < a1 && a1 < b0 && !(b1 <= a0 || b1 >= b0) {
                v[3].push(format!("({a0},{b0}) and ({a1},{b1})"));
            }
        }
    }
    v
}

/// `g(p_n) ∈ [i_n, i_{n+1})` for each sample and each `n` with
/// `M <= i_n < W`, where `M` is least with `g(k), g^-1(k) < f(k)` for all
/// samples and all scanned `k >= M`.
fn main_property<F: Evaluable, G: Evaluable>(
    f: &F,
    partition: &[(u64, u64)],
    window: &Window,
    samples: &[G],
) -> MainPropertyReport {
    let iv = all_intervals(f);
    let limit = iv.get(partition.len()).map_or(window.w, |x| x.0).max(window.w);
    let limit = limit.min(1 << 24);
    let mut m = 0;
    for k in 0..limit {
        let fk = f.apply(k).unwrap_or(u64::MAX);
        let bad = samples.iter().any(|g| {
            g.apply(k).is_none_or(|v| v >= fk) || g.apply_inverse(k).is_none_or(|v| v >= fk)
        });
        if bad {
            m = k + 1;
        }
    }
    let mut rep = MainPropertyReport { threshold_m: m, ..Default::default() };
    for (n, &(i, p)) in partition.iter().enumerate() {
        if i < m {
            continue;
        }
        let next = iv[n].2;
        for g in samples {
            rep.checked += 1;
            if !g.apply(p).is_some_and(|v| i <= v && v < next) {
                rep.violations.push((n, p));
            }
        }
    }
    rep
}
