//! Builds catalog instances from raw data: a ratings table through
//! item-based collaborative filtering, a directed adjacency list, or
//! the synthetic random-graph generator. Also the degree statistics
//! used to sanity-check what came out.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{uniform_p0, Instance};
use crate::matrix::DenseMatrix;

pub const DEFAULT_COST_UNCACHED: f64 = 10.0;
pub const DEFAULT_COST_CACHED: f64 = 0.0;

/// Knobs of the ratings pipeline.
#[derive(Debug, Clone, Copy)]
pub struct RatingsParams {
    /// Similarities below this are cut to zero.
    pub floor: f64,
    /// Items related to fewer than this many others are dropped,
    /// repeatedly, until the filter is a fixed point.
    pub min_related: usize,
    /// Neighborhood size for the rating-completion step.
    pub neighbors: usize,
}

impl Default for RatingsParams {
    fn default() -> Self {
        RatingsParams {
            floor: 0.5,
            min_related: 25,
            neighbors: 50,
        }
    }
}

/// What a build pipeline did, plus the degree statistics of its output.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub nodes: usize,
    pub edges: usize,
    pub mean_out_degree: f64,
    /// Mean out-degree counting only edges into the cached set.
    pub mean_cached_out_degree: f64,
    pub pruned_items: usize,
    pub pruning_passes: usize,
}

impl IngestReport {
    pub fn to_kv_text(&self) -> String {
        format!(
            "nodes: {}\nedges: {}\nmean-out-degree: {:.4}\n\
             mean-cached-out-degree: {:.4}\npruned-items: {}\npruning-passes: {}\n",
            self.nodes,
            self.edges,
            self.mean_out_degree,
            self.mean_cached_out_degree,
            self.pruned_items,
            self.pruning_passes
        )
    }
}

/// Degree statistics of an existing instance (pruning fields zero).
pub fn degree_stats(instance: &Instance) -> IngestReport {
    let k = instance.k();
    let mut edges = 0usize;
    let mut cached_edges = 0usize;
    for i in 0..k {
        for (j, &u) in instance.u_row(i).iter().enumerate() {
            if j != i && u > 0.0 {
                edges += 1;
                if instance.is_cached(j) {
                    cached_edges += 1;
                }
            }
        }
    }
    IngestReport {
        nodes: k,
        edges,
        mean_out_degree: edges as f64 / k as f64,
        mean_cached_out_degree: cached_edges as f64 / k as f64,
        pruned_items: 0,
        pruning_passes: 0,
    }
}

/// Complementary CDF of the out-degree distribution:
/// (d, fraction of nodes with out-degree >= d) for d = 0..=max.
pub fn degree_ccdf(instance: &Instance) -> Vec<(usize, f64)> {
    let k = instance.k();
    let degrees: Vec<usize> = (0..k)
        .map(|i| {
            instance
                .u_row(i)
                .iter()
                .enumerate()
                .filter(|&(j, &u)| j != i && u > 0.0)
                .count()
        })
        .collect();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max + 2];
    for &d in &degrees {
        counts[d] += 1;
    }
    let mut ccdf = Vec::with_capacity(max + 1);
    let mut at_least = k;
    for (d, &c) in counts.iter().enumerate().take(max + 1) {
        ccdf.push((d, at_least as f64 / k as f64));
        at_least -= c;
    }
    ccdf
}

// ---------------------------------------------------------------- ratings

/// Parses a ratings table: comma-separated user,item,rating with an
/// optional header line; extra columns (timestamps) are ignored.
pub fn parse_ratings(text: &str) -> Result<Vec<(String, String, f64)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected user,item,rating, got {} field(s)", fields.len()),
            });
        }
        match fields[2].parse::<f64>() {
            Ok(r) if r.is_finite() => {
                out.push((fields[0].to_string(), fields[1].to_string(), r))
            }
            _ if idx == 0 => continue, // header line
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("rating {:?} is not a number", fields[2]),
                })
            }
        }
    }
    Ok(out)
}

/// Cosine of two sparse columns over their co-rated users only, after
/// removing each item's own mean. Returns 0 when fewer than two users
/// rated both.
fn corated_cosine(a: &[(usize, f64)], b: &[(usize, f64)], mean_a: f64, mean_b: f64) -> f64 {
    let (mut ia, mut ib) = (0, 0);
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    let mut common = 0usize;
    while ia < a.len() && ib < b.len() {
        match a[ia].0.cmp(&b[ib].0) {
            std::cmp::Ordering::Less => ia += 1,
            std::cmp::Ordering::Greater => ib += 1,
            std::cmp::Ordering::Equal => {
                let x = a[ia].1 - mean_a;
                let y = b[ib].1 - mean_b;
                dot += x * y;
                na += x * x;
                nb += y * y;
                common += 1;
                ia += 1;
                ib += 1;
            }
        }
    }
    if common < 2 || na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Ratings table to similarity catalog.
///
/// Steps: complete the user-item matrix by item-based k-nearest
/// neighbors (mean-centered, cosine over co-rated users; entries with
/// no positively similar co-rated evidence stay zero so unrelated
/// items remain orthogonal), take plain cosine between completed item
/// vectors, floor small values to zero, then repeatedly drop items
/// related to fewer than `min_related` others. Costs and caching come
/// later via apply_caching; the emitted instance is uniform-cost,
/// uniform-p0, cache-free.
pub fn build_from_ratings(
    ratings: &[(String, String, f64)],
    params: &RatingsParams,
) -> Result<(Instance, IngestReport)> {
    if ratings.is_empty() {
        return Err(Error::Ingest("ratings table is empty".into()));
    }
    // Dense ids in first-seen order are unstable across shuffles; sort
    // by original label instead so ingestion is a pure function.
    let mut users: Vec<&str> = ratings.iter().map(|r| r.0.as_str()).collect();
    users.sort_unstable();
    users.dedup();
    let mut items: Vec<&str> = ratings.iter().map(|r| r.1.as_str()).collect();
    items.sort_unstable();
    items.dedup();
    let user_id = |name: &str| users.binary_search(&name).expect("indexed above");
    let item_id = |name: &str| items.binary_search(&name).expect("indexed above");
    let n_items = items.len();
    let n_users = users.len();

    // Column-major sparse ratings, user-sorted per item.
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_items];
    for (u, i, r) in ratings {
        cols[item_id(i)].push((user_id(u), *r));
    }
    let mut max_rating = 0.0f64;
    for col in cols.iter_mut() {
        col.sort_unstable_by_key(|&(u, _)| u);
        col.dedup_by_key(|&mut (u, _)| u); // keep first on duplicates
        for &(_, r) in col.iter() {
            max_rating = max_rating.max(r);
        }
    }
    let means: Vec<f64> = cols
        .iter()
        .map(|c| {
            if c.is_empty() {
                0.0
            } else {
                c.iter().map(|&(_, r)| r).sum::<f64>() / c.len() as f64
            }
        })
        .collect();

    // Pairwise co-rated similarity, used only to pick prediction
    // neighborhoods.
    let knn_sim: Vec<Vec<f64>> = (0..n_items)
        .into_par_iter()
        .map(|a| {
            (0..n_items)
                .map(|b| {
                    if a == b {
                        0.0
                    } else {
                        corated_cosine(&cols[a], &cols[b], means[a], means[b])
                    }
                })
                .collect()
        })
        .collect();

    // Complete the matrix item by item.
    let completed: Vec<Vec<f64>> = (0..n_items)
        .into_par_iter()
        .map(|i| {
            let mut col = vec![0.0f64; n_users];
            for &(u, r) in &cols[i] {
                col[u] = r;
            }
            let mut neighbors: Vec<usize> = (0..n_items)
                .filter(|&j| j != i && knn_sim[i][j] > 0.0)
                .collect();
            neighbors.sort_unstable_by(|&a, &b| {
                knn_sim[i][b].partial_cmp(&knn_sim[i][a]).unwrap().then(a.cmp(&b))
            });
            neighbors.truncate(params.neighbors);
            let rated: Vec<bool> = {
                let mut f = vec![false; n_users];
                for &(u, _) in &cols[i] {
                    f[u] = true;
                }
                f
            };
            for u in 0..n_users {
                if rated[u] {
                    continue;
                }
                let mut num = 0.0;
                let mut den = 0.0;
                for &j in &neighbors {
                    if let Ok(pos) = cols[j].binary_search_by_key(&u, |&(user, _)| user) {
                        let s = knn_sim[i][j];
                        num += s * (cols[j][pos].1 - means[j]);
                        den += s.abs();
                    }
                }
                if den > 0.0 {
                    col[u] = (means[i] + num / den).clamp(0.0, max_rating);
                }
            }
            col
        })
        .collect();

    // Plain cosine between completed vectors, floored.
    let norms: Vec<f64> = completed
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let sim_rows: Vec<Vec<f64>> = (0..n_items)
        .into_par_iter()
        .map(|a| {
            (0..n_items)
                .map(|b| {
                    if a == b || norms[a] == 0.0 || norms[b] == 0.0 {
                        return 0.0;
                    }
                    let dot: f64 = completed[a]
                        .iter()
                        .zip(&completed[b])
                        .map(|(&x, &y)| x * y)
                        .sum();
                    let s = (dot / (norms[a] * norms[b])).clamp(0.0, 1.0);
                    if s < params.floor {
                        0.0
                    } else {
                        s
                    }
                })
                .collect()
        })
        .collect();

    // Iterative low-connectivity pruning to a fixed point.
    let mut alive: Vec<usize> = (0..n_items).collect();
    let mut passes = 0usize;
    loop {
        let keep: Vec<usize> = alive
            .iter()
            .copied()
            .filter(|&i| {
                alive
                    .iter()
                    .filter(|&&j| j != i && sim_rows[i][j] > 0.0)
                    .count()
                    >= params.min_related
            })
            .collect();
        let stable = keep.len() == alive.len();
        alive = keep;
        if alive.is_empty() {
            return Err(Error::Ingest(format!(
                "no items with at least {} related items survive pruning",
                params.min_related
            )));
        }
        if stable {
            break;
        }
        passes += 1;
    }
    if alive.len() < 2 {
        return Err(Error::Ingest(
            "fewer than two items survive pruning".into(),
        ));
    }

    let k = alive.len();
    let rows: Vec<Vec<f64>> = alive
        .iter()
        .map(|&i| alive.iter().map(|&j| sim_rows[i][j]).collect())
        .collect();
    let instance = Instance::new(
        DenseMatrix::from_rows(rows),
        vec![DEFAULT_COST_UNCACHED; k],
        uniform_p0(k),
        vec![],
    )?;
    let mut report = degree_stats(&instance);
    report.pruned_items = n_items - k;
    report.pruning_passes = passes;
    Ok((instance, report))
}

// -------------------------------------------------------------- adjacency

/// Which notion of "largest component" to keep from a directed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComponentRule {
    /// Edges treated as undirected for connectivity.
    #[default]
    Weak,
    /// Mutually reachable sets (Kosaraju).
    Strong,
}

/// Parses "src dst" pairs, one per line; '#' starts a comment.
pub fn parse_edge_list(text: &str) -> Result<Vec<(u64, u64)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<u64> {
            s.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected two integer node ids, got {line:?}"),
            })
        };
        let src = parse(parts.next())?;
        let dst = parse(parts.next())?;
        out.push((src, dst));
    }
    Ok(out)
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Kosaraju strongly connected components; iterative DFS.
fn strong_components(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut radj = vec![Vec::new(); n];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            radj[v].push(u);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // (node, next child position) stack for postorder.
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (u, ref mut pos)) = stack.last_mut() {
            if *pos < adj[u].len() {
                let v = adj[u][*pos];
                *pos += 1;
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut current = 0usize;
    for &start in order.iter().rev() {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = current;
        while let Some(u) = stack.pop() {
            for &v in &radj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = current;
                    stack.push(v);
                }
            }
        }
        current += 1;
    }
    comp
}

/// Directed edge list to catalog: keeps the largest component under
/// `rule`, gives every surviving edge a Uniform(0.5, 1) relevance
/// weight drawn deterministically from `weight_seed`. Costs, caching
/// and popularity are uniform placeholders until apply_caching.
pub fn build_from_adjacency(
    edges: &[(u64, u64)],
    weight_seed: u64,
    rule: ComponentRule,
) -> Result<(Instance, IngestReport)> {
    // Dense relabeling in ascending original-id order.
    let mut nodes: Vec<u64> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let n = nodes.len();
    if n < 2 {
        return Err(Error::Ingest("graph has fewer than two nodes".into()));
    }
    let id = |x: u64| nodes.binary_search(&x).expect("indexed above");

    let mut pairs: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(a, b)| (id(a), id(b)))
        .filter(|&(a, b)| a != b)
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    if pairs.is_empty() {
        return Err(Error::Ingest("graph has no edges between distinct nodes".into()));
    }

    let component: Vec<usize> = match rule {
        ComponentRule::Weak => {
            let mut uf = UnionFind::new(n);
            for &(a, b) in &pairs {
                uf.union(a, b);
            }
            (0..n).map(|x| uf.find(x)).collect()
        }
        ComponentRule::Strong => {
            let mut adj = vec![Vec::new(); n];
            for &(a, b) in &pairs {
                adj[a].push(b);
            }
            strong_components(n, &adj)
        }
    };
    // Largest component; ties go to the one containing the smallest node.
    let mut sizes = vec![0usize; n];
    for &c in &component {
        sizes[c] += 1;
    }
    let winner = component
        .iter()
        .copied()
        .max_by_key(|&c| (sizes[c], std::cmp::Reverse(component.iter().position(|&x| x == c))))
        .expect("nonempty");

    let kept: Vec<usize> = (0..n).filter(|&x| component[x] == winner).collect();
    let k = kept.len();
    if k < 2 {
        return Err(Error::Ingest(
            "largest component has fewer than two nodes".into(),
        ));
    }
    let local = {
        let mut map = vec![usize::MAX; n];
        for (new, &old) in kept.iter().enumerate() {
            map[old] = new;
        }
        map
    };

    let mut u = DenseMatrix::zeros(k, k);
    let mut rng = ChaCha12Rng::seed_from_u64(weight_seed);
    for &(a, b) in &pairs {
        if local[a] != usize::MAX && local[b] != usize::MAX {
            u.set(local[a], local[b], rng.random_range(0.5..1.0));
        }
    }

    let instance = Instance::new(
        u,
        vec![DEFAULT_COST_UNCACHED; k],
        uniform_p0(k),
        vec![],
    )?;
    let pruned = n - k;
    let mut report = degree_stats(&instance);
    report.pruned_items = pruned;
    report.pruning_passes = usize::from(pruned > 0);
    Ok((instance, report))
}

// -------------------------------------------------------------- synthetic

/// Random catalog: every item links to Uniform{1..100} distinct others
/// with Uniform(0.5, 1) weights. Deterministic under `seed`.
pub fn build_synthetic(k: usize, seed: u64) -> Result<Instance> {
    if k < 101 {
        return Err(Error::InvalidArgument(format!(
            "synthetic catalogs need K >= 101 so the degree law fits, got {k}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut u = DenseMatrix::zeros(k, k);
    for i in 0..k {
        let degree = rng.random_range(1..=100usize);
        let mut picks: Vec<usize> = rand::seq::index::sample(&mut rng, k - 1, degree)
            .into_iter()
            .map(|x| x + usize::from(x >= i))
            .collect();
        picks.sort_unstable();
        for j in picks {
            u.set(i, j, rng.random_range(0.5..1.0));
        }
    }
    Instance::new(u, vec![DEFAULT_COST_UNCACHED; k], uniform_p0(k), vec![])
}

// ---------------------------------------------------------------- caching

/// Marks the first ceil(ratio * K) items as cached at `cost_cached`,
/// everything else at `cost_uncached`, and resets p0 to uniform.
pub fn apply_caching(
    instance: &Instance,
    ratio: f64,
    cost_uncached: f64,
    cost_cached: f64,
) -> Result<Instance> {
    if !(0.0..1.0).contains(&ratio) || ratio <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cache ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let k = instance.k();
    let m = (ratio * k as f64).ceil() as usize;
    let m = m.clamp(1, k - 1);
    let mut costs = vec![cost_uncached; k];
    for c in costs.iter_mut().take(m) {
        *c = cost_cached;
    }
    Instance::new(
        instance.u_matrix().clone(),
        costs,
        uniform_p0(k),
        (0..m).collect(),
    )
}
