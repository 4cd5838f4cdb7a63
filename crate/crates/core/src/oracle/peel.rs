//! Exact coreness by bucket peeling, plus a brute-force reference for tiny
//! graphs.

use crate::graph::Graph;

/// Coreness of every vertex. O(n + m).
pub fn exact_coreness(g: &Graph) -> Vec<u32> {
    let n = g.num_vertices();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v as u32)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);

    // Vertices sorted by degree, with `pos` and `start` locating bucket runs.
    let mut start = vec![0usize; max_deg + 2];
    for &d in &deg {
        start[d + 1] += 1;
    }
    for d in 0..=max_deg {
        start[d + 1] += start[d];
    }
    let mut order = vec![0u32; n];
    let mut pos = vec![0usize; n];
    let mut fill = start.clone();
    for v in 0..n {
        pos[v] = fill[deg[v]];
        order[pos[v]] = v as u32;
        fill[deg[v]] += 1;
    }

    let mut core = vec![0u32; n];
    for i in 0..n {
        let v = order[i] as usize;
        core[v] = deg[v] as u32;
        for &w in g.neighbors(v as u32) {
            let w = w as usize;
            if deg[w] > deg[v] {
                // Swap w to the front of its bucket, then shrink the bucket.
                let dw = deg[w];
                let front = start[dw];
                let u = order[front] as usize;
                if u != w {
                    order.swap(pos[w], front);
                    pos[u] = pos[w];
                    pos[w] = front;
                }
                start[dw] += 1;
                deg[w] -= 1;
            }
        }
    }
    core
}

/// Coreness from the definition: the largest minimum induced degree over all
/// vertex subsets containing `v`. `adj[v]` is a bitmask of `v`'s neighbors.
pub fn brute_force_coreness(adj: &[u32]) -> Vec<u32> {
    let n = adj.len();
    assert!(n <= 16);
    let mut best = vec![0u32; n];
    for s in 1u32..(1 << n) {
        let mut min = u32::MAX;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            min = min.min((adj[v] & s).count_ones());
        }
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            best[v] = best[v].max(min);
        }
    }
    best
}

pub fn graph_from_masks(adj: &[u32]) -> Graph {
    let n = adj.len();
    let mut edges = Vec::new();
    for (u, &mask) in adj.iter().enumerate() {
        for v in u + 1..n {
            if mask >> v & 1 == 1 {
                edges.push((u as u32, v as u32));
            }
        }
    }
    let mut g = Graph::new(n);
    g.apply_batch(&crate::graph::EdgeBatch::insert(edges)).expect("fresh edges");
    g
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Upper-triangle bit encoding of an adjacency mask list.
fn code(adj: &[u32], perm: &[usize]) -> u64 {
    let n = adj.len();
    let mut c = 0u64;
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if adj[perm[i]] >> perm[j] & 1 == 1 {
                c |= 1 << bit;
            }
            bit += 1;
        }
    }
    c
}

fn canonical(adj: &[u32], perms: &[Vec<usize>]) -> u64 {
    perms.iter().map(|p| code(adj, p)).min().unwrap()
}

/// One representative of every isomorphism class of simple graphs on
/// `n <= 7` vertices, as neighbor bitmasks.
pub fn nonisomorphic_graphs(n: usize) -> Vec<Vec<u32>> {
    assert!(n <= 7, "canonical forms beyond 7 vertices are too slow here");
    let mut classes: Vec<Vec<u32>> = vec![vec![]];
    for k in 1..=n {
        let perms = permutations(k);
        let mut seen = std::collections::HashSet::new();
        let mut next = Vec::new();
        for g in &classes {
            for s in 0u32..(1 << (k - 1)) {
                let mut adj = g.clone();
                for (v, m) in adj.iter_mut().enumerate() {
                    if s >> v & 1 == 1 {
                        *m |= 1 << (k - 1);
                    }
                }
                adj.push(s);
                if seen.insert(canonical(&adj, &perms)) {
                    next.push(adj);
                }
            }
        }
        classes = next;
    }
    classes
}

/// Every graph on `n` vertices up to isomorphism, possibly with repeats, for
/// `n <= 8`: the classes on `n - 1` vertices each extended by one vertex in
/// every possible way.
pub fn graph_cover(n: usize) -> Vec<Vec<u32>> {
    if n <= 7 {
        return nonisomorphic_graphs(n);
    }
    assert_eq!(n, 8);
    let mut out = Vec::new();
    for g in nonisomorphic_graphs(7) {
        for s in 0u32..(1 << 7) {
            let mut adj = g.clone();
            for (v, m) in adj.iter_mut().enumerate() {
                if s >> v & 1 == 1 {
                    *m |= 1 << 7;
                }
            }
            adj.push(s);
            out.push(adj);
        }
    }
    out
}
