//! Small directed-graph routines over adjacency lists with local `usize` indices.

use std::collections::VecDeque;

/// Strongly connected components (iterative Kosaraju). Components come out in
/// reverse topological order of the condensation; vertex lists are sorted.
pub(crate) fn strongly_connected_components(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut pred = vec![Vec::new(); n];
    for (u, out) in succ.iter().enumerate() {
        for &v in out {
            pred[v].push(u);
        }
    }

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < succ[u].len() {
                let v = succ[u][*next];
                *next += 1;
                if !visited[v] {
                    visited[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }

    let mut comp = vec![usize::MAX; n];
    let mut components = Vec::new();
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![root];
        comp[root] = id;
        let mut i = 0;
        while i < members.len() {
            let u = members[i];
            i += 1;
            for &v in &pred[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    members.push(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// True if the component has at least one internal edge (a genuine cycle).
pub(crate) fn has_internal_edge(succ: &[Vec<usize>], members: &[usize]) -> bool {
    members
        .iter()
        .any(|&u| succ[u].iter().any(|v| members.binary_search(v).is_ok()))
}

/// Shortest positive path lengths from `source`. `dist[source]` is the length of
/// the shortest cycle through `source`.
pub(crate) fn positive_distances(succ: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; succ.len()];
    let mut queue = VecDeque::new();
    for &v in &succ[source] {
        if dist[v].is_none() {
            dist[v] = Some(1);
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &v in &succ[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Plain BFS distances (source at distance 0).
pub(crate) fn distances(succ: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; succ.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &v in &succ[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Period (gcd of cycle lengths) of a strongly connected graph, or `None` if
/// the graph is not strongly connected or has no edges.
pub(crate) fn period(succ: &[Vec<usize>]) -> Option<usize> {
    if succ.is_empty() {
        return None;
    }
    let level = distances(succ, 0);
    if level.iter().any(Option::is_none) {
        return None;
    }
    let mut g = 0usize;
    for (u, out) in succ.iter().enumerate() {
        let lu = level[u].unwrap();
        for &v in out {
            let lv = level[v].unwrap();
            let diff = (lu + 1).abs_diff(lv);
            g = gcd(g, diff);
        }
    }
    // Reachability from 0 alone does not give strong connectivity.
    let mut pred = vec![Vec::new(); succ.len()];
    for (u, out) in succ.iter().enumerate() {
        for &v in out {
            pred[v].push(u);
        }
    }
    if distances(&pred, 0).iter().any(Option::is_none) {
        return None;
    }
    if g == 0 {
        None
    } else {
        Some(g)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Weakly connected components of the graph restricted to `keep`.
pub(crate) fn weak_components(succ: &[Vec<usize>], keep: &[bool]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut undirected = vec![Vec::new(); n];
    for u in 0..n {
        if !keep[u] {
            continue;
        }
        for &v in &succ[u] {
            if keep[v] {
                undirected[u].push(v);
                undirected[v].push(u);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if !keep[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut members = vec![s];
        let mut i = 0;
        while i < members.len() {
            let u = members[i];
            i += 1;
            for &v in &undirected[u] {
                if !seen[v] {
                    seen[v] = true;
                    members.push(v);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_splits_two_disjoint_loops() {
        let succ = vec![vec![0], vec![1]];
        let comps = strongly_connected_components(&succ);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| has_internal_edge(&succ, c)));
    }

    #[test]
    fn scc_of_chain_is_trivial() {
        let succ = vec![vec![1], vec![2], vec![]];
        let comps = strongly_connected_components(&succ);
        assert_eq!(comps.len(), 3);
        assert!(comps.iter().all(|c| !has_internal_edge(&succ, c)));
    }

    #[test]
    fn period_of_cycles() {
        assert_eq!(period(&[vec![1], vec![0]]), Some(2));
        assert_eq!(period(&[vec![0, 1], vec![0]]), Some(1));
        assert_eq!(period(&[vec![1], vec![2], vec![0]]), Some(3));
        assert_eq!(period(&[vec![1], vec![]]), None);
    }

    #[test]
    fn shortest_return_cycle() {
        // 0 -> 1 -> 2 -> 0, plus 0 -> 2
        let succ = vec![vec![1, 2], vec![2], vec![0]];
        let d = positive_distances(&succ, 0);
        assert_eq!(d, vec![Some(2), Some(1), Some(1)]);
    }
}
