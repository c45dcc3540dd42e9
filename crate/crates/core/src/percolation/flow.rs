//! Vertex-disjoint open crossings by unit-capacity maximum flow.

use std::collections::VecDeque;

use super::SiteField;
use crate::error::{Error, Result};

struct Dinic {
    head: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u32>,
    next: Vec<usize>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

const NIL: usize = usize::MAX;

impl Dinic {
    fn new(nodes: usize) -> Self {
        Dinic {
            head: vec![NIL; nodes],
            to: Vec::new(),
            cap: Vec::new(),
            next: Vec::new(),
            level: vec![0; nodes],
            iter: vec![NIL; nodes],
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: u32) {
        for (a, b, cap) in [(u, v, c), (v, u, 0)] {
            self.to.push(b);
            self.cap.push(cap);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let mut e = self.head[u];
            while e != NIL {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
                e = self.next[e];
            }
        }
        self.level[t] >= 0
    }

    /// Iterative blocking-flow augmentation of one unit along a level path.
    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                for &e in &path {
                    self.cap[e] -= 1;
                    self.cap[e ^ 1] += 1;
                }
                return true;
            }
            let mut advanced = false;
            while self.iter[u] != NIL {
                let e = self.iter[u];
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 {
                    path.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                self.iter[u] = self.next[e];
            }
            if !advanced {
                // dead end: retreat
                self.level[u] = -1;
                match path.pop() {
                    Some(e) => {
                        u = self.to[e ^ 1];
                        self.iter[u] = self.next[self.iter[u]];
                    }
                    None => return false,
                }
            }
        }
    }

    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut flow = 0;
        while self.bfs(s, t) {
            self.iter.clone_from(&self.head);
            while self.augment(s, t) {
                flow += 1;
            }
        }
        flow
    }
}

/// Maximal number of vertex-disjoint open paths from the face `x_j = 0` to
/// the face `x_j = n - 1`.
pub fn crossing_count(field: &SiteField, direction: usize) -> Result<usize> {
    crossing_paths(field, direction).map(|p| p.len())
}

/// A maximal family of vertex-disjoint open crossings, each a site list
/// from the lower face to the upper face.
pub fn crossing_paths(field: &SiteField, direction: usize) -> Result<Vec<Vec<usize>>> {
    let d = field.dim();
    if d < 2 {
        return Err(Error::InvalidParameter("crossings need dim >= 2".into()));
    }
    if direction >= d {
        return Err(Error::InvalidParameter(format!("direction {direction} out of range for dim {d}")));
    }
    let total = field.len();
    let n = field.n();
    let (source, sink) = (2 * total, 2 * total + 1);
    let mut g = Dinic::new(2 * total + 2);
    let mut site_edge = vec![NIL; total];
    for s in (0..total).filter(|&s| field.is_open(s)) {
        g.add_edge(2 * s, 2 * s + 1, 1);
        site_edge[s] = g.to.len() - 2;
        let c = field.coord(s, direction);
        if c == 0 {
            g.add_edge(source, 2 * s, 1);
        }
        if c + 1 == n {
            g.add_edge(2 * s + 1, sink, 1);
        }
        for t in field.neighbors(s).filter(|&t| field.is_open(t)) {
            g.add_edge(2 * s + 1, 2 * t, 1);
        }
    }
    let flow = g.max_flow(source, sink);
    // decompose the flow into site paths
    let used = |g: &Dinic, e: usize| g.cap[e] == 0 && g.cap[e ^ 1] == 1;
    let mut paths = Vec::with_capacity(flow);
    let mut e = g.head[source];
    while e != NIL {
        if e.is_multiple_of(2) && used(&g, e) {
            let mut s = g.to[e] / 2;
            let mut path = vec![s];
            loop {
                if field.coord(s, direction) + 1 == n && {
                    let mut f = g.head[2 * s + 1];
                    let mut hit = false;
                    while f != NIL {
                        if f.is_multiple_of(2) && g.to[f] == sink && used(&g, f) {
                            hit = true;
                        }
                        f = g.next[f];
                    }
                    hit
                } {
                    break;
                }
                let mut f = g.head[2 * s + 1];
                let mut nxt = None;
                while f != NIL {
                    let v = g.to[f];
                    if f.is_multiple_of(2) && v < 2 * total && v.is_multiple_of(2) && used(&g, f) {
                        nxt = Some(v / 2);
                        break;
                    }
                    f = g.next[f];
                }
                match nxt {
                    Some(t) => {
                        s = t;
                        path.push(s);
                    }
                    None => break,
                }
            }
            paths.push(path);
        }
        e = g.next[e];
    }
    debug_assert!(site_edge.iter().all(|&e| e == NIL || g.cap[e] <= 1));
    paths.sort();
    Ok(paths)
}
