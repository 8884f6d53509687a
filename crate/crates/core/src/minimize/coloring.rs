//! Exact vertex coloring for clock graphs.

/// An undirected simple graph on `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
}

impl Graph {
    pub fn new(n: usize) -> Graph {
        Graph {
            n,
            adj: vec![vec![false; n]; n],
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert_ne!(a, b, "no self loops");
        self.adj[a][b] = true;
        self.adj[b][a] = true;
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| (a + 1..self.n).filter(move |&b| self.adj[a][b]).map(move |b| (a, b)))
            .collect()
    }

    fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().filter(|&&e| e).count()
    }
}

/// Chromatic number by branch and bound, always extending the uncolored
/// vertex with the most distinct neighbor colors.
pub fn chromatic_number(g: &Graph) -> usize {
    if g.n == 0 {
        return 0;
    }
    let mut colors = vec![usize::MAX; g.n];
    let mut best = g.n;
    dsatur(g, &mut colors, 0, 0, &mut best);
    best
}

fn dsatur(g: &Graph, colors: &mut [usize], done: usize, used: usize, best: &mut usize) {
    if used >= *best {
        return;
    }
    if done == g.n {
        *best = used;
        return;
    }
    let sat = |v: usize| {
        let mut seen = vec![false; used];
        for u in 0..g.n {
            if g.adj[v][u] && colors[u] != usize::MAX {
                seen[colors[u]] = true;
            }
        }
        seen.iter().filter(|&&s| s).count()
    };
    let v = (0..g.n)
        .filter(|&v| colors[v] == usize::MAX)
        .max_by_key(|&v| (sat(v), g.degree(v), std::cmp::Reverse(v)))
        .unwrap();
    for c in 0..=used {
        if c == used && used + 1 >= *best {
            break;
        }
        if (0..g.n).any(|u| g.adj[v][u] && colors[u] == c) {
            continue;
        }
        colors[v] = c;
        dsatur(g, colors, done + 1, used.max(c + 1), best);
        colors[v] = usize::MAX;
    }
}

/// The lexicographically least proper coloring with the minimum number of colors.
pub fn color(g: &Graph) -> (Vec<usize>, usize) {
    let k = chromatic_number(g);
    let mut colors = vec![0; g.n];
    let found = lex_least(g, k, &mut colors, 0, 0);
    assert!(found || g.n == 0, "a {k}-coloring exists");
    (colors, k)
}

fn lex_least(g: &Graph, k: usize, colors: &mut [usize], v: usize, used: usize) -> bool {
    if v == g.n {
        return true;
    }
    for c in 0..k.min(used + 1) {
        if (0..v).any(|u| g.adj[v][u] && colors[u] == c) {
            continue;
        }
        colors[v] = c;
        if lex_least(g, k, colors, v + 1, used.max(c + 1)) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_edges(n: usize, es: &[(usize, usize)]) -> Graph {
        let mut g = Graph::new(n);
        for &(a, b) in es {
            g.add_edge(a, b);
        }
        g
    }

    fn brute_force(g: &Graph) -> usize {
        (0..=g.n)
            .find(|&k| {
                let total = k.pow(g.n as u32);
                (0..total).any(|mut code| {
                    let cs: Vec<usize> = (0..g.n)
                        .map(|_| {
                            let c = code % k;
                            code /= k;
                            c
                        })
                        .collect();
                    g.edges().iter().all(|&(a, b)| cs[a] != cs[b])
                })
            })
            .unwrap()
    }

    #[test]
    fn small_graphs() {
        assert_eq!(color(&Graph::new(0)), (vec![], 0));
        assert_eq!(color(&from_edges(3, &[(0, 1), (1, 2), (0, 2)])).1, 3);
        assert_eq!(color(&from_edges(4, &[(0, 1), (1, 2), (2, 3)])), (vec![0, 1, 0, 1], 2));
    }

    #[test]
    fn lexicographic_choice() {
        let g = from_edges(4, &[(0, 1), (2, 3), (1, 3), (0, 2)]);
        assert_eq!(color(&g), (vec![0, 1, 1, 0], 2));
    }

    #[test]
    fn agrees_with_brute_force() {
        use rand::Rng;
        let mut rng = crate::random::rng(3);
        for _ in 0..150 {
            let n = rng.gen_range(0..=7);
            let mut g = Graph::new(n);
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.45) {
                        g.add_edge(a, b);
                    }
                }
            }
            let (cs, k) = color(&g);
            assert_eq!(k, brute_force(&g));
            assert!(g.edges().iter().all(|&(a, b)| cs[a] != cs[b]));
        }
    }
}
