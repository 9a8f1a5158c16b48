use std::collections::VecDeque;

use num_bigint::BigUint;

use super::GrowthSeries;
use crate::error::{Error, Result};

/// A finite extended metric space. `None` marks infinite distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    dist: Vec<Vec<Option<u64>>>,
}

impl FiniteMetricSpace {
    /// Validates symmetry, `d(x, x) = 0`, positivity and the triangle inequality.
    pub fn from_distances(dist: Vec<Vec<Option<u64>>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::invalid("metric space needs at least one point"));
        }
        if dist.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("distance matrix must be square"));
        }
        for i in 0..n {
            if dist[i][i] != Some(0) {
                return Err(Error::invalid(format!("d({i}, {i}) must be 0")));
            }
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::invalid(format!("d({i}, {j}) is not symmetric")));
                }
                if i != j && dist[i][j] == Some(0) {
                    return Err(Error::invalid(format!("distinct points {i}, {j} at distance 0")));
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                let Some(a) = dist[i][k] else { continue };
                for j in 0..n {
                    if let Some(b) = dist[k][j] {
                        if dist[i][j].is_none_or(|d| d > a + b) {
                            return Err(Error::invalid(format!(
                                "triangle inequality fails for {i}, {k}, {j}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { dist })
    }

    /// Shortest-path metric of an undirected graph with unit edge weights.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) leaves 0..{n}")));
            }
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let dist = (0..n)
            .map(|s| {
                let mut d = vec![None; n];
                d[s] = Some(0);
                let mut queue = VecDeque::from([s]);
                while let Some(v) = queue.pop_front() {
                    let dv = d[v].expect("queued vertices are reached");
                    for &w in &adj[v] {
                        if d[w].is_none() {
                            d[w] = Some(dv + 1);
                            queue.push_back(w);
                        }
                    }
                }
                d
            })
            .collect();
        Ok(FiniteMetricSpace { dist })
    }

    /// Parses an edge list: one `a b` pair per line, a lone `a` declares an
    /// isolated vertex, `#` starts a comment. Vertices are `0..=max`.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ids = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("line {}: bad vertex {t:?}", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            match ids[..] {
                [a] => max = max.max(Some(a)),
                [a, b] => {
                    max = max.max(Some(a.max(b)));
                    edges.push((a, b));
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected one or two vertices",
                        lineno + 1
                    )))
                }
            }
        }
        let n = max.ok_or_else(|| Error::Parse("edge list has no vertices".into()))? + 1;
        FiniteMetricSpace::from_edges(n, &edges)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn distance(&self, x: usize, y: usize) -> Option<u64> {
        self.dist[x][y]
    }

    /// `|B̄(x, r)|`.
    pub fn closed_ball_size(&self, x: usize, r: u64) -> u64 {
        self.dist[x].iter().filter(|d| d.is_some_and(|d| d <= r)).count() as u64
    }
}

/// `f(r) = sup_x |B̄(x, r)|` for `r = 0..=r_max`.
pub fn graph_ball_growth(space: &FiniteMetricSpace, r_max: u64) -> GrowthSeries {
    let values = (0..=r_max)
        .map(|r| {
            let best = (0..space.len())
                .map(|x| space.closed_ball_size(x, r))
                .max()
                .unwrap_or(1);
            BigUint::from(best)
        })
        .collect();
    GrowthSeries::new(0, values).expect("ball sizes are positive and nondecreasing")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(s: &GrowthSeries) -> Vec<u64> {
        s.values().iter().map(|v| v.try_into().unwrap()).collect()
    }

    fn grid(w: usize) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for i in 0..w {
            for j in 0..w {
                if i + 1 < w {
                    e.push((i * w + j, (i + 1) * w + j));
                }
                if j + 1 < w {
                    e.push((i * w + j, i * w + j + 1));
                }
            }
        }
        e
    }

    #[test]
    fn cycle_balls() {
        let edges: Vec<_> = (0..10).map(|i| (i, (i + 1) % 10)).collect();
        let s = FiniteMetricSpace::from_edges(10, &edges).unwrap();
        let f = graph_ball_growth(&s, 8);
        assert_eq!(sizes(&f), (0..=8).map(|r| (2 * r + 1).min(10)).collect::<Vec<_>>());
    }

    #[test]
    fn grid_balls_are_diamonds() {
        let s = FiniteMetricSpace::from_edges(400, &grid(20)).unwrap();
        let f = graph_ball_growth(&s, 9);
        assert_eq!(sizes(&f), (0..=9).map(|r| 2 * r * r + 2 * r + 1).collect::<Vec<_>>());
    }

    #[test]
    fn single_point() {
        let s = FiniteMetricSpace::from_edges(1, &[]).unwrap();
        assert_eq!(sizes(&graph_ball_growth(&s, 5)), vec![1; 6]);
    }

    #[test]
    fn components_are_infinitely_far_apart() {
        let s = FiniteMetricSpace::parse_edge_list("0 1\n1 2\n# second component\n3 4\n5\n").unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.distance(0, 2), Some(2));
        assert_eq!(s.distance(0, 3), None);
        assert_eq!(sizes(&graph_ball_growth(&s, 3)), vec![1, 3, 3, 3]);
        assert!(FiniteMetricSpace::from_distances(s.dist.clone()).is_ok());
    }

    #[test]
    fn rejects_non_metrics() {
        let bad = vec![vec![Some(0), Some(5), Some(1)], vec![Some(5), Some(0), Some(1)], vec![Some(1), Some(1), Some(0)]];
        assert!(FiniteMetricSpace::from_distances(bad).is_err());
        let asym = vec![vec![Some(0), Some(1)], vec![Some(2), Some(0)]];
        assert!(FiniteMetricSpace::from_distances(asym).is_err());
        assert!(FiniteMetricSpace::parse_edge_list("0 1 2").is_err());
        assert!(FiniteMetricSpace::parse_edge_list("").is_err());
    }
}
