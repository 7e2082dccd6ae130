//! Simulated app exploration over a declarative screen-graph.
//!
//! The graph JSON is `{"start": id, "screens": {id: {"screenshot": path,
//! "hierarchy": path-or-null}}, "edges": {id: [{"action": label, "to": id}]}}`.
//! Traversal honors declared edge order; every strategy visits a screen at
//! most once and stops at the visit budget or exhaustion.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Screen {
    pub screenshot: PathBuf,
    #[serde(default)]
    pub hierarchy: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub action: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppGraph {
    pub start: String,
    pub screens: BTreeMap<String, Screen>,
    #[serde(default)]
    pub edges: BTreeMap<String, Vec<Edge>>,
}

impl AppGraph {
    /// Outgoing edges of a screen, in declared order.
    pub fn edges_from(&self, id: &str) -> &[Edge] {
        self.edges.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn validate(&self) -> Result<()> {
        if self.screens.is_empty() {
            return Err(Error::Validation("app graph has no screens".into()));
        }
        let mut offenders = Vec::new();
        if !self.screens.contains_key(&self.start) {
            offenders.push(format!("start screen {:?} is not declared", self.start));
        }
        for (from, edges) in &self.edges {
            if !self.screens.contains_key(from) {
                offenders.push(format!("edge source {from:?} is not declared"));
            }
            for edge in edges {
                if !self.screens.contains_key(&edge.to) {
                    offenders.push(format!("edge {from:?} --{}--> {:?} dangles", edge.action, edge.to));
                }
            }
        }
        if offenders.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid app graph: {}", offenders.join("; "))))
        }
    }
}

pub fn load_app_graph(json_text: &str) -> Result<AppGraph> {
    let graph: AppGraph = serde_json::from_str(json_text)
        .map_err(|e| Error::Parse(format!("app graph JSON: {e}")))?;
    graph.validate()?;
    Ok(graph)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Dfs,
    Bfs,
    Random,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Dfs => "dfs",
            Strategy::Bfs => "bfs",
            Strategy::Random => "random",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dfs" => Ok(Strategy::Dfs),
            "bfs" => Ok(Strategy::Bfs),
            "random" => Ok(Strategy::Random),
            other => Err(Error::Argument(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Screens in first-visit order plus how many edge traversals it took.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub strategy: Strategy,
    pub seed: u64,
    pub step_count: usize,
    pub visited: Vec<String>,
}

/// Explores up to `budget` screens. Deterministic given `(strategy, seed)`;
/// the seed only matters for the random strategy.
pub fn explore(graph: &AppGraph, strategy: Strategy, budget: usize, seed: u64) -> Trace {
    let mut visited: Vec<String> = Vec::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut steps = 0usize;
    if budget == 0 {
        return Trace { strategy, seed, step_count: 0, visited };
    }

    match strategy {
        Strategy::Dfs => {
            let mut stack: Vec<&str> = vec![graph.start.as_str()];
            while let Some(id) = stack.pop() {
                if !seen.insert(id) {
                    continue;
                }
                visited.push(id.to_string());
                if visited.len() == budget {
                    break;
                }
                // Reverse push so declared order pops first.
                for edge in graph.edges_from(id).iter().rev() {
                    steps += 1;
                    if !seen.contains(edge.to.as_str()) {
                        stack.push(edge.to.as_str());
                    }
                }
            }
        }
        Strategy::Bfs => {
            let mut queue: VecDeque<&str> = VecDeque::new();
            queue.push_back(graph.start.as_str());
            seen.insert(&graph.start);
            while let Some(id) = queue.pop_front() {
                visited.push(id.to_string());
                if visited.len() == budget {
                    break;
                }
                for edge in graph.edges_from(id) {
                    steps += 1;
                    if seen.insert(edge.to.as_str()) {
                        queue.push_back(edge.to.as_str());
                    }
                }
            }
        }
        Strategy::Random => {
            let mut rng = SplitMix64::new(seed);
            seen.insert(&graph.start);
            visited.push(graph.start.clone());
            // Untried edges out of visited screens; the start's edges are
            // always present, so getting stuck means full exhaustion.
            let mut tried: BTreeSet<(usize, usize)> = BTreeSet::new();
            let mut frontier_of: Vec<&str> = vec![graph.start.as_str()];
            while visited.len() < budget {
                let mut untried: Vec<(usize, usize)> = Vec::new();
                for (si, screen) in frontier_of.iter().enumerate() {
                    for ei in 0..graph.edges_from(screen).len() {
                        if !tried.contains(&(si, ei)) {
                            untried.push((si, ei));
                        }
                    }
                }
                if untried.is_empty() {
                    break;
                }
                let pick = untried[rng.below(untried.len())];
                tried.insert(pick);
                steps += 1;
                let target = &graph.edges_from(frontier_of[pick.0])[pick.1].to;
                if seen.insert(target.as_str()) {
                    visited.push(target.clone());
                    frontier_of.push(target.as_str());
                }
            }
        }
    }
    Trace { strategy, seed, step_count: steps, visited }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(start: &str, screens: &[&str], edges: &[(&str, &str)]) -> AppGraph {
        let mut g = AppGraph {
            start: start.to_string(),
            screens: BTreeMap::new(),
            edges: BTreeMap::new(),
        };
        for s in screens {
            g.screens.insert(
                s.to_string(),
                Screen { screenshot: PathBuf::from(format!("{s}.png")), hierarchy: None },
            );
        }
        for (from, to) in edges {
            g.edges.entry(from.to_string()).or_default().push(Edge {
                action: format!("tap-{to}"),
                to: to.to_string(),
            });
        }
        g
    }

    #[test]
    fn parses_a_small_graph() {
        let json = r#"{
            "start": "home",
            "screens": {
                "home": {"screenshot": "home.png", "hierarchy": "home.json"},
                "settings": {"screenshot": "settings.png", "hierarchy": null},
                "about": {"screenshot": "about.png"},
                "profile": {"screenshot": "profile.png"}
            },
            "edges": {
                "home": [{"action": "tap-settings", "to": "settings"},
                          {"action": "tap-profile", "to": "profile"}],
                "settings": [{"action": "tap-about", "to": "about"}]
            }
        }"#;
        let g = load_app_graph(json).unwrap();
        assert_eq!(g.screens.len(), 4);
        assert_eq!(g.edges_from("home").len(), 2);
    }

    #[test]
    fn dangling_edge_is_named_in_the_error() {
        let mut g = graph("A", &["A", "B"], &[("A", "B")]);
        g.edges.get_mut("A").unwrap().push(Edge { action: "tap".into(), to: "Z".into() });
        let err = g.validate().unwrap_err();
        assert!(err.to_string().contains("\"Z\""), "{err}");
    }

    #[test]
    fn empty_graph_is_rejected() {
        let g = AppGraph { start: "A".into(), screens: BTreeMap::new(), edges: BTreeMap::new() };
        assert!(g.validate().is_err());
    }

    #[test]
    fn bfs_hand_trace() {
        let g = graph("A", &["A", "B", "C", "D"], &[("A", "B"), ("A", "C"), ("B", "D")]);
        let t = explore(&g, Strategy::Bfs, 4, 0);
        assert_eq!(t.visited, vec!["A", "B", "C", "D"]);
    }

    #[test]
    fn dfs_hand_trace() {
        let g = graph("A", &["A", "B", "C", "D"], &[("A", "B"), ("A", "C"), ("B", "D")]);
        let t = explore(&g, Strategy::Dfs, 4, 0);
        assert_eq!(t.visited, vec!["A", "B", "D", "C"]);
    }

    #[test]
    fn budget_caps_all_strategies() {
        let g = graph("A", &["A", "B", "C", "D"], &[("A", "B"), ("A", "C"), ("B", "D")]);
        for strategy in [Strategy::Dfs, Strategy::Bfs, Strategy::Random] {
            let t = explore(&g, strategy, 2, 5);
            assert_eq!(t.visited.len(), 2, "{strategy}");
            assert_eq!(t.visited[0], "A");
        }
    }

    #[test]
    fn random_is_deterministic_per_seed() {
        let g = graph(
            "A",
            &["A", "B", "C", "D", "E"],
            &[("A", "B"), ("A", "C"), ("B", "D"), ("C", "E"), ("D", "E")],
        );
        let t1 = explore(&g, Strategy::Random, 10, 99);
        let t2 = explore(&g, Strategy::Random, 10, 99);
        assert_eq!(t1, t2);
        assert_eq!(t1.visited.len(), 5);
    }

    #[test]
    fn no_screen_repeats_and_all_reachable_get_visited() {
        let g = graph(
            "A",
            &["A", "B", "C", "D", "E"],
            &[("A", "B"), ("B", "C"), ("C", "A"), ("C", "D"), ("D", "E"), ("E", "B")],
        );
        for strategy in [Strategy::Dfs, Strategy::Bfs, Strategy::Random] {
            let t = explore(&g, strategy, 100, 7);
            let unique: BTreeSet<_> = t.visited.iter().collect();
            assert_eq!(unique.len(), t.visited.len(), "{strategy}: repeats");
            assert_eq!(t.visited.len(), 5, "{strategy}: missed screens");
        }
    }

    #[test]
    fn unreachable_screens_are_never_visited() {
        let g = graph("A", &["A", "B", "island"], &[("A", "B")]);
        for strategy in [Strategy::Dfs, Strategy::Bfs, Strategy::Random] {
            let t = explore(&g, strategy, 100, 3);
            assert!(!t.visited.iter().any(|s| s == "island"), "{strategy}");
        }
    }
}
