//! Example: explore a simulated app screen-graph.
//!
//! Loads a declarative screen-graph (screens, edges with action labels, a
//! start screen) and walks it with all three strategies, printing the
//! first-visit orders.
//!
//! Run with: `cargo run --release --example explore_app_graph`

use owleyes::demo::{write_demo_app_graph, DemoOptions};
use owleyes::explore::{explore, load_app_graph, Strategy};

fn main() -> owleyes::Result<()> {
    let base = std::env::temp_dir().join("owleyes_examples/explore_app_graph");
    let graph_path = write_demo_app_graph(
        &base,
        &DemoOptions { screens: 9, seed: 33, ..Default::default() },
    )?;
    println!("app graph written to {}", graph_path.display());

    let text = std::fs::read_to_string(&graph_path).expect("graph file");
    let graph = load_app_graph(&text)?;
    println!(
        "{} screens, {} edges, start {:?}\n",
        graph.screens.len(),
        graph.edges.values().map(Vec::len).sum::<usize>(),
        graph.start
    );

    for strategy in [Strategy::Dfs, Strategy::Bfs, Strategy::Random] {
        let trace = explore(&graph, strategy, 100, 4242);
        println!(
            "{:<6} visited {:>2} screens in {:>2} steps: {}",
            strategy.to_string(),
            trace.visited.len(),
            trace.step_count,
            trace.visited.join(" -> ")
        );
    }

    println!("\nwith a budget of 4:");
    for strategy in [Strategy::Dfs, Strategy::Bfs, Strategy::Random] {
        let trace = explore(&graph, strategy, 4, 4242);
        println!("{:<6} {}", strategy.to_string(), trace.visited.join(" -> "));
    }

    let json = serde_json_trace(&explore(&graph, Strategy::Bfs, 100, 0));
    println!("\ntrace as JSON:\n{json}");
    Ok(())
}

fn serde_json_trace(trace: &owleyes::explore::Trace) -> String {
    serde_json::to_string_pretty(trace).expect("trace serializes")
}
