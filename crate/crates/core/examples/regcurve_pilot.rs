//! Pilot run that produces `tests/fixtures/regcurve_threshold.json`.
//!
//! Measures, for the fixture's random graph and seeds, how often the
//! exact-given-polls defect at the large poll size is at most the defect
//! at poll size zero, and prints the fixture JSON with the observed pass
//! fraction. Run with:
//!
//! ```text
//! cargo run --example regcurve_pilot
//! ```

use removal_lab::hypergraph::Hypergraph;
use removal_lab::limits::{regularity_defect_curve, DefectEstimator};

fn main() {
    let (n, p, graph_seed) = (200usize, 0.5f64, 424242u64);
    let (poll_small, poll_large) = (0usize, 8usize);
    let trials = 20u64;

    let graph = Hypergraph::random(n, 2, p, graph_seed).expect("graph");
    let mut passes = 0u64;
    let mut rows = Vec::new();
    for seed in 0..trials {
        let curve = regularity_defect_curve(
            &graph,
            &[poll_small, poll_large],
            1,
            DefectEstimator::ExactGivenPolls,
            seed,
        )
        .expect("curve");
        let at_small = curve[0].mean_defect;
        let at_large = curve[1].mean_defect;
        let pass = at_large <= at_small;
        passes += pass as u64;
        rows.push(format!(
            "    {{\"seed\": {seed}, \"at_small\": {at_small:.6e}, \"at_large\": {at_large:.6e}, \"pass\": {pass}}}"
        ));
    }
    let fraction = passes as f64 / trials as f64;
    println!("{{");
    println!("  \"graph\": {{\"n\": {n}, \"p\": {p}, \"seed\": {graph_seed}}},");
    println!("  \"poll_small\": {poll_small},");
    println!("  \"poll_large\": {poll_large},");
    println!("  \"trials\": {trials},");
    println!("  \"estimator\": \"exact-given-polls\",");
    println!("  \"min_pass_fraction\": 0.8,");
    println!("  \"observed_pass_fraction\": {fraction},");
    println!("  \"generator\": \"crates/core/examples/regcurve_pilot.rs\",");
    println!("  \"pilot_rows\": [");
    println!("{}", rows.join(",\n"));
    println!("  ]");
    println!("}}");
}
