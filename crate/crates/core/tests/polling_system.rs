//! Cross-module check: a downset factor system assembled from a polled
//! graph sample. The polled-signature factor plays the role of the
//! shared low factor, and the measured independence defects are nonzero
//! but small — unlike product systems, which are exact.

use std::collections::BTreeMap;

use removal_lab::hypergraph::Hypergraph;
use removal_lab::limits::polled_pair_exact;
use removal_lab::probspace::{Mode, Scalar};
use removal_lab::uip::{Downset, FactorSystem};

#[test]
fn polled_graph_system_has_small_nonzero_defects() {
    let graph = Hypergraph::random(40, 2, 0.5, 31).unwrap();
    let sample = polled_pair_exact(&graph, 4, 7).unwrap();

    // Ground {0, 1}: member factors are signature-join-edge-bit factors,
    // the empty member carries the shared signature factor.
    let i_max = Downset::new(2, [0b00, 0b01, 0b10]).unwrap();
    let mut factors = BTreeMap::new();
    factors.insert(0b00, sample.signature.clone());
    factors.insert(0b01, sample.signature.join(&sample.first_edge).unwrap());
    factors.insert(0b10, sample.signature.join(&sample.second_edge).unwrap());
    let system = FactorSystem::new(sample.space.clone(), i_max, factors).unwrap();

    // Nesting holds by construction; independence defects are measured,
    // not exact.
    let report = system
        .check_hypotheses(&Scalar::zero(Mode::Rational), 2)
        .unwrap();
    assert!(report.nesting_ok);
    let defect = report.max_defect.to_f64();
    assert!(defect > 0.0, "defect should be nonzero, got {defect}");
    assert!(defect < 0.05, "defect should be small, got {defect}");
    assert!(!report.ok); // not exact, so the zero-tolerance gate fails

    // At a tolerance above the measured defect the system is accepted.
    let relaxed = system
        .check_hypotheses(&Scalar::ratio(1, 10), 2)
        .unwrap();
    assert!(relaxed.ok);
}
