#[test]
fn probe_generated_instances() {
    use removal_lab::uip::*;
    use removal_lab::probspace::Event;
    for seed in 0..300u64 {
        let config = GeneratorConfig { ground: 3, ..GeneratorConfig::default() };
        let problem = generate_certified_problem(seed, &config).unwrap();
        let space = problem.system().space();
        let mut joint = Event::full(space);
        let mut empties = 0;
        let mut pairs = 0;
        for e in problem.system().index_set().members() {
            if e.count_ones() == 2 { pairs += 1; }
            if problem.event(e).is_empty_set() { empties += 1; }
            joint = joint.and(problem.event(e)).unwrap();
        }
        let sol = uip_construct(&problem, &SolveMode::Certified).unwrap();
        println!(
            "seed {seed}: members={} pairs={pairs} empty_events={empties} joint_card={} splits={}",
            problem.system().index_set().len(), joint.card(), sol.certificate.finite_rank_splits
        );
    }
}
