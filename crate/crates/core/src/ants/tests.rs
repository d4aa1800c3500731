use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::topology::shortest_hops;

fn net(n: usize, edges: &[(usize, usize)]) -> PhysicalNetwork {
    PhysicalNetwork::from_edges(n, edges).unwrap()
}

fn line(n: usize) -> PhysicalNetwork {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    net(n, &edges)
}

fn visited(n: usize, nodes: &[usize]) -> Vec<bool> {
    let mut v = vec![false; n];
    for &i in nodes {
        v[i] = true;
    }
    v
}

/// Walks `nodes` (after src) over physical edges, updating state as a
/// forward walk would.
fn walked(
    states: &mut StateTable,
    colony: ColonyKind,
    src: usize,
    nodes: &[usize],
    p: &ColonyParams,
) -> ForwardAnt {
    let dst = *nodes.last().unwrap();
    let mut ant = ForwardAnt::new(colony, NodeId(src), NodeId(dst), 1.0, states.len());
    for &n in nodes {
        ant.advance(NodeId(n), Step::Physical { tau: p.tau0 });
        let st = states.node_mut(NodeId(n));
        let d = st.demand(ant.dst);
        st.demand_est.insert(ant.dst, update_demand(d, 1.0, p));
        let h = update_hops_from(st.hops_from(ant.src), ant.hop_count);
        st.hops_from.insert(ant.src, h);
    }
    ant.status = AntStatus::Arrived;
    ant
}

#[test]
fn single_candidate_is_always_chosen() {
    let g = line(3);
    let p = ColonyParams::default();
    let states = StateTable::new(&g, &p, &[NodeId(2)]);
    let ov = OverlayNetwork::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let c = select_next_hop(
            NodeId(1),
            NodeId(2),
            &visited(3, &[0, 1]),
            &PositiveExplorer,
            &states,
            &ov,
            &g,
            &p,
            &mut rng,
        );
        assert_eq!(
            c,
            Choice::Physical {
                next: NodeId(2),
                tau: 0.1
            }
        );
    }
}

#[test]
fn proportional_rule_probabilities() {
    // star around 0 with leaves 1 and 2, destination 3 hanging off both leaves
    let g = net(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
    let p = ColonyParams::default();
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    states.node_mut(NodeId(1)).eta.insert(NodeId(3), 0.5);
    states.node_mut(NodeId(2)).eta.insert(NodeId(3), 0.25);
    // weights 0.1 * 0.125 = 0.0125 and 0.1 * 0.015625 = 0.0015625: 8/9 vs 1/9
    let ov = OverlayNetwork::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws = 90_000;
    let mut first = 0;
    for _ in 0..draws {
        match select_next_hop(
            NodeId(0),
            NodeId(3),
            &visited(4, &[0]),
            &PositiveExplorer,
            &states,
            &ov,
            &g,
            &p,
            &mut rng,
        ) {
            Choice::Physical {
                next: NodeId(1), ..
            } => first += 1,
            Choice::Physical {
                next: NodeId(2), ..
            } => {}
            other => panic!("unexpected {other:?}"),
        }
    }
    let frac = first as f64 / draws as f64;
    assert!((frac - 8.0 / 9.0).abs() < 0.006, "{frac}");
}

#[test]
fn zero_weights_fall_back_to_uniform() {
    let g = net(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
    let p = ColonyParams::default();
    let states = StateTable::new(&g, &p, &[NodeId(3)]);
    let ov = OverlayNetwork::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = [0usize; 4];
    for _ in 0..20_000 {
        if let Choice::Physical { next, .. } = select_next_hop(
            NodeId(0),
            NodeId(3),
            &visited(4, &[0]),
            &PositiveExplorer,
            &states,
            &ov,
            &g,
            &p,
            &mut rng,
        ) {
            counts[next.index()] += 1;
        }
    }
    assert_eq!(counts[0] + counts[3], 0);
    assert!((counts[1] as f64 / 20_000.0 - 0.5).abs() < 0.02);
}

#[test]
fn destination_is_taken_when_adjacent() {
    let g = net(3, &[(0, 1), (0, 2), (1, 2)]);
    let p = ColonyParams::default();
    let mut states = StateTable::new(&g, &p, &[NodeId(2)]);
    states.node_mut(NodeId(1)).eta.insert(NodeId(2), 1.0);
    let ov = OverlayNetwork::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let c = select_next_hop(
            NodeId(0),
            NodeId(2),
            &visited(3, &[0]),
            &PositiveExplorer,
            &states,
            &ov,
            &g,
            &p,
            &mut rng,
        );
        assert!(matches!(
            c,
            Choice::Physical {
                next: NodeId(2),
                ..
            }
        ));
    }
}

#[test]
fn exploiter_never_enters_a_no_entry_edge() {
    let g = net(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
    let p = ColonyParams::default();
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    states.node_mut(NodeId(1)).eta.insert(NodeId(3), 1.0);
    states.node_mut(NodeId(2)).eta.insert(NodeId(3), 0.01);
    *states.tau_mut(NodeId(0), NodeId(1), NodeId(3)) = -0.1;
    let ov = OverlayNetwork::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let c = select_next_hop(
            NodeId(0),
            NodeId(3),
            &visited(4, &[0]),
            &Exploiter,
            &states,
            &ov,
            &g,
            &p,
            &mut rng,
        );
        assert!(
            matches!(
                c,
                Choice::Physical {
                    next: NodeId(2),
                    ..
                }
            ),
            "{c:?}"
        );
    }
    // explorers still see it
    let mut saw = false;
    for _ in 0..1000 {
        let c = select_next_hop(
            NodeId(0),
            NodeId(3),
            &visited(4, &[0]),
            &NegativeExplorer,
            &states,
            &ov,
            &g,
            &p,
            &mut rng,
        );
        saw |= matches!(
            c,
            Choice::Physical {
                next: NodeId(2),
                ..
            }
        );
        assert!(matches!(c, Choice::Physical { .. }));
    }
    assert!(saw);
    *states.tau_mut(NodeId(0), NodeId(2), NodeId(3)) = 0.0;
    let c = select_next_hop(
        NodeId(0),
        NodeId(3),
        &visited(4, &[0]),
        &Exploiter,
        &states,
        &ov,
        &g,
        &p,
        &mut rng,
    );
    assert_eq!(c, Choice::Blocked);
}

#[test]
fn overlay_shortcut_comes_first() {
    let g = line(5);
    let p = ColonyParams::default();
    let states = StateTable::new(&g, &p, &[NodeId(4)]);
    let mut ov = OverlayNetwork::new();
    ov.establish_link(&g, NodeId(0), NodeId(3), NodeId(4), 0, 10)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let c = select_next_hop(
        NodeId(0),
        NodeId(4),
        &visited(5, &[0]),
        &Exploiter,
        &states,
        &ov,
        &g,
        &p,
        &mut rng,
    );
    assert_eq!(
        c,
        Choice::Overlay {
            next: NodeId(3),
            hop_length: 3
        }
    );
    // visited endpoint falls back to physical neighbors
    let c = select_next_hop(
        NodeId(0),
        NodeId(4),
        &visited(5, &[0, 3]),
        &Exploiter,
        &states,
        &ov,
        &g,
        &p,
        &mut rng,
    );
    assert!(matches!(
        c,
        Choice::Physical {
            next: NodeId(1),
            ..
        }
    ));

    let mut states = StateTable::new(&g, &p, &[NodeId(4)]);
    let ant = ForwardAnt::new(ColonyKind::Exploiter, NodeId(0), NodeId(4), 1.0, 5);
    let ant = forward_walk(ant, &Exploiter, &mut states, &ov, &g, &p, &mut rng);
    assert_eq!(ant.status, AntStatus::Arrived);
    assert_eq!(ant.path, vec![NodeId(3), NodeId(4)]);
    assert_eq!(ant.hop_count, 4);
    assert_eq!(states.node(NodeId(3)).hops_from(NodeId(0)), Some(3));
}

#[test]
fn forward_walk_to_adjacent_destination() {
    let g = line(2);
    let p = ColonyParams::default();
    let mut states = StateTable::new(&g, &p, &[NodeId(1)]);
    let ov = OverlayNetwork::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let ant = ForwardAnt::new(ColonyKind::PositiveExplorer, NodeId(0), NodeId(1), 2.0, 2);
    let ant = forward_walk(ant, &PositiveExplorer, &mut states, &ov, &g, &p, &mut rng);
    assert_eq!(ant.status, AntStatus::Arrived);
    assert_eq!(ant.path, vec![NodeId(1)]);
    assert_eq!(ant.hop_count, 1);
    let st = states.node(NodeId(1));
    assert!((st.demand(NodeId(1)) - 0.1).abs() < 1e-15);
    assert_eq!(st.hops_from(NodeId(0)), Some(1));
}

#[test]
fn forward_walk_dead_ends() {
    // 0 - 1 - 2 with 3 hanging off 1: an ant at 2 heading to 3 after 0,1 is stuck
    let g = net(4, &[(0, 1), (1, 2), (1, 3)]);
    let p = ColonyParams::default();
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    let ov = OverlayNetwork::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut ant = ForwardAnt::new(ColonyKind::PositiveExplorer, NodeId(2), NodeId(3), 1.0, 4);
    ant.visited[1] = true;
    let ant = forward_walk(ant, &PositiveExplorer, &mut states, &ov, &g, &p, &mut rng);
    assert_eq!(ant.status, AntStatus::DeadEnd);
    assert!(ant.path.is_empty());
}

#[test]
fn walks_never_revisit() {
    let g = crate::topology::generate_random_network(12, 4.0, 9).unwrap();
    let p = ColonyParams::default();
    let dsts: Vec<_> = (1..12).map(NodeId).collect();
    let mut states = StateTable::new(&g, &p, &dsts);
    let ov = OverlayNetwork::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..500 {
        let dst = dsts[k % dsts.len()];
        let ant = ForwardAnt::new(ColonyKind::PositiveExplorer, NodeId(0), dst, 1.0, 12);
        let ant = forward_walk(ant, &PositiveExplorer, &mut states, &ov, &g, &p, &mut rng);
        let full = ant.full_path();
        let mut seen = std::collections::BTreeSet::new();
        assert!(full.iter().all(|n| seen.insert(*n)));
        assert_eq!(ant.hop_count as usize, ant.path.len());
        assert_eq!(
            ant.status == AntStatus::Arrived,
            ant.path.last() == Some(&dst)
        );
    }
}

#[test]
fn bad_trail_classification() {
    let g = line(4);
    let p = ColonyParams::default();
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    let mut ant = ForwardAnt::new(ColonyKind::NegativeExplorer, NodeId(0), NodeId(3), 1.0, 4);
    ant.status = AntStatus::Arrived;
    ant.hop_count = 5;
    assert!(!classify_bad_trail(&ant, &states, 1.5));
    states.node_mut(NodeId(3)).hops_from.insert(NodeId(0), 3);
    assert!(classify_bad_trail(&ant, &states, 1.5));
    ant.hop_count = 4;
    assert!(!classify_bad_trail(&ant, &states, 1.5));
}

#[test]
fn two_hop_backward_walk_evaluates_the_middle_node() {
    let g = line(3);
    let params = AntParams::default();
    let p = params.colony;
    let mut states = StateTable::new(&g, &p, &[NodeId(2)]);
    let ant = walked(&mut states, ColonyKind::PositiveExplorer, 0, &[1, 2], &p);
    let b = backward_walk(
        BackwardAnt::new(ant, false),
        &PositiveExplorer,
        &mut states,
        &g,
        &params,
    )
    .unwrap();
    assert_eq!(b.evaluated, vec![NodeId(1)]);
    assert_eq!(b.overlay_candidate, Some(NodeId(1)));
    let m = states.node(NodeId(1));
    assert_eq!(m.hops_to(NodeId(2)), Some(1));
    assert_eq!(m.eta(NodeId(2)), 1.0);
    // cost = 2 * 1 + 1 * 0.05 * 1
    assert!((b.min_overlay_cost - 2.05).abs() < 1e-12);
    let expected_sigma = 0.1f64.max(0.95 * 0.1 + 0.05 * (100.0 / 2.05));
    assert!((m.sigma - expected_sigma).abs() < 1e-12);
    assert_eq!(b.sigma_at_candidate, m.sigma);
}

#[test]
fn one_hop_backward_walk_has_no_candidate() {
    let g = line(2);
    let params = AntParams::default();
    let p = params.colony;
    let mut states = StateTable::new(&g, &p, &[NodeId(1)]);
    *states.tau_mut(NodeId(0), NodeId(1), NodeId(1)) = 0.05;
    let ant = walked(&mut states, ColonyKind::PositiveExplorer, 0, &[1], &p);
    let b = backward_walk(
        BackwardAnt::new(ant, false),
        &PositiveExplorer,
        &mut states,
        &g,
        &params,
    )
    .unwrap();
    assert!(b.evaluated.is_empty());
    assert_eq!(b.overlay_candidate, None);
    assert!((states.tau(NodeId(0), NodeId(1), NodeId(1)) - 0.0525).abs() < 1e-15);
}

#[test]
fn no_entry_edges_exclude_every_candidate() {
    let g = line(4);
    let params = AntParams::default();
    let p = params.colony;
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    // after one positive deposit these stay below tau_min = 0.01
    *states.tau_mut(NodeId(1), NodeId(2), NodeId(3)) = -0.1;
    *states.tau_mut(NodeId(2), NodeId(3), NodeId(3)) = -0.1;
    let ant = walked(&mut states, ColonyKind::PositiveExplorer, 0, &[1, 2, 3], &p);
    let b = backward_walk(
        BackwardAnt::new(ant, false),
        &PositiveExplorer,
        &mut states,
        &g,
        &params,
    )
    .unwrap();
    assert_eq!(b.evaluated, vec![NodeId(2), NodeId(1)]);
    assert_eq!(b.overlay_candidate, None);
    assert_eq!(b.min_overlay_cost, f64::INFINITY);
}

#[test]
fn cost_ties_go_to_the_source_side() {
    let g = line(4);
    let params = AntParams::default();
    let p = params.colony;
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    let ant = walked(&mut states, ColonyKind::PositiveExplorer, 0, &[1, 2, 3], &p);
    // node 1: 2*1 + 1.5*2 = 5, node 2: 2*2 + 1.0*1 = 5
    states.node_mut(NodeId(1)).demand_est.insert(NodeId(3), 1.5);
    states.node_mut(NodeId(2)).demand_est.insert(NodeId(3), 1.0);
    let b = backward_walk(
        BackwardAnt::new(ant, false),
        &PositiveExplorer,
        &mut states,
        &g,
        &params,
    )
    .unwrap();
    assert_eq!(b.min_overlay_cost, 5.0);
    assert_eq!(b.overlay_candidate, Some(NodeId(1)));
}

#[test]
fn negative_marking_only_on_bad_trails() {
    let g = line(4);
    let params = AntParams::default();
    let p = params.colony;
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    let ant = walked(&mut states, ColonyKind::NegativeExplorer, 0, &[1, 2, 3], &p);
    let good = backward_walk(
        BackwardAnt::new(ant.clone(), false),
        &NegativeExplorer,
        &mut states,
        &g,
        &params,
    )
    .unwrap();
    assert!(good.overlay_candidate.is_some());
    assert_eq!(states.tau(NodeId(1), NodeId(2), NodeId(3)), 0.1);

    let bad = backward_walk(
        BackwardAnt::new(ant, true),
        &NegativeExplorer,
        &mut states,
        &g,
        &params,
    )
    .unwrap();
    assert_eq!(bad.overlay_candidate, None);
    for (v, w) in [(0, 1), (1, 2), (2, 3)] {
        assert_eq!(states.tau(NodeId(v), NodeId(w), NodeId(3)), -0.1);
    }
    // the unused direction is untouched
    assert_eq!(states.tau(NodeId(2), NodeId(1), NodeId(3)), 0.1);
}

#[test]
fn backward_walk_rejects_broken_paths() {
    let g = line(4);
    let params = AntParams::default();
    let p = params.colony;
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    let mut ant = ForwardAnt::new(ColonyKind::PositiveExplorer, NodeId(0), NodeId(3), 1.0, 4);
    assert_eq!(
        backward_walk(
            BackwardAnt::new(ant.clone(), false),
            &PositiveExplorer,
            &mut states,
            &g,
            &params
        ),
        Err(WalkFault::NotArrived(AntStatus::Alive))
    );
    ant.advance(NodeId(2), Step::Physical { tau: 0.1 });
    ant.advance(NodeId(3), Step::Physical { tau: 0.1 });
    ant.status = AntStatus::Arrived;
    assert_eq!(
        backward_walk(
            BackwardAnt::new(ant, false),
            &PositiveExplorer,
            &mut states,
            &g,
            &params
        ),
        Err(WalkFault::NotAdjacent {
            from: NodeId(0),
            to: NodeId(2)
        })
    );
}

#[test]
fn eta_denominator_flag() {
    let g = line(4);
    let mut params = AntParams::default();
    let p = params.colony;
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    let ant = walked(&mut states, ColonyKind::PositiveExplorer, 0, &[1, 2, 3], &p);
    backward_walk(
        BackwardAnt::new(ant.clone(), false),
        &PositiveExplorer,
        &mut states,
        &g,
        &params,
    )
    .unwrap();
    assert_eq!(states.node(NodeId(1)).eta(NodeId(3)), 0.5);

    params.eta_denominator = EtaDenominator::ToSrc;
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    let ant = walked(&mut states, ColonyKind::PositiveExplorer, 0, &[1, 2, 3], &p);
    backward_walk(
        BackwardAnt::new(ant, false),
        &PositiveExplorer,
        &mut states,
        &g,
        &params,
    )
    .unwrap();
    assert_eq!(states.node(NodeId(1)).eta(NodeId(3)), 1.0);
    assert_eq!(states.node(NodeId(2)).eta(NodeId(3)), 0.5);
}

#[test]
fn establishment_at_source() {
    let g = net(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
    let params = AntParams::default();
    let p = params.colony;
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    let mut ov = OverlayNetwork::new();

    let none = BackwardAnt::new(
        walked(&mut states, ColonyKind::PositiveExplorer, 0, &[1, 2, 3], &p),
        false,
    );
    assert_eq!(
        establish_overlay_at_source(&none, &mut ov, &g, 1, 50),
        Ok(None)
    );
    assert!(ov.is_empty());

    let mut b = none.clone();
    b.overlay_candidate = Some(NodeId(2));
    let link = establish_overlay_at_source(&b, &mut ov, &g, 1, 50)
        .unwrap()
        .unwrap();
    assert_eq!(link.hop_length, shortest_hops(&g, NodeId(0))[2]);
    assert_eq!(link.expires_round, 51);

    let mut again = b.clone();
    again.overlay_candidate = Some(NodeId(1));
    assert_eq!(
        establish_overlay_at_source(&again, &mut ov, &g, 2, 50),
        Ok(None)
    );
    assert_eq!(ov.lookup(NodeId(0), NodeId(3)).unwrap().endpoint, NodeId(2));
}

#[test]
fn forced_overlay_hop_is_not_reinforced_at_the_source() {
    let g = line(4);
    let params = AntParams::default();
    let p = params.colony;
    let mut states = StateTable::new(&g, &p, &[NodeId(3)]);
    *states.tau_mut(NodeId(0), NodeId(1), NodeId(3)) = 0.05;
    *states.tau_mut(NodeId(1), NodeId(2), NodeId(3)) = 0.05;
    let mut ov = OverlayNetwork::new();
    ov.establish_link(&g, NodeId(0), NodeId(1), NodeId(3), 0, 50)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ant = ForwardAnt::new(ColonyKind::PositiveExplorer, NodeId(0), NodeId(3), 1.0, 4);
    let ant = forward_walk(ant, &PositiveExplorer, &mut states, &ov, &g, &p, &mut rng);
    assert_eq!(ant.steps[0], Step::Overlay { hop_length: 1 });
    backward_walk(
        BackwardAnt::new(ant, false),
        &PositiveExplorer,
        &mut states,
        &g,
        &params,
    )
    .unwrap();
    assert_eq!(states.tau(NodeId(0), NodeId(1), NodeId(3)), 0.05);
    assert!((states.tau(NodeId(1), NodeId(2), NodeId(3)) - 0.0525).abs() < 1e-15);
}
