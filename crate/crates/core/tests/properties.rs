//! Property tests over random instances. Random structure is drawn from a
//! seeded ChaCha stream so proptest only has to shrink a few integers.

mod common;

use std::collections::BTreeMap;

use fracdecomp::{
    all_edge_effects, concentrate_on_clique, corrections, field_from_weighting, generate_divisible, lp_feasible,
    split_corrections, star_gadget, swap_gadget, sweep_into_set, verify, vertex_effect, CliqueId, CliqueIndex,
    CliqueWeighting, Error, PartiteGraph, Rational, StarGadgetSpec, SwapGadgetSpec, TransportOptions, VertexId,
};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Q = Rational;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_weighting(idx: &CliqueIndex, rng: &mut ChaCha8Rng) -> CliqueWeighting<Q> {
    let values = (0..idx.k_total()).map(|_| random_unit(rng, 4)).collect();
    CliqueWeighting::from_values(idx, values).unwrap()
}

fn effects_by_pair(g: &PartiteGraph, idx: &CliqueIndex, w: &CliqueWeighting<Q>) -> BTreeMap<Edge, Q> {
    let effects = all_edge_effects(idx, w);
    (0..g.edge_count())
        .map(|e| {
            let (a, b) = g.edge_endpoints(e);
            (edge(g.vertex(a), g.vertex(b)), effects[e].clone())
        })
        .collect()
}

/// A zero-sum weighting supported on a few random cliques.
fn zero_sum_weighting(idx: &CliqueIndex, rng: &mut ChaCha8Rng, support: usize) -> CliqueWeighting<Q> {
    let mut w = CliqueWeighting::zeros(idx);
    let mut ids: Vec<usize> = (0..idx.k_total()).collect();
    ids.shuffle(rng);
    let mut total = Q::zero();
    for &id in &ids[1..support] {
        let x = q(rng.gen_range(-3..=3), rng.gen_range(1..=3));
        total += &x;
        w.set(CliqueId(id), x);
    }
    w.set(CliqueId(ids[0]), -total);
    w
}

/// Edge-disjoint transversal triangles on `n` vertices per class.
fn triangle_packing(n: usize, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    let mut edges: Vec<Edge> = Vec::new();
    for _ in 0..rng.gen_range(0..=2 * n) {
        let t = [VertexId::new(0, rng.gen_range(0..n)), VertexId::new(1, rng.gen_range(0..n)), VertexId::new(2, rng.gen_range(0..n))];
        let sides = [edge(t[0], t[1]), edge(t[0], t[2]), edge(t[1], t[2])];
        if sides.iter().all(|s| !edges.contains(s)) {
            edges.extend(sides);
        }
    }
    edges
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn effects_match_brute_force_and_are_linear(r in 3usize..=4, n in 4usize..=6, k in 0usize..=1, seed in any::<u64>()) {
        let g = generate_divisible(r, n, k, seed % 1000).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let mut rng = rng(seed);
        let (x, y) = (random_weighting(&idx, &mut rng), random_weighting(&idx, &mut rng));
        let (a, b) = (random_unit(&mut rng, 5), random_unit(&mut rng, 5));
        let mut combo = CliqueWeighting::zeros(&idx);
        combo.add_scaled(&x, &a);
        combo.add_scaled(&y, &b);

        let (ex, ey, ec) = (effects_by_pair(&g, &idx, &x), effects_by_pair(&g, &idx, &y), effects_by_pair(&g, &idx, &combo));
        let brute = brute_effects(&idx, &x);
        for (pair, value) in &ex {
            prop_assert_eq!(value, &effect_at(&brute, pair.0, pair.1));
            prop_assert_eq!(&ec[pair], &(&a * value + &b * &ey[pair]));
        }
    }

    #[test]
    fn vertex_effect_is_every_foreign_class_sum(r in 3usize..=4, n in 4usize..=6, seed in any::<u64>()) {
        let g = generate_divisible(r, n, 1, seed % 1000).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let w = random_weighting(&idx, &mut rng(seed));
        let effects = effects_by_pair(&g, &idx, &w);
        for gv in 0..g.vertex_count() {
            let v = g.vertex(gv);
            let total = vertex_effect(&idx, &w, gv);
            for c in (0..r).filter(|&c| c != v.class) {
                let sum = (0..n)
                    .map(|o| VertexId::new(c, o))
                    .filter(|&u| adjacent(&g, v, u))
                    .fold(Q::zero(), |s, u| s + &effects[&edge(v, u)]);
                prop_assert_eq!(&sum, &total);
            }
        }
    }

    #[test]
    fn gadgets_hit_exactly_their_pattern(r in 3usize..=5, seed in any::<u64>()) {
        let g = generate_divisible(r, 8, 1, seed % 1000).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let mut rng = rng(seed);
        let j = rng.gen_range(0..r);
        let mut offsets: Vec<usize> = (0..8).collect();
        offsets.shuffle(&mut rng);
        let (v, v_prime) = (VertexId::new(j, offsets[0]), VertexId::new(j, offsets[1]));
        let common_in = |c: usize| -> Vec<VertexId> {
            (0..8).map(|o| VertexId::new(c, o)).filter(|&u| adjacent(&g, v, u) && adjacent(&g, v_prime, u)).collect()
        };

        let mut expected: BTreeMap<Edge, i64> = BTreeMap::new();
        let delta = if rng.gen_bool(0.5) {
            let targets: Option<Vec<VertexId>> = (0..r).filter(|&c| c != j).map(|c| common_in(c).choose(&mut rng).copied()).collect();
            prop_assume!(targets.is_some());
            let spec = StarGadgetSpec { v, v_prime, targets: targets.unwrap() };
            for &u in &spec.targets {
                expected.insert(edge(v, u), 1);
                expected.insert(edge(v_prime, u), -1);
            }
            star_gadget(&g, &idx, &spec)
        } else {
            let c = (j + rng.gen_range(1..r)) % r;
            let mut us = common_in(c);
            prop_assume!(us.len() >= 2);
            us.shuffle(&mut rng);
            let spec = SwapGadgetSpec { v, v_prime, u1: us[0], u2: us[1] };
            expected.extend([(edge(v, us[0]), 1), (edge(v_prime, us[1]), 1), (edge(v, us[1]), -1), (edge(v_prime, us[0]), -1)]);
            swap_gadget(&g, &idx, &spec)
        };
        let delta = match delta {
            Err(Error::GadgetInfeasible(_)) => return Ok(()),
            other => other.unwrap(),
        };
        prop_assert!(delta.is_zero_sum());
        let w: CliqueWeighting<Q> = delta.to_weighting(&idx);
        let effects = brute_effects(&idx, &w);
        for (a, b) in all_edges(&g) {
            let want = q(*expected.get(&edge(a, b)).unwrap_or(&0), 1);
            prop_assert_eq!(effect_at(&effects, a, b), want);
        }
    }

    #[test]
    fn splitter_rebuilds_the_corrections(r in 3usize..=5, seed in any::<u64>(), density in 0.1f64..0.9) {
        let g = generate_divisible(r, 8, 1, seed % 1000).unwrap();
        let mut rng = rng(seed);
        let v = VertexId::new(rng.gen_range(0..r), rng.gen_range(0..8));
        let z = random_equal_sums(&g, v, &mut rng, density);
        let plan = split_corrections(&g, v, &z).unwrap();
        for (u, value) in &z {
            prop_assert_eq!(&plan.reconstruct(*u), value);
        }
        for c in (0..r).filter(|&c| c != v.class) {
            for o in 0..8 {
                let u = VertexId::new(c, o);
                if !z.iter().any(|(w, _)| *w == u) {
                    prop_assert!(plan.reconstruct(u).is_zero());
                }
            }
        }
    }

    #[test]
    fn verifier_agrees_with_brute_force(n in 2usize..=4, seed in any::<u64>()) {
        let g = generate_divisible(3, n, 0, 0).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let mut rng = rng(seed);
        // Mix exact decompositions with perturbed ones.
        let mut w = CliqueWeighting::from_values(&idx, vec![q(1, n as i64); idx.k_total()]).unwrap();
        if rng.gen_bool(0.7) {
            let id = CliqueId(rng.gen_range(0..idx.k_total()));
            w.set(id, random_unit(&mut rng, 3));
        }
        let effects = brute_effects(&idx, &w);
        let on_target = all_edges(&g).iter().all(|&(a, b)| effect_at(&effects, a, b) == q(1, 1));
        let nonnegative = w.values().iter().all(|x| !x.is_negative());
        let record = verify(&g, &idx, &w).unwrap();
        prop_assert_eq!(record.verdict, on_target && nonnegative);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, ..ProptestConfig::default() })]

    #[test]
    fn concentrate_realises_random_fields(graph_seed in prop::sample::select(vec![2u64, 7, 9]), seed in any::<u64>(), support in 2usize..=8) {
        let g = generate_divisible(3, 12, 1, graph_seed).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let mut rng = rng(seed);
        let x = zero_sum_weighting(&idx, &mut rng, support);
        let field = field_from_weighting(&g, &idx, &x).unwrap();
        prop_assert_eq!(field.check_invariants(&g, true), None);
        let anchor = CliqueId(rng.gen_range(0..idx.k_total()));
        let (phi, _) = concentrate_on_clique(&g, &idx, &field, anchor, TransportOptions::default()).unwrap();
        let brute = brute_effects(&idx, &phi);
        for e in 0..g.edge_count() {
            let (a, b) = g.edge_endpoints(e);
            prop_assert_eq!(&effect_at(&brute, g.vertex(a), g.vertex(b)), &field.per_edge[e]);
        }
    }

    #[test]
    fn sweep_effect_plus_residue_is_the_field(graph_seed in prop::sample::select(vec![2u64, 7, 9]), seed in any::<u64>()) {
        let g = generate_divisible(3, 12, 1, graph_seed).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let field = corrections::<Q>(&g, &idx).unwrap();
        let mut rng = rng(seed);
        let set: Vec<VertexId> = (0..3)
            .flat_map(|c| {
                let skip = rng.gen_range(0..12);
                (0..12).filter(move |&o| o != skip).map(move |o| VertexId::new(c, o))
            })
            .collect();
        let (psi, report) = match sweep_into_set(&g, &idx, &field, &set, TransportOptions::default()) {
            Err(Error::NotNeighbourRich(_)) => return Ok(()),
            other => other.unwrap(),
        };
        let inside = vertex_set(set.iter().copied());
        let effects = all_edge_effects(&idx, &psi);
        let mut total = effects.clone();
        for (e, residue) in &report.residual_edges {
            let (a, b) = g.edge_endpoints(*e);
            prop_assert!(inside.contains(&g.vertex(a)) && inside.contains(&g.vertex(b)));
            total[*e] += residue;
        }
        prop_assert_eq!(total, field.per_edge);
    }

}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn oracle_matches_constructed_ground_truth(n in 2usize..=5, seed in any::<u64>(), unbalance in any::<bool>()) {
        let mut rng = rng(seed);
        let mut edges = triangle_packing(n, &mut rng);
        if unbalance {
            // One more edge between a single pair of classes: every clique
            // meets each pair once, so unequal pair counts rule out a solution.
            let free: Vec<Edge> = (0..n)
                .flat_map(|a| (0..n).map(move |b| (VertexId::new(0, a), VertexId::new(1, b))))
                .filter(|e| !edges.contains(e))
                .collect();
            prop_assume!(!free.is_empty());
            edges.push(*free.choose(&mut rng).unwrap());
        }
        let g = PartiteGraph::from_edges(3, n, edges).unwrap();
        let idx = CliqueIndex::enumerate(&g);
        let out = lp_feasible(&g, &idx).unwrap();
        prop_assert_eq!(out.feasible(), !unbalance);
        if let Some(w) = &out.witness {
            let effects = brute_effects(&idx, w);
            prop_assert!(w.values().iter().all(|x| !x.is_negative()));
            for (a, b) in all_edges(&g) {
                prop_assert_eq!(effect_at(&effects, a, b), q(1, 1));
            }
        }
    }
}
