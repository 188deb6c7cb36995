//! Property-based invariants over randomized lineage graphs.

mod common;

use proptest::prelude::*;

use lineage_eval::aogm::{aogm_score, evaluate, AogmWeights};
use lineage_eval::lineage_graph::{build_graph, EdgeSemantics};
use lineage_eval::matching::{match_vertices, MatchingStrategy};
use lineage_eval::mitosis_metrics::{match_mitosis, MitosisTolerances};
use lineage_eval::track_io::{
    parse_ctc_tracks, parse_graph_document, write_ctc_tracks, write_graph_document,
};

use common::{random_pair, random_table, rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn built_graphs_validate_cleanly(seed in any::<u64>()) {
        let table = random_table(&mut rng(seed), 8, 8);
        let graph = build_graph(&table).unwrap();
        prop_assert!(graph.validate().is_empty());
    }

    #[test]
    fn strip_removes_exactly_the_parent_links(seed in any::<u64>()) {
        let graph = build_graph(&random_table(&mut rng(seed), 8, 8)).unwrap();
        let stripped = graph.strip_parent_edges();
        prop_assert_eq!(stripped.vertex_count(), graph.vertex_count());
        prop_assert!(stripped
            .edges()
            .iter()
            .all(|e| e.semantics == EdgeSemantics::TrackLink));
        let parent_links = graph
            .edges()
            .iter()
            .filter(|e| e.semantics == EdgeSemantics::ParentLink)
            .count();
        prop_assert_eq!(stripped.edge_count(), graph.edge_count() - parent_links);
        prop_assert_eq!(&stripped.strip_parent_edges(), &stripped);
    }

    #[test]
    fn id_matching_is_consistent(seed in any::<u64>()) {
        let (reference, computed) = random_pair(&mut rng(seed), 8, 8);
        let corr = match_vertices(&reference, &computed, MatchingStrategy::ExactId).unwrap();
        // Every pair shares (track, frame), and the per-computed-vertex
        // match counts add up to the number of pairs.
        let mut total = 0usize;
        for &(r, c) in corr.pairs() {
            let rv = reference.vertex(r).unwrap();
            let cv = computed.vertex(c).unwrap();
            prop_assert_eq!((rv.track_id, rv.frame), (cv.track_id, cv.frame));
        }
        for cv in computed.vertices() {
            total += corr.comp_match_count(cv.id);
        }
        prop_assert_eq!(total, corr.pairs().len());
    }

    #[test]
    fn score_is_non_negative_and_zero_iff_counts_are(seed in any::<u64>()) {
        let (reference, computed) = random_pair(&mut rng(seed), 8, 8);
        let weights = AogmWeights::default();
        let report = evaluate(&reference, &computed, MatchingStrategy::ExactId, &weights).unwrap();
        prop_assert!(report.total >= 0.0);
        prop_assert_eq!(report.total == 0.0, report.counts.is_zero());
        prop_assert_eq!(report.total, report.contributions.iter().sum::<f64>());
        prop_assert_eq!(report.total, aogm_score(&report.counts, &weights));
    }

    #[test]
    fn scaling_weights_scales_the_score(seed in any::<u64>(), lambda in 0.25f64..8.0) {
        let (reference, computed) = random_pair(&mut rng(seed), 8, 8);
        let base = AogmWeights::default();
        let scaled = AogmWeights {
            ns: base.ns * lambda,
            fn_: base.fn_ * lambda,
            fp: base.fp * lambda,
            ed: base.ed * lambda,
            ea: base.ea * lambda,
            ec: base.ec * lambda,
        };
        let counts = evaluate(&reference, &computed, MatchingStrategy::ExactId, &base)
            .unwrap()
            .counts;
        let a = aogm_score(&counts, &base);
        let b = aogm_score(&counts, &scaled);
        prop_assert!((b - a * lambda).abs() <= 1e-9 * (1.0 + b.abs()));
    }

    #[test]
    fn swapping_sides_swaps_the_vertex_and_edge_books(seed in any::<u64>()) {
        let (a, b) = random_pair(&mut rng(seed), 8, 8);
        let weights = AogmWeights::default();
        let ab = evaluate(&a, &b, MatchingStrategy::ExactId, &weights).unwrap().counts;
        let ba = evaluate(&b, &a, MatchingStrategy::ExactId, &weights).unwrap().counts;
        // Id matching is one-to-one, so the edit books mirror exactly.
        prop_assert_eq!(ab.fn_, ba.fp);
        prop_assert_eq!(ab.fp, ba.fn_);
        prop_assert_eq!(ab.ea, ba.ed);
        prop_assert_eq!(ab.ed, ba.ea);
        prop_assert_eq!(ab.ec, ba.ec);
        prop_assert_eq!(ab.ns, 0);
    }

    #[test]
    fn wider_tolerances_never_lose_matches(
        seed in any::<u64>(),
        temporal in 0u32..6,
        spatial in 0.0f64..400.0,
    ) {
        let (a, b) = random_pair(&mut rng(seed), 8, 8);
        let (ev_a, ev_b) = (a.mitosis_events(), b.mitosis_events());
        let narrow = match_mitosis(&ev_a, &ev_b, &MitosisTolerances { temporal, spatial });
        let wide = match_mitosis(
            &ev_a,
            &ev_b,
            &MitosisTolerances { temporal: temporal + 3, spatial: spatial + 100.0 },
        );
        prop_assert!(wide.pairs.len() >= narrow.pairs.len());
    }

    #[test]
    fn random_tables_round_trip_through_both_formats(seed in any::<u64>()) {
        let table = random_table(&mut rng(seed), 8, 8);
        let text = write_ctc_tracks(&table);
        let reparsed = parse_ctc_tracks(&text, None).unwrap();
        prop_assert_eq!(&write_ctc_tracks(&reparsed), &text);

        let graph = build_graph(&table).unwrap();
        let doc = write_graph_document(&graph);
        let reparsed = parse_graph_document(&doc).unwrap();
        prop_assert_eq!(write_graph_document(&reparsed), doc);
    }
}
