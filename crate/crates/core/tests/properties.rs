use std::collections::HashSet;

use proptest::prelude::*;
use utiljudge::clients::EntityCategory;
use utiljudge::corpus::{Origin, Passage};
use utiljudge::judge::{copeland_order, sampling_permutation, vote};
use utiljudge::metrics::{bleu, mrr_at_k, ndcg_at_k, rouge_l, set_metrics, token_f1};
use utiljudge::synth::{assemble_candidates, find_occurrences, substitute_entities, EntityCorpus, Placement, SubstitutionMode};

fn ids() -> impl Strategy<Value = HashSet<u8>> {
    prop::collection::hash_set(0u8..15, 0..10)
}

fn ranking() -> impl Strategy<Value = Vec<u8>> {
    Just((0u8..15).collect::<Vec<_>>()).prop_shuffle().prop_flat_map(|v| (0..=10usize).prop_map(move |n| v[..n].to_vec()))
}

fn words() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["a", "The", "cat", "sat", "on", "mat", "dog,", "x", "y!"]), 0..12)
        .prop_map(|w| w.join(" "))
}

fn pool(origin: Origin, tag: &str, len: usize) -> Vec<Passage> {
    (0..len).map(|i| Passage::new(format!("{tag}{i}"), format!("{tag} text {i}"), origin).unwrap()).collect()
}

proptest! {
    #[test]
    fn set_scores_are_bounded(selected in ids(), truth in ids().prop_filter("non-empty", |t| !t.is_empty())) {
        let s = set_metrics(&selected, &truth).unwrap();
        for v in [s.precision, s.recall, s.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(s.f1 <= s.precision.max(s.recall) + 1e-12);
        prop_assert!(s.f1 + 1e-12 >= s.precision.min(s.recall));
        if selected == truth {
            prop_assert_eq!(s.f1, 1.0);
        }
    }

    #[test]
    fn rank_scores_are_bounded(r in ranking(), rel in ids().prop_filter("non-empty", |t| !t.is_empty()), k in 1usize..12) {
        let n = ndcg_at_k(&r, &rel, k).unwrap();
        let m = mrr_at_k(&r, &rel, k).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&n));
        prop_assert!((0.0..=1.0).contains(&m));
        prop_assert_eq!(n == 0.0, m == 0.0);
        // Relevant items first is ideal.
        let mut ideal: Vec<u8> = rel.iter().copied().collect();
        ideal.sort_unstable();
        prop_assert!((ndcg_at_k(&ideal, &rel, k).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn text_scores_are_bounded(pred in words(), gold in words()) {
        let golds = vec![gold.clone()];
        let f1 = token_f1(&pred, &golds).unwrap();
        let rl = rouge_l(&pred, &gold);
        prop_assert!((0.0..=1.0).contains(&f1));
        prop_assert!((0.0..=1.0).contains(&rl));
        prop_assert!((rl - rouge_l(&gold, &pred)).abs() < 1e-12);
        prop_assert!((token_f1(&gold, &golds).unwrap() - 1.0).abs() < 1e-12);
        for b in bleu(&pred, &golds, 4).unwrap() {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&b));
        }
    }

    #[test]
    fn vote_invariants(sets in prop::collection::vec(prop::collection::btree_set(0usize..10, 0..10), 1..12)) {
        let sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let (chosen, votes) = vote(&sets, 10);
        prop_assert_eq!(votes.iter().map(|&v| v as usize).sum::<usize>(), sets.iter().map(Vec::len).sum::<usize>());
        let mut sizes = [0usize; 11];
        for s in &sets { sizes[s.len()] += 1; }
        let modal_count = *sizes.iter().max().unwrap();
        prop_assert_eq!(sizes[chosen.len()], modal_count);
        prop_assert!(chosen.windows(2).all(|w| w[0] < w[1]));
        let weakest_in = chosen.iter().map(|&i| votes[i]).min().unwrap_or(u32::MAX);
        for i in (0..10).filter(|i| !chosen.contains(i)) {
            prop_assert!(votes[i] <= weakest_in);
        }
        let (again, _) = vote(&vec![sets[0].clone(); 3], 10);
        prop_assert_eq!(&again, &sets[0]);
    }

    #[test]
    fn permutations_are_permutations(seed in any::<u64>(), t in 1usize..20, n in 0usize..30) {
        let p = sampling_permutation(seed, t, n);
        prop_assert_eq!(&p, &sampling_permutation(seed, t, n));
        let mut sorted = p.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn copeland_is_sorted_by_wins(wins in prop::collection::vec(0u32..10, 0..12)) {
        let order = copeland_order(&wins);
        let mut sorted = order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..wins.len()).collect::<Vec<_>>());
        for w in order.windows(2) {
            prop_assert!(wins[w[0]] > wins[w[1]] || (wins[w[0]] == wins[w[1]] && w[0] < w[1]));
        }
    }

    #[test]
    fn full_pools_assemble_evenly(g in 1usize..4, seed in any::<u64>(), pos in prop::option::of(0usize..10)) {
        let n = 10;
        let gt = pool(Origin::GroundTruth, "gt", g);
        let set = assemble_candidates(
            "q", &gt, &pool(Origin::Counterfactual, "cp", 10), &pool(Origin::Hrnp, "h", 10),
            &pool(Origin::Wrnp, "w", 10), n, seed, pos.map_or(Placement::Shuffled, Placement::GroundTruthAt),
        );
        let set = match (set, pos) {
            (Err(_), Some(p)) if p + g > n => return Ok(()),
            (s, _) => s.unwrap(),
        };
        let c = set.composition;
        prop_assert_eq!(set.passages.len(), n);
        prop_assert_eq!(c.ground_truth, g);
        let m = n - g;
        let (lo, hi) = (m / 3, m / 3 + (m % 3));
        for count in [c.counterfactual, c.hrnp, c.wrnp] {
            prop_assert!((lo..=hi).contains(&count));
        }
        prop_assert_eq!(c.counterfactual + c.hrnp + c.wrnp, m);
        let unique: HashSet<&str> = set.passages.iter().map(|p| p.id.as_str()).collect();
        prop_assert_eq!(unique.len(), n);
        if let Some(p) = pos {
            for k in 0..g {
                prop_assert_eq!(set.passages[p + k].origin, Origin::GroundTruth);
            }
        }
    }

    #[test]
    fn short_pools_backfill_or_fail(cp in 0usize..6, h in 0usize..6, w in 0usize..6, seed in any::<u64>()) {
        let gt = pool(Origin::GroundTruth, "gt", 1);
        let r = assemble_candidates(
            "q", &gt, &pool(Origin::Counterfactual, "cp", cp), &pool(Origin::Hrnp, "h", h),
            &pool(Origin::Wrnp, "w", w), 10, seed, Placement::Shuffled,
        );
        if cp + h + w < 9 {
            prop_assert!(r.is_err());
        } else {
            let c = r.unwrap().composition;
            prop_assert_eq!(c.counterfactual + c.hrnp + c.wrnp, 9);
            prop_assert!(c.counterfactual <= cp && c.hrnp <= h && c.wrnp <= w);
        }
    }

    #[test]
    fn substitution_touches_only_answer(
        before in prop::collection::vec(prop::sample::select(vec!["in", "the", "year", "of", "was", "said"]), 0..6),
        after in prop::collection::vec(prop::sample::select(vec!["in", "the", "year", "of", "was", "said"]), 0..6),
        repeats in 1usize..4,
        pick in 0usize..6,
        swap in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut corpus = EntityCorpus::new();
        let entities = [
            (EntityCategory::Person, "Ada Moreno"), (EntityCategory::Person, "Chen Wei"),
            (EntityCategory::Location, "Oslo"), (EntityCategory::Location, "Lima"),
            (EntityCategory::Date, "1914"), (EntityCategory::Date, "2003"),
        ];
        for (c, s) in entities { corpus.insert(c, s); }
        let (category, answer) = entities[pick];
        let middle = vec![answer; repeats].join(" and ");
        let text = format!("{} {middle} {}", before.join(" "), after.join(" "));
        let mode = if swap { SubstitutionMode::TypeSwap } else { SubstitutionMode::CorpusSubstitution };
        let evidence = Passage::new("e", text.clone(), Origin::GroundTruth).unwrap();
        let (out, spec) = substitute_entities(&evidence, answer, &corpus, mode, seed).unwrap();
        let counter = spec.counter_answer.as_str();
        prop_assert_eq!(out.text.clone(), format!("{} {} {}", before.join(" "), vec![counter; repeats].join(" and "), after.join(" ")));
        prop_assert_eq!(find_occurrences(&out.text, counter).len(), repeats);
        prop_assert!(find_occurrences(&out.text, answer).is_empty());
        prop_assert!(spec.is_consistent());
        prop_assert_eq!(spec.counter_category == category, mode == SubstitutionMode::CorpusSubstitution);
    }
}
