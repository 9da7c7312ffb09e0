mod common;

use std::sync::Arc;

use grammarlr::calibration::fit_calibration;
use grammarlr::corpus::{segment_sentences, Pos, StreamItem, TaggedToken};
use grammarlr::lambdag::{lambda_document, verify_sentences, LambdaConfig};
use grammarlr::metrics::{cllr_min, isotonic_fit, roc_auc};
use grammarlr::ngram::{DiscountSetting, GrammarModel, TokenId, Vocabulary};
use grammarlr::report::{zscore_bins, Bin};
use grammarlr::{decide, Label, Sentence};
use proptest::prelude::*;

fn sentence_strategy(vocab: usize) -> impl Strategy<Value = Sentence> {
    prop::collection::vec(0..vocab, 1..6)
        .prop_map(|ids| Sentence::new(ids.into_iter().map(|i| format!("w{i}")).collect()).unwrap())
}

fn corpus_strategy() -> impl Strategy<Value = Vec<Sentence>> {
    prop::collection::vec(sentence_strategy(6), 1..8)
}

fn labelled_scores() -> impl Strategy<Value = (Vec<f64>, Vec<Label>)> {
    prop::collection::vec((-5.0f64..5.0, any::<bool>()), 2..30)
        .prop_filter("both classes", |v| v.iter().any(|x| x.1) && v.iter().any(|x| !x.1))
        .prop_map(|v| {
            v.into_iter()
                .map(|(s, y)| (s, if y { Label::Y } else { Label::N }))
                .unzip()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conditionals_sum_to_one(sents in corpus_strategy(), order in 1usize..5, ctx in prop::collection::vec(0u32..8, 0..4)) {
        let vocab = Arc::new(Vocabulary::from_sentences(&sents));
        let m = GrammarModel::train(&sents, order, DiscountSetting::default(), vocab.clone()).unwrap();
        let v = vocab.len() as u32;
        let ctx: Vec<TokenId> = ctx.into_iter().map(|i| if i >= v { TokenId::BOS } else { TokenId(i) }).collect();
        let total: f64 = (0..v).map(TokenId).chain([TokenId::EOS]).map(|t| m.prob_id(t, &ctx).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn start_symbol_counts_equal_sentence_count(sents in corpus_strategy(), order in 1usize..5) {
        let vocab = Arc::new(Vocabulary::from_sentences(&sents));
        let m = GrammarModel::train(&sents, order, DiscountSetting::default(), vocab).unwrap();
        for k in 1..=order {
            prop_assert_eq!(m.count(&vec![TokenId::BOS; k]), sents.len() as u64);
        }
        prop_assert_eq!(m.count(&[TokenId::EOS]), sents.len() as u64);
    }

    #[test]
    fn segmentation_preserves_tokens(words in prop::collection::vec(prop::sample::select(vec!["a", "b", ".", "!", "…", "c"]), 0..20), breaks in prop::collection::vec(any::<bool>(), 20)) {
        let mut items = Vec::new();
        for (w, br) in words.iter().zip(&breaks) {
            items.push(StreamItem::Token(TaggedToken::new(*w, Pos::Other).unwrap()));
            if *br {
                items.push(StreamItem::Newline);
            }
        }
        let sents = segment_sentences(items);
        prop_assert!(sents.iter().all(|s| !s.is_empty()));
        let flat: Vec<&str> = sents.iter().flatten().map(TaggedToken::surface).collect();
        prop_assert_eq!(flat, words);
    }

    #[test]
    fn sentence_scores_add_up(known in corpus_strategy(), reference in corpus_strategy(), unknown in corpus_strategy(), seed in any::<u64>()) {
        let cfg = LambdaConfig { order: 3, refs: 3, seed, ..LambdaConfig::default() };
        let t = verify_sentences(&unknown, &known, &reference, &cfg).unwrap();
        let again = verify_sentences(&unknown, &known, &reference, &cfg).unwrap();
        prop_assert_eq!(&t, &again);
        for (i, s) in t.sentence_scores.iter().enumerate() {
            let sum: f64 = t.sentence_tokens(i).map(|x| x.lambda).sum();
            prop_assert!((sum - s).abs() < 1e-9);
            prop_assert_eq!(t.sentence_tokens(i).count(), unknown[i].len() + 1);
        }
        prop_assert!((t.total - t.sentence_scores.iter().sum::<f64>()).abs() < 1e-9);
    }

    #[test]
    fn single_reference_is_a_plain_log_ratio(known in corpus_strategy(), other in corpus_strategy(), unknown in corpus_strategy()) {
        let vocab = Arc::new(Vocabulary::from_sentences(known.iter().chain(&other)));
        let a = GrammarModel::train(&known, 2, DiscountSetting::default(), vocab.clone()).unwrap();
        let b = GrammarModel::train(&other, 2, DiscountSetting::default(), vocab.clone()).unwrap();
        let t = lambda_document(&unknown, &a, std::slice::from_ref(&b)).unwrap();
        let expected: f64 = unknown.iter().map(|s| a.sentence_logprob(s) - b.sentence_logprob(s)).sum();
        prop_assert!((t.total - expected).abs() < 1e-9);
    }

    #[test]
    fn cllr_decomposes((scores, labels) in labelled_scores()) {
        let d = cllr_min(&scores, &labels).unwrap();
        prop_assert!(d.cllr_cal >= 0.0);
        prop_assert!((d.cllr - d.cllr_min - d.cllr_cal).abs() < 1e-9);
    }

    #[test]
    fn pav_is_monotone((scores, labels) in labelled_scores()) {
        let y: Vec<f64> = labels.iter().map(|l| if *l == Label::Y { 1.0 } else { 0.0 }).collect();
        let fit = isotonic_fit(&scores, &y).unwrap();
        let mut idx: Vec<usize> = (0..scores.len()).collect();
        idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        prop_assert!(idx.windows(2).all(|w| fit[w[0]] <= fit[w[1]]));
    }

    #[test]
    fn calibration_ignores_positive_rescaling((scores, labels) in labelled_scores(), k in 0.1f64..10.0) {
        let Ok(m) = fit_calibration(&scores, &labels) else { return Ok(()) };
        prop_assume!(!m.separated);
        let scaled: Vec<f64> = scores.iter().map(|s| s * k).collect();
        let w = fit_calibration(&scaled, &labels).unwrap();
        for (s, t) in scores.iter().zip(&scaled) {
            prop_assert!((m.apply(*s) - w.apply(*t)).abs() < 1e-6);
            prop_assert_eq!(decide(m.apply(*s)), decide(w.apply(*t)));
        }
    }

    #[test]
    fn increasing_maps_keep_auc((scores, labels) in labelled_scores()) {
        let mapped: Vec<f64> = scores.iter().map(|s| 3.0 * s + 1.0).collect();
        prop_assert_eq!(roc_auc(&scores, &labels).unwrap(), roc_auc(&mapped, &labels).unwrap());
    }

    #[test]
    fn higher_z_never_lighter(a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(Bin::from_z(lo) <= Bin::from_z(hi));
    }

    #[test]
    fn highlight_ranking_is_a_permutation(known in corpus_strategy(), reference in corpus_strategy(), unknown in corpus_strategy()) {
        let cfg = LambdaConfig { order: 2, refs: 2, seed: 1, ..LambdaConfig::default() };
        let doc = zscore_bins(&verify_sentences(&unknown, &known, &reference, &cfg).unwrap());
        let mut r = doc.ranking.clone();
        r.sort_unstable();
        prop_assert_eq!(r, (0..unknown.len()).collect::<Vec<_>>());
        for w in doc.ranking.windows(2) {
            let (a, b) = (&doc.sentences[w[0]], &doc.sentences[w[1]]);
            prop_assert!(a.lambda > b.lambda || (a.lambda == b.lambda && w[0] < w[1]));
        }
    }
}
