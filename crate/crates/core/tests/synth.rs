use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use repdetect_core::synth::toy::toy_language_text;
use repdetect_core::synth::{
    fit_markov, generate_corpus, tokenize, DecodingStrategy, GenerationConfig, MarkovModel,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn model() -> (MarkovModel, Vec<u32>) {
    let text = toy_language_text(11, 300, 20_000);
    let tokens = tokenize(&text);
    let m = fit_markov(&tokens, 1, 0.0).unwrap();
    let ids = m.encode(&tokens);
    (m, ids)
}

fn next_token_counts(
    m: &MarkovModel,
    ctx: &[u32],
    strategy: DecodingStrategy,
    seed: u64,
    n: usize,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0.0; m.vocab_size()];
    for _ in 0..n {
        let t = m.generate(ctx, 1, &strategy, &mut rng).unwrap()[0];
        counts[t as usize] += 1.0;
    }
    counts
}

fn widest_context(m: &MarkovModel) -> u32 {
    (0..m.vocab_size() as u32)
        .max_by_key(|&t| m.conditional(&[t]).len())
        .unwrap()
}

/// Two-sample chi-square homogeneity test over the categories seen in
/// either sample.
fn homogeneity_p_value(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let mut stat = 0.0;
    let mut cells = 0;
    for (&x, &y) in a.iter().zip(b) {
        let col = x + y;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        let ea = col * na / (na + nb);
        let eb = col * nb / (na + nb);
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn nucleus_one_is_ancestral_in_distribution() {
    let (m, _) = model();
    let ctx = [widest_context(&m)];
    let nucleus = next_token_counts(&m, &ctx, DecodingStrategy::Nucleus { p: 1.0 }, 1, 10_000);
    let ancestral = next_token_counts(&m, &ctx, DecodingStrategy::Ancestral, 2, 10_000);
    let p = homogeneity_p_value(&nucleus, &ancestral);
    assert!(p > 0.01, "p-value {p}");
}

#[test]
fn topk_differs_from_ancestral_in_distribution() {
    let (m, _) = model();
    let ctx = [widest_context(&m)];
    assert!(m.conditional(&ctx).len() > 10);
    let topk = next_token_counts(&m, &ctx, DecodingStrategy::TopK { k: 3 }, 1, 10_000);
    let ancestral = next_token_counts(&m, &ctx, DecodingStrategy::Ancestral, 2, 10_000);
    assert!(homogeneity_p_value(&topk, &ancestral) < 0.01);
}

#[test]
fn greedy_documents_repeat_for_repeated_prompts() {
    let (m, ids) = model();
    let prompts = vec![vec![ids[5]], vec![ids[9]]];
    let cfg = GenerationConfig {
        strategy: DecodingStrategy::Greedy,
        n_docs: 6,
        doc_len_tokens: 25,
        seed: 3,
        id_prefix: "g".into(),
    };
    let c = generate_corpus(&m, &prompts, &cfg).unwrap();
    let d = c.documents();
    assert_eq!(d[0].text, d[2].text);
    assert_eq!(d[0].text, d[4].text);
    assert_eq!(d[1].text, d[3].text);
}

#[test]
fn topk_one_is_greedy_token_for_token() {
    let (m, ids) = model();
    let prompts: Vec<Vec<u32>> = ids[..20].iter().map(|&t| vec![t]).collect();
    let cfg = |strategy| GenerationConfig {
        strategy,
        n_docs: 20,
        doc_len_tokens: 40,
        seed: 8,
        id_prefix: "x".into(),
    };
    let g = generate_corpus(&m, &prompts, &cfg(DecodingStrategy::Greedy)).unwrap();
    let t = generate_corpus(&m, &prompts, &cfg(DecodingStrategy::TopK { k: 1 })).unwrap();
    for (a, b) in g.iter().zip(t.iter()) {
        assert_eq!(a.text, b.text);
    }
}

#[test]
fn generation_is_scheduling_invariant() {
    let (m, ids) = model();
    let prompts: Vec<Vec<u32>> = ids[..50].iter().map(|&t| vec![t]).collect();
    let cfg = GenerationConfig {
        strategy: DecodingStrategy::Nucleus { p: 0.8 },
        n_docs: 50,
        doc_len_tokens: 30,
        seed: 8,
        id_prefix: "n".into(),
    };
    let parallel = generate_corpus(&m, &prompts, &cfg).unwrap();
    let sequential = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| generate_corpus(&m, &prompts, &cfg).unwrap());
    assert_eq!(parallel, sequential);
    assert!(parallel
        .iter()
        .all(|d| d.source.as_deref() == Some("nucleus")));
}
