use proptest::prelude::*;

use topic_embedding::corpus::{load_uci_bow, write_uci_bow, Corpus, Document};
use topic_embedding::evaluation::retrieval_pr;
use topic_embedding::export::topic_correlation;
use topic_embedding::inference::{global_step, MinibatchStats};
use topic_embedding::model::{init_params, DocState, GlobalState, ModelConfig};
use topic_embedding::numerics::{digamma, softmax, sym_inverse, RandomStream, SymMatrix};
use topic_embedding::sparsity::{rebuild_truncation, topk_select};

fn random_matrix(rows: usize, cols: usize, rng: &mut RandomStream) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.standard_normal()).collect())
        .collect()
}

/// Columns of a Gram-Schmidt orthonormalized Gaussian matrix.
fn random_rotation(m: usize, rng: &mut RandomStream) -> Vec<Vec<f64>> {
    let mut q = random_matrix(m, m, rng);
    for i in 0..m {
        for j in 0..i {
            let d: f64 = (0..m).map(|t| q[i][t] * q[j][t]).sum();
            for t in 0..m {
                q[i][t] -= d * q[j][t];
            }
        }
        let n = q[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        q[i].iter_mut().for_each(|x| *x /= n);
    }
    q
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| (0..p).map(|j| (0..m).map(|t| a[i][t] * b[t][j]).sum()).collect())
        .collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn dense(a: &SymMatrix) -> Vec<Vec<f64>> {
    (0..a.dim()).map(|i| a.row(i).to_vec()).collect()
}

fn docs_strategy() -> impl Strategy<Value = (usize, Vec<Vec<u32>>)> {
    (1usize..30).prop_flat_map(|v| {
        (
            Just(v),
            prop::collection::vec(prop::collection::vec(0..v as u32, 0..25), 1..15),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uci_round_trip_keeps_token_multisets((v, docs) in docs_strategy()) {
        let vocab: Vec<String> = (0..v).map(|i| format!("w{i}")).collect();
        let corpus = Corpus::new(docs.iter().cloned().map(Document::new).collect(), vocab.clone()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (dw, vp) = (dir.path().join("docword.txt"), dir.path().join("vocab.txt"));
        write_uci_bow(&corpus, &dw, &vp).unwrap();
        let back = load_uci_bow(&dw, &vp).unwrap();
        prop_assert_eq!(&back.vocab, &vocab);
        prop_assert_eq!(back.num_docs(), docs.len());
        for (a, b) in docs.iter().zip(&back.docs) {
            let (mut a, mut b) = (a.clone(), b.tokens.clone());
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn softmax_ignores_constant_shifts(v in prop::collection::vec(-50.0f64..50.0, 1..20), c in -100.0f64..100.0) {
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let (p, q) = (softmax(&v).unwrap(), softmax(&shifted).unwrap());
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn digamma_recurrence(x in 0.1f64..1000.0) {
        let d = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
        prop_assert!(d.abs() <= 1e-10, "x={x}: {d}");
    }

    #[test]
    fn double_inverse_recovers_matrix(m in 1usize..7, seed in any::<u64>(), log_cond in 0.0f64..6.0) {
        let mut rng = RandomStream::new(seed, 1);
        let q = random_rotation(m, &mut rng);
        // eigenvalues spread over [10^-c/2, 10^c/2], condition number 10^c
        let eig: Vec<f64> = (0..m)
            .map(|i| {
                let t = if m == 1 { 0.5 } else { i as f64 / (m - 1) as f64 };
                10f64.powf(log_cond * (t - 0.5))
            })
            .collect();
        let scaled: Vec<Vec<f64>> = q.iter().map(|r| r.iter().zip(&eig).map(|(a, e)| a * e).collect()).collect();
        let a = SymMatrix::from_rows(&matmul(&scaled, &transpose(&q))).unwrap();
        let back = sym_inverse(&sym_inverse(&a).unwrap()).unwrap();
        let scale = a.as_slice().iter().fold(0.0f64, |s, x| s.max(x.abs()));
        prop_assert!(back.max_abs_diff(&a) <= 1e-6 * scale, "{}", back.max_abs_diff(&a));
    }

    #[test]
    fn every_word_keeps_its_floor(
        k in 1usize..12,
        v in 1usize..25,
        vs in 1usize..25,
        s in 1usize..14,
        seed in any::<u64>(),
    ) {
        let vs = vs.min(v);
        let beta = 0.1;
        let mut rng = RandomStream::new(seed, 2);
        let raw: Vec<Vec<(u32, f64)>> = (0..k)
            .map(|_| {
                let mut row = Vec::new();
                for w in 0..v as u32 {
                    if rng.uniform() < 0.6 {
                        row.push((w, beta + (5.0 * rng.uniform()).floor()));
                    }
                }
                row
            })
            .collect();
        let words = rebuild_truncation(raw, vs, s, beta, v);
        for w in 0..v as u32 {
            let retained = (0..k).filter(|&t| words.is_retained(t, w)).count();
            prop_assert!(retained >= s.min(k), "word {w}: {retained} < {}", s.min(k));
            prop_assert_eq!(retained, words.word_entries(w).len());
        }
    }

    #[test]
    fn residual_weight_falls_as_total_grows(totals in prop::collection::vec(0.0f64..500.0, 2..12)) {
        let beta = 0.05;
        let v = 3;
        let raw: Vec<Vec<(u32, f64)>> = totals.iter().map(|&t| vec![(0, beta + t)]).collect();
        let words = rebuild_truncation(raw, 1, 1, beta, v);
        for i in 0..totals.len() {
            for j in 0..totals.len() {
                if words.total(i) < words.total(j) {
                    prop_assert!(words.residual_weight(i) >= words.residual_weight(j));
                }
            }
        }
    }

    #[test]
    fn keeping_everything_is_exact(k in 1usize..10, v in 1usize..20, seed in any::<u64>()) {
        let beta = 0.2;
        let mut rng = RandomStream::new(seed, 3);
        let dense_raw: Vec<Vec<f64>> = (0..k).map(|_| (0..v).map(|_| beta + 3.0 * rng.uniform()).collect()).collect();
        let raw = dense_raw.iter().map(|r| r.iter().enumerate().map(|(w, &x)| (w as u32, x)).collect()).collect();
        let words = rebuild_truncation(raw, v, 1, beta, v);
        prop_assert_eq!(words.to_dense(), dense_raw);
        let xi: Vec<f64> = (0..k).map(|_| rng.standard_normal()).collect();
        let view = topk_select(&xi, k);
        for t in 0..k {
            prop_assert!(view.is_selected(t));
            prop_assert_eq!(view.estimate(t), xi[t]);
        }
    }

    #[test]
    fn correlations_survive_rotation(k in 2usize..8, m in 1usize..5, seed in any::<u64>()) {
        let mut rng = RandomStream::new(seed, 4);
        let mut c = ModelConfig::new(k.max(m + 1));
        let k = c.num_topics;
        c.embed_dim = m;
        c.topic_top_words = 2;
        let means = random_matrix(k, m, &mut rng);
        let b = random_matrix(m, m, &mut rng);
        let mut cov = SymMatrix::from_rows(&matmul(&b, &transpose(&b))).unwrap();
        cov.add_diagonal(0.1);
        let words = || rebuild_truncation(vec![vec![(0, 1.0)]; k], 2, 1, c.beta, 2);
        let r = random_rotation(m, &mut rng);
        let rotated_means = matmul(&means, &r);
        let rotated_cov = SymMatrix::from_rows(&matmul(&matmul(&transpose(&r), &dense(&cov)), &r)).unwrap();
        let a = GlobalState::from_parts(means, cov, words(), &c).unwrap();
        let b = GlobalState::from_parts(rotated_means, rotated_cov, words(), &c).unwrap();
        for i in 0..k {
            for j in 0..k {
                let (x, y) = (topic_correlation(&a, &c, i, j).unwrap(), topic_correlation(&b, &c, i, j).unwrap());
                prop_assert!((x - y).abs() <= 1e-9, "({i},{j}): {x} vs {y}");
            }
        }
    }

    #[test]
    fn retrieval_ignores_positive_scaling(
        n_query in 1usize..10,
        n_base in 1usize..30,
        seed in any::<u64>(),
        exponent in -10i32..10,
    ) {
        let mut rng = RandomStream::new(seed, 5);
        let q = random_matrix(n_query, 3, &mut rng);
        let b = random_matrix(n_base, 3, &mut rng);
        let ql: Vec<u32> = (0..n_query).map(|_| (rng.uniform() * 3.0) as u32).collect();
        let bl: Vec<u32> = (0..n_base).map(|_| (rng.uniform() * 3.0) as u32).collect();
        let s = 2f64.powi(exponent);
        let scale = |m: &[Vec<f64>]| -> Vec<Vec<f64>> { m.iter().map(|r| r.iter().map(|x| x * s).collect()).collect() };
        let cut = [1, 2, 5, 10];
        let plain = retrieval_pr(&q, &b, &ql, &bl, &cut).unwrap();
        let scaled = retrieval_pr(&scale(&q), &scale(&b), &ql, &bl, &cut).unwrap();
        prop_assert_eq!(plain, scaled);
    }

    #[test]
    fn lambda_never_drops_below_beta(seed in any::<u64>(), rate in 0.0f64..1.0, steps in 1usize..5) {
        let mut c = ModelConfig::new(5);
        c.embed_dim = 2;
        c.topic_top_words = 4;
        c.min_word_topics = 2;
        let v = 9;
        let mut rng = RandomStream::new(seed, 6);
        let mut state = init_params(&c, v, &mut rng).unwrap();
        for _ in 0..steps {
            let mut stats = MinibatchStats::new(5, 2);
            for _ in 0..3 {
                let tokens: Vec<u32> = (0..6).map(|_| (rng.uniform() * v as f64) as u32).collect();
                let mut ds = DocState::new(&c, tokens.len());
                ds.xi = (0..5).map(|_| rng.standard_normal()).collect();
                ds.gamma = (0..2).map(|_| rng.standard_normal()).collect();
                ds.assignments = (0..tokens.len()).map(|_| (rng.uniform() * 5.0) as u32).collect();
                stats.add(&Document::new(tokens), &ds);
            }
            global_step(&stats, &mut state, rate, 40, &c).unwrap();
            for row in state.words.to_dense() {
                prop_assert!(row.iter().all(|&x| x >= c.beta));
            }
        }
    }
}

/// Exhaustive re-ranking: every base score computed, fully sorted.
fn brute_force_pr(q: &[Vec<f64>], b: &[Vec<f64>], ql: &[u32], bl: &[u32], cutoffs: &[usize]) -> Vec<(usize, f64, f64)> {
    let mut sums = vec![(0.0, 0.0); cutoffs.len()];
    let mut n = 0;
    for (query, &label) in q.iter().zip(ql) {
        let relevant = bl.iter().filter(|&&l| l == label).count();
        if relevant == 0 {
            continue;
        }
        n += 1;
        let mut scored: Vec<(f64, usize)> = b
            .iter()
            .enumerate()
            .map(|(i, x)| (x.iter().zip(query).map(|(a, c)| a * c).sum(), i))
            .collect();
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        for (s, &cut) in sums.iter_mut().zip(cutoffs) {
            let hits = scored[..cut].iter().filter(|(_, i)| bl[*i] == label).count() as f64;
            s.0 += hits / relevant as f64;
            s.1 += hits / cut as f64;
        }
    }
    cutoffs
        .iter()
        .zip(sums)
        .map(|(&c, (r, p))| (c, r / n as f64, p / n as f64))
        .collect()
}

#[test]
fn retrieval_matches_brute_force_oracle() {
    for seed in 0..20u64 {
        let mut rng = RandomStream::new(seed, 7);
        let n_base = 20 + (seed as usize * 9) % 181;
        let q = random_matrix(40, 4, &mut rng);
        let b = random_matrix(n_base, 4, &mut rng);
        let ql: Vec<u32> = (0..40).map(|_| (rng.uniform() * 4.0) as u32).collect();
        let bl: Vec<u32> = (0..n_base).map(|_| (rng.uniform() * 4.0) as u32).collect();
        let cutoffs = [1, 3, 10, 20];
        let curve = retrieval_pr(&q, &b, &ql, &bl, &cutoffs).unwrap();
        let oracle = brute_force_pr(&q, &b, &ql, &bl, &cutoffs);
        for (p, (c, r, pr)) in curve.points.iter().zip(oracle) {
            assert_eq!(p.cutoff, c);
            assert!((p.recall - r).abs() < 1e-12);
            assert!((p.precision - pr).abs() < 1e-12);
        }
    }
}

#[test]
fn separated_classes_retrieve_their_own() {
    let mut rng = RandomStream::new(8, 8);
    let centers = [[6.0, 0.0, 0.0], [0.0, 6.0, 0.0], [0.0, 0.0, 6.0]];
    let mut draw = |n: usize| -> (Vec<Vec<f64>>, Vec<u32>) {
        (0..n)
            .map(|i| {
                let c = i % 3;
                (centers[c].iter().map(|x| x + rng.standard_normal()).collect(), c as u32)
            })
            .unzip()
    };
    let (q, ql) = draw(60);
    let (b, bl) = draw(150);
    let curve = retrieval_pr(&q, &b, &ql, &bl, &[1]).unwrap();
    let oracle = brute_force_pr(&q, &b, &ql, &bl, &[1]);
    assert_eq!(curve.points[0].precision, oracle[0].2);
    assert!(curve.points[0].precision >= 0.9, "{}", curve.points[0].precision);
}
