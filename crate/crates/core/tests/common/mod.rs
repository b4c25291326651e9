//! Shared fixtures for integration tests: a deterministic synthetic
//! newsgroups-style corpus and small evaluation helpers.
#![allow(dead_code)]

use std::path::Path;

use hierindex::corpus::RawDocument;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CLASSES: [(&str, &str); 20] = [
    ("alt.atheism", "alt"),
    ("comp.graphics", "comp"),
    ("comp.os.ms-windows.misc", "comp"),
    ("comp.sys.ibm.pc.hardware", "comp"),
    ("comp.sys.mac.hardware", "comp"),
    ("comp.windows.x", "comp"),
    ("misc.forsale", "misc"),
    ("rec.autos", "rec"),
    ("rec.motorcycles", "rec"),
    ("rec.sport.baseball", "rec"),
    ("rec.sport.hockey", "rec"),
    ("sci.crypt", "sci"),
    ("sci.electronics", "sci"),
    ("sci.med", "sci"),
    ("sci.space", "sci"),
    ("soc.religion.christian", "soc"),
    ("talk.politics.guns", "talk"),
    ("talk.politics.mideast", "talk"),
    ("talk.politics.misc", "talk"),
    ("talk.religion.misc", "talk"),
];

const SUPERGROUPS: [&str; 7] = ["alt", "comp", "misc", "rec", "sci", "soc", "talk"];

/// Deterministic pronounceable pseudo-word, unique per (pool, index).
fn make_word(pool: usize, index: usize) -> String {
    const ONSETS: [&str; 12] = [
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t",
    ];
    const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
    const CODAS: [&str; 8] = ["n", "r", "s", "t", "l", "m", "x", "d"];
    let mut key = pool * 7919 + index * 13 + 101;
    let mut word = String::new();
    for _ in 0..3 {
        word.push_str(ONSETS[key % ONSETS.len()]);
        key /= ONSETS.len();
        word.push_str(VOWELS[key % VOWELS.len()]);
        key /= VOWELS.len();
    }
    word.push_str(CODAS[key % CODAS.len()]);
    word
}

struct Pools {
    class_words: Vec<Vec<String>>,
    super_words: Vec<Vec<String>>,
    common_words: Vec<String>,
}

fn build_pools() -> Pools {
    let class_words = (0..CLASSES.len())
        .map(|c| (0..40).map(|i| make_word(c, i)).collect())
        .collect();
    let super_words = (0..SUPERGROUPS.len())
        .map(|s| (0..30).map(|i| make_word(100 + s, i)).collect())
        .collect();
    let common_words = (0..120).map(|i| make_word(200, i)).collect();
    Pools {
        class_words,
        super_words,
        common_words,
    }
}

/// Zipf-ish draw: low indices much more likely.
fn zipf_pick<'a>(rng: &mut ChaCha8Rng, words: &'a [String]) -> &'a str {
    let u: f64 = rng.gen();
    let idx = ((words.len() as f64).powf(u) - 1.0) as usize;
    &words[idx.min(words.len() - 1)]
}

#[derive(Clone, Copy)]
pub struct SynthConfig {
    pub docs_per_class: usize,
    pub test_docs_per_class: usize,
    pub templates_per_class: usize,
    /// Fraction of articles that repost their thread's template verbatim.
    pub exact_repost: f64,
    /// Token survival probability for rewritten articles.
    pub keep_prob: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            docs_per_class: 100,
            test_docs_per_class: 35,
            templates_per_class: 6,
            exact_repost: 0.7,
            keep_prob: 0.92,
            seed: 42,
        }
    }
}

/// Generate train and test documents. Documents within a class derive
/// from a small set of templates with per-document noise, imitating the
/// quote-and-reply duplication of real newsgroup threads. Templates of
/// one class share a class core and differ in a thread-specific
/// vocabulary block, so coarse semantic spaces see roughly one mass per
/// class while finer ones resolve the individual threads; classes share
/// supergroup and corpus-wide vocabulary. Train and test draws use
/// separate streams, so the training corpus does not depend on how many
/// test documents are requested.
pub fn generate_corpus(config: &SynthConfig) -> (Vec<RawDocument>, Vec<RawDocument>) {
    let pools = build_pools();

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, (class, supergroup)) in CLASSES.iter().enumerate() {
        let s = SUPERGROUPS.iter().position(|g| g == supergroup).unwrap();
        let class_stream = |purpose: u64| {
            ChaCha8Rng::seed_from_u64(
                config
                    .seed
                    .wrapping_add((c as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15))
                    .wrapping_add(purpose.wrapping_mul(0xd1b54a32d192ed03)),
            )
        };
        let mut rng = class_stream(0);
        // Templates: the latent "threads" of this class.
        let templates: Vec<Vec<String>> = (0..config.templates_per_class)
            .map(|_| {
                let len = 50 + rng.gen_range(0..30);
                (0..len)
                    .map(|_| {
                        let u: f64 = rng.gen();
                        if u < 0.5 {
                            zipf_pick(&mut rng, &pools.class_words[c]).to_string()
                        } else if u < 0.7 {
                            zipf_pick(&mut rng, &pools.super_words[s]).to_string()
                        } else {
                            zipf_pick(&mut rng, &pools.common_words).to_string()
                        }
                    })
                    .collect()
            })
            .collect();

        // Threads behave like real newsgroup traffic: most articles in a
        // thread quote the original nearly verbatim, a minority rewrite
        // it with fresh vocabulary.
        let make_doc = |rng: &mut ChaCha8Rng, ordinal: usize| -> (String, String) {
            let template = &templates[rng.gen_range(0..templates.len())];
            let exact_repost = rng.gen::<f64>() < config.exact_repost;
            let mut tokens: Vec<String> = Vec::with_capacity(template.len() + 24);
            if exact_repost {
                tokens.extend(template.iter().cloned());
            } else {
                for w in template {
                    if rng.gen::<f64>() < config.keep_prob {
                        tokens.push(w.clone());
                    }
                }
                let extra = rng.gen_range(5..16);
                for _ in 0..extra {
                    let u: f64 = rng.gen();
                    let w = if u < 0.4 {
                        zipf_pick(rng, &pools.class_words[c])
                    } else if u < 0.6 {
                        zipf_pick(rng, &pools.super_words[s])
                    } else {
                        zipf_pick(rng, &pools.common_words)
                    };
                    tokens.push(w.to_string());
                }
            }
            // Function words exercise the stopword filter.
            let mut body = String::new();
            for (i, tok) in tokens.iter().enumerate() {
                if i % 9 == 0 {
                    body.push_str("the ");
                }
                if i % 13 == 0 {
                    body.push_str("and of ");
                }
                body.push_str(tok);
                body.push(if i % 12 == 11 { '\n' } else { ' ' });
            }
            let text = format!(
                "From: user{ordinal}@example.invalid\nSubject: notes from the thread\nLines: {}\n\n{body}\n",
                tokens.len()
            );
            (format!("{class}/{ordinal:05}"), text)
        };

        let mut train_rng = class_stream(1);
        for ordinal in 0..config.docs_per_class {
            let (id, text) = make_doc(&mut train_rng, ordinal);
            train.push(RawDocument {
                id,
                text,
                label: Some(class.to_string()),
            });
        }
        let mut test_rng = class_stream(2);
        for ordinal in 0..config.test_docs_per_class {
            let (id, text) = make_doc(&mut test_rng, 90000 + ordinal);
            test.push(RawDocument {
                id,
                text,
                label: Some(class.to_string()),
            });
        }
    }
    (train, test)
}

/// Materialize documents in the one-directory-per-class layout.
pub fn write_corpus_dir(docs: &[RawDocument], root: &Path) {
    for doc in docs {
        let path = root.join(&doc.id);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, &doc.text).unwrap();
    }
}

/// Best label-permutation agreement between a clustering and ground
/// truth, for small equal counts; falls back to majority mapping when
/// cluster count differs from class count.
pub fn permutation_agreement(truth: &[usize], clusters: &[Vec<usize>]) -> f64 {
    let num_classes = truth.iter().copied().max().unwrap_or(0) + 1;
    let total = truth.len() as f64;
    if clusters.len() == num_classes && num_classes <= 8 {
        let mut order: Vec<usize> = (0..num_classes).collect();
        let mut best = 0usize;
        permute(&mut order, 0, &mut |perm| {
            let hits: usize = clusters
                .iter()
                .enumerate()
                .map(|(ci, cluster)| {
                    cluster.iter().filter(|&&p| truth[p] == perm[ci]).count()
                })
                .sum();
            if hits > best {
                best = hits;
            }
        });
        best as f64 / total
    } else {
        let hits: usize = clusters
            .iter()
            .map(|cluster| {
                let mut counts = vec![0usize; num_classes];
                for &p in cluster {
                    counts[truth[p]] += 1;
                }
                counts.into_iter().max().unwrap_or(0)
            })
            .sum();
        hits as f64 / total
    }
}

fn permute(order: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == order.len() {
        visit(order);
        return;
    }
    for i in k..order.len() {
        order.swap(k, i);
        permute(order, k + 1, visit);
        order.swap(k, i);
    }
}

// ---- exhaustive / brute-force oracles shared by test targets ----

use hierindex::linalg::{euclidean, Mat};

/// WCSS of the 2-partition encoded by a membership bitmask.
pub fn two_partition_wcss(points: &[Vec<f64>], mask: u32) -> f64 {
    let dim = points[0].len();
    let mut total = 0.0;
    for side in 0..2u32 {
        let members: Vec<&Vec<f64>> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| (mask >> i) & 1 == side)
            .map(|(_, p)| p)
            .collect();
        if members.is_empty() {
            return f64::INFINITY;
        }
        let mut mean = vec![0.0; dim];
        for p in &members {
            for (m, x) in mean.iter_mut().zip(p.iter()) {
                *m += x;
            }
        }
        for m in mean.iter_mut() {
            *m /= members.len() as f64;
        }
        for p in &members {
            let d = euclidean(p, &mean);
            total += d * d;
        }
    }
    total
}

/// Minimum WCSS over every nontrivial 2-partition (n <= 20).
pub fn best_two_partition(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << n) - 1 {
        best = best.min(two_partition_wcss(points, mask));
    }
    best
}

pub fn for_each_combination(n: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(
        start: usize,
        n: usize,
        k: usize,
        cur: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, visit);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), visit);
}

/// Determinant by cofactor expansion, for matrices up to 4x4.
pub fn cofactor_det(m: &Mat) -> f64 {
    let n = m.rows();
    if n == 0 {
        return 1.0;
    }
    if n == 1 {
        return m.get(0, 0);
    }
    let mut det = 0.0;
    for j in 0..n {
        let minor = minor_of(m, 0, j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * m.get(0, j) * cofactor_det(&minor);
    }
    det
}

pub fn minor_of(m: &Mat, row: usize, col: usize) -> Mat {
    let n = m.rows();
    let rows: Vec<Vec<f64>> = (0..n)
        .filter(|&i| i != row)
        .map(|i| {
            (0..n)
                .filter(|&j| j != col)
                .map(|j| m.get(i, j))
                .collect()
        })
        .collect();
    Mat::from_rows(&rows)
}

/// Inverse via the adjugate (cofactor transpose over the determinant).
pub fn adjugate_inverse(m: &Mat) -> Mat {
    let n = m.rows();
    let det = cofactor_det(m);
    assert!(det.abs() > 0.0, "singular matrix in oracle");
    let mut inv = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let cof = sign * cofactor_det(&minor_of(m, i, j));
            inv.set(j, i, cof / det);
        }
    }
    inv
}
