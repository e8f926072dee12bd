//! Brute-force reference implementations of the metric kernels, written
//! independently of the library: token lists instead of hash maps, explicit
//! subsequence enumeration for LCS, products instead of log-sums.

use rand::Rng;

pub fn tokens(s: &str) -> Vec<String> {
    let lowered = s.to_lowercase();
    let stripped: String = lowered.chars().filter(|c| !c.is_ascii_punctuation()).collect();
    stripped
        .split_whitespace()
        .filter(|t| !matches!(*t, "a" | "an" | "the"))
        .map(str::to_string)
        .collect()
}

fn f_measure(p: f64, r: f64) -> f64 {
    if p == 0.0 && r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// (precision, recall, f1) over id lists without duplicates.
pub fn set_prf(selected: &[u32], truth: &[u32]) -> (f64, f64, f64) {
    let mut hits = 0;
    for s in selected {
        for t in truth {
            if s == t {
                hits += 1;
            }
        }
    }
    let p = if selected.is_empty() { 0.0 } else { hits as f64 / selected.len() as f64 };
    let r = hits as f64 / truth.len() as f64;
    (p, r, f_measure(p, r))
}

pub fn ndcg(ranking: &[u32], relevant: &[u32], k: usize) -> f64 {
    let mut dcg = 0.0;
    for (i, id) in ranking.iter().enumerate() {
        if i >= k {
            break;
        }
        if relevant.contains(id) {
            dcg += 1.0 / ((i + 2) as f64).log2();
        }
    }
    let ideal: Vec<f64> = vec![1.0; relevant.len()];
    let mut idcg = 0.0;
    for (i, g) in ideal.iter().enumerate() {
        if i >= k {
            break;
        }
        idcg += g / ((i + 2) as f64).log2();
    }
    dcg / idcg
}

pub fn mrr(ranking: &[u32], relevant: &[u32], k: usize) -> f64 {
    for (i, id) in ranking.iter().take(k).enumerate() {
        if relevant.contains(id) {
            return 1.0 / (i as f64 + 1.0);
        }
    }
    0.0
}

fn common_count(a: &[String], b: &[String]) -> usize {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort();
    b.sort();
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    n
}

pub fn token_f1(pred: &str, golds: &[String]) -> f64 {
    let p = tokens(pred);
    let mut best: f64 = 0.0;
    for g in golds {
        let g = tokens(g);
        let score = if p.is_empty() && g.is_empty() {
            1.0
        } else if p.is_empty() || g.is_empty() {
            0.0
        } else {
            let c = common_count(&p, &g) as f64;
            f_measure(c / p.len() as f64, c / g.len() as f64)
        };
        best = best.max(score);
    }
    best
}

fn is_subsequence(needle: &[&String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == *n))
}

/// LCS length by trying every subsequence of the shorter side.
fn lcs_brute(a: &[String], b: &[String]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let pick: Vec<&String> = (0..short.len()).filter(|i| mask & (1 << i) != 0).map(|i| &short[i]).collect();
        if pick.len() > best && is_subsequence(&pick, long) {
            best = pick.len();
        }
    }
    best
}

pub fn rouge_l(pred: &str, reference: &str) -> f64 {
    let p = tokens(pred);
    let r = tokens(reference);
    if p.is_empty() || r.is_empty() {
        return if p.is_empty() && r.is_empty() { 1.0 } else { 0.0 };
    }
    let l = lcs_brute(&p, &r) as f64;
    f_measure(l / p.len() as f64, l / r.len() as f64)
}

fn ngrams(t: &[String], n: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + n <= t.len() {
        out.push(t[i..i + n].to_vec());
        i += 1;
    }
    out
}

fn occurrences(list: &[Vec<String>], g: &[String]) -> usize {
    list.iter().filter(|x| x.as_slice() == g).count()
}

pub fn bleu(pred: &str, refs: &[String], max_n: usize) -> Vec<f64> {
    let p = tokens(pred);
    if p.is_empty() {
        return vec![0.0; max_n];
    }
    let rs: Vec<Vec<String>> = refs.iter().map(|r| tokens(r)).collect();
    // Closest reference length, shorter wins ties.
    let mut r_len = rs[0].len();
    for r in &rs[1..] {
        let d_new = (r.len() as i64 - p.len() as i64).abs();
        let d_old = (r_len as i64 - p.len() as i64).abs();
        if d_new < d_old || (d_new == d_old && r.len() < r_len) {
            r_len = r.len();
        }
    }
    let c = p.len() as f64;
    let bp = if p.len() > r_len { 1.0 } else { (1.0 - r_len as f64 / c).exp() };

    let mut precisions = Vec::new();
    for n in 1..=max_n {
        let pg = ngrams(&p, n);
        let mut seen: Vec<Vec<String>> = Vec::new();
        let mut clipped = 0;
        for g in &pg {
            if seen.contains(g) {
                continue;
            }
            seen.push(g.clone());
            let mut max_ref = 0;
            for r in &rs {
                max_ref = max_ref.max(occurrences(&ngrams(r, n), g));
            }
            clipped += occurrences(&pg, g).min(max_ref);
        }
        precisions.push(if pg.is_empty() || clipped == 0 { 1e-9 } else { clipped as f64 / pg.len() as f64 });
    }
    (1..=max_n)
        .map(|n| bp * precisions[..n].iter().product::<f64>().powf(1.0 / n as f64))
        .collect()
}

const VOCAB: [&str; 14] = ["x", "y", "z", "w", "v", "u", "The", "a", "cat,", "Dog!", "mat", "sat", "on", "an"];

/// Random sentence of up to `max_len` words over a small vocabulary, with
/// articles, capitals and punctuation to exercise normalization.
pub fn sentence<R: Rng>(rng: &mut R, max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())]).collect::<Vec<_>>().join(" ")
}
