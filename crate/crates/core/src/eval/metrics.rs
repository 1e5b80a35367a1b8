//! Token-level metric kernels over pre-tokenized strings.

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub const MAX_NGRAM: usize = 4;
pub const ROUGE_BETA: f64 = 1.2;
pub const CIDER_D_SIGMA: f64 = 6.0;

/// CIDEr flavour. `Plain` uses raw term counts; `D` clips candidate counts
/// by the reference counts and applies a Gaussian length penalty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiderVariant {
    #[default]
    Plain,
    D,
}

// ordered maps keep floating-point summation order fixed
type Counts = BTreeMap<String, f64>;

fn ngrams(tokens: &[String], n: usize) -> Counts {
    let mut out = Counts::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w.join(" ")).or_insert(0.0) += 1.0;
        }
    }
    out
}

/// tf-idf vector of one n-gram order and its Euclidean norm.
fn weigh<'a>(counts: &'a Counts, idf: &impl Fn(&str) -> f64) -> (BTreeMap<&'a str, f64>, f64) {
    let v: BTreeMap<&str, f64> = counts.iter().map(|(g, &tf)| (g.as_str(), tf * idf(g))).collect();
    let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
    (v, norm)
}

/// Corpus CIDEr: the mean over examples of 10 × the mean over n = 1..4 of
/// the mean over references of the tf-idf cosine. `None` when the corpus has
/// fewer than two examples.
pub fn cider_corpus(candidates: &[Vec<String>], references: &[Vec<Vec<String>>], variant: CiderVariant) -> Option<f64> {
    assert_eq!(candidates.len(), references.len());
    let n_docs = candidates.len();
    if n_docs < 2 {
        return None;
    }
    let log_n = (n_docs as f64).ln();
    let cand_grams: Vec<Vec<Counts>> = candidates
        .iter()
        .map(|c| (1..=MAX_NGRAM).map(|n| ngrams(c, n)).collect())
        .collect();
    let ref_grams: Vec<Vec<Vec<Counts>>> = references
        .iter()
        .map(|rs| {
            rs.iter()
                .map(|r| (1..=MAX_NGRAM).map(|n| ngrams(r, n)).collect())
                .collect()
        })
        .collect();
    // document frequency: examples whose reference set contains the n-gram
    let mut df: HashMap<&str, f64> = HashMap::new();
    for rs in &ref_grams {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for r in rs {
            for counts in r {
                seen.extend(counts.keys().map(String::as_str));
            }
        }
        for g in seen {
            *df.entry(g).or_insert(0.0) += 1.0;
        }
    }
    let idf = |g: &str| log_n - df.get(g).copied().unwrap_or(0.0).max(1.0).ln();
    let mut total = 0.0;
    for i in 0..n_docs {
        let refs = &ref_grams[i];
        if refs.is_empty() {
            continue;
        }
        let mut per_n = 0.0;
        for n in 0..MAX_NGRAM {
            let (cv, cn) = weigh(&cand_grams[i][n], &idf);
            // sorted before summing so reference order cannot change the result
            let mut sims = Vec::with_capacity(refs.len());
            for (j, r) in refs.iter().enumerate() {
                let (rv, rn) = weigh(&r[n], &idf);
                if cn == 0.0 || rn == 0.0 {
                    sims.push(0.0);
                    continue;
                }
                let dot: f64 = cv
                    .iter()
                    .filter_map(|(g, &x)| {
                        let y = *rv.get(g)?;
                        Some(match variant {
                            CiderVariant::Plain => x * y,
                            CiderVariant::D => x.min(y) * y,
                        })
                    })
                    .sum();
                let mut sim = dot / (cn * rn);
                if variant == CiderVariant::D {
                    let delta = candidates[i].len() as f64 - references[i][j].len() as f64;
                    sim *= (-(delta * delta) / (2.0 * CIDER_D_SIGMA * CIDER_D_SIGMA)).exp();
                }
                sims.push(sim);
            }
            sims.sort_by(f64::total_cmp);
            per_n += sims.iter().sum::<f64>() / refs.len() as f64;
        }
        total += 10.0 * per_n / MAX_NGRAM as f64;
    }
    Some(total / n_docs as f64)
}

pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE-L F-measure with `β = 1.2`, maximised over references.
pub fn rouge_l_example(candidate: &[String], references: &[Vec<String>]) -> f64 {
    references
        .iter()
        .map(|r| {
            let lcs = lcs_len(candidate, r);
            if lcs == 0 {
                return 0.0;
            }
            let p = lcs as f64 / candidate.len() as f64;
            let rec = lcs as f64 / r.len() as f64;
            let b2 = ROUGE_BETA * ROUGE_BETA;
            (1.0 + b2) * p * rec / (rec + b2 * p)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn lcs_basics() {
        assert_eq!(lcs_len(&t("a b c d"), &t("a c d")), 3);
        assert_eq!(lcs_len(&t(""), &t("a")), 0);
    }

    #[test]
    fn rouge_fixture() {
        let f = rouge_l_example(&t("white cat"), &[t("big white cat")]);
        assert!((f - 0.772_151_898_734_177).abs() < 1e-12, "{f}");
        assert_eq!(rouge_l_example(&t("white cat"), &[t("white cat")]), 1.0);
        assert_eq!(rouge_l_example(&t("dog"), &[t("white cat")]), 0.0);
        assert_eq!(rouge_l_example(&t(""), &[t("white cat")]), 0.0);
    }

    #[test]
    fn cider_needs_two_docs_and_zero_overlap_is_zero() {
        assert_eq!(cider_corpus(&[t("a")], &[vec![t("a")]], CiderVariant::Plain), None);
        let s = cider_corpus(
            &[t("x y"), t("z")],
            &[vec![t("a b")], vec![t("c")]],
            CiderVariant::Plain,
        )
        .unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn cider_d_never_exceeds_plain_bound() {
        let c = [t("a b c"), t("d e")];
        let r = [vec![t("a b c"), t("a b")], vec![t("d e f g")]];
        let d = cider_corpus(&c, &r, CiderVariant::D).unwrap();
        assert!((0.0..=10.0).contains(&d));
    }
}
