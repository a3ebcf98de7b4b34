use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, DatasetKind, Labeling};
use crate::error::{Error, Result};

/// Result of carving a labeled seed out of a fully labeled dataset.
#[derive(Clone, Debug)]
pub struct SeedSplit {
    pub seed: Dataset,
    /// The remaining sentences with labels stripped.
    pub corpus: Dataset,
    /// Labels of `corpus`, kept aside for simulation and auditing.
    pub hidden_gold: Dataset,
    /// Original index of every seed sentence.
    pub seed_indices: Vec<usize>,
    /// Original index of every corpus sentence.
    pub corpus_indices: Vec<usize>,
}

/// Random sentence-level split: `round(fraction * N)` sentences go to the
/// seed. Both parts keep the input order.
pub fn split_seed(dataset: &Dataset, fraction: f64, rng_seed: u64) -> Result<SeedSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::FractionOutOfRange(fraction));
    }
    if let Some(i) = dataset
        .labels
        .iter()
        .position(|l| matches!(l, Labeling::Unlabeled))
    {
        return Err(Error::UnlabeledSentence(i));
    }
    let n = dataset.len();
    let n_seed = (fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
    let mut seed_indices = order[..n_seed].to_vec();
    let mut corpus_indices = order[n_seed..].to_vec();
    seed_indices.sort_unstable();
    corpus_indices.sort_unstable();

    let take = |idx: &[usize], kind: DatasetKind| {
        let mut d = Dataset::new(dataset.tags.clone(), kind);
        for &i in idx {
            d.push(dataset.sentences[i].clone(), dataset.labels[i].clone());
        }
        d
    };
    let seed = take(&seed_indices, DatasetKind::Seed);
    let hidden_gold = take(&corpus_indices, DatasetKind::Seed);
    let corpus = hidden_gold.unlabeled();
    Ok(SeedSplit {
        seed,
        corpus,
        hidden_gold,
        seed_indices,
        corpus_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{HardLabeling, Sentence, TagSet};

    fn dataset(n: usize) -> Dataset {
        let mut d = Dataset::new(TagSet::new(["PROT"]), DatasetKind::Seed);
        for i in 0..n {
            let w = format!("w{i}");
            d.push(
                Sentence::from_tokens(&[w.as_str()]).unwrap(),
                Labeling::Hard(HardLabeling::new(vec![i % 2])),
            );
        }
        d
    }

    #[test]
    fn three_percent_of_hundred() {
        let s = split_seed(&dataset(100), 0.03, 1).unwrap();
        assert_eq!((s.seed.len(), s.corpus.len()), (3, 97));
        assert!(s.corpus.labels.iter().all(|l| *l == Labeling::Unlabeled));
        assert_eq!(s.hidden_gold.len(), 97);
    }

    #[test]
    fn half_of_two() {
        let s = split_seed(&dataset(2), 0.5, 9).unwrap();
        assert_eq!((s.seed.len(), s.corpus.len()), (1, 1));
    }

    #[test]
    fn deterministic_and_partitioning() {
        let d = dataset(50);
        let a = split_seed(&d, 0.3, 42).unwrap();
        let b = split_seed(&d, 0.3, 42).unwrap();
        assert_eq!(a.seed_indices, b.seed_indices);
        let c = split_seed(&d, 0.3, 43).unwrap();
        assert_ne!(a.seed_indices, c.seed_indices);
        let mut all: Vec<usize> = a
            .seed_indices
            .iter()
            .chain(&a.corpus_indices)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        for (k, &i) in a.corpus_indices.iter().enumerate() {
            assert_eq!(a.hidden_gold.labels[k], d.labels[i]);
        }
    }

    #[test]
    fn rejects_bad_fraction() {
        for f in [0.0, 1.0, 1.5, -0.1, f64::NAN] {
            assert!(matches!(
                split_seed(&dataset(4), f, 0),
                Err(Error::FractionOutOfRange(_))
            ));
        }
    }
}
