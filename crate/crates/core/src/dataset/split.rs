use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::model::N_CLASSES;
use crate::seeding::{self, tag};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
        }
    }
}

/// Number of training samples taken from a group of `n`: the floor of
/// `n · fraction`, plus one with probability equal to the fractional part.
fn train_count(n: usize, fraction: f64, rng: &mut impl Rng) -> usize {
    let exact = n as f64 * fraction;
    let base = exact.floor();
    let extra = usize::from(rng.gen::<f64>() < exact - base);
    (base as usize + extra).min(n)
}

/// Splits into `(train, validation)`, preserving per-class proportions when
/// `spec.stratified` is set. Each class is shuffled with its own seeded
/// stream; both halves keep the original relative order of samples.
pub fn stratified_split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if !(0.0..=1.0).contains(&spec.train_fraction) {
        return Err(Error::Config(format!("train fraction {} outside [0, 1]", spec.train_fraction)));
    }
    let groups: Vec<Vec<usize>> = if spec.stratified {
        let mut g = vec![Vec::new(); N_CLASSES];
        for (i, img) in data.images.iter().enumerate() {
            g[img.label].push(i);
        }
        g
    } else {
        vec![(0..data.len()).collect()]
    };
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (k, mut idx) in groups.into_iter().enumerate() {
        let mut rng = seeding::stream(spec.seed, &[tag::SPLIT, k as u64]);
        let n_train = train_count(idx.len(), spec.train_fraction, &mut rng);
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..n_train]);
        val.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((data.subset(&train), data.subset(&val)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledImage;

    fn labelled(counts: &[usize]) -> Dataset {
        let mut images = Vec::new();
        for (label, &n) in counts.iter().enumerate() {
            for i in 0..n {
                let mut px = vec![0.0; 784];
                px[0] = i as f64;
                images.push(LabeledImage::new(px, label, format!("{label}/{i}")).unwrap());
            }
        }
        Dataset::new(images)
    }

    #[test]
    fn balanced_counts() {
        let data = labelled(&[50; 10]);
        let (train, val) = stratified_split(&data, &SplitSpec::default()).unwrap();
        assert_eq!(train.class_counts(), [40; 10]);
        assert_eq!(val.class_counts(), [10; 10]);
    }

    #[test]
    fn seven_sample_class_rounds_within_one() {
        let data = labelled(&[7]);
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..64 {
            let spec = SplitSpec {
                seed,
                ..SplitSpec::default()
            };
            let (train, val) = stratified_split(&data, &spec).unwrap();
            assert_eq!(train.len() + val.len(), 7);
            seen.insert(train.len());
        }
        // 0.8 · 7 = 5.6: floor 5, plus one 60% of the time.
        assert_eq!(seen, [5, 6].into_iter().collect());
    }

    #[test]
    fn deterministic_and_disjoint() {
        let data = labelled(&[13, 9, 21]);
        let spec = SplitSpec {
            seed: 99,
            ..SplitSpec::default()
        };
        let (a, b) = stratified_split(&data, &spec).unwrap();
        let (a2, b2) = stratified_split(&data, &spec).unwrap();
        assert_eq!((&a, &b), (&a2, &b2));
        let mut ids: Vec<_> = a.images.iter().chain(&b.images).map(|i| i.source_id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), data.len());
    }
}
