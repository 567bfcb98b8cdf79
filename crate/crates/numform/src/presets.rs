//! Named experiment presets: dataset recipes for the interpolation,
//! extrapolation, base-variation, and distribution-mismatch studies,
//! plus the two-digit training protocol and the epochs-per-dataset-size
//! schedule used when scaling training data.

use crate::bignum::BigNumber;
use crate::microformer::{ModelConfig, TrainConfig, Vocabulary};
use crate::orthography::{DigitOrder, OrthographySpec, Scheme};
use crate::taskgen::{SamplingConfig, SamplingMethod};

/// Which file of a dataset triple is being generated.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "dev" => Some(Split::Dev),
            "test" => Some(Split::Test),
            _ => None,
        }
    }

    /// Splits draw from disjoint seed spaces derived from one user seed.
    pub fn derive_seed(self, base_seed: u64) -> u64 {
        let offset = match self {
            Split::Train => 0,
            Split::Dev => 1,
            Split::Test => 2,
        };
        base_seed.wrapping_mul(3).wrapping_add(offset)
    }
}

/// A fully resolved generation recipe for one split.
#[derive(Clone, PartialEq, Debug)]
pub struct GenPlan {
    pub sampling: SamplingConfig,
    pub orthography: OrthographySpec,
    pub require_operand_digits_over: Option<usize>,
}

pub const GEN_PRESETS: [&str; 11] = [
    "interpolation-60",
    "extrapolation-50-60",
    "figure2-smoke",
    "bases-2",
    "bases-3",
    "bases-10",
    "bases-19",
    "mismatch-balxbal",
    "mismatch-balxrand",
    "mismatch-randxbal",
    "mismatch-randxrand",
];

/// Resolves a named preset for one split. The seed is the user's base
/// seed; per-split seeds are derived internally. Returns `None` for
/// unknown preset names.
pub fn gen_preset(name: &str, split: Split, base_seed: u64) -> Option<GenPlan> {
    let seed = split.derive_seed(base_seed);
    let ten_e = OrthographySpec::new(Scheme::TenEBased);
    let plan = |method: SamplingMethod, max_digits: usize, count: usize| SamplingConfig {
        method,
        max_digits,
        min_digits: 2,
        base: 10,
        count,
        seed,
    };

    match name {
        // train and test on up to 60-digit numbers
        "interpolation-60" => {
            let sampling = match split {
                Split::Train => plan(SamplingMethod::Balanced, 60, 100_000),
                Split::Dev => plan(SamplingMethod::Balanced, 60, 10_000),
                Split::Test => plan(SamplingMethod::Random, 60, 10_000),
            };
            Some(GenPlan { sampling, orthography: ten_e, require_operand_digits_over: None })
        }
        // train on up to 50 digits, test on 60-digit numbers only
        "extrapolation-50-60" => {
            let (sampling, filter) = match split {
                Split::Train => (plan(SamplingMethod::Balanced, 50, 100_000), None),
                Split::Dev => (plan(SamplingMethod::Balanced, 50, 10_000), None),
                Split::Test => (plan(SamplingMethod::Random, 60, 10_000), Some(50)),
            };
            Some(GenPlan { sampling, orthography: ten_e, require_operand_digits_over: filter })
        }
        // exhaustive two-digit addition; the 9:1 split happens at
        // training time, so every split yields the same file
        "figure2-smoke" => Some(GenPlan {
            sampling: SamplingConfig {
                method: SamplingMethod::Balanced,
                max_digits: 2,
                min_digits: 2,
                base: 10,
                count: 8100,
                seed,
            },
            orthography: ten_e,
            require_operand_digits_over: None,
        }),
        // numbers equivalent to 15 decimal digits in bases 2/3/10/19
        "bases-2" | "bases-3" | "bases-10" | "bases-19" => {
            let base: u32 = name.strip_prefix("bases-")?.parse().ok()?;
            let digits = BigNumber::digit_count_for_equivalent(15, base).ok()?;
            let method = match split {
                Split::Train | Split::Dev => SamplingMethod::Balanced,
                Split::Test => SamplingMethod::Random,
            };
            Some(GenPlan {
                sampling: SamplingConfig {
                    method,
                    max_digits: digits,
                    min_digits: 2,
                    base,
                    count: 1000,
                    seed,
                },
                orthography: OrthographySpec::new(Scheme::TenEBased)
                    .with_order(DigitOrder::Inverse)
                    .with_base(base),
                require_operand_digits_over: None,
            })
        }
        // train on one 60-digit sampling method, test on the other
        "mismatch-balxbal" | "mismatch-balxrand" | "mismatch-randxbal"
        | "mismatch-randxrand" => {
            let pair = name.strip_prefix("mismatch-")?;
            let (train_m, test_m) = pair.split_once('x')?;
            let to_method = |m: &str| match m {
                "bal" => Some(SamplingMethod::Balanced),
                "rand" => Some(SamplingMethod::Random),
                _ => None,
            };
            let method = match split {
                Split::Train | Split::Dev => to_method(train_m)?,
                Split::Test => to_method(test_m)?,
            };
            let count = match split {
                Split::Train => 100_000,
                Split::Dev | Split::Test => 10_000,
            };
            Some(GenPlan {
                sampling: plan(method, 60, count),
                orthography: ten_e,
                require_operand_digits_over: None,
            })
        }
        _ => None,
    }
}

/// Model shape for the two-digit position-encoding protocol: 4+4
/// layers, small width.
pub fn figure2_model_config(orthography: OrthographySpec, vocabulary: Vocabulary) -> ModelConfig {
    ModelConfig::new(orthography, vocabulary).with_width(32, 4, 128)
}

/// 55 epochs at learning rate 1e-5 over a 9:1 split, one example per
/// optimizer step.
pub fn figure2_train_config(seed: u64) -> TrainConfig {
    TrainConfig { epochs: 55, batch_size: 1, seed, eval_every: 5, ..TrainConfig::default() }
}

/// Training epochs for a dataset size: large corpora need fewer passes.
pub fn epochs_for_dataset_size(examples: usize) -> usize {
    match examples {
        0..=1_000 => 200,
        1_001..=10_000 => 100,
        10_001..=100_000 => 20,
        100_001..=1_000_000 => 10,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epoch_schedule_matches_the_reference_table() {
        assert_eq!(epochs_for_dataset_size(1_000), 200);
        assert_eq!(epochs_for_dataset_size(10_000), 100);
        assert_eq!(epochs_for_dataset_size(100_000), 20);
        assert_eq!(epochs_for_dataset_size(1_000_000), 10);
        assert_eq!(epochs_for_dataset_size(10_000_000), 1);
    }

    #[test]
    fn interpolation_preset_mixes_methods_per_split() {
        let train = gen_preset("interpolation-60", Split::Train, 1).unwrap();
        assert_eq!(train.sampling.method, SamplingMethod::Balanced);
        assert_eq!(train.sampling.max_digits, 60);
        let test = gen_preset("interpolation-60", Split::Test, 1).unwrap();
        assert_eq!(test.sampling.method, SamplingMethod::Random);
        assert_eq!(test.sampling.max_digits, 60);
        assert!(test.require_operand_digits_over.is_none());
    }

    #[test]
    fn extrapolation_preset_holds_lengths_out_of_training() {
        let train = gen_preset("extrapolation-50-60", Split::Train, 1).unwrap();
        assert_eq!(train.sampling.max_digits, 50);
        assert_eq!(train.require_operand_digits_over, None);
        let test = gen_preset("extrapolation-50-60", Split::Test, 1).unwrap();
        assert_eq!(test.sampling.max_digits, 60);
        assert_eq!(test.require_operand_digits_over, Some(50));
    }

    #[test]
    fn base_presets_use_equivalent_digit_budgets() {
        for (name, base, digits) in
            [("bases-2", 2, 50), ("bases-3", 3, 32), ("bases-10", 10, 15), ("bases-19", 19, 12)]
        {
            let p = gen_preset(name, Split::Train, 0).unwrap();
            assert_eq!(p.sampling.base, base);
            assert_eq!(p.sampling.max_digits, digits, "{name}");
            assert_eq!(p.orthography.base, base);
            assert_eq!(p.orthography.order, DigitOrder::Inverse);
        }
    }

    #[test]
    fn mismatch_presets_cross_methods() {
        let p = gen_preset("mismatch-balxrand", Split::Train, 0).unwrap();
        assert_eq!(p.sampling.method, SamplingMethod::Balanced);
        let p = gen_preset("mismatch-balxrand", Split::Test, 0).unwrap();
        assert_eq!(p.sampling.method, SamplingMethod::Random);
        let p = gen_preset("mismatch-randxbal", Split::Test, 0).unwrap();
        assert_eq!(p.sampling.method, SamplingMethod::Balanced);
        let p = gen_preset("mismatch-randxrand", Split::Train, 0).unwrap();
        assert_eq!(p.sampling.method, SamplingMethod::Random);
    }

    #[test]
    fn split_seeds_are_distinct() {
        let seeds: std::collections::BTreeSet<u64> = [Split::Train, Split::Dev, Split::Test]
            .iter()
            .map(|s| s.derive_seed(7))
            .collect();
        assert_eq!(seeds.len(), 3);
    }

    #[test]
    fn unknown_presets_are_none() {
        assert!(gen_preset("nope", Split::Train, 0).is_none());
        for name in GEN_PRESETS {
            assert!(gen_preset(name, Split::Test, 0).is_some(), "{name}");
        }
    }
}
