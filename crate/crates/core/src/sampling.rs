//! Binary labels from demographic records, class balancing and balanced
//! random subsamples.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// The six predicted attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Gender,
    Age,
    Race,
    Married,
    Children,
    Income,
}

impl Attribute {
    pub const ALL: [Attribute; 6] = [
        Attribute::Gender,
        Attribute::Age,
        Attribute::Race,
        Attribute::Married,
        Attribute::Children,
        Attribute::Income,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Gender => "gender",
            Attribute::Age => "age",
            Attribute::Race => "race",
            Attribute::Married => "married",
            Attribute::Children => "children",
            Attribute::Income => "income",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Attribute::Age | Attribute::Children | Attribute::Income)
    }

    pub fn index(self) -> usize {
        Attribute::ALL.iter().position(|&a| a == self).unwrap()
    }

    /// The built-in two-class rule for this attribute. The first-named class
    /// is the positive one.
    pub fn default_rule(self) -> BinarizationRule {
        match self {
            Attribute::Gender => BinarizationRule::categories(self, "male", "female", &["male", "m"]),
            Attribute::Age => BinarizationRule::at_most(self, "18-32", "33-100", 32.0, Some(18.0)),
            Attribute::Race => BinarizationRule::categories(self, "white", "non-white", &["white"]),
            Attribute::Married => BinarizationRule::categories(self, "married", "single", &["married"]),
            Attribute::Children => BinarizationRule::at_most(self, "0 children", ">=1 children", 0.0, None),
            Attribute::Income => BinarizationRule::at_most(self, "<=$40K", ">$40K", 40_000.0, None),
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown attribute `{s}` (expected gender|age|race|married|children|income)"
                ))
            })
    }
}

/// One panelist's raw demographics. `None` means missing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemographicRecord {
    pub user_row: usize,
    pub gender: Option<String>,
    pub age: Option<u32>,
    pub race: Option<String>,
    pub married: Option<String>,
    pub children: Option<u32>,
    /// Annual household income in USD.
    pub income: Option<u64>,
}

/// A present attribute value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value<'a> {
    Category(&'a str),
    Number(f64),
}

impl DemographicRecord {
    pub fn value(&self, attribute: Attribute) -> Option<Value<'_>> {
        match attribute {
            Attribute::Gender => self.gender.as_deref().map(Value::Category),
            Attribute::Race => self.race.as_deref().map(Value::Category),
            Attribute::Married => self.married.as_deref().map(Value::Category),
            Attribute::Age => self.age.map(|v| Value::Number(v as f64)),
            Attribute::Children => self.children.map(|v| Value::Number(v as f64)),
            Attribute::Income => self.income.map(|v| Value::Number(v as f64)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(age) = self.age {
            if age > 130 {
                return Err(Error::Data(format!("user row {}: age {age} outside [0, 130]", self.user_row)));
            }
        }
        Ok(())
    }
}

/// How present values split into the two classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Partition {
    /// Values in `positive` (case-insensitive) are positive; every other
    /// category is negative.
    Categories { positive: Vec<String> },
    /// `value <= threshold` is positive, larger values negative. Values below
    /// `floor` are excluded.
    AtMost { threshold: f64, floor: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarizationRule {
    pub attribute: Attribute,
    pub positive_class: String,
    pub negative_class: String,
    pub partition: Partition,
}

impl BinarizationRule {
    pub fn categories(attribute: Attribute, positive: &str, negative: &str, values: &[&str]) -> Self {
        Self {
            attribute,
            positive_class: positive.into(),
            negative_class: negative.into(),
            partition: Partition::Categories {
                positive: values.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    pub fn at_most(attribute: Attribute, positive: &str, negative: &str, threshold: f64, floor: Option<f64>) -> Self {
        Self {
            attribute,
            positive_class: positive.into(),
            negative_class: negative.into(),
            partition: Partition::AtMost { threshold, floor },
        }
    }

    /// Class of a single value: `Some(1)` positive, `Some(0)` negative,
    /// `None` excluded.
    pub fn classify(&self, value: Value<'_>) -> Result<Option<u8>> {
        match (&self.partition, value) {
            (Partition::Categories { positive }, Value::Category(c)) => {
                let c = c.trim();
                Ok(Some(positive.iter().any(|p| p.eq_ignore_ascii_case(c)) as u8))
            }
            (Partition::AtMost { threshold, floor }, Value::Number(x)) => {
                if floor.is_some_and(|f| x < f) {
                    Ok(None)
                } else {
                    Ok(Some((x <= *threshold) as u8))
                }
            }
            _ => Err(Error::InvalidArgument(format!(
                "rule partition does not fit the value type of attribute `{}`",
                self.attribute
            ))),
        }
    }
}

/// Rows of the dataset with their binary labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSubset {
    pub row_indices: Vec<usize>,
    pub labels: Vec<u8>,
}

impl LabeledSubset {
    pub fn new(row_indices: Vec<usize>, labels: Vec<u8>) -> Result<Self> {
        if row_indices.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                context: "labeled subset",
                expected: row_indices.len(),
                actual: labels.len(),
            });
        }
        if let Some(pos) = labels.iter().position(|&l| l > 1) {
            return Err(Error::NonBinaryLabel(labels[pos], pos));
        }
        Ok(Self { row_indices, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn n_negative(&self) -> usize {
        self.len() - self.n_positive()
    }

    /// Positions (into this subset) of each class: `(negatives, positives)`.
    pub fn class_positions(&self) -> (Vec<usize>, Vec<usize>) {
        let mut neg = Vec::new();
        let mut pos = Vec::new();
        for (k, &l) in self.labels.iter().enumerate() {
            if l == 1 {
                pos.push(k);
            } else {
                neg.push(k);
            }
        }
        (neg, pos)
    }

    /// Sub-subset at the given positions.
    pub fn pick(&self, positions: &[usize]) -> Self {
        Self {
            row_indices: positions.iter().map(|&k| self.row_indices[k]).collect(),
            labels: positions.iter().map(|&k| self.labels[k]).collect(),
        }
    }
}

/// Label every user with a non-missing value for `rule.attribute`.
pub fn binarize(records: &[DemographicRecord], rule: &BinarizationRule) -> Result<LabeledSubset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for r in records {
        if let Some(v) = r.value(rule.attribute) {
            if let Some(label) = rule.classify(v)? {
                rows.push(r.user_row);
                labels.push(label);
            }
        }
    }
    Ok(LabeledSubset {
        row_indices: rows,
        labels,
    })
}

/// Undersample the majority class to the minority count, then shuffle.
pub fn balance(subset: &LabeledSubset, seed: u64) -> Result<LabeledSubset> {
    let (neg, pos) = subset.class_positions();
    if neg.is_empty() || pos.is_empty() {
        return Err(Error::Unbalanceable(format!(
            "{} positives and {} negatives",
            pos.len(),
            neg.len()
        )));
    }
    let m = neg.len().min(pos.len());
    draw_balanced(&neg, &pos, m, seed, subset)
}

/// Exactly `n_users / 2` users of each class, drawn without replacement.
pub fn balanced_subsample(subset: &LabeledSubset, n_users: usize, seed: u64) -> Result<LabeledSubset> {
    if n_users == 0 || !n_users.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("subsample size {n_users} must be even and positive")));
    }
    let (neg, pos) = subset.class_positions();
    let half = n_users / 2;
    if neg.len() < half || pos.len() < half {
        return Err(Error::InsufficientPopulation(format!(
            "need {half} per class, have {} positives and {} negatives",
            pos.len(),
            neg.len()
        )));
    }
    draw_balanced(&neg, &pos, half, seed, subset)
}

fn draw_balanced(
    neg: &[usize],
    pos: &[usize],
    per_class: usize,
    seed: u64,
    subset: &LabeledSubset,
) -> Result<LabeledSubset> {
    let mut rng = rng::seeded(seed);
    let mut picked: Vec<usize> = Vec::with_capacity(2 * per_class);
    for class in [pos, neg] {
        let chosen = index::sample(&mut rng, class.len(), per_class);
        let mut chosen: Vec<usize> = chosen.into_iter().map(|k| class[k]).collect();
        chosen.sort_unstable();
        picked.extend(chosen);
    }
    picked.shuffle(&mut rng);
    Ok(subset.pick(&picked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(row: usize) -> DemographicRecord {
        DemographicRecord {
            user_row: row,
            ..Default::default()
        }
    }

    fn subset(n_pos: usize, n_neg: usize) -> LabeledSubset {
        let labels: Vec<u8> = (0..n_pos).map(|_| 1).chain((0..n_neg).map(|_| 0)).collect();
        LabeledSubset::new((0..labels.len()).map(|i| i * 3).collect(), labels).unwrap()
    }

    #[test]
    fn age_rule() {
        let rule = Attribute::Age.default_rule();
        let records: Vec<_> = [30u32, 32, 33, 100, 17]
            .iter()
            .enumerate()
            .map(|(i, &a)| DemographicRecord { age: Some(a), ..rec(i) })
            .collect();
        let s = binarize(&records, &rule).unwrap();
        assert_eq!(s.row_indices, vec![0, 1, 2, 3]);
        assert_eq!(s.labels, vec![1, 1, 0, 0]);
    }

    #[test]
    fn children_and_income_rules() {
        let records = vec![
            DemographicRecord { children: Some(2), income: None, ..rec(0) },
            DemographicRecord { children: Some(0), income: Some(40_000), ..rec(1) },
            DemographicRecord { children: None, income: Some(40_001), ..rec(2) },
        ];
        let kids = binarize(&records, &Attribute::Children.default_rule()).unwrap();
        assert_eq!((kids.row_indices.clone(), kids.labels.clone()), (vec![0, 1], vec![0, 1]));
        let income = binarize(&records, &Attribute::Income.default_rule()).unwrap();
        assert_eq!((income.row_indices, income.labels), (vec![1, 2], vec![1, 0]));
    }

    #[test]
    fn categorical_rules() {
        let records = vec![
            DemographicRecord { gender: Some("Male".into()), race: Some("asian".into()), ..rec(0) },
            DemographicRecord { gender: Some("female".into()), race: Some("White".into()), ..rec(1) },
        ];
        assert_eq!(binarize(&records, &Attribute::Gender.default_rule()).unwrap().labels, vec![1, 0]);
        assert_eq!(binarize(&records, &Attribute::Race.default_rule()).unwrap().labels, vec![0, 1]);
    }

    #[test]
    fn mismatched_partition_is_rejected() {
        let rule = BinarizationRule::categories(Attribute::Age, "a", "b", &["x"]);
        let records = vec![DemographicRecord { age: Some(20), ..rec(0) }];
        assert!(binarize(&records, &rule).is_err());
    }

    #[test]
    fn attribute_names_parse() {
        for a in Attribute::ALL {
            assert_eq!(a.name().parse::<Attribute>().unwrap(), a);
        }
        assert!("height".parse::<Attribute>().is_err());
    }

    #[test]
    fn balance_examples() {
        let even = subset(10, 10);
        let b = balance(&even, 1).unwrap();
        assert_eq!(b.len(), 20);
        let mut rows = b.row_indices.clone();
        rows.sort_unstable();
        assert_eq!(rows, even.row_indices);

        let skewed = subset(30, 10);
        let b = balance(&skewed, 5).unwrap();
        assert_eq!((b.n_positive(), b.n_negative()), (10, 10));
        assert_eq!(balance(&skewed, 5).unwrap(), b);
        assert_ne!(balance(&skewed, 6).unwrap(), b);
    }

    #[test]
    fn balance_needs_both_classes() {
        assert!(matches!(balance(&subset(4, 0), 0), Err(Error::Unbalanceable(_))));
    }

    #[test]
    fn subsample_examples() {
        let pool = subset(200, 200);
        let s = balanced_subsample(&pool, 174, 3).unwrap();
        assert_eq!((s.n_positive(), s.n_negative()), (87, 87));

        let full = balanced_subsample(&pool, 400, 3).unwrap();
        let mut a = full.row_indices.clone();
        a.sort_unstable();
        let mut b = balance(&pool, 9).unwrap().row_indices;
        b.sort_unstable();
        assert_eq!(a, b);

        let two = balanced_subsample(&pool, 2, 3).unwrap();
        assert_eq!((two.n_positive(), two.n_negative()), (1, 1));

        assert!(matches!(balanced_subsample(&pool, 402, 0), Err(Error::InsufficientPopulation(_))));
        assert!(balanced_subsample(&pool, 3, 0).is_err());
    }

    #[test]
    fn repeated_half_draws_cover_the_pool() {
        let pool = subset(50, 50);
        let mut seen = vec![false; pool.len()];
        for seed in 0..1000 {
            for k in balanced_subsample(&pool, 50, seed).unwrap().row_indices {
                seen[k / 3] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    proptest! {
        #[test]
        fn balanced_output_is_a_fair_subset(n_pos in 1usize..40, n_neg in 1usize..40, seed in any::<u64>()) {
            let s = subset(n_pos, n_neg);
            let b = balance(&s, seed).unwrap();
            prop_assert_eq!(b.n_positive(), b.n_negative());
            prop_assert_eq!(2 * b.n_positive(), b.len());
            let mean = b.labels.iter().map(|&l| l as f64).sum::<f64>() / b.len() as f64;
            prop_assert_eq!(mean, 0.5);
            for (r, l) in b.row_indices.iter().zip(&b.labels) {
                let k = s.row_indices.iter().position(|x| x == r).unwrap();
                prop_assert_eq!(s.labels[k], *l);
            }
            let mut rows = b.row_indices.clone();
            rows.sort_unstable();
            rows.dedup();
            prop_assert_eq!(rows.len(), b.len());
        }
    }
}
