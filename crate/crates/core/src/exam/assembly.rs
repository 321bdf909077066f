use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    validate_question, Category, ExamBlueprint, ExamError, ExamForm, Question, QuestionDefect,
    QuestionId,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deficiency {
    pub category: Category,
    pub required: u32,
    pub available: u32,
}

/// Outcome of checking a bank against a blueprint. Empty means usable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankReport {
    pub deficiencies: Vec<Deficiency>,
    pub duplicate_ids: Vec<QuestionId>,
    pub invalid: Vec<(QuestionId, Vec<QuestionDefect>)>,
}

impl BankReport {
    pub fn is_ok(&self) -> bool {
        self.deficiencies.is_empty() && self.duplicate_ids.is_empty() && self.invalid.is_empty()
    }
}

impl fmt::Display for BankReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for d in &self.deficiencies {
            parts.push(format!(
                "{} requires {} but bank has {}",
                d.category, d.required, d.available
            ));
        }
        for id in &self.duplicate_ids {
            parts.push(format!("duplicate id {id}"));
        }
        for (id, defects) in &self.invalid {
            parts.push(format!("question {id} has {} defect(s)", defects.len()));
        }
        if parts.is_empty() {
            f.write_str("ok")
        } else {
            f.write_str(&parts.join("; "))
        }
    }
}

/// Checks that the bank can fill every category quota of `bp` and that
/// question ids are unique.
pub fn validate_bank(bank: &[Question], bp: &ExamBlueprint) -> BankReport {
    let mut report = BankReport::default();

    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    for q in bank {
        if !seen.insert(&q.id) && reported.insert(&q.id) {
            report.duplicate_ids.push(q.id.clone());
        }
        if let Err(defects) = validate_question(q) {
            report.invalid.push((q.id.clone(), defects));
        }
    }

    let mut available: HashMap<&Category, u32> = HashMap::new();
    for q in bank {
        *available.entry(&q.category).or_default() += 1;
    }
    for quota in bp.composition() {
        let have = available.get(&quota.category).copied().unwrap_or(0);
        if have < quota.count {
            report.deficiencies.push(Deficiency {
                category: quota.category.clone(),
                required: quota.count,
                available: have,
            });
        }
    }
    report
}

/// Builds a form: for each category, draws its quota uniformly without
/// replacement from the bank, then shuffles the combined selection.
///
/// The same `(bank, bp, seed)` always yields the same form.
pub fn assemble_exam(
    bank: &[Question],
    bp: &ExamBlueprint,
    seed: u64,
) -> Result<ExamForm, ExamError> {
    let report = validate_bank(bank, bp);
    if !report.is_ok() {
        return Err(ExamError::InsufficientBank(report));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(bp.n_questions() as usize);
    for quota in bp.composition() {
        let pool: Vec<&Question> = bank
            .iter()
            .filter(|q| q.category == quota.category)
            .collect();
        // sample() returns indices in random order; sort so the draw alone,
        // not its order, depends on the rng at this step.
        let mut picked = index::sample(&mut rng, pool.len(), quota.count as usize).into_vec();
        picked.sort_unstable();
        items.extend(picked.into_iter().map(|i| pool[i].clone()));
    }
    items.shuffle(&mut rng);

    Ok(ExamForm {
        form_id: format!("form-{seed:016x}"),
        seed,
        items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bank(per_category: usize) -> Vec<Question> {
        Category::canonical()
            .iter()
            .flat_map(|c| {
                (0..per_category).map(move |i| {
                    Question::new(
                        format!("{}-{i}", c.as_str().to_lowercase()),
                        c.as_str(),
                        format!("{c} question {i}"),
                        ["a", "b", "c", "d"],
                        (i % 4) as u32,
                    )
                })
            })
            .collect()
    }

    #[test]
    fn exact_bank_is_ok() {
        assert!(validate_bank(&bank(10), &ExamBlueprint::default()).is_ok());
    }

    #[test]
    fn short_category_is_reported() {
        let mut b = bank(10);
        b.retain(|q| q.id.as_str() != "security-9");
        let report = validate_bank(&b, &ExamBlueprint::default());
        // count by category over the bank
        let available = b
            .iter()
            .filter(|q| q.category.as_str() == "Security")
            .count() as u32;
        assert_eq!(available, 9);
        assert_eq!(
            report.deficiencies,
            vec![Deficiency {
                category: "Security".into(),
                required: 10,
                available
            }]
        );
        assert!(report.duplicate_ids.is_empty());
    }

    #[test]
    fn duplicate_id_is_reported_once() {
        let mut b = bank(10);
        let mut copy = b[0].clone();
        copy.category = "IT".into();
        b.push(copy.clone());
        b.push(copy);
        let report = validate_bank(&b, &ExamBlueprint::default());
        assert_eq!(report.duplicate_ids, vec![QuestionId::new("programming-0")]);
        assert!(!report.is_ok());
    }

    #[test]
    fn forced_selection_is_a_permutation_of_the_bank() {
        let b = bank(10);
        for seed in [0, 1, 42, u64::MAX] {
            let form = assemble_exam(&b, &ExamBlueprint::default(), seed).unwrap();
            let mut got: Vec<_> = form.items.iter().map(|q| q.id.clone()).collect();
            let mut want: Vec<_> = b.iter().map(|q| q.id.clone()).collect();
            got.sort();
            want.sort();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn same_seed_same_order() {
        let b = bank(30);
        let bp = ExamBlueprint::default();
        assert_eq!(
            assemble_exam(&b, &bp, 7).unwrap(),
            assemble_exam(&b, &bp, 7).unwrap()
        );
        assert_ne!(
            assemble_exam(&b, &bp, 7).unwrap().items,
            assemble_exam(&b, &bp, 8).unwrap().items
        );
    }

    #[test]
    fn insufficient_bank_fails() {
        let err = assemble_exam(&bank(9), &ExamBlueprint::default(), 1).unwrap_err();
        match err {
            ExamError::InsufficientBank(r) => assert_eq!(r.deficiencies.len(), 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn selection_within_category_reaches_every_question() {
        // 30 per category: over many seeds each question should get picked.
        let b = bank(30);
        let bp = ExamBlueprint::default();
        let mut hits: HashMap<QuestionId, u32> = HashMap::new();
        for seed in 0..300 {
            for q in assemble_exam(&b, &bp, seed).unwrap().items {
                *hits.entry(q.id).or_default() += 1;
            }
        }
        assert_eq!(hits.len(), b.len());
        // expected 100 each (300 seeds * 10/30); binomial sd ~8.2
        for (id, n) in hits {
            assert!((55..=145).contains(&n), "{id} picked {n} times");
        }
    }
}
