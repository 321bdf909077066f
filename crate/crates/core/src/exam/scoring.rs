use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{AnswerSheet, Category, ExamBlueprint, ExamError, ExamForm};

/// Graded outcome of one attempt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub per_category_correct: IndexMap<Category, u32>,
    pub per_category_score: IndexMap<Category, u32>,
    pub final_score: u32,
    pub elapsed_secs: u64,
}

impl ScoreReport {
    pub fn total_correct(&self) -> u32 {
        self.per_category_correct.values().sum()
    }
}

/// Grades `sheet` against `form`. A question counts as correct when the
/// chosen index equals its key; unanswered questions earn nothing and cost
/// nothing. Each category's score is its correct count times the blueprint
/// weight and the final score is their sum.
pub fn score(
    form: &ExamForm,
    sheet: &AnswerSheet,
    bp: &ExamBlueprint,
    elapsed_secs: u64,
) -> Result<ScoreReport, ExamError> {
    if let Some((id, _)) = sheet.iter().find(|(id, _)| !form.contains(id)) {
        return Err(ExamError::NotInForm(id.clone()));
    }

    let mut correct: IndexMap<Category, u32> = bp.categories().map(|c| (c.clone(), 0)).collect();
    for q in &form.items {
        let hit = sheet.get(&q.id) == Some(q.correct_index);
        *correct.entry(q.category.clone()).or_default() += u32::from(hit);
    }

    let weight = bp.weight();
    let per_category_score: IndexMap<Category, u32> = correct
        .iter()
        .map(|(c, n)| (c.clone(), n * weight))
        .collect();
    let final_score = per_category_score.values().sum();

    Ok(ScoreReport {
        per_category_correct: correct,
        per_category_score,
        final_score,
        elapsed_secs,
    })
}
