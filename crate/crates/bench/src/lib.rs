//! Fixtures shared by the benchmarks.

use examd_core::store::Record;
use examd_core::{AnswerSheet, Category, ExamForm, Question, StoredResult, Timestamp};

/// `per_category` questions in each canonical category.
pub fn bank(per_category: usize) -> Vec<Question> {
    Category::canonical()
        .into_iter()
        .flat_map(|c| {
            (0..per_category).map(move |i| {
                Question::new(
                    format!("{c}-{i}"),
                    c.as_str(),
                    format!("{c} question {i}"),
                    ["a", "b", "c", "d"],
                    (i % 4) as u32,
                )
            })
        })
        .collect()
}

/// Answers every item, getting every other one right.
pub fn half_right(form: &ExamForm) -> AnswerSheet {
    form.items
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let choice = if i % 2 == 0 {
                q.correct_index
            } else {
                (q.correct_index + 1) % 4
            };
            (q.id.clone(), choice)
        })
        .collect()
}

/// An encoded store holding `n` results.
pub fn store_bytes(n: usize) -> Vec<u8> {
    (0..n)
        .flat_map(|i| {
            Record::Result(StoredResult {
                username: format!("user{i}"),
                first_name: format!("First{i}"),
                last_name: format!("Last{i}"),
                per_category_score: Category::canonical()
                    .into_iter()
                    .map(|c| (c, (i % 11) as u32 * 2))
                    .collect(),
                final_score: (i % 11) as u32 * 10,
                elapsed_secs: (i % 3600) as u64,
                submitted_at: Timestamp(1_500_000_000 + i as i64),
                outcome: None,
            })
            .encode()
        })
        .collect()
}
