use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{Category, ScoreReport};

/// Strongest and weakest categories of one report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillProfile {
    pub best: Vec<Category>,
    pub poor: Vec<Category>,
    pub best_label: String,
    pub poor_label: String,
    pub uniform: bool,
}

/// How best/poor sets are rendered as display labels.
///
/// A set with fewer than `group_threshold` members is listed by name, joined
/// by `joiner`, in `precedence` order (categories missing from `precedence`
/// follow in report order). Larger sets collapse to `rest_label`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelStyle {
    pub precedence: Vec<Category>,
    pub joiner: String,
    pub group_threshold: usize,
    pub rest_label: String,
    pub uniform_label: String,
}

impl Default for LabelStyle {
    fn default() -> Self {
        // Listing order of the historical skills table: "Database and
        // Programming", "Programming and Networking", "Database and IT",
        // "Networking and Security".
        let precedence = [
            Category::DATABASE,
            Category::PROGRAMMING,
            Category::NETWORKING,
            Category::SECURITY,
            Category::IT,
        ]
        .into_iter()
        .map(Category::new)
        .collect();
        LabelStyle {
            precedence,
            joiner: " and ".into(),
            group_threshold: 3,
            rest_label: "The rest of subjects".into(),
            uniform_label: "balanced".into(),
        }
    }
}

impl LabelStyle {
    fn label(&self, set: &[Category]) -> String {
        if set.len() >= self.group_threshold {
            return self.rest_label.clone();
        }
        let mut ordered: Vec<&Category> = set.iter().collect();
        ordered.sort_by_key(|c| {
            self.precedence
                .iter()
                .position(|p| p == *c)
                .unwrap_or(self.precedence.len())
        });
        ordered
            .iter()
            .map(|c| c.as_str())
            .collect::<Vec<_>>()
            .join(&self.joiner)
    }
}

/// Derives best/poor categories from a report using the default labels.
pub fn skill_profile(report: &ScoreReport) -> SkillProfile {
    SkillProfile::from_scores(&report.per_category_score, &LabelStyle::default())
}

impl SkillProfile {
    /// `best` is every category at the maximum score and `poor` every one at
    /// the minimum, both in report order. When all scores tie there is no
    /// meaningful split and both labels read `uniform_label`.
    pub fn from_scores(scores: &IndexMap<Category, u32>, style: &LabelStyle) -> SkillProfile {
        let (Some(&max), Some(&min)) = (scores.values().max(), scores.values().min()) else {
            return SkillProfile {
                best: vec![],
                poor: vec![],
                best_label: style.uniform_label.clone(),
                poor_label: style.uniform_label.clone(),
                uniform: true,
            };
        };
        let at = |v: u32| -> Vec<Category> {
            scores
                .iter()
                .filter(|(_, &s)| s == v)
                .map(|(c, _)| c.clone())
                .collect()
        };
        let best = at(max);
        let poor = at(min);
        if max == min {
            return SkillProfile {
                best,
                poor,
                best_label: style.uniform_label.clone(),
                poor_label: style.uniform_label.clone(),
                uniform: true,
            };
        }
        SkillProfile {
            best_label: style.label(&best),
            poor_label: style.label(&poor),
            best,
            poor,
            uniform: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(v: [u32; 5]) -> IndexMap<Category, u32> {
        Category::canonical().into_iter().zip(v).collect()
    }

    fn profile(v: [u32; 5]) -> SkillProfile {
        SkillProfile::from_scores(&scores(v), &LabelStyle::default())
    }

    #[test]
    fn bilal() {
        let p = profile([14, 14, 18, 16, 20]);
        assert_eq!(p.best, vec![Category::new("IT")]);
        assert_eq!(
            p.poor,
            vec![Category::new("Programming"), Category::new("Networking")]
        );
        assert_eq!(p.best_label, "IT");
        assert_eq!(p.poor_label, "Programming and Networking");
        assert!(!p.uniform);
    }

    #[test]
    fn haidar_best_collapses() {
        let p = profile([16, 16, 14, 12, 16]);
        assert_eq!(p.best.len(), 3);
        assert_eq!(p.best_label, "The rest of subjects");
        assert_eq!(p.poor_label, "Security");
    }

    #[test]
    fn all_equal_is_balanced() {
        let p = profile([12; 5]);
        assert!(p.uniform);
        assert_eq!(p.best_label, "balanced");
        assert_eq!(p.poor_label, "balanced");
    }

    #[test]
    fn unknown_categories_follow_precedence_list() {
        let s: IndexMap<Category, u32> = [
            ("Zeta".into(), 1),
            ("Alpha".into(), 1),
            ("Database".into(), 1),
            ("IT".into(), 9),
        ]
        .into_iter()
        .collect();
        let style = LabelStyle {
            group_threshold: 4,
            ..LabelStyle::default()
        };
        let p = SkillProfile::from_scores(&s, &style);
        assert_eq!(p.poor_label, "Database and Zeta and Alpha");
    }

    #[test]
    fn empty_scores_are_uniform() {
        let p = SkillProfile::from_scores(&IndexMap::new(), &LabelStyle::default());
        assert!(p.uniform);
        assert!(p.best.is_empty());
    }
}
