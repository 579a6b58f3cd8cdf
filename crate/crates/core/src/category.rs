use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The seven topics source articles are manually sorted into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Arts,
    Geography,
    History,
    Religion,
    Sciences,
    SocietyMisc,
    Sport,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Arts,
        Category::Geography,
        Category::History,
        Category::Religion,
        Category::Sciences,
        Category::SocietyMisc,
        Category::Sport,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Arts => "Arts",
            Category::Geography => "Geography",
            Category::History => "History",
            Category::Religion => "Religion",
            Category::Sciences => "Sciences",
            Category::SocietyMisc => "SocietyMisc",
            Category::Sport => "Sport",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_lowercase();
        Ok(match key.as_str() {
            "arts" => Category::Arts,
            "geography" => Category::Geography,
            "history" => Category::History,
            "religion" => Category::Religion,
            "sciences" => Category::Sciences,
            "societymisc" | "society" => Category::SocietyMisc,
            "sport" => Category::Sport,
            _ => return Err(UnknownCategory(s.to_string())),
        })
    }
}
