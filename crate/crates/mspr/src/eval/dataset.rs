//! Dataset loading. Upstream distributions differ in shape, so every format
//! is adapted into one canonical example type.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

/// One question with its acceptable answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaExample {
    pub id: String,
    pub question: String,
    pub gold_answers: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// Line-delimited `{id, question, answers}` records.
    Canonical,
    /// A JSON array of `{_id, question, answer}` objects.
    Hotpotqa,
    /// Same array shape as hotpotqa.
    Twowiki,
    /// Line-delimited `{id, question, answer, answer_aliases}` records.
    Musique,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(DatasetFormat::Canonical),
            "hotpotqa" => Ok(DatasetFormat::Hotpotqa),
            "twowiki" | "2wikimultihopqa" | "2wiki" => Ok(DatasetFormat::Twowiki),
            "musique" => Ok(DatasetFormat::Musique),
            _ => Err(Error::Config(format!("unknown dataset format: {s:?}"))),
        }
    }
}

fn field_str(value: &Value, index: usize, field: &str) -> Result<String> {
    value
        .get(field)
        .and_then(Value::as_str)
        .map(str::to_string)
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| Error::Dataset(format!("example {index}: {field}")))
}

fn example_from_array_item(value: &Value, index: usize) -> Result<QaExample> {
    Ok(QaExample {
        id: field_str(value, index, "_id")?,
        question: field_str(value, index, "question")?,
        gold_answers: vec![field_str(value, index, "answer")?],
    })
}

fn example_from_musique(value: &Value, index: usize) -> Result<QaExample> {
    let mut answers = vec![field_str(value, index, "answer")?];
    if let Some(aliases) = value.get("answer_aliases").and_then(Value::as_array) {
        for alias in aliases {
            if let Some(s) = alias.as_str() {
                if !s.trim().is_empty() {
                    answers.push(s.to_string());
                }
            }
        }
    }
    Ok(QaExample {
        id: field_str(value, index, "id")?,
        question: field_str(value, index, "question")?,
        gold_answers: answers,
    })
}

fn example_from_canonical(value: &Value, index: usize) -> Result<QaExample> {
    let answers = value
        .get("answers")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Dataset(format!("example {index}: answers")))?
        .iter()
        .map(|a| {
            a.as_str()
                .map(str::to_string)
                .filter(|s| !s.trim().is_empty())
                .ok_or_else(|| Error::Dataset(format!("example {index}: answers")))
        })
        .collect::<Result<Vec<_>>>()?;
    if answers.is_empty() {
        return Err(Error::Dataset(format!("example {index}: answers")));
    }
    Ok(QaExample {
        id: field_str(value, index, "id")?,
        question: field_str(value, index, "question")?,
        gold_answers: answers,
    })
}

/// Load and adapt a dataset file, preserving its order. Duplicate ids are an
/// error naming the id.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<QaExample>> {
    let content = fs::read_to_string(path)?;
    let values: Vec<Value> = match format {
        DatasetFormat::Hotpotqa | DatasetFormat::Twowiki => serde_json::from_str(&content)
            .map_err(|e| Error::Dataset(format!("not a JSON array: {e}")))?,
        DatasetFormat::Canonical | DatasetFormat::Musique => {
            let mut values = Vec::new();
            for (i, line) in content.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                values.push(
                    serde_json::from_str(line)
                        .map_err(|e| Error::Dataset(format!("line {}: {e}", i + 1)))?,
                );
            }
            values
        }
    };

    let mut examples = Vec::with_capacity(values.len());
    for (i, value) in values.iter().enumerate() {
        let example = match format {
            DatasetFormat::Canonical => example_from_canonical(value, i + 1)?,
            DatasetFormat::Hotpotqa | DatasetFormat::Twowiki => {
                example_from_array_item(value, i + 1)?
            }
            DatasetFormat::Musique => example_from_musique(value, i + 1)?,
        };
        examples.push(example);
    }

    let mut seen: HashSet<&str> = HashSet::new();
    for example in &examples {
        if !seen.insert(&example.id) {
            return Err(Error::Dataset(format!(
                "duplicate example id: {}",
                example.id
            )));
        }
    }
    Ok(examples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data");
        fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn canonical_three_line_fixture_loads_in_order() {
        let (_dir, path) = write(
            r#"{"id":"a","question":"q one?","answers":["x"]}
{"id":"b","question":"q two?","answers":["y","z"]}
{"id":"c","question":"q three?","answers":["w"]}
"#,
        );
        let examples = load_dataset(&path, DatasetFormat::Canonical).unwrap();
        assert_eq!(examples.len(), 3);
        assert_eq!(examples[0].id, "a");
        assert_eq!(examples[1].gold_answers, vec!["y", "z"]);
        assert_eq!(examples[2].question, "q three?");
    }

    #[test]
    fn missing_question_is_named_with_its_index() {
        let (_dir, path) = write(
            r#"{"id":"a","question":"ok?","answers":["x"]}
{"id":"b","answers":["y"]}
"#,
        );
        let err = load_dataset(&path, DatasetFormat::Canonical).unwrap_err();
        assert_eq!(err.to_string(), "dataset error: example 2: question");
    }

    #[test]
    fn duplicate_ids_are_named() {
        let (_dir, path) = write(
            r#"{"id":"a","question":"one?","answers":["x"]}
{"id":"a","question":"two?","answers":["y"]}
"#,
        );
        let err = load_dataset(&path, DatasetFormat::Canonical).unwrap_err();
        assert!(err.to_string().contains("duplicate example id: a"));
    }

    #[test]
    fn hotpot_style_array_adapts() {
        let (_dir, path) = write(
            r#"[{"_id":"h1","question":"who?","answer":"Someone","type":"comparison"},
                {"_id":"h2","question":"what?","answer":"A thing"}]"#,
        );
        let examples = load_dataset(&path, DatasetFormat::Hotpotqa).unwrap();
        assert_eq!(examples.len(), 2);
        assert_eq!(examples[0].id, "h1");
        assert_eq!(examples[0].gold_answers, vec!["Someone"]);
    }

    #[test]
    fn musique_aliases_become_extra_golds() {
        let (_dir, path) = write(
            r#"{"id":"m1","question":"which river?","answer":"Nile","answer_aliases":["Nile River",""]}
"#,
        );
        let examples = load_dataset(&path, DatasetFormat::Musique).unwrap();
        assert_eq!(examples[0].gold_answers, vec!["Nile", "Nile River"]);
    }
}
