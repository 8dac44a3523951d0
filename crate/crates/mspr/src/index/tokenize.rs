//! Analyzer shared by indexing and querying: lowercase, split on any run of
//! non-alphanumeric characters. No stemming, no stopwords.

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(|s| s.to_lowercase())
        .collect()
}
