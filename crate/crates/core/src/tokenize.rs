//! Shared tokenizer: lowercase, split on non-alphanumeric runs.
//!
//! No stemming, no stopword removal. Used by the BM25 index and by
//! unigram-overlap scoring so both see identical token streams.

pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_punctuation_and_lowercases() {
        assert_eq!(tokenize("The Cat, sat!"), vec!["the", "cat", "sat"]);
    }

    #[test]
    fn keeps_digits() {
        assert_eq!(tokenize("room 101"), vec!["room", "101"]);
    }

    #[test]
    fn empty_input_yields_no_tokens() {
        assert!(tokenize("  ...  ").is_empty());
        assert!(tokenize("").is_empty());
    }
}
