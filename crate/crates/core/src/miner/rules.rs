use std::sync::OnceLock;

use regex::Regex;

/// Issue-tracker key such as `HADOOP-1234`, else a `#42` reference as
/// `GH-42`, else the empty string.
pub fn extract_ticket_id(message: &str) -> String {
    static TRACKER: OnceLock<Regex> = OnceLock::new();
    static HASH: OnceLock<Regex> = OnceLock::new();
    let tracker = TRACKER.get_or_init(|| Regex::new(r"[A-Z][A-Z0-9]{1,9}-[0-9]+").unwrap());
    if let Some(m) = tracker.find(message) {
        return m.as_str().to_string();
    }
    let hash = HASH.get_or_init(|| Regex::new(r"(?:^|[^\w&])#([0-9]+)\b").unwrap());
    hash.captures(message)
        .map(|c| format!("GH-{}", &c[1]))
        .unwrap_or_default()
}

/// Path heuristic: a `test` or `tests` directory, or a file stem of the form
/// `Test*`, `*Test` or `*Tests`.
pub fn is_test_file(path: &str) -> bool {
    let mut segments: Vec<&str> = path.split('/').collect();
    let file = segments.pop().unwrap_or_default();
    if segments.iter().any(|s| *s == "test" || *s == "tests") {
        return true;
    }
    let stem = file.rsplit_once('.').map_or(file, |(stem, _)| stem);
    stem.starts_with("Test") || stem.ends_with("Test") || stem.ends_with("Tests")
}
