use std::collections::BTreeSet;

use crate::ast::split_markers;
use crate::dataset::{ParsedLine, CHANGE_TYPE, ENTITY_KIND, ENTITY_NAME, IS_TEST_FILE, PARENT_ENTITY_PATH};
use crate::diff::ChangeType;

/// Test suite and test case counters of one commit, taken from rows of test
/// files only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TestStats {
    pub suites_added: u64,
    pub suites_removed: u64,
    /// Distinct classes with at least one change other than their own
    /// addition or removal.
    pub suites_modified: u64,
    pub cases_added: u64,
    pub cases_removed: u64,
    /// Distinct test methods with at least one change other than their own
    /// addition or removal.
    pub cases_modified: u64,
}

impl TestStats {
    pub fn suites_changed(&self) -> u64 {
        self.suites_added + self.suites_removed + self.suites_modified
    }

    pub fn cases_changed(&self) -> u64 {
        self.cases_added + self.cases_removed + self.cases_modified
    }
}

/// A method label names a test case when it carries an `@Test` marker or its
/// name starts with "test", ignoring case.
pub fn is_test_case_name(label: &str) -> bool {
    let (markers, bare) = split_markers(label);
    let bare = bare.strip_suffix("()").unwrap_or(bare);
    markers.contains(&"@Test") || bare.get(..4).is_some_and(|p| p.eq_ignore_ascii_case("test"))
}

/// Leading segments of an entity path that stop at the first method or
/// field segment.
fn scope_segments(path: &str) -> Vec<&str> {
    if path.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for seg in path.split('.') {
        if seg.contains(':') {
            break;
        }
        out.push(seg);
    }
    out
}

fn join_path(parent: &str, name: &str) -> String {
    if parent.is_empty() {
        name.to_string()
    } else {
        format!("{parent}.{name}")
    }
}

fn enclosing_class(path: &str) -> Option<String> {
    let segs: Vec<&str> = scope_segments(path)
        .into_iter()
        .take_while(|s| !s.ends_with("()"))
        .collect();
    (!segs.is_empty()).then(|| segs.join("."))
}

fn enclosing_method(path: &str) -> Option<(String, &str)> {
    let segs = scope_segments(path);
    let i = segs.iter().rposition(|s| s.ends_with("()"))?;
    Some((segs[..=i].join("."), segs[i]))
}

pub fn count_test_stats(rows: &[ParsedLine]) -> TestStats {
    let mut stats = TestStats::default();
    let mut suites = BTreeSet::new();
    let mut cases = BTreeSet::new();
    for r in rows.iter().filter(|r| &r[IS_TEST_FILE] == "true") {
        let parent = &r[PARENT_ENTITY_PATH];
        let name = &r[ENTITY_NAME];
        let ct = r[CHANGE_TYPE].parse::<ChangeType>().ok();
        match ct {
            Some(ChangeType::AdditionalClass) => stats.suites_added += 1,
            Some(ChangeType::RemovedClass) => stats.suites_removed += 1,
            Some(ChangeType::AdditionalFunctionality) if is_test_case_name(name) => stats.cases_added += 1,
            Some(ChangeType::RemovedFunctionality) if is_test_case_name(name) => stats.cases_removed += 1,
            _ => {}
        }
        let own_class = matches!(ct, Some(ChangeType::AdditionalClass | ChangeType::RemovedClass));
        let own_method = matches!(
            ct,
            Some(ChangeType::AdditionalFunctionality | ChangeType::RemovedFunctionality)
        );

        let class = match &r[ENTITY_KIND] {
            "CLASS" => enclosing_class(&join_path(parent, name)),
            _ => enclosing_class(parent),
        };
        if !own_class {
            suites.extend(class);
        }

        let method = match &r[ENTITY_KIND] {
            "METHOD" if !own_method => Some((join_path(parent, &format!("{name}()")), name)),
            "METHOD" | "CLASS" => None,
            _ => enclosing_method(parent),
        };
        if let Some((path, label)) = method {
            if is_test_case_name(label) {
                cases.insert(path);
            }
        }
    }
    stats.suites_modified = suites.len() as u64;
    stats.cases_modified = cases.len() as u64;
    stats
}
