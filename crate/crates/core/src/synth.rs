//! Fixed-seed synthetic raw datasets for benchmarks and oracle tests.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{encode_row, RAW_ARITY};
use crate::diff::ChangeType;

pub const DEFAULT_SEED: u64 = 0x5eed_d157;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub rows: usize,
    pub projects: usize,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(rows: usize, projects: usize) -> Self {
        SynthConfig {
            rows,
            projects: projects.max(1),
            seed: DEFAULT_SEED,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

const AUTHORS: [(&str, &str); 12] = [
    ("Ann Lee", "ann@example.org"),
    ("Bob Roy", "bob@example.org"),
    ("Cem Aydın", "cem@example.org"),
    ("Dana Fox", "dana@example.org"),
    ("Eli Moss", "eli@example.org"),
    ("Fay Wu", "fay@example.org"),
    ("Gus Hale", "gus@example.org"),
    ("Hana Ito", "hana@example.org"),
    ("Ivo Petrov", "ivo@example.org"),
    ("Jo Kim", "jo@example.org"),
    ("Kai Berg", "kai@example.org"),
    ("Lu Chen", "lu@example.org"),
];

const STATEMENTS: [&str; 6] = [
    "x = y + 1;",
    "log(\"50% done #\" + i);",
    "s = \"a\\nb\";",
    "return total;",
    "check(add(1, 2));",
    "multi(\n  line);",
];

fn entity_kind(t: ChangeType) -> &'static str {
    use ChangeType::*;
    match t {
        AdditionalClass | RemovedClass | ClassRenaming => "CLASS",
        AdditionalFunctionality | RemovedFunctionality | MethodRenaming | ReturnTypeChange => "METHOD",
        ParameterInsert | ParameterDelete | ParameterRenaming | ParameterTypeChange | ParameterOrderingChange => {
            "PARAMETER"
        }
        AdditionalObjectState | RemovedObjectState | AttributeTypeChange | AttributeRenaming => "FIELD",
        StatementInsert | StatementDelete | StatementUpdate | StatementOrderingChange | StatementParentChange => {
            "STATEMENT"
        }
        ConditionExpressionChange => "CONDITION",
        DocInsert | DocDelete | DocUpdate => "DOC_COMMENT",
        UnclassifiedChange => "METHOD",
    }
}

fn hex_id(rng: &mut ChaCha8Rng) -> String {
    (0..40)
        .map(|_| char::from_digit(rng.gen_range(0..16), 16).unwrap())
        .collect()
}

fn method_name(rng: &mut ChaCha8Rng, test: bool) -> String {
    let n = rng.gen_range(0..20);
    match (test, rng.gen_range(0..3)) {
        (true, 0) => format!("@Test checks{n}"),
        (true, 1) => format!("test{n}"),
        _ => format!("helper{n}"),
    }
}

/// Rows of one synthetic project, in shuffled order. Rows of a commit share
/// all commit metadata.
pub fn project_rows(project: &str, rows: usize, rng: &mut ChaCha8Rng) -> Vec<[String; RAW_ARITY]> {
    let mut out = Vec::with_capacity(rows);
    let mut parent = hex_id(rng);
    let mut timestamp: i64 = 1_500_000_000 + rng.gen_range(0..1_000_000);
    let prefix: String = project
        .to_uppercase()
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .collect();
    while out.len() < rows {
        let commit = hex_id(rng);
        let (name, email) = AUTHORS[rng.gen_range(0..AUTHORS.len())];
        timestamp += rng.gen_range(60..86_400);
        let ticket = match rng.gen_range(0..10) {
            0..=5 => format!("{prefix}-{}", rng.gen_range(1..500)),
            6 => format!("GH-{}", rng.gen_range(1..500)),
            _ => String::new(),
        };
        let files: Vec<(String, bool)> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let n = rng.gen_range(0..30);
                if rng.gen_bool(0.3) {
                    (format!("src/test/java/{project}/C{n}Test.java"), true)
                } else {
                    (format!("src/main/java/{project}/C{n}.java"), false)
                }
            })
            .collect();
        let count = rng.gen_range(1..=30).min(rows - out.len());
        for _ in 0..count {
            let (path, test) = &files[rng.gen_range(0..files.len())];
            let t = ChangeType::ALL[rng.gen_range(0..ChangeType::ALL.len())];
            let class = if *test {
                format!("C{}Test", rng.gen_range(0..5))
            } else {
                format!("C{}", rng.gen_range(0..5))
            };
            let method = format!("{}()", method_name(rng, *test));
            let kind = entity_kind(t);
            let (entity, parent_path) = match kind {
                "CLASS" if rng.gen_bool(0.2) => (format!("Inner{}", rng.gen_range(0..3)), class),
                "CLASS" => (class, String::new()),
                "METHOD" => (method_name(rng, *test), class),
                "FIELD" => (format!("f{}:int", rng.gen_range(0..9)), class),
                "PARAMETER" => (format!("p{}:String", rng.gen_range(0..9)), format!("{class}.{method}")),
                "DOC_COMMENT" if rng.gen_bool(0.3) => ("Docs 100%.".to_string(), class),
                "DOC_COMMENT" => ("Returns #1.".to_string(), format!("{class}.{method}")),
                _ => (
                    STATEMENTS[rng.gen_range(0..STATEMENTS.len())].to_string(),
                    format!("{class}.{method}"),
                ),
            };
            out.push([
                project.to_string(),
                commit.clone(),
                parent.clone(),
                name.to_string(),
                email.to_string(),
                timestamp.to_string(),
                path.clone(),
                test.to_string(),
                t.name().to_string(),
                kind.to_string(),
                entity,
                parent_path,
                ticket.clone(),
            ]);
        }
        parent = commit;
    }
    out.shuffle(rng);
    out
}

/// All rows of a synthetic dataset, grouped per project. Rows are spread as
/// evenly as possible over the projects.
pub fn generate(cfg: SynthConfig) -> Vec<(String, Vec<[String; RAW_ARITY]>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let projects = cfg.projects.max(1);
    (0..projects)
        .map(|p| {
            let name = format!("proj{p:03}");
            let n = cfg.rows / projects + usize::from(p < cfg.rows % projects);
            let rows = project_rows(&name, n, &mut rng);
            (name, rows)
        })
        .collect()
}

/// Writes one raw dataset file per project into `dir` and returns their
/// paths.
pub fn write_dataset(dir: &Path, cfg: SynthConfig) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (project, rows) in generate(cfg) {
        let path = dir.join(format!("{project}.csv"));
        let mut out = BufWriter::new(File::create(&path)?);
        for row in &rows {
            out.write_all(encode_row(row).expect("synthetic rows have the raw arity").as_bytes())?;
        }
        out.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
