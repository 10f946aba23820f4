use std::path::{Path, PathBuf};
use std::process::Command;

/// A repository driven through the `git` executable with fixed identities
/// and dates, so that commit ids are reproducible.
pub struct FixtureRepo {
    pub dir: PathBuf,
    clock: i64,
}

impl FixtureRepo {
    pub fn init(dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).expect("create fixture dir");
        let repo = FixtureRepo {
            dir,
            clock: 1_600_000_000,
        };
        repo.git(&["init", "-q", "-b", "main"]);
        repo
    }

    pub fn git(&self, args: &[&str]) -> String {
        let out = Command::new("git")
            .arg("-C")
            .arg(&self.dir)
            .args([
                "-c",
                "commit.gpgsign=false",
                "-c",
                "user.name=Fixture",
                "-c",
                "user.email=fixture@example.org",
            ])
            .args(args)
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .env("GIT_CONFIG_GLOBAL", "/dev/null")
            .env("GIT_COMMITTER_NAME", "Fixture")
            .env("GIT_COMMITTER_EMAIL", "fixture@example.org")
            .env("GIT_COMMITTER_DATE", format!("@{} +0000", self.clock))
            .env("GIT_AUTHOR_DATE", format!("@{} +0000", self.clock))
            .output()
            .expect("run git");
        assert!(
            out.status.success(),
            "git {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8_lossy(&out.stdout).trim().to_string()
    }

    pub fn write(&self, path: &str, content: impl AsRef<[u8]>) {
        let full = self.dir.join(path);
        if let Some(parent) = full.parent() {
            std::fs::create_dir_all(parent).expect("create parent dir");
        }
        std::fs::write(full, content).expect("write fixture file");
    }

    pub fn remove(&self, path: &str) {
        self.git(&["rm", "-q", path]);
    }

    /// Commits everything in the work tree one minute after the previous
    /// commit and returns the new commit id.
    pub fn commit(&mut self, message: &str, author: (&str, &str)) -> String {
        self.clock += 60;
        self.git(&["add", "-A"]);
        let date = format!("@{} +0000", self.clock);
        let who = format!("{} <{}>", author.0, author.1);
        self.git(&[
            "commit",
            "-q",
            "--allow-empty",
            "-m",
            message,
            "--author",
            &who,
            "--date",
            &date,
        ]);
        self.head()
    }

    pub fn head(&self) -> String {
        self.git(&["rev-parse", "HEAD"])
    }

    /// Non-fast-forward merge of `branch` into the current branch.
    pub fn merge(&mut self, branch: &str, message: &str) -> String {
        self.clock += 60;
        self.git(&["merge", "-q", "--no-ff", "-m", message, branch]);
        self.head()
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }
}

pub const ANN: (&str, &str) = ("Ann Lee", "ann@example.org");
pub const BOB: (&str, &str) = ("Bob Roy", "bob@example.org");

/// Commit ids of [`evolution_fixture`], in first-parent order.
pub struct EvolutionIds {
    pub baseline: String,
    pub add_class: String,
    pub add_method: String,
    pub parameters: String,
    pub rename: String,
    pub test_case: String,
    pub side: String,
    pub merge: String,
}

/// A small project history on top of a baseline commit:
///
/// 1. adds class `Util`
/// 2. adds method `Calc.sub`
/// 3. adds a parameter to each of `add`, `neg` and `sub` and deletes the doc
///    comment of `sub`
/// 4. renames `neg` to `negate`
/// 5. edits a statement of the test case `CalcTest.testAdd`
/// 6. merges a side branch that added field `Util.level`
pub fn evolution_fixture(dir: &Path) -> EvolutionIds {
    let mut repo = FixtureRepo::init(dir);
    let calc = "src/main/java/Calc.java";
    let test = "src/test/java/CalcTest.java";

    repo.write("README.md", "calc\n");
    repo.write(
        calc,
        "class Calc {\n    int add(int a) {\n        return a;\n    }\n\n    int neg(int a) {\n        return -a;\n    }\n}\n",
    );
    repo.write(
        test,
        "class CalcTest {\n    @Test\n    void testAdd() {\n        check(add(1, 2));\n    }\n}\n",
    );
    let baseline = repo.commit("initial import", ANN);

    repo.write(
        "src/main/java/Util.java",
        "class Util {\n    void log(String m) {\n        print(m);\n    }\n}\n",
    );
    let add_class = repo.commit("CALC-1: add Util helper", ANN);

    repo.write(
        calc,
        "class Calc {\n    int add(int a) {\n        return a;\n    }\n\n    int neg(int a) {\n        return -a;\n    }\n\n    /** Subtracts. */\n    int sub(int a) {\n        return a;\n    }\n}\n",
    );
    repo.write("README.md", "calc\n\nnow with sub\n");
    let add_method = repo.commit("CALC-2 add subtraction", BOB);

    repo.write(
        calc,
        "class Calc {\n    int add(int a, int b) {\n        return a;\n    }\n\n    int neg(int a, int s) {\n        return -a;\n    }\n\n    int sub(int a, int b) {\n        return a;\n    }\n}\n",
    );
    let parameters = repo.commit("widen signatures", BOB);

    repo.write(
        calc,
        "class Calc {\n    int add(int a, int b) {\n        return a;\n    }\n\n    int negate(int a, int s) {\n        return -a;\n    }\n\n    int sub(int a, int b) {\n        return a;\n    }\n}\n",
    );
    let rename = repo.commit("rename neg, refs #42", ANN);

    repo.write(
        test,
        "class CalcTest {\n    @Test\n    void testAdd() {\n        check(add(2, 2));\n    }\n}\n",
    );
    let test_case = repo.commit("CALC-3 fix test input", ANN);

    repo.git(&["checkout", "-q", "-b", "side", "HEAD"]);
    repo.write(
        "src/main/java/Util.java",
        "class Util {\n    int level;\n\n    void log(String m) {\n        print(m);\n    }\n}\n",
    );
    let side = repo.commit("CALC-4 add log level", BOB);
    repo.git(&["checkout", "-q", "main"]);
    let merge = repo.merge("side", "Merge branch 'side'");

    EvolutionIds {
        baseline,
        add_class,
        add_method,
        parameters,
        rename,
        test_case,
        side,
        merge,
    }
}
