//! Verdict records for the structural conditions checked by the toolkit.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    H1,
    H2,
    H3Surrogate,
    M,
    MPlus,
    C,
    CPlus,
    P1,
    P2,
    Markov,
    FirstReturn,
    Kac,
    Roundtrip,
    Nice,
    NestedOrDisjoint,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::H1 => "H1",
            Condition::H2 => "H2",
            Condition::H3Surrogate => "H3-surrogate",
            Condition::M => "M",
            Condition::MPlus => "M+",
            Condition::C => "C",
            Condition::CPlus => "C+",
            Condition::P1 => "P1",
            Condition::P2 => "P2",
            Condition::Markov => "Markov",
            Condition::FirstReturn => "FirstReturn",
            Condition::Kac => "Kac",
            Condition::Roundtrip => "Roundtrip",
            Condition::Nice => "Nice",
            Condition::NestedOrDisjoint => "NestedOrDisjoint",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    PassAtDepth,
    Fail,
    Inconclusive,
    /// Computed in floating point; nothing is certified.
    InconclusiveNumeric,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::PassAtDepth => "pass-at-depth",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::InconclusiveNumeric => "inconclusive-numeric",
        }
    }

    /// CLI exit code: 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass | Verdict::PassAtDepth => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive | Verdict::InconclusiveNumeric => 2,
        }
    }

    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::PassAtDepth)
    }
}

/// Ordered key/value payload.
pub type Witness = Vec<(String, String)>;

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub condition: Condition,
    pub verdict: Verdict,
    pub depth: usize,
    pub witness: Option<Witness>,
    pub numeric_data: Vec<f64>,
    pub notes: Vec<(String, String)>,
}

impl ConditionReport {
    fn with_verdict(condition: Condition, verdict: Verdict, depth: usize) -> Self {
        Self {
            condition,
            verdict,
            depth,
            witness: None,
            numeric_data: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn pass(condition: Condition, depth: usize) -> Self {
        Self::with_verdict(condition, Verdict::Pass, depth)
    }

    pub fn pass_at_depth(condition: Condition, depth: usize) -> Self {
        Self::with_verdict(condition, Verdict::PassAtDepth, depth)
    }

    pub fn inconclusive(condition: Condition, depth: usize) -> Self {
        Self::with_verdict(condition, Verdict::Inconclusive, depth)
    }

    /// A failing report; the witness must be nonempty.
    pub fn fail(condition: Condition, depth: usize, witness: Witness) -> Self {
        assert!(!witness.is_empty(), "a failing report needs a witness");
        Self {
            witness: Some(witness),
            ..Self::with_verdict(condition, Verdict::Fail, depth)
        }
    }

    pub fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.push((key.to_string(), value.to_string()));
        self
    }

    pub fn data(mut self, data: Vec<f64>) -> Self {
        self.numeric_data = data;
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn witness_value(&self, key: &str) -> Option<&str> {
        self.witness
            .as_ref()?
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn note_value(&self, key: &str) -> Option<&str> {
        self.notes
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Floating-point runs certify nothing; keep the data, drop the claim.
    pub fn downgrade_numeric(mut self, tolerance: f64) -> Self {
        if self.verdict != Verdict::InconclusiveNumeric {
            let was = self.verdict.as_str();
            self.verdict = Verdict::InconclusiveNumeric;
            self.notes.push(("numeric_verdict".into(), was.into()));
            self.notes.push(("tol".into(), format!("{tolerance:e}")));
        }
        self
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.condition.name(), self.verdict.as_str())?;
        if self.verdict != Verdict::Fail {
            write!(f, " depth={}", self.depth)?;
        }
        if let Some(w) = &self.witness {
            write!(f, " witness")?;
            for (k, v) in w {
                write!(f, " {k}={v}")?;
            }
        }
        for (k, v) in &self.notes {
            write!(f, " {k}={v}")?;
        }
        if !self.numeric_data.is_empty() {
            let parts: Vec<String> = self.numeric_data.iter().map(|x| format!("{x}")).collect();
            write!(f, " data={}", parts.join(","))?;
        }
        Ok(())
    }
}

/// Builds a witness from string-convertible pairs.
pub fn witness<K: ToString, V: ToString>(pairs: impl IntoIterator<Item = (K, V)>) -> Witness {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
