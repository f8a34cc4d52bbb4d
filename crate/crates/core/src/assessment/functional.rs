use minilang::{check_inputs, execute, Inputs, Program, Termination};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::config::FunctionalTest;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub name: String,
    pub inputs: Inputs,
    pub expected_output: String,
    pub actual_output: String,
    /// None when the inputs did not fit `main`'s parameters.
    pub termination: Option<Termination>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalResult {
    pub tests: Vec<TestOutcome>,
    pub pass_fraction: Ratio<i64>,
}

impl FunctionalResult {
    pub fn passed(&self) -> usize {
        self.tests.iter().filter(|t| t.passed).count()
    }
}

/// Runs every test; a test passes when the run ends normally and its
/// printed lines, joined with newlines, equal the expected text.
pub fn run_functional_tests(program: &Program, tests: &[FunctionalTest], budget: u64) -> FunctionalResult {
    let outcomes: Vec<TestOutcome> = tests
        .iter()
        .map(|t| {
            let (actual, termination) = match check_inputs(program, &t.inputs) {
                Ok(()) => {
                    let trace = execute(program, &t.inputs, budget);
                    (trace.output_text(), Some(trace.termination))
                }
                Err(_) => (String::new(), None),
            };
            TestOutcome {
                name: t.name.clone(),
                inputs: t.inputs.clone(),
                expected_output: t.expected_output.clone(),
                passed: termination == Some(Termination::Normal) && actual == t.expected_output,
                actual_output: actual,
                termination,
            }
        })
        .collect();
    let passed = outcomes.iter().filter(|t| t.passed).count() as i64;
    let total = (outcomes.len() as i64).max(1);
    FunctionalResult { tests: outcomes, pass_fraction: Ratio::new(passed, total) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use minilang::{parse, Value};

    const P1: &str =
        "int main(int n){ int s = 0; for (int i = 0; i < n; i = i + 1) { s = s + i; } print(s); return 0; }";
    const P2: &str = "int main(){ int i = 0; while (i < 5) { print(i); } return 0; }";

    fn test(n: i64, expected: &str) -> FunctionalTest {
        FunctionalTest {
            name: format!("n={n}"),
            inputs: Inputs::from([("n".to_owned(), Value::Int(n))]),
            expected_output: expected.into(),
        }
    }

    /// Sum of 0..n by the closed form, independent of the interpreter.
    fn triangular(n: i64) -> i64 {
        if n <= 0 {
            0
        } else {
            n * (n - 1) / 2
        }
    }

    #[test]
    fn sum_loop_passes() {
        let r = run_functional_tests(&parse(P1).unwrap(), &[test(3, "3")], 10_000);
        assert_eq!(r.pass_fraction, Ratio::from_integer(1));
    }

    #[test]
    fn corrected_second_test() {
        assert_eq!(triangular(4), 6);
        let p = parse(P1).unwrap();
        let r = run_functional_tests(&p, &[test(3, "3"), test(4, "7")], 10_000);
        assert_eq!(r.pass_fraction, Ratio::new(1, 2));
        assert_eq!(r.tests[1].actual_output, "6");
        let r = run_functional_tests(&p, &[test(3, "3"), test(4, &triangular(4).to_string())], 10_000);
        assert_eq!(r.pass_fraction, Ratio::from_integer(1));
    }

    #[test]
    fn nonterminating_program_fails() {
        let r = run_functional_tests(
            &parse(P2).unwrap(),
            &[FunctionalTest { name: "any".into(), inputs: Inputs::new(), expected_output: "0".into() }],
            10_000,
        );
        assert_eq!(r.passed(), 0);
        assert_eq!(r.tests[0].termination, Some(Termination::StepBudgetExceeded));
    }

    #[test]
    fn bad_inputs_fail() {
        let r = run_functional_tests(
            &parse(P1).unwrap(),
            &[FunctionalTest { name: "x".into(), inputs: Inputs::new(), expected_output: "0".into() }],
            100,
        );
        assert_eq!(r.tests[0].termination, None);
        assert!(!r.tests[0].passed);
    }
}
