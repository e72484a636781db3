use std::fs;
use std::io::Write;
use std::path::Path;

use clifftest::commutant::{
    enumerate_sd, partial_transpose_dense, r_operator, sd_count, unitary_partial_transpose, MAX_SD_T,
};
use clifftest::densesim::{
    char_dist_state, char_dist_unitary, char_dist_unitary_large, choi_state, f_cliff, f_stab, unitarity_residual,
    CharDist, DenseUnitary, StateVector, TOL,
};
use clifftest::norms::{gowers_uk, qk_norm};
use clifftest::testers::{
    leaf_distribution, pacc_exact, pacc_gnw_choi, pacc_pi4, run_4query, run_4query_repeated,
    run_aux_free_single_copy, tv_distance, Ensemble, OracleStabTester, Strategy, TesterConfig,
};
use clifftest::verify::{run_suite, VerifyOptions};
use clifftest::Error;
use nalgebra::DVector;
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::manifest::{input_hash, now_ms, RunManifest};
use crate::{ChardistArgs, Command, CommutantCommand, Format};

/// Gap allowed between the exact and Weingarten leaf distributions.
const LEAF_AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget { .. } => 3,
            Error::Internal(_) => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// What a command produced: the text to emit and whether its checks held.
pub struct Outcome {
    pub body: String,
    pub passed: bool,
    pub failure: Option<String>,
}

impl Outcome {
    fn from_manifest(m: &RunManifest, failure: Option<String>) -> Result<Self, Failure> {
        let body = serde_json::to_string_pretty(m).map_err(|e| Failure::usage(e.to_string()))? + "\n";
        Ok(Self {
            body,
            passed: m.passed,
            failure,
        })
    }
}

pub fn emit(out: &Outcome, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, &out.body).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(out.body.as_bytes())
            .map_err(|e| Failure::usage(e.to_string())),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, bytes: &[u8]) -> Result<T, Failure> {
    serde_json::from_slice(bytes).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

struct Run {
    command: &'static str,
    config: Value,
    inputs: Vec<(String, Vec<u8>)>,
    seed: Option<u64>,
    started: u64,
}

impl Run {
    fn start(command: &'static str, config: Value, seed: Option<u64>) -> Self {
        Self {
            command,
            config,
            inputs: Vec::new(),
            seed,
            started: now_ms(),
        }
    }

    fn input(&mut self, path: &Path) -> Result<Vec<u8>, Failure> {
        let bytes = read(path)?;
        self.inputs.push((path.display().to_string(), bytes.clone()));
        Ok(bytes)
    }

    fn finish(self, passed: bool, results: Value, failure: Option<String>) -> Result<Outcome, Failure> {
        let m = RunManifest {
            command: self.command.to_string(),
            input_hash: input_hash(self.command, &self.config, self.seed, &self.inputs),
            config: self.config,
            seed: self.seed,
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
            passed,
            results,
        };
        Outcome::from_manifest(&m, failure)
    }
}

// Optional quantities that only exist below a size guard.
fn optional(r: clifftest::Result<f64>) -> Result<Option<f64>, Failure> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Budget { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn run(cmd: Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::Verify(a) => {
            let opts = VerifyOptions {
                n: a.n,
                seeds: a.seeds,
                seed: a.seed.unwrap_or(VerifyOptions::default().seed),
            };
            let run = Run::start("verify", json!({"suite": a.suite, "options": opts}), Some(opts.seed));
            let report = run_suite(a.suite, &opts)?;
            let failure = report.first_failure().map(|c| format!("{}/{}: {}", c.suite, c.name, c.detail));
            run.finish(report.passed, to_value(&report), failure)
        }
        Command::Report(a) => report(&a.input, a.format),
        Command::Test4(a) => {
            let mut run = Run::start(
                "test4",
                json!({"shots": a.shots, "epsilon": a.epsilon, "repeated": a.repeated, "no_log": a.no_log}),
                Some(a.seed),
            );
            let bytes = run.input(&a.input)?;
            let u: DenseUnitary = parse(&a.input, &bytes)?;
            let mut report = if a.repeated {
                let cfg = TesterConfig::new(a.epsilon, 1, a.seed)?;
                run_4query_repeated(&u, a.epsilon, &cfg)?
            } else {
                let shots = a.shots.ok_or_else(|| Failure::usage("--shots is required unless --repeated is given"))?;
                run_4query(&u, &TesterConfig::new(a.epsilon, shots, a.seed)?)?
            };
            if a.no_log {
                report.log.clear();
            }
            run.finish(true, to_value(&report), None)
        }
        Command::Sctest(a) => {
            if !(0.0..=1.0).contains(&a.failure_prob) {
                return Err(Failure::usage("--failure-prob must lie in [0,1]"));
            }
            let cfg = TesterConfig {
                epsilon: a.epsilon,
                shots: 1,
                delta: a.delta,
                seed: a.seed,
                p_floor: a.p_floor,
            };
            cfg.validate()?;
            let mut run = Run::start(
                "sctest",
                json!({"epsilon": a.epsilon, "delta": a.delta, "p_floor": a.p_floor, "failure_prob": a.failure_prob}),
                Some(a.seed),
            );
            let bytes = run.input(&a.input)?;
            let u: DenseUnitary = parse(&a.input, &bytes)?;
            let tester = OracleStabTester {
                failure_prob: a.failure_prob,
            };
            let report = run_aux_free_single_copy(&u, &cfg, &tester)?;
            run.finish(true, to_value(&report), None)
        }
        Command::Pacc(a) => {
            let mut run = Run::start("pacc", json!({"exact": a.exact}), None);
            let bytes = run.input(&a.input)?;
            let u: DenseUnitary = parse(&a.input, &bytes)?;
            let exact = pacc_exact(&u)?;
            let pi4 = optional(pacc_pi4(&u))?;
            let gnw = pacc_gnw_choi(&u)?;
            let fs = optional(choi_state(&u).and_then(|c| f_stab(&c)))?;
            let fc = optional(f_cliff(&u))?;
            let mut failures = Vec::new();
            if let Some(p) = pi4 {
                if (p - exact).abs() > 1e-9 {
                    failures.push(format!("pi4 formula {p} differs from {exact}"));
                }
            }
            if let Some(fs) = fs {
                if exact > (1.0 + fs) / 2.0 + 1e-9 {
                    failures.push(format!("p_acc {exact} exceeds (1+F_stab)/2"));
                }
            }
            if let Some(fc) = fc {
                if exact < fc.powi(4) - 1e-9 {
                    failures.push(format!("p_acc {exact} is below F_cliff^4"));
                }
            }
            let results = json!({
                "n": u.n(),
                "pacc": exact,
                "pacc_pi4": pi4,
                "pacc_gnw_choi": gnw,
                "f_stab_choi": fs,
                "f_cliff": fc,
            });
            let failure = failures.first().cloned();
            run.finish(failures.is_empty(), results, failure)
        }
        Command::Discriminate(a) => {
            let mut run = Run::start("discriminate", json!({"t": a.t}), None);
            let bytes = run.input(&a.strategy)?;
            let strategy: Strategy = parse(&a.strategy, &bytes)?;
            let clifford = leaf_distribution(&strategy, Ensemble::Clifford, a.t)?;
            let weingarten = leaf_distribution(&strategy, Ensemble::CliffordWeingarten, a.t)?;
            let depol = leaf_distribution(&strategy, Ensemble::Depolarizing, a.t)?;
            let tv = tv_distance(&clifford.probs, &depol.probs)?;
            let gap = tv_distance(&clifford.probs, &weingarten.probs)?;
            let rows: Vec<Value> = clifford
                .leaves
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    json!({
                        "leaf": l.iter().map(usize::to_string).collect::<Vec<_>>().join(""),
                        "clifford": clifford.probs[i],
                        "clifford_weingarten": weingarten.probs[i],
                        "depolarizing": depol.probs[i],
                    })
                })
                .collect();
            let passed = gap <= LEAF_AGREEMENT_TOL;
            let failure = (!passed).then(|| format!("Weingarten leaves differ from the exact average by {gap:e}"));
            run.finish(passed, json!({"tv_distance": tv, "agreement_gap": gap, "rows": rows}), failure)
        }
        Command::Norms(a) => {
            let mut run = Run::start("norms", json!({"k": a.k}), None);
            let bytes = run.input(&a.input)?;
            let u: DenseUnitary = parse(&a.input, &bytes)?;
            let q = qk_norm(&u, a.k)?;
            let g = gowers_uk(&choi_state(&u)?, a.k)?;
            run.finish(true, json!({"n": u.n(), "qk": q, "choi_uk": g}), None)
        }
        Command::Chardist(a) => chardist(a),
        Command::Commutant {
            command: CommutantCommand::Enum { t, check_all },
        } => commutant_enum(t, check_all),
    }
}

// A state is `{"n", "re": [..], "im": [..]}` with flat amplitude arrays.
#[derive(Deserialize)]
struct StateJson {
    n: usize,
    re: Vec<f64>,
    #[serde(default)]
    im: Vec<f64>,
}

fn parse_state(path: &Path, v: Value) -> Result<StateVector, Failure> {
    let s: StateJson = serde_json::from_value(v).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    if s.n > clifftest::densesim::MAX_STATE_QUBITS {
        return Err(Failure::usage(format!("state on {} qubits is too large", s.n)));
    }
    if !s.im.is_empty() && s.im.len() != s.re.len() {
        return Err(Failure::usage("re and im have different lengths"));
    }
    let amps = DVector::from_fn(s.re.len(), |i, _| Complex64::new(s.re[i], s.im.get(i).copied().unwrap_or(0.0)));
    Ok(StateVector::new(s.n, amps)?)
}

fn chardist(a: ChardistArgs) -> Result<Outcome, Failure> {
    let mut run = Run::start("chardist", json!({}), None);
    let bytes = run.input(&a.input)?;
    let v: Value = parse(&a.input, &bytes)?;
    let is_unitary = v.get("re").and_then(|r| r.get(0)).is_some_and(Value::is_array);
    let dist: CharDist = if is_unitary {
        let u: DenseUnitary =
            serde_json::from_value(v).map_err(|e| Failure::usage(format!("{}: {e}", a.input.display())))?;
        match char_dist_unitary(&u) {
            Err(Error::Budget { .. }) => char_dist_unitary_large(&u)?,
            other => other?,
        }
    } else {
        char_dist_state(&parse_state(&a.input, v)?)?
    };
    let check = dist.check_invariants();
    let rows: Vec<Value> = dist
        .table
        .iter()
        .enumerate()
        .map(|(i, p)| json!({"label": dist.label_string(i), "probability": p}))
        .collect();
    let failure = check.as_ref().err().map(ToString::to_string);
    run.finish(
        check.is_ok(),
        json!({"n": dist.n, "kind": dist.kind, "l2_squared": dist.l2_squared(), "rows": rows}),
        failure,
    )
}

fn commutant_enum(t: usize, check_all: bool) -> Result<Outcome, Failure> {
    let run = Run::start("commutant enum", json!({"t": t, "check_all": check_all}), None);
    if t == 0 {
        return Err(Failure::usage("t must be positive"));
    }
    let codes = enumerate_sd(t)?;
    let mut per_code = Vec::with_capacity(codes.len());
    let mut failures = Vec::new();
    for code in &codes {
        let label = code.generator().to_row_strings().join(",");
        match unitary_partial_transpose(code) {
            Ok(ut) => {
                if check_all {
                    let dense = partial_transpose_dense(&r_operator(code), &ut.subset, 1, t)?;
                    let res = unitarity_residual(&dense);
                    if res > TOL {
                        failures.push(format!("{label}: r(D) transposed on {:?} has residual {res:e}", ut.subset));
                    }
                }
                per_code.push(json!({"code": label, "S": ut.subset, "O": ut.orthogonal}));
            }
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    let expected = sd_count(t);
    if codes.len() as u64 != expected {
        failures.push(format!("found {} codes, expected {expected}", codes.len()));
    }
    let results = json!({
        "t": t,
        "max_t": MAX_SD_T,
        "count": codes.len(),
        "invariants_passed": failures.is_empty(),
        "failures": failures,
        "per_code": per_code,
    });
    let failure = failures.first().cloned();
    run.finish(failures.is_empty(), results, failure)
}

// The first array of objects in `results`, under the usual keys first.
fn table(results: &Value) -> Option<&Vec<Value>> {
    let is_table = |v: &Value| v.as_array().is_some_and(|a| a.first().is_some_and(Value::is_object));
    let obj = results.as_object()?;
    ["rows", "checks", "per_code", "log"]
        .iter()
        .filter_map(|k| obj.get(*k))
        .chain(obj.values())
        .find(|v| is_table(v))
        .and_then(Value::as_array)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn to_csv(results: &Value) -> Result<String, Failure> {
    let csv_err = |e: csv::Error| Failure::usage(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    match table(results) {
        Some(rows) => {
            let header: Vec<String> = rows[0].as_object().expect("table rows are objects").keys().cloned().collect();
            w.write_record(&header).map_err(csv_err)?;
            for r in rows {
                w.write_record(header.iter().map(|k| r.get(k).map(cell).unwrap_or_default()))
                    .map_err(csv_err)?;
            }
        }
        None => {
            let obj = results
                .as_object()
                .ok_or_else(|| Failure::usage("manifest results are not an object"))?;
            w.write_record(obj.keys()).map_err(csv_err)?;
            w.write_record(obj.values().map(cell)).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn report(input: &Path, format: Format) -> Result<Outcome, Failure> {
    let bytes = read(input)?;
    let m: RunManifest = parse(input, &bytes)?;
    let failure = (!m.passed).then(|| format!("{} run recorded a failure", m.command));
    match format {
        Format::Json => Outcome::from_manifest(&m, failure),
        Format::Csv => Ok(Outcome {
            body: to_csv(&m.results)?,
            passed: m.passed,
            failure,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_prefers_row_tables() {
        let r = json!({"n": 1, "rows": [{"label": "0|0", "probability": 0.5}, {"label": "1|1", "probability": 0.5}]});
        let s = to_csv(&r).unwrap();
        assert_eq!(s.lines().count(), 3);
        assert!(s.starts_with("label,probability\n"));
    }

    #[test]
    fn csv_falls_back_to_scalars() {
        let s = to_csv(&json!({"pacc": 1.0, "f_cliff": null})).unwrap();
        assert_eq!(s.lines().count(), 2);
    }

    #[test]
    fn budget_errors_map_to_three() {
        let f: Failure = Error::Budget {
            guard: "x",
            requested: 2,
            limit: 1,
        }
        .into();
        assert_eq!(f.code, 3);
        assert_eq!(Failure::from(Error::Internal("x".into())).code, 1);
        assert_eq!(Failure::from(Error::Parse("x".into())).code, 2);
    }
}
