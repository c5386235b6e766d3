//! Command-line front end: JSON scene files in, reports out.
//!
//! Complex scalars are `[re, im]` pairs and matrices are row-major nested
//! arrays. Every check runs in isolation and records a verdict of `pass`,
//! `fail`, `vacuous` or `error`; a failing check is data, not a process error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::OperatorAlgebra;
use crate::duality::{
    check_haag_duality, check_local_tomography, check_uhlmann_pair, ensure_commuting, max_overlap,
    verify_theorem_equivalence, Verdict, Witness, INTERTWINER_TOL,
};
use crate::error::{Error, Result};
use crate::numerics::{identity, kron, CMatrix, CVector, Tolerances, C64};
use crate::states::{fidelity, purify, DensityMatrix, VectorState};
use crate::toric::{self, Lattice, Sector};

pub type Complex = [f64; 2];
pub type MatrixRows = Vec<Vec<Complex>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub hilbert_dim: usize,
    #[serde(default)]
    pub algebras: BTreeMap<String, AlgebraSpec>,
    #[serde(default)]
    pub states: BTreeMap<String, Vec<Complex>>,
    #[serde(default)]
    pub densities: BTreeMap<String, MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

/// The algebra generated by the listed matrices and their adjoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub generators: Vec<MatrixRows>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
}

impl SceneFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            load_error(origin, &path, &e.into_inner().to_string())
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Load {
            path: origin.clone(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &origin)
    }

    /// Serialization with sorted keys; loading it back gives the same scene.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("scene fields are plain data");
        serde_json::to_string_pretty(&value).expect("values serialize")
    }
}

fn load_error(origin: &str, field: &str, message: &str) -> Error {
    Error::Load {
        path: origin.to_string(),
        message: if field.is_empty() || field == "." {
            message.to_string()
        } else {
            format!("at {field}: {message}")
        },
    }
}

/// A scene with its matrices converted and validated.
#[derive(Clone, Debug)]
pub struct Scene {
    pub hilbert_dim: usize,
    pub generators: BTreeMap<String, Vec<CMatrix>>,
    pub states: BTreeMap<String, VectorState>,
    pub densities: BTreeMap<String, CMatrix>,
}

impl Scene {
    /// Checks shapes and state normalization; density matrices are only
    /// converted, so that positivity is reported by the command using them.
    pub fn from_file(file: &SceneFile, origin: &str, tol: &Tolerances) -> Result<Self> {
        let n = file.hilbert_dim;
        if n == 0 {
            return Err(load_error(origin, "hilbert_dim", "must be positive"));
        }
        let mut generators = BTreeMap::new();
        for (name, spec) in &file.algebras {
            let mats = spec
                .generators
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    matrix_from_rows(m, n)
                        .map_err(|(at, msg)| load_error(origin, &format!("algebras.{name}.generators[{i}]{at}"), &msg))
                })
                .collect::<Result<Vec<_>>>()?;
            generators.insert(name.clone(), mats);
        }
        let mut states = BTreeMap::new();
        for (name, amps) in &file.states {
            let field = format!("states.{name}");
            if amps.len() != n {
                return Err(load_error(
                    origin,
                    &field,
                    &format!("expected {n} amplitudes, found {}", amps.len()),
                ));
            }
            let v = CVector::from_iterator(n, amps.iter().map(|z| C64::new(z[0], z[1])));
            let state = VectorState::new(v, tol).map_err(|e| load_error(origin, &field, &e.to_string()))?;
            states.insert(name.clone(), state);
        }
        let mut densities = BTreeMap::new();
        for (name, rows) in &file.densities {
            let m = matrix_from_rows(rows, n)
                .map_err(|(at, msg)| load_error(origin, &format!("densities.{name}{at}"), &msg))?;
            densities.insert(name.clone(), m);
        }
        Ok(Self {
            hilbert_dim: n,
            generators,
            states,
            densities,
        })
    }

    pub fn algebra(&self, name: &str, tol: &Tolerances) -> Result<OperatorAlgebra> {
        let gens = self
            .generators
            .get(name)
            .ok_or_else(|| Error::Validation(format!("scene has no algebra named {name:?}")))?;
        OperatorAlgebra::generate(gens, self.hilbert_dim, tol)
    }

    pub fn state(&self, name: &str) -> Result<&VectorState> {
        self.states
            .get(name)
            .ok_or_else(|| Error::Validation(format!("scene has no state named {name:?}")))
    }

    pub fn density(&self, name: &str) -> Result<&CMatrix> {
        self.densities
            .get(name)
            .ok_or_else(|| Error::Validation(format!("scene has no density matrix named {name:?}")))
    }
}

/// On failure returns the offending path suffix (e.g. `"[2]"`) and a message.
fn matrix_from_rows(rows: &MatrixRows, n: usize) -> std::result::Result<CMatrix, (String, String)> {
    if rows.len() != n {
        return Err((String::new(), format!("expected {n} rows, found {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err((format!("[{i}]"), format!("expected {n} entries, found {}", row.len())));
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

pub fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn vector_to_pairs(v: &CVector) -> Vec<Complex> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictLabel {
    Pass,
    Fail,
    Vacuous,
    Error,
}

impl VerdictLabel {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Vacuous => "vacuous",
            Self::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckError {
    /// `input` for bad scenes, arguments or violated preconditions;
    /// `internal` otherwise.
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub verdict: VerdictLabel,
    pub residual: Option<f64>,
    pub summary: String,
    pub details: Value,
    pub error: Option<CheckError>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub command: Value,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    /// Wall-clock milliseconds per check; the only nondeterministic field.
    pub timing_ms: BTreeMap<String, f64>,
}

impl ReportFile {
    /// 0 when no check errored, 2 if any error came from the input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let errors: Vec<&CheckError> = self.checks.iter().filter_map(|c| c.error.as_ref()).collect();
        if errors.is_empty() {
            0
        } else if errors.iter().any(|e| e.kind == "input") {
            2
        } else {
            1
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report fields are plain data");
        serde_json::to_string_pretty(&value).expect("values serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let name = self.command.get("command").and_then(Value::as_str).unwrap_or("?");
        let _ = writeln!(out, "command: {name}");
        let _ = writeln!(
            out,
            "tolerances: eq_tol={:e} rank_tol={:e}  seed: {}",
            self.tolerances.eq_tol, self.tolerances.rank_tol, self.seed
        );
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let residual = c.residual.map(|r| format!("  residual={r:.3e}")).unwrap_or_default();
            let line = format!("{:<width$}  {:<7}{residual}", c.name, c.verdict.as_str());
            let _ = writeln!(out, "{}", line.trim_end());
            if !c.summary.is_empty() {
                let _ = writeln!(out, "{:<width$}    {}", "", c.summary);
            }
            if let Some(e) = &c.error {
                let _ = writeln!(out, "{:<width$}    error ({}): {}", "", e.kind, e.message);
            }
        }
        out
    }
}

struct Outcome {
    verdict: VerdictLabel,
    residual: Option<f64>,
    summary: String,
    details: Value,
}

impl Outcome {
    fn new(verdict: VerdictLabel, residual: Option<f64>, summary: impl Into<String>, details: Value) -> Self {
        Self {
            verdict,
            residual,
            summary: summary.into(),
            details,
        }
    }
}

#[derive(Default)]
struct Runner {
    checks: Vec<CheckResult>,
    timing: BTreeMap<String, f64>,
}

impl Runner {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<Outcome>) {
        let start = Instant::now();
        let result = match f() {
            Ok(o) => CheckResult {
                name: name.into(),
                verdict: o.verdict,
                residual: o.residual,
                summary: o.summary,
                details: o.details,
                error: None,
            },
            Err(e) => CheckResult {
                name: name.into(),
                verdict: VerdictLabel::Error,
                residual: None,
                summary: String::new(),
                details: Value::Null,
                error: Some(CheckError {
                    kind: if e.is_user_error() { "input" } else { "internal" }.into(),
                    message: e.to_string(),
                }),
            },
        };
        self.timing.insert(name.into(), start.elapsed().as_secs_f64() * 1e3);
        self.checks.push(result);
    }

    fn finish(self, command: Value, tol: Tolerances, seed: u64) -> ReportFile {
        ReportFile {
            command,
            tolerances: tol,
            seed,
            checks: self.checks,
            timing_ms: self.timing,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Anyons,
    Classes,
    DenseCrosscheck,
}

#[derive(Debug, Parser)]
#[command(
    name = "uhlmann",
    version,
    about = "Commutants, Haag duality and the Uhlmann property in finite dimensions"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Equality tolerance [default: 1e-9, or $UHLMANN_EQ_TOL]
    #[arg(long = "tol", global = true)]
    pub eq_tol: Option<f64>,
    /// Relative rank cutoff [default: 1e-10, or the equality tolerance if smaller]
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Commutation, local tomography, Haag duality and the Uhlmann property
    /// for a pair of algebras.
    Check {
        scene: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Equal-marginal samples drawn for the Uhlmann property.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Uhlmann data for one pair of states: marginals on A, maximal overlap
    /// over unitaries in B, and the intertwiner.
    Uhlmann {
        scene: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        phi: String,
    },
    /// Fidelity of two density matrices, cross-checked against the maximal
    /// overlap of their purifications.
    Fidelity {
        scene: PathBuf,
        #[arg(long)]
        rho: String,
        #[arg(long)]
        sigma: String,
    },
    /// Toric-code scenarios on an L × L torus.
    Toric {
        #[arg(long = "L")]
        l: usize,
        #[arg(long, value_enum, default_value_t = Demo::Classes)]
        demo: Demo,
        /// Patch radius; the largest that fits is used when omitted. Ignored
        /// by the dense cross-check, which uses single-edge patches.
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long, default_value_t = 1)]
        separation: usize,
    },
}

/// Resolves tolerances: command-line flag, then scene override, then the
/// environment variable for `eq_tol`, then the defaults.
pub fn resolve_tolerances(global: &GlobalArgs, scene: Option<&ToleranceOverrides>) -> Result<Tolerances> {
    let scene = scene.copied().unwrap_or_default();
    let eq_override = global.eq_tol.or(scene.eq_tol);
    let base = if eq_override.is_some() {
        Tolerances::default()
    } else {
        Tolerances::from_env()?
    };
    let eq_tol = eq_override.unwrap_or(base.eq_tol);
    // An unset rank tolerance follows a tightened equality tolerance down.
    let rank_tol = global.rank_tol.or(scene.rank_tol).unwrap_or(base.rank_tol.min(eq_tol));
    Tolerances::new(eq_tol, rank_tol)
}

fn load_scene(path: &Path, global: &GlobalArgs) -> Result<(Scene, Tolerances)> {
    let file = SceneFile::read(path)?;
    let tol = resolve_tolerances(global, file.tolerances.as_ref())?;
    let scene = Scene::from_file(&file, &path.display().to_string(), &tol)?;
    Ok((scene, tol))
}

/// Runs a parsed command. Errors before any check runs (unreadable scene,
/// unknown names, invalid geometry) are returned as `Err`.
pub fn run(cli: &Cli) -> Result<ReportFile> {
    let g = &cli.global;
    match &cli.command {
        Command::Check { scene, a, b, samples } => {
            let (scene_data, tol) = load_scene(scene, g)?;
            let alg_a = scene_data.algebra(a, &tol)?;
            let alg_b = scene_data.algebra(b, &tol)?;
            let echo =
                json!({"command": "check", "scene": scene.display().to_string(), "a": a, "b": b, "samples": samples});
            Ok(cmd_check(&alg_a, &alg_b, *samples, g.seed, &tol).finish(echo, tol, g.seed))
        }
        Command::Uhlmann { scene, a, b, psi, phi } => {
            let (scene_data, tol) = load_scene(scene, g)?;
            let alg_a = scene_data.algebra(a, &tol)?;
            let alg_b = scene_data.algebra(b, &tol)?;
            let psi_s = scene_data.state(psi)?;
            let phi_s = scene_data.state(phi)?;
            let echo = json!({"command": "uhlmann", "scene": scene.display().to_string(), "a": a, "b": b, "psi": psi, "phi": phi});
            Ok(cmd_uhlmann(&alg_a, &alg_b, psi_s, phi_s, &tol).finish(echo, tol, g.seed))
        }
        Command::Fidelity { scene, rho, sigma } => {
            let (scene_data, tol) = load_scene(scene, g)?;
            let r = scene_data.density(rho)?;
            let s = scene_data.density(sigma)?;
            let echo = json!({"command": "fidelity", "scene": scene.display().to_string(), "rho": rho, "sigma": sigma});
            Ok(cmd_fidelity(r, s, &tol).finish(echo, tol, g.seed))
        }
        Command::Toric {
            l,
            demo,
            radius,
            separation,
        } => {
            let tol = resolve_tolerances(g, None)?;
            let lattice = Lattice::new(*l)?;
            let demo_name = demo
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
                .to_string();
            let mut echo = json!({"command": "toric", "L": l, "demo": demo_name, "separation": separation});
            let runner = match demo {
                Demo::DenseCrosscheck => cmd_dense(&lattice, &tol)?,
                Demo::Anyons | Demo::Classes => {
                    let r = match radius {
                        Some(r) => *r,
                        None => toric::largest_fitting_radius(&lattice, *separation).ok_or_else(|| {
                            Error::Geometry(format!("no patch radius keeps separation {separation} on L = {l}"))
                        })?,
                    };
                    echo["radius"] = json!(r);
                    let regions = toric::two_patch_regions(&lattice, r, *separation)?;
                    if *demo == Demo::Anyons {
                        cmd_anyons(&lattice, &regions)
                    } else {
                        cmd_classes(&lattice, &regions)
                    }
                }
            };
            Ok(runner.finish(echo, tol, g.seed))
        }
    }
}

fn verdict_outcome(v: Verdict, summary: &str) -> Outcome {
    Outcome::new(VerdictLabel::from_pass(v.pass), Some(v.residual), summary, json!(v))
}

fn witness_json(w: &Witness) -> Value {
    json!({
        "psi": vector_to_pairs(w.psi.amplitudes()),
        "phi": vector_to_pairs(w.phi.amplitudes()),
        "max_overlap": w.max_overlap,
        "connecting_unitary": matrix_to_rows(&w.connecting_unitary),
        "membership_defect": w.membership_defect,
        "location": w.location,
    })
}

fn cmd_check(a: &OperatorAlgebra, b: &OperatorAlgebra, samples: usize, seed: u64, tol: &Tolerances) -> Runner {
    let mut runner = Runner::default();
    runner.run("commutation", || {
        ensure_commuting(a, b, tol)?;
        Ok(Outcome::new(
            VerdictLabel::Pass,
            None,
            "every basis pair commutes",
            json!({"dim_a": a.dim(), "dim_b": b.dim()}),
        ))
    });
    runner.run("local_tomography", || {
        let r = check_local_tomography(a, b, tol)?;
        let summary = format!(
            "join dimension {} of {}; factors: a={} b={}",
            r.join_dim,
            a.hilbert_dim() * a.hilbert_dim(),
            r.a_is_factor,
            r.b_is_factor
        );
        Ok(Outcome::new(
            VerdictLabel::from_pass(r.verdict.pass),
            Some(r.verdict.residual),
            summary,
            json!(r),
        ))
    });
    runner.run("haag_duality", || {
        let v = check_haag_duality(a, b, tol)?;
        Ok(verdict_outcome(v, "b compared with the commutant of a"))
    });
    runner.run("uhlmann_property", || {
        let r = verify_theorem_equivalence(a, b, seed, samples, tol)?;
        let details = json!({
            "haag_duality": r.haag_duality,
            "samples": r.samples,
            "min_overlap": r.min_overlap(),
            "overlaps": r.overlaps,
            "max_intertwiner_residual": r.max_intertwiner_residual,
            "max_mb_residual": r.max_mb_residual,
            "witness": r.witness.as_ref().map(witness_json),
        });
        Ok(match &r.witness {
            Some(w) => Outcome::new(
                VerdictLabel::Fail,
                Some(1.0 - w.max_overlap),
                format!("witness with equal marginals and maximal overlap {:.6}", w.max_overlap),
                details,
            ),
            None => {
                let min = r.min_overlap().unwrap_or(1.0);
                Outcome::new(
                    VerdictLabel::Pass,
                    Some((1.0 - min).max(0.0)),
                    format!("{} equal-marginal samples, minimal overlap {min:.12}", r.samples),
                    details,
                )
            }
        })
    });
    runner
}

fn cmd_uhlmann(
    a: &OperatorAlgebra,
    b: &OperatorAlgebra,
    psi: &VectorState,
    phi: &VectorState,
    tol: &Tolerances,
) -> Runner {
    let mut runner = Runner::default();
    let record = check_uhlmann_pair(a, b, psi, phi, tol);
    let record = match record {
        Ok(r) => r,
        Err(e) => {
            runner.run("uhlmann_pair", || Err(e));
            return runner;
        }
    };
    runner.run("max_overlap", || {
        if record.vacuous {
            return Ok(Outcome::new(
                VerdictLabel::Vacuous,
                None,
                format!("marginals on a differ by {:.3e}", record.marginals.max_deviation),
                json!({"marginals": record.marginals}),
            ));
        }
        let opt = max_overlap(b, psi, phi, tol)?;
        Ok(Outcome::new(
            VerdictLabel::from_pass(opt.value >= 1.0 - tol.eq_tol),
            Some((1.0 - opt.value).max(0.0)),
            format!("maximal overlap {:.12}", opt.value),
            json!({
                "marginals": record.marginals,
                "max_overlap": opt.value,
                "optimizer": matrix_to_rows(&opt.optimizer),
            }),
        ))
    });
    runner.run("intertwiner", || {
        let Some(iso) = &record.intertwiner else {
            return Ok(Outcome::new(
                VerdictLabel::Vacuous,
                None,
                "marginals differ",
                Value::Null,
            ));
        };
        let in_b = iso.in_mb.expect("b was supplied");
        Ok(Outcome::new(
            VerdictLabel::from_pass(in_b.pass),
            Some(in_b.residual),
            format!(
                "v intertwines with residual {:.3e}; membership residual in b {:.3e}",
                iso.intertwiner_residual, in_b.residual
            ),
            json!({
                "v": matrix_to_rows(&iso.v),
                "intertwiner_residual": iso.intertwiner_residual,
                "commutant_residual": iso.commutant_residual,
                "state_residual": iso.state_residual,
                "initial_projection_defect": iso.initial_projection_defect,
                "final_projection_defect": iso.final_projection_defect,
                "in_b": in_b,
            }),
        ))
    });
    runner
}

/// `1 ⊗ B(C^n)` on `C^n ⊗ C^n`, the algebra acting on a purifying ancilla.
pub fn ancilla_algebra(n: usize, tol: &Tolerances) -> Result<OperatorAlgebra> {
    let id = identity(n);
    let units: Vec<CMatrix> = OperatorAlgebra::full(n).basis().iter().map(|e| kron(&id, e)).collect();
    OperatorAlgebra::from_span(&units, n * n, tol)
}

fn cmd_fidelity(rho: &CMatrix, sigma: &CMatrix, tol: &Tolerances) -> Runner {
    let mut runner = Runner::default();
    runner.run("fidelity", || {
        let r = DensityMatrix::new(rho.clone(), tol)?;
        let s = DensityMatrix::new(sigma.clone(), tol)?;
        let f = fidelity(&r, &s, tol)?;
        let pr = purify(&r);
        let ps = purify(&s);
        let overlap = max_overlap(&ancilla_algebra(r.dim(), tol)?, &pr, &ps, tol)?;
        let discrepancy = (f - overlap.value).abs();
        Ok(Outcome::new(
            VerdictLabel::from_pass(discrepancy <= INTERTWINER_TOL),
            Some(discrepancy),
            format!("fidelity {f:.10}; maximal purification overlap {:.10}", overlap.value),
            json!({
                "fidelity": f,
                "purification_rho": vector_to_pairs(pr.amplitudes()),
                "purification_sigma": vector_to_pairs(ps.amplitudes()),
                "max_overlap": overlap.value,
                "discrepancy": discrepancy,
            }),
        ))
    });
    runner
}

fn cmd_anyons(lattice: &Lattice, regions: &toric::PatchRegions) -> Runner {
    let mut runner = Runner::default();
    runner.run("ground_state", || {
        let g = toric::ground_state(lattice, toric::LogicalSector::default())?;
        let (stars, faces) = toric::syndrome(lattice, &g);
        Ok(Outcome::new(
            VerdictLabel::from_pass(stars.is_empty() && faces.is_empty()),
            None,
            format!(
                "{} qubits; stars and plaquettes without the states fix {} logical qubits",
                lattice.num_qubits(),
                toric::code_dimension_log2(lattice)
            ),
            json!({"violated_stars": stars, "violated_plaquettes": faces, "regions": regions}),
        ))
    });
    runner.run("anyon_pairs", || {
        let g = toric::ground_state(lattice, toric::LogicalSector::default())?;
        let sorted = |mut p: [usize; 2]| {
            p.sort_unstable();
            p.to_vec()
        };
        let mut rows = Vec::new();
        let mut all = true;
        for s in Sector::ALL {
            let st = toric::anyon_pair_state(lattice, &g, s, regions)?;
            let (stars, faces) = toric::syndrome(lattice, &st);
            let has_e = matches!(s, Sector::Electric | Sector::Dyonic);
            let has_m = matches!(s, Sector::Magnetic | Sector::Dyonic);
            let want_stars = if has_e { sorted(regions.sites.e_sites) } else { vec![] };
            let want_faces = if has_m { sorted(regions.sites.m_sites) } else { vec![] };
            let ok = stars == want_stars && faces == want_faces;
            all &= ok;
            rows.push(json!({"sector": s, "stars": stars, "plaquettes": faces, "as_expected": ok}));
        }
        Ok(Outcome::new(
            VerdictLabel::from_pass(all),
            None,
            "each string flips exactly its endpoint checks",
            json!({"sectors": rows, "sites": regions.sites}),
        ))
    });
    runner
}

fn cmd_classes(lattice: &Lattice, regions: &toric::PatchRegions) -> Runner {
    let mut runner = Runner::default();
    let classes = toric::purification_classes(lattice, regions);
    let report = match classes {
        Ok(c) => c.report,
        Err(e) => {
            runner.run("purification_classes", || Err(e));
            return runner;
        }
    };
    runner.run("gram_identity", || {
        let dev = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| (report.gram[i][j] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        Ok(Outcome::new(
            VerdictLabel::from_pass(report.gram_is_identity),
            Some(dev),
            "moduli of the pairwise overlaps of the 1, e, m, em states",
            json!({"sectors": report.sectors, "gram": report.gram, "syndromes": report.syndromes}),
        ))
    });
    runner.run("b_signatures_equal", || {
        let differing: Vec<String> = report
            .signatures
            .iter()
            .filter(|s| !s.equal_to_vacuum)
            .map(|s| s.sector.to_string())
            .collect();
        let summary = if differing.is_empty() {
            "all four states share the stabilizers supported in B".to_string()
        } else {
            format!(
                "sectors {} differ from the vacuum on a B-supported stabilizer",
                differing.join(", ")
            )
        };
        Ok(Outcome::new(
            VerdictLabel::from_pass(report.b_signatures_equal),
            None,
            summary,
            json!({"b_signature_rank": report.b_signature_rank, "signatures": report.signatures, "b": regions.b}),
        ))
    });
    runner.run("a_connectivity_infeasible", || {
        let feasible: Vec<String> = report
            .a_connectivity
            .iter()
            .filter(|p| p.connectivity.feasible)
            .map(|p| format!("{}-{}", p.first, p.second))
            .collect();
        Ok(Outcome::new(
            VerdictLabel::from_pass(feasible.is_empty()),
            None,
            format!("{} of 6 sector pairs connectable by a Pauli in A1 ∪ A2", feasible.len()),
            json!({"pairs": report.a_connectivity, "a1": regions.a1, "a2": regions.a2}),
        ))
    });
    runner
}

fn cmd_dense(lattice: &Lattice, tol: &Tolerances) -> Result<Runner> {
    let r = toric::dense_cross_check(lattice, tol)?;
    let mut runner = Runner::default();
    runner.run("engine_agreement", || {
        Ok(Outcome::new(
            VerdictLabel::from_pass(r.engines_agree),
            Some(r.max_overlap_discrepancy.max(r.max_expectation_discrepancy)),
            format!("{} Pauli expectations per state compared", r.paulis_checked),
            json!({
                "states": r.states,
                "max_overlap_discrepancy": r.max_overlap_discrepancy,
                "max_expectation_discrepancy": r.max_expectation_discrepancy,
                "marginal_facts": r.marginal_facts,
                "cross_pairs": r.cross_pairs,
            }),
        ))
    });
    let iso = &r.intertwiner;
    runner.run("haag_duality", || {
        Ok(verdict_outcome(
            iso.haag_duality,
            "edge-set tensor split, compressed to the two states' support",
        ))
    });
    runner.run("intertwiner", || {
        let pass = iso.state_residual <= INTERTWINER_TOL && iso.intertwiner_residual <= INTERTWINER_TOL;
        Ok(Outcome::new(
            VerdictLabel::from_pass(pass),
            Some(iso.state_residual),
            format!(
                "{} vs {}: |vΨ − Φ| = {:.3e}; operator-Schmidt rank across A1|A2 = {}",
                iso.first, iso.second, iso.state_residual, iso.operator_schmidt_rank
            ),
            json!({"a1": r.a1, "a2": r.a2, "summary": iso}),
        ))
    });
    Ok(runner)
}

/// Parses arguments, runs, writes the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_user_error() { 2 } else { 1 };
        }
    };
    let text = match cli.global.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    match &cli.global.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None => print!("{text}"),
    }
    report.exit_code()
}
