//! Verification commands over parsed instances and the report they emit.
//!
//! Each command turns one or more [`Instance`]s into a list of named
//! checks, each with a residual, the tolerance it was held to, and a
//! verdict. Randomness (sections, algebra elements, gauges) comes from a
//! `ChaCha8Rng` seeded by the report seed, one stream per command so that
//! `all` reproduces the numbers of the individual commands.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bundles::{bundle_residuals, cocycle_residuals, tensor_bundle, GHilbertBundle, UnitSection};
use crate::convolution::{Algebra, AlgebraElement};
use crate::correspondence::{compose_sections, unit_inner, unit_multiply, BundleMorphism, Module};
use crate::dirichlet::{self, cp_block_margin, derivation, leibniz_residual, semigroup};
use crate::functions::{
    self, cnt_uniqueness_check, cnt_witness, gns_cnt_function, gns_cnt_function_with, gns_pt_function, pt_margin,
    pt_uniqueness_check, schoenberg, schoenberg_converse, Basepoint, CntWitness, GroupoidFunction, PtGns,
};
use crate::groupoid::check_haar;
use crate::io::{instance_hash, InputError, Instance};
use crate::linalg::{self, c};
use crate::random;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Validate,
    CheckPt,
    CheckCnt,
    GnsPt,
    GnsCnt,
    Schoenberg,
    Norm,
    CorrespondenceVerify,
    FunctorVerify,
    SauvageotVerify,
    All,
}

impl Command {
    pub const EVERY: [Command; 11] = [
        Command::Validate,
        Command::CheckPt,
        Command::CheckCnt,
        Command::GnsPt,
        Command::GnsCnt,
        Command::Schoenberg,
        Command::Norm,
        Command::CorrespondenceVerify,
        Command::FunctorVerify,
        Command::SauvageotVerify,
        Command::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::CheckPt => "check-pt",
            Command::CheckCnt => "check-cnt",
            Command::GnsPt => "gns-pt",
            Command::GnsCnt => "gns-cnt",
            Command::Schoenberg => "schoenberg",
            Command::Norm => "norm",
            Command::CorrespondenceVerify => "correspondence-verify",
            Command::FunctorVerify => "functor-verify",
            Command::SauvageotVerify => "sauvageot-verify",
            Command::All => "all",
        }
    }

    fn stream(self) -> u64 {
        Command::EVERY.iter().position(|&c| c == self).expect("listed") as u64
    }

    /// Function the command reads when `--function` is not given.
    fn default_function(self) -> Option<&'static str> {
        match self {
            Command::CheckPt | Command::GnsPt => Some("phi"),
            Command::CheckCnt | Command::GnsCnt | Command::Schoenberg | Command::SauvageotVerify => Some("psi"),
            Command::Norm => Some("f"),
            _ => None,
        }
    }
}

impl std::str::FromStr for Command {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::EVERY
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| InputError::Usage(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Residuals of identities.
    pub absolute: f64,
    /// Norm identities, relative to `1 + ‖f‖²`.
    pub relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { absolute: 1e-9, relative: 1e-7 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub tol: Tolerances,
    pub seed: u64,
    pub function: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub instances: usize,
    pub instance_hash: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} (gpd {}), seed {}, instance {}", self.command, self.tool_version, self.seed, self.instance_hash);
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            let _ = write!(s, "{verdict}  {}  residual {:e}  tol {:e}", c.name, c.residual, c.tol);
            if let Some(d) = &c.detail {
                let _ = write!(s, "  ({d})");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{}", if self.pass { "PASS" } else { "FAIL" });
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

struct Checks {
    prefix: String,
    out: Vec<Check>,
}

impl Checks {
    fn push(&mut self, name: &str, residual: f64, tol: f64, detail: Option<String>) {
        // NaN residuals fail
        let pass = residual <= tol;
        self.out.push(Check { name: format!("{}{name}", self.prefix), residual, tol, pass, detail });
    }

    fn le(&mut self, name: &str, residual: f64, tol: f64) {
        self.push(name, residual, tol, None);
    }

    /// Lower bound `margin ≥ -tol`, reported as the residual `max(0, -margin)`.
    fn margin(&mut self, name: &str, margin: f64, tol: f64) {
        self.push(name, (-margin).max(0.0), tol, Some(format!("min eigenvalue {margin:e}")));
    }

    fn flag(&mut self, name: &str, ok: bool, detail: Option<String>) {
        self.push(name, if ok { 0.0 } else { 1.0 }, 0.0, detail);
    }
}

fn rng_for(seed: u64, instance: usize, command: Command) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(instance as u64));
    rng.set_stream(command.stream());
    rng
}

/// Run `command` over `instances` and assemble the report. Missing blocks
/// are input errors; failed identities only mark checks as failing.
pub fn run_suite(command: Command, instances: &[Instance], opts: &SuiteOptions) -> Result<Report, InputError> {
    let mut checks = Vec::new();
    for (k, inst) in instances.iter().enumerate() {
        let prefix = if instances.len() > 1 { format!("instance[{k}]/") } else { String::new() };
        let mut out = Checks { prefix, out: Vec::new() };
        run_one(command, inst, k, opts, &mut out)?;
        checks.extend(out.out);
    }
    let instance_hash = match instances {
        [one] => instance_hash(&one.document),
        many => {
            let joined: String = many.iter().map(|i| instance_hash(&i.document) + "\n").collect();
            Sha256::digest(joined.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        command: command.name().to_string(),
        tool_version: TOOL_VERSION.to_string(),
        seed: opts.seed,
        tolerances: opts.tol,
        instances: instances.len(),
        instance_hash,
        checks,
        pass,
    })
}

fn run_one(command: Command, inst: &Instance, k: usize, opts: &SuiteOptions, out: &mut Checks) -> Result<(), InputError> {
    let g = &inst.groupoid;
    let groupoid_report = g.validate();
    out.push(
        "groupoid",
        groupoid_report.violations.len() as f64,
        0.0,
        groupoid_report.violations.first().map(|v| format!("{} at {:?}: {}", v.axiom, v.witnesses, v.detail)),
    );
    let haar_report = check_haar(g, &inst.haar);
    out.push(
        "haar",
        haar_report.violations.len() as f64,
        0.0,
        haar_report.violations.first().map(|v| format!("{} at {:?}: {}", v.axiom, v.witnesses, v.detail)),
    );
    if !groupoid_report.is_empty() || !haar_report.is_empty() {
        // later checks assume a groupoid and a Haar system
        return Ok(());
    }

    let function_name = |cmd: Command| -> Result<String, InputError> {
        match (&opts.function, cmd.default_function()) {
            (Some(name), _) => Ok(name.clone()),
            (None, Some(name)) => Ok(name.to_string()),
            (None, None) => Err(InputError::Usage(format!("{} takes no function", cmd.name()))),
        }
    };

    let commands: Vec<Command> = if command == Command::All {
        let has = |name: &str| inst.functions.contains_key(name);
        let mut v = vec![Command::Validate];
        if has("phi") {
            v.extend([Command::CheckPt, Command::GnsPt]);
        }
        if has("psi") {
            v.extend([Command::CheckCnt, Command::GnsCnt, Command::Schoenberg]);
        }
        if has("f") {
            v.push(Command::Norm);
        }
        if !inst.bundles.is_empty() {
            v.extend([Command::CorrespondenceVerify, Command::FunctorVerify]);
        }
        if has("psi") {
            v.push(Command::SauvageotVerify);
        }
        v
    } else {
        vec![command]
    };

    for cmd in commands {
        let sub = if command == Command::All { format!("{}:", cmd.name()) } else { String::new() };
        let saved = out.prefix.clone();
        out.prefix = format!("{saved}{sub}");
        let mut rng = rng_for(opts.seed, k, cmd);
        let function = if cmd.default_function().is_some() {
            // `all` always uses the defaults
            let name = if command == Command::All { cmd.default_function().unwrap().to_string() } else { function_name(cmd)? };
            Some((name.clone(), inst.function(&name)?.clone()))
        } else {
            None
        };
        match cmd {
            Command::Validate => validate(inst, opts, out),
            Command::CheckPt => check_pt(inst, function.as_ref().unwrap(), opts, out),
            Command::CheckCnt => check_cnt(inst, function.as_ref().unwrap(), opts, out),
            Command::GnsPt => gns_pt(inst, function.as_ref().unwrap(), opts, &mut rng, out),
            Command::GnsCnt => gns_cnt(inst, function.as_ref().unwrap(), opts, out),
            Command::Schoenberg => schoenberg_checks(inst, function.as_ref().unwrap(), opts, out)?,
            Command::Norm => norm(inst, function.as_ref().unwrap(), opts, out),
            Command::CorrespondenceVerify => correspondence(inst, opts, &mut rng, out)?,
            Command::FunctorVerify => functor(inst, opts, &mut rng, out)?,
            Command::SauvageotVerify => sauvageot(inst, function.as_ref().unwrap(), opts, &mut rng, out),
            Command::All => unreachable!("expanded above"),
        }
        out.prefix = saved;
    }
    Ok(())
}

fn validate(inst: &Instance, opts: &SuiteOptions, out: &mut Checks) {
    let g = &inst.groupoid;
    for (name, b) in &inst.bundles {
        out.le(&format!("bundle[{name}]"), bundle_residuals(g, b).max(), opts.tol.absolute);
    }
    for (name, (bname, coc)) in &inst.cocycles {
        out.le(&format!("cocycle[{name}]"), cocycle_residuals(g, &inst.bundles[bname], coc).max(), opts.tol.absolute);
    }
}

fn check_pt(inst: &Instance, (name, phi): &(String, GroupoidFunction), opts: &SuiteOptions, out: &mut Checks) {
    let m = pt_margin(&inst.groupoid, phi);
    let tol = opts.tol.absolute;
    out.le(&format!("pt[{name}]/hermitian"), m.hermitian_defect, tol);
    out.push(
        &format!("pt[{name}]/spectrum"),
        (-m.min_eigenvalue).max(0.0),
        tol * m.scale,
        Some(format!("min eigenvalue {:e} at unit {}", m.min_eigenvalue, inst.groupoid.unit_id(m.unit))),
    );
}

fn witness_size(w: &CntWitness) -> f64 {
    match w {
        CntWitness::NotReal { imag, .. } => imag.abs(),
        CntWitness::NonzeroOnUnit { value, .. } => value.abs(),
        CntWitness::NotSymmetric { value, inverse_value, .. } => (value - inverse_value).abs(),
        CntWitness::Positive { value, .. } => *value,
    }
}

fn check_cnt(inst: &Instance, (name, psi): &(String, GroupoidFunction), opts: &SuiteOptions, out: &mut Checks) {
    match cnt_witness(&inst.groupoid, psi, opts.tol.absolute) {
        None => out.le(&format!("cnt[{name}]"), 0.0, opts.tol.absolute),
        Some(w) => out.push(&format!("cnt[{name}]"), witness_size(&w), opts.tol.absolute, Some(w.to_string())),
    }
}

fn gns_pt(inst: &Instance, (name, phi): &(String, GroupoidFunction), opts: &SuiteOptions, rng: &mut ChaCha8Rng, out: &mut Checks) {
    let g = &inst.groupoid;
    let tol = opts.tol.absolute;
    let gns = match gns_pt_function(g, phi, tol) {
        Ok(gns) => gns,
        Err(e) => return out.push(&format!("gns_pt[{name}]"), f64::INFINITY, tol, Some(e.to_string())),
    };
    let scale = 1.0 + phi.max_abs();
    out.le(&format!("gns_pt[{name}]/reconstruction"), gns.reconstruction, tol * scale);
    out.le(&format!("gns_pt[{name}]/unitary_fit"), gns.fit_residual, tol * scale);
    out.le(&format!("gns_pt[{name}]/bundle"), bundle_residuals(g, &gns.bundle).max(), tol);
    // another GNS pair: the same one in a random orthonormal frame per unit
    let gauge: Vec<_> = gns.bundle.dims().iter().map(|&d| random::random_unitary(d, rng, false)).collect();
    let moved = GHilbertBundle::new(
        g,
        gns.bundle.dims().to_vec(),
        (0..g.n_arrows()).map(|a| &gauge[g.dst(a)] * gns.bundle.action(a) * gauge[g.src(a)].adjoint()).collect(),
    )
    .expect("conjugation keeps shapes");
    let other = PtGns {
        bundle: moved,
        section: UnitSection { values: gns.section.values.iter().zip(&gauge).map(|(v, u)| u * v).collect() },
        fit_residual: 0.0,
        reconstruction: 0.0,
    };
    match pt_uniqueness_check(g, &gns, &other, tol) {
        Ok(u) => out.le(&format!("gns_pt[{name}]/uniqueness"), u.equivariance_residual.max(u.fit_residual), 10.0 * tol),
        Err(e) => out.push(&format!("gns_pt[{name}]/uniqueness"), f64::INFINITY, 10.0 * tol, Some(e.to_string())),
    }
}

fn gns_cnt(inst: &Instance, (name, psi): &(String, GroupoidFunction), opts: &SuiteOptions, out: &mut Checks) {
    let g = &inst.groupoid;
    let tol = opts.tol.absolute;
    let gns = match gns_cnt_function(g, psi, tol) {
        Ok(gns) => gns,
        Err(e) => return out.push(&format!("gns_cnt[{name}]"), f64::INFINITY, tol, Some(e.to_string())),
    };
    let scale = 1.0 + psi.max_abs();
    out.le(&format!("gns_cnt[{name}]/norm_reconstruction"), gns.reconstruction, tol * scale);
    out.le(&format!("gns_cnt[{name}]/cocycle_identity"), gns.cocycle_residual, tol * scale);
    out.le(&format!("gns_cnt[{name}]/orthogonal_fit"), gns.fit_residual, tol * scale);
    out.le(&format!("gns_cnt[{name}]/bundle"), bundle_residuals(g, &gns.bundle).max(), tol);
    out.flag(&format!("gns_cnt[{name}]/totality"), gns.total, None);
    match gns_cnt_function_with(g, psi, Basepoint::FirstArrow, tol) {
        Ok(other) => match cnt_uniqueness_check(g, &gns, &other, tol) {
            Ok(u) => out.le(&format!("gns_cnt[{name}]/uniqueness"), u.equivariance_residual.max(u.fit_residual), 10.0 * tol),
            Err(e) => out.push(&format!("gns_cnt[{name}]/uniqueness"), f64::INFINITY, 10.0 * tol, Some(e.to_string())),
        },
        Err(e) => out.push(&format!("gns_cnt[{name}]/uniqueness"), f64::INFINITY, 10.0 * tol, Some(e.to_string())),
    }
}

pub const SCHOENBERG_TIMES: [f64; 3] = [0.1, 1.0, 10.0];

fn schoenberg_checks(inst: &Instance, (name, psi): &(String, GroupoidFunction), opts: &SuiteOptions, out: &mut Checks) -> Result<(), InputError> {
    let g = &inst.groupoid;
    let tol = opts.tol.absolute;
    for t in SCHOENBERG_TIMES {
        let phi = schoenberg(g, psi, t).map_err(|e| InputError::Usage(e.to_string()))?;
        let m = pt_margin(g, &phi);
        out.margin(&format!("schoenberg[{name}]/t={t}"), m.min_eigenvalue, tol);
        let unit_defect = (0..g.n_units()).map(|x| (phi.get(g.unit_arrow(x)) - c(1.0)).norm()).fold(0.0, f64::max);
        out.le(&format!("schoenberg[{name}]/t={t}/unit_value"), unit_defect, tol);
    }
    let grid = functions::log_grid(1e-3, 10.0, 9);
    let oracle = schoenberg_converse(g, psi, &grid, tol, 1e-4).map_err(|e| InputError::Usage(e.to_string()))?;
    let detail = match (&oracle.first_failure, &oracle.witness) {
        (Some(t), _) => format!("exp(-t psi) not of positive type at t = {t}; converse vacuous"),
        (None, Some(w)) => format!("difference quotient at t = {} not CNT: {w}", oracle.t_min),
        (None, None) => format!("difference quotient at t = {} is CNT", oracle.t_min),
    };
    out.push(&format!("schoenberg[{name}]/converse"), if oracle.holds() { 0.0 } else { 1.0 }, 0.0, Some(detail));
    Ok(())
}

fn norm(inst: &Instance, (name, f): &(String, GroupoidFunction), opts: &SuiteOptions, out: &mut Checks) {
    let g = &inst.groupoid;
    let alg = Algebra::new(g, &inst.haar);
    let f = f.to_element();
    let fs = alg.involution(&f);
    let nf = alg.cstar_norm(&f);
    let ff = alg.convolve(&fs, &f);
    let rel = opts.tol.relative * (1.0 + nf * nf);
    out.le(&format!("norm[{name}]/cstar_identity"), (alg.cstar_norm(&ff) - nf * nf).abs(), rel);
    out.le(&format!("norm[{name}]/involution_isometric"), (alg.cstar_norm(&fs) - nf).abs(), rel);
    let hom = (0..g.n_units())
        .map(|x| linalg::max_abs_diff(&alg.representation_at(&ff, x), &(alg.representation_at(&fs, x) * alg.representation_at(&f, x))))
        .fold(0.0, f64::max);
    let star = (0..g.n_units())
        .map(|x| linalg::max_abs_diff(&alg.representation_at(&fs, x), &alg.representation_at(&f, x).adjoint()))
        .fold(0.0, f64::max);
    let abs = opts.tol.absolute * (1.0 + nf * nf);
    out.le(&format!("norm[{name}]/multiplicative"), hom, abs);
    out.le(&format!("norm[{name}]/star"), star, opts.tol.absolute);
    out.margin(&format!("norm[{name}]/positivity_of_square"), alg.positivity_margin(&ff).0, abs);
    if let Some(phi) = inst.functions.get("phi") {
        if functions::is_pt_function(g, phi, opts.tol.absolute) {
            let product = ff.pointwise(phi.values());
            out.margin(&format!("norm[{name}]/schur_product_with_phi"), alg.positivity_margin(&product).0, abs * (1.0 + phi.max_abs()));
        }
    }
}

fn first_bundle<'a>(inst: &'a Instance, preferred: &str) -> Result<(&'a str, &'a GHilbertBundle), InputError> {
    inst.bundles
        .get_key_value(preferred)
        .or_else(|| inst.bundles.iter().next())
        .map(|(k, v)| (k.as_str(), v))
        .ok_or_else(|| InputError::Usage("document has no bundle".into()))
}

fn correspondence(inst: &Instance, opts: &SuiteOptions, rng: &mut ChaCha8Rng, out: &mut Checks) -> Result<(), InputError> {
    let g = &inst.groupoid;
    let (bname, b) = first_bundle(inst, "E")?;
    let m = Module::new(g, &inst.haar, b);
    let alg = m.algebra();
    let tol = opts.tol.absolute;
    let f = inst.functions.get("f").map(|f| f.to_element()).unwrap_or_else(|| random::random_element(g, rng));
    let k = random::random_element(g, rng);
    let (xi, eta) = (random::random_section(g, b, rng), random::random_section(g, b, rng));
    let p = format!("correspondence[{bname}]");

    out.le(&format!("{p}/left_module"), m.left_action(&alg.convolve(&f, &k), &xi).max_abs_diff(&m.left_action(&f, &m.left_action(&k, &xi))), tol);
    out.le(&format!("{p}/right_module"), m.right_action(&xi, &alg.convolve(&f, &k)).max_abs_diff(&m.right_action(&m.right_action(&xi, &f), &k)), tol);
    out.le(&format!("{p}/bimodule"), m.right_action(&m.left_action(&f, &xi), &k).max_abs_diff(&m.left_action(&f, &m.right_action(&xi, &k))), tol);
    let ip = m.inner_product(&xi, &eta);
    out.le(&format!("{p}/inner_right_linear"), m.inner_product(&xi, &m.right_action(&eta, &k)).max_abs_diff(&alg.convolve(&ip, &k)), tol);
    out.le(&format!("{p}/inner_hermitian"), alg.involution(&ip).max_abs_diff(&m.inner_product(&eta, &xi)), tol);
    out.le(
        &format!("{p}/adjointable"),
        m.inner_product(&m.left_action(&f, &xi), &eta).max_abs_diff(&m.inner_product(&xi, &m.left_action(&alg.involution(&f), &eta))),
        tol,
    );
    out.margin(&format!("{p}/inner_positive"), alg.positivity_margin(&m.inner_product(&xi, &xi)).0, tol);
    out.margin(&format!("{p}/bounded_action"), m.bounded_action_margin(&f, &xi), tol);

    let own_sections: Vec<&UnitSection> = inst.sections.values().filter(|(n, _)| n == bname).map(|(_, s)| s).collect();
    let u = own_sections.first().map(|s| (*s).clone()).unwrap_or_else(|| random::random_unit_section(b, rng, false));
    let v = random::random_unit_section(b, rng, false);
    let lhs = m.inner_product(&m.le_gall_map(&u, &f), &m.le_gall_map(&v, &k));
    let rhs = alg.convolve(&alg.involution(&f), &unit_multiply(g, &unit_inner(&u, &v), &k));
    out.le(&format!("{p}/le_gall_inner"), lhs.max_abs_diff(&rhs), tol);
    out.le(&format!("{p}/le_gall_right"), m.le_gall_map(&u, &alg.convolve(&f, &k)).max_abs_diff(&m.right_action(&m.le_gall_map(&u, &f), &k)), tol);
    Ok(())
}

fn functor(inst: &Instance, opts: &SuiteOptions, rng: &mut ChaCha8Rng, out: &mut Checks) -> Result<(), InputError> {
    let g = &inst.groupoid;
    let h = &inst.haar;
    let (ename, e) = first_bundle(inst, "E")?;
    let (fname, fb) = inst.bundles.get_key_value("F").map(|(k, v)| (k.as_str(), v)).unwrap_or((ename, e));
    let tol = opts.tol.absolute;
    let p = format!("functor[{ename},{fname}]");
    let tensor = tensor_bundle(g, e, fb).map_err(InputError::from)?;
    let (me, mf, mc) = (Module::new(g, h, e), Module::new(g, h, fb), Module::new(g, h, &tensor));
    let (xi, xi2) = (random::random_section(g, e, rng), random::random_section(g, e, rng));
    let (eta, eta2) = (random::random_section(g, fb, rng), random::random_section(g, fb, rng));
    let f = random::random_element(g, rng);

    let left = mc.inner_product(&compose_sections(g, h, fb, &xi, &eta), &compose_sections(g, h, fb, &xi2, &eta2));
    let right = mf.inner_product(&eta, &mf.left_action(&me.inner_product(&xi, &xi2), &eta2));
    out.le(&format!("{p}/inner_product"), left.max_abs_diff(&right), tol);
    let jc = compose_sections(g, h, fb, &xi, &eta);
    out.le(&format!("{p}/left_equivariant"), compose_sections(g, h, fb, &me.left_action(&f, &xi), &eta).max_abs_diff(&mc.left_action(&f, &jc)), tol);
    out.le(&format!("{p}/right_equivariant"), compose_sections(g, h, fb, &xi, &mf.right_action(&eta, &f)).max_abs_diff(&mc.right_action(&jc, &f)), tol);

    let zeta = random::random_section(g, e, rng);
    let fe = tensor_bundle(g, fb, e).map_err(InputError::from)?;
    let assoc_l = compose_sections(g, h, e, &compose_sections(g, h, fb, &xi, &eta), &zeta);
    let assoc_r = compose_sections(g, h, &fe, &xi, &compose_sections(g, h, e, &eta, &zeta));
    out.le(&format!("{p}/associative"), assoc_l.max_abs_diff(&assoc_r), tol);

    // pushforward along a gauge change: equivariant, commutes with both actions
    let gauge: Vec<_> = e.dims().iter().map(|&d| random::random_unitary(d, rng, false)).collect();
    let conj = GHilbertBundle::new(g, e.dims().to_vec(), (0..g.n_arrows()).map(|a| &gauge[g.dst(a)] * e.action(a) * gauge[g.src(a)].adjoint()).collect())
        .expect("conjugation keeps shapes");
    let mconj = Module::new(g, h, &conj);
    match BundleMorphism::new(g, e, &conj, gauge.clone(), tol) {
        Ok(phi) => {
            let push_left = phi.pushforward(g, &me.left_action(&f, &xi)).max_abs_diff(&mconj.left_action(&f, &phi.pushforward(g, &xi)));
            let push_right = phi.pushforward(g, &me.right_action(&xi, &f)).max_abs_diff(&mconj.right_action(&phi.pushforward(g, &xi), &f));
            out.le(&format!("{p}/pushforward_actions"), push_left.max(push_right), tol);
            let back = BundleMorphism::new(g, &conj, e, gauge.iter().map(|u| u.adjoint()).collect(), tol).expect("inverse gauge is equivariant");
            let round = phi.then(g, &back).expect("shapes agree");
            let functorial = round.pushforward(g, &xi).max_abs_diff(&back.pushforward(g, &phi.pushforward(g, &xi)));
            out.le(&format!("{p}/pushforward_functorial"), functorial.max(round.pushforward(g, &xi).max_abs_diff(&xi)), tol);
        }
        Err(err) => out.push(&format!("{p}/pushforward_actions"), f64::INFINITY, tol, Some(err.to_string())),
    }
    let bad: Vec<_> = e.dims().iter().map(|&d| random::random_matrix(d, d, rng, false)).collect();
    let raw = BundleMorphism::unchecked(g, e, e, bad.clone()).expect("square blocks");
    let worst = (0..g.n_arrows()).map(|a| raw.equivariance_residual(g, e, e, a)).fold(0.0, f64::max);
    // on line bundles over isotropy every block commutes, so only a clear miss is a test
    if worst > 1e3 * tol {
        let rejected = BundleMorphism::new(g, e, e, bad, tol).is_err();
        out.flag(&format!("{p}/non_equivariant_rejected"), rejected, Some(format!("residual {worst:e}")));
    }
    Ok(())
}

fn sauvageot(inst: &Instance, (name, psi): &(String, GroupoidFunction), opts: &SuiteOptions, rng: &mut ChaCha8Rng, out: &mut Checks) {
    let g = &inst.groupoid;
    let h = &inst.haar;
    let tol = opts.tol.absolute;
    let p = format!("sauvageot[{name}]");
    let report = match dirichlet::sauvageot_verify(g, h, psi, 5, rng, tol) {
        Ok(r) => r,
        Err(e) => return out.push(&p, f64::INFINITY, tol, Some(e.to_string())),
    };
    let scale = 1.0 + psi.max_abs();
    out.le(&format!("{p}/kappa_identity"), report.kappa_residual, tol * scale);
    out.le(&format!("{p}/form_equals_inner_product"), report.form_residual, tol * scale);
    out.le(&format!("{p}/form_equals_kernel_sum"), report.explicit_residual, tol * scale);
    let deficient: Vec<&str> = report.cyclicity.iter().filter(|e| e.rank != e.dim).map(|e| e.arrow.as_str()).collect();
    out.push(
        &format!("{p}/cyclicity"),
        deficient.len() as f64,
        0.0,
        deficient.first().map(|a| format!("evaluations at {a} do not span the fiber")),
    );
    // the opposite sign on the kernel must disagree unless ψ vanishes
    let vanishing = psi.max_abs() <= tol;
    out.push(
        &format!("{p}/opposite_sign_rejected"),
        if vanishing || report.flipped_sign_gap > tol { 0.0 } else { 1.0 },
        0.0,
        Some(format!("gap {:e}", report.flipped_sign_gap)),
    );
    let m = Module::new(g, h, &report.bundle);
    let alg = Algebra::new(g, h);
    let mut leibniz = 0.0f64;
    for _ in 0..5 {
        let (f, k) = (random::random_element(g, rng), random::random_element(g, rng));
        leibniz = leibniz.max(leibniz_residual(&m, &report.cocycle, &f, &k));
    }
    out.le(&format!("{p}/leibniz"), leibniz, tol);
    let fs: Vec<AlgebraElement> = (0..3).map(|_| random::random_element(g, rng)).collect();
    out.margin(&format!("{p}/complete_positivity"), cp_block_margin(&alg, psi, &fs).0, tol * scale);
    let f = random::random_element(g, rng);
    let nf = alg.cstar_norm(&f);
    let growth = SCHOENBERG_TIMES.iter().map(|&t| alg.cstar_norm(&semigroup(psi, &f, t)) - nf).fold(0.0, f64::max);
    out.le(&format!("{p}/semigroup_contraction"), growth.max(0.0), tol);
    let zero = derivation(&alg.unit(), &report.cocycle).max_abs();
    out.le(&format!("{p}/derivation_kills_unit"), zero, tol);
    out.push(&format!("{p}/closability"), 0.0, 0.0, Some(report.closability.to_string()));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{make_standard, GroupTable, StandardKind};
    use crate::io::{generate_random, DocumentBuilder, GeneratorKind};

    fn z2_with(name: &str, values: &[f64]) -> Instance {
        let (g, _) = make_standard(&StandardKind::Group(GroupTable::cyclic(2))).unwrap();
        let f = GroupoidFunction::from_real(&g, values).unwrap();
        Instance::from_document(DocumentBuilder::new(&g).function(name, &f).build()).unwrap()
    }

    #[test]
    fn sauvageot_on_z2() {
        let inst = z2_with("psi", &[0.0, 1.0]);
        let report = run_suite(Command::SauvageotVerify, &[inst], &SuiteOptions::default()).unwrap();
        assert!(report.pass, "{}", report.to_text());
        for c in &report.checks {
            if c.name.contains("identity") || c.name.contains("form_equals") {
                assert!(c.residual <= 1e-12, "{}", c.name);
            }
        }
    }

    #[test]
    fn check_pt_failure_reports_the_eigenvalue() {
        let inst = z2_with("phi", &[1.0, 2.0]);
        let report = run_suite(Command::CheckPt, &[inst], &SuiteOptions::default()).unwrap();
        assert!(!report.pass);
        let spectrum = report.checks.iter().find(|c| c.name.ends_with("spectrum")).unwrap();
        assert!((spectrum.residual - 1.0).abs() < 1e-12);
        assert!(spectrum.detail.as_ref().unwrap().contains("-1e0"));
        assert_eq!(report.exit_code(), 1);
    }

    #[test]
    fn missing_function_is_a_usage_error() {
        let inst = z2_with("phi", &[1.0, 0.0]);
        let err = run_suite(Command::CheckCnt, &[inst], &SuiteOptions::default()).unwrap_err();
        assert_eq!(err.category(), "usage");
    }

    #[test]
    fn all_passes_on_generated_instances() {
        for (kind, size) in [(GeneratorKind::Pair, 3), (GeneratorKind::Transformation, 3), (GeneratorKind::Random, 20), (GeneratorKind::Group, 4)] {
            for seed in 0..3 {
                let inst = Instance::from_document(generate_random(kind, size, seed).unwrap()).unwrap();
                let report = run_suite(Command::All, &[inst], &SuiteOptions { seed, ..Default::default() }).unwrap();
                assert!(report.pass, "{kind:?} {seed}\n{}", report.to_text());
            }
        }
    }

    #[test]
    fn all_matches_individual_commands() {
        let inst = Instance::from_document(generate_random(GeneratorKind::Pair, 3, 5).unwrap()).unwrap();
        let opts = SuiteOptions { seed: 9, ..Default::default() };
        let all = run_suite(Command::All, std::slice::from_ref(&inst), &opts).unwrap();
        let single = run_suite(Command::FunctorVerify, std::slice::from_ref(&inst), &opts).unwrap();
        for c in single.checks.iter().filter(|c| c.name.starts_with("functor")) {
            let twin = all.checks.iter().find(|a| a.name == format!("functor-verify:{}", c.name)).unwrap();
            assert_eq!(twin.residual, c.residual);
        }
    }

    #[test]
    fn reports_are_stable() {
        let docs: Vec<Instance> = (0..2).map(|s| Instance::from_document(generate_random(GeneratorKind::Random, 12, s).unwrap()).unwrap()).collect();
        let opts = SuiteOptions { seed: 4, ..Default::default() };
        let a = run_suite(Command::All, &docs, &opts).unwrap().to_json();
        let b = run_suite(Command::All, &docs, &opts).unwrap().to_json();
        assert_eq!(a, b);
        assert!(a.contains("instance[1]/"));
    }

    #[test]
    fn invalid_groupoid_stops_early() {
        let mut doc = generate_random(GeneratorKind::Pair, 2, 0).unwrap();
        // swap the result of one composition
        let t = doc.groupoid.compose.iter_mut().find(|t| t[0] != t[2] && t[1] != t[2]).unwrap();
        t[2] = t[0].clone();
        let inst = Instance::from_document(doc).unwrap();
        let report = run_suite(Command::All, &[inst], &SuiteOptions::default()).unwrap();
        assert!(!report.pass);
        assert_eq!(report.checks.len(), 2);
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::EVERY {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
    }
}
