use std::path::{Path, PathBuf};
use std::sync::Arc;

use quasiextremal::energy::{direct_density, energy_direct, energy_inverse, ConvexProfile, WeightField};
use quasiextremal::fields::grid::{DomainGrid, DomainKind, StencilOrder};
use quasiextremal::fields::{beltrami, distortion, wirtinger_derivatives, MappingField};
use quasiextremal::hopf::{dbar_residual, hopf_from_wirtinger, l1_mass, mobius_invariance_gap, HopfVariant};
use quasiextremal::maps::random_boundary_identity_map;
use quasiextremal::minimizer::{minimize, stationarity_vs_holomorphy, BumpBasis, MinimizeOptions, MAX_LEVELS};
use quasiextremal::ode::{quasiconformality, surjectivity_diagnosis, ProfileSpec, StepControl};
use quasiextremal::reich_strebel::{pointwise_teich, rs_lower_bounds, rs_sides, uniqueness_verdict, Uniqueness};
use quasiextremal::Error as CoreError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::io::{write_field, write_json, write_table};
use crate::specs::{build_grid, domain_name, parse_domain, parse_mobius_list, parse_polynomials, MapSpec, Polynomial};

/// Files written by a command, a few summary lines for stdout and, when a
/// verifier failed, the error deciding the exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<String>,
    pub summary: Vec<String>,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn file(&mut self, p: &Path) {
        self.files.push(p.display().to_string());
    }
    fn line(&mut self, s: impl Into<String>) {
        self.summary.push(s.into());
    }
}

const MAP_KEYS: [&str; 5] = ["domain", "grid", "map", "seed", "scale"];
const DEFAULT_GRID: usize = 128;
const DEFAULT_PSI: &str = "power:2";

pub const COMMANDS: [&str; 7] = ["ode", "map", "energy", "hopf", "verify", "minimize", "export"];

pub fn allowed_keys(command: &str, p: &Params) -> Vec<&'static str> {
    let with_map = |extra: &[&'static str]| MAP_KEYS.iter().chain(extra).copied().collect::<Vec<_>>();
    match command {
        "ode" => vec!["profile", "psi", "eta", "lambda", "ymax", "tol", "h0", "max_steps"],
        "map" => with_map(&[]),
        "energy" => with_map(&["psi", "weight", "form"]),
        "hopf" => with_map(&["psi", "weight", "variant", "levels"]),
        "export" => with_map(&["psi", "weight"]),
        "minimize" => vec![
            "grid", "map", "seed", "scale", "boundary", "psi", "weight", "grad_tol", "j_floor", "max_iter", "levels",
            "t_max",
        ],
        "verify" => match p.str("battery").unwrap_or("rs") {
            "rs" => vec!["battery", "grid", "seed", "map", "scale", "phi", "count"],
            "pointwise" => vec!["battery", "grid", "seed", "map", "map2", "scale", "phi"],
            "gap" => vec!["battery", "grid", "seed", "map", "map2", "scale", "psi", "weight"],
            "invariance" => vec!["battery", "grid", "seed", "map", "scale", "psi", "mobius", "tol"],
            _ => vec!["battery"],
        },
        _ => vec![],
    }
}

pub fn run(command: &str, p: &Params, out: &Path) -> CliResult<Outcome> {
    match command {
        "ode" => ode(p, out),
        "map" => map(p, out),
        "energy" => energy(p, out),
        "hopf" => hopf(p, out),
        "verify" => verify(p, out),
        "minimize" => minimize_cmd(p, out),
        "export" => export(p, out),
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}

struct MapInput {
    grid: Arc<DomainGrid>,
    spec: MapSpec,
    spec_text: String,
    seed: u64,
    scale: f64,
}

impl MapInput {
    fn read(p: &Params, default_map: &str, domain: Option<DomainKind>) -> CliResult<Self> {
        let kind = match domain {
            Some(k) => k,
            None => p.parse_with("domain", "disk", parse_domain)?,
        };
        let n = p.get_or("grid", DEFAULT_GRID)?;
        let spec_text = p.str_or("map", default_map).to_string();
        let spec = p.parse_with("map", default_map, MapSpec::parse)?;
        let seed = p.get_or("seed", 0u64)?;
        let scale = p.get_or("scale", 1.0f64)?;
        if !scale.is_finite() {
            return Err(CliError::Usage("scale must be finite".into()));
        }
        Ok(MapInput {
            grid: build_grid(kind, n)?,
            spec,
            spec_text,
            seed,
            scale,
        })
    }

    fn build(&self) -> CliResult<MappingField> {
        self.spec.build(&self.grid, self.seed, self.scale)
    }

    fn build_on(&self, n: usize) -> CliResult<MappingField> {
        let g = build_grid(self.grid.kind(), n)?;
        self.spec.build(&g, self.seed, self.scale)
    }

    fn describe(&self) -> Value {
        json!({
            "map": self.spec_text,
            "domain": domain_name(&self.grid.kind()),
            "grid": self.grid.n(),
            "seed": self.seed,
            "scale": self.scale,
        })
    }
}

fn psi_of(p: &Params) -> CliResult<ConvexProfile> {
    p.parse_with("psi", DEFAULT_PSI, |s| Ok(ConvexProfile::parse(s)?))
}

fn weight_of(p: &Params) -> CliResult<WeightField> {
    p.parse_with("weight", "unit", |s| Ok(WeightField::parse(s)?))
}

fn usize_list(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad integer '{}' in list", t.trim())))
        })
        .collect()
}

fn ode(p: &Params, out: &Path) -> CliResult<Outcome> {
    let parts = ["psi", "eta", "lambda", "ymax"];
    let spec = match p.str("profile") {
        Some(_) => {
            if let Some(k) = parts.iter().find(|k| p.str(k).is_some()) {
                return Err(CliError::Usage(format!("'{k}' cannot be combined with 'profile'")));
            }
            p.parse_with("profile", "", |s| Ok(ProfileSpec::parse(s)?))?
        }
        None => {
            let mut spec = ProfileSpec {
                psi: psi_of(p)?,
                ..ProfileSpec::default()
            };
            if p.str("eta").is_some() {
                spec.eta = p.parse_with("eta", "unit", |s| Ok(WeightField::parse(s)?))?;
            }
            spec.lambda = p.get_or("lambda", spec.lambda)?;
            spec.y_max = p.get_or("ymax", spec.y_max)?;
            spec
        }
    };
    let defaults = StepControl::default();
    let control = StepControl {
        tol: p.get_or("tol", defaults.tol)?,
        h0: p.get_or("h0", defaults.h0)?,
        max_steps: p.get_or("max_steps", defaults.max_steps)?,
    };
    let (profile, exhausted) = match spec.solve(control) {
        Ok(prof) => (prof, None),
        Err(CoreError::RangeExhausted { y, u, partial }) => (*partial, Some((y, u))),
        Err(e) => return Err(e.into()),
    };

    let mut o = Outcome::default();
    let table = out.join("ode_profile.csv");
    let k = profile.distortions();
    let res = profile.residuals();
    let rows = (0..profile.ys.len()).map(|i| (profile.ys[i], profile.us[i], profile.ups[i], k[i], res[i]));
    write_table(&table, &["y", "u", "u_prime", "k", "residual"], rows)?;
    o.file(&table);

    let as_json = |r: Result<Value, CoreError>| r.unwrap_or_else(|e| json!({ "error": e.to_string() }));
    let surj = surjectivity_diagnosis(&profile);
    let qc = quasiconformality(&profile);
    if let Ok(s) = &surj {
        o.line(format!("surjectivity: {:?}", s.verdict));
    }
    if let Ok(q) = &qc {
        o.line(format!("quasiconformal: {}", q.quasiconformal));
    }
    let verdict = json!({
        "spec": spec.to_spec_string(),
        "branch": profile.branch,
        "m_limit": profile.m,
        "samples": profile.ys.len(),
        "y_end": profile.y_end(),
        "u_end": profile.u_end(),
        "blowup_at": profile.blowup_at,
        "exhausted_at": exhausted.map(|(y, u)| json!({ "y": y, "u": u })),
        "max_residual": profile.max_residual(),
        "surjectivity": as_json(surj.map(|r| json!(r))),
        "quasiconformality": as_json(qc.map(|r| json!(r))),
    });
    let path = out.join("ode.json");
    write_json(&path, &verdict)?;
    o.file(&path);
    if let Some((y, _)) = exhausted {
        o.line(format!("range exhausted at y = {y:.6e}; partial profile written"));
    }
    Ok(o)
}

fn map(p: &Params, out: &Path) -> CliResult<Outcome> {
    let input = MapInput::read(p, "identity", None)?;
    let f = input.build()?;
    let mut o = Outcome {
        files: write_field(out, "map", "mapping", f.grid(), f.values())?,
        ..Outcome::default()
    };
    let w = wirtinger_derivatives(&f, StencilOrder::Fourth);
    o.line(format!("min J: {:.6e}", w.min_jacobian()));
    Ok(o)
}

fn energy(p: &Params, out: &Path) -> CliResult<Outcome> {
    let input = MapInput::read(p, "identity", None)?;
    let psi = psi_of(p)?;
    let weight = weight_of(p)?;
    let form = p.str_or("form", "both");
    let (direct, inverse) = match form {
        "direct" => (true, false),
        "inverse" => (false, true),
        "both" => (true, true),
        other => {
            return Err(CliError::Usage(format!(
                "form must be direct, inverse or both, got '{other}'"
            )))
        }
    };
    let f = input.build()?;
    let mut o = Outcome::default();
    let d = if direct {
        Some(energy_direct(&f, &psi, &weight)?)
    } else {
        None
    };
    let i = if inverse {
        Some(energy_inverse(&f, &psi, &weight)?)
    } else {
        None
    };
    if let Some(r) = &d {
        o.line(format!("direct energy: {:.12e}", r.value));
    }
    if let Some(r) = &i {
        o.line(format!("inverse energy: {:.12e}", r.value));
    }
    let doc = json!({
        "input": input.describe(),
        "psi": psi.to_string(),
        "weight": weight.name(),
        "direct": d,
        "inverse": i,
    });
    let path = out.join("energy.json");
    write_json(&path, &doc)?;
    o.file(&path);
    Ok(o)
}

fn hopf(p: &Params, out: &Path) -> CliResult<Outcome> {
    let input = MapInput::read(p, "identity", None)?;
    let psi = psi_of(p)?;
    let weight = weight_of(p)?;
    let variant = match p.str_or("variant", "conjugated") {
        "conjugated" => HopfVariant::Conjugated,
        "unconjugated" => HopfVariant::Unconjugated,
        other => {
            return Err(CliError::Usage(format!(
                "variant must be conjugated or unconjugated, got '{other}'"
            )))
        }
    };
    let levels = match p.str_or("levels", "64,128,256") {
        "none" => None,
        s => Some(usize_list(s)?),
    };
    let differential = |f: &MappingField| {
        let w = wirtinger_derivatives(f, StencilOrder::Fourth);
        hopf_from_wirtinger(f, &w, &psi, &weight, variant)
    };

    let f = input.build()?;
    let phi = differential(&f)?;
    let dbar = dbar_residual(&phi)?;
    let mass = match &levels {
        Some(l) => Some(l1_mass(l, |n| {
            let g = input.build_on(n).map_err(|e| CoreError::Data(e.to_string()))?;
            differential(&g)
        })?),
        None => None,
    };

    let mut o = Outcome {
        files: write_field(out, "hopf", "differential", phi.grid(), &phi.phi)?,
        ..Outcome::default()
    };
    o.line(format!(
        "max dbar: {:.6e} (holomorphic: {})",
        dbar.max_dbar, dbar.holomorphic
    ));
    if let Some(m) = &mass {
        o.line(format!("L1 mass {:?}: {:?}", m.masses, m.verdict));
    }
    let doc = json!({
        "input": input.describe(),
        "psi": psi.to_string(),
        "weight": weight.name(),
        "variant": variant,
        "max_abs": phi.max_abs(),
        "l1": phi.l1_norm(),
        "max_dbar": dbar.max_dbar,
        "mean_value_gap": dbar.mean_value_gap,
        "dbar": dbar,
        "l1_levels": mass.as_ref().map(|m| &m.levels),
        "l1_masses": mass.as_ref().map(|m| &m.masses),
        "verdict": mass.as_ref().map(|m| m.verdict),
        "mass": mass,
    });
    let path = out.join("hopf_report.json");
    write_json(&path, &doc)?;
    o.file(&path);
    Ok(o)
}

fn verify(p: &Params, out: &Path) -> CliResult<Outcome> {
    let battery = p.str_or("battery", "rs");
    let (reports, failure) = match battery {
        "rs" => verify_rs(p)?,
        "pointwise" => verify_pointwise(p)?,
        "gap" => verify_gap(p)?,
        "invariance" => verify_invariance(p)?,
        other => {
            return Err(CliError::Usage(format!(
                "battery must be rs, pointwise, gap or invariance, got '{other}'"
            )))
        }
    };
    let mut o = Outcome::default();
    let path = out.join(format!("verify_{battery}.json"));
    write_json(&path, &reports)?;
    o.file(&path);
    o.line(format!("{battery}: {} report(s)", reports.len()));
    match &failure {
        None => o.line("all checks passed"),
        Some(e) => o.line(e.to_string()),
    }
    o.failure = failure;
    Ok(o)
}

/// Fold a per-case result into the battery outcome. Data errors outrank
/// verdict failures.
fn record(failure: &mut Option<CliError>, new: CliError) {
    let rank = |e: &CliError| e.exit_code();
    match failure {
        Some(old) if rank(old) >= rank(&new) => {}
        _ => *failure = Some(new),
    }
}

type Battery = (Vec<Value>, Option<CliError>);

fn verify_rs(p: &Params) -> CliResult<Battery> {
    let n = p.get_or("grid", DEFAULT_GRID)?;
    let grid = build_grid(DomainKind::UnitDisk, n)?;
    let seed = p.get_or("seed", 0u64)?;
    let scale = p.get_or("scale", 1.0f64)?;
    let phis = p.parse_with("phi", "1,w,w2,1+w3", parse_polynomials)?;
    let maps: Vec<(String, MappingField)> = match p.str("map") {
        Some(text) => {
            if p.str("count").is_some() {
                return Err(CliError::Usage(
                    "'count' applies only to the random battery without 'map'".into(),
                ));
            }
            let spec = p.parse_with("map", "", MapSpec::parse)?;
            vec![(text.to_string(), spec.build(&grid, seed, scale)?)]
        }
        None => {
            let count: usize = p.get_or("count", 200)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|i| {
                    let m = random_boundary_identity_map(&mut rng, &grid).scaled(scale);
                    Ok((
                        format!("random#{i}"),
                        quasiextremal::maps::AnalyticMap::field(&m, &grid)?,
                    ))
                })
                .collect::<CliResult<_>>()?
        }
    };
    let fields: Vec<_> = phis.iter().map(|q| q.field(&grid)).collect();
    let mut reports = Vec::new();
    let mut failure = None;
    for (name, f) in &maps {
        for (q, phi) in phis.iter().zip(&fields) {
            let checked = rs_sides(f, phi).and_then(|main| Ok((main, rs_lower_bounds(f, phi)?)));
            let entry = match checked {
                Ok((main, (b2, b3))) => {
                    let holds = main.holds && b2.holds && b3.holds;
                    if !holds {
                        record(
                            &mut failure,
                            CliError::Verdict(format!("inequality failed for {name}, phi = {}", q.text)),
                        );
                    }
                    json!({ "map": name, "phi": q.text, "holds": holds, "reports": [main, b2, b3] })
                }
                Err(e) => {
                    record(&mut failure, CliError::Data(format!("{name}, phi = {}: {e}", q.text)));
                    json!({ "map": name, "phi": q.text, "holds": false, "hypothesis_violation": e.to_string() })
                }
            };
            reports.push(entry);
        }
    }
    Ok((reports, failure))
}

fn verify_pointwise(p: &Params) -> CliResult<Battery> {
    let f_in = MapInput::read(p, "random", Some(DomainKind::UnitDisk))?;
    let g_spec = p.parse_with("map2", "identity", MapSpec::parse)?;
    let q = p.parse_with("phi", "1", Polynomial::parse)?;
    let f = f_in.build()?;
    let g = g_spec.build(&f_in.grid, f_in.seed, 1.0)?;
    let phi = q.field(&f_in.grid);
    let mut failure = None;
    let entry = match pointwise_teich(&f, &g, &phi) {
        Ok(r) => {
            if !r.inequality.holds {
                record(&mut failure, CliError::Verdict("pointwise inequality failed".into()));
            }
            json!({ "input": f_in.describe(), "map2": p.str_or("map2", "identity"), "phi": q.text, "holds": r.inequality.holds, "report": r })
        }
        Err(e) => {
            record(&mut failure, CliError::Data(e.to_string()));
            json!({ "input": f_in.describe(), "phi": q.text, "holds": false, "hypothesis_violation": e.to_string() })
        }
    };
    Ok((vec![entry], failure))
}

fn verify_gap(p: &Params) -> CliResult<Battery> {
    let h_in = MapInput::read(p, "identity", Some(DomainKind::UnitDisk))?;
    let psi = psi_of(p)?;
    let weight = weight_of(p)?;
    let h = h_in.build()?;
    let big_h = match p.str("map2") {
        Some(_) => p
            .parse_with("map2", "", MapSpec::parse)?
            .build(&h_in.grid, h_in.seed, 1.0)?,
        None => h.clone(),
    };
    let r = uniqueness_verdict(&h, &big_h, &psi, &weight)?;
    let mut failure = None;
    if !r.gap.bound_holds {
        record(&mut failure, CliError::Verdict("energy-gap lower bound failed".into()));
    }
    match r.verdict {
        Uniqueness::Inconsistent => record(&mut failure, CliError::Verdict("zero gap without conformal ξ".into())),
        Uniqueness::HypothesesUnmet => record(
            &mut failure,
            CliError::Verdict("hypotheses unmet: Φ_h is not certified holomorphic".into()),
        ),
        _ => {}
    }
    let entry = json!({
        "input": h_in.describe(),
        "map2": p.str("map2"),
        "psi": psi.to_string(),
        "weight": weight.name(),
        "slack": r.gap.gap - (r.gap.term1 + r.gap.term2),
        "verdict": r.verdict,
        "report": r.gap,
    });
    Ok((vec![entry], failure))
}

fn verify_invariance(p: &Params) -> CliResult<Battery> {
    let h_in = MapInput::read(p, "shear:0.1", Some(DomainKind::UnitDisk))?;
    let psi = psi_of(p)?;
    let tol: f64 = p.get_or("tol", 1e-4)?;
    let list = p.parse_with("mobius", "0.3,0,0.7;-0.2,0.4,-1.1;0,0.5,0", parse_mobius_list)?;
    let h = h_in.build()?;
    let mut reports = Vec::new();
    let mut failure = None;
    for m in &list {
        let entry = match mobius_invariance_gap(&h, m, &psi) {
            Ok(gap) => {
                let holds = gap <= tol;
                if !holds {
                    record(
                        &mut failure,
                        CliError::Verdict(format!("Möbius gap {gap:.3e} exceeds {tol:.1e}")),
                    );
                }
                json!({ "a": [m.a.re, m.a.im], "theta": m.theta, "gap": gap, "tol": tol, "holds": holds })
            }
            Err(e) => {
                record(&mut failure, CliError::Data(e.to_string()));
                json!({ "a": [m.a.re, m.a.im], "theta": m.theta, "holds": false, "error": e.to_string() })
            }
        };
        reports.push(entry);
    }
    Ok((reports, failure))
}

fn minimize_cmd(p: &Params, out: &Path) -> CliResult<Outcome> {
    let start_in = MapInput::read(p, "identity", Some(DomainKind::UnitDisk))?;
    let psi = psi_of(p)?;
    let weight = weight_of(p)?;
    let defaults = MinimizeOptions::default();
    let levels = match p.str_or("levels", "auto") {
        "auto" => None,
        _ => {
            let l: usize = p.get_or("levels", 0)?;
            if !(1..=MAX_LEVELS).contains(&l) {
                return Err(CliError::Usage(format!("levels must be auto or 1..={MAX_LEVELS}")));
            }
            Some(l)
        }
    };
    let options = MinimizeOptions {
        grad_tol: p.get_or("grad_tol", defaults.grad_tol)?,
        j_floor: p.get_or("j_floor", defaults.j_floor)?,
        max_iter: p.get_or("max_iter", defaults.max_iter)?,
        levels,
        t_max: p.get_or("t_max", defaults.t_max)?,
    };
    let start = start_in.build()?;
    let boundary = match p.str("boundary") {
        Some(_) => {
            let b = p
                .parse_with("boundary", "", MapSpec::parse)?
                .build(&start_in.grid, start_in.seed, 1.0)?;
            b.boundary_trace().to_vec()
        }
        None => start.boundary_trace().to_vec(),
    };
    let (h, trace) = minimize(&boundary, &start, &psi, &weight, &options)?;
    let levels_used = options.levels.unwrap_or_else(|| BumpBasis::grid_levels(h.grid()));
    let basis = BumpBasis::for_grid(h.grid(), levels_used)?;
    let stationarity = stationarity_vs_holomorphy(&h, &psi, &weight, &basis, options.grad_tol)?;

    let mut o = Outcome {
        files: write_field(out, "minimize_field", "mapping", h.grid(), h.values())?,
        ..Outcome::default()
    };
    let trace_path = out.join("minimize_trace.csv");
    let rows = trace
        .sweeps
        .iter()
        .map(|s| (s.iter, s.energy, s.min_j, s.dbar, s.max_derivative, s.accepted));
    write_table(
        &trace_path,
        &["iter", "energy", "minJ", "dbar", "max_derivative", "accepted"],
        rows,
    )?;
    o.file(&trace_path);
    o.line(format!(
        "{:?} after {} sweep(s): energy {:.12e} -> {:.12e}",
        trace.termination,
        trace.sweeps.len(),
        trace.initial_energy,
        trace.final_energy()
    ));
    o.line(format!(
        "stationary: {}, holomorphic: {}",
        stationarity.stationary, stationarity.holomorphic
    ));
    let doc = json!({
        "input": start_in.describe(),
        "psi": psi.to_string(),
        "weight": weight.name(),
        "options": options,
        "levels": levels_used,
        "basis_size": basis.len(),
        "termination": trace.termination,
        "reason": trace.reason,
        "initial_energy": trace.initial_energy,
        "final_energy": trace.final_energy(),
        "initial_dbar": trace.initial_dbar,
        "sweeps": trace.sweeps.len(),
        "accepted_steps": trace.steps.len(),
        "sup_distance_to_identity": h.sup_distance_to_identity(),
        "stationarity": stationarity,
    });
    let path = out.join("minimize.json");
    write_json(&path, &doc)?;
    o.file(&path);
    Ok(o)
}

fn export(p: &Params, out: &Path) -> CliResult<Outcome> {
    let input = MapInput::read(p, "identity", None)?;
    let psi = psi_of(p)?;
    let weight = weight_of(p)?;
    let f = input.build()?;
    let w = wirtinger_derivatives(&f, StencilOrder::Fourth);
    let k = distortion(&w);
    let mu = beltrami(&w);
    let density = direct_density(&w, &psi, &weight);
    let phi = hopf_from_wirtinger(&f, &w, &psi, &weight, HopfVariant::Conjugated);
    let nan = quasiextremal::Complex64::new(f64::NAN, f64::NAN);
    let phi_values = match &phi {
        Ok(q) => q.phi.clone(),
        Err(_) => vec![nan; f.grid().len()],
    };
    let g = f.grid();
    let rows = g.nodes().iter().map(|&n| {
        let z = g.point(n);
        let v = f.value(n);
        let m = if mu.valid[n] { mu.mu[n].norm() } else { f64::NAN };
        (
            n,
            z.re,
            z.im,
            v.re,
            v.im,
            w.jac[n],
            k.k[n],
            m,
            density.density[n],
            weight.eval(v),
            phi_values[n].re,
            phi_values[n].im,
        )
    });
    let path: PathBuf = out.join("export.csv");
    let columns = [
        "index",
        "x",
        "y",
        "re",
        "im",
        "jacobian",
        "distortion",
        "mu_abs",
        "density",
        "weight",
        "phi_re",
        "phi_im",
    ];
    write_table(&path, &columns, rows)?;
    let mut o = Outcome::default();
    o.file(&path);
    if let Err(e) = phi {
        o.line(format!("differential unavailable: {e}"));
    }
    Ok(o)
}
