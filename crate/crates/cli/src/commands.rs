//! One function per subcommand. Each reads its keys first, then computes,
//! then writes, so every output header carries the complete resolved config.

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use qplab::cocycles::{
    bloch_lift, growth_exponent, lyapunov_ladder, model_x, strip_growth_scan, Cocycle,
};
use qplab::diophantine::{beta_estimate, dc_check, phase_ext, resonances, small_divisor_profile, ExtReal};
use qplab::operators::{
    block_eigen, localization_profile, median, truncate, uniformity_xi, BlockKind, OperatorConfig, Window, WindowVector,
};
use qplab::spectral::{
    duality_gap, holder_from_measure, ids_curve, measure_interval, mu_x, pk_epsilon_pipeline, psi, spectrum_energies,
    thouless_residual, truncation_eigenvalues, truncation_measure, weyl_m_plus, MeasureApprox, MAX_DEPTH,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{CliError, CliResult, Config, Context};
use crate::model::{self, COMMON_KEYS, OPERATOR_KEYS};
use crate::output::{Cell, Run, Table};

pub type Handler = fn(&Config, &mut Run) -> CliResult<()>;

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    /// keys beyond the common ones
    pub keys: &'static [&'static str],
    pub operator: bool,
    pub run: Handler,
}

pub const COMMANDS: &[Command] = &[
    Command { name: "cf", about: "continued fraction, convergents and ‖q_n α‖", keys: &[], operator: false, run: cf },
    Command { name: "beta", about: "finite-depth β(α) profile and optional DC scan", keys: &["dc_kappa", "dc_tau", "dc_kmax"], operator: false, run: beta },
    Command { name: "divisors", about: "small-divisor profile ‖2θ ± kα‖", keys: &["phase", "k_max", "beta"], operator: false, run: divisors },
    Command { name: "resonances", about: "ε₀-resonances of a phase", keys: &["phase", "eps0", "k_max", "digits"], operator: false, run: resonance_list },
    Command { name: "spectrum", about: "eigenvalues of a truncation", keys: &["n", "phases", "kind", "export_block"], operator: true, run: spectrum },
    Command { name: "ids", about: "integrated density of states by eigenvalue counting", keys: &["n", "phase_avg", "energies"], operator: true, run: ids },
    Command { name: "measure", about: "interval masses of μ_x = μ^{e₋₁} + μ^{e₀}", keys: &["n", "energies", "eps", "atoms", "vector"], operator: true, run: measure },
    Command { name: "holder", about: "μ_x(E−ε, E+ε)/ε^{1/2} scan", keys: &["n", "energies", "energy_count", "trim", "eps", "vector"], operator: true, run: holder },
    Command { name: "lyapunov", about: "finite-n Lyapunov exponents on a phase grid", keys: &["energies", "ns", "grid"], operator: true, run: lyapunov },
    Command { name: "strip-growth", about: "(1/n) sup ln‖A_n(x+iε)‖ over a strip", keys: &["energy", "eta", "ns", "strip_points", "phases"], operator: true, run: strip_growth },
    Command { name: "weyl", about: "half-line Weyl function m⁺ by continued fraction", keys: &["re", "im", "tol"], operator: true, run: weyl },
    Command { name: "pk-scan", about: "P_(k) ladder and ε_k pipeline", keys: &["energy", "x", "k_max", "tol"], operator: true, run: pk_scan },
    Command { name: "duality", about: "spectra of H and its dual compared", keys: &["n", "phases"], operator: true, run: duality },
    Command { name: "thouless", about: "Thouless formula residual", keys: &["energies", "n", "n_l", "phase_avg", "grid"], operator: true, run: thouless },
    Command { name: "uniformity", about: "ξ-uniformity of a phase set", keys: &["thetas", "samples", "seed", "grid"], operator: false, run: uniformity },
    Command { name: "localize", about: "decay of dual eigenvectors between resonances", keys: &["thetas", "samples", "seed", "n_trunc", "eps0", "eps1"], operator: true, run: localize },
    Command { name: "bloch-defect", about: "Bloch-wave lift of a dual eigenvector and its defect", keys: &["theta", "energy", "half_width", "lifts", "eta", "strip_points", "phases"], operator: true, run: bloch_defect },
    Command { name: "model-x", about: "the X_k sums of the upper-triangular model cocycle", keys: &["theta", "r", "t_hat_re", "t_hat_im", "ks", "x"], operator: false, run: model_x_cmd },
];

pub fn find(name: &str) -> Option<&'static Command> {
    COMMANDS.iter().find(|c| c.name == name)
}

pub fn allowed_keys(c: &Command) -> BTreeSet<&'static str> {
    let mut s: BTreeSet<&str> = COMMON_KEYS.iter().chain(c.keys).copied().collect();
    if c.operator {
        s.extend(OPERATOR_KEYS);
    }
    s
}

/// Validates keys, runs the command into `out_dir` and writes the manifest.
pub fn execute(cmd: &Command, cfg: &Config, out_dir: &Path) -> CliResult<()> {
    cfg.restrict(&allowed_keys(cmd))?;
    let precision = model::precision(cfg)?;
    let mut run = Run::new(cmd.name, out_dir, precision)?;
    if let Some(t) = cfg.peek("threads") {
        run.warn(format!("threads = {t} requested; computations are sequential and the setting has no effect"));
    }
    (cmd.run)(cfg, &mut run)?;
    run.finish(cfg)
}

fn ext_json(x: &ExtReal, digits: usize) -> Value {
    json!({ "value": x.to_decimal(digits), "radius": x.radius_string() })
}

fn default_digits(cf: &qplab::diophantine::CfExpansion) -> usize {
    ((cf.precision() as f64 * 0.30103) as usize).min(80)
}

fn cf(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let cf = run.stage("expand", || model::frequency(cfg, 30))?;
    let digits = default_digits(&cf);
    let mut t = Table::new(&[("n", "1"), ("a_n", "1"), ("p_n", "1"), ("q_n", "1"), ("q_n_alpha_dist", "1")]);
    for n in 0..=cf.depth() {
        let a: Cell = if n == 0 { Cell::Empty } else { Cell::S(cf.quotients()[n - 1].to_string()) };
        let g: Cell = cf.gaps().get(n).map(|g| g.to_f64()).into();
        t.push(vec![n.into(), a, cf.p(n).to_string().into(), cf.q(n).to_string().into(), g]);
    }
    t.expect_rows(cf.depth() + 1, "convergent table")?;
    let verified = cf.verify();
    if let Err(m) = &verified {
        run.warn(format!("bracket verification failed: {m}"));
    }
    let body = json!({
        "alpha": ext_json(cf.alpha(), digits),
        "depth": cf.depth(),
        "working_bits": cf.working_bits(),
        "a": cf.quotients().iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "p": cf.numerators().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "q": cf.denominators().iter().map(|q| q.to_string()).collect::<Vec<_>>(),
        "q_alpha_dist": cf.gaps().iter().map(|g| ext_json(g, digits)).collect::<Vec<_>>(),
        "verified": verified.is_ok(),
    });
    run.csv("cf.csv", &t, cfg)?;
    run.json("cf.json", body, cfg)
}

fn beta(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let cf = model::frequency(cfg, 60)?;
    let dc = match cfg.raw("dc_kappa") {
        Some(_) => Some((cfg.positive_f64("dc_kappa", 0.1)?, cfg.positive_f64("dc_tau", 2.0)?, cfg.count("dc_kmax", 10_000)?)),
        None => None,
    };
    let b = run.stage("beta", || beta_estimate(&cf).ctx("beta"))?;
    let mut t = Table::new(&[("n", "1"), ("ln_q_next_over_q", "1"), ("tail_sup", "1")]);
    for (n, (x, s)) in b.terms.iter().zip(&b.tail_sup).enumerate() {
        t.push(vec![n.into(), (*x).into(), (*s).into()]);
    }
    t.expect_rows(b.depth_used, "beta table")?;
    let mut body = json!({ "beta_hat": b.beta_hat, "sup_all": b.sup_all, "depth_used": b.depth_used });
    if let Some((kappa, tau, k)) = dc {
        let r = run.stage("dc", || dc_check(&cf, kappa, tau, k as i64).ctx("dc_check"))?;
        body["dc"] = json!({ "kappa": kappa, "tau": tau, "k_max": k, "holds": r.holds, "witness": r.witness, "witness_value": r.witness_value });
    }
    run.csv("beta.csv", &t, cfg)?;
    run.json("beta.json", body, cfg)
}

fn divisors(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let cf = model::frequency(cfg, 60)?;
    let theta = cfg.f64_or("phase", 0.0)?;
    let k_max = cfg.count("k_max", 1000)?;
    let beta = match cfg.raw("beta") {
        Some(_) => Some(cfg.f64_or("beta", 0.0)?),
        None => None,
    };
    let p = run.stage("profile", || small_divisor_profile(&cf, theta, k_max as i64, beta).ctx("divisors"))?;
    let mut t = Table::new(&[("k", "1"), ("k_alpha_dist", "1"), ("minus", "1"), ("plus", "1")]);
    for r in &p.rows {
        t.push(vec![r.k.into(), r.k_alpha.into(), r.minus.into(), r.plus.into()]);
    }
    t.expect_rows(k_max, "divisor table")?;
    run.csv("divisors.csv", &t, cfg)?;
    run.json("divisors.json", json!({ "beta_hat": p.beta_hat, "c_fit": p.c_fit, "c_witness": p.c_witness }), cfg)
}

fn resonance_list(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let cf = model::frequency(cfg, 60)?;
    let theta = cfg.f64_or("phase", 0.0)?;
    let eps0 = cfg.positive_f64("eps0", 0.1)?;
    let k_max = cfg.count("k_max", 1000)?;
    let digits = cfg.count("digits", 30)?;
    let th = phase_ext(&cf, theta);
    let r = run.stage("scan", || resonances(&th, &cf, eps0, k_max as i64).ctx("resonances"))?;
    let mut t = Table::new(&[("k", "1"), ("gap", "1"), ("gap_decimal", "1"), ("gap_radius", "1")]);
    for e in &r.entries {
        t.push(vec![e.k.into(), e.gap.to_f64().into(), e.gap.to_decimal(digits).into(), e.gap.radius_f64().into()]);
    }
    run.csv("resonances.csv", &t, cfg)?;
    run.json("resonances.json", json!({ "theta": ext_json(&r.theta, digits), "ks": r.ks(), "count": r.entries.len() }), cfg)
}

fn block_kind(cfg: &Config) -> CliResult<BlockKind> {
    match cfg.str_or("kind", "schrodinger").as_str() {
        "schrodinger" | "direct" => Ok(BlockKind::Schrodinger),
        "dual" => Ok(BlockKind::Dual),
        "dual-scaled" => Ok(BlockKind::DualScaled),
        other => Err(CliError::invalid("kind", format!("expected schrodinger, dual or dual-scaled, got `{other}`"))),
    }
}

fn spectrum(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 1.0)?;
    let n = cfg.count("n", 500)?;
    let phases = cfg.count("phases", 1)?;
    let kind = block_kind(cfg)?;
    let export = cfg.bool_or("export_block", false)?;
    let w = Window::new(0, n as i64 - 1).ctx("window")?;
    let mut t = Table::new(&[("phase", "1"), ("index", "1"), ("E", "energy")]);
    let mut first_block = None;
    run.stage("eigensolve", || {
        for j in 0..phases {
            let x = op.phase + j as f64 / phases as f64;
            let ev = match kind {
                BlockKind::Schrodinger if !export => truncation_eigenvalues(&op, x, n).ctx("spectrum")?,
                _ => {
                    let b = truncate(&op.with_phase(x), &w, kind).ctx("truncate")?;
                    let (vals, _) = block_eigen(&b);
                    if j == 0 {
                        first_block = Some(b);
                    }
                    vals
                }
            };
            for (i, e) in ev.iter().enumerate() {
                t.push(vec![x.into(), i.into(), (*e).into()]);
            }
        }
        Ok(())
    })?;
    t.expect_rows(n * phases, "spectrum")?;
    run.csv("spectrum.csv", &t, cfg)?;
    if export {
        let b = first_block.expect("block kept for export");
        let mut bytes = Vec::with_capacity(16 * n * n);
        for z in b.matrix.iter() {
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
        run.binary("block.bin", &bytes)?;
        let meta = json!({
            "kind": kind.name(),
            "window": [w.x1, w.x2],
            "rows": b.matrix.nrows(),
            "cols": b.matrix.ncols(),
            "layout": "column-major complex128 little-endian (re, im)",
            "lambda": op.lambda,
            "alpha": op.alpha(),
            "phase": op.phase,
        });
        run.json("block.json", meta, cfg)?;
    }
    Ok(())
}

fn ids(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 1.0)?;
    let n = cfg.count("n", 1000)?;
    let pa = cfg.count("phase_avg", 4)?;
    let energies = cfg.grid("energies", "lin:-3:3:61")?;
    let v = run.stage("count", || ids_curve(&op, &energies, n, pa).ctx("ids"))?;
    let mut t = Table::new(&[("E", "energy"), ("ids", "1")]);
    for (e, x) in energies.iter().zip(&v) {
        t.push(vec![(*e).into(), (*x).into()]);
    }
    t.expect_rows(energies.len(), "ids")?;
    run.csv("ids.csv", &t, cfg)
}

/// `vector = x` is μ_x = μ^{e₋₁} + μ^{e₀}; `vector = e0` is μ^{e₀} alone.
fn spectral_measure(cfg: &Config, op: &OperatorConfig, n: i64) -> CliResult<MeasureApprox> {
    match cfg.str_or("vector", "x").as_str() {
        "x" => mu_x(op, n).ctx("measure"),
        "e0" => truncation_measure(op, &[(0, Complex64::new(1.0, 0.0))], n).ctx("measure"),
        other => Err(CliError::invalid("vector", format!("expected x or e0, got `{other}`"))),
    }
}

fn measure(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 1.0)?;
    let n = cfg.count("n", 1000)? as i64;
    let energies = cfg.grid("energies", "lin:-2:2:41")?;
    let eps = cfg.grid("eps", "0.01")?;
    let atoms = cfg.bool_or("atoms", false)?;
    if eps.iter().any(|&e| e <= 0.0) {
        return Err(CliError::invalid("eps", "every ε must be positive"));
    }
    let mu = run.stage("measure", || spectral_measure(cfg, &op, n))?;
    let mut t = Table::new(&[("E", "energy"), ("eps", "energy"), ("mu", "1"), ("below_resolution", "1")]);
    let mut below = 0;
    for &e in &energies {
        for &s in &eps {
            let m = measure_interval(&mu, e, s).ctx("interval")?;
            below += m.below_resolution as usize;
            t.push(vec![e.into(), s.into(), m.value.into(), m.below_resolution.into()]);
        }
    }
    t.expect_rows(energies.len() * eps.len(), "measure")?;
    if below > 0 {
        run.warn(format!("{below} rows have eps below the resolution floor {:.3e}", mu.resolution_floor()));
    }
    run.csv("measure.csv", &t, cfg)?;
    if atoms {
        let mut a = Table::new(&[("E", "energy"), ("weight", "1")]);
        for &(e, w) in &mu.atoms {
            a.push(vec![e.into(), w.into()]);
        }
        run.csv("atoms.csv", &a, cfg)?;
    }
    run.json("measure.json", json!({ "half_width": mu.half_width, "total": mu.total, "floor": mu.resolution_floor(), "atoms": mu.atoms.len() }), cfg)
}

fn holder(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 0.2)?;
    let n = cfg.count("n", 2000)? as i64;
    let eps = cfg.grid("eps", "log:1e-3:1e-1:11")?;
    if eps.iter().any(|&e| e <= 0.0) {
        return Err(CliError::invalid("eps", "every ε must be positive"));
    }
    let energies = if cfg.raw("energies").is_some() {
        cfg.grid("energies", "")?
    } else {
        let count = cfg.count("energy_count", 16)?;
        let trim = cfg.f64_or("trim", 0.02)?;
        if !(0.0..0.5).contains(&trim) {
            return Err(CliError::invalid("trim", "must lie in [0, 0.5)"));
        }
        run.stage("energies", || spectrum_energies(&op, 2 * n as usize + 1, count, trim).ctx("energies"))?
    };
    let r = run.stage("scan", || {
        let mu = spectral_measure(cfg, &op, n)?;
        holder_from_measure(&mu, &energies, &eps).ctx("holder")
    })?;
    let mut t = Table::new(&[("E", "energy"), ("eps", "energy"), ("mu", "1"), ("ratio", "energy^-1/2"), ("below_resolution", "1")]);
    for row in &r.rows {
        t.push(vec![row.energy.into(), row.eps.into(), row.mu.into(), row.ratio.into(), row.below_resolution.into()]);
    }
    t.expect_rows(energies.len() * eps.len(), "holder")?;
    if r.excluded > 0 {
        run.warn(format!("{} rows below the resolution floor {:.3e} are excluded from the sups", r.excluded, r.floor));
    }
    let body = json!({
        "half_width": r.half_width,
        "floor": r.floor,
        "global_sup": r.global_sup,
        "decade_sups": r.decade_sups.iter().map(|(d, s)| json!({"decade": d, "sup": s})).collect::<Vec<_>>(),
        "decade_variation": r.decade_variation,
        "exponents": r.exponents.iter().map(|(e, s)| json!({"E": e, "slope": s})).collect::<Vec<_>>(),
        "excluded": r.excluded,
    });
    run.csv("holder.csv", &t, cfg)?;
    run.json("holder.json", body, cfg)
}

fn ladder(cfg: &Config, key: &str, default: &str) -> CliResult<Vec<u64>> {
    let v = cfg.int_list(key, default)?;
    if v.iter().any(|&n| n < 1) {
        return Err(CliError::invalid(key, "every entry must be >= 1"));
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::invalid(key, "must be strictly increasing"));
    }
    Ok(v.into_iter().map(|n| n as u64).collect())
}

fn lyapunov(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 1.0)?;
    let energies = cfg.grid("energies", "lin:-3:3:13")?;
    let ns = ladder(cfg, "ns", "100,1000")?;
    let grid = cfg.count("grid", 64)?;
    let mut t = Table::new(&[("E", "energy"), ("n", "1"), ("L_n", "1"), ("std_error", "1")]);
    run.stage("transfer", || {
        for &e in &energies {
            for est in lyapunov_ladder(&Cocycle::schrodinger(&op, e), &ns, grid).ctx("lyapunov")? {
                t.push(vec![e.into(), est.n.into(), est.value.into(), est.std_error.into()]);
            }
        }
        Ok(())
    })?;
    t.expect_rows(energies.len() * ns.len(), "lyapunov")?;
    run.csv("lyapunov.csv", &t, cfg)
}

/// A mid-spectrum truncation eigenvalue unless `energy` is given.
fn energy_or_mid(cfg: &Config, op: &OperatorConfig) -> CliResult<f64> {
    match cfg.raw("energy") {
        Some(_) => cfg.f64_or("energy", 0.0),
        None => {
            let e = spectrum_energies(op, 2001, 1, 0.0).ctx("energy")?[0];
            cfg.f64_or("energy", e)
        }
    }
}

fn strip_growth(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 0.3)?;
    let e = energy_or_mid(cfg, &op)?;
    let eta = cfg.positive_f64("eta", 0.05)?;
    let ns = ladder(cfg, "ns", "100,1000")?;
    let sp = cfg.count("strip_points", 4)?;
    let phases = cfg.count("phases", 64)?;
    let s = run.stage("scan", || strip_growth_scan(&Cocycle::schrodinger(&op, e), eta, &ns, sp, phases).ctx("strip-growth"))?;
    let mut t = Table::new(&[("eps", "1"), ("n", "1"), ("rate", "1")]);
    for r in &s.rows {
        t.push(vec![r.eps.into(), r.n.into(), r.rate.into()]);
    }
    let body = json!({
        "energy": e,
        "eta": s.eta,
        "sup_rates": s.sup_rates.iter().map(|(n, r)| json!({"n": n, "rate": r})).collect::<Vec<_>>(),
        "decreasing": s.decreasing,
        "final_rate": s.final_rate,
    });
    run.csv("strip_growth.csv", &t, cfg)?;
    run.json("strip_growth.json", body, cfg)
}

fn weyl(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 1.0)?;
    let re = cfg.grid("re", "lin:-3:3:13")?;
    let im = cfg.grid("im", "0.1,1")?;
    let tol = cfg.positive_f64("tol", 1e-12)?;
    if im.iter().any(|&y| y <= 0.0) {
        return Err(CliError::invalid("im", "Im z must be positive"));
    }
    let mut t = Table::new(&[("re", "energy"), ("im", "energy"), ("m_re", "1"), ("m_im", "1"), ("psi", "1"), ("depth", "1"), ("delta", "1")]);
    let mut deepest = 0;
    run.stage("continued-fraction", || {
        for &y in &im {
            for &x in &re {
                let w = weyl_m_plus(&op, Complex64::new(x, y), tol).ctx("weyl")?;
                let p = psi(w.m).ctx("psi")?;
                deepest = deepest.max(w.depth);
                t.push(vec![x.into(), y.into(), w.m.re.into(), w.m.im.into(), p.into(), w.depth.into(), w.delta.into()]);
            }
        }
        Ok(())
    })?;
    t.expect_rows(re.len() * im.len(), "weyl")?;
    if deepest * 4 >= MAX_DEPTH {
        run.warn(format!("continued fraction depth reached {deepest} (cap {MAX_DEPTH})"));
    }
    run.csv("weyl.csv", &t, cfg)
}

fn pk_scan(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 0.2)?;
    let e = energy_or_mid(cfg, &op)?;
    let x = cfg.f64_or("x", 0.0)?;
    let k_max = cfg.count("k_max", 200)?;
    let tol = cfg.positive_f64("tol", 1e-9)?;
    let p = run.stage("pipeline", || pk_epsilon_pipeline(&op, x, e, k_max, tol).ctx("pk-scan"))?;
    let mut t = Table::new(&[
        ("k", "1"),
        ("norm", "1"),
        ("inv_norm", "1"),
        ("log_det", "1"),
        ("trace", "1"),
        ("eps", "energy"),
        ("psi", "1"),
        ("two_eps_norm", "1"),
        ("ratio", "1"),
        ("holder_stat", "1"),
        ("norm_cube_ratio", "1"),
        ("depth", "1"),
    ]);
    for (en, r) in p.sequence.entries.iter().zip(&p.rows) {
        t.push(vec![
            r.k.into(),
            en.norm.into(),
            en.inv_norm.into(),
            en.log_det.into(),
            en.trace.into(),
            r.eps.into(),
            r.psi.into(),
            r.two_eps_norm.into(),
            r.ratio.into(),
            r.holder_stat.into(),
            r.norm_cube_ratio.into(),
            r.depth.into(),
        ]);
    }
    t.expect_rows(k_max, "pk-scan")?;
    let c = &p.sequence.checks;
    let body = json!({
        "energy": e,
        "x": x,
        "escalated": p.sequence.escalated,
        "checks": {
            "positive_definite": c.positive_definite,
            "norm_monotone": c.norm_monotone,
            "det_monotone": c.det_monotone,
            "det_over_norm_monotone": c.det_over_norm_monotone,
            "trace_bound": c.trace_bound,
            "eps_decreasing": c.eps_decreasing,
            "all": c.all(),
        },
        "ratio_min": p.ratio_min,
        "ratio_max": p.ratio_max,
        "holder_stat_max": p.holder_stat_max,
        "eps_ratio_min": p.eps_ratio_min,
    });
    run.csv("pk_scan.csv", &t, cfg)?;
    run.json("pk_scan.json", body, cfg)
}

fn duality(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 0.5)?;
    let n = cfg.count("n", 500)?;
    let phases = cfg.count("phases", 4)?;
    let r = run.stage("spectra", || duality_gap(&op, n, phases).ctx("duality"))?;
    let mut g = Table::new(&[("direct_lo", "energy"), ("direct_hi", "energy"), ("dual_lo", "energy"), ("dual_hi", "energy")]);
    for row in &r.gaps {
        g.push(vec![row.direct.0.into(), row.direct.1.into(), row.dual.map(|d| d.0).into(), row.dual.map(|d| d.1).into()]);
    }
    let mut s = Table::new(&[("operator", "1"), ("E", "energy")]);
    for &e in &r.direct_spectrum {
        s.push(vec![Cell::S("direct".into()), e.into()]);
    }
    for &e in &r.dual_spectrum {
        s.push(vec![Cell::S("dual".into()), e.into()]);
    }
    if r.discarded > 0 {
        run.warn(format!("{} boundary-localized eigenvalues discarded", r.discarded));
    }
    let body = json!({
        "n": r.n,
        "phases": r.phases,
        "distance": r.distance,
        "scaled_distance": r.scaled_distance,
        "discarded": r.discarded,
        "direct_count": r.direct_spectrum.len(),
        "dual_count": r.dual_spectrum.len(),
    });
    run.csv("duality_gaps.csv", &g, cfg)?;
    run.csv("duality_spectra.csv", &s, cfg)?;
    run.json("duality.json", body, cfg)
}

fn thouless(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 0.0)?;
    let energies = cfg.grid("energies", "0,3")?;
    let n = cfg.count("n", 1000)?;
    let n_l = cfg.count("n_l", 1000)? as u64;
    let pa = cfg.count("phase_avg", 1)?;
    let grid = cfg.count("grid", 16)?;
    let mut t = Table::new(&[
        ("E", "energy"),
        ("n", "1"),
        ("n_l", "1"),
        ("lyapunov", "1"),
        ("log_potential", "1"),
        ("residual", "1"),
        ("closest_eigenvalue", "energy"),
    ]);
    run.stage("residuals", || {
        for &e in &energies {
            let r = thouless_residual(&op, e, n, n_l, pa, grid).ctx("thouless")?;
            t.push(vec![e.into(), r.n.into(), r.n_l.into(), r.lyapunov.into(), r.log_potential.into(), r.residual.into(), r.closest_eigenvalue.into()]);
        }
        Ok(())
    })?;
    t.expect_rows(energies.len(), "thouless")?;
    run.csv("thouless.csv", &t, cfg)
}

/// `thetas` if given, otherwise `samples` uniform draws from a ChaCha8 stream.
fn phase_set(cfg: &Config, default_samples: usize) -> CliResult<Vec<f64>> {
    if cfg.raw("thetas").is_some() {
        return cfg.grid("thetas", "");
    }
    let count = cfg.count("samples", default_samples)?;
    let seed: u64 = cfg.parse_or("seed", 10u64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| rng.gen::<f64>()).collect())
}

fn uniformity(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let thetas = phase_set(cfg, 8)?;
    let grid = cfg.count("grid", 2001)?;
    let xi = run.stage("xi", || uniformity_xi(&thetas, grid).ctx("uniformity"))?;
    run.json("uniformity.json", json!({ "thetas": thetas, "xi": xi }), cfg)
}

fn localize(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 60, 0.1)?;
    let thetas = phase_set(cfg, 10)?;
    let n_trunc = cfg.count("n_trunc", 250)? as i64;
    let eps0 = cfg.positive_f64("eps0", 0.1)?;
    let default_eps1 = if op.lambda.abs() > 0.0 && op.lambda.abs() < 1.0 { 0.5 * (1.0 / op.lambda.abs()).ln() } else { 0.1 };
    let eps1 = cfg.positive_f64("eps1", default_eps1)?;
    let mut t = Table::new(&[
        ("theta", "1"),
        ("E", "energy"),
        ("center", "1"),
        ("first_rate", "1"),
        ("resonances", "1"),
        ("violations", "1"),
        ("first_region_empty", "1"),
    ]);
    let (mut rates, mut sites, mut viol, mut skipped) = (Vec::new(), 0, 0, 0);
    let mut per_theta = Vec::new();
    run.stage("profiles", || {
        for &th in &thetas {
            let r = localization_profile(&op, th, n_trunc, eps0, eps1).ctx("localize")?;
            for v in &r.vectors {
                let vv: usize = v.regions.iter().map(|g| g.violations).sum();
                t.push(vec![
                    th.into(),
                    v.energy.into(),
                    v.center.into(),
                    v.first_rate().into(),
                    v.resonances.len().into(),
                    vv.into(),
                    v.first_region_empty.into(),
                ]);
            }
            if let Some(m) = r.median_rate {
                rates.push(m);
            }
            sites += r.sites_checked;
            viol += r.violations;
            skipped += r.boundary_skipped;
            per_theta.push(json!({ "theta": th, "median_rate": r.median_rate, "violation_fraction": r.violation_fraction() }));
        }
        Ok(())
    })?;
    let body = json!({
        "eps0": eps0,
        "eps1": eps1,
        "median_rate": median(&mut rates),
        "sites_checked": sites,
        "violations": viol,
        "violation_fraction": viol as f64 / sites.max(1) as f64,
        "boundary_skipped": skipped,
        "per_theta": per_theta,
    });
    run.csv("localize.csv", &t, cfg)?;
    run.json("localize.json", body, cfg)
}

fn bloch_defect(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let op = model::operator(cfg, 40, 0.2)?;
    let theta = cfg.f64_or("theta", 0.29)?;
    // without `energy`, the eigenvector with the largest weight at site 0
    let target = match cfg.raw("energy") {
        Some(_) => Some(cfg.f64_or("energy", 0.0)?),
        None => None,
    };
    let hw = cfg.count("half_width", 120)? as i64;
    let lifts = cfg.int_list("lifts", "4,8,16")?;
    let eta = cfg.positive_f64("eta", 0.02)?;
    let sp = cfg.count("strip_points", 2)?;
    let phases = cfg.count("phases", 32)?;
    if lifts.iter().any(|&l| l < 0 || l > hw) {
        return Err(CliError::invalid("lifts", format!("every lift half-width must lie in [0, {hw}]")));
    }
    let w = Window::centered(hw);
    let (energy, u) = run.stage("dual-eigen", || {
        let b = truncate(&op.with_phase(theta), &w, BlockKind::Dual).ctx("truncate")?;
        let (vals, vecs) = block_eigen(&b);
        let i0 = w.index(0).expect("window contains 0");
        let j = match target {
            Some(t) => (0..vals.len()).min_by(|&a, &c| (vals[a] - t).abs().total_cmp(&(vals[c] - t).abs())),
            None => (0..vals.len()).max_by(|&a, &c| vecs[(i0, a)].norm().total_cmp(&vecs[(i0, c)].norm())),
        }
        .expect("non-empty block");
        let u = WindowVector::new(w, vecs.column(j).iter().copied().collect()).ctx("vector")?;
        Ok((vals[j], u))
    })?;
    let mut t = Table::new(&[("lift_half_width", "1"), ("agreement", "1"), ("defect_sup", "1"), ("direct_residual", "1")]);
    run.stage("lift", || {
        for &l in &lifts {
            let b = bloch_lift(&op, theta, energy, &u, Window::centered(l), eta, sp, phases).ctx("bloch-defect")?;
            t.push(vec![l.into(), b.agreement.into(), b.defect_sup.into(), b.direct_residual.into()]);
        }
        Ok(())
    })?;
    t.expect_rows(lifts.len(), "bloch-defect")?;
    run.csv("bloch_defect.csv", &t, cfg)?;
    run.json("bloch_defect.json", json!({ "theta": theta, "energy": energy, "target": target, "half_width": hw }), cfg)
}

fn model_x_cmd(cfg: &Config, run: &mut Run) -> CliResult<()> {
    let cf = model::frequency(cfg, 40)?;
    let theta = cfg.f64_or("theta", 0.13)?;
    let r: i64 = cfg.parse_or("r", 1i64)?;
    let t_hat = Complex64::new(cfg.f64_or("t_hat_re", 0.3)?, cfg.f64_or("t_hat_im", 0.0)?);
    let ks = cfg.int_list("ks", "10,100,1000")?;
    let x = cfg.f64_or("x", 0.0)?;
    if ks.iter().any(|&k| k < 1) {
        return Err(CliError::invalid("ks", "every k must be >= 1"));
    }
    let samples = run.stage("sums", || {
        ks.iter().map(|&k| model_x(theta, r, t_hat, &cf, k as usize, x).ctx("model-x")).collect::<CliResult<Vec<_>>>()
    })?;
    let mut t = Table::new(&[("k", "1"), ("norm", "1"), ("lower", "1"), ("offset", "1"), ("norm_shape", "1"), ("lower_shape", "1")]);
    for m in &samples {
        t.push(vec![m.k.into(), m.norm.into(), m.lower.into(), m.offset.into(), m.norm_shape.into(), m.lower_shape.into()]);
    }
    t.expect_rows(ks.len(), "model-x")?;
    run.csv("model_x.csv", &t, cfg)?;
    run.json("model_x.json", json!({ "growth_exponent": growth_exponent(&samples) }), cfg)
}
