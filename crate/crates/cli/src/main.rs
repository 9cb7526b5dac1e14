use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use ree_core::error::Error;
use ree_core::identities::{Backend, Verdict, Verifier};
use ree_core::orders::{
    default_candidates, difference_morphism_orders, frobenius_orders, order_sequence,
    padic_closure_check, Family,
};
use ree_core::series::{random_point, random_rational_point, CurvePoint, DEFAULT_K};
use ree_core::support::emit_appendix_tables;
use ree_core::weierstrass::{default_precision, divisor_degree_audit, profile};
use ree_core::ReeParams;

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(
    name = "ree",
    version,
    about = "Hasse derivatives and Weierstrass points on the Ree curve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Curve invariants for a given s.
    Params(Common),
    /// Check the differential identity catalog.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Only run the named identity.
        #[arg(long)]
        identity: Option<String>,
    },
    /// Order sequence and Frobenius orders of a linear series.
    Orders {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "D")]
        family: String,
    },
    /// Support tables of the basis functions.
    Support(Common),
    /// Vanishing orders, weight and degree audit at a point.
    Weierstrass {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "D")]
        family: String,
        #[arg(long, value_enum, default_value_t = PointKind::Origin)]
        point: PointKind,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 1)]
    s: u32,
    #[arg(long, value_enum, default_value_t = BackendKind::Symbolic)]
    backend: BackendKind,
    /// Required for the series backend and for sampled points.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 3)]
    trials: u32,
    /// Extension degree of sampled points over F_q.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: u32,
    #[arg(long)]
    precision: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum BackendKind {
    Symbolic,
    Series,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum PointKind {
    /// The point (0, 0, 0).
    Origin,
    /// A seeded F_q-rational point.
    Rational,
    /// A seeded point that is not F_q-rational.
    Random,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::UnknownLabel(_)
            | Error::BackendUnavailable(_)
            | Error::UnsupportedDegree { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

/// A rendered report and whether every check in it passed.
struct Output {
    json: Value,
    csv: String,
    text: String,
    ok: bool,
}

fn n<T: ToString>(v: T) -> Value {
    Value::String(v.to_string())
}

fn nums<T: ToString + Copy>(v: &[T]) -> Value {
    Value::Array(v.iter().map(|x| n(*x)).collect())
}

fn header(command: &str, c: &Common, backend: Option<&Backend>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("s".into(), n(c.s));
    if let Some(b) = backend {
        m.insert("backend".into(), json!(b.name()));
        if let Backend::Series { k, trials, seed } = b {
            m.insert("seed".into(), n(seed));
            m.insert("trials".into(), n(trials));
            m.insert("k".into(), n(k));
        }
    }
    m
}

impl Common {
    fn params(&self) -> Result<ReeParams, Failure> {
        if self.s == 0 {
            return Err(Failure::Usage("s must be positive".into()));
        }
        Ok(ReeParams::new(self.s)?)
    }

    fn seed(&self) -> Result<u64, Failure> {
        self.seed
            .ok_or_else(|| Failure::Usage("--seed is required for sampled points".into()))
    }

    fn backend(&self) -> Result<Backend, Failure> {
        match self.backend {
            BackendKind::Symbolic => Ok(Backend::Symbolic),
            BackendKind::Series => {
                if self.trials == 0 {
                    return Err(Failure::Usage("--trials must be positive".into()));
                }
                Ok(Backend::Series {
                    k: self.k,
                    trials: self.trials,
                    seed: self.seed()?,
                })
            }
        }
    }
}

fn family(text: &str) -> Result<Family, Failure> {
    text.parse::<Family>()
        .map_err(|_| Failure::Usage(format!("unknown family {text:?} (use D or E)")))
}

fn cmd_params(c: &Common) -> Result<Output, Failure> {
    let p = c.params()?;
    let mut m = header("params", c, None);
    let fields: [(&str, String); 8] = [
        ("q0", p.q0.to_string()),
        ("q", p.q.to_string()),
        ("g", p.g.to_string()),
        ("n_points", p.n_points.to_string()),
        ("m_value", p.m_value.to_string()),
        ("l_exp1", p.l_exp1.to_string()),
        ("l_exp2", p.l_exp2.to_string()),
        ("q2", p.q2().to_string()),
    ];
    let mut csv = String::from("key,value\n");
    let mut text = format!("s = {}\n", p.s);
    for (k, v) in &fields {
        m.insert((*k).into(), n(v));
        csv.push_str(&format!("{k},{v}\n"));
        text.push_str(&format!("{k} = {v}\n"));
    }
    m.insert("m_coeffs".into(), nums(&p.m_coeffs));
    let coeffs: Vec<String> = p.m_coeffs.iter().map(|c| c.to_string()).collect();
    csv.push_str(&format!("m_coeffs,{}\n", coeffs.join(" ")));
    text.push_str(&format!("m_coeffs = [{}]\n", coeffs.join(", ")));
    Ok(Output {
        json: Value::Object(m),
        csv,
        text,
        ok: true,
    })
}

fn verdict_json(v: &Verdict) -> Value {
    json!({
        "identity": v.identity,
        "subject": v.subject,
        "passed": v.passed,
        "points_tested": n(v.points_tested),
        "witness": v.witness.as_ref().map(|w| json!({"point": w.point, "residual": w.residual})),
        "support_exceptions": nums(&v.support_exceptions),
    })
}

fn cmd_verify(c: &Common, filter: Option<&str>) -> Result<Output, Failure> {
    let p = c.params()?;
    let backend = c.backend()?;
    let v = Verifier::new(&p);
    let mut verdicts = v.check_catalog(filter, backend)?;
    let mut m = header("verify", c, Some(&backend));
    let mut hyper_ok = true;
    if filter.is_none() {
        verdicts.push(v.check_rank1_remark(backend)?);
        let h = v.check_hypersurface(backend)?;
        m.insert(
            "hypersurface".into(),
            json!({
                "passed": h.passed(),
                "points_tested": n(h.points_tested),
                "checks": h.checks.iter().map(|c| json!({
                    "name": c.name, "passed": c.passed, "witness": c.witness,
                })).collect::<Vec<_>>(),
            }),
        );
        hyper_ok = h.passed();
    }
    let failed = verdicts.iter().filter(|r| !r.passed).count();
    let ok = failed == 0 && hyper_ok;
    m.insert("ok".into(), json!(ok));
    m.insert("total".into(), n(verdicts.len()));
    m.insert("failed".into(), n(failed));
    m.insert(
        "verdicts".into(),
        Value::Array(verdicts.iter().map(verdict_json).collect()),
    );

    let mut csv = String::from("identity,subject,backend,passed,points_tested\n");
    let mut text = String::new();
    for r in &verdicts {
        csv.push_str(&format!(
            "{},\"{}\",{},{},{}\n",
            r.identity, r.subject, r.backend, r.passed, r.points_tested
        ));
        if !r.passed {
            let w = r
                .witness
                .as_ref()
                .map(|w| w.residual.as_str())
                .unwrap_or("");
            text.push_str(&format!("FAIL {} {}: {}\n", r.identity, r.subject, w));
        }
    }
    text.push_str(&format!(
        "{} of {} checks passed ({} backend, s = {})\n",
        verdicts.len() - failed,
        verdicts.len(),
        backend.name(),
        p.s
    ));
    Ok(Output {
        json: Value::Object(m),
        csv,
        text,
        ok,
    })
}

fn cmd_orders(c: &Common, fam: &str) -> Result<Output, Failure> {
    let p = c.params()?;
    let fam = family(fam)?;
    let backend = c.backend()?;
    let cand = default_candidates(&p)?;
    let labels = fam.labels();
    let seq = order_sequence(&p, labels, &cand, backend, None)?;
    let frob = frobenius_orders(&p, labels, &cand, backend, None, Some(&seq))?;
    let diff = difference_morphism_orders(&p, labels, backend, None)?;
    let closure = padic_closure_check(&seq.orders);
    let stated: Vec<u64> = fam.stated_orders().iter().map(|i| i.value(&p)).collect();
    let ok = seq.orders == stated && closure.closed;

    let mut m = header("orders", c, Some(&backend));
    m.insert("family".into(), json!(fam.name()));
    m.insert("functions".into(), json!(seq.family));
    m.insert(
        "orders".into(),
        Value::Array(
            seq.witnesses
                .iter()
                .map(|w| {
                    json!({
                        "value": n(w.order),
                        "symbolic": w.symbolic,
                        "witness": w.certificate,
                    })
                })
                .collect(),
        ),
    );
    m.insert("matches_stated".into(), json!(seq.orders == stated));
    m.insert("padic_closed".into(), json!(closure.closed));
    m.insert(
        "frobenius".into(),
        json!({
            "nu": nums(&frob.nu),
            "omitted": frob.omitted.map(n),
            "omitted_index": frob.omitted_index.map(n),
            "difference_orders_below_q": nums(&diff),
        }),
    );
    m.insert("ok".into(), json!(ok));

    let mut csv = String::from("i,order,symbolic\n");
    let mut text = format!(
        "orders of {} (s = {}, {}):\n",
        fam.name(),
        p.s,
        backend.name()
    );
    for (i, w) in seq.witnesses.iter().enumerate() {
        let sym = w.symbolic.clone().unwrap_or_default();
        csv.push_str(&format!("{i},{},{sym}\n", w.order));
        text.push_str(&format!("  e{i:<2} = {:>10}  {sym}\n", w.order));
    }
    text.push_str(&format!(
        "Frobenius orders: {:?}, omitted {:?}\n",
        frob.nu, frob.omitted
    ));
    Ok(Output {
        json: Value::Object(m),
        csv,
        text,
        ok,
    })
}

fn cmd_support(c: &Common) -> Result<Output, Failure> {
    let p = c.params()?;
    let (t1, t2) = emit_appendix_tables(&p)?;
    let mut m = header("support", c, None);
    let mut warnings = Vec::new();
    for (name, t) in [("type1", &t1), ("type2", &t2)] {
        for (a, b) in &t.collisions {
            let w = format!(
                "{name}: rows {a} and {b} are both {} at s = {}",
                a.value(&p),
                p.s
            );
            eprintln!("warning: {w}");
            warnings.push(w);
        }
        m.insert(
            name.into(),
            json!({
                "columns": t.columns.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "rows": t.rows.iter().map(|(i, marks)| json!({
                    "index": i.to_string(),
                    "value": n(i.value(&p)),
                    "marks": marks,
                })).collect::<Vec<_>>(),
            }),
        );
    }
    m.insert("collisions".into(), json!(warnings));
    let csv = format!("{}\n{}", t1.to_csv(), t2.to_csv());
    let text = format!("{}\n{}", t1.to_text(), t2.to_text());
    if c.format == Format::Csv {
        if let Some(dir) = &c.out {
            // Each table goes to its own file so it can be diffed directly.
            write_file(&dir.join("appendix_type1.csv"), &t1.to_csv())?;
            write_file(&dir.join("appendix_type2.csv"), &t2.to_csv())?;
        }
    }
    Ok(Output {
        json: Value::Object(m),
        csv,
        text,
        ok: true,
    })
}

fn cmd_weierstrass(c: &Common, fam: &str, kind: PointKind) -> Result<Output, Failure> {
    let p = c.params()?;
    let fam = family(fam)?;
    let backend = c.backend()?;
    let pt = match kind {
        PointKind::Origin => CurvePoint::origin(&p, 1)?,
        PointKind::Rational => random_rational_point(&p, 1, c.seed()?)?,
        PointKind::Random => random_point(&p, c.k, c.seed()?)?,
    };
    let cand = default_candidates(&p)?;
    let eps = order_sequence(&p, fam.labels(), &cand, backend, None)?.orders;
    let prec = c.precision.unwrap_or_else(|| default_precision(&p));
    let prof = profile(&p, fam.labels(), &pt, &eps, prec)?;
    let audit = divisor_degree_audit(&p, fam, &eps)?;

    let mut m = header("weierstrass", c, Some(&backend));
    m.insert("family".into(), json!(fam.name()));
    m.insert("point".into(), json!(prof.point));
    m.insert("rational".into(), json!(prof.rational));
    m.insert("precision".into(), n(prec));
    m.insert("eps".into(), nums(&prof.eps));
    m.insert("j".into(), nums(&prof.j));
    m.insert("weight".into(), n(prof.weight));
    m.insert("weierstrass".into(), json!(prof.is_weierstrass()));
    m.insert(
        "audit".into(),
        json!({
            "genus": n(audit.genus),
            "two_g_minus_2": n(audit.two_g_minus_2),
            "eps_sum": n(audit.eps_sum),
            "dimension": n(audit.dimension),
            "m": n(audit.m),
            "degree": n(audit.degree),
            "rational_weight": n(audit.rational_weight),
            "n_points": n(audit.n_points),
            "equation": audit.equation(),
        }),
    );
    m.insert("ok".into(), json!(true));

    let mut csv = String::from("i,eps,j\n");
    for (i, (e, j)) in prof.eps.iter().zip(&prof.j).enumerate() {
        csv.push_str(&format!("{i},{e},{j}\n"));
    }
    let text = format!(
        "point {}\nj = {:?}\nweight = {}\naudit: {}\n",
        prof.point,
        prof.j,
        prof.weight,
        audit.equation()
    );
    Ok(Output {
        json: Value::Object(m),
        csv,
        text,
        ok: true,
    })
}

fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (common, out) = match &cli.command {
        Command::Params(c) => (c, cmd_params(c)?),
        Command::Verify { common, identity } => (common, cmd_verify(common, identity.as_deref())?),
        Command::Orders { common, family } => (common, cmd_orders(common, family)?),
        Command::Support(c) => (c, cmd_support(c)?),
        Command::Weierstrass {
            common,
            family,
            point,
        } => (common, cmd_weierstrass(common, family, *point)?),
    };
    let body = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Csv => out.csv,
        Format::Text => out.text,
    };
    let to_dir = matches!(cli.command, Command::Support(_)) && common.format == Format::Csv;
    match &common.out {
        Some(path) if !to_dir => write_file(path, &body)?,
        _ => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(body.as_bytes());
        }
    }
    Ok(out.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
