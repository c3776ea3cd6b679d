//! Command-line front end: arrangements in, JSON reports out.
//!
//! Exit codes: 0 on success, 2 when a mathematical hypothesis or validation
//! fails (non-flat system on `dunkl flat`, violated completion-plan
//! hypothesis, invalid weights), 1 on internal errors (I/O, parsing).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dunkl_core::arrangement::{self, Arrangement, ArrangementDto};
use dunkl_core::dunkl::{self, DunklSystem};
use dunkl_core::lauricella::{
    classify, hermitian_form, norm_integral, period, schwarz_group, ConfigPath, Configuration,
    WeightSystem,
};
use dunkl_core::quad::QuadConfig;
use dunkl_core::strata;
use dunkl_core::{Error, GeometryType, Tol};

const SCHEMA: &str = "dunkl-report/1";

#[derive(Parser)]
#[command(name = "dunkl", version, about = "Dunkl systems on complex hyperplane arrangements")]
struct Cli {
    /// Rank/flatness tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Quadrature relative error target.
    #[arg(long, global = true, default_value_t = 1e-8)]
    eta: f64,
    /// Gauss-Jacobi node count on endpoint segments (interior pieces use
    /// half as many Gauss-Legendre nodes).
    #[arg(long, global = true, default_value_t = 64)]
    nodes: usize,
    /// Seed for the random fixture builder.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Arrangement-level reports.
    Arr {
        #[command(subcommand)]
        cmd: ArrCmd,
    },
    /// Dunkl-system reports.
    Dunkl {
        #[command(subcommand)]
        cmd: DunklCmd,
    },
    /// Lauricella family: classification, periods, monodromy, area.
    Lauricella {
        #[command(subcommand)]
        cmd: LauricellaCmd,
    },
    /// Cone-manifold stratification reports.
    Strata {
        #[command(subcommand)]
        cmd: StrataCmd,
    },
}

#[derive(Subcommand)]
enum ArrCmd {
    /// Intersection lattice with irreducibility decomposition per flat.
    Lattice(SourceArgs),
    /// Irreducible components of the whole arrangement.
    Irreducible(SourceArgs),
}

#[derive(Subcommand)]
enum DunklCmd {
    /// Codimension-2 flatness check (exit 2 with violations if not flat).
    Flat(SourceArgs),
    /// Exponent table: kappa_L, kappa_0, logarithmic exponents.
    Exponents(SourceArgs),
    /// Projection identity residual on one irreducible flat.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        /// Lattice index of the flat.
        #[arg(long)]
        flat: usize,
    },
}

#[derive(Subcommand)]
enum LauricellaCmd {
    /// Geometric type from |mu| thresholds and the Hermitian signature.
    Classify {
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
    },
    /// Period integrals on a real strictly increasing configuration.
    Periods {
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        config: Vec<f64>,
    },
    /// Monodromy of the loop "point i encircles point j once, positively".
    Monodromy {
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        config: Vec<f64>,
        /// i,j or i,j,radius
        #[arg(long = "loop", value_delimiter = ',')]
        loop_spec: Vec<f64>,
    },
    /// The plane integral N(z) against the Hermitian square of the periods.
    Area {
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        config: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum StrataCmd {
    /// Per-flat stratification report.
    Report {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long = "type", value_enum)]
        geometry: Geometry,
    },
    /// Completion plan: per-flat actions and hypothesis checks.
    Plan {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long = "type", value_enum)]
        geometry: Geometry,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Geometry {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl From<Geometry> for GeometryType {
    fn from(g: Geometry) -> Self {
        match g {
            Geometry::Elliptic => GeometryType::Elliptic,
            Geometry::Parabolic => GeometryType::Parabolic,
            Geometry::Hyperbolic => GeometryType::Hyperbolic,
        }
    }
}

/// Exactly one arrangement source.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Arrangement JSON file ({"dim", "gram"?, "hyperplanes"}).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Lauricella weights, e.g. 0.25,0.25,0.25,0.25.
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<f64>>,
    /// Boolean arrangement weights (one per coordinate hyperplane).
    #[arg(long, value_delimiter = ',')]
    boolean: Option<Vec<f64>>,
    /// Braid arrangement: n,kappa.
    #[arg(long = "coxeter-a", value_delimiter = ',')]
    coxeter_a: Option<Vec<f64>>,
    /// Seeded generic fixture: dim,m (see --seed).
    #[arg(long, value_delimiter = ',')]
    random: Option<Vec<usize>>,
}

impl SourceArgs {
    fn build(&self, tol: &Tol, seed: u64) -> Result<Arrangement, Error> {
        if let Some(path) = &self.input {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            let dto: ArrangementDto = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("bad arrangement JSON: {e}")))?;
            return Arrangement::from_dto(&dto, tol);
        }
        if let Some(mu) = &self.mu {
            return arrangement::lauricella_arrangement(mu, tol);
        }
        if let Some(kappas) = &self.boolean {
            return arrangement::boolean(kappas.len(), kappas, tol);
        }
        if let Some(ck) = &self.coxeter_a {
            if ck.len() != 2 {
                return Err(Error::InvalidInput("--coxeter-a needs n,kappa".into()));
            }
            return arrangement::coxeter_a(ck[0] as usize, ck[1], tol);
        }
        if let Some(dm) = &self.random {
            if dm.len() != 2 {
                return Err(Error::InvalidInput("--random needs dim,m".into()));
            }
            return arrangement::random_generic(dm[0], dm[1], seed, tol);
        }
        Err(Error::InvalidInput("no arrangement source given".into()))
    }

    fn mu(&self) -> Option<&[f64]> {
        self.mu.as_deref()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = Tol {
        rank: cli.tol,
        flatness: cli.tol,
        cusp_band: cli.tol,
    };
    let quad = QuadConfig {
        eta: cli.eta,
        jacobi_nodes: cli.nodes,
        legendre_nodes: (cli.nodes / 2).max(8),
        ..QuadConfig::default()
    };
    match run(&cli, &tol, &quad) {
        Ok((value, ok)) => {
            emit(&value, cli.format);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            let (code, kind) = match &e {
                Error::InvalidInput(_) => (1u8, "invalid_input"),
                Error::HypothesisViolated { .. } => (2, "hypothesis_violated"),
                Error::WeightOutOfRange(_) => (2, "weight_out_of_range"),
                Error::OutOfRange(_) => (2, "out_of_range"),
                Error::ClassificationMismatch { .. } => (2, "classification_mismatch"),
                Error::DegenerateArrangement(..) => (2, "degenerate_arrangement"),
                Error::NotEssential { .. } => (2, "not_essential"),
                Error::NotHyperbolic(_) => (2, "not_hyperbolic"),
                Error::FlatReducible(_) => (2, "flat_reducible"),
                _ => (1, "internal"),
            };
            let value = json!({
                "schema": SCHEMA,
                "error": { "kind": kind, "message": e.to_string() },
            });
            emit(&value, cli.format);
            ExitCode::from(code)
        }
    }
}

fn emit(value: &Value, format: Format) {
    // Writes may hit a closed pipe (e.g. `| head`); that is not an error.
    let mut out = String::new();
    match format {
        Format::Json => out = serde_json::to_string_pretty(value).unwrap(),
        Format::Text => render_text(value, 0, &mut out),
    }
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{}", out.trim_end());
}

fn render_text(value: &Value, indent: usize, out: &mut String) {
    use std::fmt::Write;
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::Object(_) | Value::Array(_) => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render_text(v, indent + 1, out);
                    }
                    _ => {
                        let _ = writeln!(out, "{pad}{k}: {v}");
                    }
                }
            }
        }
        Value::Array(items) => {
            for v in items {
                match v {
                    Value::Object(_) | Value::Array(_) => {
                        let _ = writeln!(out, "{pad}-");
                        render_text(v, indent + 1, out);
                    }
                    _ => {
                        let _ = writeln!(out, "{pad}- {v}");
                    }
                }
            }
        }
        _ => {
            let _ = writeln!(out, "{pad}{value}");
        }
    }
}

/// Returns the report plus a success flag (false -> exit 2).
fn run(cli: &Cli, tol: &Tol, quad: &QuadConfig) -> Result<(Value, bool), Error> {
    match &cli.command {
        Command::Arr { cmd } => match cmd {
            ArrCmd::Lattice(src) => {
                let arr = src.build(tol, cli.seed)?;
                let lat = dunkl_core::lattice::build_lattice(&arr, tol)?;
                let flats: Vec<Value> = lat
                    .flats()
                    .iter()
                    .enumerate()
                    .map(|(i, f)| {
                        json!({
                            "index": i,
                            "codim": f.codim,
                            "dim": f.dim(),
                            "members": f.members,
                            "irreducible": lat.is_irreducible(i),
                            "components": lat.components(i),
                        })
                    })
                    .collect();
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "dim": arr.dim(),
                        "hyperplanes": arr.len(),
                        "flats": flats,
                        "tol": tol.rank,
                    }),
                    true,
                ))
            }
            ArrCmd::Irreducible(src) => {
                let arr = src.build(tol, cli.seed)?;
                let all: Vec<usize> = (0..arr.len()).collect();
                let parts = dunkl_core::lattice::irreducible_components(&arr, &all, tol);
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "hyperplanes": arr.len(),
                        "irreducible": parts.len() == 1,
                        "components": parts,
                    }),
                    true,
                ))
            }
        },
        Command::Dunkl { cmd } => match cmd {
            DunklCmd::Flat(src) => {
                let sys = DunklSystem::new(src.build(tol, cli.seed)?, *tol)?;
                let report = sys.flatness();
                let ok = report.is_flat;
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "flat": report.is_flat,
                        "max_relative_commutator": report.max_relative_commutator,
                        "tolerance": report.tolerance,
                        "violations": report.violations.iter().map(|v| json!({
                            "flat": v.flat_index,
                            "members": v.members,
                            "relative_commutator": v.relative_commutator,
                        })).collect::<Vec<_>>(),
                    }),
                    ok,
                ))
            }
            DunklCmd::Exponents(src) => {
                let sys = DunklSystem::new(src.build(tol, cli.seed)?, *tol)?;
                let table = dunkl::exponent_table(&sys);
                let rows: Vec<Value> = sys
                    .lattice()
                    .flats()
                    .iter()
                    .enumerate()
                    .map(|(i, f)| {
                        json!({
                            "flat": i,
                            "members": f.members,
                            "codim": f.codim,
                            "kappa": table.kappa[i],
                            "log_exponent": table.log_exponent[i],
                        })
                    })
                    .collect();
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "kappa_origin": table.kappa_origin,
                        "euler_dilatation": dunkl::euler_dilatation(&sys),
                        "flats": rows,
                    }),
                    true,
                ))
            }
            DunklCmd::Verify { source, flat } => {
                let sys = DunklSystem::new(source.build(tol, cli.seed)?, *tol)?;
                let residual = dunkl::verify_projection_identity(&sys, *flat)?;
                let ok = residual <= 1e-10;
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "flat": flat,
                        "residual": residual,
                        "contract": 1e-10,
                        "flat_system": sys.is_flat(),
                    }),
                    ok,
                ))
            }
        },
        Command::Lauricella { cmd } => match cmd {
            LauricellaCmd::Classify { mu } => {
                let w = WeightSystem::new(mu)?;
                let c = classify(&w)?;
                let h = hermitian_form(&w);
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "type": c.geometry,
                        "total": c.total,
                        "signature": [c.signature.0, c.signature.1, c.signature.2],
                        "eigenvalues": h.eigenvalues,
                        "signature_zero_tolerance": 1e-9,
                    }),
                    true,
                ))
            }
            LauricellaCmd::Periods { mu, config } => {
                let w = WeightSystem::new(mu)?;
                let c = Configuration::from_reals(config)?;
                let pv = period(&w, &c, quad)?;
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "f": pv.f.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                        "f_last": pv.f_last.map(|z| [z.re, z.im]),
                        "quad_error": pv.quad_error,
                        "eta": quad.eta,
                        "linear_relation_residual": pv.linear_relation_residual(&w),
                        "branch": pv.branch,
                    }),
                    true,
                ))
            }
            LauricellaCmd::Monodromy { mu, config, loop_spec } => {
                if loop_spec.len() < 2 {
                    return Err(Error::InvalidInput("--loop needs i,j[,radius]".into()));
                }
                let w = WeightSystem::new(mu)?;
                let c = Configuration::from_reals(config)?;
                let radius = loop_spec.get(2).copied();
                let lp = ConfigPath::encircle(&c, loop_spec[0] as usize, loop_spec[1] as usize, radius)?;
                let m = dunkl_core::lauricella::monodromy(&w, &lp, quad)?;
                let rows: Vec<Vec<[f64; 2]>> = (0..m.matrix.nrows())
                    .map(|i| {
                        (0..m.matrix.ncols())
                            .map(|j| [m.matrix[(i, j)].re, m.matrix[(i, j)].im])
                            .collect()
                    })
                    .collect();
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "loop": { "moving": loop_spec[0] as usize, "around": loop_spec[1] as usize,
                                  "radius": radius },
                        "matrix": rows,
                        "eigenvalues": m.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                        "invariance_defect": m.invariance_defect,
                        "frame_condition": m.frame_condition,
                    }),
                    true,
                ))
            }
            LauricellaCmd::Area { mu, config } => {
                let w = WeightSystem::new(mu)?;
                let c = Configuration::from_reals(config)?;
                let n = norm_integral(&w, &c)?;
                let pv = period(&w, &c, quad)?;
                let h = hermitian_form(&w);
                let mut full = pv.f.clone();
                let quadratic = match pv.f_last {
                    Some(fl) => {
                        full.push(fl);
                        h.quadratic(&full)
                    }
                    None => f64::NAN,
                };
                let gap = (quadratic - n.value).abs() / n.value.abs();
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "n_value": n.value,
                        "n_error": n.error,
                        "hermitian_square": quadratic,
                        "relative_gap": gap,
                    }),
                    true,
                ))
            }
        },
        Command::Strata { cmd } => match cmd {
            StrataCmd::Plan { source, geometry } => {
                let sys = DunklSystem::new(source.build(tol, cli.seed)?, *tol)?;
                let plan = strata::completion_plan(&sys, (*geometry).into())?;
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "geometry": plan.geometry,
                        "actions": plan.actions.iter().map(|(f, a)| json!({
                            "flat": f, "action": a,
                        })).collect::<Vec<_>>(),
                        "cusps": plan.cusps,
                        "checks": plan.checks,
                    }),
                    true,
                ))
            }
            StrataCmd::Report { source, geometry } => {
                let arr = source.build(tol, cli.seed)?;
                let sys = DunklSystem::new(arr, *tol)?;
                let plan = strata::completion_plan(&sys, (*geometry).into())?;
                // Lauricella sources get their Schwarz orders computed.
                let orders: Option<BTreeMap<usize, (u32, u32)>> = source
                    .mu()
                    .map(|mu| strata::lauricella_symmetry_orders(mu, &sys));
                let schwarz = match source.mu() {
                    Some(mu) => {
                        let w = WeightSystem::new(mu)?;
                        Some(schwarz_group(&w)?.order())
                    }
                    None => None,
                };
                let report = strata::strata_report(&sys, &plan, orders.as_ref())?;
                Ok((
                    json!({
                        "schema": SCHEMA,
                        "geometry": report.geometry,
                        "schwarz_order": schwarz,
                        "records": serde_json::to_value(&report.records).unwrap(),
                    }),
                    true,
                ))
            }
        },
    }
}

