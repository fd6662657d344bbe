//! Command dispatch and report rendering.

use std::fmt::Write as _;

use opphunt_core::{
    best_markov_response, extract_markov_eps_best_response, payoff_report, simulate_batch, simulate_plays,
    verify_mpe, zeno_cost_diagnosis, zeno_example_history, BatchStats, BestResponse, DelayDistribution, Extraction,
    History, Ordinal, PayoffReport, Player, Verdict, VerificationReport, ZenoDiagnosis,
};
use serde::Serialize;

use crate::config::{Format, RunConfig, SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Simulate { traces: bool },
    Evaluate,
    Verify,
    Respond,
    DemoZeno,
}

/// Outputs of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub primary: String,
    /// Play traces, when requested from `simulate`.
    pub traces: Option<String>,
    pub exit_code: i32,
}

impl Artifacts {
    fn ok(primary: String) -> Self {
        Artifacts {
            primary,
            traces: None,
            exit_code: 0,
        }
    }
}

/// Budgets at which `demo-zeno` reports truncated costs and partial sums.
pub const ZENO_BUDGETS: [u64; 3] = [100, 1000, 10_000];

pub fn run_command(command: &Command, cfg: &RunConfig) -> Result<Artifacts, CliError> {
    match command {
        Command::Simulate { traces } => simulate(cfg, *traces),
        Command::Evaluate => evaluate(cfg),
        Command::Verify => verify(cfg),
        Command::Respond => respond(cfg),
        Command::DemoZeno => demo_zeno(cfg),
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(cfg: &RunConfig, body: T) -> String {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        config: cfg,
        body,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
    s.push('\n');
    s
}

fn stationary(cfg: &RunConfig, p: Player, command: &str) -> Result<DelayDistribution, CliError> {
    let s = &cfg.strategies[p.index()];
    if !s.is_markov() {
        return Err(CliError::Validation {
            field: format!("strategies[{}]", p.index()),
            reason: format!("`{command}` needs a Markov strategy"),
        });
    }
    Ok(s.respond(&History::new(), p)?)
}

fn json_only(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    if cfg.format == Format::Csv {
        return Err(CliError::Validation {
            field: "format".into(),
            reason: format!("`{command}` writes JSON only"),
        });
    }
    Ok(())
}

fn simulate(cfg: &RunConfig, traces: bool) -> Result<Artifacts, CliError> {
    let [s1, s2] = &cfg.strategies;
    let stats = simulate_batch(s1, s2, &cfg.params, &cfg.sim)?;
    let primary = match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                stats: BatchStats,
            }
            json(cfg, Body { stats })
        }
        Format::Auto | Format::Csv => format!("{}\n{}\n", BatchStats::CSV_HEADER, stats.csv_row()),
    };
    let traces = if traces {
        let mut out = String::new();
        for (i, res) in simulate_plays(s1, s2, &cfg.params, &cfg.sim)?.iter().enumerate() {
            let _ = writeln!(
                out,
                "# play {i} payoff {} {} draws {}",
                res.payoff[0], res.payoff[1], res.rng_trace_len
            );
            out.push_str(&res.play.to_text());
        }
        Some(out)
    } else {
        None
    };
    Ok(Artifacts {
        primary,
        traces,
        exit_code: 0,
    })
}

/// Column order of `evaluate --format csv`.
pub const EVALUATE_CSV_HEADER: &str = "player,u_tilde,p_tilde,q_factor,lambda_ratio,value,method,est_abs_error";

fn evaluate(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let f1 = stationary(cfg, Player::One, "evaluate")?;
    let f2 = stationary(cfg, Player::Two, "evaluate")?;
    let mut reports = Vec::new();
    for p in Player::BOTH {
        reports.push(payoff_report(p, &f1, &f2, &cfg.params, None)?);
    }
    if cfg.format == Format::Csv {
        let mut out = format!("{EVALUATE_CSV_HEADER}\n");
        for (p, r) in Player::BOTH.iter().zip(&reports) {
            let value = r.fixed_point_value.map_or("inf".to_string(), |v| v.to_string());
            let method = serde_json::to_value(r.method).expect("method serializes");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.number(),
                r.u_tilde,
                r.p_tilde,
                r.q_factor,
                r.lambda_ratio,
                value,
                method.as_str().unwrap_or_default(),
                r.est_abs_error
            );
        }
        return Ok(Artifacts::ok(out));
    }
    #[derive(Serialize)]
    struct Body {
        players: Vec<PayoffReport>,
    }
    Ok(Artifacts::ok(json(cfg, Body { players: reports })))
}

fn verify(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    json_only(cfg, "verify")?;
    let f1 = stationary(cfg, Player::One, "verify")?;
    let f2 = stationary(cfg, Player::Two, "verify")?;
    let report = verify_mpe(&f1, &f2, &cfg.family(), &cfg.params, cfg.epsilon())?;
    let exit_code = match report.verdict {
        Verdict::ConfirmedWithinEpsilon => 0,
        Verdict::Refuted => 3,
    };
    #[derive(Serialize)]
    struct Body {
        report: VerificationReport,
    }
    Ok(Artifacts {
        primary: json(cfg, Body { report }),
        traces: None,
        exit_code,
    })
}

fn respond(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    json_only(cfg, "respond")?;
    let f2 = stationary(cfg, Player::Two, "respond")?;
    let best_response = best_markov_response(&f2, &cfg.family(), &cfg.params)?;
    let extraction = extract_markov_eps_best_response(&cfg.strategies[0], &f2, &cfg.params, &cfg.sim)?;
    #[derive(Serialize)]
    struct Body {
        best_response: BestResponse,
        extraction: Extraction,
    }
    Ok(Artifacts::ok(json(
        cfg,
        Body {
            best_response,
            extraction,
        },
    )))
}

/// Indices whose times `demo-zeno` reports: 3, ω, ω+1, ω·2.
pub fn zeno_probe_indices() -> [Ordinal; 4] {
    let w = Ordinal::omega();
    [Ordinal::finite(3), w.clone(), w.plus_finite(1), Ordinal::monomial(1, 2)]
}

fn demo_zeno(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let h = zeno_example_history();
    let diagnosis = zeno_cost_diagnosis(&cfg.params, &ZENO_BUDGETS)?;
    let times: Vec<(String, Option<f64>)> = zeno_probe_indices()
        .iter()
        .map(|a| (a.to_string(), h.time_at(a)))
        .collect();
    let limits: Vec<String> = h.limit_indices().iter().map(Ordinal::to_string).collect();
    if cfg.format == Format::Json {
        #[derive(Serialize)]
        struct Body {
            history: String,
            limit_indices: Vec<String>,
            times: Vec<(String, Option<f64>)>,
            diagnosis: ZenoDiagnosis,
        }
        return Ok(Artifacts::ok(json(
            cfg,
            Body {
                history: h.to_text(),
                limit_indices: limits,
                times,
                diagnosis,
            },
        )));
    }
    let mut out = h.to_text();
    let _ = writeln!(out, "# limit_indices\t{}", limits.join("\t"));
    for (a, t) in &times {
        let t = t.map_or("-".to_string(), |t| t.to_string());
        let _ = writeln!(out, "# time\t{a}\t{t}");
    }
    let d = &diagnosis;
    let _ = writeln!(
        out,
        "# zeno_cost\tcost={}\tr={}\tterm_limit={}\tdivergent={}",
        d.cost, d.r, d.term_limit, d.divergent
    );
    for (k, s) in &d.partial_sums {
        let _ = writeln!(out, "# partial_sum\t{k}\t{s}");
    }
    for (b, c) in &d.truncated_costs {
        let _ = writeln!(out, "# truncated_cost\t{b}\t{c}");
    }
    Ok(Artifacts::ok(out))
}
