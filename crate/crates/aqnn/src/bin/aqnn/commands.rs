//! Implementations of the CLI subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use aqnn::attractor::{
    build_canonical, build_general, build_mixed_attractor, detect_classical_ensemble,
    BasisTransform, CorrelationMatrix,
};
use aqnn::channel::{fixed_point_space, iterate as channel_iterate, ChoiCandidate, CptpReport};
use aqnn::error::Error;
use aqnn::feedforward::{
    basis_transform_from_states, build_perceptron_canonical, build_traced_attractor,
    orthonormal_bipartite_basis, product_vector_basis, random_bipartite_operator_basis,
    IoRelationRow, PerceptronSpec,
};
use aqnn::gardner::{
    analytic_log_vr_stirling, analytic_relative_volume, analytic_v_aqnn, analytic_v_cptp,
    capacity_table, estimate_on_shared_samples, optimal_epsilon, vr_optimal, GardnerConfig,
    ManifoldDims,
};
use aqnn::io::{
    fmt_f64, load_choi, load_density, load_matrix, out_path, prepare_out_dir, save_choi,
    ChoiJson, LoadError, MatrixJson, RunManifest,
};
use aqnn::linalg::{ComplexMatrix, DensityMatrix, SeedStream, Tolerances};

use crate::{
    ConstructArgs, FixedPointsArgs, GardnerAnalyticArgs, GardnerCapacityArgs, GardnerMcArgs,
    IterateArgs, VerifyArgs, EXIT_INVALID, EXIT_IO, EXIT_VERIFICATION,
};

pub struct Context {
    pub tol: Tolerances,
    pub seed: u64,
    pub threads: usize,
}

/// Global scalars loadable from a JSON config file.
#[derive(Debug, Default, serde::Deserialize)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
}

pub fn load_config(path: &std::path::Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err)?;
    serde_json::from_str(&text).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("config parse error: {e}"),
    })
}

pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub type CliResult = Result<(), CliError>;

fn invalid(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

fn io_err(message: impl std::fmt::Display) -> CliError {
    CliError {
        code: EXIT_IO,
        message: message.to_string(),
    }
}

fn from_load(err: LoadError) -> CliError {
    match err {
        LoadError::Invalid(e) => invalid(e.to_string()),
        other => io_err(other),
    }
}

fn from_lib(err: Error) -> CliError {
    invalid(err.to_string())
}

/// Tolerance resolution: --tol flag, then AQNN_DEFAULT_TOL, then 1e-9. The
/// scalar fills every validation field; the invertibility floor stays at
/// its default.
pub fn resolve_tolerances(flag: Option<f64>) -> Tolerances {
    let base = flag.or_else(|| {
        std::env::var("AQNN_DEFAULT_TOL")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
    });
    let mut tol = Tolerances::default();
    if let Some(t) = base {
        tol.herm = t;
        tol.psd = t;
        tol.trace = t;
        tol.norm = t;
        tol.orth = t;
        tol.tp = t;
        tol.recon = t;
    }
    tol
}

fn install_pool<T>(threads: usize, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    std::fs::write(path, serde_json::to_string_pretty(value).expect("json")).map_err(io_err)
}

fn finish_manifest(
    mut manifest: RunManifest,
    started: Instant,
    outputs: &[PathBuf],
    dir: &Path,
) -> Result<(), CliError> {
    manifest.duration_ms = started.elapsed().as_millis() as u64;
    for path in outputs {
        manifest.record_output(path).map_err(io_err)?;
    }
    manifest.write(&out_path(dir, "manifest.json")).map_err(io_err)
}

fn load_correlation(
    args: &ConstructArgs,
    ctx: &Context,
    required_dim: Option<usize>,
) -> Result<CorrelationMatrix, CliError> {
    if let Some(path) = &args.correlation {
        let m = load_matrix(path).map_err(from_load)?;
        let b = CorrelationMatrix::new(m, &ctx.tol).map_err(from_lib)?;
        if let Some(dim) = required_dim {
            if b.dim() != dim {
                return Err(invalid(format!(
                    "correlation matrix has dimension {}, expected {dim}",
                    b.dim()
                )));
            }
        }
        Ok(b)
    } else if let Some(n) = args.random_correlation.or(required_dim) {
        let rank = args.rank.unwrap_or(n);
        let mut stream = SeedStream::new(ctx.seed, 1);
        CorrelationMatrix::random(n, rank, &mut stream).map_err(from_lib)
    } else {
        Err(invalid(
            "provide --correlation FILE or --random-correlation N",
        ))
    }
}

pub fn construct(ctx: &Context, args: &ConstructArgs) -> CliResult {
    let started = Instant::now();
    prepare_out_dir(&args.out).map_err(io_err)?;
    let mut outputs = Vec::new();

    let (candidate, report, extra): (ChoiCandidate, CptpReport, serde_json::Value) =
        match args.kind.as_str() {
            "canonical" => {
                let b = load_correlation(args, ctx, None)?;
                let choi = build_canonical(&b);
                let report = choi.verify(&ctx.tol);
                let extra = serde_json::json!({
                    "correlation": MatrixJson::from_matrix(b.matrix()),
                });
                (choi.as_candidate().clone(), report, extra)
            }
            "general" => {
                let transform_path = args
                    .transform
                    .as_ref()
                    .ok_or_else(|| invalid("kind=general requires --transform FILE"))?;
                let t_mat = load_matrix(transform_path).map_err(from_load)?;
                let t = BasisTransform::new(t_mat, &ctx.tol).map_err(from_lib)?;
                let b = load_correlation(args, ctx, Some(t.dim()))?;
                let (cand, report) = build_general(&b, &t, &ctx.tol).map_err(from_lib)?;
                let extra = serde_json::json!({
                    "transform_unitary": t.is_unitary(),
                });
                (cand, report, extra)
            }
            "mixed" => {
                if args.members.is_empty() {
                    return Err(invalid("kind=mixed requires at least one --member FILE"));
                }
                let states: Vec<DensityMatrix> = args
                    .members
                    .iter()
                    .map(|p| load_density(p, &ctx.tol))
                    .collect::<Result<_, _>>()
                    .map_err(from_load)?;
                let ensemble_report =
                    detect_classical_ensemble(&states, 1e-8, &ctx.tol).map_err(from_lib)?;
                if !ensemble_report.is_classical {
                    return Err(invalid(format!(
                        "ensemble is not classical: max commutator norm {:.3e}",
                        ensemble_report.max_commutator_norm
                    )));
                }
                let b = load_correlation(args, ctx, Some(states[0].dim()))?;
                let (cand, report) =
                    build_mixed_attractor(&ensemble_report, &b, &ctx.tol).map_err(from_lib)?;
                let report_path = out_path(&args.out, "ensemble_report.json");
                write_json(&report_path, &ensemble_report.to_json())?;
                outputs.push(report_path);
                (cand, report, serde_json::json!({"members": args.members.len()}))
            }
            "perceptron" => {
                let na = args
                    .na
                    .ok_or_else(|| invalid("kind=perceptron requires --na"))?;
                let m0 = args
                    .m0
                    .ok_or_else(|| invalid("kind=perceptron requires --m0"))?;
                let x = match &args.coupling {
                    Some(path) => load_matrix(path).map_err(from_load)?,
                    None => {
                        if m0 >= na {
                            return Err(invalid("m0 must be smaller than na"));
                        }
                        ComplexMatrix::zeros(m0, na - m0)
                    }
                };
                let spec = PerceptronSpec::new(na, m0, x, &ctx.tol).map_err(from_lib)?;
                let choi = build_perceptron_canonical(&spec);
                let report = choi.verify(&ctx.tol);
                (choi.as_candidate().clone(), report, spec.to_json())
            }
            "theorem3" => {
                let n = args.n.ok_or_else(|| invalid("kind=theorem3 requires --n"))?;
                if n < 2 {
                    return Err(invalid("kind=theorem3 requires n ≥ 2"));
                }
                let mut basis_stream = SeedStream::new(ctx.seed, 0);
                let (basis, transform) = match args.basis_kind.as_str() {
                    "orthonormal" => {
                        orthonormal_bipartite_basis(n, &mut basis_stream, &ctx.tol)
                            .map_err(from_lib)?
                    }
                    "product" => {
                        let basis = product_vector_basis(n, &mut basis_stream);
                        let t = basis_transform_from_states(&basis, &ctx.tol).map_err(from_lib)?;
                        (basis, t)
                    }
                    "random" => {
                        let basis =
                            random_bipartite_operator_basis(n, &mut basis_stream, 16, 1e-8)
                                .map_err(from_lib)?;
                        let t = basis_transform_from_states(&basis, &ctx.tol).map_err(from_lib)?;
                        (basis, t)
                    }
                    other => {
                        return Err(invalid(format!(
                            "unknown basis kind '{other}' (expected orthonormal | product | random)"
                        )))
                    }
                };
                let b = load_correlation(args, ctx, Some(n * n))?;
                let (cand, report, relations) =
                    build_traced_attractor(&basis, &b, &transform, &ctx.tol).map_err(from_lib)?;

                let rows: Vec<IoRelationRow> = relations
                    .iter()
                    .map(|r| IoRelationRow {
                        index: r.index,
                        residual: r.residual,
                        output_purity: r.output_purity(),
                    })
                    .collect();
                let relations_json = out_path(&args.out, "relations.json");
                write_json(
                    &relations_json,
                    &serde_json::to_value(&rows).expect("rows serialize"),
                )?;
                outputs.push(relations_json);
                let relations_csv = out_path(&args.out, "relations.csv");
                let mut csv = String::from("index,residual,output_purity\n");
                for row in &rows {
                    csv.push_str(&format!(
                        "{},{},{}\n",
                        row.index,
                        fmt_f64(row.residual),
                        fmt_f64(row.output_purity)
                    ));
                }
                std::fs::write(&relations_csv, csv).map_err(io_err)?;
                outputs.push(relations_csv);

                let extra = serde_json::json!({
                    "basis_kind": args.basis_kind,
                    "transform_unitary": transform.is_unitary(),
                    "max_residual": rows.iter().map(|r| r.residual).fold(0.0f64, f64::max),
                });
                (cand, report, extra)
            }
            other => {
                return Err(invalid(format!(
                    "unknown construct kind '{other}' (expected canonical | general | mixed | perceptron | theorem3)"
                )))
            }
        };

    let choi_path = out_path(&args.out, "choi.json");
    save_choi(&choi_path, &candidate).map_err(io_err)?;
    outputs.insert(0, choi_path);

    let report_path = out_path(&args.out, "report.json");
    write_json(
        &report_path,
        &serde_json::to_value(&report).expect("report serialize"),
    )?;
    outputs.push(report_path);

    let mut params = serde_json::json!({
        "kind": args.kind,
        "correlation": args.correlation,
        "random_correlation": args.random_correlation,
        "rank": args.rank,
        "transform": args.transform,
        "members": args.members,
        "na": args.na,
        "m0": args.m0,
        "coupling": args.coupling,
        "n": args.n,
        "basis_kind": args.basis_kind,
        "out": args.out,
        "extra": extra,
    });
    if let Some(obj) = params.as_object_mut() {
        obj.insert("verdict".into(), serde_json::to_value(report.verdict).unwrap());
    }
    let manifest = RunManifest::new("construct", params, Some(ctx.seed));
    finish_manifest(manifest, started, &outputs, &args.out)?;
    println!(
        "{}",
        serde_json::to_string(&report).expect("report serialize")
    );
    Ok(())
}

pub fn verify(ctx: &Context, args: &VerifyArgs) -> CliResult {
    let started = Instant::now();
    let cand = load_choi(&args.choi).map_err(from_load)?;
    let report = cand.verify(&ctx.tol);
    let json = serde_json::to_value(&report).expect("report serialize");
    println!("{}", serde_json::to_string_pretty(&json).expect("json"));

    if let Some(dir) = &args.out {
        prepare_out_dir(dir).map_err(io_err)?;
        let report_path = out_path(dir, "report.json");
        write_json(&report_path, &json)?;
        let manifest = RunManifest::new(
            "verify",
            serde_json::json!({"choi": args.choi, "out": dir}),
            None,
        );
        finish_manifest(manifest, started, &[report_path], dir)?;
    }

    if report.is_cptp() {
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_VERIFICATION,
            message: format!(
                "verdict {:?}: min_eigenvalue={:.3e}, tp_deviation={:.3e}, hermiticity_deviation={:.3e}",
                report.verdict,
                report.min_eigenvalue,
                report.tp_deviation,
                report.hermiticity_deviation
            ),
        })
    }
}

pub fn iterate(ctx: &Context, args: &IterateArgs) -> CliResult {
    let started = Instant::now();
    let cand = load_choi(&args.choi).map_err(from_load)?;
    let dims = cand.dims();
    if dims.dim_a != dims.dim_b {
        return Err(invalid(format!(
            "iteration requires a square channel, got {}→{}",
            dims.dim_a, dims.dim_b
        )));
    }
    let choi = cand
        .into_verified(&ctx.tol)
        .map_err(|(report, e)| invalid(format!("{e}; report {report:?}")))?;
    let rho = load_density(&args.rho, &ctx.tol).map_err(from_load)?;
    if rho.dim() != dims.dim_a {
        return Err(invalid(format!(
            "state dimension {} does not match channel input {}",
            rho.dim(),
            dims.dim_a
        )));
    }

    let result =
        channel_iterate(&choi, &rho, args.steps, args.conv_tol, &ctx.tol).map_err(from_lib)?;

    prepare_out_dir(&args.out).map_err(io_err)?;
    let mut csv = String::from("step,trace_distance_prev,max_offdiag_modulus\n");
    for (k, state) in result.trajectory.iter().enumerate() {
        let dist = if k == 0 {
            String::new()
        } else {
            let prev = &result.trajectory[k - 1];
            fmt_f64(aqnn::linalg::trace_distance(state, prev).map_err(from_lib)?)
        };
        let mut max_offdiag = 0.0f64;
        let n = state.dim();
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    max_offdiag = max_offdiag.max(state.entry(r, c).norm());
                }
            }
        }
        csv.push_str(&format!("{k},{dist},{}\n", fmt_f64(max_offdiag)));
    }
    let csv_path = out_path(&args.out, "trajectory.csv");
    std::fs::write(&csv_path, csv).map_err(io_err)?;

    let manifest = RunManifest::new(
        "iterate",
        serde_json::json!({
            "choi": args.choi,
            "rho": args.rho,
            "steps": args.steps,
            "conv_tol": args.conv_tol,
            "converged": result.converged,
            "steps_used": result.steps,
        }),
        None,
    );
    finish_manifest(manifest, started, &[csv_path], &args.out)?;
    println!(
        "{{\"converged\":{},\"steps\":{}}}",
        result.converged, result.steps
    );
    Ok(())
}

pub fn fixed_points(_ctx: &Context, args: &FixedPointsArgs) -> CliResult {
    let started = Instant::now();
    let cand = load_choi(&args.choi).map_err(from_load)?;
    let dims = cand.dims();
    if dims.dim_a != dims.dim_b {
        return Err(invalid(format!(
            "fixed points require a square channel, got {}→{}",
            dims.dim_a, dims.dim_b
        )));
    }
    let fps = fixed_point_space(&cand, args.window).map_err(from_lib)?;

    prepare_out_dir(&args.out).map_err(io_err)?;
    let json = serde_json::json!({
        "dimension": fps.dimension,
        "peripheral_dimension": fps.peripheral_dimension,
        "hermitian_closed": fps.hermitian_closed,
        "window": args.window,
        "basis": fps.basis.iter().map(MatrixJson::from_matrix).collect::<Vec<_>>(),
    });
    let json_path = out_path(&args.out, "fixed_points.json");
    write_json(&json_path, &json)?;

    let manifest = RunManifest::new(
        "fixed-points",
        serde_json::json!({
            "choi": args.choi,
            "window": args.window,
            "dimension": fps.dimension,
            "peripheral_dimension": fps.peripheral_dimension,
        }),
        None,
    );
    finish_manifest(manifest, started, &[json_path], &args.out)?;
    println!(
        "{{\"dimension\":{},\"peripheral_dimension\":{},\"hermitian_closed\":{}}}",
        fps.dimension, fps.peripheral_dimension, fps.hermitian_closed
    );
    Ok(())
}

pub fn gardner_mc(ctx: &Context, args: &GardnerMcArgs) -> CliResult {
    let started = Instant::now();
    if args.m.is_empty() || args.epsilon.is_empty() {
        return Err(invalid("provide at least one --m and one --epsilon"));
    }
    let mut settings = Vec::new();
    for &m in &args.m {
        for &eps in &args.epsilon {
            GardnerConfig {
                n: args.n,
                m,
                epsilon: eps,
                samples: args.samples,
                master_seed: ctx.seed,
            }
            .validate()
            .map_err(from_lib)?;
            settings.push((m, eps));
        }
    }

    let estimates = install_pool(ctx.threads, || {
        estimate_on_shared_samples(args.n, args.samples, ctx.seed, &settings)
    })
    .map_err(from_lib)?;

    let d = ManifoldDims::for_dimension(args.n).d_f64();
    let mut csv = String::from("N,M,epsilon,samples,hits,fraction,stderr,analytic_eq5,analytic_eq7\n");
    let mut rows_json = Vec::new();
    for est in &estimates {
        let m = est.config.m;
        let eps = est.config.epsilon;
        let eq5 = if m == 0 {
            1.0
        } else {
            analytic_relative_volume(eps, m as f64, d)
                .map(|r| r.value)
                .unwrap_or(f64::NAN)
        };
        let eq7 = vr_optimal(m as f64, d);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            args.n,
            m,
            fmt_f64(eps),
            est.samples,
            est.hits,
            fmt_f64(est.fraction),
            fmt_f64(est.stderr),
            fmt_f64(eq5),
            fmt_f64(eq7),
        ));
        rows_json.push(serde_json::json!({
            "N": args.n,
            "M": m,
            "epsilon": eps,
            "samples": est.samples,
            "hits": est.hits,
            "fraction": est.fraction,
            "stderr": est.stderr,
            "zero_hit_upper95": est.zero_hit_upper95,
            "analytic_eq5": eq5,
            "analytic_eq7": eq7,
        }));
    }

    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            prepare_out_dir(parent).map_err(io_err)?;
        }
    }
    std::fs::write(&args.out, &csv).map_err(io_err)?;
    let json_path = args.out.with_extension("json");
    write_json(&json_path, &serde_json::Value::Array(rows_json))?;

    let manifest_path = args.out.with_extension("manifest.json");
    let mut manifest = RunManifest::new(
        "gardner mc",
        serde_json::json!({
            "n": args.n,
            "m": args.m,
            "epsilon": args.epsilon,
            "samples": args.samples,
            "threads": ctx.threads,
            "out": args.out,
        }),
        Some(ctx.seed),
    );
    manifest.duration_ms = started.elapsed().as_millis() as u64;
    manifest.record_output(&args.out).map_err(io_err)?;
    manifest.record_output(&json_path).map_err(io_err)?;
    manifest.write(&manifest_path).map_err(io_err)?;

    print!("{csv}");
    Ok(())
}

pub fn gardner_analytic(_ctx: &Context, args: &GardnerAnalyticArgs) -> CliResult {
    if args.d <= 0.0 {
        return Err(invalid("d must be positive"));
    }
    if args.m.is_empty() || args.epsilon.is_empty() {
        return Err(invalid("provide at least one --m and one --epsilon"));
    }
    let mut csv = String::from(
        "d,m,k,epsilon,v_cptp,v_aqnn,relative_volume,exceeds_unit,log_vr_stirling,optimal_epsilon,vr_optimal\n",
    );
    let vc = analytic_v_cptp(args.d).map_err(from_lib)?;
    for &m in &args.m {
        let k = m * args.k_scale;
        for &eps in &args.epsilon {
            let va = analytic_v_aqnn(eps, k, args.d).map_err(from_lib)?;
            let rel = analytic_relative_volume(eps, k, args.d).map_err(from_lib)?;
            let stirling = analytic_log_vr_stirling(eps, m, args.d);
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                fmt_f64(args.d),
                fmt_f64(m),
                fmt_f64(k),
                fmt_f64(eps),
                fmt_f64(vc.value),
                fmt_f64(va.value),
                fmt_f64(rel.value),
                rel.exceeds_unit,
                fmt_f64(stirling),
                fmt_f64(optimal_epsilon(args.d)),
                fmt_f64(vr_optimal(m, args.d)),
            ));
        }
    }
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            prepare_out_dir(parent).map_err(io_err)?;
        }
    }
    std::fs::write(&args.out, &csv).map_err(io_err)?;
    print!("{csv}");
    Ok(())
}

pub fn gardner_capacity(_ctx: &Context, args: &GardnerCapacityArgs) -> CliResult {
    if args.n_min < 1 || args.n_max < args.n_min {
        return Err(invalid("require 1 ≤ n-min ≤ n-max"));
    }
    let rows = capacity_table(args.n_min..=args.n_max);
    let mut csv = String::from("n_qubits,dimension,manifold_dim,max_patterns,vr_at_sqrt_capacity\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n_qubits,
            row.dimension,
            row.manifold_dim,
            row.max_patterns,
            fmt_f64(row.vr_at_sqrt_capacity),
        ));
    }
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            prepare_out_dir(parent).map_err(io_err)?;
        }
    }
    std::fs::write(&args.out, &csv).map_err(io_err)?;
    print!("{csv}");
    Ok(())
}

// Re-exported for integration tests exercising the file formats.
#[allow(dead_code)]
pub fn choi_json_of(cand: &ChoiCandidate) -> ChoiJson {
    ChoiJson::from_candidate(cand)
}
