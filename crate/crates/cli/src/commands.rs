//! Command bodies. Each returns the text destined for stdout; file outputs
//! go to the configured output directory next to the resolved config.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use nsdi::analysis::{
    hump_metric, ion_parallel_histogram, perp_electron_histogram, perp_electron_magnitude_histogram, summarize,
    BinSpec, Outcome,
};
use nsdi::ensemble::{run_range, EnsembleConfig};
use nsdi::integrator::{integrate, write_trajectory_csv, IntegratorConfig, SampleMode};
use nsdi::physics::sym2e::potential_at;
use nsdi::physics::{SymModel, SymState2e};
use nsdi::saddle::ngon::{ngon_saddle_scan, write_ngon_csv};
use nsdi::saddle::perturb::{default_scan_config, write_full3d_csv};
use nsdi::saddle::{
    axial_rotation_generator, classify_stability_modulo, hessian_full3d, hessian_full3d_fd, max_relative_difference,
    perturbed_saddle_trajectories, saddle_sym2e, sign_counts, stability::FD_STEP, symmetric_eigenvalues,
    PerturbationSpec, SignCounts, StabilitySpectrum,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::units::{field_from_intensity, intensity_from_field};

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(CliError::io(format!("creating {}", path.display())))
}

fn write_with<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut out = create(path)?;
    f(&mut out)
        .and_then(|_| out.flush())
        .map_err(CliError::io(format!("writing {}", path.display())))
}

/// Frozen-field saddle at `ε = F cos(phase)`.
pub fn cmd_saddle(field_strength: f64, phase: f64) -> CliResult<String> {
    Ok(json(&saddle_sym2e(field_strength * phase.cos())?))
}

#[derive(Debug, Serialize)]
pub struct StabilityReport {
    pub eps: f64,
    /// Raw eigenvalues of the 6×6 Hessian, ascending.
    pub eigenvalues: Vec<f64>,
    /// Raw sign counts; the axial rotation shows up as a zero.
    #[serde(flatten)]
    pub signs: SignCounts,
    /// Largest analytic vs finite-difference Hessian difference, relative to
    /// the largest analytic entry.
    pub fd_max_rel_diff: f64,
    /// Signature with the axial rotation factored out.
    pub modulo_rotation: StabilitySpectrum,
}

pub fn stability_report(eps: f64) -> CliResult<StabilityReport> {
    let q = saddle_sym2e(eps)?.configuration();
    let h = hessian_full3d(&q, eps)?;
    let fd = hessian_full3d_fd(&q, eps, FD_STEP)?;
    let eigenvalues = symmetric_eigenvalues(&h);
    Ok(StabilityReport {
        eps,
        signs: sign_counts(&eigenvalues),
        eigenvalues,
        fd_max_rel_diff: max_relative_difference(&h, &fd),
        modulo_rotation: classify_stability_modulo(&h, &[axial_rotation_generator(&q)])?,
    })
}

pub fn cmd_stability(field_strength: f64) -> CliResult<String> {
    Ok(json(&stability_report(field_strength)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryStart {
    /// Explicit `(x, y, p_x, p_y)` at `t = 0`.
    State([f64; 4]),
    /// At the frozen saddle of the envelope peak, moving outward with total
    /// energy `energy`.
    Saddle { energy: f64 },
}

/// Initial time and state for [`cmd_trajectory`].
pub fn trajectory_start(cfg: &RunConfig, start: TrajectoryStart) -> CliResult<(f64, SymState2e)> {
    match start {
        TrajectoryStart::State([x, y, px, py]) => Ok((0.0, SymState2e::new(x, y, px, py))),
        TrajectoryStart::Saddle { energy } => {
            let t0 = 0.5 * cfg.field.t_d;
            let info = saddle_sym2e(cfg.field.effective_field(t0))?;
            let [x, y] = info.position;
            let kinetic = energy - potential_at(x, y, info.eps)?;
            if kinetic < 0.0 {
                return Err(CliError::Usage(format!(
                    "energy {energy} is below the saddle energy {}",
                    info.v_s
                )));
            }
            let p = kinetic.sqrt();
            let r = x.hypot(y);
            Ok((t0, SymState2e::new(x, y, p * x / r, p * y / r)))
        }
    }
}

/// Symmetric-subspace trajectory as CSV with `r` and `r_saddle` columns.
pub fn cmd_trajectory(cfg: &RunConfig, start: TrajectoryStart) -> CliResult<String> {
    let (t0, s) = trajectory_start(cfg, start)?;
    let config = IntegratorConfig {
        sample_mode: SampleMode::Every,
        ..cfg.integrator()
    };
    let record = integrate(&SymModel::new(cfg.field), s.to_array(), t0, &config)?;
    let mut buf = Vec::new();
    write_trajectory_csv(&record, &mut buf).expect("writing to memory");
    Ok(String::from_utf8(buf).expect("CSV is ASCII"))
}

pub const OUTCOMES_CSV_HEADER: &str = "index,phi,tag,p_parallel_ion,p_perp_electron,final_H,escape_crossing_time";

fn tag_name(o: &Outcome) -> String {
    serde_json::to_value(o.tag)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn write_outcomes(path: &Path, outcomes: &[Outcome]) -> CliResult<()> {
    write_with(path, |out| {
        writeln!(out, "{OUTCOMES_CSV_HEADER}")?;
        for o in outcomes {
            let crossing = o.escape_crossing_time.map(|t| format!("{t:.16e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{:.16e},{},{:.16e},{:.16e},{:.16e},{}",
                o.index,
                o.phi,
                tag_name(o),
                o.p_parallel_ion,
                o.p_perp_electron,
                o.final_h,
                crossing
            )?;
        }
        Ok(())
    })
}

/// Runs the ensemble in index chunks, reporting progress on stderr.
pub fn run_ensemble_chunks(cfg: &RunConfig, progress: bool) -> CliResult<Vec<Outcome>> {
    let ens = EnsembleConfig {
        field: cfg.field,
        sampling: cfg.ensemble,
        integrator: cfg.integrator(),
    };
    let ens = EnsembleConfig {
        integrator: IntegratorConfig {
            sample_mode: SampleMode::Endpoints,
            ..ens.integrator
        },
        ..ens
    };
    ens.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let n = ens.sampling.n_samples;
    let chunk = (n / 20).max(1000);
    let mut outcomes = Vec::with_capacity(n as usize);
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        outcomes.extend(pool.install(|| run_range(&ens, start..end))?);
        if progress {
            eprintln!("progress {end}/{n}");
        }
        start = end;
    }
    Ok(outcomes)
}

/// Ensemble run: outcomes, histograms and a summary in the output directory.
pub fn cmd_ensemble(cfg: &RunConfig, progress: bool) -> CliResult<String> {
    cfg.persist()?;
    let outcomes = run_ensemble_chunks(cfg, progress)?;
    let dir = &cfg.output_dir;
    write_outcomes(&dir.join("outcomes.csv"), &outcomes)?;
    let summary = summarize(&outcomes, cfg.bins.parallel);
    let text = json(&summary);
    fs::write(dir.join("summary.json"), &text).map_err(CliError::io("writing summary.json"))?;

    let parallel = ion_parallel_histogram(&outcomes, cfg.bins.parallel)?;
    write_with(&dir.join("parallel.csv"), |o| parallel.write_csv(o))?;
    let perp = perp_electron_magnitude_histogram(&outcomes, cfg.bins.perpendicular)?;
    write_with(&dir.join("perpendicular.csv"), |o| perp.write_csv(o))?;
    let p = cfg.bins.perpendicular;
    let signed_bins = BinSpec {
        lo: -p.hi,
        hi: p.hi,
        n_bins: 2 * p.n_bins,
    };
    let signed = perp_electron_histogram(&outcomes, signed_bins)?;
    write_with(&dir.join("perpendicular_signed.csv"), |o| signed.write_csv(o))?;
    debug_assert_eq!(summary.hump_metric, Some(hump_metric(&parallel)));
    Ok(text)
}

#[derive(Debug, Serialize)]
struct Fig4Row {
    displacement: f64,
    class: nsdi::saddle::EscapeClass,
    t_final: f64,
    final_h: f64,
    track: String,
}

/// Perturbed-saddle scan in the full 3-D model. Without `scan` only the
/// unperturbed launch runs.
pub fn cmd_fig4(cfg: &RunConfig, scan: bool) -> CliResult<String> {
    cfg.persist()?;
    let spec = if scan {
        cfg.perturbation.clone()
    } else {
        PerturbationSpec {
            displacements: vec![0.0],
            ..cfg.perturbation.clone()
        }
    };
    let integrator = IntegratorConfig {
        sample_mode: SampleMode::Every,
        ..cfg.integrator.unwrap_or(default_scan_config(&cfg.field))
    };
    let runs = perturbed_saddle_trajectories(&cfg.field, &spec, &integrator)?;
    let mut rows = Vec::with_capacity(runs.len());
    for (k, run) in runs.iter().enumerate() {
        let track = format!("track_{k:03}.csv");
        write_with(&cfg.output_dir.join(&track), |o| write_full3d_csv(&run.record, o))?;
        let last = run.record.last();
        rows.push(Fig4Row {
            displacement: run.displacement,
            class: run.class,
            t_final: last.t,
            final_h: last.energy,
            track,
        });
    }
    let text = json(&rows);
    fs::write(cfg.output_dir.join("fig4.json"), &text).map_err(CliError::io("writing fig4.json"))?;
    Ok(text)
}

/// Saddle existence for `N = n_min..=n_max` as CSV.
pub fn cmd_ngon_scan(n_min: u32, n_max: u32, field_strength: f64) -> CliResult<String> {
    if n_min < 2 || n_max < n_min {
        return Err(CliError::Usage(format!(
            "need 2 <= n-min <= n-max, got {n_min}..{n_max}"
        )));
    }
    if field_strength == 0.0 {
        return Err(nsdi::Error::ZeroField.into());
    }
    let rows: Vec<_> = (n_min..=n_max)
        .map(|n| (n, field_strength, ngon_saddle_scan(n, field_strength)))
        .collect();
    let mut buf = Vec::new();
    write_ngon_csv(&rows, &mut buf).expect("writing to memory");
    Ok(String::from_utf8(buf).expect("CSV is ASCII"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conversion {
    pub intensity_w_cm2: f64,
    pub field_au: f64,
}

pub fn convert(intensity: Option<f64>, field: Option<f64>) -> CliResult<Conversion> {
    let positive = |v: f64, what: &str| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Usage(format!("{what} must be positive, got {v}")))
        }
    };
    match (intensity, field) {
        (Some(i), None) => Ok(Conversion {
            intensity_w_cm2: positive(i, "intensity")?,
            field_au: field_from_intensity(i),
        }),
        (None, Some(f)) => Ok(Conversion {
            intensity_w_cm2: intensity_from_field(positive(f, "field")?),
            field_au: f,
        }),
        _ => Err(CliError::Usage("give exactly one of --intensity or --field".into())),
    }
}

pub fn cmd_convert(intensity: Option<f64>, field: Option<f64>) -> CliResult<String> {
    Ok(json(&convert(intensity, field)?))
}
