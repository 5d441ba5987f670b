//! Subcommand implementations. Each returns one JSON report; entropies are
//! always tagged with `"units": "k"`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use gibbslab::counting::{
    dilute_limit_deviation, ln_microstate_count, CountingConvention, StateSpaceSpec,
};
use gibbslab::demon::{run_unmixing_protocol, DemonConfig, LedgerRecord};
use gibbslab::logcomb::ln_binomial;
use gibbslab::mixing::{
    boltzmann_mixing_entropy, stirling_mixing_entropy, DiscriminationPolicy, MixingScenario,
};
use gibbslab::quantum::{
    antisymmetrize, enumerate_states, evolve_and_check_orthogonality, reduced_density_matrix,
    symmetrization_bookkeeping, ModeBasis, OneParticleState, ParticleLabel, Statistics,
    UnitaryMatrix,
};
use gibbslab::thermo::{GasSpecimen, Species};

use crate::config::KeyValueFile;
use crate::manifest::{checksum, RunManifest};
use crate::output::CliError;

/// Output directory: `--out` flag, else `GIBBSLAB_OUT`, else the working
/// directory.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("GIBBSLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::new("io", format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::new("io", format!("cannot write {}: {e}", path.display())))
}

fn generated_seed() -> u64 {
    // wall clock + pid through FNV; no statistical demands on the seed
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    let tagged = format!("{nanos}:{}", std::process::id());
    u64::from_str_radix(&checksum(tagged.as_bytes())[6..], 16).unwrap_or(nanos)
}

pub fn cmd_count(particles: u64, states: u64, convention: &str) -> Result<Value, CliError> {
    let convention: CountingConvention = convention
        .parse()
        .map_err(|e| CliError::new("counting", e))?;
    let spec = StateSpaceSpec::new(particles, states).map_err(|e| CliError::new("counting", e))?;
    let ln_count = ln_microstate_count::<f64>(spec, convention)
        .map_err(|e| CliError::new("counting", e))?
        .ln();
    let count = ln_count.exp();
    let dilute = match convention {
        CountingConvention::Bose | CountingConvention::Fermi if particles >= 1 => Some(
            dilute_limit_deviation::<f64>(spec, convention)
                .map_err(|e| CliError::new("counting", e))?,
        ),
        _ => None,
    };
    Ok(json!({
        "command": "count",
        "units": "k",
        "particles": particles,
        "states": states,
        "convention": convention.to_string(),
        "ln_count": ln_count,
        "count": if count.is_finite() { Value::from(count) } else { Value::Null },
        "dilute_deviation": dilute,
    }))
}

pub fn cmd_mix(scenario_path: &Path) -> Result<Value, CliError> {
    let mut file = KeyValueFile::load(scenario_path).map_err(|e| CliError::new("config", e))?;
    let species_left: String = file
        .require("species_left")
        .map_err(|e| CliError::new("config", e))?;
    let species_right: String = file
        .require("species_right")
        .map_err(|e| CliError::new("config", e))?;
    let similarity_left: f64 = file
        .optional("similarity_left")
        .map_err(|e| CliError::new("config", e))?
        .unwrap_or(0.0);
    let similarity_right: f64 = file
        .optional("similarity_right")
        .map_err(|e| CliError::new("config", e))?
        .unwrap_or(0.0);
    let particles_left: u64 = file
        .require("particles_left")
        .map_err(|e| CliError::new("config", e))?;
    let particles_right: u64 = file
        .require("particles_right")
        .map_err(|e| CliError::new("config", e))?;
    let volume_left: f64 = file
        .require("volume_left")
        .map_err(|e| CliError::new("config", e))?;
    let volume_right: f64 = file
        .require("volume_right")
        .map_err(|e| CliError::new("config", e))?;
    let temperature: f64 = file
        .require("temperature")
        .map_err(|e| CliError::new("config", e))?;
    let policy: DiscriminationPolicy = file
        .require::<String>("policy")
        .map_err(|e| CliError::new("config", e))?
        .parse()
        .map_err(|e| CliError::new("mixing", e))?;
    let convention: CountingConvention = file
        .require::<String>("convention")
        .map_err(|e| CliError::new("config", e))?
        .parse()
        .map_err(|e| CliError::new("counting", e))?;
    let states_per_volume: f64 = file
        .require("states_per_volume")
        .map_err(|e| CliError::new("config", e))?;
    file.reject_unknown()
        .map_err(|e| CliError::new("config", e))?;

    let left = GasSpecimen::new(
        Species::with_similarity(species_left.clone(), similarity_left),
        particles_left,
        volume_left,
        temperature,
    )
    .map_err(|e| CliError::new("thermo", e))?;
    let right = GasSpecimen::new(
        Species::with_similarity(species_right.clone(), similarity_right),
        particles_right,
        volume_right,
        temperature,
    )
    .map_err(|e| CliError::new("thermo", e))?;
    let scenario = MixingScenario::new(left, right, policy, convention, states_per_volume)
        .map_err(|e| CliError::new("mixing", e))?;
    let exact = boltzmann_mixing_entropy(&scenario).map_err(|e| CliError::new("mixing", e))?;
    let stirling = stirling_mixing_entropy(&scenario).map_err(|e| CliError::new("mixing", e))?;

    Ok(json!({
        "command": "mix",
        "units": "k",
        "scenario": {
            "species_left": species_left,
            "species_right": species_right,
            "particles_left": particles_left,
            "particles_right": particles_right,
            "volume_left": volume_left,
            "volume_right": volume_right,
            "temperature": temperature,
            "policy": policy.to_string(),
            "convention": convention.to_string(),
            "states_per_volume": states_per_volume,
        },
        "delta_s_exact": exact,
        "delta_s_stirling": stirling,
        "stirling_gap": exact - stirling,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemonParams {
    pub particles_per_side: u64,
    pub box_width: f64,
    pub box_height: f64,
    pub temperature: f64,
    /// One run per speed; list them fast to slow for a dissipation ladder.
    pub speeds: Vec<f64>,
    pub thermal_walls: bool,
    pub quasistatic_fraction: f64,
    pub mix_time: Option<f64>,
    pub sample_interval: Option<f64>,
}

impl DemonParams {
    fn config(&self, speed: f64, seed: u64) -> DemonConfig {
        DemonConfig {
            particles_per_side: self.particles_per_side,
            box_width: self.box_width,
            box_height: self.box_height,
            temperature: self.temperature,
            membrane_speed: speed,
            seed,
            thermal_walls: self.thermal_walls,
            quasistatic_fraction: self.quasistatic_fraction,
            mix_time: self.mix_time,
            sample_interval: self.sample_interval,
        }
    }
}

fn parse_demon_config(path: &Path) -> Result<(DemonParams, Option<u64>), CliError> {
    let mut file = KeyValueFile::load(path).map_err(|e| CliError::new("config", e))?;
    let particles_per_side: u64 = file
        .require("particles_per_side")
        .map_err(|e| CliError::new("config", e))?;
    let temperature: f64 = file
        .require("temperature")
        .map_err(|e| CliError::new("config", e))?;
    let single: Option<f64> = file
        .optional("membrane_speed")
        .map_err(|e| CliError::new("config", e))?;
    let ladder: Option<Vec<f64>> = file
        .optional_list("speed_ladder")
        .map_err(|e| CliError::new("config", e))?;
    let speeds = match (single, ladder) {
        (Some(_), Some(_)) => {
            return Err(CliError::new(
                "config",
                "give either membrane_speed or speed_ladder, not both",
            ))
        }
        (Some(speed), None) => vec![speed],
        (None, Some(ladder)) if !ladder.is_empty() => ladder,
        _ => {
            return Err(CliError::new(
                "config",
                "missing membrane_speed (or a nonempty speed_ladder)",
            ))
        }
    };
    let params = DemonParams {
        particles_per_side,
        box_width: file
            .optional("box_width")
            .map_err(|e| CliError::new("config", e))?
            .unwrap_or(1.0),
        box_height: file
            .optional("box_height")
            .map_err(|e| CliError::new("config", e))?
            .unwrap_or(1.0),
        temperature,
        speeds,
        thermal_walls: file
            .optional("thermal_walls")
            .map_err(|e| CliError::new("config", e))?
            .unwrap_or(true),
        quasistatic_fraction: file
            .optional("quasistatic_fraction")
            .map_err(|e| CliError::new("config", e))?
            .unwrap_or(0.01),
        mix_time: file
            .optional("mix_time")
            .map_err(|e| CliError::new("config", e))?,
        sample_interval: file
            .optional("sample_interval")
            .map_err(|e| CliError::new("config", e))?,
    };
    let seed: Option<u64> = file
        .optional("seed")
        .map_err(|e| CliError::new("config", e))?;
    file.reject_unknown()
        .map_err(|e| CliError::new("config", e))?;
    Ok((params, seed))
}

fn ledger_csv(records: &[LedgerRecord]) -> String {
    let mut text = String::from("time,event,work_delta,heat_delta,left_count\n");
    for record in records {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            record.time, record.kind, record.work_delta, record.heat_delta, record.left_count
        ));
    }
    text
}

/// Runs the demon protocol for every configured speed, writes the ledgers,
/// the summary and the manifest into `out_dir`, and returns the report.
pub fn run_demon(params: &DemonParams, seed: u64, out_dir: &Path) -> Result<Value, CliError> {
    ensure_dir(out_dir)?;
    let mut runs = Vec::new();
    let mut output_bytes: Vec<u8> = Vec::new();
    for (index, &speed) in params.speeds.iter().enumerate() {
        let config = params.config(speed, seed);
        let (measurement, records) =
            run_unmixing_protocol(&config).map_err(|e| CliError::new("demon", e))?;
        let ledger = ledger_csv(&records);
        let ledger_name = format!("demon-ledger-{index}.csv");
        write_file(&out_dir.join(&ledger_name), &ledger)?;
        output_bytes.extend_from_slice(ledger.as_bytes());
        runs.push(json!({
            "speed": speed,
            "work_invested": measurement.work_invested,
            "entropy_estimate": measurement.entropy_estimate,
            "relative_deviation": measurement.relative_deviation,
            "first_law_residual": measurement.first_law_residual,
            "events": measurement.events_processed,
            "ledger_file": ledger_name,
        }));
    }

    // dissipation ladder: judged fast to slow regardless of listing order
    let monotone = if params.speeds.len() >= 2 {
        let mut ordered: Vec<(f64, f64)> = params
            .speeds
            .iter()
            .zip(&runs)
            .map(|(&speed, run)| (speed, run["entropy_estimate"].as_f64().unwrap()))
            .collect();
        ordered.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        Value::from(ordered.windows(2).all(|pair| pair[0].1 > pair[1].1))
    } else {
        Value::Null
    };

    let target = 2.0 * params.particles_per_side as f64 * std::f64::consts::LN_2;
    let summary = json!({
        "command": "demon",
        "units": "k",
        "seed": seed,
        "target_entropy": target,
        "runs": runs,
        "monotone_approach": monotone,
    });
    let summary_text = {
        let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
        text
    };
    write_file(&out_dir.join("demon-summary.json"), &summary_text)?;
    output_bytes.extend_from_slice(summary_text.as_bytes());

    let manifest = RunManifest::new(
        "demon",
        serde_json::to_value(params).expect("params serialize"),
        seed,
        checksum(&output_bytes),
    );
    write_file(&out_dir.join("demon-manifest.json"), &manifest.to_json())?;

    let mut report = summary;
    report["manifest_file"] = Value::from("demon-manifest.json");
    report["output_checksum"] = Value::from(manifest.output_checksum);
    Ok(report)
}

pub fn cmd_demon(
    config_path: &Path,
    seed_flag: Option<u64>,
    out_flag: Option<PathBuf>,
) -> Result<Value, CliError> {
    let (params, seed_from_file) = parse_demon_config(config_path)?;
    let seed = seed_flag.or(seed_from_file).unwrap_or_else(generated_seed);
    let out_dir = resolve_out_dir(out_flag);
    run_demon(&params, seed, &out_dir)
}

pub fn cmd_quantum_enumerate(
    particles: u64,
    states: usize,
    statistics: &str,
) -> Result<Value, CliError> {
    let statistics: Statistics = statistics
        .parse()
        .map_err(|e| CliError::new("quantum", e))?;
    let basis = ModeBasis::split(states, 0).map_err(|e| CliError::new("quantum", e))?;
    let count =
        enumerate_states(particles, &basis, statistics).map_err(|e| CliError::new("quantum", e))?;
    Ok(json!({
        "command": "quantum-enumerate",
        "particles": particles,
        "modes": states,
        "statistics": statistics.to_string(),
        "count": count,
    }))
}

pub fn cmd_quantum_bookkeeping(per_side: u64, states_per_side: u64) -> Result<Value, CliError> {
    let report = symmetrization_bookkeeping(per_side, per_side, states_per_side, states_per_side);
    let missing =
        ln_binomial::<f64>(2 * per_side, per_side).map_err(|e| CliError::new("quantum", e))?;
    Ok(json!({
        "command": "quantum-bookkeeping",
        "units": "k",
        "particles_per_side": per_side,
        "states_per_side": states_per_side,
        "flawed_before": report.flawed_before.ln(),
        "flawed_after": report.flawed_after.ln(),
        "correct_before": report.correct_before.ln(),
        "correct_after": report.correct_after.ln(),
        "flawed_delta": report.flawed_delta(),
        "correct_delta": report.correct_delta(),
        "delta_difference": report.correct_delta() - report.flawed_delta(),
        "redistribution_binomial": missing,
    }))
}

pub fn cmd_quantum_reduced_dm(modes: usize) -> Result<Value, CliError> {
    if modes < 2 {
        return Err(CliError::new("quantum", "need at least two modes"));
    }
    let phi = OneParticleState::basis_state(modes, 0).map_err(|e| CliError::new("quantum", e))?;
    let psi = OneParticleState::basis_state(modes, 1).map_err(|e| CliError::new("quantum", e))?;
    let pair = antisymmetrize(&phi, &psi).map_err(|e| CliError::new("quantum", e))?;
    let first = reduced_density_matrix(&pair, ParticleLabel::First);
    let second = reduced_density_matrix(&pair, ParticleLabel::Second);
    let mut labels_gap = 0.0f64;
    let mut real = Vec::new();
    let mut imaginary = Vec::new();
    for row in 0..modes {
        let mut real_row = Vec::new();
        let mut imag_row = Vec::new();
        for column in 0..modes {
            let element = first.element(row, column);
            real_row.push(element.re);
            imag_row.push(element.im);
            labels_gap = labels_gap.max((element - second.element(row, column)).norm());
        }
        real.push(real_row);
        imaginary.push(imag_row);
    }
    Ok(json!({
        "command": "quantum-reduced-dm",
        "modes": modes,
        "eigenvalues": first.eigenvalues(),
        "matrix_real": real,
        "matrix_imag": imaginary,
        "trace": first.trace().re,
        "labels_max_difference": labels_gap,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrthogonalityParams {
    pub modes: usize,
    pub steps: u32,
}

/// The orthogonality run writes its report and manifest so it can be
/// reproduced from the manifest like any stochastic run.
pub fn run_orthogonality(
    params: &OrthogonalityParams,
    seed: u64,
    out_dir: &Path,
) -> Result<Value, CliError> {
    ensure_dir(out_dir)?;
    if params.modes < 2 {
        return Err(CliError::new("quantum", "need at least two modes"));
    }
    let unitary =
        UnitaryMatrix::haar_seeded(params.modes, seed).map_err(|e| CliError::new("quantum", e))?;
    let phi =
        OneParticleState::basis_state(params.modes, 0).map_err(|e| CliError::new("quantum", e))?;
    let psi = OneParticleState::basis_state(params.modes, params.modes - 1)
        .map_err(|e| CliError::new("quantum", e))?;
    let max_overlap = evolve_and_check_orthogonality(&phi, &psi, &unitary, params.steps)
        .map_err(|e| CliError::new("quantum", e))?;
    let results = json!({
        "command": "quantum-orthogonality",
        "modes": params.modes,
        "steps": params.steps,
        "seed": seed,
        "max_overlap": max_overlap,
        "within_contract": max_overlap < 1e-10,
    });
    let report_text = {
        let mut text = serde_json::to_string_pretty(&results).expect("report serializes");
        text.push('\n');
        text
    };
    write_file(&out_dir.join("orthogonality-report.json"), &report_text)?;
    let manifest = RunManifest::new(
        "quantum-orthogonality",
        serde_json::to_value(params).expect("params serialize"),
        seed,
        checksum(report_text.as_bytes()),
    );
    write_file(
        &out_dir.join("orthogonality-manifest.json"),
        &manifest.to_json(),
    )?;
    let mut report = results;
    report["manifest_file"] = Value::from("orthogonality-manifest.json");
    Ok(report)
}

pub fn cmd_quantum_orthogonality(
    modes: usize,
    steps: u32,
    seed_flag: Option<u64>,
    out_flag: Option<PathBuf>,
) -> Result<Value, CliError> {
    let params = OrthogonalityParams { modes, steps };
    let seed = seed_flag.unwrap_or_else(generated_seed);
    run_orthogonality(&params, seed, &resolve_out_dir(out_flag))
}

/// Re-executes a stochastic run from its manifest and verifies that the
/// regenerated outputs carry the same checksum. A mismatch is an error.
pub fn cmd_rerun(manifest_path: &Path, out_flag: Option<PathBuf>) -> Result<Value, CliError> {
    let manifest = RunManifest::load(manifest_path).map_err(|e| CliError::new("config", e))?;
    let out_dir = resolve_out_dir(out_flag);
    let report = match manifest.command.as_str() {
        "demon" => {
            let params: DemonParams = serde_json::from_value(manifest.params.clone())
                .map_err(|e| CliError::new("config", format!("invalid demon params: {e}")))?;
            run_demon(&params, manifest.seed, &out_dir)?
        }
        "quantum-orthogonality" => {
            let params: OrthogonalityParams = serde_json::from_value(manifest.params.clone())
                .map_err(|e| CliError::new("config", format!("invalid params: {e}")))?;
            run_orthogonality(&params, manifest.seed, &out_dir)?
        }
        other => {
            return Err(CliError::new(
                "usage",
                format!("manifest command `{other}` is not re-runnable"),
            ))
        }
    };
    let actual = report["output_checksum"]
        .as_str()
        .map(str::to_string)
        .unwrap_or_else(|| {
            // orthogonality reports embed no checksum; recompute from the file
            let path = out_dir.join("orthogonality-report.json");
            std::fs::read(&path)
                .map(|bytes| checksum(&bytes))
                .unwrap_or_default()
        });
    if actual != manifest.output_checksum {
        return Err(CliError::new(
            "reproducibility",
            format!(
                "rerun produced checksum {actual}, manifest says {}",
                manifest.output_checksum
            ),
        ));
    }
    Ok(json!({
        "command": "rerun",
        "rerun_of": manifest.command,
        "seed": manifest.seed,
        "reproduced": true,
        "output_checksum": actual,
        "out_dir": out_dir.display().to_string(),
    }))
}
