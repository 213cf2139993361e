//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use midec_core::features::{
    assemble_features, csp_fit_ovr, feature_names, normalize_apply, normalize_fit,
    read_feature_csv, trial_feature_row, write_feature_csv, CspModel, FeatureMatrix,
    NormalizationParams,
};
use midec_core::net::{load_checkpoint, save_checkpoint, HybridNetParams};
use midec_core::rl::{
    evaluate, stratified_split, train_dqn, ClassificationEnv, HistoryRow, Metrics,
    RewardStructure,
};
use midec_core::robust::{
    rnac, robust_value_iteration, LinearFeatures, RnacDiagnosticsRow, RobustMdp,
};
use midec_core::signal::{
    bandpass_filter, default_synthetic_spec, epoch_trials, generate_synthetic, load_recording,
    write_recording, EegRecording,
};

use crate::config::RunConfig;
use crate::error::CliError;

fn provenance(config: &RunConfig) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    map.insert("config_hash".to_string(), config.hash());
    map.insert("seed".to_string(), config.seed.to_string());
    map
}

fn provenance_comment(config: &RunConfig) -> String {
    format!("config_hash={} seed={}", config.hash(), config.seed)
}

fn ensure_out_dir(config: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", config.out_dir.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::data(format!("serialize {}: {e}", path.display())))?;
    fs::write(path, text).map_err(|e| CliError::io(format!("write {}: {e}", path.display())))
}

/// `synth`: generate a synthetic recording with planted ground truth.
pub fn cmd_synth(config: &RunConfig) -> Result<(), CliError> {
    ensure_out_dir(config)?;
    let s = &config.synth;
    let spec = default_synthetic_spec(
        s.n_channels,
        s.n_classes,
        s.trials_per_class,
        s.fs_hz,
        s.trial_len_s,
        s.gain_high,
        s.gain_low,
        s.noise_scale,
        config.seed,
    );
    let (rec, truth) = generate_synthetic(&spec)?;
    let manifest = config.manifest_path();
    write_recording(&rec, &manifest, "trials", Some(&provenance(config)))?;

    #[derive(Serialize)]
    struct GroundTruthOut<'a> {
        #[serde(flatten)]
        truth: &'a midec_core::signal::GroundTruth,
        config_hash: String,
    }
    write_json(
        &config.out_dir.join("ground_truth.json"),
        &GroundTruthOut {
            truth: &truth,
            config_hash: config.hash(),
        },
    )?;

    println!(
        "synth: {} trials ({} classes x {}), {} channels, {:.0} Hz, {:.1} s each -> {}",
        rec.trials.len(),
        s.n_classes,
        s.trials_per_class,
        s.n_channels,
        s.fs_hz,
        s.trial_len_s,
        manifest.display()
    );
    Ok(())
}

fn preprocessed_recording(config: &RunConfig) -> Result<(EegRecording, usize), CliError> {
    let manifest = config.manifest_path();
    let mut rec = load_recording(&manifest)?;
    let (epoch, n_components, _) = config.effective();
    if let Some(e) = &epoch {
        rec = epoch_trials(&rec, e.t_min_s, e.t_max_s)?;
    }
    if let Some(band) = &config.filter {
        rec = bandpass_filter(&rec, &band.to_band())?;
    }
    Ok((rec, n_components))
}

/// `features`: epoch -> filter -> CSP -> assemble -> normalize (fit on the
/// training split only).
pub fn cmd_features(config: &RunConfig, jobs: usize) -> Result<(), CliError> {
    ensure_out_dir(config)?;
    let (rec, n_components) = preprocessed_recording(config)?;
    let (epoch, _, welch) = config.effective();
    let models = csp_fit_ovr(&rec, n_components, config.csp.eps_scale)?;
    let bands = midec_core::features::BandPair {
        alpha: config.bands.alpha.to_band(),
        beta: config.bands.beta.to_band(),
    };

    let fm = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::data(format!("thread pool: {e}")))?;
        let names = feature_names(models.len(), n_components);
        let rows: Vec<Result<Vec<f64>, midec_core::CoreError>> = pool.install(|| {
            use rayon::prelude::*;
            rec.trials
                .par_iter()
                .enumerate()
                .map(|(idx, trial)| {
                    trial_feature_row(trial, idx, &models, rec.sampling_rate_hz, &welch, &bands)
                })
                .collect()
        });
        let mut values = ndarray::Array2::zeros((rec.trials.len(), names.len()));
        let mut labels = Vec::with_capacity(rec.trials.len());
        for (idx, row) in rows.into_iter().enumerate() {
            let row = row?;
            for (j, v) in row.into_iter().enumerate() {
                values[(idx, j)] = v;
            }
            labels.push(rec.trials[idx].label);
        }
        FeatureMatrix {
            values,
            feature_names: names,
            labels,
            norm_state: None,
        }
    } else {
        assemble_features(&rec, &models, &welch, &bands)?
    };

    // normalization statistics come from the training split only
    let (train_idx, _) = stratified_split(&fm.labels, config.split.train_frac, config.seed);
    let mut passes: Vec<NormalizationParams> = Vec::new();
    let mut normalized = fm.clone();
    let n_passes = if config.normalize.twice { 2 } else { 1 };
    for _ in 0..n_passes {
        let train = normalized.select_rows(&train_idx);
        let (_, params) = normalize_fit(&train, config.normalize.method)?;
        normalized = normalize_apply(&normalized, &params)?;
        passes.push(params);
    }

    let features_path = config.features_path();
    write_feature_csv(&normalized, &features_path, Some(&provenance_comment(config)))?;

    #[derive(Serialize)]
    struct CspOut<'a> {
        models: &'a [CspModel],
        n_components: usize,
        epoch: Option<(f64, f64)>,
        nfft: Option<usize>,
        config_hash: String,
        seed: u64,
    }
    write_json(
        &config.out_dir.join("csp_models.json"),
        &CspOut {
            models: &models,
            n_components,
            epoch: epoch.as_ref().map(|e| (e.t_min_s, e.t_max_s)),
            nfft: welch.nfft,
            config_hash: config.hash(),
            seed: config.seed,
        },
    )?;

    #[derive(Serialize)]
    struct NormOut<'a> {
        passes: &'a [NormalizationParams],
        config_hash: String,
        seed: u64,
    }
    write_json(
        &config.out_dir.join("normalization.json"),
        &NormOut {
            passes: &passes,
            config_hash: config.hash(),
            seed: config.seed,
        },
    )?;

    println!(
        "features: {} trials x {} columns ({} models x {} components x 6 features) -> {}",
        normalized.n_trials(),
        normalized.n_features(),
        models.len(),
        n_components,
        features_path.display()
    );
    Ok(())
}

fn load_features(config: &RunConfig) -> Result<FeatureMatrix, CliError> {
    Ok(read_feature_csv(&config.features_path())?)
}

fn write_history_csv(
    path: &Path,
    history: &[HistoryRow],
    comment: &str,
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(comment);
    out.push('\n');
    out.push_str("step,phase,epsilon,action,reward,loss\n");
    for row in history {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.step, row.phase, row.epsilon, row.action, row.reward, row.loss
        ));
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| CliError::io(format!("write {}: {e}", path.display())))
}

fn train_on_split(
    config: &RunConfig,
    fm: &FeatureMatrix,
    reward: RewardStructure,
) -> Result<(HybridNetParams, Vec<HistoryRow>, FeatureMatrix, FeatureMatrix), CliError> {
    let (train_idx, test_idx) = stratified_split(&fm.labels, config.split.train_frac, config.seed);
    let train = fm.select_rows(&train_idx);
    let test = fm.select_rows(&test_idx);
    let n_classes = fm.n_classes();
    let net_cfg = config.net.to_core(fm.n_features(), n_classes);
    let mut net = HybridNetParams::init(&net_cfg, config.seed)?;
    let mut env = ClassificationEnv::new(
        train.values.clone(),
        train.labels.clone(),
        n_classes,
        reward,
        None,
    )?;
    let schedule = config.schedule.to_core(config.seed);
    let history = train_dqn(&mut net, &mut env, &schedule)?;
    Ok((net, history, train, test))
}

/// `train`: 75/25 stratified split, DQN training on the training split.
pub fn cmd_train(config: &RunConfig) -> Result<(), CliError> {
    ensure_out_dir(config)?;
    let fm = load_features(config)?;
    let reward = config.reward.to_core()?;
    let (net, history, train, _) = train_on_split(config, &fm, reward)?;

    save_checkpoint(
        &net,
        config.seed,
        provenance(config),
        &config.out_dir.join("checkpoint.json"),
    )?;
    write_history_csv(
        &config.out_dir.join("history.csv"),
        &history,
        &provenance_comment(config),
    )?;

    let metrics = evaluate(&net, &train, &reward, None, config.seed)?;
    println!(
        "train: {} steps, final-phase mean reward {:.3}; training-set accuracy {:.2}% \
         (macro F1 {:.2}%)",
        history.len(),
        mean_reward_tail(&history, 200),
        metrics.accuracy,
        metrics.f1
    );
    Ok(())
}

fn mean_reward_tail(history: &[HistoryRow], tail: usize) -> f64 {
    let n = history.len().min(tail).max(1);
    history[history.len() - n..]
        .iter()
        .map(|h| h.reward)
        .sum::<f64>()
        / n as f64
}

#[derive(Serialize)]
struct MetricsOut<'a> {
    #[serde(flatten)]
    metrics: &'a Metrics,
    config_hash: String,
    seed: u64,
}

/// `eval`: held-out metrics (optionally k-fold aggregated) for a checkpoint.
pub fn cmd_eval(config: &RunConfig, checkpoint: Option<PathBuf>) -> Result<(), CliError> {
    ensure_out_dir(config)?;
    let path = checkpoint.unwrap_or_else(|| config.out_dir.join("checkpoint.json"));
    let (net, _) = load_checkpoint(&path)?;
    let fm = load_features(config)?;
    if net.feature_dim() != fm.n_features() {
        return Err(CliError::data(format!(
            "checkpoint expects {} features but {} has {}",
            net.feature_dim(),
            config.features_path().display(),
            fm.n_features()
        )));
    }
    let reward = config.reward.to_core()?;
    let (_, test_idx) = stratified_split(&fm.labels, config.split.train_frac, config.seed);
    let test = fm.select_rows(&test_idx);
    let metrics = evaluate(&net, &test, &reward, config.eval.k_folds, config.seed)?;

    write_json(
        &config.out_dir.join("metrics.json"),
        &MetricsOut {
            metrics: &metrics,
            config_hash: config.hash(),
            seed: config.seed,
        },
    )?;
    println!(
        "eval: accuracy {:.2}% | f1 {:.2}% | precision {:.2}% | recall {:.2}% | \
         reward-based accuracy {:.2}",
        metrics.accuracy, metrics.f1, metrics.precision, metrics.recall,
        metrics.reward_based_accuracy
    );
    Ok(())
}

/// `sweep-rewards`: train and evaluate once per benchmark reward structure.
pub fn cmd_sweep_rewards(config: &RunConfig) -> Result<(), CliError> {
    ensure_out_dir(config)?;
    let fm = load_features(config)?;
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(&provenance_comment(config));
    out.push('\n');
    out.push_str("structure,accuracy,f1,precision,recall,reward_based_accuracy\n");
    println!("sweep-rewards: structure | accuracy | reward-based accuracy");
    for reward in RewardStructure::benchmark_set() {
        let (net, _, _, test) = train_on_split(config, &fm, reward)?;
        let metrics = evaluate(&net, &test, &reward, None, config.seed)?;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            reward.label(),
            metrics.accuracy,
            metrics.f1,
            metrics.precision,
            metrics.recall,
            metrics.reward_based_accuracy
        ));
        println!(
            "  {:>12} | {:6.2}% | {:8.2}",
            reward.label(),
            metrics.accuracy,
            metrics.reward_based_accuracy
        );
    }
    let path = config.out_dir.join("reward_sweep.csv");
    fs::write(&path, out).map_err(|e| CliError::io(format!("write {}: {e}", path.display())))?;
    println!("sweep-rewards: table -> {}", path.display());
    Ok(())
}

/// `rnac-demo`: run the robust actor-critic on a tabular fixture and report
/// the gap against the robust value-iteration oracle.
pub fn cmd_rnac_demo(config: &RunConfig, fixture: &Path) -> Result<(), CliError> {
    ensure_out_dir(config)?;
    let text = fs::read_to_string(fixture)
        .map_err(|e| CliError::io(format!("cannot read fixture {}: {e}", fixture.display())))?;
    let mdp = RobustMdp::from_fixture_json(&text)
        .map_err(|e| CliError::config(format!("fixture {}: {e}", fixture.display())))?;
    let set = config.rnac.uncertainty;
    let features = LinearFeatures::tabular(mdp.n_states, mdp.n_actions);
    let cfg = config.rnac.to_core();
    let (_, diagnostics) = rnac(&mdp, &set, &features, &cfg, config.seed)?;

    let path = config.out_dir.join("rnac_diagnostics.csv");
    write_diagnostics_csv(&path, &diagnostics, &provenance_comment(config))?;

    let v_star = robust_value_iteration(&mdp, &set, 1e-9)?;
    let optimal = mdp.rho.dot(&v_star);
    let reached = diagnostics.last().map(|d| d.robust_value).unwrap_or(0.0);
    println!(
        "rnac-demo: robust value {reached:.4} vs oracle optimum {optimal:.4} \
         (final gap {:.4}) -> {}",
        optimal - reached,
        path.display()
    );
    Ok(())
}

fn write_diagnostics_csv(
    path: &Path,
    rows: &[RnacDiagnosticsRow],
    comment: &str,
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(comment);
    out.push('\n');
    out.push_str("t,robust_value,mspbre,contraction_estimate\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.t, r.robust_value, r.mspbre, r.contraction_estimate
        ));
    }
    fs::write(path, out).map_err(|e| CliError::io(format!("write {}: {e}", path.display())))
}
