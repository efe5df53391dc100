use std::fmt::Write as _;

use serde::Serialize;
use vibsim_core::doktorov::{build_sequence, DoktorovSequence, DEFAULT_SCALE};
use vibsim_core::fock::{run_sequence, CutoffPolicy, TruncatedState, AUTO_CUTOFF_START};
use vibsim_core::input::ParamFile;
use vibsim_core::ion::{
    plan_pulses, records_tsv, sampled_spectrum, DetectionModel, DeviceConfig, FdmTable, PulseSchedule,
    SampledSpectrum, TransferFidelity, OUT_OF_MODEL_RANGE,
};
use vibsim_core::spectrum::{broaden, stick_spectrum, StickSpectrum, WidthKind};
use vibsim_core::Result;

use crate::output::{Broadening, Metadata, OutDir};
use crate::{
    BroadenArgs, CutoffArgs, DecomposeArgs, DeviceArgs, Emit, EmulateArgs, InputArgs, MeasureArgs, PulsePlanArgs,
    SpectrumArgs,
};

struct Loaded {
    file: ParamFile,
    scale: f64,
    sequence: DoktorovSequence,
    warnings: Vec<String>,
}

fn load(args: &InputArgs) -> Result<Loaded> {
    let file = ParamFile::load(&args.input)?;
    let scale = args.scale.or(file.scale).unwrap_or(DEFAULT_SCALE);
    let sequence = build_sequence(&file.params, scale)?;
    let warnings = sequence.warnings();
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(Loaded {
        file,
        scale,
        sequence,
        warnings,
    })
}

fn metadata(command: &'static str, args: &InputArgs, loaded: &Loaded) -> Metadata {
    Metadata {
        tool: "vibsim",
        version: env!("CARGO_PKG_VERSION"),
        command,
        input: args.input.display().to_string(),
        name: loaded.file.name.clone(),
        params: loaded.file.params.clone(),
        scale: loaded.scale,
        sequence: loaded.sequence.clone(),
        cutoff_policy: None,
        cutoffs: None,
        leakage: None,
        broadening: None,
        device: None,
        detection: None,
        warnings: loaded.warnings.clone(),
        files: Vec::new(),
    }
}

fn policy(args: &CutoffArgs, nmodes: usize) -> CutoffPolicy {
    if let Some(c) = args.cutoff {
        CutoffPolicy::Fixed(vec![c; nmodes])
    } else if let Some(cs) = &args.cutoffs {
        CutoffPolicy::Fixed(cs.clone())
    } else {
        CutoffPolicy::Auto {
            start: AUTO_CUTOFF_START.min(args.cutoff_cap),
            cap: args.cutoff_cap,
            target: args.leakage_target,
        }
    }
}

fn simulate(loaded: &Loaded, cutoff: &CutoffArgs, meta: &mut Metadata) -> Result<TruncatedState> {
    let policy = policy(cutoff, loaded.sequence.nmodes());
    let state = run_sequence(loaded.sequence.nmodes(), &loaded.sequence.ops(), &policy)?;
    meta.cutoff_policy = Some(policy);
    meta.cutoffs = Some(state.cutoffs().to_vec());
    meta.leakage = Some(state.leakage());
    Ok(state)
}

fn broadening(args: &BroadenArgs) -> Broadening {
    Broadening {
        width: args.width,
        width_kind: WidthKind::from(args.width_kind),
        grid_step: args.grid_step,
        merge_tol: args.merge_tol,
    }
}

fn device_config(device: Option<&DeviceArgs>, measure: Option<&MeasureArgs>) -> Result<DeviceConfig> {
    let mut cfg = DeviceConfig::default();
    if let Some(d) = device {
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.rate_displacement, d.rate_displacement);
        set(&mut cfg.rate_squeeze, d.rate_squeeze);
        set(&mut cfg.rate_rotation, d.rate_rotation);
        set(&mut cfg.trap_freq_x, d.trap_freq_x);
        set(&mut cfg.trap_freq_y, d.trap_freq_y);
        set(&mut cfg.lamb_dicke_x, d.lamb_dicke_x);
        set(&mut cfg.lamb_dicke_y, d.lamb_dicke_y);
    }
    if let Some(m) = measure {
        cfg.rng_seed = m.seed;
        cfg.shots = m.shots.unwrap_or(cfg.shots);
        cfg.eta_up = m.eta_up.unwrap_or(cfg.eta_up);
        cfg.eta_down = m.eta_down.unwrap_or(cfg.eta_down);
        cfg.target_threshold = m.target_threshold.unwrap_or(cfg.target_threshold);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn detection_model(cfg: &DeviceConfig, m: &MeasureArgs) -> Result<DetectionModel> {
    let transfer = if let Some(path) = &m.fdm_table {
        TransferFidelity::Table(FdmTable::load(path)?)
    } else if let Some(f_pi) = m.f_pi {
        TransferFidelity::Synthetic { f_pi }
    } else {
        TransferFidelity::Table(FdmTable::default())
    };
    DetectionModel::new(cfg.eta_up, cfg.eta_down, transfer)
}

fn plan(loaded: &Loaded, cfg: &DeviceConfig, include_zero: bool) -> Result<PulseSchedule> {
    let schedule = plan_pulses(&loaded.sequence, cfg)?;
    Ok(if include_zero { schedule } else { schedule.without_zero() })
}

fn print_strongest(label: &str, sticks: &StickSpectrum, count: usize) {
    let mut by_intensity: Vec<_> = sticks.sticks.iter().collect();
    by_intensity.sort_by(|a, b| b.intensity.total_cmp(&a.intensity));
    println!("{label}:");
    for s in by_intensity.into_iter().take(count) {
        let labels: Vec<String> = s.assignments.iter().map(|a| a.to_string()).collect();
        println!("  {:>10.1} cm^-1  {:.6}  {}", s.frequency, s.intensity, labels.join(" "));
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

pub fn decompose(args: &DecomposeArgs) -> Result<()> {
    let loaded = load(&args.input)?;
    let seq = &loaded.sequence;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(seq).map_err(|e| vibsim_core::Error::Io(e.into()))?
        );
    } else {
        if let Some(name) = &loaded.file.name {
            println!("molecule: {name}");
        }
        println!("scale: {}", seq.scale);
        println!("1 squeeze          zeta  = {}", fmt_vec(&seq.zeta));
        println!("2 rotate           theta = {:.4} rad", seq.theta);
        println!("3 inverse squeeze  zeta' = {}  (applied as -zeta')", fmt_vec(&seq.zeta_prime));
        println!("4 displace         delta = {}", fmt_vec(&seq.delta));
    }
    let out = OutDir::create(&args.input.out_dir)?;
    out.finish("decompose.json", metadata("decompose", &args.input, &loaded), NoExtra {})?;
    Ok(())
}

#[derive(Serialize)]
struct NoExtra {}

#[derive(Serialize)]
struct SpectrumDoc<'a> {
    spectrum: &'a StickSpectrum,
}

pub fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let loaded = load(&args.input)?;
    let mut meta = metadata("spectrum", &args.input, &loaded);
    let state = simulate(&loaded, &args.cutoff, &mut meta)?;
    let b = broadening(&args.broaden);
    let sticks = stick_spectrum(&state, &loaded.file.params.omega_final, loaded.file.params.omega_00, b.merge_tol)?;

    let mut out = OutDir::create(&args.input.out_dir)?;
    if args.emit.contains(&Emit::Sticks) {
        out.write("sticks.tsv", sticks.to_tsv().as_bytes())?;
    }
    if args.emit.contains(&Emit::Curve) {
        let curve = broaden(&sticks, b.width, b.width_kind, b.grid_step)?;
        out.write("curve.tsv", curve.to_tsv().as_bytes())?;
    }
    if args.emit.contains(&Emit::PulsePlan) {
        let schedule = plan(&loaded, &DeviceConfig::default(), false)?;
        out.write("pulses.tsv", schedule.to_tsv().as_bytes())?;
    }
    meta.broadening = Some(b);
    println!(
        "cutoffs {:?}, leakage {:.3e}, {} sticks, total intensity {:.9}",
        state.cutoffs(),
        state.leakage(),
        sticks.len(),
        sticks.total_intensity()
    );
    print_strongest("strongest sticks", &sticks, 5);
    let dir = out.finish("spectrum.json", meta, SpectrumDoc { spectrum: &sticks })?;
    println!("wrote {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct EmulateDoc<'a> {
    ideal: &'a StickSpectrum,
    sampled: &'a SampledSpectrum,
}

fn raw_vs_corrected_tsv(sampled: &SampledSpectrum) -> String {
    let mut out = String::from(
        "frequency_cm1\tassignment\tideal\traw_p4\tcorrected_p4\tcorrected_minus_raw\tcorrected_minus_ideal\tstderr\n",
    );
    let mut rows: Vec<_> = sampled.targets.iter().collect();
    rows.sort_by(|a, b| a.frequency.total_cmp(&b.frequency).then_with(|| a.index.cmp(&b.index)));
    for t in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.frequency,
            t.index,
            t.ideal,
            t.record.p4,
            t.p4_corrected,
            t.p4_corrected - t.record.p4,
            t.p4_corrected - t.ideal,
            t.stderr
        );
    }
    out
}

pub fn emulate(args: &EmulateArgs) -> Result<()> {
    let loaded = load(&args.input)?;
    let mut meta = metadata("emulate", &args.input, &loaded);
    let cfg = device_config(Some(&args.device), Some(&args.measure))?;
    let model = detection_model(&cfg, &args.measure)?;
    let state = simulate(&loaded, &args.cutoff, &mut meta)?;
    let b = broadening(&args.broaden);
    let params = &loaded.file.params;
    let ideal = stick_spectrum(&state, &params.omega_final, params.omega_00, b.merge_tol)?;
    let sampled = sampled_spectrum(&state, &params.omega_final, params.omega_00, &model, &cfg)?;

    let (lo, hi) = OUT_OF_MODEL_RANGE;
    let outside = sampled
        .targets
        .iter()
        .filter(|t| !(lo..=hi).contains(&t.p4_corrected))
        .count();
    if outside > 0 {
        let w = format!("{outside} corrected populations fall outside [{lo}, {hi}]");
        eprintln!("warning: {w}");
        meta.warnings.push(w);
    }

    let mut out = OutDir::create(&args.input.out_dir)?;
    out.write("records.tsv", records_tsv(&sampled.targets).as_bytes())?;
    if args.emit.contains(&Emit::Sticks) {
        out.write("raw_sticks.tsv", sampled.raw.to_tsv().as_bytes())?;
        out.write("corrected_sticks.tsv", sampled.corrected.to_tsv().as_bytes())?;
    }
    if args.emit.contains(&Emit::Curve) {
        let curve = broaden(&sampled.corrected, b.width, b.width_kind, b.grid_step)?;
        out.write("corrected_curve.tsv", curve.to_tsv().as_bytes())?;
    }
    if args.emit.contains(&Emit::RawVsCorrected) {
        out.write("raw_vs_corrected.tsv", raw_vs_corrected_tsv(&sampled).as_bytes())?;
    }
    if args.emit.contains(&Emit::PulsePlan) {
        out.write("pulses.tsv", plan(&loaded, &cfg, false)?.to_tsv().as_bytes())?;
    }
    meta.broadening = Some(b);
    meta.device = Some(cfg.clone());
    meta.detection = Some(model);
    println!(
        "{} targets measured with {} shots each (seed {}), cutoffs {:?}",
        sampled.targets.len(),
        cfg.shots,
        cfg.rng_seed,
        state.cutoffs()
    );
    print_strongest("strongest corrected sticks", &sampled.corrected, 5);
    let dir = out.finish(
        "emulate.json",
        meta,
        EmulateDoc {
            ideal: &ideal,
            sampled: &sampled,
        },
    )?;
    println!("wrote {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct PulseDoc<'a> {
    schedule: &'a PulseSchedule,
}

pub fn pulse_plan(args: &PulsePlanArgs) -> Result<()> {
    let loaded = load(&args.input)?;
    let cfg = device_config(Some(&args.device), None)?;
    let schedule = plan(&loaded, &cfg, args.include_zero)?;
    let tsv = schedule.to_tsv();
    print!("{tsv}");
    println!("total duration {:.1} us", schedule.total_duration());
    let mut meta = metadata("pulse-plan", &args.input, &loaded);
    for w in schedule.warnings() {
        if !meta.warnings.iter().any(|m| m == w) {
            meta.warnings.push(w.to_string());
        }
    }
    meta.device = Some(cfg);
    let mut out = OutDir::create(&args.input.out_dir)?;
    out.write("pulses.tsv", tsv.as_bytes())?;
    out.finish("pulse_plan.json", meta, PulseDoc { schedule: &schedule })?;
    Ok(())
}
