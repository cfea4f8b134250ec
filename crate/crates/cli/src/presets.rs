//! Built-in experiment configurations, one per reproduced table or figure.
//!
//! Start points, baseline tunings and burn-in lengths that the source
//! experiments leave open are fixed here; `scout show-preset <name>` prints
//! the full document.

use std::path::PathBuf;

use scout_core::samplers::SamplerKind;

use crate::config::{
    BasisVectorParams, DiagnosticsOptions, ExperimentConfig, ExportOptions, HorseshoeParams, SamplerSpec, TargetSpec,
};

/// Double banana baseline scale, giving about half the proposals accepted.
const DOUBLE_BANANA_RWM_SCALE: f64 = 1.3;
const DOUBLE_BANANA_MALA_STEP: f64 = 0.3;
const HORSESHOE_RWM_SCALE: f64 = 0.01;
const HORSESHOE_MALA_STEP: f64 = 0.005;
const HORSESHOE_SCOUT_SCALE: f64 = 0.1;

fn base(name: &str, description: &str, target: TargetSpec, iterations: usize, burn_in: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        description: description.to_string(),
        target,
        samplers: Vec::new(),
        iterations,
        burn_in,
        seed: 0,
        replicates: 1,
        x0: None,
        output_dir: PathBuf::from("runs").join(name),
        export: ExportOptions::default(),
        diagnostics: DiagnosticsOptions::default(),
    }
}

fn pt(chains: usize, scale: f64) -> SamplerSpec {
    let mut s = SamplerSpec::new(SamplerKind::Pt).labelled(&format!("pt_{chains}"));
    s.pt.chains = chains;
    s.pt.scale = scale;
    s
}

/// The nine comparison rows shared by the double banana, basis vector and
/// banana bunch tables.
fn nine_rows(rwm_scale: f64, mala_step: f64) -> Vec<SamplerSpec> {
    let mut rwm = SamplerSpec::new(SamplerKind::Rwm);
    rwm.rwm.scale = rwm_scale;
    let mut mala = SamplerSpec::new(SamplerKind::Mala);
    mala.mala.step = mala_step;
    vec![
        rwm,
        SamplerSpec::new(SamplerKind::Arwm),
        pt(2, rwm_scale),
        pt(5, rwm_scale),
        mala,
        SamplerSpec::new(SamplerKind::Dm),
        SamplerSpec::new(SamplerKind::DmFinite),
        SamplerSpec::new(SamplerKind::Scout),
        SamplerSpec::new(SamplerKind::ScoutFinite),
    ]
}

fn keep(rows: Vec<SamplerSpec>, labels: &[&str]) -> Vec<SamplerSpec> {
    rows.into_iter().filter(|s| labels.contains(&s.label().as_str())).collect()
}

fn banana() -> TargetSpec {
    TargetSpec::new("banana")
}

fn double_banana() -> TargetSpec {
    TargetSpec::new("double_banana")
}

fn basis() -> TargetSpec {
    TargetSpec::with_params("basis_vector_4d", &BasisVectorParams::default())
}

fn bunch() -> TargetSpec {
    TargetSpec::new("banana_bunch")
}

fn horseshoe(n: usize, p: usize) -> TargetSpec {
    TargetSpec::with_params("horseshoe", &HorseshoeParams { n, p, data_seed: 7 })
}

fn double_banana_table(name: &str, description: &str, rows: &[&str]) -> ExperimentConfig {
    let mut c = base(name, description, double_banana(), 50_000, 1_000);
    c.samplers = keep(nine_rows(DOUBLE_BANANA_RWM_SCALE, DOUBLE_BANANA_MALA_STEP), rows);
    c.x0 = Some(vec![0.0, 0.0]);
    c.diagnostics.left_fraction = true;
    c
}

fn basis_table(name: &str, description: &str, rows: &[&str]) -> ExperimentConfig {
    let mut c = base(name, description, basis(), 40_000, 2_000);
    c.samplers = keep(nine_rows(1.0, 0.5), rows);
    c.x0 = Some(vec![10.0, 0.0, 0.0, 0.0]);
    c.diagnostics.mode_radius = Some(3.0);
    c
}

fn bunch_table(name: &str, description: &str, iterations: usize, rows: &[&str]) -> ExperimentConfig {
    let mut c = base(name, description, bunch(), iterations, 1_000);
    c.samplers = keep(nine_rows(1.0, 0.5), rows);
    c.x0 = Some(vec![40.0, 0.0, 0.0]);
    c.diagnostics.mode_radius = Some(5.0);
    c
}

fn horseshoe_dm(kind: SamplerKind) -> SamplerSpec {
    let mut s = SamplerSpec::new(kind);
    s.dm.h = Some(5.0);
    s.dm.sigma = 0.1;
    s.dm.shrink_on_reject = true;
    s.scout.scale = HORSESHOE_SCOUT_SCALE;
    s
}

fn horseshoe_table(name: &str, description: &str, n: usize, p: usize, iterations: usize, rows: &[&str]) -> ExperimentConfig {
    let mut c = base(name, description, horseshoe(n, p), iterations, 5_000);
    let mut rwm = SamplerSpec::new(SamplerKind::Rwm);
    rwm.rwm.scale = HORSESHOE_RWM_SCALE;
    let mut mala = SamplerSpec::new(SamplerKind::Mala);
    mala.mala.step = HORSESHOE_MALA_STEP;
    let all = vec![
        rwm,
        SamplerSpec::new(SamplerKind::Arwm),
        pt(2, HORSESHOE_RWM_SCALE),
        pt(10, HORSESHOE_RWM_SCALE),
        mala,
        horseshoe_dm(SamplerKind::Dm),
        horseshoe_dm(SamplerKind::Scout),
    ];
    c.samplers = keep(all, rows);
    c.x0 = Some(vec![0.0; 2 * p + 2]);
    c
}

const NINE: [&str; 9] = [
    "rwm", "arwm", "pt_2", "pt_5", "mala", "dm", "dm_finite", "scout", "scout_finite",
];

type Builder = fn() -> ExperimentConfig;

const PRESETS: [(&str, Builder); 15] = [
    ("fig2_banana", || {
        let mut c = base(
            "fig2_banana",
            "Single banana, aRWM against the DM sampler; factor snapshots for the proposal contours",
            banana(),
            20_000,
            1_000,
        );
        c.samplers = vec![SamplerSpec::new(SamplerKind::Arwm), SamplerSpec::new(SamplerKind::Dm)];
        c.x0 = Some(vec![0.0, 0.0]);
        c.export.cholesky_stride = Some(500);
        c.diagnostics.left_fraction = true;
        c
    }),
    ("fig5_banana_finite", || {
        let mut c = base(
            "fig5_banana_finite",
            "Single banana, DM sampler with finite adaptation; diagnostics over the non-adaptive phase",
            banana(),
            40_000,
            20_000,
        );
        let mut s = SamplerSpec::new(SamplerKind::DmFinite);
        s.finite.threshold = Some(20_000);
        c.samplers = vec![s];
        c.x0 = Some(vec![0.0, 0.0]);
        c.diagnostics.left_fraction = true;
        c
    }),
    ("table1_all", || {
        let mut c = double_banana_table("table1_all", "Double banana, all nine samplers", &NINE);
        c.replicates = 3;
        c
    }),
    ("table1_scout", || {
        let mut c = double_banana_table("table1_scout", "Double banana, Scout MCMC row", &["scout"]);
        c.replicates = 3;
        c
    }),
    ("fig7_double_banana", || {
        let mut c = double_banana_table(
            "fig7_double_banana",
            "Double banana sample scatter for the perpetual samplers",
            &["rwm", "arwm", "pt_2", "pt_5", "mala", "dm", "scout"],
        );
        c.export.projections = vec![(0, 1)];
        c
    }),
    ("fig8_double_banana_finite", || {
        let mut c = double_banana_table(
            "fig8_double_banana_finite",
            "Double banana sample scatter for the finite variants",
            &["dm_finite", "scout_finite"],
        );
        c.export.projections = vec![(0, 1)];
        c
    }),
    ("table2_all", || {
        let mut c = basis_table("table2_all", "4D basis vector, all nine samplers", &NINE);
        c.replicates = 3;
        c
    }),
    ("fig9_basis_traces", || {
        let mut c = basis_table("fig9_basis_traces", "4D basis vector trace plots", &["pt_5", "scout"]);
        c.export.trace = true;
        c
    }),
    ("table3_all", || {
        let mut c = bunch_table("table3_all", "Banana bunch, all nine samplers", 100_000, &NINE);
        c.replicates = 3;
        c
    }),
    ("table3_reduced", || {
        let mut c = bunch_table(
            "table3_reduced",
            "Banana bunch, Scout MCMC at 30k iterations",
            30_000,
            &["scout"],
        );
        c.replicates = 3;
        c
    }),
    ("fig12_bunch_projections", || {
        let mut c = bunch_table(
            "fig12_bunch_projections",
            "Banana bunch samples projected on the coordinate planes",
            100_000,
            &["arwm", "pt_5", "scout", "scout_finite"],
        );
        c.export.projections = vec![(0, 1), (0, 2), (1, 2)];
        c
    }),
    ("table4_all", || {
        let mut c = horseshoe_table(
            "table4_all",
            "Horseshoe regression (n = 1000, p = 20), seven samplers",
            1_000,
            20,
            50_000,
            &["rwm", "arwm", "pt_2", "pt_10", "mala", "dm", "scout"],
        );
        c.replicates = 3;
        c
    }),
    ("table4_reduced", || {
        let mut c = horseshoe_table(
            "table4_reduced",
            "Horseshoe regression at reduced size (n = 200, p = 10), DM sampler",
            200,
            10,
            20_000,
            &["dm"],
        );
        c.replicates = 3;
        c
    }),
    ("table4_full_dm_arwm", || {
        let mut c = horseshoe_table(
            "table4_full_dm_arwm",
            "Horseshoe regression (n = 1000, p = 20), DM sampler against aRWM",
            1_000,
            20,
            50_000,
            &["arwm", "dm"],
        );
        c.replicates = 3;
        c
    }),
    ("table3_full_scout_arwm", || {
        let mut c = bunch_table(
            "table3_full_scout_arwm",
            "Banana bunch at 100k iterations, Scout MCMC against aRWM",
            100_000,
            &["arwm", "scout"],
        );
        c.replicates = 3;
        c
    }),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, build)| build())
}

/// All presets with their one-line descriptions.
pub fn presets() -> Vec<ExperimentConfig> {
    PRESETS.iter().map(|(_, build)| build()).collect()
}
