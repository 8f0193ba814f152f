//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! fails if any criterion fails.
//!
//! Tolerances are pinned here:
//! - thermal oracle: relative 1e-9 on segmentations, 1e-6 K at t = τ_TR
//! - norm 1e-9 over 1e6 steps, precession m_z drift 1e-6 over 1e4 steps
//! - initial angle: ⟨θ²⟩ within 5% of quadrature
//! - Monte Carlo comparisons: 95% Wilson intervals, one-sided z > 1.645

use std::f64::consts::PI;
use std::io::Write as _;

use mtjsim_cli::{Cli, Command, ExperimentConfig};
use mtjsim_core::constants::{NS, PS};
use mtjsim_core::crossbar::{self, SpikeSchedule};
use mtjsim_core::magnetodynamics::{sample_initial_angle, LlgsIntegrator};
use mtjsim_core::montecarlo::{stdp_point, switching_baseline};
use mtjsim_core::stats::{fit_exponential_decay, two_proportion_z};
use mtjsim_core::thermal::{analytic_cooling, analytic_heating, thermal_step, ThermalState};
use mtjsim_core::{
    estimate_switch_prob, stdp_sweep, DeviceParams, Direction, MaterialParams, MtjState,
    NoiseConvention, RngStream, SimConfig, SpinCurrent, StdpCurve, SwitchEstimate, ThermalParams,
    Vector3, Waveform,
};
use rayon::prelude::*;

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn record(&mut self, id: &str, name: &str, pass: bool, detail: String) {
        let line = format!(
            "[{}] {id} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        // the raw handle bypasses test output capture, so the report shows
        // in a plain `cargo test` log
        let _ = writeln!(std::io::stderr(), "{line}");
        self.lines.push((pass, line));
    }
}

fn est(e: &SwitchEstimate) -> String {
    format!("{}/{} = {:.4} [{:.4}, {:.4}]", e.n_switched, e.n_trials, e.p, e.ci_low, e.ci_high)
}

fn profile() -> ExperimentConfig {
    ExperimentConfig::default_profile()
}

fn c1_thermal(r: &mut Report) {
    let params = ThermalParams::reference();
    let power = 100e-6;
    let mut worst: f64 = 0.0;
    // uneven segmentations of a heating segment followed by a cooling one
    for pieces in [1usize, 2, 3, 7, 50, 997] {
        let heat = 3.0 * NS;
        let mut s = ThermalState::at(params.room_temperature);
        let mut t = 0.0;
        for k in 0..pieces {
            let w = (k as f64 + 1.0) / (pieces * (pieces + 1) / 2) as f64;
            s = thermal_step(s, power, &params, heat * w);
            t += heat * w;
        }
        let hot = analytic_heating(t, power, &params);
        worst = worst.max(((s.temperature - hot) / hot).abs());
        let cool = 11.0 * NS;
        for _ in 0..pieces {
            s = thermal_step(s, 0.0, &params, cool / pieces as f64);
        }
        let expect = analytic_cooling(cool, hot, &params);
        worst = worst.max(((s.temperature - expect) / expect).abs());
    }
    let t_tau = thermal_step(ThermalState::at(300.0), power, &params, params.time_constant).temperature;
    let closed = 300.0 + 83600.0 * power * (1.0 - (-1.0f64).exp());
    let pass = worst <= 1e-9 && (t_tau - closed).abs() <= 1e-6 && format!("{t_tau:.3}") == "305.285";
    r.record(
        "1",
        "thermal oracle",
        pass,
        format!("max relative error {worst:.2e}; T(tau_TR) = {t_tau:.6} K (closed form {closed:.6} K)"),
    );
}

fn c2_conservation(r: &mut Report) {
    let p = MaterialParams::reference();
    let integ = LlgsIntegrator::new(p.clone(), PS, NoiseConvention::Brown).unwrap();
    let mut rng = RngStream::new(2, 0);
    let mut m = Vector3::Z;
    let mut worst_norm: f64 = 0.0;
    for _ in 0..1_000_000 {
        m = integ.step(m, SpinCurrent::ZERO, 300.0, &mut rng);
        worst_norm = worst_norm.max((m.norm() - 1.0).abs());
    }
    let third = 4.0 * PI / 3.0;
    let undamped = MaterialParams {
        damping: 1e-300,
        demag: Vector3::new(third, third, third),
        ..p
    };
    let integ = LlgsIntegrator::new(undamped, PS, NoiseConvention::Brown).unwrap();
    let mut m = Vector3::from_spherical(0.5, 0.3);
    let mz0 = m.z;
    let mut drift: f64 = 0.0;
    for _ in 0..10_000 {
        m = integ.step(m, SpinCurrent::ZERO, 0.0, &mut rng);
        drift = drift.max((m.z - mz0).abs());
    }
    r.record(
        "2",
        "magnetization conservation",
        worst_norm <= 1e-9 && drift <= 1e-6,
        format!("max ||m|-1| = {worst_norm:.2e} over 1e6 steps at 300 K; undamped m_z drift {drift:.2e}"),
    );
}

/// ⟨θ²⟩ of p(θ) ∝ sinθ exp(-Δ sin²θ) on one hemisphere, Simpson's rule.
fn theta_sq_quadrature(delta: f64) -> f64 {
    let n = 200_000;
    let h = (PI / 2.0) / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=n {
        let th = i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let f = th.sin() * (-delta * th.sin().powi(2)).exp();
        num += w * th * th * f;
        den += w * f;
    }
    num / den
}

fn c3_initial_angle(r: &mut Report) {
    let p = MaterialParams::reference();
    let n = 100_000u64;
    let sum: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::for_trial(3, 0, i);
            let m = sample_initial_angle(&p, 300.0, 300.0, MtjState::P, &mut rng).unwrap();
            let th = m.z.clamp(-1.0, 1.0).acos();
            th * th
        })
        .sum();
    let mean = sum / n as f64;
    let oracle = theta_sq_quadrature(73.0);
    let rel = (mean - oracle).abs() / oracle;
    r.record(
        "3",
        "initial-angle statistics",
        rel <= 0.05,
        format!("<theta^2> = {mean:.5} vs quadrature {oracle:.5} (rel {rel:.3})"),
    );
}

fn c4_retention(r: &mut Report) {
    let cfg = profile();
    let sim = SimConfig {
        horizon: 20.0 * NS,
        n_trials: 1000,
        ..cfg.sim_config()
    };
    let mut switches = Vec::new();
    for (lane, state) in [(40, MtjState::P), (41, MtjState::AP)] {
        let dev = cfg.device_params(state).unwrap();
        let e = estimate_switch_prob(&dev, &Waveform::empty(), &sim, lane).unwrap();
        switches.push((state, e.n_switched));
    }
    let pass = switches.iter().all(|&(_, k)| k <= 1);
    r.record(
        "4",
        "retention",
        pass,
        format!(
            "zero waveform, 20 ns + relax, 1000 trials: P start {} switches, AP start {} switches",
            switches[0].1, switches[1].1
        ),
    );
}

/// Monte Carlo repetitions of a crossbar run; counts devices whose final
/// state differs from the initial one.
fn crossbar_switch_count(
    config: &crossbar::CrossbarConfig,
    pre: &SpikeSchedule,
    post: &SpikeSchedule,
    sim: &SimConfig,
    reps: u64,
) -> SwitchEstimate {
    let k: u64 = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let res = crossbar::simulate_repetition(config, pre, post, sim, rep).unwrap();
            res.devices
                .iter()
                .filter(|d| d.final_state != d.initial_state)
                .count() as u64
        })
        .sum();
    SwitchEstimate::from_counts(k, reps * (config.rows * config.cols) as u64)
}

fn single_cell(cfg: &ExperimentConfig, state: MtjState) -> crossbar::CrossbarConfig {
    let mut c = cfg.crossbar_config().unwrap();
    c.rows = 1;
    c.cols = 1;
    c.initial_states = vec![vec![state]];
    c.overrides.clear();
    c
}

fn c5_half_select(r: &mut Report) {
    let cfg = profile();
    let protocol = cfg.protocol();
    let base = cfg.sim_config();
    let mut parts = Vec::new();
    let mut pass = true;
    for (lane, dir) in [(50, Direction::ApToP), (51, Direction::PToAp)] {
        let wf = protocol.heating_only(dir).unwrap();
        let sim = SimConfig {
            horizon: wf.end_time(),
            n_trials: 1000,
            ..base.clone()
        };
        let dev = cfg.device_params(dir.initial_state()).unwrap();
        let e = estimate_switch_prob(&dev, &wf, &sim, lane).unwrap();
        pass &= e.p < 0.05;
        parts.push(format!("heating alone ({}) {}", dir.label(), est(&e)));
    }
    // Lone neurons on the cell state their own heating torque protects.
    let lone = [
        ("lone pre on AP cell", MtjState::AP, vec![vec![0.0]], vec![vec![]]),
        ("lone post on P cell", MtjState::P, vec![vec![]], vec![vec![0.0]]),
    ];
    for (label, state, pre, post) in lone {
        let x = single_cell(&cfg, state);
        let pre = SpikeSchedule::new(pre).unwrap();
        let post = SpikeSchedule::new(post).unwrap();
        let sim = SimConfig {
            horizon: x.pre_spec.duration().max(x.post_spec.duration()),
            ..base.clone()
        };
        let e = crossbar_switch_count(&x, &pre, &post, &sim, 1000);
        pass &= e.p < 0.05;
        parts.push(format!("{label} {}", est(&e)));
    }
    r.record("5", "incubation / half-select safety", pass, parts.join("; "));
}

fn c6_temperature(r: &mut Report) {
    let cfg = profile();
    let wf = cfg.protocol().switching_only(Direction::ApToP).unwrap();
    let dev = cfg.device_params(MtjState::AP).unwrap();
    let run = |t: f64, lane: u64| {
        let sim = SimConfig {
            horizon: wf.end_time(),
            n_trials: 2000,
            clamp_temperature: Some(t),
            ..cfg.sim_config()
        };
        estimate_switch_prob(&dev, &wf, &sim, lane).unwrap()
    };
    let hot = run(350.0, 60);
    let cold = run(300.0, 61);
    let z = two_proportion_z(hot.n_switched, hot.n_trials, cold.n_switched, cold.n_trials);
    r.record(
        "6",
        "temperature monotonicity",
        z > 1.645,
        format!("350 K {}; 300 K {}; z = {z:.2}", est(&hot), est(&cold)),
    );
}

fn branch_points(curve: &StdpCurve, dir: Direction) -> Vec<(f64, SwitchEstimate)> {
    let mut v: Vec<_> = curve
        .branch(dir)
        .map(|p| (p.delta_t.abs(), p.estimate()))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn decay_constant(points: &[(f64, SwitchEstimate)], baseline: &SwitchEstimate) -> f64 {
    let var = |e: &SwitchEstimate| (e.p * (1.0 - e.p)).max(1.0 / e.n_trials as f64) / e.n_trials as f64;
    let x: Vec<f64> = points.iter().map(|(d, _)| d / NS).collect();
    let y: Vec<f64> = points.iter().map(|(_, e)| e.p - baseline.p).collect();
    let w: Vec<f64> = points.iter().map(|(_, e)| 1.0 / (var(e) + var(baseline))).collect();
    fit_exponential_decay(&x, &y, &w, (0.1, 1000.0)).1
}

fn c7_stdp(r: &mut Report) -> StdpCurve {
    let cfg = profile();
    let sim = SimConfig {
        n_trials: 2000,
        ..cfg.sim_config()
    };
    let device = cfg.device_params(MtjState::P).unwrap();
    let protocol = cfg.protocol();
    let curve = stdp_sweep(&cfg.grid(), &protocol, &device, &sim).unwrap();
    for p in &curve.points {
        let _ = writeln!(
            std::io::stderr(),
            "    dt = {:>6.1} ns {:>7}: p_signed = {:+.4} [{:.4}, {:.4}]",
            p.delta_t / NS,
            p.direction.label(),
            p.p_signed,
            p.ci_low,
            p.ci_high
        );
    }
    let signs = curve.points.iter().all(|p| {
        (p.delta_t > 0.0 && p.p_signed >= 0.0) || (p.delta_t < 0.0 && p.p_signed <= 0.0)
    });
    let tau_tr = cfg.thermal().time_constant / NS;
    let mut shape = true;
    let mut fit = true;
    let mut parts = vec![format!("signs {}", if signs { "ok" } else { "wrong" })];
    for (lane, dir) in [(70, Direction::ApToP), (71, Direction::PToAp)] {
        let pts = branch_points(&curve, dir);
        let (near, far) = (&pts[0].1, &pts[pts.len() - 1].1);
        shape &= near.clearly_above(far);
        let base = switching_baseline(dir, &protocol, &device, &sim, lane).unwrap();
        let tau = decay_constant(&pts, &base);
        fit &= tau >= 0.5 * tau_tr && tau <= 2.0 * tau_tr;
        let dips = pts
            .windows(2)
            .filter(|w| w[1].1.clearly_above(&w[0].1))
            .count();
        parts.push(format!(
            "{}: smallest |dt| {:.4} [{:.4},{:.4}] vs largest {:.4} [{:.4},{:.4}], baseline {:.4}, fitted tau {tau:.2} ns, adjacent rises beyond CI {dips}",
            dir.label(),
            near.p,
            near.ci_low,
            near.ci_high,
            far.p,
            far.ci_low,
            far.ci_high,
            base.p
        ));
    }
    r.record("7", "STDP shape", signs && shape && fit, parts.join("; "));
    curve
}

fn c8_engineering(r: &mut Report, curve: &StdpCurve) {
    let mut cfg = profile();
    cfg.pulses.pre.switching_amplitude_V *= 0.5;
    cfg.pulses.post.switching_amplitude_V *= 0.5;
    let sim = SimConfig {
        n_trials: 2000,
        ..cfg.sim_config()
    };
    let device = cfg.device_params(MtjState::P).unwrap();
    let protocol = cfg.protocol();
    let mut pass = true;
    let mut parts = Vec::new();
    for (lane, dir) in [(80, Direction::ApToP), (81, Direction::PToAp)] {
        let full = branch_points(curve, dir)[0].clone();
        let signed = if dir == Direction::ApToP { full.0 } else { -full.0 };
        let half = stdp_point(signed, dir, &protocol, &device, &sim, lane)
            .unwrap()
            .estimate();
        pass &= full.1.clearly_above(&half);
        parts.push(format!(
            "{} at |dt| = {} ns: full amplitude {}, half amplitude {}",
            dir.label(),
            full.0 / NS,
            est(&full.1),
            est(&half)
        ));
    }
    r.record("8", "pulse engineering", pass, parts.join("; "));
}

fn c9_crossbar(r: &mut Report) {
    let cfg = profile();
    let protocol = cfg.protocol();
    let device = cfg.device_params(MtjState::P).unwrap();
    let base = SimConfig {
        n_trials: 1000,
        ..cfg.sim_config()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, dt_ns) in [1.0, 4.0, 16.0].into_iter().enumerate() {
        let dt = dt_ns * NS;
        for dir in [Direction::ApToP, Direction::PToAp] {
            let signed = if dir == Direction::ApToP { dt } else { -dt };
            let pair = stdp_point(signed, dir, &protocol, &device, &base, 90 + 2 * i as u64)
                .unwrap()
                .estimate();
            // The heating neuron spikes at 0 with its switching pulse muted;
            // the switching neuron fires so that its switching pulse starts
            // dt after the heating pulse ends, with its heating pulse muted.
            let mut x = single_cell(&cfg, dir.initial_state());
            let (heater, switcher) = match dir {
                Direction::ApToP => (&mut x.pre_spec, &mut x.post_spec),
                Direction::PToAp => (&mut x.post_spec, &mut x.pre_spec),
            };
            heater.switching.amplitude = 0.0;
            switcher.heating.amplitude = 0.0;
            let fire = heater.heating_end_offset() + dt;
            let end = fire + switcher.duration();
            let (pre, post) = match dir {
                Direction::ApToP => (vec![vec![0.0]], vec![vec![fire]]),
                Direction::PToAp => (vec![vec![fire]], vec![vec![0.0]]),
            };
            let pre = SpikeSchedule::new(pre).unwrap();
            let post = SpikeSchedule::new(post).unwrap();
            let sim = SimConfig {
                horizon: end,
                ..base.clone()
            };
            let xb = crossbar_switch_count(&x, &pre, &post, &sim, 1000);
            pass &= pair.overlaps(&xb);
            parts.push(format!(
                "{} dt = {dt_ns} ns: pair {:.4} [{:.4},{:.4}], crossbar {:.4} [{:.4},{:.4}]",
                dir.label(),
                pair.p,
                pair.ci_low,
                pair.ci_high,
                xb.p,
                xb.ci_low,
                xb.ci_high
            ));
        }
    }
    r.record("9", "crossbar equivalence", pass, parts.join("; "));
}

fn run_cli(command: Command, config: &std::path::Path, out: &std::path::Path, threads: usize) -> Vec<(String, Vec<u8>)> {
    let cli = Cli {
        command,
        config: Some(config.to_path_buf()),
        out_dir: out.to_path_buf(),
        seed: Some(7),
        trials: Some(40),
        threads: Some(threads),
        no_plot: false,
    };
    let files = mtjsim_cli::run(&cli).unwrap();
    let mut v: Vec<_> = files
        .iter()
        .map(|f| {
            (
                f.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(f).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn c10_determinism(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = profile();
    // short sweep keeps the check quick; every command still runs
    cfg.sweep.delta_t_ns = vec![-4.0, -1.0, 1.0, 4.0];
    let cfg_path = dir.path().join("config.toml");
    std::fs::write(&cfg_path, cfg.to_toml_string()).unwrap();
    let mut pass = true;
    let mut n_files = 0;
    for command in [Command::ThermalTrace, Command::Trial, Command::StdpSweep, Command::Crossbar] {
        let runs: Vec<_> = [1usize, 8, 8]
            .iter()
            .enumerate()
            .map(|(i, &t)| run_cli(command, &cfg_path, &dir.path().join(format!("{command:?}-{i}")), t))
            .collect();
        pass &= runs.windows(2).all(|w| w[0] == w[1]);
        n_files += runs[0].len();
    }
    r.record(
        "10",
        "determinism",
        pass,
        format!("{n_files} output files byte-identical across reruns at 1 and 8 workers"),
    );
}

fn c11_noise(r: &mut Report) {
    let cfg = profile();
    let protocol = cfg.protocol();
    let wf = protocol.waveform(4.0 * NS, Direction::ApToP).unwrap();
    let dev: DeviceParams = cfg.device_params(MtjState::AP).unwrap();
    let run = |dt: f64, conv: NoiseConvention, lane: u64| {
        let sim = SimConfig {
            dt,
            horizon: wf.end_time(),
            n_trials: 2000,
            noise_convention: conv,
            ..cfg.sim_config()
        };
        estimate_switch_prob(&dev, &wf, &sim, lane).unwrap()
    };
    let b1 = run(PS, NoiseConvention::Brown, 110);
    let b2 = run(0.5 * PS, NoiseConvention::Brown, 111);
    let l1 = run(PS, NoiseConvention::PaperLiteral, 112);
    let l2 = run(0.5 * PS, NoiseConvention::PaperLiteral, 113);
    r.record(
        "11",
        "noise-convention sanity",
        b1.overlaps(&b2),
        format!(
            "brown dt=1 ps {}, dt=0.5 ps {}; paper-literal (report only) dt=1 ps {}, dt=0.5 ps {}",
            est(&b1),
            est(&b2),
            est(&l1),
            est(&l2)
        ),
    );
}

#[test]
fn acceptance() {
    let mut r = Report { lines: Vec::new() };
    c1_thermal(&mut r);
    c2_conservation(&mut r);
    c3_initial_angle(&mut r);
    c4_retention(&mut r);
    c5_half_select(&mut r);
    c6_temperature(&mut r);
    let curve = c7_stdp(&mut r);
    c8_engineering(&mut r, &curve);
    c9_crossbar(&mut r);
    c10_determinism(&mut r);
    c11_noise(&mut r);
    let failed: Vec<_> = r.lines.iter().filter(|(ok, _)| !ok).map(|(_, l)| l.as_str()).collect();
    let _ = writeln!(std::io::stderr(), "acceptance: {}/{} criteria pass", r.lines.len() - failed.len(), r.lines.len());
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
