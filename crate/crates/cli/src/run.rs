//! Scenario dispatch: builds the system for a config, runs its mode and
//! writes the outputs.

use std::fs;
use std::path::{Path, PathBuf};

use locapart_core::manybody::Scheme;
use locapart_core::pipeline::{
    multi_electron_limit_check, run_couplings, run_decoherence, run_dynamics, run_naive, DecoherenceSpec, InitialSpec, System,
};
use locapart_core::scenario::{builtin_presets, Mode, ScenarioConfig, INITIAL_PRESETS};
use toml::Table;

use crate::error::CliError;
use crate::output::{floats, fmt, sha256_hex, write_csv, write_numeric, Manifest};

pub fn load(path: &Path) -> Result<(ScenarioConfig, String), CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let config: ScenarioConfig = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok((config, text))
}

pub fn run(path: &Path, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let (config, text) = load(path)?;
    let dir = out.map_or_else(|| PathBuf::from(&config.output.dir), Path::to_path_buf);
    fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;

    let mut m = Manifest::new();
    m.set("run", "tool", "locapart");
    m.set("run", "version", env!("CARGO_PKG_VERSION"));
    m.set("run", "mode", config.mode.name());
    m.set("run", "config_sha256", sha256_hex(text.as_bytes()));
    m.set("run", "seed", config.decoherence.as_ref().map_or(0, |d| d.seed) as i64);
    m.section(
        "config",
        Table::try_from(&config).map_err(|e| CliError::Config(format!("cannot record config: {e}")))?,
    );

    match config.mode {
        Mode::Dynamics => dynamics(&config, &dir, &mut m)?,
        Mode::Decoherence => decoherence(&config, &dir, &mut m)?,
        Mode::Limits => limits(&config, &dir, &mut m)?,
        Mode::NaiveDemo => naive(&config, &dir, &mut m)?,
        Mode::IntegralsOnly => {
            let system = build(&config, &mut m)?;
            dump_integrals(&system, &dir)?;
        }
    }
    m.write(&dir.join("manifest.toml"))?;
    Ok(dir)
}

fn build(config: &ScenarioConfig, m: &mut Manifest) -> Result<System, CliError> {
    let system = System::build(&config.geometry.to_spec()?, &config.system_options()?)?;
    record_system(&system, m);
    Ok(system)
}

fn record_system(s: &System, m: &mut Manifest) {
    m.set("system", "basis", s.basis.name.as_str());
    m.set("system", "basis_functions", s.basis.len() as i64);
    m.set("system", "nuclei", s.molecule.nuclei().len() as i64);
    m.set("system", "regions", s.labels().to_vec());
    m.set("system", "electrons", s.n_electrons as i64);
    m.set("system", "scheme", s.space.scheme.name());
    m.set("system", "orbitals", s.mos.kind.name());
    m.set("system", "space_dimension", s.space.dim() as i64);
    m.set("system", "nuclear_repulsion", s.molecule.nuclear_repulsion());
    m.set("system", "nuclear_share", s.options.nuclear_share.name());
    let consts: Vec<f64> = (0..s.labels().len()).map(|a| s.site_constant(a)).collect();
    m.set("system", "site_constants", floats(&consts));
    if let Some(e) = s.mos.total_energy {
        m.set("system", "scf_energy", e);
        m.set("system", "scf_iterations", s.mos.iterations as i64);
    }
    m.set("partition", "rule", s.partition.describe());
    m.set("partition", "two_electron_scheme", s.parts.two_electron_scheme.as_str());
    m.set("partition", "sum_rules_closed", s.parts.closed);
    let raw = &s.parts_ao.raw;
    m.set("partition", "raw_residual_s", raw.s.relative);
    m.set("partition", "raw_residual_h", raw.h.relative);
    m.set("partition", "raw_residual_g", raw.g.relative);
    m.set("grid", "level", s.grid.level.as_str());
    m.set("grid", "scheme", s.grid.scheme.as_str());
    m.set("grid", "points", s.grid_points as i64);
    m.set("grid", "tau", s.tau());
    m.set("grid", "n_radial", s.grid.params.n_radial as i64);
    m.set("grid", "n_theta", s.grid.params.n_theta as i64);
    m.set("grid", "n_phi", s.grid.params.n_phi as i64);
    m.set("operators", "energy_flavor", "symmetrized");
    m.set("operators", "population_flavor", "population");
}

fn dump_integrals(s: &System, dir: &Path) -> Result<(), CliError> {
    let path = dir.join("integrals.txt");
    let text = format!("# analytic\n{}\n# region tables (AO basis)\n{}", s.tables.dump(), s.parts_ao.dump());
    fs::write(&path, text).map_err(CliError::io(&path))?;
    let raw = &s.parts_ao.raw;
    write_csv(
        &dir.join("sum_rules.csv"),
        &["table", "max_abs", "relative"],
        [("S", raw.s), ("h", raw.h), ("g", raw.g)].map(|(n, r)| vec![n.to_string(), fmt(r.max_abs), fmt(r.relative)]),
    )
}

fn dynamics(config: &ScenarioConfig, dir: &Path, m: &mut Manifest) -> Result<(), CliError> {
    let system = build(config, m)?;
    if config.output.dump_integrals {
        dump_integrals(&system, dir)?;
    }
    let initial = config.initial_spec()?;
    let run = run_dynamics(&system, &initial, &config.time_spec()?)?;
    let ts = &run.series;
    let mut header = vec!["t_au".to_string()];
    header.extend(ts.energies.iter().map(|c| c.name.clone()));
    header.extend(ts.populations.iter().map(|c| c.name.clone()));
    header.push("E_total".into());
    let rows = (0..ts.len()).map(|k| {
        let mut r = vec![ts.times[k]];
        r.extend(ts.energies.iter().chain(&ts.populations).map(|c| c.values[k]));
        r.push(ts.total.values[k]);
        r
    });
    write_numeric(&dir.join("timeseries.csv"), &header, rows)?;
    let channels: Vec<_> = ts.energies.iter().chain(&ts.populations).chain([&ts.total]).collect();
    write_csv(
        &dir.join("averages.csv"),
        &["channel", "time_average", "amplitude"],
        channels.iter().map(|c| vec![c.name.clone(), fmt(c.mean()), fmt(c.amplitude())]),
    )?;
    let label = config.initial.preset.clone().unwrap_or_else(|| "weights".into());
    m.set("dynamics", "initial", label);
    m.set("dynamics", "spin", config.initial.spin.as_str());
    if let InitialSpec::Superposition(w) = &initial {
        m.set("dynamics", "eigenstates", w.iter().map(|x| x.0 as i64).collect::<Vec<_>>());
        let e: Vec<f64> = w.iter().map(|x| run.singlets.values[x.0]).collect();
        m.set("dynamics", "eigenstate_energies", floats(&e));
    }
    if let Some(r) = run.initial.retained {
        m.set("dynamics", "retained_norm", r);
    }
    m.set("dynamics", "samples", ts.len() as i64);
    m.set("dynamics", "t_max", *ts.times.last().unwrap_or(&0.0));
    m.set("dynamics", "energy_sum_drift", ts.energy_sum_drift());
    m.set("dynamics", "population_sum_error", ts.population_sum_error(system.n_electrons as f64));
    m.set("dynamics", "time_average", "arithmetic mean over the sampled grid");
    Ok(())
}

fn decoherence(config: &ScenarioConfig, dir: &Path, m: &mut Manifest) -> Result<(), CliError> {
    let d = config.decoherence.clone().unwrap_or_default();
    let opts = config.system_options()?;
    let spec = DecoherenceSpec {
        model: d.model()?,
        sigma: d.sigma,
        samples: d.samples,
        seed: d.seed,
        t_max: d.t_max,
        n_times: config.time.samples,
    };
    let run = run_decoherence(&opts, &spec)?;
    let mut header: Vec<String> = ["t_au", "cos_avg_analytic", "cos_avg_mc", "cos_avg_mc_se", "envelope"].map(String::from).to_vec();
    for l in &run.labels {
        for suffix in ["coherent", "avg_analytic", "avg_mc", "avg_mc_se", "env_upper", "env_lower"] {
            header.push(format!("E_{l}_{suffix}"));
        }
    }
    let rows = (0..run.times.len()).map(|k| {
        let t = run.times[k];
        let env = (-0.5 * d.sigma * d.sigma * t * t).exp();
        let mut r = vec![t, run.cosine.values[k], run.cosine_mc.values[k], run.cosine_mc.std_error[k], env];
        for a in 0..run.labels.len() {
            let (mid, delta) = (run.terms.mean(a), run.terms.delta[a].abs());
            r.extend([
                run.coherent[a].values[k],
                run.analytic[a].values[k],
                run.monte_carlo[a].values[k],
                run.monte_carlo[a].std_error[k],
                mid + delta * env,
                mid - delta * env,
            ]);
        }
        r
    });
    write_numeric(&dir.join("decoherence.csv"), &header, rows)?;
    let t = &run.terms;
    write_csv(
        &dir.join("vibronic.csv"),
        &["region", "E_g", "E_e", "Delta", "Delta_condon", "mean"],
        run.labels
            .iter()
            .enumerate()
            .map(|(a, l)| vec![l.clone(), fmt(t.e_g[a]), fmt(t.e_e[a]), fmt(t.delta[a]), fmt(t.delta_condon[a]), fmt(t.mean(a))]),
    )?;
    let (dev, se) = run.mc_deviation();
    m.set("decoherence", "omega_eg", t.omega_eg);
    m.set("decoherence", "franck_condon", t.franck_condon);
    m.set("decoherence", "sigma", d.sigma);
    m.set("decoherence", "samples", d.samples as i64);
    m.set("decoherence", "seed", d.seed as i64);
    m.set("decoherence", "nodes", d.nodes as i64);
    m.set("decoherence", "reduced_mass", d.reduced_mass);
    m.set("decoherence", "ground", floats(&[d.ground.r_eq, d.ground.nu]));
    m.set("decoherence", "excited", floats(&[d.excited.r_eq, d.excited.nu]));
    m.set("decoherence", "mc_max_deviation", dev);
    m.set("decoherence", "mc_max_std_error", se);
    m.set("decoherence", "electronic_states", "lowest two singlets, tracked by maximum overlap");
    m.set("system", "basis", opts.basis.as_str());
    m.set("system", "scheme", opts.scheme.name());
    m.set("system", "nuclear_share", opts.nuclear_share.name());
    m.set("grid", "level", opts.grid.name());
    Ok(())
}

fn limits(config: &ScenarioConfig, dir: &Path, m: &mut Manifest) -> Result<(), CliError> {
    let spec = config.geometry.to_spec()?;
    let one_per_region = spec.nuclei.len() == 2;
    if one_per_region && config.limits.separations.is_none() {
        let system = build(config, m)?;
        if system.space.scheme != Scheme::FullCi2e {
            return Err(CliError::Config("coupling analysis needs scheme = \"fullci_2e\"".into()));
        }
        let run = run_couplings(&system)?;
        let r = &run.report;
        let mut rows = Vec::new();
        for i in 0..r.a.len() {
            for j in 0..r.b.len() {
                for k in 0..r.a.len() {
                    for l in 0..r.b.len() {
                        rows.push(vec![
                            r.a[i].clone(),
                            r.b[j].clone(),
                            r.a[k].clone(),
                            r.b[l].clone(),
                            fmt(r.coulomb(i, j, k, l)),
                            fmt(r.exchange(i, j, k, l)),
                            fmt(r.v_coul(i, j, k, l)),
                        ]);
                    }
                }
            }
        }
        write_csv(&dir.join("couplings.csv"), &["a_i", "b_j", "a_k", "b_l", "J", "K", "V_coul"], rows)?;
        let s = run.split;
        write_numeric(
            &dir.join("split_check.csv"),
            &["E_A_direct", "E_A_formula", "site_part", "interaction_part", "residual", "tau"],
            [vec![s.direct, s.formula, s.site, s.interaction, s.residual(), system.tau()]],
        )?;
        if let Some(t) = run.transfer {
            write_numeric(
                &dir.join("transfer.csv"),
                &["J", "K", "V_coul", "dipole_dipole", "relative_deviation"],
                [vec![t.j, t.k, t.j + t.k, t.dipole, (t.j - t.dipole) / t.dipole]],
            )?;
        }
        m.set("limits", "kind", "fragment couplings");
        m.set("limits", "max_fragment_overlap", r.max_overlap);
        m.set("limits", "split_residual", s.residual());
        return Ok(());
    }
    if config.geometry.preset.as_deref() != Some("h2_dimer") {
        return Err(CliError::Config(
            "limits mode needs either two single-nucleus regions or the h2_dimer preset".into(),
        ));
    }
    let opts = config.system_options()?;
    let seps = config
        .limits
        .separations
        .clone()
        .unwrap_or_else(|| vec![config.geometry.separation.unwrap_or(20.0)]);
    let rows = multi_electron_limit_check(|d| config.geometry.with_separation(d).to_spec(), &seps, &opts)?;
    write_numeric(
        &dir.join("limits.csv"),
        &["separation", "E_A", "E_B", "T_A_plus_V_AA", "half_V_AB", "tau"],
        rows.iter().map(|r| vec![r.separation, r.e_a, r.e_b, r.isolated_a, r.half_v_ab, r.tau]),
    )?;
    m.set("limits", "kind", "closed-shell fragments");
    m.set("limits", "separations", floats(&seps));
    m.set("limits", "isolated_fragment", "RHF in the same basis");
    m.set("system", "basis", opts.basis.as_str());
    m.set("system", "scheme", opts.scheme.name());
    m.set("system", "nuclear_share", opts.nuclear_share.name());
    Ok(())
}

fn naive(config: &ScenarioConfig, dir: &Path, m: &mut Manifest) -> Result<(), CliError> {
    let system = build(config, m)?;
    let n = run_naive(&system)?;
    let r = n.report;
    let (la, lb, lv) = r.limits();
    write_numeric(
        &dir.join("naive.csv"),
        &[
            "E_A_S", "E_B_S", "V_AB_S", "E_S", "E_A", "E_B", "E_total", "limit_E_A_S", "limit_E_B_S", "limit_V_AB_S", "overlap",
        ],
        [vec![r.e_a, r.e_b, r.v_ab, r.total, n.e_a, n.e_b, n.total, la, lb, lv, r.overlap]],
    )?;
    m.set("naive", "state", "1s_A 1s_B, spatially antisymmetric");
    m.set("naive", "sum_difference", r.total - (n.e_a + n.e_b));
    Ok(())
}

pub fn presets(show: Option<&str>, write: Option<&Path>) -> Result<(), CliError> {
    let all = builtin_presets();
    let to_text = |c: &ScenarioConfig| toml::to_string(c).map_err(|e| CliError::Config(format!("cannot serialize preset: {e}")));
    if let Some(name) = show {
        let p = all
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| CliError::Config(format!("no preset named `{name}` (see `locapart presets`)")))?;
        print!("# {}\n{}", p.description, to_text(&p.config)?);
        return Ok(());
    }
    if let Some(dir) = write {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        for p in &all {
            let path = dir.join(format!("{}.toml", p.name));
            let mut c = p.config.clone();
            c.output.dir = format!("out/{}", p.name);
            fs::write(&path, format!("# {}\n{}", p.description, to_text(&c)?)).map_err(CliError::io(&path))?;
        }
        println!("wrote {} presets to {}", all.len(), dir.display());
        return Ok(());
    }
    let width = all.iter().map(|p| p.name.len()).max().unwrap_or(0);
    println!("scenario presets:");
    for p in &all {
        println!("  {:width$}  [{}] {}", p.name, p.config.mode.name(), p.description);
    }
    println!("initial-state presets:");
    for (name, d) in INITIAL_PRESETS {
        println!("  {name:10}  {d}");
    }
    Ok(())
}

