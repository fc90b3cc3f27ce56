use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{CriterionConfig, LoadedConfig, OutputFormat, RunConfig};
use crate::criteria::{
    doubling_radii, fit_finite_type, limit_diagnostics, select_radii_thm2, select_radii_thm3, CriterionReport,
    HypothesisVerdict, LimitDiagnostics, Selection,
};
use crate::currents::{boundary_dictionary, bulk_dictionary};
use crate::degrees::DegreeProfile;
use crate::exhaustion::{catalog_exhaustion, Filtration};
use crate::geometry::catalog_map;
use crate::verification::{regularity_scan, verify_inequality_with, InequalityReport, RegularityReport};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub regularity: RegularityReport,
    pub limit: Option<LimitDiagnostics>,
}

/// Wall-clock seconds per stage; the only non-reproducible block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub profile_and_inequality: f64,
    pub criterion: f64,
    pub diagnostics: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub run: u64,
    pub dictionary: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema_version: u32,
    pub config_echo: RunConfig,
    pub profile: DegreeProfile,
    pub inequality: InequalityReport,
    pub criterion: Option<CriterionReport>,
    pub diagnostics: Diagnostics,
    pub timing: Timing,
    pub seeds: Seeds,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    /// 0 on completion, 2 when a criterion hypothesis is unsatisfied.
    pub status: i32,
    pub written: Vec<PathBuf>,
}

/// Executes profile, inequality, regularity, criterion and limit stages and
/// writes the configured outputs.
pub fn run(loaded: &LoadedConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let cfg = &loaded.config;
    let map = catalog_map(&cfg.map)?;
    let exh = catalog_exhaustion(&cfg.exhaustion)?;
    if map.domain_dimension() != exh.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "{} has domain dimension {}, {} has dimension {}",
            map.label(),
            map.domain_dimension(),
            exh.label(),
            exh.dimension()
        )));
    }
    if cfg.criterion != CriterionConfig::None && !map.nondegenerate_hint() {
        return Err(Error::DegenerateMap(map.label()));
    }
    let filtration = Filtration::new(exh, cfg.profile.filtration)?;
    let sampler = loaded.sampler();
    let grid = loaded.grid()?;
    let k = map.domain_dimension();
    let seed = cfg.profile.seed;
    let n = cfg.profile.n_samples;
    let dict_seed = cfg.dictionary.seed;
    let dict = boundary_dictionary(map.target(), k, cfg.dictionary.degree_cap, cfg.dictionary.size, dict_seed)?;

    let (profile, inequality) = verify_inequality_with(&map, &filtration, &grid, &dict, n, seed, &sampler)?;
    let t_profile = start.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let selection: Option<Selection> = match &cfg.criterion {
        CriterionConfig::None => None,
        CriterionConfig::Thm2 { k_doubling, count } => {
            let fit = fit_finite_type(&profile)?;
            let doubling = doubling_radii(&profile, *k_doubling, *count)?;
            let k_emp = inequality.sup_ratio.map(|s| s.value);
            let mut sel = select_radii_thm2(
                &map,
                &filtration,
                &profile,
                &dict,
                &doubling.radii,
                n,
                seed,
                &sampler,
                k_emp,
            )?;
            sel.report.finite_type = Some(fit);
            sel.report.doubling = Some(doubling);
            Some(sel)
        }
        CriterionConfig::Thm3 { epsilon, l } => Some(select_radii_thm3(
            &map,
            &filtration,
            &profile,
            &dict,
            *epsilon,
            *l,
            n,
            seed,
            &sampler,
        )?),
    };
    let t_criterion = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let regularity = regularity_scan(&profile);
    let limit = match &selection {
        Some(sel) if !sel.currents.is_empty() => {
            let bulk = bulk_dictionary(map.target(), k, cfg.dictionary.degree_cap, cfg.dictionary.size, dict_seed)?;
            Some(limit_diagnostics(&sel.currents, &dict, &bulk)?)
        }
        _ => None,
    };
    let t_diag = t0.elapsed().as_secs_f64();

    let criterion = selection.map(|s| s.report);
    let status = match &criterion {
        Some(c) if c.hypothesis.verdict == HypothesisVerdict::Unsatisfied => 2,
        _ => 0,
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        config_echo: cfg.clone(),
        profile,
        inequality,
        criterion,
        diagnostics: Diagnostics { regularity, limit },
        timing: Timing {
            profile_and_inequality: t_profile,
            criterion: t_criterion,
            diagnostics: t_diag,
            total: start.elapsed().as_secs_f64(),
        },
        seeds: Seeds {
            run: seed,
            dictionary: dict_seed,
        },
    };
    let written = write_outputs(&report, &cfg.output.dir, &cfg.output.formats)?;
    Ok(RunOutcome {
        report,
        status,
        written,
    })
}

fn write_file(dir: &Path, name: &str, content: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    written.push(path);
    Ok(())
}

fn series(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = String::new();
    for (x, y) in points {
        let _ = writeln!(out, "{x} {y}");
    }
    out
}

/// Two-column plot series, one per file.
pub fn plot_series(report: &RunReport) -> Vec<(String, String)> {
    let p = &report.profile;
    let mut files = vec![
        ("t_k.dat".to_owned(), series(p.grid.iter().zip(&p.t_k).map(|(r, t)| (*r, t.value)))),
        ("t_km1.dat".to_owned(), series(p.grid.iter().zip(&p.t_km1).map(|(r, t)| (*r, t.value)))),
        (
            "dt_k.dat".to_owned(),
            series(p.grid.iter().zip(&p.dt_k).filter_map(|(r, d)| d.map(|d| (*r, d.value)))),
        ),
        (
            "dt_km1.dat".to_owned(),
            series(p.grid.iter().zip(&p.dt_km1).filter_map(|(r, d)| d.map(|d| (*r, d.value)))),
        ),
        (
            "boundary_mass.dat".to_owned(),
            series(report.inequality.rows.iter().map(|row| (row.r, row.lhs.value))),
        ),
        (
            "inequality_ratio.dat".to_owned(),
            series(report.inequality.rows.iter().filter_map(|row| row.ratio.map(|q| (row.r, q.value)))),
        ),
    ];
    if let Some(c) = &report.criterion {
        files.push((
            "hypothesis.dat".to_owned(),
            series(c.hypothesis.values.iter().map(|(r, q)| (*r, q.value))),
        ));
        files.push((
            "selected_boundary_mass.dat".to_owned(),
            series(c.selected.iter().map(|s| (s.r, s.boundary_mass.value))),
        ));
    }
    files
}

fn write_outputs(report: &RunReport, dir: &Path, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    if formats.contains(&OutputFormat::Json) {
        let json = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
        write_file(dir, "report.json", &json, &mut written)?;
    }
    if formats.contains(&OutputFormat::Csv) {
        write_file(dir, "profile.csv", &report.profile.to_csv(), &mut written)?;
        write_file(dir, "inequality.csv", &report.inequality.to_csv(), &mut written)?;
        if let Some(c) = &report.criterion {
            write_file(dir, "radii.csv", &c.radii_csv(), &mut written)?;
        }
    }
    if formats.contains(&OutputFormat::Plotdata) {
        let plot = dir.join("plotdata");
        std::fs::create_dir_all(&plot).map_err(|e| Error::Io(format!("cannot create {}: {e}", plot.display())))?;
        for (name, content) in plot_series(report) {
            write_file(&plot, &name, &content, &mut written)?;
        }
    }
    Ok(written)
}
