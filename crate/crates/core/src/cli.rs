//! Configuration handling and the file artifacts the command-line tool
//! writes. All numeric output goes through one formatter (12 significant
//! digits, scientific notation, `\n` line endings) so reruns are
//! byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::{compare_spectra, deviation_threshold, fidelity_report};
use crate::bands::{band_gap, band_sweep, bandwidth, ha_bandwidth_estimate, hf_integral};
use crate::eigen::{residuals, sector_spectrum};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, gauge_transform, ChargeGrid, JunctionParams, SpinSector};
use crate::variational::{optimize_parameters, trial_wavefunction, Well};

/// Fully resolved run parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub t: f64,
    pub t_prime: f64,
    pub n_max: u32,
    pub k: f64,
    pub k_count: usize,
    pub m_count: usize,
    pub frac: f64,
}

/// Command-line flag values layered on top of the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub t: Option<f64>,
    pub t_prime: Option<f64>,
    pub n_max: Option<u32>,
    pub k_count: Option<usize>,
    pub m_count: Option<usize>,
    pub frac: Option<f64>,
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Usage(format!("invalid value for `{key}`: `{value}`")))
}

/// Parse `key = value` lines (# comments, blank lines allowed), apply flag
/// overrides, fill defaults and validate. Unknown keys are rejected by name;
/// later duplicates win.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<RunConfig> {
    let mut t: Option<f64> = None;
    let mut t_prime: Option<f64> = None;
    let mut n_max: Option<u32> = None;
    let mut k: Option<f64> = None;
    let mut k_count: Option<usize> = None;
    let mut m_count: Option<usize> = None;
    let mut frac: Option<f64> = None;

    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Usage(format!(
                "malformed config line `{line}`, expected `key = value`"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "t" => t = Some(parse_number(key, value)?),
            "t_prime" => t_prime = Some(parse_number(key, value)?),
            "n_max" => n_max = Some(parse_number(key, value)?),
            "k" => k = Some(parse_number(key, value)?),
            "k_count" => k_count = Some(parse_number(key, value)?),
            "m_count" => m_count = Some(parse_number(key, value)?),
            "frac" => frac = Some(parse_number(key, value)?),
            other => return Err(Error::Usage(format!("unknown config key `{other}`"))),
        }
    }

    let t = overrides
        .t
        .or(t)
        .ok_or_else(|| Error::Usage("missing required parameter `t`".into()))?;
    let t_prime = overrides.t_prime.or(t_prime).unwrap_or(0.0);
    let k = k.unwrap_or(0.0);
    let k_count = overrides.k_count.or(k_count).unwrap_or(17);
    let m_count = overrides.m_count.or(m_count).unwrap_or(8);
    let frac = overrides.frac.or(frac).unwrap_or(0.25);

    let params = JunctionParams::new(t, t_prime).map_err(|e| Error::Usage(e.to_string()))?;
    let n_max = overrides
        .n_max
        .or(n_max)
        .unwrap_or_else(|| params.default_n_max());

    if t_prime > 0.0 && t_prime >= 4.0 * t {
        return Err(Error::Usage(format!(
            "no harmonic well for t = {t}, t_prime = {t_prime} (requires t_prime < 4t)"
        )));
    }
    if !(0.0..0.5).contains(&k) || !k.is_finite() {
        return Err(Error::Usage(format!("k must lie in [0, 1/2), got {k}")));
    }
    if n_max == 0 {
        return Err(Error::Usage("n_max must be at least 1".into()));
    }
    if k_count < 2 {
        return Err(Error::Usage(format!(
            "k_count must be at least 2, got {k_count}"
        )));
    }
    if m_count == 0 {
        return Err(Error::Usage("m_count must be at least 1".into()));
    }
    if !frac.is_finite() || frac < 0.0 {
        return Err(Error::Usage(format!(
            "frac must be finite and non-negative, got {frac}"
        )));
    }

    Ok(RunConfig {
        t,
        t_prime,
        n_max,
        k,
        k_count,
        m_count,
        frac,
    })
}

/// 12 significant digits, scientific; -0.0 is normalized so reruns can be
/// compared bytewise.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// Single machine-readable error line for stderr.
pub fn error_line(e: &Error) -> String {
    format!(
        "{{\"error\":\"{}\",\"message\":\"{}\"}}",
        e.kind(),
        json_escape(&e.to_string())
    )
}

fn params_json(cfg: &RunConfig) -> String {
    format!(
        "{{\"t\": {}, \"t_prime\": {}, \"n_max\": {}, \"k\": {}, \"k_count\": {}, \"m_count\": {}, \"frac\": {}}}",
        fmt_float(cfg.t),
        fmt_float(cfg.t_prime),
        cfg.n_max,
        fmt_float(cfg.k),
        cfg.k_count,
        cfg.m_count,
        fmt_float(cfg.frac),
    )
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn junction(cfg: &RunConfig) -> Result<JunctionParams> {
    JunctionParams::new(cfg.t, cfg.t_prime)
}

/// Exact levels at the configured offset plus the optimized variational
/// estimates. Writes spectrum.csv and summary.json.
pub fn cmd_spectrum(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = junction(cfg)?;
    let grid = ChargeGrid::new(cfg.n_max, cfg.k)?;
    if grid.dim() < 2 * cfg.m_count {
        return Err(Error::InvalidParameter {
            name: "m_count",
            message: format!(
                "grid dimension {} cannot resolve {} doublets",
                grid.dim(),
                cfg.m_count
            ),
        });
    }
    let spectrum = sector_spectrum(&p, &grid, SpinSector::Plus)?;
    let real = gauge_transform(&build_hamiltonian(&p, &grid, SpinSector::Plus));
    let report = residuals(&real, &spectrum);

    let mut csv = String::from("index,m_pair,k,energy,method\n");
    for i in 0..2 * cfg.m_count {
        let _ = writeln!(
            csv,
            "{},{},{},{},numerical",
            i,
            i / 2,
            fmt_float(cfg.k),
            fmt_float(spectrum.eigenvalues[i])
        );
    }
    for m in 0..cfg.m_count {
        let o = optimize_parameters(&p, m)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},variational",
            m,
            m,
            fmt_float(cfg.k),
            fmt_float(o.energy)
        );
    }
    write_file(out, "spectrum.csv", &csv)?;

    let summary = format!(
        "{{\n  \"command\": \"spectrum\",\n  \"params\": {},\n  \"sector\": \"{}\",\n  \"levels_computed\": {},\n  \"residuals\": {{\"max_residual\": {}, \"max_orthonormality_defect\": {}, \"matrix_norm\": {}}}\n}}\n",
        params_json(cfg),
        SpinSector::Plus.label(),
        spectrum.dim(),
        fmt_float(report.max_residual),
        fmt_float(report.max_orthonormality_defect),
        fmt_float(report.matrix_norm),
    );
    write_file(out, "summary.json", &summary)
}

/// Per-doublet charge-basis amplitudes: the numerical well state (projection
/// of the left packet onto the doublet span) next to the packet itself.
/// Writes wavefunctions.csv.
pub fn cmd_wavefunctions(cfg: &RunConfig, out: &Path) -> Result<()> {
    if cfg.k != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "wavefunction comparison is defined at k = 0, got {}",
            cfg.k
        )));
    }
    let p = junction(cfg)?;
    let grid = ChargeGrid::new(cfg.n_max, 0.0)?;
    let spectrum = sector_spectrum(&p, &grid, SpinSector::Plus)?;
    let table = compare_spectra(&spectrum, &p, cfg.m_count)?;

    let mut csv = String::from("m,n,re_num,im_num,prob_num,re_var,im_var,prob_var\n");
    for row in &table.rows {
        let left = trial_wavefunction(&p, row.m, Well::Left, &grid)?;
        // project the packet onto the span of the doublet (or bare level):
        // P|L> = sum_i |v_i><v_i|L>
        let a = spectrum.charge_state(row.levels.0);
        let ca = overlap(&a, &left.amplitudes);
        let mut num: Vec<_> = a.iter().map(|&x| x * ca).collect();
        if let Some(second) = row.levels.1 {
            let b = spectrum.charge_state(second);
            let cb = overlap(&b, &left.amplitudes);
            for (acc, &x) in num.iter_mut().zip(b.iter()) {
                *acc += x * cb;
            }
        }
        let norm: f64 = num.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for c in &mut num {
                *c /= norm;
            }
        } else {
            // packet foreign to the span; fall back to the raw eigenstate
            num = spectrum.charge_state(row.levels.0);
        }

        for (j, &n) in grid.points().iter().enumerate() {
            let w = num[j];
            let v = left.amplitudes[j];
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                row.m,
                fmt_float(n),
                fmt_float(w.re),
                fmt_float(w.im),
                fmt_float(w.norm_sqr()),
                fmt_float(v.re),
                fmt_float(v.im),
                fmt_float(v.norm_sqr()),
            );
        }
    }
    write_file(out, "wavefunctions.csv", &csv)
}

fn overlap(
    a: &[num_complex::Complex64],
    b: &[num_complex::Complex64],
) -> num_complex::Complex64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| x.conj() * y)
        .sum()
}

/// Band energies over the offset grid plus per-band summary numbers.
/// Writes bands.csv and bands.json.
pub fn cmd_bands(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = junction(cfg)?;
    // one extra tracked band so every reported band has a gap above it
    let b = band_sweep(&p, cfg.n_max, cfg.m_count + 1, cfg.k_count)?;

    let mut csv = String::from("m,k,energy\n");
    for m in 0..cfg.m_count {
        for (j, &k) in b.k_grid.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{}", m, fmt_float(k), fmt_float(b.bands[m][j]));
        }
    }
    write_file(out, "bands.csv", &csv)?;

    let mut json = String::from("{\n");
    let _ = writeln!(json, "  \"params\": {},", params_json(cfg));
    let _ = writeln!(
        json,
        "  \"ha_estimate\": {},",
        fmt_float(ha_bandwidth_estimate())
    );
    let _ = writeln!(
        json,
        "  \"min_tracking_overlap\": {},",
        fmt_float(b.min_tracking_overlap)
    );
    json.push_str("  \"bands\": [\n");
    for m in 0..cfg.m_count {
        let sep = if m + 1 < cfg.m_count { "," } else { "" };
        let _ = writeln!(
            json,
            "    {{\"m\": {}, \"width\": {}, \"gap\": {}, \"hf_integral\": {}}}{}",
            m,
            fmt_float(bandwidth(&b, m)?),
            fmt_float(band_gap(&b, m)?),
            fmt_float(hf_integral(&b, m)?),
            sep
        );
    }
    json.push_str("  ]\n}\n");
    write_file(out, "bands.json", &json)
}

/// Harmonic-ladder deviation table and the first level beyond the accuracy
/// threshold. Writes deviations.csv and threshold.json.
pub fn cmd_compare(cfg: &RunConfig, out: &Path) -> Result<()> {
    if cfg.k != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "ladder comparison is defined at k = 0, got {}",
            cfg.k
        )));
    }
    let p = junction(cfg)?;
    let grid = ChargeGrid::new(cfg.n_max, 0.0)?;
    let spectrum = sector_spectrum(&p, &grid, SpinSector::Plus)?;
    let table = compare_spectra(&spectrum, &p, cfg.m_count)?;
    let threshold = deviation_threshold(&table, cfg.frac);
    // fidelities are defined per resolved doublet; only the leading run of
    // paired rows maps onto consecutive spectrum indices
    let doublet_count = table
        .rows
        .iter()
        .take_while(|r| r.splitting.is_some())
        .count();
    let fid = fidelity_report(&spectrum, &p, doublet_count);

    let mut csv = String::from("m,e_num,e_ha,abs_dev,rel_dev,splitting\n");
    for row in &table.rows {
        let split = row.splitting.map(fmt_float).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.m,
            fmt_float(row.e_num),
            fmt_float(row.e_ha),
            fmt_float(row.abs_dev),
            fmt_float(row.rel_dev),
            split
        );
    }
    write_file(out, "deviations.csv", &csv)?;

    let (m_star, e_star) = match threshold {
        Some(th) => (th.m.to_string(), fmt_float(th.energy)),
        None => ("null".into(), "null".into()),
    };
    let mut json = String::from("{\n");
    let _ = writeln!(json, "  \"params\": {},", params_json(cfg));
    let _ = writeln!(json, "  \"omega\": {},", fmt_float(table.omega));
    let _ = writeln!(json, "  \"frac\": {},", fmt_float(cfg.frac));
    let _ = writeln!(json, "  \"m_star\": {m_star},");
    let _ = writeln!(json, "  \"e_star\": {e_star},");
    match fid {
        Ok(report) => {
            let items: Vec<String> = report.fidelities.iter().map(|&f| fmt_float(f)).collect();
            let _ = writeln!(json, "  \"doublet_fidelities\": [{}]", items.join(", "));
        }
        Err(_) => {
            let _ = writeln!(json, "  \"doublet_fidelities\": []");
        }
    }
    json.push_str("}\n");
    write_file(out, "threshold.json", &json)
}
