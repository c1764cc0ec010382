//! Validated system configuration and the constants every other module derives from it.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Large-scale gains between base stations, user cells and the eavesdropper.
#[derive(Clone, Debug, PartialEq)]
pub enum PathLossModel {
    /// Unit in-cell gain, `rho` for every cross-cell link (users and eavesdropper alike).
    Simplified { rho: f64 },
    /// Explicit gains: `user_gain[bs][cell][user]` and `eve_gain[bs]`, all strictly positive.
    General { user_gain: Vec<Vec<Vec<f64>>>, eve_gain: Vec<f64> },
}

/// How a base station obtains estimates of out-of-cell user channels for collaborative precoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CrossCellCsi {
    /// Cross-cell rows are scaled copies of the in-cell shared pilot observation.
    /// The stacked estimate then has rank K, so CZF and CNS are infeasible.
    SharedPilot,
    /// Cross-cell rows come from their own observation with the same MMSE statistics.
    #[default]
    Decoupled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub cells: usize,
    pub users: usize,
    pub antennas: usize,
    pub eve_antennas: usize,
    /// Total transmit power, linear, relative to unit receiver noise.
    pub total_power: f64,
    /// Fraction of the power budget spent on data rather than artificial noise.
    pub data_fraction: f64,
    pub pilot_len: usize,
    pub pilot_power: f64,
    /// Coherence interval in symbols, used only for complexity accounting.
    pub coherence: usize,
    pub path_loss: PathLossModel,
    pub cross_csi: CrossCellCsi,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SystemConfig {
    /// Simplified path-loss setup with the experiment defaults: pilot length K,
    /// pilot power P_T/K and 100 data symbols per coherence interval.
    pub fn simplified(
        cells: usize,
        users: usize,
        antennas: usize,
        eve_antennas: usize,
        total_power_db: f64,
        data_fraction: f64,
        rho: f64,
    ) -> Self {
        let total_power = db_to_linear(total_power_db);
        SystemConfig {
            cells,
            users,
            antennas,
            eve_antennas,
            total_power,
            data_fraction,
            pilot_len: users,
            pilot_power: total_power / users.max(1) as f64,
            coherence: users + 100,
            path_loss: PathLossModel::Simplified { rho },
            cross_csi: CrossCellCsi::Decoupled,
        }
    }

    /// Replaces the pilot power so that pilot_len * pilot_power equals `energy`.
    pub fn with_pilot_energy(mut self, energy: f64) -> Self {
        self.pilot_power = energy / self.pilot_len as f64;
        self
    }

    pub fn with_data_fraction(mut self, data_fraction: f64) -> Self {
        self.data_fraction = data_fraction;
        self
    }

    /// Sets N_E = round(ratio * N_T).
    pub fn with_eve_ratio(mut self, ratio: f64) -> Self {
        self.eve_antennas = (ratio * self.antennas as f64).round() as usize;
        self
    }

    pub fn with_cross_csi(mut self, csi: CrossCellCsi) -> Self {
        self.cross_csi = csi;
        self
    }

    /// Users per antenna, K/N_T.
    pub fn load(&self) -> f64 {
        self.users as f64 / self.antennas as f64
    }

    /// Eavesdropper antennas per BS antenna, N_E/N_T.
    pub fn eve_ratio(&self) -> f64 {
        self.eve_antennas as f64 / self.antennas as f64
    }

    pub fn pilot_energy(&self) -> f64 {
        self.pilot_power * self.pilot_len as f64
    }

    pub fn rho(&self) -> Option<f64> {
        match self.path_loss {
            PathLossModel::Simplified { rho } => Some(rho),
            PathLossModel::General { .. } => None,
        }
    }

    /// Gain from base station `bs` to user `user` of cell `cell`.
    pub fn gain(&self, bs: usize, cell: usize, user: usize) -> f64 {
        match &self.path_loss {
            PathLossModel::Simplified { rho } => {
                if bs == cell {
                    1.0
                } else {
                    *rho
                }
            }
            PathLossModel::General { user_gain, .. } => user_gain[bs][cell][user],
        }
    }

    /// Gain from base station `bs` to the eavesdropper, which sits in cell 0.
    pub fn eve_gain(&self, bs: usize) -> f64 {
        match &self.path_loss {
            PathLossModel::Simplified { rho } => {
                if bs == 0 {
                    1.0
                } else {
                    *rho
                }
            }
            PathLossModel::General { eve_gain, .. } => eve_gain[bs],
        }
    }

    /// Per-user data power and per-dimension AN power for an AN precoder of rank `an_rank`.
    pub fn derived_powers(&self, an_rank: usize) -> Result<(f64, f64)> {
        if an_rank == 0 {
            return Err(Error::InvalidAnRank);
        }
        let p = self.data_fraction * self.total_power / self.users as f64;
        let q = (1.0 - self.data_fraction) * self.total_power / an_rank as f64;
        Ok((p, q))
    }

    /// Eavesdropper interference factors (a, c) relative to the serving cell 0.
    pub fn interference_factors(&self) -> (f64, f64) {
        let own = self.eve_gain(0);
        let mut a = 1.0;
        let mut c = 1.0;
        for bs in 1..self.cells {
            let r = self.eve_gain(bs) / own;
            a += r;
            c += r * r;
        }
        (a, c)
    }

    /// All violated invariants, empty when the configuration is usable.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: Field, message: String| out.push(Violation { field, message });
        if self.cells == 0 {
            push(Field::Cells, "M >= 1 required".into());
        }
        if self.users == 0 {
            push(Field::Users, "K >= 1 required".into());
        }
        if self.users > self.antennas {
            push(Field::Users, format!("K <= N_T required (K = {}, N_T = {})", self.users, self.antennas));
        }
        if self.pilot_len < self.users {
            push(Field::PilotLen, format!("tau >= K required (tau = {}, K = {})", self.pilot_len, self.users));
        }
        if !(self.data_fraction > 0.0 && self.data_fraction <= 1.0) {
            push(Field::DataFraction, format!("phi in (0, 1] required (phi = {})", self.data_fraction));
        }
        if !(self.total_power > 0.0 && self.total_power.is_finite()) {
            push(Field::TotalPower, "P_T > 0 required".into());
        }
        if !(self.pilot_power >= 0.0 && self.pilot_power.is_finite()) {
            push(Field::PilotPower, "p_tau >= 0 required".into());
        }
        match &self.path_loss {
            PathLossModel::Simplified { rho } => {
                if !(0.0..=1.0).contains(rho) {
                    push(Field::Rho, format!("rho in [0, 1] required (rho = {rho})"));
                }
            }
            PathLossModel::General { user_gain, eve_gain } => {
                let shape_ok = user_gain.len() == self.cells
                    && user_gain.iter().all(|row| {
                        row.len() == self.cells && row.iter().all(|g| g.len() == self.users)
                    })
                    && eve_gain.len() == self.cells;
                if !shape_ok {
                    push(Field::GainTable, "gain table must cover every (bs, cell, user) and every bs for the eavesdropper".into());
                } else if user_gain.iter().flatten().flatten().chain(eve_gain).any(|g| !(*g > 0.0)) {
                    push(Field::GainTable, "all path-loss gains must be strictly positive".into());
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::config(None, v.message)),
        }
    }
}

/// Configuration field a violation refers to, used to point diagnostics at a line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Cells,
    Users,
    Antennas,
    EveAntennas,
    TotalPower,
    DataFraction,
    PilotLen,
    PilotPower,
    Coherence,
    Rho,
    GainTable,
}

impl Field {
    fn key(self) -> &'static str {
        match self {
            Field::Cells => "M",
            Field::Users => "K",
            Field::Antennas => "N_T",
            Field::EveAntennas => "N_E",
            Field::TotalPower => "P_T_dB",
            Field::DataFraction => "phi",
            Field::PilotLen => "tau",
            Field::PilotPower => "p_tau",
            Field::Coherence => "T",
            Field::Rho => "rho",
            Field::GainTable => "gain_table",
        }
    }

    fn from_key(key: &str) -> Option<Field> {
        Some(match key {
            "M" => Field::Cells,
            "K" => Field::Users,
            "N_T" => Field::Antennas,
            "N_E" => Field::EveAntennas,
            "P_T_dB" => Field::TotalPower,
            "phi" => Field::DataFraction,
            "tau" => Field::PilotLen,
            "p_tau" => Field::PilotPower,
            "T" => Field::Coherence,
            "rho" => Field::Rho,
            "gain_table" => Field::GainTable,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub field: Field,
    pub message: String,
}

/// One problem found while reading a configuration file.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// Parses `key = value` text. Relative gain-table paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> std::result::Result<SystemConfig, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut entries: Vec<(Field, usize, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            diags.push(Diagnostic { line: Some(line), message: format!("expected `key = value`, found `{content}`") });
            continue;
        };
        let key = key.trim();
        let value = value.trim().to_string();
        match Field::from_key(key) {
            None => diags.push(Diagnostic { line: Some(line), message: format!("unknown key `{key}`") }),
            Some(field) => {
                if let Some((_, first, _)) = entries.iter().find(|(f, _, _)| *f == field) {
                    diags.push(Diagnostic {
                        line: Some(line),
                        message: format!("duplicate key `{key}` (first set on line {first})"),
                    });
                } else {
                    entries.push((field, line, value));
                }
            }
        }
    }

    let line_of = |field: Field| entries.iter().find(|(f, _, _)| *f == field).map(|(_, l, _)| *l);
    let raw_of = |field: Field| entries.iter().find(|(f, _, _)| *f == field).map(|(_, l, v)| (*l, v.clone()));

    fn parse_num<T: std::str::FromStr>(
        diags: &mut Vec<Diagnostic>,
        entry: Option<(usize, String)>,
        key: &str,
        what: &str,
    ) -> Option<T> {
        let (line, value) = entry?;
        match value.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                diags.push(Diagnostic { line: Some(line), message: format!("`{key}` must be {what}, found `{value}`") });
                None
            }
        }
    }

    let cells: Option<usize> = parse_num(&mut diags, raw_of(Field::Cells), "M", "a non-negative integer");
    let users: Option<usize> = parse_num(&mut diags, raw_of(Field::Users), "K", "a non-negative integer");
    let antennas: Option<usize> = parse_num(&mut diags, raw_of(Field::Antennas), "N_T", "a non-negative integer");
    let eve: Option<usize> = parse_num(&mut diags, raw_of(Field::EveAntennas), "N_E", "a non-negative integer");
    let p_db: Option<f64> = parse_num(&mut diags, raw_of(Field::TotalPower), "P_T_dB", "a number");
    let phi: Option<f64> = parse_num(&mut diags, raw_of(Field::DataFraction), "phi", "a number");
    let tau: Option<usize> = parse_num(&mut diags, raw_of(Field::PilotLen), "tau", "a non-negative integer");
    let p_tau: Option<f64> = parse_num(&mut diags, raw_of(Field::PilotPower), "p_tau", "a number");
    let coherence: Option<usize> = parse_num(&mut diags, raw_of(Field::Coherence), "T", "a non-negative integer");
    let rho: Option<f64> = parse_num(&mut diags, raw_of(Field::Rho), "rho", "a number");

    for (field, parsed) in [
        (Field::Cells, cells.is_some()),
        (Field::Users, users.is_some()),
        (Field::Antennas, antennas.is_some()),
        (Field::TotalPower, p_db.is_some()),
        (Field::DataFraction, phi.is_some()),
    ] {
        if !parsed && line_of(field).is_none() {
            diags.push(Diagnostic { line: None, message: format!("missing required key `{}`", field.key()) });
        }
    }
    let table_entry = raw_of(Field::GainTable);
    if rho.is_none() && table_entry.is_none() && line_of(Field::Rho).is_none() {
        diags.push(Diagnostic { line: None, message: "one of `rho` or `gain_table` is required".into() });
    }
    if line_of(Field::Rho).is_some() && table_entry.is_some() {
        diags.push(Diagnostic {
            line: line_of(Field::GainTable),
            message: "`rho` and `gain_table` are mutually exclusive".into(),
        });
    }

    let (Some(cells), Some(users), Some(antennas), Some(p_db), Some(phi)) = (cells, users, antennas, p_db, phi) else {
        return Err(diags);
    };

    let path_loss = if let Some((line, path)) = table_entry {
        let full: PathBuf = base_dir.join(&path);
        match std::fs::read_to_string(&full) {
            Err(e) => {
                diags.push(Diagnostic { line: Some(line), message: format!("cannot read gain table {}: {e}", full.display()) });
                return Err(diags);
            }
            Ok(text) => match parse_gain_table(&text, cells, users) {
                Ok(pl) => pl,
                Err(table_diags) => {
                    diags.extend(table_diags.into_iter().map(|d| Diagnostic {
                        line: Some(line),
                        message: match d.line {
                            Some(l) => format!("gain table {} line {l}: {}", full.display(), d.message),
                            None => format!("gain table {}: {}", full.display(), d.message),
                        },
                    }));
                    return Err(diags);
                }
            },
        }
    } else if let Some(rho) = rho {
        PathLossModel::Simplified { rho }
    } else {
        return Err(diags);
    };

    let total_power = db_to_linear(p_db);
    let pilot_len = tau.unwrap_or(users);
    let cfg = SystemConfig {
        cells,
        users,
        antennas,
        eve_antennas: eve.unwrap_or(0),
        total_power,
        data_fraction: phi,
        pilot_len,
        pilot_power: p_tau.unwrap_or(total_power / users.max(1) as f64),
        coherence: coherence.unwrap_or(pilot_len + 100),
        path_loss,
        cross_csi: CrossCellCsi::Decoupled,
    };
    for v in cfg.violations() {
        let line = line_of(v.field).or_else(|| match v.field {
            Field::PilotLen => line_of(Field::Users),
            _ => None,
        });
        diags.push(Diagnostic { line, message: v.message });
    }
    if diags.is_empty() {
        Ok(cfg)
    } else {
        Err(diags)
    }
}

/// Gain table lines: `beta <bs> <cell> <user> <value>` and `beta_e <bs> <value>`, indices from 0.
pub fn parse_gain_table(text: &str, cells: usize, users: usize) -> std::result::Result<PathLossModel, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut user_gain = vec![vec![vec![f64::NAN; users]; cells]; cells];
    let mut eve_gain = vec![f64::NAN; cells];
    for (idx, raw) in text.lines().enumerate() {
        let line = Some(idx + 1);
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let bad = |msg: String| Diagnostic { line, message: msg };
        match tokens.as_slice() {
            ["beta", bs, cell, user, value] => {
                let parsed = (bs.parse::<usize>(), cell.parse::<usize>(), user.parse::<usize>(), value.parse::<f64>());
                match parsed {
                    (Ok(b), Ok(c), Ok(u), Ok(v)) if b < cells && c < cells && u < users => user_gain[b][c][u] = v,
                    (Ok(_), Ok(_), Ok(_), Ok(_)) => diags.push(bad(format!("index out of range in `{content}`"))),
                    _ => diags.push(bad(format!("cannot parse `{content}`"))),
                }
            }
            ["beta_e", bs, value] => match (bs.parse::<usize>(), value.parse::<f64>()) {
                (Ok(b), Ok(v)) if b < cells => eve_gain[b] = v,
                (Ok(_), Ok(_)) => diags.push(bad(format!("index out of range in `{content}`"))),
                _ => diags.push(bad(format!("cannot parse `{content}`"))),
            },
            _ => diags.push(bad(format!("expected `beta bs cell user value` or `beta_e bs value`, found `{content}`"))),
        }
    }
    if user_gain.iter().flatten().flatten().chain(&eve_gain).any(|g| g.is_nan()) {
        diags.push(Diagnostic { line: None, message: "table does not cover every (bs, cell, user) and every beta_e".into() });
    }
    if diags.is_empty() {
        Ok(PathLossModel::General { user_gain, eve_gain })
    } else {
        Err(diags)
    }
}

/// Reads and checks a configuration file, returning every diagnostic found.
pub fn validate_config(path: &Path) -> Result<Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(match parse_config(&text, base) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    })
}

/// Reads a configuration file, failing with the first diagnostic.
pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base).map_err(|d| {
        let first = d.into_iter().next().expect("parse errors carry at least one diagnostic");
        Error::Config { line: first.line, message: first.message }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> SystemConfig {
        SystemConfig::simplified(2, 10, 100, 10, 10.0, 0.75, 0.3)
    }

    #[test]
    fn powers_match_worked_examples() {
        let c = cfg();
        let (p, q) = c.derived_powers(90).unwrap();
        assert!((p - 0.75).abs() < 1e-12);
        assert!((q - 2.5 / 90.0).abs() < 1e-12);

        let c2 = SystemConfig { users: 20, data_fraction: 0.5, ..cfg() };
        let (p, q) = c2.derived_powers(180).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
        assert!((p * 20.0 + q * 180.0 - 10.0).abs() < 1e-12);

        let c3 = cfg().with_data_fraction(1.0);
        assert_eq!(c3.derived_powers(7).unwrap().1, 0.0);
        assert!(matches!(c.derived_powers(0), Err(Error::InvalidAnRank)));
    }

    #[test]
    fn interference_factor_examples() {
        let (a, c) = cfg().interference_factors();
        assert!((a - 1.3).abs() < 1e-12 && (c - 1.09).abs() < 1e-12);
        let zero = SystemConfig { path_loss: PathLossModel::Simplified { rho: 0.0 }, ..cfg() };
        assert_eq!(zero.interference_factors(), (1.0, 1.0));
        let seven = SystemConfig { cells: 7, path_loss: PathLossModel::Simplified { rho: 1.0 }, ..cfg() };
        let (a, c) = seven.interference_factors();
        assert!((a - 7.0).abs() < 1e-12 && (c - 7.0).abs() < 1e-12 && (a * a / c - 7.0).abs() < 1e-12);
    }

    #[test]
    fn general_model_with_simplified_pattern_agrees() {
        let s = cfg();
        let rho = 0.3;
        let user_gain = (0..2)
            .map(|b| (0..2).map(|c| vec![if b == c { 1.0 } else { rho }; 10]).collect())
            .collect();
        let g = SystemConfig {
            path_loss: PathLossModel::General { user_gain, eve_gain: vec![1.0, rho] },
            ..s.clone()
        };
        for b in 0..2 {
            assert_eq!(s.eve_gain(b), g.eve_gain(b));
            for c in 0..2 {
                for u in 0..10 {
                    assert_eq!(s.gain(b, c, u), g.gain(b, c, u));
                }
            }
        }
        assert_eq!(s.interference_factors(), g.interference_factors());
    }

    #[test]
    fn parses_file_with_defaults() {
        let text = "# demo\nM = 2\nK = 10\nN_T = 100\nN_E = 10\nP_T_dB = 10\nphi = 0.75\nrho = 0.1 # inter-cell\n";
        let c = parse_config(text, Path::new(".")).unwrap();
        assert_eq!(c.pilot_len, 10);
        assert!((c.total_power - 10.0).abs() < 1e-12);
        assert!((c.pilot_power - 1.0).abs() < 1e-12);
        assert_eq!(c.coherence, 110);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let text = "M = 2\nK = 10\nN_T = 100\nP_T_dB = 10\nphi = 1.5\nrho = 0.1\n";
        let d = parse_config(text, Path::new(".")).unwrap_err();
        assert!(d.iter().any(|d| d.line == Some(5) && d.message.contains("phi in (0, 1]")), "{d:?}");

        let text = "M = 2\nK = 200\nN_T = 100\nP_T_dB = 10\nphi = 0.5\nrho = 0.1\n";
        let d = parse_config(text, Path::new(".")).unwrap_err();
        assert!(d.iter().any(|d| d.line == Some(2) && d.message.contains("K <= N_T")), "{d:?}");

        let text = "M = 2\nK = x\nbogus = 1\nphi = 0.5\nphi = 0.6\n";
        let d = parse_config(text, Path::new(".")).unwrap_err();
        assert!(d.iter().any(|d| d.line == Some(2)));
        assert!(d.iter().any(|d| d.line == Some(3) && d.message.contains("unknown key")));
        assert!(d.iter().any(|d| d.line == Some(5) && d.message.contains("duplicate")));
        assert!(d.iter().any(|d| d.line.is_none() && d.message.contains("N_T")));
    }

    #[test]
    fn gain_table_round_trip() {
        let dir = std::env::temp_dir().join(format!("secmimo-gain-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut table = String::new();
        for b in 0..2 {
            for c in 0..2 {
                for u in 0..3 {
                    table.push_str(&format!("beta {b} {c} {u} {}\n", if b == c { 1.0 } else { 0.2 }));
                }
            }
            table.push_str(&format!("beta_e {b} {}\n", if b == 0 { 1.0 } else { 0.2 }));
        }
        std::fs::write(dir.join("gains.txt"), table).unwrap();
        let text = "M = 2\nK = 3\nN_T = 16\nP_T_dB = 10\nphi = 0.5\ngain_table = gains.txt\n";
        let c = parse_config(text, &dir).unwrap();
        assert_eq!(c.gain(1, 0, 2), 0.2);
        assert_eq!(c.eve_gain(1), 0.2);

        std::fs::write(dir.join("bad.txt"), "beta 0 0 0 1.0\nbeta 9 0 0 1\n").unwrap();
        let text = "M = 2\nK = 3\nN_T = 16\nP_T_dB = 10\nphi = 0.5\ngain_table = bad.txt\n";
        let d = parse_config(text, &dir).unwrap_err();
        assert!(d.iter().all(|d| d.line == Some(6)));
        assert!(d.iter().any(|d| d.message.contains("line 2")));
    }

    proptest! {
        #[test]
        fn power_budget_is_conserved(phi in 0.01f64..=1.0, users in 1usize..64, rank in 1usize..512, p_db in -10.0f64..30.0) {
            let c = SystemConfig { users, ..cfg() }.with_data_fraction(phi);
            let c = SystemConfig { total_power: db_to_linear(p_db), ..c };
            let (p, q) = c.derived_powers(rank).unwrap();
            prop_assert!((p * users as f64 + q * rank as f64 - c.total_power).abs() <= 1e-9 * c.total_power);
        }

        #[test]
        fn interference_factor_bounds(rho in 0.0f64..=1.0, cells in 1usize..12) {
            let c = SystemConfig { cells, path_loss: PathLossModel::Simplified { rho }, ..cfg() };
            let (a, cc) = c.interference_factors();
            prop_assert!(1.0 <= cc && cc <= a + 1e-12 && a <= cells as f64 + 1e-12);
            prop_assert!(a * a / cc <= cells as f64 + 1e-9);
        }
    }
}
