//! The JSON game-file format.

use serde::{Deserialize, Serialize};

use olp_core::perception::{LowRank, PerceptionFamily, TableElement, TableFamily};
use olp_core::solver::GameInstance;
use olp_core::{Capability, Matrix};

use crate::CliError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub family: FamilyName,
    pub zero_sum: bool,
    pub capabilities: [CapabilitySpec; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perceived_row: Option<MatrixRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perceived_col: Option<MatrixRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_row: Option<MatrixRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_col: Option<MatrixRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universe: Option<Vec<UniverseEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<MapEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Masked,
    Quantized,
    LimitedRank,
    Table,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum CapabilitySpec {
    Level(u32),
    Named(String),
}

/// A matrix given inline, either nested or flat row-major, or by table id.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum MatrixRef {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
    Id(String),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseEntry {
    pub id: String,
    #[serde(rename = "A")]
    pub a: MatrixRef,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixRef>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MapEntry {
    pub from: String,
    pub level: u32,
    pub to: String,
}

/// A parsed game together with the family and the raw matrices of the file.
pub struct LoadedGame {
    pub game: GameInstance,
    pub family: PerceptionFamily,
    pub c_row: Capability,
    pub c_col: Capability,
    pub perceived_row: Matrix,
    pub perceived_col: Option<Matrix>,
    pub true_row: Option<Matrix>,
    pub true_col: Option<Matrix>,
}

impl LoadedGame {
    /// The id of `u` when the family is a table.
    pub fn table_id(&self, u: &Matrix) -> Option<String> {
        match &self.game.family {
            PerceptionFamily::Table(t) => t.index_of(u).map(|i| t.id(i).to_string()),
            _ => None,
        }
    }
}

/// Parses a game file; errors carry the line and column of the offending token.
pub fn parse_game(text: &str, origin: &str) -> Result<LoadedGame, CliError> {
    let file: GameFile = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("{origin}: line {} column {}: {e}", e.line(), e.column())))?;
    build_game(&file).map_err(|e| CliError::Input(format!("{origin}: {e}")))
}

fn capability(spec: &CapabilitySpec) -> Result<Capability, String> {
    match spec {
        CapabilitySpec::Level(c) => Capability::finite(*c).ok_or_else(|| "capabilities start at 1".to_string()),
        CapabilitySpec::Named(s) if s == "inf" => Ok(Capability::Infinite),
        CapabilitySpec::Named(s) => Err(format!("capability must be a positive integer or \"inf\", got {s:?}")),
    }
}

fn build_game(file: &GameFile) -> Result<LoadedGame, String> {
    let c_row = capability(&file.capabilities[0])?;
    let c_col = capability(&file.capabilities[1])?;
    let table = match file.family {
        FamilyName::Table => Some(build_table(file)?),
        _ => {
            if file.universe.is_some() || file.map.is_some() || file.level_cap.is_some() {
                return Err("universe, map and level_cap belong to table families".into());
            }
            None
        }
    };
    let family = match (file.family, &table) {
        (FamilyName::Masked, _) => PerceptionFamily::Masked,
        (FamilyName::Quantized, _) => PerceptionFamily::Quantized,
        (FamilyName::LimitedRank, _) => {
            let mut lr = LowRank::default();
            if let Some(t) = file.tie_tol {
                lr.tie_tol = t;
            }
            if let Some(t) = file.rank_tol {
                lr.rank_tol = t;
            }
            PerceptionFamily::LimitedRank(lr)
        }
        (FamilyName::Table, Some(t)) => PerceptionFamily::Table(t.clone()),
        (FamilyName::Table, None) => unreachable!("table built above"),
    };
    let resolve = |r: &MatrixRef, what: &str| -> Result<Matrix, String> {
        resolve_matrix(r, file.rows, file.cols, table.as_ref()).map_err(|e| format!("{what}: {e}"))
    };
    let Some(row_ref) = &file.perceived_row else {
        return Err("perceived_row is required".into());
    };
    let perceived_row = resolve(row_ref, "perceived_row")?;
    let perceived_col = match (&file.perceived_col, file.zero_sum) {
        (Some(_), true) => return Err("zero-sum games take no perceived_col".into()),
        (None, false) => return Err("general-sum games need perceived_col".into()),
        (Some(r), false) => Some(resolve(r, "perceived_col")?),
        (None, true) => None,
    };
    let true_row = file.true_row.as_ref().map(|r| resolve(r, "true_row")).transpose()?;
    let true_col = file.true_col.as_ref().map(|r| resolve(r, "true_col")).transpose()?;
    let mut game = GameInstance::new(family.clone(), perceived_row.clone(), perceived_col.clone(), c_row, c_col)
        .map_err(|e| e.to_string())?;
    match (&true_row, &true_col) {
        (Some(r), c) => game = game.with_truth(r.clone(), c.clone()).map_err(|e| e.to_string())?,
        (None, Some(_)) => return Err("true_col needs true_row".into()),
        (None, None) => {}
    }
    Ok(LoadedGame { game, family, c_row, c_col, perceived_row, perceived_col, true_row, true_col })
}

fn build_table(file: &GameFile) -> Result<TableFamily, String> {
    let (Some(universe), Some(map), Some(cap)) = (&file.universe, &file.map, file.level_cap) else {
        return Err("table families need universe, map and level_cap".into());
    };
    let mut elements = Vec::new();
    for entry in universe {
        let a = resolve_matrix(&entry.a, file.rows, file.cols, None).map_err(|e| format!("universe {}: {e}", entry.id))?;
        elements.push(TableElement::new(entry.id.clone(), a));
        if let Some(b) = &entry.b {
            let b = resolve_matrix(b, file.rows, file.cols, None).map_err(|e| format!("universe {}: {e}", entry.id))?;
            elements.push(TableElement::new(format!("{}:B", entry.id), b));
        }
    }
    let entries: Vec<(&str, u32, &str)> = map.iter().map(|e| (e.from.as_str(), e.level, e.to.as_str())).collect();
    TableFamily::from_entries(elements, cap, &entries).map_err(|e| e.to_string())
}

fn resolve_matrix(
    r: &MatrixRef,
    rows: Option<usize>,
    cols: Option<usize>,
    table: Option<&TableFamily>,
) -> Result<Matrix, String> {
    let m = match r {
        MatrixRef::Nested(data) => Matrix::from_rows(data).map_err(|e| e.to_string())?,
        MatrixRef::Flat(data) => {
            let (Some(rows), Some(cols)) = (rows, cols) else {
                return Err("flat matrices need top-level rows and cols".into());
            };
            Matrix::new(rows, cols, data.clone()).map_err(|e| e.to_string())?
        }
        MatrixRef::Id(id) => {
            let Some(t) = table else { return Err(format!("matrix id {id:?} outside a table family")) };
            let i = t.index_of_id(id).ok_or_else(|| format!("unknown table id {id:?}"))?;
            t.matrix(i).clone()
        }
    };
    if rows.is_some_and(|r| r != m.rows()) || cols.is_some_and(|c| c != m.cols()) {
        return Err(format!("matrix is {}x{}, file declares other dimensions", m.rows(), m.cols()));
    }
    Ok(m)
}

fn nested(m: &Matrix) -> MatrixRef {
    MatrixRef::Nested((0..m.rows()).map(|i| m.row(i).to_vec()).collect())
}

fn capability_spec(c: Capability) -> CapabilitySpec {
    match c {
        Capability::Finite(c) => CapabilitySpec::Level(c),
        Capability::Infinite => CapabilitySpec::Named("inf".into()),
    }
}

/// The game file of a zero-sum table game whose row player perceives `perceived_row`.
pub fn table_game_file(table: &TableFamily, perceived_row: &Matrix, c_row: Capability, c_col: Capability) -> GameFile {
    let universe = table
        .elements()
        .iter()
        .map(|e| UniverseEntry { id: e.id.clone(), a: nested(&e.matrix), b: None })
        .collect();
    let map = table.entries().into_iter().map(|(from, level, to)| MapEntry { from, level, to }).collect();
    let row_id = table.index_of(perceived_row).map(|i| table.id(i).to_string());
    GameFile {
        family: FamilyName::Table,
        zero_sum: true,
        capabilities: [capability_spec(c_row), capability_spec(c_col)],
        rows: None,
        cols: None,
        perceived_row: Some(row_id.map(MatrixRef::Id).unwrap_or_else(|| nested(perceived_row))),
        perceived_col: None,
        true_row: None,
        true_col: None,
        universe: Some(universe),
        map: Some(map),
        level_cap: Some(table.level_cap()),
        tie_tol: None,
        rank_tol: None,
    }
}
