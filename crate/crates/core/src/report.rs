//! Machine-readable run summary. The layout is described by
//! `docs/report.schema.json`; bump [`SCHEMA_VERSION`] on any change.

use serde::{Deserialize, Serialize};

use crate::geometry::{Coord, PlanarRect};
use crate::gridgen::{GridParams, ParamSeed, RectCatalog};
use crate::percolation::{CensusResult, Estimate, FkgResult, RoadSurvival};
use crate::planner::{ParamPlan, PlanReport};
use crate::tree::RectTree;

pub const SCHEMA_NAME: &str = "slabfold-report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanEcho {
    pub seed: ParamSeed,
    pub gamma: f64,
    pub nu0: u64,
    pub c: f64,
    pub params: Vec<GridParams>,
    pub n: Vec<Coord>,
    pub lambda: Vec<Coord>,
    pub k: Vec<u64>,
    pub m: Vec<usize>,
    pub explicit_m: bool,
    pub validation: PlanReport,
}

impl PlanEcho {
    pub fn new(plan: &ParamPlan, validation: PlanReport) -> Self {
        Self {
            seed: plan.seed.clone(),
            gamma: plan.gamma,
            nu0: plan.nu0,
            c: plan.c,
            params: plan.params.clone(),
            n: plan.n.clone(),
            lambda: plan.lambda.clone(),
            k: plan.k.k.clone(),
            m: plan.m.clone(),
            explicit_m: plan.explicit_m,
            validation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogStats {
    pub viewport: PlanarRect,
    pub entries: usize,
    pub windows: usize,
    pub clipped: usize,
    pub tree_edges: usize,
    pub frontier: usize,
    pub slices: usize,
    pub vertices: usize,
    pub edges: usize,
    pub components: usize,
}

impl CatalogStats {
    pub fn new(catalog: &RectCatalog, tree: &RectTree) -> Self {
        Self {
            viewport: catalog.viewport,
            entries: catalog.len(),
            windows: catalog.windows.len(),
            clipped: catalog.entries.iter().filter(|e| e.clipped).count(),
            tree_edges: tree.edge_count(),
            frontier: (0..tree.len()).filter(|&v| tree.is_frontier(v)).count(),
            slices: 0,
            vertices: 0,
            edges: 0,
            components: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub name: String,
    pub pass: bool,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub label: String,
    pub p: f64,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadRecord {
    pub p: f64,
    pub members: usize,
    pub survival: RoadSurvival,
    pub product_of_marginals: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkgRecord {
    pub label: String,
    pub p: f64,
    pub result: FkgResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusSummary {
    pub p: f64,
    pub span_box: PlanarRect,
    pub counts: Vec<usize>,
    pub median: f64,
    pub mean: f64,
    pub min: usize,
    /// Spanning assembly components with every edge open.
    pub full_retention: usize,
}

impl CensusSummary {
    pub fn new(result: &CensusResult, full_retention: usize) -> Self {
        Self {
            p: result.p,
            span_box: result.span_box,
            counts: result.counts.clone(),
            median: result.median(),
            mean: result.mean(),
            min: result.min(),
            full_retention,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub schema_version: u32,
    pub master_seed: u64,
    pub plan: PlanEcho,
    #[serde(default)]
    pub catalog: Option<CatalogStats>,
    #[serde(default)]
    pub audits: Vec<AuditSummary>,
    #[serde(default)]
    pub crossing: Vec<CrossingRecord>,
    #[serde(default)]
    pub road: Vec<RoadRecord>,
    #[serde(default)]
    pub fkg: Vec<FkgRecord>,
    #[serde(default)]
    pub census: Option<CensusSummary>,
}

impl Report {
    /// A report holding only the plan echo.
    pub fn new(master_seed: u64, plan: PlanEcho) -> Self {
        Self {
            schema: SCHEMA_NAME.into(),
            schema_version: SCHEMA_VERSION,
            master_seed,
            plan,
            catalog: None,
            audits: Vec::new(),
            crossing: Vec::new(),
            road: Vec::new(),
            fkg: Vec::new(),
            census: None,
        }
    }

    pub fn all_audits_pass(&self) -> bool {
        self.audits.iter().all(|a| a.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
