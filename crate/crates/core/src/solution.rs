//! Solution files: the problem, the angle system and, after solving, the
//! reconstructed pattern with a report.

use serde::{Deserialize, Serialize};

use crate::coherent::{build_constraints, is_coherent, AngleSystem, CoherenceReport};
use crate::energy::TetAngles;
use crate::pattern::{DecoratedMetric, PatternReport, TruncatedLengths};
use crate::solve::SolveReport;
use crate::surface::{problem_record, problem_from_record, AngleData, GluedTriangulation, ProblemRecord, SurfaceError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangleAngles {
    pub alpha: [f64; 3],
    pub gamma: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    #[serde(flatten)]
    pub solve: SolveReport,
    pub residuals: PatternReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionRecord {
    problem: ProblemRecord,
    angles: Vec<TriangleAngles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_edge: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_vertex: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<SolutionReport>,
}

/// Contents of a solution file. Everything beyond the problem and the angle
/// system is present only for solved instances.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub tri: GluedTriangulation,
    pub data: AngleData,
    pub x: AngleSystem,
    pub lengths: Option<TruncatedLengths>,
    pub metric: Option<DecoratedMetric>,
    pub report: Option<SolutionReport>,
}

impl Solution {
    /// Re-checks the stored angle system against the stored problem.
    pub fn coherence(&self) -> CoherenceReport {
        is_coherent(&self.x, &build_constraints(&self.tri, &self.data))
            .expect("dimensions are validated when the file is read")
    }
}

pub fn solution_to_json(s: &Solution) -> String {
    let rec = SolutionRecord {
        problem: problem_record(&s.tri, &s.data),
        angles: s.x.tets().map(|t| TriangleAngles { alpha: t.alpha, gamma: t.gamma }).collect(),
        a_edge: s.lengths.as_ref().map(|l| l.a_edge.clone()),
        a_vertex: s.lengths.as_ref().map(|l| l.a_vertex.clone()),
        lengths: s.metric.as_ref().map(|m| m.l.clone()),
        radii: s.metric.as_ref().map(|m| m.r.clone()),
        report: s.report.clone(),
    };
    crate::io::to_json_string(&rec)
}

pub fn parse_solution(text: &str) -> Result<Solution, SurfaceError> {
    let rec: SolutionRecord = serde_json::from_str(text).map_err(|e| SurfaceError::Schema(e.to_string()))?;
    let (tri, data) = problem_from_record(&rec.problem)?;
    if rec.angles.len() != tri.triangle_count() {
        return Err(SurfaceError::Schema(format!(
            "expected angles for {} triangles, got {}",
            tri.triangle_count(),
            rec.angles.len()
        )));
    }
    let x = AngleSystem::from_tets(&rec.angles.iter().map(|a| TetAngles::new(a.alpha, a.gamma)).collect::<Vec<_>>());
    let metric = match (rec.lengths, rec.radii) {
        (Some(l), Some(r)) => {
            if l.len() != tri.edge_count() || r.len() != tri.vertex_count() {
                return Err(SurfaceError::Schema("lengths or radii have the wrong size".into()));
            }
            Some(DecoratedMetric { l, r })
        }
        (None, None) => None,
        _ => return Err(SurfaceError::Schema("lengths and radii must be given together".into())),
    };
    let lengths = match (rec.a_edge, rec.a_vertex) {
        (Some(a_edge), Some(a_vertex)) => {
            let (edge_residual, cycle_residual) = rec
                .report
                .as_ref()
                .map(|r| (r.solve.compat_edge, r.solve.compat_cycle))
                .unwrap_or((f64::NAN, f64::NAN));
            Some(TruncatedLengths { a_edge, a_vertex, edge_residual, cycle_residual })
        }
        (None, None) => None,
        _ => return Err(SurfaceError::Schema("a_edge and a_vertex must be given together".into())),
    };
    Ok(Solution { tri, data, x, lengths, metric, report: rec.report })
}
