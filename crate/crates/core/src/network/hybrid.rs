use super::{NetworkState, NodeRole};
use crate::bayes::{reduce, BayesError, Estimator, Localizer};
use crate::geometry::{NodeId, Point};
use crate::grid::GridSpec;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HybridOutcome {
    pub estimates: BTreeMap<NodeId, Point>,
    /// Unknowns in no sub-region, localized at the super-sink.
    pub uncovered: usize,
    /// Unknowns whose regions have no serving sink, localized at the super-sink.
    pub orphaned: usize,
    /// Unknowns with no log rows at all, placed at the area center.
    pub empty_logs: usize,
    /// Rows skipped as contradictory or degenerate.
    pub contradictions: usize,
}

/// Hybrid localization. Every sub-region's serving sink acts as the
/// computing unit for its unknown members and runs the Bayesian log
/// processing over the rows in its database. Nodes outside any serving
/// region fall back to the super-sink's database.
pub fn localize_hybrid(
    network: &NetworkState,
    spec: &GridSpec,
    estimator: Estimator,
    localizer: &mut Localizer,
) -> Result<HybridOutcome, BayesError> {
    if localizer.spec() != spec {
        *localizer = Localizer::new(*spec);
    }
    let mut out = HybridOutcome::default();
    let archive = network.database(network.super_sink());
    for node in network.nodes().iter().filter(|n| n.role == NodeRole::Unknown) {
        let u = node.id;
        let mut covering = network
            .regions()
            .iter()
            .filter(|r| r.members.contains(&u))
            .peekable();
        let covered = covering.peek().is_some();
        let cu = covering.find_map(|r| network.acting_cu(r));
        let db = match cu {
            Some(cu) => network.database(cu),
            None => {
                if covered {
                    out.orphaned += 1;
                } else {
                    out.uncovered += 1;
                }
                archive
            }
        };
        let rows = db.and_then(|d| d.get(&u)).map(|l| l.rows()).unwrap_or_default();
        if rows.is_empty() {
            out.empty_logs += 1;
            out.estimates.insert(u, network.area_center());
            continue;
        }
        let post = localizer.process_log(&rows)?;
        out.contradictions += post.skipped_rows;
        out.estimates.insert(u, reduce(&post.estimate, estimator));
    }
    Ok(out)
}
