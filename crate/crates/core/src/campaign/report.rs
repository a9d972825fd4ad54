//! Aggregated campaign results.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ids::AppId;

use super::detect::{DedupeKey, Issue};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub total: usize,
    pub unique: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub test_cases: usize,
    pub executions: usize,
    pub total: usize,
    pub unique: usize,
    pub by_app: BTreeMap<AppId, Counts>,
    pub by_kind: BTreeMap<String, Counts>,
    pub by_subtype: BTreeMap<String, Counts>,
    pub by_op: BTreeMap<String, Counts>,
    /// First occurrence of every distinct issue.
    pub unique_issues: Vec<Issue>,
}

fn bump(map: &mut BTreeMap<String, Counts>, key: String, fresh: bool) {
    let c = map.entry(key).or_default();
    c.total += 1;
    c.unique += usize::from(fresh);
}

pub fn report(issues: &[Issue]) -> CampaignReport {
    let mut r = CampaignReport {
        total: issues.len(),
        ..CampaignReport::default()
    };
    let mut seen: BTreeSet<&DedupeKey> = BTreeSet::new();
    for i in issues {
        let fresh = seen.insert(&i.dedupe_key);
        if fresh {
            r.unique_issues.push(i.clone());
        }
        let app = r.by_app.entry(i.tested_app.clone()).or_default();
        app.total += 1;
        app.unique += usize::from(fresh);
        bump(&mut r.by_kind, i.kind.as_str().to_string(), fresh);
        if let Some(s) = &i.subtype {
            bump(&mut r.by_subtype, s.label(), fresh);
        }
        bump(&mut r.by_op, i.test_kind.as_str().to_string(), fresh);
    }
    r.unique = seen.len();
    r
}

impl CampaignReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Human-readable summary table.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "test cases: {}  executions: {}  issues: {}  unique: {}",
            self.test_cases, self.executions, self.total, self.unique
        );
        let mut section = |title: &str, rows: Vec<(String, &Counts)>| {
            if rows.is_empty() {
                return;
            }
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max(title.len());
            let _ = writeln!(out, "\n{title:<width$}  {:>6}  {:>6}", "total", "unique");
            for (k, c) in rows {
                let _ = writeln!(out, "{k:<width$}  {:>6}  {:>6}", c.total, c.unique);
            }
        };
        section("app", self.by_app.iter().map(|(k, c)| (k.to_string(), c)).collect());
        section("kind", self.by_kind.iter().map(|(k, c)| (k.clone(), c)).collect());
        section("subtype", self.by_subtype.iter().map(|(k, c)| (k.clone(), c)).collect());
        section("operation", self.by_op.iter().map(|(k, c)| (k.clone(), c)).collect());
        out
    }
}
