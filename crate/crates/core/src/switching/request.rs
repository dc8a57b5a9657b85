//! Isolation requests and their document format.
//!
//! ```text
//! request <id> [job=<job>] [aerial=0|1]
//! target <section> [<section> ...]
//! keeplive [<section> ...]      # optional; replaces the topology default
//! ```
//!
//! A file may hold several requests; `target` and `keeplive` lines belong to
//! the most recent `request`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::ids::*;
use crate::records::{parse_records, DocumentError};
use crate::topology::NetworkTopology;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolationRequest {
    pub id: RequestId,
    pub target_sections: BTreeSet<SectionId>,
    /// `None` means the topology's keep-live assets.
    pub keep_live: Option<BTreeSet<SectionId>>,
    pub requesting_job: Option<JobId>,
    pub allow_aerial_grounds: bool,
}

impl IsolationRequest {
    pub fn new(id: impl Into<RequestId>, targets: impl IntoIterator<Item = impl Into<SectionId>>) -> Self {
        Self {
            id: id.into(),
            target_sections: targets.into_iter().map(Into::into).collect(),
            keep_live: None,
            requesting_job: None,
            allow_aerial_grounds: false,
        }
    }

    /// Keep-live sections in force for this request.
    pub fn effective_keep_live(&self, topology: &NetworkTopology) -> BTreeSet<SectionId> {
        match &self.keep_live {
            Some(k) => k.clone(),
            None => topology.track_layout().keep_live.iter().cloned().collect(),
        }
    }

    pub fn to_document(&self) -> String {
        let mut out = format!("request {}", self.id);
        if let Some(j) = &self.requesting_job {
            let _ = write!(out, " job={j}");
        }
        if self.allow_aerial_grounds {
            out.push_str(" aerial=1");
        }
        out.push('\n');
        if !self.target_sections.is_empty() {
            out.push_str("target");
            for s in &self.target_sections {
                let _ = write!(out, " {s}");
            }
            out.push('\n');
        }
        if let Some(k) = &self.keep_live {
            out.push_str("keeplive");
            for s in k {
                let _ = write!(out, " {s}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn parse_requests(text: &str) -> Result<Vec<IsolationRequest>, DocumentError> {
    let mut out: Vec<IsolationRequest> = Vec::new();
    for r in parse_records(text)? {
        match r.keyword.as_str() {
            "request" => {
                r.expect_arity(1, 1)?;
                r.reject_unknown_options(&["job", "aerial"])?;
                let mut req = IsolationRequest::new(r.arg(0, "request id")?, Vec::<SectionId>::new());
                req.requesting_job = r.opt::<String>("job")?.map(JobId::new);
                req.allow_aerial_grounds = r.flag("aerial")?.unwrap_or(false);
                out.push(req);
            }
            "target" | "keeplive" => {
                let cur = out
                    .last_mut()
                    .ok_or_else(|| DocumentError::new(r.line, format!("`{}` before any `request`", r.keyword)))?;
                let ids = r.positional.iter().map(|s| SectionId::new(s.as_str()));
                if r.keyword == "target" {
                    cur.target_sections.extend(ids);
                } else {
                    cur.keep_live.get_or_insert_with(BTreeSet::new).extend(ids);
                }
            }
            other => return Err(DocumentError::new(r.line, format!("unknown request record `{other}`"))),
        }
    }
    Ok(out)
}
